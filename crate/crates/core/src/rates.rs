//! Growth rates, stored through their logarithm `R(t) = log μ(t)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprparse::{self, BinOp, Expr, ExprError, Func};
use crate::scalar::{sgn, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    Discrete,
    Continuous,
}

impl fmt::Display for TimeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeDomain::Discrete => "discrete",
            TimeDomain::Continuous => "continuous",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("log-rate evaluation failed at t = {t}: {source}")]
    Eval {
        t: f64,
        #[source]
        source: ExprError,
    },
    #[error("invalid rate parameter: {0}")]
    InvalidParameter(String),
    #[error("glued rate: inner and outer log-rates do not cross on (0, {bound}]")]
    NoCrossover { bound: f64 },
    #[error("invalid rate descriptor: {0}")]
    Descriptor(String),
    #[error("unknown catalog rate `{0}` (known: p, exp, q, c, glued_c_p)")]
    UnknownCatalog(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RateKind<F> {
    /// `log μ(t) = λ sgn(t) |t|^p`.
    PowerExp { p: F, lambda: F },
    Polynomial,
    /// User supplied `log μ(t)`.
    Expression(Expr<F>),
    /// `inner` for `|t| >= crossover`, `outer` below it.
    Glued {
        inner: Box<GrowthRate<F>>,
        outer: Box<GrowthRate<F>>,
        crossover: F,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRate<F> {
    pub kind: RateKind<F>,
    pub time_domain: TimeDomain,
}

/// `value = log μ(to) - log μ(from)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogQuotient<F> {
    pub value: F,
    pub from: F,
    pub to: F,
}

pub const CATALOG_RATES: [&str; 5] = ["p", "exp", "q", "c", "glued_c_p"];

const CROSSOVER_SCAN_POINTS: usize = 1000;
const CROSSOVER_TOL: f64 = 1e-10;
pub const DEFAULT_CROSSOVER_BOUND: f64 = 10.0;

impl<F: Real> GrowthRate<F> {
    pub fn power_exp(p: F, lambda: F, time_domain: TimeDomain) -> Result<Self, RateError> {
        if !(p > F::zero() && p.is_finite()) || !(lambda > F::zero() && lambda.is_finite()) {
            return Err(RateError::InvalidParameter(format!(
                "power_exp needs p > 0 and lambda > 0, got p = {p}, lambda = {lambda}"
            )));
        }
        Ok(GrowthRate { kind: RateKind::PowerExp { p, lambda }, time_domain })
    }

    pub fn polynomial(time_domain: TimeDomain) -> Self {
        GrowthRate { kind: RateKind::Polynomial, time_domain }
    }

    pub fn expression(log_rate: Expr<F>, time_domain: TimeDomain) -> Self {
        GrowthRate { kind: RateKind::Expression(log_rate), time_domain }
    }

    pub fn exp(time_domain: TimeDomain) -> Self {
        Self::power_exp(F::one(), F::one(), time_domain).expect("valid")
    }

    pub fn quadratic(time_domain: TimeDomain) -> Self {
        Self::power_exp(F::of(2.0), F::one(), time_domain).expect("valid")
    }

    pub fn cubic(time_domain: TimeDomain) -> Self {
        Self::power_exp(F::of(3.0), F::one(), time_domain).expect("valid")
    }

    /// Glues two rates; the crossover is located numerically when not given.
    pub fn glued(
        inner: GrowthRate<F>,
        outer: GrowthRate<F>,
        crossover: Option<F>,
    ) -> Result<Self, RateError> {
        if inner.time_domain != outer.time_domain {
            return Err(RateError::InvalidParameter("glued rates must share a time domain".into()));
        }
        let crossover = match crossover {
            Some(a) if a > F::zero() && a.is_finite() => a,
            Some(a) => {
                return Err(RateError::InvalidParameter(format!("crossover must be positive, got {a}")))
            }
            None => find_crossover(&inner, &outer, F::of(DEFAULT_CROSSOVER_BOUND))?,
        };
        let time_domain = inner.time_domain;
        Ok(GrowthRate {
            kind: RateKind::Glued { inner: Box::new(inner), outer: Box::new(outer), crossover },
            time_domain,
        })
    }

    /// Looks up `p`, `exp`, `q`, `c` or `glued_c_p`.
    pub fn catalog(name: &str, time_domain: TimeDomain) -> Result<Self, RateError> {
        match name {
            "p" => Ok(Self::polynomial(time_domain)),
            "exp" => Ok(Self::exp(time_domain)),
            "q" => Ok(Self::quadratic(time_domain)),
            "c" => Ok(Self::cubic(time_domain)),
            "glued_c_p" => Self::glued(Self::cubic(time_domain), Self::polynomial(time_domain), None),
            other => Err(RateError::UnknownCatalog(other.to_string())),
        }
    }

    /// `log μ(t)`.
    pub fn log_rate(&self, t: F) -> Result<F, RateError> {
        match &self.kind {
            RateKind::PowerExp { p, lambda } => Ok(*lambda * sgn(t) * t.abs().powf(*p)),
            RateKind::Polynomial => Ok(match self.time_domain {
                TimeDomain::Continuous => sgn(t) * t.abs().ln_1p(),
                TimeDomain::Discrete if t == F::zero() => F::zero(),
                TimeDomain::Discrete => sgn(t) * t.abs().ln(),
            }),
            RateKind::Expression(e) => {
                e.eval(t).map_err(|source| RateError::Eval { t: t.to_f64_lossy(), source })
            }
            RateKind::Glued { inner, outer, crossover } => {
                if t.abs() >= *crossover {
                    inner.log_rate(t)
                } else {
                    outer.log_rate(t)
                }
            }
        }
    }

    pub fn log_quotient(&self, k: F, n: F) -> Result<LogQuotient<F>, RateError> {
        Ok(LogQuotient { value: self.log_rate(k)? - self.log_rate(n)?, from: n, to: k })
    }

    /// Short name for catalog members, a descriptive one otherwise.
    pub fn label(&self) -> String {
        match &self.kind {
            RateKind::Polynomial => "p".into(),
            RateKind::PowerExp { p, lambda } if *lambda == F::one() && *p == F::one() => "exp".into(),
            RateKind::PowerExp { p, lambda } if *lambda == F::one() && *p == F::of(2.0) => "q".into(),
            RateKind::PowerExp { p, lambda } if *lambda == F::one() && *p == F::of(3.0) => "c".into(),
            RateKind::PowerExp { p, lambda } => format!("power_exp(p={p},lambda={lambda})"),
            RateKind::Expression(e) => format!("expr({e})"),
            RateKind::Glued { inner, outer, .. } => format!("glued_{}_{}", inner.label(), outer.label()),
        }
    }

    /// The log-rate as an expression in `t`, when one exists.
    pub fn to_log_expr(&self) -> Option<Expr<F>> {
        let t = || Expr::Var('t');
        let sgn_t = || Expr::call(Func::Sgn, vec![t()]);
        let abs_t = || Expr::call(Func::Abs, vec![t()]);
        match &self.kind {
            RateKind::PowerExp { p, lambda } => {
                let power = Expr::binary(BinOp::Pow, abs_t(), Expr::Const(*p));
                let body = Expr::binary(BinOp::Mul, sgn_t(), power);
                Some(if *lambda == F::one() {
                    body
                } else {
                    Expr::binary(BinOp::Mul, Expr::Const(*lambda), body)
                })
            }
            RateKind::Polynomial => {
                let arg = match self.time_domain {
                    TimeDomain::Continuous => Expr::binary(BinOp::Add, Expr::Const(F::one()), abs_t()),
                    TimeDomain::Discrete => Expr::call(Func::Max, vec![abs_t(), Expr::Const(F::one())]),
                };
                Some(Expr::binary(BinOp::Mul, sgn_t(), Expr::call(Func::Log, vec![arg])))
            }
            RateKind::Expression(e) => Some(e.with_symbol('t')),
            RateKind::Glued { .. } => None,
        }
    }

    pub fn to_descriptor(&self) -> RateDescriptor {
        RateDescriptor { spec: self.to_spec(), time_domain: Some(self.time_domain) }
    }

    fn to_spec(&self) -> RateSpec {
        match &self.kind {
            RateKind::PowerExp { p, lambda } => {
                RateSpec::PowerExp { p: p.to_f64_lossy(), lambda: lambda.to_f64_lossy() }
            }
            RateKind::Polynomial => RateSpec::Polynomial,
            RateKind::Expression(e) => RateSpec::Expression { log_rate: e.to_string() },
            RateKind::Glued { inner, outer, crossover } => RateSpec::Glued {
                inner: Box::new(inner.to_spec()),
                outer: Box::new(outer.to_spec()),
                crossover: Some(crossover.to_f64_lossy()),
            },
        }
    }
}

impl<F: Real> fmt::Display for GrowthRate<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// First positive root of `log inner - log outer` on `(0, bound]`: a coarse
/// scan for a sign change followed by bisection.
pub fn find_crossover<F: Real>(inner: &GrowthRate<F>, outer: &GrowthRate<F>, bound: F) -> Result<F, RateError> {
    let diff = |t: F| -> Result<F, RateError> { Ok(inner.log_rate(t)? - outer.log_rate(t)?) };
    let step = bound / F::of(CROSSOVER_SCAN_POINTS as f64);
    let mut lo = step;
    let mut f_lo = diff(lo)?;
    for i in 2..=CROSSOVER_SCAN_POINTS {
        let hi = step * F::of(i as f64);
        let f_hi = diff(hi)?;
        if f_lo == F::zero() {
            return Ok(lo);
        }
        if (f_lo < F::zero()) != (f_hi < F::zero()) || f_hi == F::zero() {
            let (mut a, mut b) = (lo, hi);
            let tol = F::of(CROSSOVER_TOL).max(F::epsilon() * hi * F::of(4.0));
            for _ in 0..200 {
                if b - a <= tol {
                    break;
                }
                let mid = (a + b) / F::of(2.0);
                let f_mid = diff(mid)?;
                if (f_mid < F::zero()) == (f_lo < F::zero()) && f_mid != F::zero() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok((a + b) / F::of(2.0));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(RateError::NoCrossover { bound: bound.to_f64_lossy() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport<F> {
    /// Adjacent sample points `(s, t)`, `s < t`, with `log μ(s) > log μ(t)`.
    pub violations: Vec<(F, F)>,
    pub origin_value: F,
    pub origin_ok: bool,
    /// `[log μ(-N), log μ(N)]`.
    pub range: (F, F),
    pub samples: usize,
}

impl<F> ValidationReport<F> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.origin_ok
    }
}

pub const DEFAULT_VALIDATION_DENSITY: usize = 10;

/// Samples the log-rate on `[-N, N]` and reports axiom violations.
pub fn validate_rate<F: Real>(rate: &GrowthRate<F>, window: F) -> Result<ValidationReport<F>, RateError> {
    validate_rate_with_density(rate, window, DEFAULT_VALIDATION_DENSITY)
}

pub fn validate_rate_with_density<F: Real>(
    rate: &GrowthRate<F>,
    window: F,
    density: usize,
) -> Result<ValidationReport<F>, RateError> {
    if !(window > F::zero()) {
        return Err(RateError::InvalidParameter(format!("validation window must be positive, got {window}")));
    }
    let grid: Vec<F> = match rate.time_domain {
        TimeDomain::Discrete => {
            let n = window.floor().to_i64().unwrap_or(0);
            (-n..=n).map(F::of_i64).collect()
        }
        TimeDomain::Continuous => {
            let per_side = (window * F::of(density.max(1) as f64)).ceil().to_i64().unwrap_or(1).max(1);
            let h = window / F::of_i64(per_side);
            (-per_side..=per_side).map(|i| F::of_i64(i) * h).collect()
        }
    };
    let values = grid.iter().map(|&t| rate.log_rate(t)).collect::<Result<Vec<F>, _>>()?;
    let violations = grid
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] > v[1])
        .map(|(t, _)| (t[0], t[1]))
        .collect();
    let origin_value = rate.log_rate(F::zero())?;
    Ok(ValidationReport {
        violations,
        origin_value,
        origin_ok: origin_value.abs() <= F::of(1e-12),
        range: (values[0], values[values.len() - 1]),
        samples: grid.len(),
    })
}

/// JSON rate shape, without the time domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSpec {
    PowerExp {
        p: f64,
        lambda: f64,
    },
    Polynomial,
    Expression {
        log_rate: String,
    },
    Glued {
        inner: Box<RateSpec>,
        outer: Box<RateSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        crossover: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateDescriptor {
    #[serde(flatten)]
    pub spec: RateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_domain: Option<TimeDomain>,
}

impl RateSpec {
    pub fn build<F: Real>(&self, time_domain: TimeDomain) -> Result<GrowthRate<F>, RateError> {
        match self {
            RateSpec::PowerExp { p, lambda } => GrowthRate::power_exp(F::of(*p), F::of(*lambda), time_domain),
            RateSpec::Polynomial => Ok(GrowthRate::polynomial(time_domain)),
            RateSpec::Expression { log_rate } => {
                let e = exprparse::parse(log_rate)
                    .map_err(|e| RateError::Descriptor(format!("log_rate: {e}")))?;
                Ok(GrowthRate::expression(e, time_domain))
            }
            RateSpec::Glued { inner, outer, crossover } => GrowthRate::glued(
                inner.build(time_domain).map_err(|e| nest("inner", e))?,
                outer.build(time_domain).map_err(|e| nest("outer", e))?,
                crossover.map(F::of),
            ),
        }
    }
}

fn nest(field: &str, e: RateError) -> RateError {
    match e {
        RateError::Descriptor(msg) => RateError::Descriptor(format!("{field}.{msg}")),
        other => RateError::Descriptor(format!("{field}: {other}")),
    }
}

impl RateDescriptor {
    /// Builds the rate; an explicit `time_domain` field wins over `default`.
    pub fn build<F: Real>(&self, default: TimeDomain) -> Result<GrowthRate<F>, RateError> {
        self.spec.build(self.time_domain.unwrap_or(default))
    }
}

/// Accepts `catalog:NAME` or a JSON descriptor.
pub fn parse_rate_spec<F: Real>(text: &str, default: TimeDomain) -> Result<GrowthRate<F>, RateError> {
    let text = text.trim();
    if let Some(name) = text.strip_prefix("catalog:") {
        return GrowthRate::catalog(name, default);
    }
    let d: RateDescriptor = serde_json::from_str(text).map_err(|e| RateError::Descriptor(e.to_string()))?;
    d.build(default)
}

/// A relation evaluated in both orientations of a pair `(a, b)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Directed<T> {
    /// The relation read as `a R b`.
    pub forward: T,
    /// The relation read as `b R a`.
    pub backward: T,
}

/// All comparison relations of a pair `(a, b)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationProfile<T = bool> {
    /// `a ≫ b`.
    pub faster: Directed<T>,
    /// `a ≻ b`.
    pub weakly_faster: Directed<T>,
    /// `a ≻· b`.
    pub almost_faster: Directed<T>,
    /// `a ≺· b`.
    pub almost_slower: Directed<T>,
    /// `a ~ b`.
    pub weakly_equivalent: T,
    /// `a ≈ b`.
    pub equivalent: T,
    /// `a ⋘ b`.
    pub chain_order: Directed<T>,
}

/// Order and scale of a closed-form rate: `(0, 1)` for the polynomial rate,
/// `(p, λ)` for `PowerExp(p, λ)`.
fn order_scale<F: Real>(rate: &GrowthRate<F>) -> Option<(F, F)> {
    match &rate.kind {
        RateKind::Polynomial => Some((F::zero(), F::one())),
        RateKind::PowerExp { p, lambda } => Some((*p, *lambda)),
        _ => None,
    }
}

/// Closed-form relation profile for power-exponential and polynomial rates.
pub fn symbolic_compare<F: Real>(a: &GrowthRate<F>, b: &GrowthRate<F>) -> Option<RelationProfile<bool>> {
    if a.time_domain != b.time_domain {
        return None;
    }
    let (oa, la) = order_scale(a)?;
    let (ob, lb) = order_scale(b)?;
    let weakly = |o1: F, l1: F, o2: F, l2: F| o1 > o2 || (o1 == o2 && l1 >= l2);
    Some(RelationProfile {
        faster: Directed { forward: oa > ob, backward: ob > oa },
        weakly_faster: Directed { forward: weakly(oa, la, ob, lb), backward: weakly(ob, lb, oa, la) },
        almost_faster: Directed { forward: oa >= ob, backward: ob >= oa },
        almost_slower: Directed { forward: oa <= ob, backward: ob <= oa },
        weakly_equivalent: oa == ob && la == lb,
        equivalent: oa == ob,
        chain_order: Directed { forward: oa <= ob, backward: ob <= oa },
    })
}
