//! Linear systems `x(k+1) = A(k) x(k)` and `x' = A(t) x` and their
//! evolution operators in log-scaled form.

mod matrix;
mod table;
mod weighted;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprparse::{self, Expr, ExprError};
use crate::rates::{GrowthRate, RateDescriptor, RateError, TimeDomain};
use crate::scalar::Real;

pub use matrix::{operator_norm_bounds, Matrix, ScaledMatrix};
pub use table::Table;
pub use weighted::{weighted_propagate, WeightedSystem};

pub const MAX_DIMENSION: usize = 16;
pub const DEFAULT_STEP: f64 = 1e-2;
const MIN_DET: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("A({k}) is singular")]
    Singular { k: i64 },
    #[error("k = {k} lies outside the table range [{first}, {last}]")]
    OutOfTable { k: i64, first: i64, last: i64 },
    #[error("discrete time must be an integer, got {0}")]
    NonIntegerTime(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid system descriptor: {0}")]
    Descriptor(String),
    #[error("coefficient table: {0}")]
    Table(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Scalar,
    Diagonal,
    Full,
}

impl Structure {
    pub fn is_diagonal(self) -> bool {
        !matches!(self, Structure::Full)
    }
}

/// A log-potential `F` with `log Φ_ii(k, n) = F(k) - F(n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LogPotential<F> {
    Expr(Expr<F>),
    /// `slope * log ν(t)`.
    Rate { rate: GrowthRate<F>, slope: F },
}

impl<F: Real> LogPotential<F> {
    pub fn at(&self, t: F) -> Result<F, EvolutionError> {
        match self {
            LogPotential::Expr(e) => Ok(e.eval(t)?),
            LogPotential::Rate { rate, slope } => {
                if *slope == F::zero() {
                    return Ok(F::zero());
                }
                Ok(*slope * rate.log_rate(t)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients<F> {
    /// One expression per diagonal entry.
    Diagonal(Vec<Expr<F>>),
    /// `d * d` expressions, row-major.
    Entries(Vec<Expr<F>>),
    Table(Table<F>),
    /// Closed-form diagonal propagator.
    ClosedForm(Vec<LogPotential<F>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem<F> {
    pub time_domain: TimeDomain,
    pub dimension: usize,
    pub structure: Structure,
    pub coefficients: Coefficients<F>,
    /// Integration step for continuous systems.
    pub step: F,
}

fn descriptor_err(msg: impl Into<String>) -> EvolutionError {
    EvolutionError::Descriptor(msg.into())
}

fn as_index<F: Real>(t: F) -> Result<i64, EvolutionError> {
    if t.fract() != F::zero() || !t.is_finite() {
        return Err(EvolutionError::NonIntegerTime(t.to_f64_lossy()));
    }
    t.to_i64().ok_or(EvolutionError::NonIntegerTime(t.to_f64_lossy()))
}

impl<F: Real> LinearSystem<F> {
    /// Checks structural consistency.
    pub fn new(
        time_domain: TimeDomain,
        structure: Structure,
        coefficients: Coefficients<F>,
    ) -> Result<Self, EvolutionError> {
        let dimension = match &coefficients {
            Coefficients::Diagonal(v) => v.len(),
            Coefficients::ClosedForm(v) => v.len(),
            Coefficients::Entries(v) => (v.len() as f64).sqrt().round() as usize,
            Coefficients::Table(t) => t.dim(),
        };
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(descriptor_err(format!("dimension must be in 1..={MAX_DIMENSION}, got {dimension}")));
        }
        if structure == Structure::Scalar && dimension != 1 {
            return Err(descriptor_err(format!("scalar structure needs dimension 1, got {dimension}")));
        }
        match &coefficients {
            Coefficients::Diagonal(_) | Coefficients::ClosedForm(_) if !structure.is_diagonal() => {
                return Err(descriptor_err("diagonal coefficients need structure scalar or diagonal"));
            }
            Coefficients::Entries(v) if v.len() != dimension * dimension => {
                return Err(descriptor_err("entries must form a square matrix"));
            }
            Coefficients::Entries(_) if structure.is_diagonal() => {
                return Err(descriptor_err("full entries need structure full"));
            }
            Coefficients::Table(_) if time_domain == TimeDomain::Continuous => {
                return Err(descriptor_err("tabulated coefficients are only available in discrete time"));
            }
            Coefficients::Table(t) if structure.is_diagonal() => {
                let (first, last) = t.range();
                for k in first..=last {
                    if !t.at(k)?.is_diagonal() {
                        return Err(descriptor_err(format!("table row k = {k} has off-diagonal entries")));
                    }
                }
            }
            _ => {}
        }
        Ok(LinearSystem { time_domain, dimension, structure, coefficients, step: F::of(DEFAULT_STEP) })
    }

    pub fn scalar(coefficient: Expr<F>, time_domain: TimeDomain) -> Self {
        Self::new(time_domain, Structure::Scalar, Coefficients::Diagonal(vec![coefficient])).expect("valid")
    }

    pub fn diagonal(coefficients: Vec<Expr<F>>, time_domain: TimeDomain) -> Result<Self, EvolutionError> {
        let structure = if coefficients.len() == 1 { Structure::Scalar } else { Structure::Diagonal };
        Self::new(time_domain, structure, Coefficients::Diagonal(coefficients))
    }

    pub fn full(rows: Vec<Vec<Expr<F>>>, time_domain: TimeDomain) -> Result<Self, EvolutionError> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(descriptor_err("entries must form a square matrix"));
        }
        Self::new(time_domain, Structure::Full, Coefficients::Entries(rows.into_iter().flatten().collect()))
    }

    pub fn closed_form(potentials: Vec<LogPotential<F>>, time_domain: TimeDomain) -> Result<Self, EvolutionError> {
        let structure = if potentials.len() == 1 { Structure::Scalar } else { Structure::Diagonal };
        Self::new(time_domain, structure, Coefficients::ClosedForm(potentials))
    }

    pub fn with_step(mut self, step: F) -> Self {
        self.step = step;
        self
    }

    /// Diagonal of `A(k)` as `(sign, log|a|)` pairs.
    fn discrete_diag_step(&self, k: i64) -> Result<(Vec<i8>, Vec<F>), EvolutionError> {
        let (signs, logs): (Vec<i8>, Vec<F>) = match &self.coefficients {
            Coefficients::Diagonal(es) => es
                .iter()
                .map(|e| e.eval_signed_log(F::of_i64(k)).map(|s| (s.sign, s.log_abs)))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .unzip(),
            Coefficients::Table(t) => t
                .at(k)?
                .diagonal()
                .into_iter()
                .map(|x| (if x > F::zero() { 1 } else if x < F::zero() { -1 } else { 0 }, x.abs().ln()))
                .unzip(),
            _ => unreachable!("diagonal step on non-diagonal coefficients"),
        };
        if signs.contains(&0) {
            return Err(EvolutionError::Singular { k });
        }
        Ok((signs, logs))
    }

    /// `A(k)` in scaled form; errors when it is numerically singular.
    fn discrete_matrix_step(&self, k: i64) -> Result<ScaledMatrix<F>, EvolutionError> {
        let m = match &self.coefficients {
            Coefficients::Entries(es) => {
                let sl = es
                    .iter()
                    .map(|e| e.eval_signed_log(F::of_i64(k)))
                    .collect::<Result<Vec<_>, _>>()?;
                let top = sl.iter().fold(F::neg_infinity(), |m, s| m.max(s.log_abs));
                if top == F::neg_infinity() {
                    return Err(EvolutionError::Singular { k });
                }
                let unit = sl.iter().map(|s| F::of(s.sign as f64) * (s.log_abs - top).exp()).collect();
                ScaledMatrix::from_matrix(Matrix::from_row_major(self.dimension, unit), top)
            }
            Coefficients::Table(t) => ScaledMatrix::from_matrix(t.at(k)?.clone(), F::zero()),
            Coefficients::Diagonal(_) => {
                let (s, l) = self.discrete_diag_step(k)?;
                ScaledMatrix::from_signed_logs(&s, &l)
            }
            Coefficients::ClosedForm(_) => unreachable!("closed forms have no step matrices"),
        };
        match m.unit.inverse_with_det() {
            Some((_, det)) if det > F::of(MIN_DET) => Ok(m),
            _ => Err(EvolutionError::Singular { k }),
        }
    }

    fn inverse_step(&self, k: i64) -> Result<ScaledMatrix<F>, EvolutionError> {
        let m = self.discrete_matrix_step(k)?;
        let (inv, _) = m.unit.inverse_with_det().ok_or(EvolutionError::Singular { k })?;
        Ok(ScaledMatrix::from_matrix(inv, -m.log_norm))
    }

    fn coefficient_matrix(&self, t: F) -> Result<Matrix<F>, EvolutionError> {
        match &self.coefficients {
            Coefficients::Entries(es) => Ok(Matrix::from_row_major(
                self.dimension,
                es.iter().map(|e| e.eval(t)).collect::<Result<Vec<_>, _>>()?,
            )),
            Coefficients::Diagonal(es) => {
                Ok(Matrix::from_diagonal(&es.iter().map(|e| e.eval(t)).collect::<Result<Vec<_>, _>>()?))
            }
            _ => Err(EvolutionError::Unsupported("continuous systems need coefficient expressions".into())),
        }
    }

    fn steps_between(&self, from: F, to: F) -> usize {
        ((to - from).abs() / self.step - F::of(1e-9)).ceil().to_usize().unwrap_or(1).max(1)
    }

    /// Composite Simpson rule for `∫_from^to e`.
    fn simpson(&self, e: &Expr<F>, from: F, to: F) -> Result<F, EvolutionError> {
        if from == to {
            return Ok(F::zero());
        }
        let pairs = ((to - from).abs() / (F::of(2.0) * self.step) - F::of(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let n = 2 * pairs;
        let h = (to - from) / F::of(n as f64);
        let mut sum = e.eval(from)? + e.eval(to)?;
        for i in 1..n {
            let w = if i % 2 == 1 { F::of(4.0) } else { F::of(2.0) };
            sum += w * e.eval(from + h * F::of(i as f64))?;
        }
        Ok(sum * h / F::of(3.0))
    }

    /// Classical RK4 for `X' = A(t) X`, renormalizing after every step.
    fn rk4(&self, from: F, to: F) -> Result<ScaledMatrix<F>, EvolutionError> {
        let n = self.steps_between(from, to);
        let h = (to - from) / F::of(n as f64);
        let half = h / F::of(2.0);
        let mut x = Matrix::identity(self.dimension);
        let mut log_norm = F::zero();
        for i in 0..n {
            let t = from + h * F::of(i as f64);
            let a0 = self.coefficient_matrix(t)?;
            let a1 = self.coefficient_matrix(t + half)?;
            let a2 = self.coefficient_matrix(t + h)?;
            let k1 = a0.matmul(&x);
            let k2 = a1.matmul(&x.axpy(half, &k1));
            let k3 = a1.matmul(&x.axpy(half, &k2));
            let k4 = a2.matmul(&x.axpy(h, &k3));
            let incr = k1.add(&k2.scale(F::of(2.0))).add(&k3.scale(F::of(2.0))).add(&k4);
            x = x.axpy(h / F::of(6.0), &incr);
            let nrm = x.frobenius();
            if nrm == F::zero() || !nrm.is_finite() {
                return Err(EvolutionError::Unsupported(format!("integration broke down at t = {t}")));
            }
            x = x.scale(nrm.recip());
            log_norm += nrm.ln();
        }
        Ok(ScaledMatrix { unit: x, log_norm })
    }

    fn closed_form_logs(pots: &[LogPotential<F>], to: F, from: F) -> Result<Vec<F>, EvolutionError> {
        pots.iter().map(|p| Ok(p.at(to)? - p.at(from)?)).collect()
    }

    /// The evolution operator `Φ(to, from)`.
    pub fn propagate(&self, to: F, from: F) -> Result<ScaledMatrix<F>, EvolutionError> {
        let d = self.dimension;
        if let Coefficients::ClosedForm(pots) = &self.coefficients {
            if self.time_domain == TimeDomain::Discrete {
                as_index(to)?;
                as_index(from)?;
            }
            let logs = Self::closed_form_logs(pots, to, from)?;
            return Ok(ScaledMatrix::from_signed_logs(&vec![1; d], &logs));
        }
        match self.time_domain {
            TimeDomain::Discrete => {
                let (k, n) = (as_index(to)?, as_index(from)?);
                if self.structure.is_diagonal() {
                    let mut signs = vec![1i8; d];
                    let mut logs = vec![F::zero(); d];
                    let (lo, hi, dir) = if k >= n { (n, k, F::one()) } else { (k, n, -F::one()) };
                    for j in lo..hi {
                        let (s, l) = self.discrete_diag_step(j)?;
                        for i in 0..d {
                            signs[i] *= s[i];
                            logs[i] += dir * l[i];
                        }
                    }
                    return Ok(ScaledMatrix::from_signed_logs(&signs, &logs));
                }
                let mut x = ScaledMatrix::identity(d);
                if k >= n {
                    for j in n..k {
                        x = self.discrete_matrix_step(j)?.matmul(&x);
                    }
                } else {
                    for j in (k..n).rev() {
                        x = self.inverse_step(j)?.matmul(&x);
                    }
                }
                Ok(x.normalized())
            }
            TimeDomain::Continuous => match &self.coefficients {
                Coefficients::Diagonal(es) => {
                    let logs = es.iter().map(|e| self.simpson(e, from, to)).collect::<Result<Vec<_>, _>>()?;
                    Ok(ScaledMatrix::from_signed_logs(&vec![1; d], &logs))
                }
                Coefficients::Entries(_) => {
                    if to == from {
                        return Ok(ScaledMatrix::identity(d));
                    }
                    Ok(self.rk4(from, to)?.normalized())
                }
                _ => Err(EvolutionError::Unsupported("continuous systems need coefficient expressions".into())),
            },
        }
    }

    pub fn from_descriptor(desc: &SystemDescriptor, base_dir: Option<&Path>) -> Result<Self, EvolutionError> {
        let parse = |field: String, src: &str| -> Result<Expr<F>, EvolutionError> {
            exprparse::parse(src).map_err(|e| descriptor_err(format!("{field}: {e}")))
        };
        let coefficients = match &desc.coefficients {
            CoefficientSpec::Diagonal(v) => Coefficients::Diagonal(
                v.iter()
                    .enumerate()
                    .map(|(i, s)| parse(format!("coefficients.diagonal[{i}]"), s))
                    .collect::<Result<_, _>>()?,
            ),
            CoefficientSpec::Entries(rows) => {
                if rows.len() != desc.dimension || rows.iter().any(|r| r.len() != desc.dimension) {
                    return Err(descriptor_err(format!(
                        "coefficients.entries: expected a {0}x{0} array",
                        desc.dimension
                    )));
                }
                let mut out = Vec::new();
                for (i, row) in rows.iter().enumerate() {
                    for (j, s) in row.iter().enumerate() {
                        out.push(parse(format!("coefficients.entries[{i}][{j}]"), s)?);
                    }
                }
                Coefficients::Entries(out)
            }
            CoefficientSpec::Table(path) => {
                let p = Path::new(path);
                let full = match base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                let mut t = Table::from_path(&full, desc.dimension)?;
                t.source = Some(path.clone());
                Coefficients::Table(t)
            }
            CoefficientSpec::ClosedForm(v) => Coefficients::ClosedForm(
                v.iter()
                    .enumerate()
                    .map(|(i, p)| match p {
                        PotentialSpec::Expr(s) => Ok(LogPotential::Expr(parse(format!("coefficients.closed_form[{i}]"), s)?)),
                        PotentialSpec::Rate { rate, slope } => Ok(LogPotential::Rate {
                            rate: rate
                                .build(desc.time_domain)
                                .map_err(|e| descriptor_err(format!("coefficients.closed_form[{i}].rate: {e}")))?,
                            slope: F::of(*slope),
                        }),
                    })
                    .collect::<Result<_, EvolutionError>>()?,
            ),
        };
        let sys = Self::new(desc.time_domain, desc.structure, coefficients)?;
        if sys.dimension != desc.dimension {
            return Err(descriptor_err(format!(
                "dimension is {} but the coefficients describe dimension {}",
                desc.dimension, sys.dimension
            )));
        }
        Ok(sys)
    }

    pub fn to_descriptor(&self) -> SystemDescriptor {
        let coefficients = match &self.coefficients {
            Coefficients::Diagonal(es) => CoefficientSpec::Diagonal(es.iter().map(|e| e.to_string()).collect()),
            Coefficients::Entries(es) => CoefficientSpec::Entries(
                es.chunks(self.dimension).map(|r| r.iter().map(|e| e.to_string()).collect()).collect(),
            ),
            Coefficients::Table(t) => CoefficientSpec::Table(t.source.clone().unwrap_or_default()),
            Coefficients::ClosedForm(ps) => CoefficientSpec::ClosedForm(
                ps.iter()
                    .map(|p| match p {
                        LogPotential::Expr(e) => PotentialSpec::Expr(e.to_string()),
                        LogPotential::Rate { rate, slope } => {
                            PotentialSpec::Rate { rate: rate.to_descriptor(), slope: slope.to_f64_lossy() }
                        }
                    })
                    .collect(),
            ),
        };
        SystemDescriptor {
            time_domain: self.time_domain,
            dimension: self.dimension,
            structure: self.structure,
            coefficients,
        }
    }
}

/// JSON system shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescriptor {
    pub time_domain: TimeDomain,
    pub dimension: usize,
    pub structure: Structure,
    pub coefficients: CoefficientSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSpec {
    Diagonal(Vec<String>),
    Entries(Vec<Vec<String>>),
    Table(String),
    ClosedForm(Vec<PotentialSpec>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Expr(String),
    Rate { rate: RateDescriptor, slope: f64 },
}

/// What the spectral estimators need from a system.
pub trait Evolution<F: Real>: Sync {
    fn time_domain(&self) -> TimeDomain;
    fn dimension(&self) -> usize;
    fn structure(&self) -> Structure;
    fn propagate(&self, to: F, from: F) -> Result<ScaledMatrix<F>, EvolutionError>;
    /// `log|Φ_ii(t, 0)|` at `t = -N..=N` for each diagonal component.
    fn sampled_potentials(&self, horizon: usize) -> Result<Vec<Vec<F>>, EvolutionError>;
    /// `Φ(j+1, j)` for `j = -N..N`.
    fn sampled_steps(&self, horizon: usize) -> Result<Vec<ScaledMatrix<F>>, EvolutionError>;
}

impl<F: Real> Evolution<F> for LinearSystem<F> {
    fn time_domain(&self) -> TimeDomain {
        self.time_domain
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn structure(&self) -> Structure {
        self.structure
    }

    fn propagate(&self, to: F, from: F) -> Result<ScaledMatrix<F>, EvolutionError> {
        LinearSystem::propagate(self, to, from)
    }

    fn sampled_potentials(&self, horizon: usize) -> Result<Vec<Vec<F>>, EvolutionError> {
        if !self.structure.is_diagonal() {
            return Err(EvolutionError::Unsupported("potentials need a scalar or diagonal system".into()));
        }
        let n = horizon as i64;
        let d = self.dimension;
        if let Coefficients::ClosedForm(pots) = &self.coefficients {
            return pots
                .iter()
                .map(|p| {
                    let origin = p.at(F::zero())?;
                    (-n..=n).map(|t| Ok(p.at(F::of_i64(t))? - origin)).collect()
                })
                .collect();
        }
        // log|Φ_ii(j+1, j)| for j = -n..n
        let increments: Vec<Vec<F>> = (-n..n)
            .into_par_iter()
            .map(|j| -> Result<Vec<F>, EvolutionError> {
                match self.time_domain {
                    TimeDomain::Discrete => Ok(self.discrete_diag_step(j)?.1),
                    TimeDomain::Continuous => {
                        let Coefficients::Diagonal(es) = &self.coefficients else {
                            return Err(EvolutionError::Unsupported(
                                "continuous systems need coefficient expressions".into(),
                            ));
                        };
                        es.iter().map(|e| self.simpson(e, F::of_i64(j), F::of_i64(j + 1))).collect()
                    }
                }
            })
            .collect::<Result<_, _>>()?;
        let mut out = vec![vec![F::zero(); 2 * horizon + 1]; d];
        for (i, row) in out.iter_mut().enumerate() {
            for t in 0..horizon {
                row[horizon + t + 1] = row[horizon + t] + increments[horizon + t][i];
                row[horizon - t - 1] = row[horizon - t] - increments[horizon - t - 1][i];
            }
        }
        Ok(out)
    }

    fn sampled_steps(&self, horizon: usize) -> Result<Vec<ScaledMatrix<F>>, EvolutionError> {
        let n = horizon as i64;
        (-n..n)
            .into_par_iter()
            .map(|j| self.propagate(F::of_i64(j + 1), F::of_i64(j)))
            .collect()
    }
}

impl<F: Real, S: Evolution<F> + ?Sized> Evolution<F> for &S {
    fn time_domain(&self) -> TimeDomain {
        (**self).time_domain()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn structure(&self) -> Structure {
        (**self).structure()
    }
    fn propagate(&self, to: F, from: F) -> Result<ScaledMatrix<F>, EvolutionError> {
        (**self).propagate(to, from)
    }
    fn sampled_potentials(&self, horizon: usize) -> Result<Vec<Vec<F>>, EvolutionError> {
        (**self).sampled_potentials(horizon)
    }
    fn sampled_steps(&self, horizon: usize) -> Result<Vec<ScaledMatrix<F>>, EvolutionError> {
        (**self).sampled_steps(horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprparse::parse;

    const D: TimeDomain = TimeDomain::Discrete;
    const C: TimeDomain = TimeDomain::Continuous;

    fn scalar(src: &str, dom: TimeDomain) -> LinearSystem<f64> {
        LinearSystem::scalar(parse(src).unwrap(), dom)
    }

    #[test]
    fn discrete_quadratic_analogue() {
        let s = scalar("exp(abs(2*k+1))", D);
        let p = s.propagate(2.0, 0.0).unwrap();
        assert_eq!(p.log_norm, 4.0);
        assert_eq!(p.unit.as_slice(), &[1.0]);
        assert_eq!(s.propagate(-3.0, 0.0).unwrap().log_norm, -9.0);
        assert_eq!(s.propagate(5.0, 5.0).unwrap(), ScaledMatrix::identity(1));
    }

    #[test]
    fn continuous_scalar_integral() {
        let s = scalar("2*abs(t)", C);
        assert!((s.propagate(3.0, 1.0).unwrap().log_norm - 8.0).abs() < 1e-6);
        assert!((s.propagate(-2.0, 1.5).unwrap().log_norm + 6.25).abs() < 1e-6);
    }

    #[test]
    fn negative_coefficients_flip_the_sign() {
        let s = scalar("-2", D);
        let p = s.propagate(3.0, 0.0).unwrap();
        assert_eq!(p.unit.as_slice(), &[-1.0]);
        assert!((p.log_norm - 3.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_coefficients_are_errors() {
        let s = scalar("k", D);
        assert_eq!(s.propagate(3.0, 1.0).unwrap().log_norm, 2f64.ln());
        assert!(matches!(s.propagate(2.0, -1.0), Err(EvolutionError::Singular { k: 0 })));
        assert!(matches!(s.propagate(-1.0, 2.0), Err(EvolutionError::Singular { k: 0 })));
        let f = LinearSystem::full(
            vec![vec![parse("1").unwrap(), parse("2").unwrap()], vec![parse("2").unwrap(), parse("4").unwrap()]],
            D,
        )
        .unwrap();
        assert!(matches!(f.propagate(1.0, 0.0), Err(EvolutionError::Singular { k: 0 })));
    }

    #[test]
    fn non_integer_discrete_times_are_rejected() {
        assert!(matches!(scalar("2", D).propagate(1.5, 0.0), Err(EvolutionError::NonIntegerTime(_))));
    }

    #[test]
    fn full_discrete_matches_diagonal_path() {
        let diag = LinearSystem::<f64>::diagonal(vec![parse("exp(1)").unwrap(), parse("exp(-2)").unwrap()], D).unwrap();
        let full = LinearSystem::full(
            vec![vec![parse("exp(1)").unwrap(), parse("0").unwrap()], vec![parse("0").unwrap(), parse("exp(-2)").unwrap()]],
            D,
        )
        .unwrap();
        for (k, n) in [(4.0, 1.0), (-3.0, 2.0)] {
            let a = diag.propagate(k, n).unwrap();
            let b = full.propagate(k, n).unwrap();
            assert!(a.relative_distance(&b) < 1e-13, "{k} {n}");
            assert!((a.log_norm - b.log_norm).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_matches_simpson_for_diagonal_coefficients() {
        let diag = LinearSystem::<f64>::diagonal(vec![parse("2*abs(t)").unwrap(), parse("-1").unwrap()], C).unwrap();
        let full = LinearSystem::full(
            vec![vec![parse("2*abs(t)").unwrap(), parse("0").unwrap()], vec![parse("0").unwrap(), parse("-1").unwrap()]],
            C,
        )
        .unwrap();
        let a = diag.propagate(2.0, -1.0).unwrap();
        let b = full.propagate(2.0, -1.0).unwrap();
        assert!((a.log_norm - 5.0).abs() < 1e-9);
        let err = a.relative_distance(&b);
        assert!(err < 1e-7, "{err}");
        // fourth order: halving the step shrinks the error about 16 times
        let fine = full.clone().with_step(5e-3).propagate(2.0, -1.0).unwrap();
        let ratio = err / a.relative_distance(&fine);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn potentials_agree_with_propagation() {
        for (src, dom) in [("exp(abs(2*k+1))", D), ("1/(1+abs(t))", C), ("exp(-3*k^2-3*k-1)", D)] {
            let s = scalar(src, dom);
            let pots = s.sampled_potentials(6).unwrap();
            for t in -6..=6 {
                let direct = s.propagate(t as f64, 0.0).unwrap().log_norm;
                assert!((pots[0][(t + 6) as usize] - direct).abs() < 1e-9, "{src} {t}");
            }
        }
    }

    #[test]
    fn descriptor_round_trip_and_errors() {
        let json = r#"{"time_domain":"discrete","dimension":2,"structure":"diagonal","coefficients":{"diagonal":["exp(1)","2"]}}"#;
        let desc: SystemDescriptor = serde_json::from_str(json).unwrap();
        let sys = LinearSystem::<f64>::from_descriptor(&desc, None).unwrap();
        assert_eq!(sys.to_descriptor(), desc);
        let bad = r#"{"time_domain":"discrete","dimension":2,"structure":"diagonal","coefficients":{"diagonal":["exp(1)","2*"]}}"#;
        let err = LinearSystem::<f64>::from_descriptor(&serde_json::from_str(bad).unwrap(), None).unwrap_err();
        assert!(err.to_string().contains("coefficients.diagonal[1]"), "{err}");
        let q = r#"{"time_domain":"continuous","dimension":1,"structure":"scalar","coefficients":{"closed_form":[{"rate":{"kind":"power_exp","p":2,"lambda":1},"slope":-2}]}}"#;
        let sys = LinearSystem::<f64>::from_descriptor(&serde_json::from_str(q).unwrap(), None).unwrap();
        assert_eq!(sys.propagate(2.0, 1.0).unwrap().log_norm, -6.0);
    }
}
