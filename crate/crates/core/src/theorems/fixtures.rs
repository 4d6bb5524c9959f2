use std::collections::BTreeMap;

use serde::Serialize;

use super::TheoremError;
use crate::evolution::{LinearSystem, LogPotential};
use crate::exprparse::{parse, BinOp, Expr, Func};
use crate::rates::{GrowthRate, TimeDomain};
use crate::scalar::ExtReal;
use crate::spectrum::{merge_intervals, SpectralInterval};

/// Built-in systems with a one-line description.
pub const CATALOG_SYSTEMS: [(&str, &str); 6] = [
    ("abs2t", "x' = 2|t| x"),
    ("inv1pt", "x' = x / (1 + |t|)"),
    ("sq3t2", "x' = 3 t^2 x"),
    ("frak_a", "x(k+1) = exp(-3k^2 - 3k - 1) x(k)"),
    ("disc_q", "x(k+1) = exp(|2k+1|) x(k)"),
    ("identity", "x(k+1) = x(k)"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub system: LinearSystem<f64>,
    /// Per-component log-potentials with `log Φ_ii(t, s) = F(t) - F(s)`.
    pub closed_form: Option<Vec<LogPotential<f64>>>,
    /// Expected spectrum per rate label.
    pub expected: BTreeMap<String, Vec<SpectralInterval<f64>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureSummary {
    pub name: String,
    pub description: String,
    pub system: crate::evolution::SystemDescriptor,
}

fn point(x: ExtReal<f64>) -> Vec<SpectralInterval<f64>> {
    vec![SpectralInterval { lo: x, hi: x }]
}

fn fin(x: f64) -> Vec<SpectralInterval<f64>> {
    point(ExtReal::Finite(x))
}

fn scalar(src: &str, domain: TimeDomain) -> LinearSystem<f64> {
    LinearSystem::scalar(parse(src).expect("catalog expression"), domain)
}

fn rate_potential(name: &str, domain: TimeDomain, slope: f64) -> Vec<LogPotential<f64>> {
    vec![LogPotential::Rate { rate: GrowthRate::catalog(name, domain).expect("catalog rate"), slope }]
}

impl Fixture {
    /// One of [`CATALOG_SYSTEMS`].
    pub fn catalog(name: &str) -> Result<Fixture, TheoremError> {
        use TimeDomain::{Continuous as C, Discrete as D};
        let pos = ExtReal::PosInf;
        let neg = ExtReal::NegInf;
        let (system, closed_form, expected): (_, _, Vec<(&str, Vec<SpectralInterval<f64>>)>) = match name {
            "abs2t" => (
                scalar("2*abs(t)", C),
                rate_potential("q", C, 1.0),
                vec![("p", point(pos)), ("exp", point(pos)), ("q", fin(1.0)), ("c", fin(0.0)), ("glued_c_p", fin(0.0))],
            ),
            "inv1pt" => (
                scalar("1/(1+abs(t))", C),
                rate_potential("p", C, 1.0),
                vec![("p", fin(1.0)), ("exp", fin(0.0)), ("q", fin(0.0)), ("c", fin(0.0)), ("glued_c_p", fin(0.0))],
            ),
            "sq3t2" => (
                scalar("3*t^2", C),
                rate_potential("c", C, 1.0),
                vec![("p", point(pos)), ("exp", point(pos)), ("q", point(pos)), ("c", fin(1.0)), ("glued_c_p", fin(1.0))],
            ),
            "frak_a" => (
                scalar("exp(-3*k^2-3*k-1)", D),
                rate_potential("c", D, -1.0),
                vec![("p", point(neg)), ("exp", point(neg)), ("q", point(neg)), ("c", fin(-1.0))],
            ),
            "disc_q" => (
                scalar("exp(abs(2*k+1))", D),
                rate_potential("q", D, 1.0),
                vec![("p", point(pos)), ("exp", point(pos)), ("q", fin(1.0)), ("c", fin(0.0))],
            ),
            "identity" => (
                scalar("1", D),
                rate_potential("exp", D, 0.0),
                vec![("p", fin(0.0)), ("exp", fin(0.0)), ("q", fin(0.0)), ("c", fin(0.0))],
            ),
            other => return Err(TheoremError::UnknownFixture(other.to_string())),
        };
        Ok(Fixture {
            name: name.to_string(),
            system,
            closed_form: Some(closed_form),
            expected: expected.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        })
    }

    pub fn all_catalog() -> Vec<Fixture> {
        CATALOG_SYSTEMS.iter().map(|(n, _)| Fixture::catalog(n).expect("catalog")).collect()
    }

    pub fn summary(&self) -> FixtureSummary {
        let description = CATALOG_SYSTEMS
            .iter()
            .find(|(n, _)| *n == self.name)
            .map_or_else(|| self.name.clone(), |(_, d)| d.to_string());
        FixtureSummary { name: self.name.clone(), description, system: self.system.to_descriptor() }
    }

    pub fn time_domain(&self) -> TimeDomain {
        self.system.time_domain
    }

    /// Largest deviation of `log |Φ_ii(t, s)|` from the closed form over
    /// all pairs of `times`.
    pub fn closed_form_error(&self, times: &[f64]) -> Result<Option<f64>, TheoremError> {
        let Some(pots) = &self.closed_form else { return Ok(None) };
        let mut worst = 0.0f64;
        for &t in times {
            for &s in times {
                let phi = self.system.propagate(t, s)?;
                for (i, p) in pots.iter().enumerate() {
                    let got = phi.unit[(i, i)].abs().ln() + phi.log_norm;
                    let want = p.at(t)? - p.at(s)?;
                    worst = worst.max((got - want).abs());
                }
            }
        }
        Ok(Some(worst))
    }
}

/// Diagonal system with `Φ_ii(k, n) = (ν(k) / ν(n))^{s_i}`.
///
/// Discrete rates with an expression get coefficients
/// `exp(s_i (log ν(k+1) - log ν(k)))`; everything else is realized by its
/// closed form.
pub fn generate_quotient_system(nu: &GrowthRate<f64>, slopes: &[f64]) -> Result<Fixture, TheoremError> {
    let domain = nu.time_domain;
    let potentials: Vec<LogPotential<f64>> =
        slopes.iter().map(|&s| LogPotential::Rate { rate: nu.clone(), slope: s }).collect();
    let system = match (domain, nu.to_log_expr()) {
        (TimeDomain::Discrete, Some(e)) => {
            let e = e.with_symbol('k');
            let next = e.substitute(&Expr::binary(BinOp::Add, Expr::var('k'), Expr::constant(1.0)));
            let incr = Expr::binary(BinOp::Sub, next, e);
            let coeffs = slopes
                .iter()
                .map(|&s| Expr::call(Func::Exp, vec![Expr::binary(BinOp::Mul, Expr::constant(s), incr.clone())]))
                .collect();
            LinearSystem::diagonal(coeffs, domain)?
        }
        _ => LinearSystem::closed_form(potentials.clone(), domain)?,
    };
    let parts = slopes
        .iter()
        .enumerate()
        .map(|(i, &s)| (SpectralInterval { lo: ExtReal::Finite(s), hi: ExtReal::Finite(s) }, i))
        .collect();
    let merged = merge_intervals(parts, crate::spectrum::EstimatorParams::default().delta_merge);
    let slope_list = slopes.iter().map(|s| format!("{s}")).collect::<Vec<_>>().join(",");
    let mut expected = BTreeMap::new();
    expected.insert(nu.label(), merged.into_iter().map(|(iv, _)| iv).collect());
    Ok(Fixture {
        name: format!("quotient({},[{}],{})", nu.label(), slope_list, domain),
        system,
        closed_form: Some(potentials),
        expected,
    })
}
