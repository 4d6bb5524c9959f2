//! μ-relative Bohl exponents and the dichotomy spectrum built from them.

mod bohl;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{Evolution, EvolutionError, Structure, SystemDescriptor};
use crate::rates::{GrowthRate, RateDescriptor, RateError};
use crate::scalar::{ExtReal, Real};

pub use bohl::{bohl_exponents, enclosure_exponents, BohlEstimate, WindowEstimate};
pub(crate) use bohl::{classify, Settled};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("no admissible pairs in window {window}: the rate has no positive log-quotient there")]
    NoAdmissiblePairs { window: usize },
    #[error("invalid estimator parameters: {0}")]
    InvalidParams(String),
    #[error("system is {system} but the rate is {rate}")]
    DomainMismatch { system: String, rate: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    /// Window half-widths, strictly increasing.
    pub schedule: Vec<usize>,
    pub cutoff_fraction: f64,
    pub tol_stab: f64,
    pub gamma_max: f64,
    pub delta_merge: f64,
}

pub const DEFAULT_SCHEDULE: [usize; 4] = [100, 200, 400, 800];
pub const DEFAULT_TOL_STAB: f64 = 0.02;

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            schedule: DEFAULT_SCHEDULE.to_vec(),
            cutoff_fraction: 0.5,
            tol_stab: DEFAULT_TOL_STAB,
            gamma_max: 50.0,
            delta_merge: 10.0 * DEFAULT_TOL_STAB,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<(), SpectrumError> {
        let bad = |m: &str| Err(SpectrumError::InvalidParams(m.into()));
        if self.schedule.is_empty() || self.schedule[0] == 0 {
            return bad("schedule must be non-empty with positive windows");
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("schedule must be strictly increasing");
        }
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction < 1.0) {
            return bad("cutoff_fraction must lie in (0, 1)");
        }
        for (name, v) in [("tol_stab", self.tol_stab), ("gamma_max", self.gamma_max), ("delta_merge", self.delta_merge)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpectrumError::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_domains<F: Real, S: Evolution<F>>(system: &S, rate: &GrowthRate<F>) -> Result<(), SpectrumError> {
    if system.time_domain() != rate.time_domain {
        return Err(SpectrumError::DomainMismatch {
            system: system.time_domain().to_string(),
            rate: rate.time_domain.to_string(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralInterval<F> {
    pub lo: ExtReal<F>,
    pub hi: ExtReal<F>,
}

impl<F: Real> SpectralInterval<F> {
    pub fn contains(&self, x: ExtReal<F>) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// A connected component of the resolvent set. Finite ends are open; an
/// infinite end is closed when that infinity is not spectral.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralGap<F> {
    pub lo: ExtReal<F>,
    pub hi: ExtReal<F>,
    #[serde(skip)]
    pub closed_lo: bool,
    #[serde(skip)]
    pub closed_hi: bool,
    /// Rank of the invariant projector; absent in enclosure mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Diagonal of the projector for diagonal systems.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<u8>>,
}

impl<F: Real> SpectralGap<F> {
    pub fn contains(&self, x: ExtReal<F>) -> bool {
        (x > self.lo || (self.closed_lo && x == self.lo)) && (x < self.hi || (self.closed_hi && x == self.hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Exact,
    Enclosure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport<F> {
    pub rate: RateDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDescriptor>,
    pub mode: SpectrumMode,
    pub intervals: Vec<SpectralInterval<F>>,
    pub gaps: Vec<SpectralGap<F>>,
    pub converged: bool,
    pub windows: Vec<usize>,
    pub params: EstimatorParams,
    /// One estimate per diagonal component, or a single one in enclosure mode.
    pub components: Vec<BohlEstimate<F>>,
}

impl<F: Real> SpectrumReport<F> {
    pub fn contains(&self, x: ExtReal<F>) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Every endpoint flagged divergent.
    pub fn all_divergent(&self) -> bool {
        self.intervals.iter().all(|i| !i.lo.is_finite() && !i.hi.is_finite())
    }

    pub fn contains_pos_inf(&self) -> bool {
        self.intervals.iter().any(|i| i.hi == ExtReal::PosInf)
    }

    pub fn contains_neg_inf(&self) -> bool {
        self.intervals.iter().any(|i| i.lo == ExtReal::NegInf)
    }

    /// Is every spectral point within `tol` of `[lo, hi]`?
    pub fn within(&self, lo: ExtReal<F>, hi: ExtReal<F>, tol: F) -> bool {
        self.intervals.iter().all(|i| i.lo.shift(tol) >= lo && i.hi.shift(-tol) <= hi)
    }

    /// Distance of `x` from the nearest finite endpoint.
    fn endpoint_distance(&self, x: F) -> F {
        self.intervals
            .iter()
            .flat_map(|i| [i.lo, i.hi])
            .filter_map(|e| e.finite())
            .fold(F::infinity(), |m, e| m.min((e - x).abs()))
    }
}

/// Merges per-component intervals that overlap or lie closer than `delta`.
/// Returns the merged intervals with their member components.
pub(crate) fn merge_intervals<F: Real>(
    mut parts: Vec<(SpectralInterval<F>, usize)>,
    delta: F,
) -> Vec<(SpectralInterval<F>, Vec<usize>)> {
    parts.sort_by(|a, b| {
        a.0.lo
            .partial_cmp(&b.0.lo)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.hi.partial_cmp(&b.0.hi).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut out: Vec<(SpectralInterval<F>, Vec<usize>)> = Vec::new();
    for (iv, c) in parts {
        if let Some((cur, members)) = out.last_mut() {
            let close = match (cur.hi, iv.lo) {
                (ExtReal::PosInf, _) | (_, ExtReal::NegInf) => true,
                (ExtReal::Finite(a), ExtReal::Finite(b)) => b - a < delta,
                _ => false,
            };
            if close {
                cur.hi = cur.hi.max(iv.hi);
                members.push(c);
                continue;
            }
        }
        out.push((iv, vec![c]));
    }
    out
}

fn gaps_between<F: Real>(merged: &[(SpectralInterval<F>, Vec<usize>)], d: usize, exact: bool) -> Vec<SpectralGap<F>> {
    let mut gaps = Vec::new();
    let mut left: Vec<usize> = Vec::new();
    let mk = |lo: ExtReal<F>, hi: ExtReal<F>, left: &[usize], closed: (bool, bool)| SpectralGap {
        lo,
        hi,
        closed_lo: closed.0,
        closed_hi: closed.1,
        rank: exact.then_some(left.len()),
        pattern: exact.then(|| (0..d).map(|i| u8::from(left.contains(&i))).collect()),
    };
    let first = merged[0].0.lo;
    if first > ExtReal::NegInf {
        gaps.push(mk(ExtReal::NegInf, first, &left, (true, false)));
    }
    for w in merged.windows(2) {
        left.extend(&w[0].1);
        gaps.push(mk(w[0].0.hi, w[1].0.lo, &left, (false, false)));
    }
    left.extend(&merged[merged.len() - 1].1);
    let last = merged[merged.len() - 1].0.hi;
    if last < ExtReal::PosInf {
        gaps.push(mk(last, ExtReal::PosInf, &left, (false, true)));
    }
    gaps
}

/// Dichotomy spectrum of `system` relative to `rate`.
///
/// Scalar and diagonal systems are handled component-wise and report
/// projector ranks; full systems get a single enclosing interval.
pub fn compute_spectrum<F: Real, S: Evolution<F> + Describe>(
    system: &S,
    rate: &GrowthRate<F>,
    params: &EstimatorParams,
) -> Result<SpectrumReport<F>, SpectrumError> {
    let d = system.dimension();
    let exact = system.structure() != Structure::Full;
    let components = if exact {
        bohl_exponents(system, rate, params)?
    } else {
        vec![enclosure_exponents(system, rate, params)?]
    };
    let parts = components
        .iter()
        .enumerate()
        .map(|(i, b)| (SpectralInterval { lo: b.lower, hi: b.upper }, i))
        .collect();
    let merged = merge_intervals(parts, F::of(params.delta_merge));
    let gaps = gaps_between(&merged, d, exact);
    Ok(SpectrumReport {
        rate: rate.to_descriptor(),
        system: system.describe(),
        mode: if exact { SpectrumMode::Exact } else { SpectrumMode::Enclosure },
        intervals: merged.into_iter().map(|(iv, _)| iv).collect(),
        gaps,
        converged: components.iter().all(|c| c.converged),
        windows: params.schedule.clone(),
        params: params.clone(),
        components,
    })
}

/// Optional descriptor for reports.
pub trait Describe {
    fn describe(&self) -> Option<SystemDescriptor> {
        None
    }
}

impl<F: Real> Describe for crate::evolution::LinearSystem<F> {
    fn describe(&self) -> Option<SystemDescriptor> {
        Some(self.to_descriptor())
    }
}

impl<F, S> Describe for crate::evolution::WeightedSystem<F, S> {}

impl<T: Describe + ?Sized> Describe for &T {
    fn describe(&self) -> Option<SystemDescriptor> {
        (**self).describe()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum DichotomyVerdict {
    Admits { rank: Option<usize> },
    Absent,
    Inconclusive { reason: String },
}

impl DichotomyVerdict {
    pub fn admits(&self) -> bool {
        matches!(self, DichotomyVerdict::Admits { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum GrowthVerdict<F> {
    Holds { a: F },
    Fails,
    Inconclusive { reason: String },
}

impl<F> GrowthVerdict<F> {
    pub fn holds(&self) -> bool {
        matches!(self, GrowthVerdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, GrowthVerdict::Fails)
    }
}

/// Whether `0` lies in a spectral gap of the report.
pub fn dichotomy_from_report<F: Real>(report: &SpectrumReport<F>) -> DichotomyVerdict {
    if !report.converged {
        return DichotomyVerdict::Inconclusive { reason: "estimator did not converge".into() };
    }
    let tol = F::of(report.params.tol_stab);
    if report.endpoint_distance(F::zero()) <= tol {
        return DichotomyVerdict::Inconclusive { reason: "0 lies within tol_stab of a spectral endpoint".into() };
    }
    let zero = ExtReal::Finite(F::zero());
    if report.contains(zero) {
        return DichotomyVerdict::Absent;
    }
    match report.gaps.iter().find(|g| g.contains(zero)) {
        Some(g) => DichotomyVerdict::Admits { rank: g.rank },
        None => DichotomyVerdict::Inconclusive { reason: "0 is in neither a gap nor an interval".into() },
    }
}

/// Bounded growth from the exponents behind the report.
pub fn growth_from_report<F: Real>(report: &SpectrumReport<F>) -> GrowthVerdict<F> {
    let tol = F::of(report.params.tol_stab);
    if report.components.iter().any(|c| c.diverged_upper || c.diverged_lower) {
        return GrowthVerdict::Fails;
    }
    if !report.converged {
        return GrowthVerdict::Inconclusive { reason: "estimator did not converge".into() };
    }
    let a = report
        .components
        .iter()
        .flat_map(|c| [c.upper, c.lower])
        .filter_map(|e| e.finite())
        .fold(F::zero(), |m, x| m.max(x.abs()));
    GrowthVerdict::Holds { a: a + tol }
}

pub fn has_mu_dichotomy<F: Real, S: Evolution<F> + Describe>(
    system: &S,
    rate: &GrowthRate<F>,
    params: &EstimatorParams,
) -> Result<DichotomyVerdict, SpectrumError> {
    Ok(dichotomy_from_report(&compute_spectrum(system, rate, params)?))
}

pub fn has_mu_growth<F: Real, S: Evolution<F> + Describe>(
    system: &S,
    rate: &GrowthRate<F>,
    params: &EstimatorParams,
) -> Result<GrowthVerdict<F>, SpectrumError> {
    Ok(growth_from_report(&compute_spectrum(system, rate, params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: ExtReal<f64>, hi: ExtReal<f64>) -> SpectralInterval<f64> {
        SpectralInterval { lo, hi }
    }

    fn f(x: f64) -> ExtReal<f64> {
        ExtReal::Finite(x)
    }

    #[test]
    fn merging_respects_delta_and_infinities() {
        let m = merge_intervals(vec![(iv(f(3.0), f(3.0)), 1), (iv(f(1.0), f(1.0)), 0), (iv(f(1.1), f(1.15)), 2)], 0.2);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].0, iv(f(1.0), f(1.15)));
        assert_eq!(m[0].1, vec![0, 2]);
        let inf = merge_intervals(vec![(iv(ExtReal::PosInf, ExtReal::PosInf), 0), (iv(ExtReal::PosInf, ExtReal::PosInf), 1)], 0.2);
        assert_eq!(inf.len(), 1);
        let split = merge_intervals(vec![(iv(ExtReal::NegInf, ExtReal::NegInf), 0), (iv(f(-1.0), f(-1.0)), 1)], 0.2);
        assert_eq!(split.len(), 2);
    }

    #[test]
    fn gaps_and_ranks() {
        let merged = merge_intervals(vec![(iv(f(1.0), f(1.0)), 0), (iv(f(3.0), f(3.0)), 1)], 0.2);
        let gaps = gaps_between(&merged, 2, true);
        let ranks: Vec<_> = gaps.iter().map(|g| g.rank.unwrap()).collect();
        assert_eq!(ranks, vec![0, 1, 2]);
        assert_eq!(gaps[1].pattern, Some(vec![1, 0]));
        assert_eq!((gaps[0].lo, gaps[0].hi), (ExtReal::NegInf, f(1.0)));
        assert_eq!((gaps[2].lo, gaps[2].hi), (f(3.0), ExtReal::PosInf));

        let plus_inf = merge_intervals(vec![(iv(ExtReal::PosInf, ExtReal::PosInf), 0)], 0.2);
        let gaps = gaps_between(&plus_inf, 1, true);
        assert_eq!(gaps.len(), 1);
        assert_eq!(gaps[0].rank, Some(0));
        assert!(gaps[0].contains(f(0.0)));
        assert!(gaps[0].contains(ExtReal::NegInf));
        assert!(!gaps[0].contains(ExtReal::PosInf));
    }

    #[test]
    fn params_validation() {
        assert!(EstimatorParams::default().validate().is_ok());
        let bad = EstimatorParams { schedule: vec![10, 10], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EstimatorParams { cutoff_fraction: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
