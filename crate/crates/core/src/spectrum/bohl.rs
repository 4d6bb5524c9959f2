use rayon::prelude::*;
use serde::Serialize;

use super::{EstimatorParams, SpectrumError};
use crate::evolution::{operator_norm_bounds, Evolution, EvolutionError, ScaledMatrix};
use crate::rates::GrowthRate;
use crate::scalar::{ExtReal, Real};

/// Extremal ratios on one window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowEstimate<F> {
    pub window: usize,
    pub upper: F,
    pub lower: F,
    pub pairs: usize,
}

/// Upper and lower μ-relative Bohl exponents of one component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BohlEstimate<F> {
    pub upper: ExtReal<F>,
    pub lower: ExtReal<F>,
    pub per_window: Vec<WindowEstimate<F>>,
    pub diverged_upper: bool,
    pub diverged_lower: bool,
    /// Both sequences either stabilized or diverged.
    pub converged: bool,
    pub pairs_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Settled<F> {
    Finite(F),
    Diverged(ExtReal<F>),
    Unsettled(F),
}

/// Reads a per-window sequence as convergent, divergent or neither.
pub(crate) fn classify<F: Real>(seq: &[F], tol: F, gamma_max: F) -> Settled<F> {
    let m = seq.len();
    let last = seq[m - 1];
    if last.abs() > gamma_max {
        return Settled::Diverged(if last > F::zero() { ExtReal::PosInf } else { ExtReal::NegInf });
    }
    if m >= 2 && (last - seq[m - 2]).abs() <= tol {
        return Settled::Finite(last);
    }
    if m >= 4 {
        let incr: Vec<F> = seq[m - 4..].windows(2).map(|w| w[1] - w[0]).collect();
        if incr.iter().all(|&d| d >= tol) {
            return Settled::Diverged(ExtReal::PosInf);
        }
        if incr.iter().all(|&d| d <= -tol) {
            return Settled::Diverged(ExtReal::NegInf);
        }
    }
    Settled::Unsettled(last)
}

fn assemble<F: Real>(per_window: Vec<WindowEstimate<F>>, params: &EstimatorParams) -> BohlEstimate<F> {
    let tol = F::of(params.tol_stab);
    let gmax = F::of(params.gamma_max);
    let ups: Vec<F> = per_window.iter().map(|w| w.upper).collect();
    let los: Vec<F> = per_window.iter().map(|w| w.lower).collect();
    let read = |s: Settled<F>| match s {
        Settled::Finite(v) => (ExtReal::Finite(v), true),
        Settled::Diverged(e) => (e, true),
        Settled::Unsettled(v) => (ExtReal::Finite(v), false),
    };
    let (mut upper, ok_u) = read(classify(&ups, tol, gmax));
    let (mut lower, ok_l) = read(classify(&los, tol, gmax));
    if lower == ExtReal::PosInf {
        upper = ExtReal::PosInf;
    }
    if upper == ExtReal::NegInf {
        lower = ExtReal::NegInf;
    }
    let pairs_used = per_window.last().map_or(0, |w| w.pairs);
    BohlEstimate {
        upper,
        lower,
        diverged_upper: !upper.is_finite(),
        diverged_lower: !lower.is_finite(),
        converged: ok_u && ok_l,
        pairs_used,
        per_window,
    }
}

/// `log μ(t)` at `t = -N..=N`.
pub(crate) fn sampled_log_rate<F: Real>(rate: &GrowthRate<F>, horizon: usize) -> Result<Vec<F>, SpectrumError> {
    let n = horizon as i64;
    Ok((-n..=n).map(|t| rate.log_rate(F::of_i64(t))).collect::<Result<Vec<F>, _>>()?)
}

/// Admissible pairs `(i, j)` of sample indices in the window of half-width
/// `n` around `center`, folded with `f`.
fn window_scan<F: Real>(
    logs: &[F],
    center: usize,
    n: usize,
    cutoff: F,
    ratio: impl Fn(usize, usize, F) -> (F, F) + Sync,
) -> Result<WindowEstimate<F>, SpectrumError> {
    let (a, b) = (center - n, center + n);
    let l_max = logs[b] - logs[a];
    let threshold = cutoff * l_max;
    let (upper, lower, pairs) = (a..b)
        .into_par_iter()
        .map(|i| {
            let mut acc = (F::neg_infinity(), F::infinity(), 0usize);
            for j in i + 1..=b {
                let l = logs[j] - logs[i];
                if !(l > F::zero()) || l < threshold {
                    continue;
                }
                let (hi, lo) = ratio(i, j, l);
                acc.0 = acc.0.max(hi);
                acc.1 = acc.1.min(lo);
                acc.2 += 1;
            }
            acc
        })
        .reduce(
            || (F::neg_infinity(), F::infinity(), 0usize),
            |x, y| (x.0.max(y.0), x.1.min(y.1), x.2 + y.2),
        );
    if pairs == 0 {
        return Err(SpectrumError::NoAdmissiblePairs { window: n });
    }
    Ok(WindowEstimate { window: n, upper, lower, pairs })
}

/// Bohl exponents of each diagonal component from sampled potentials.
pub fn bohl_exponents<F: Real, S: Evolution<F>>(
    system: &S,
    rate: &GrowthRate<F>,
    params: &EstimatorParams,
) -> Result<Vec<BohlEstimate<F>>, SpectrumError> {
    params.validate()?;
    super::check_domains(system, rate)?;
    let horizon = *params.schedule.last().expect("validated");
    let logs = sampled_log_rate(rate, horizon)?;
    let pots = system.sampled_potentials(horizon)?;
    let cutoff = F::of(params.cutoff_fraction);
    pots.iter()
        .map(|p| {
            let per_window = params
                .schedule
                .iter()
                .map(|&n| window_scan(&logs, horizon, n, cutoff, |i, j, l| {
                    let r = (p[j] - p[i]) / l;
                    (r, r)
                }))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(assemble(per_window, params))
        })
        .collect()
}

/// Singular-value ratios of products of unit steps; an outer enclosure of
/// the whole spectrum.
pub fn enclosure_exponents<F: Real, S: Evolution<F>>(
    system: &S,
    rate: &GrowthRate<F>,
    params: &EstimatorParams,
) -> Result<BohlEstimate<F>, SpectrumError> {
    params.validate()?;
    super::check_domains(system, rate)?;
    let horizon = *params.schedule.last().expect("validated");
    let logs = sampled_log_rate(rate, horizon)?;
    let steps = system.sampled_steps(horizon)?;
    let inverses = steps
        .iter()
        .enumerate()
        .map(|(j, m)| match m.unit.inverse_with_det() {
            Some((inv, _)) => Ok(ScaledMatrix::from_matrix(inv, -m.log_norm)),
            None => Err(EvolutionError::Singular { k: j as i64 - horizon as i64 }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cutoff = F::of(params.cutoff_fraction);
    let d = system.dimension();
    let per_window = params
        .schedule
        .iter()
        .map(|&n| {
            let (a, b) = (horizon - n, horizon + n);
            // bounds[i][j - i - 1] = (log σ_max, log σ_min) of Φ(j, i). The
            // smallest singular value of a long product drowns in rounding,
            // so it comes from the largest one of the inverse product.
            let bounds: Vec<Vec<(F, F)>> = (a..b)
                .into_par_iter()
                .map(|i| {
                    let mut x = ScaledMatrix::identity(d);
                    let mut y = ScaledMatrix::identity(d);
                    (i..b)
                        .map(|j| {
                            x = steps[j].matmul(&x);
                            y = y.matmul(&inverses[j]);
                            (operator_norm_bounds(&x).0, -operator_norm_bounds(&y).0)
                        })
                        .collect()
                })
                .collect();
            window_scan(&logs, horizon, n, cutoff, |i, j, l| {
                let (hi, lo) = bounds[i - a][j - i - 1];
                (hi / l, lo / l)
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(per_window, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rules() {
        let (tol, g) = (0.02, 50.0);
        assert_eq!(classify(&[1.2, 1.05, 1.01, 1.0], tol, g), Settled::Finite(1.0));
        assert_eq!(classify(&[5.0, 10.0, 20.0, 60.0], tol, g), Settled::Diverged(ExtReal::PosInf));
        assert_eq!(classify(&[5.0, 10.0, 20.0, 40.0], tol, g), Settled::Diverged(ExtReal::PosInf));
        assert_eq!(classify(&[-5.0, -10.0, -20.0, -40.0], tol, g), Settled::Diverged(ExtReal::NegInf));
        assert_eq!(classify(&[1.0, 2.0, 1.0, 2.0], tol, g), Settled::Unsettled(2.0));
        assert_eq!(classify(&[1.0], tol, g), Settled::Unsettled(1.0));
    }
}
