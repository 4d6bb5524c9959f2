//! Numerical checks of the comparison relations between growth rates.
//!
//! Everything is phrased through `L(k, n) = log μ(k) - log μ(n)`. A sup
//! over pairs `n <= k` of `a L_ω(k, n) - b L_μ(k, n)` is the largest rise
//! of `g = a R_ω - b R_μ`, so each quantity is a linear scan per window.

mod verdict;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rates::{symbolic_compare, Directed, GrowthRate, RateError, RelationProfile, TimeDomain};
use crate::scalar::Real;
use crate::spectrum::{classify, Settled};

pub use verdict::{
    Certificate, Diagnostics, GridChoice, GridInfo, Outcome, RelationKind, RelationVerdict, SupTrace, Witness,
    WitnessPair,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("rates live on different time domains ({0} and {1})")]
    DomainMismatch(TimeDomain, TimeDomain),
    #[error("invalid relation parameters: {0}")]
    InvalidParams(String),
}

/// ε = |α| / |α̃| values for the faster check.
pub const FASTER_GRID: [f64; 5] = [1.0, 0.5, 0.25, 0.1, 0.05];
/// Exponents fixed first in the almost checks.
pub const ALMOST_FIXED: [f64; 4] = [0.05, 0.25, 1.0, 4.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelationParams {
    pub schedule: Vec<usize>,
    pub tol_stab: f64,
    /// Sampling density in continuous time.
    pub samples_per_unit: usize,
}

impl Default for RelationParams {
    fn default() -> Self {
        RelationParams { schedule: vec![100, 200, 400, 800], tol_stab: 0.02, samples_per_unit: 10 }
    }
}

impl RelationParams {
    fn validate(&self) -> Result<(), RelationError> {
        if self.schedule.is_empty() || self.schedule[0] == 0 || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RelationError::InvalidParams("schedule must be positive and strictly increasing".into()));
        }
        if !(self.tol_stab > 0.0) || self.samples_per_unit == 0 {
            return Err(RelationError::InvalidParams("tol_stab and samples_per_unit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Faster,
    Slower,
}

/// Search grid `{2^i : i = -4..=12}` for the exponent chosen second, in
/// search order.
pub fn almost_search_grid(direction: Direction) -> Vec<f64> {
    match direction {
        Direction::Faster => (-4..=12).map(|i| 2f64.powi(i)).collect(),
        Direction::Slower => (-4..=12).map(|i| 2f64.powi(-i)).collect(),
    }
}

struct Samples<F> {
    times: Vec<F>,
    mu: Vec<F>,
    omega: Vec<F>,
    center: usize,
    per_unit: usize,
}

impl<F: Real> Samples<F> {
    fn new(mu: &GrowthRate<F>, omega: &GrowthRate<F>, params: &RelationParams) -> Result<Self, RelationError> {
        params.validate()?;
        if mu.time_domain != omega.time_domain {
            return Err(RelationError::DomainMismatch(mu.time_domain, omega.time_domain));
        }
        let per_unit = match mu.time_domain {
            TimeDomain::Discrete => 1,
            TimeDomain::Continuous => params.samples_per_unit,
        };
        let m = (params.schedule[params.schedule.len() - 1] * per_unit) as i64;
        let times: Vec<F> = (-m..=m).map(|i| F::of_i64(i) / F::of(per_unit as f64)).collect();
        let eval = |r: &GrowthRate<F>| times.iter().map(|&t| r.log_rate(t)).collect::<Result<Vec<F>, _>>();
        Ok(Samples { mu: eval(mu)?, omega: eval(omega)?, center: m as usize, per_unit, times })
    }

    fn window(&self, n: usize) -> (usize, usize) {
        (self.center - n * self.per_unit, self.center + n * self.per_unit)
    }

    /// `a R_ω - b R_μ`.
    fn combo(&self, a: F, b: F) -> Vec<F> {
        self.omega.iter().zip(&self.mu).map(|(&w, &m)| a * w - b * m).collect()
    }
}

/// `max_{a <= i <= j <= b} g[j] - g[i]` with its indices.
fn max_rise<F: Real>(g: &[F], a: usize, b: usize) -> (F, usize, usize) {
    let (mut best, mut bi, mut bj) = (F::zero(), a, a);
    let (mut low, mut li) = (g[a], a);
    for j in a..=b {
        if g[j] < low {
            low = g[j];
            li = j;
        }
        let rise = g[j] - low;
        if rise > best {
            (best, bi, bj) = (rise, li, j);
        }
    }
    (best, bi, bj)
}

/// `max_{a <= k <= n <= b} h[k] - h[n]`, scanned right to left.
fn max_backward_drop<F: Real>(h: &[F], a: usize, b: usize) -> (F, usize, usize) {
    let (mut best, mut bk, mut bn) = (F::zero(), b, b);
    let (mut low, mut ln) = (h[b], b);
    for k in (a..=b).rev() {
        if h[k] < low {
            low = h[k];
            ln = k;
        }
        let drop = h[k] - low;
        if drop > best {
            (best, bk, bn) = (drop, k, ln);
        }
    }
    (best, bk, bn)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum TraceState<F> {
    Stable(F),
    Growing,
    Unsettled,
}

fn trace_state<F: Real>(t: &SupTrace<F>, tol: F) -> TraceState<F> {
    match classify(&t.sups, tol, F::infinity()) {
        Settled::Finite(v) => TraceState::Stable(v),
        Settled::Diverged(e) if e.value() > F::zero() => TraceState::Growing,
        _ => TraceState::Unsettled,
    }
}

fn rise_trace<F: Real>(s: &Samples<F>, schedule: &[usize], label: String, g: &[F]) -> SupTrace<F> {
    let mut sups = Vec::new();
    let mut argmax = Vec::new();
    for &n in schedule {
        let (a, b) = s.window(n);
        let (v, i, j) = max_rise(g, a, b);
        sups.push(v);
        argmax.push(WitnessPair { n: s.times[i], k: s.times[j], value: v });
    }
    SupTrace { label, sups, argmax }
}

fn grid_info(params: &RelationParams, exponents: &[f64], search: Vec<f64>) -> GridInfo {
    GridInfo {
        schedule: params.schedule.clone(),
        samples_per_unit: params.samples_per_unit,
        tol_stab: params.tol_stab,
        exponents: exponents.to_vec(),
        search,
    }
}

fn verdict<F>(kind: RelationKind, outcome: Outcome<F>, grid: GridInfo) -> RelationVerdict<F> {
    RelationVerdict { kind, outcome, grid }
}

fn inconclusive<F>(reason: impl Into<String>, traces: Vec<SupTrace<F>>, parts: Vec<RelationVerdict<F>>) -> Outcome<F> {
    Outcome::Inconclusive(Diagnostics { reason: reason.into(), traces, parts })
}

/// Reads a family of ε traces: all stable holds, any growing fails.
fn faster_outcome<F: Real>(traces: Vec<SupTrace<F>>, tol: F) -> Outcome<F> {
    let states: Vec<_> = traces.iter().map(|t| trace_state(t, tol)).collect();
    if let Some(i) = states.iter().position(|s| *s == TraceState::Growing) {
        return Outcome::Fails(Witness { parameter: traces[i].label.clone(), pairs: traces[i].argmax.clone() });
    }
    if states.iter().all(|s| matches!(s, TraceState::Stable(_))) {
        let envelopes = FASTER_GRID
            .iter()
            .zip(&states)
            .map(|(&e, s)| match s {
                TraceState::Stable(v) => (F::of(e), *v),
                _ => unreachable!(),
            })
            .collect();
        return Outcome::Holds(Certificate::Faster { envelopes });
    }
    inconclusive("some sup neither stabilized nor grew steadily", traces, vec![])
}

/// `μ ≫ ω`: for each ε, `sup (L_ω - ε L_μ)` over forward pairs.
pub fn check_faster<F: Real>(
    mu: &GrowthRate<F>,
    omega: &GrowthRate<F>,
    params: &RelationParams,
) -> Result<RelationVerdict<F>, RelationError> {
    let s = Samples::new(mu, omega, params)?;
    let traces = FASTER_GRID
        .iter()
        .map(|&e| rise_trace(&s, &params.schedule, format!("epsilon={e}"), &s.combo(F::one(), F::of(e))))
        .collect();
    let outcome = faster_outcome(traces, F::of(params.tol_stab));
    Ok(verdict(RelationKind::Faster, outcome, grid_info(params, &FASTER_GRID, vec![])))
}

/// The same relation through positive exponents over backward pairs
/// `n >= k`: `sup (β L_μ(k, n) - β̃ L_ω(k, n))` with `β = ε`, `β̃ = 1`.
pub fn check_faster_dual<F: Real>(
    mu: &GrowthRate<F>,
    omega: &GrowthRate<F>,
    params: &RelationParams,
) -> Result<RelationVerdict<F>, RelationError> {
    let s = Samples::new(mu, omega, params)?;
    let traces = FASTER_GRID
        .iter()
        .map(|&e| {
            let beta = F::of(e);
            let h: Vec<F> = s.mu.iter().zip(&s.omega).map(|(&m, &w)| beta * m - w).collect();
            let mut sups = Vec::new();
            let mut argmax = Vec::new();
            for &n in &params.schedule {
                let (a, b) = s.window(n);
                let (v, k, nn) = max_backward_drop(&h, a, b);
                sups.push(v);
                argmax.push(WitnessPair { n: s.times[nn], k: s.times[k], value: v });
            }
            SupTrace { label: format!("beta={e},beta_tilde=1"), sups, argmax }
        })
        .collect();
    let outcome = faster_outcome(traces, F::of(params.tol_stab));
    Ok(verdict(RelationKind::Faster, outcome, grid_info(params, &FASTER_GRID, vec![])))
}

/// `μ ≻ ω`: the largest drawdown of `R_μ - R_ω`.
pub fn check_weakly_faster<F: Real>(
    mu: &GrowthRate<F>,
    omega: &GrowthRate<F>,
    params: &RelationParams,
) -> Result<RelationVerdict<F>, RelationError> {
    let s = Samples::new(mu, omega, params)?;
    // drawdown of R_μ - R_ω is the rise of R_ω - R_μ
    let g = s.combo(F::one(), F::one());
    let t = rise_trace(&s, &params.schedule, "drawdown".into(), &g);
    let outcome = match trace_state(&t, F::of(params.tol_stab)) {
        TraceState::Stable(v) => Outcome::Holds(Certificate::WeaklyFaster { log_m: v }),
        TraceState::Growing => Outcome::Fails(Witness { parameter: t.label.clone(), pairs: t.argmax.clone() }),
        TraceState::Unsettled => inconclusive("drawdown neither stabilized nor grew steadily", vec![t], vec![]),
    };
    Ok(verdict(RelationKind::WeaklyFaster, outcome, grid_info(params, &[], vec![])))
}

/// Full-span ratios `L_ω(N, -N) / L_μ(N, -N)`; bounded suggests the
/// almost relations hold, steady growth suggests they fail.
fn prefilter<F: Real>(s: &Samples<F>, params: &RelationParams) -> (Option<bool>, SupTrace<F>) {
    let mut sups = Vec::new();
    let mut argmax = Vec::new();
    for &n in &params.schedule {
        let (a, b) = s.window(n);
        let lm = s.mu[b] - s.mu[a];
        let lw = s.omega[b] - s.omega[a];
        let r = if lm > F::zero() { lw / lm } else { F::nan() };
        sups.push(r);
        argmax.push(WitnessPair { n: s.times[a], k: s.times[b], value: r });
    }
    let tol = F::of(params.tol_stab);
    let decided = if sups.iter().any(|r| r.is_nan()) {
        None
    } else {
        match classify(&sups, tol, F::infinity()) {
            Settled::Diverged(e) if e.value() > F::zero() => Some(false),
            Settled::Finite(_) => Some(true),
            _ if sups.windows(2).all(|w| w[1] - w[0] <= tol) => Some(true),
            _ => None,
        }
    };
    (decided, SupTrace { label: "span_ratio".into(), sups, argmax })
}

/// `μ ≻· ω` (direction Faster) or `ω ≺· μ` (direction Slower), searched in
/// the quantifier order of the definitions.
pub fn check_almost<F: Real>(
    mu: &GrowthRate<F>,
    omega: &GrowthRate<F>,
    direction: Direction,
    params: &RelationParams,
) -> Result<RelationVerdict<F>, RelationError> {
    let s = Samples::new(mu, omega, params)?;
    let tol = F::of(params.tol_stab);
    let search = almost_search_grid(direction);
    let kind = match direction {
        Direction::Faster => RelationKind::AlmostFaster,
        Direction::Slower => RelationKind::AlmostSlower,
    };
    let mut choices = Vec::new();
    let mut traces = Vec::new();
    let mut failing: Option<SupTrace<F>> = None;
    let mut open = false;
    for &fixed in &ALMOST_FIXED {
        let mut all_growing = true;
        let mut found = None;
        let mut last = None;
        for &x in &search {
            // (|α̃|, |α|)
            let (at, a) = match direction {
                Direction::Faster => (fixed, x),
                Direction::Slower => (x, fixed),
            };
            let g = s.combo(F::of(at), F::of(a));
            let t = rise_trace(&s, &params.schedule, format!("alpha={a},alpha_tilde={at}"), &g);
            match trace_state(&t, tol) {
                TraceState::Stable(v) => {
                    found = Some(GridChoice { fixed: F::of(fixed), chosen: F::of(x), log_m: v });
                    all_growing = false;
                    break;
                }
                TraceState::Growing => {}
                TraceState::Unsettled => all_growing = false,
            }
            last = Some(t);
        }
        match found {
            Some(c) => choices.push(c),
            None => {
                if let Some(t) = last {
                    traces.push(t.clone());
                    if all_growing && failing.is_none() {
                        failing = Some(t);
                    }
                }
                open = true;
            }
        }
    }
    let grid_outcome = if let Some(t) = failing {
        Outcome::Fails(Witness { parameter: t.label.clone(), pairs: t.argmax.clone() })
    } else if !open {
        let unit = choices.iter().find(|c| c.fixed == F::one()).expect("unit exponent in grid");
        let (c, intercept) = match direction {
            Direction::Faster => (unit.chosen, unit.log_m),
            Direction::Slower => (unit.chosen.recip(), unit.log_m / unit.chosen),
        };
        Outcome::Holds(Certificate::Almost { choices, c, intercept })
    } else {
        inconclusive("no stabilized exponent for some grid point", traces, vec![])
    };
    let (pre, pre_trace) = prefilter(&s, params);
    let grid_decided = match grid_outcome {
        Outcome::Holds(_) => Some(true),
        Outcome::Fails(_) => Some(false),
        Outcome::Inconclusive(_) => None,
    };
    let outcome = match (pre, grid_decided) {
        (Some(p), Some(g)) if p != g => inconclusive(
            format!("span-ratio pre-filter suggests {} but the exponent grid {}", verb(p), verb(g)),
            vec![pre_trace],
            vec![verdict(kind, grid_outcome, grid_info(params, &ALMOST_FIXED, search.clone()))],
        ),
        _ => grid_outcome,
    };
    Ok(verdict(kind, outcome, grid_info(params, &ALMOST_FIXED, search)))
}

fn verb(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

/// Conjunction of sub-verdicts.
pub fn combine<F: Clone>(kind: RelationKind, parts: Vec<RelationVerdict<F>>, grid: GridInfo) -> RelationVerdict<F> {
    if let Some(f) = parts.iter().find(|p| p.fails()) {
        let Outcome::Fails(w) = &f.outcome else { unreachable!() };
        let w = Witness { parameter: format!("{}:{}", f.kind.name(), w.parameter), pairs: w.pairs.clone() };
        return verdict(kind, Outcome::Fails(w), grid);
    }
    if parts.iter().all(|p| p.holds()) {
        return verdict(kind, Outcome::Holds(Certificate::Composite { parts }), grid);
    }
    verdict(kind, inconclusive("some part is inconclusive", vec![], parts), grid)
}

fn cross_check<F: Real>(v: RelationVerdict<F>, symbolic: Option<bool>) -> RelationVerdict<F> {
    match (symbolic, v.decided()) {
        (Some(sym), Some(num)) if sym != num => {
            let kind = v.kind;
            let grid = v.grid.clone();
            let reason = format!("numeric check {} but the closed form says it {}", verb(num), verb(sym));
            verdict(kind, inconclusive(reason, vec![], vec![v]), grid)
        }
        _ => v,
    }
}

fn plain_grid(params: &RelationParams) -> GridInfo {
    grid_info(params, &[], vec![])
}

/// `μ1 ⋘ μ2`: `μ1 ≺· μ2` and `μ2 ≻· μ1`.
pub fn check_chain_link<F: Real>(
    mu1: &GrowthRate<F>,
    mu2: &GrowthRate<F>,
    params: &RelationParams,
) -> Result<RelationVerdict<F>, RelationError> {
    let slower = check_almost(mu2, mu1, Direction::Slower, params)?;
    let faster = check_almost(mu2, mu1, Direction::Faster, params)?;
    Ok(combine(RelationKind::ChainOrder, vec![slower, faster], plain_grid(params)))
}

/// Every directed relation of the pair `(a, b)`, cross-checked against the
/// closed form when one exists.
pub fn classify_pair<F: Real>(
    a: &GrowthRate<F>,
    b: &GrowthRate<F>,
    params: &RelationParams,
) -> Result<RelationProfile<RelationVerdict<F>>, RelationError> {
    let sym = symbolic_compare(a, b);
    let pick = |f: fn(&RelationProfile<bool>) -> bool| sym.as_ref().map(f);
    let faster = Directed {
        forward: cross_check(check_faster(a, b, params)?, pick(|p| p.faster.forward)),
        backward: cross_check(check_faster(b, a, params)?, pick(|p| p.faster.backward)),
    };
    let weakly_faster = Directed {
        forward: cross_check(check_weakly_faster(a, b, params)?, pick(|p| p.weakly_faster.forward)),
        backward: cross_check(check_weakly_faster(b, a, params)?, pick(|p| p.weakly_faster.backward)),
    };
    let almost_faster = Directed {
        forward: cross_check(check_almost(a, b, Direction::Faster, params)?, pick(|p| p.almost_faster.forward)),
        backward: cross_check(check_almost(b, a, Direction::Faster, params)?, pick(|p| p.almost_faster.backward)),
    };
    let almost_slower = Directed {
        forward: cross_check(check_almost(b, a, Direction::Slower, params)?, pick(|p| p.almost_slower.forward)),
        backward: cross_check(check_almost(a, b, Direction::Slower, params)?, pick(|p| p.almost_slower.backward)),
    };
    let weakly_equivalent = cross_check(
        combine(
            RelationKind::WeaklyEquivalent,
            vec![weakly_faster.forward.clone(), weakly_faster.backward.clone()],
            plain_grid(params),
        ),
        pick(|p| p.weakly_equivalent),
    );
    let equivalent = cross_check(
        combine(
            RelationKind::Equivalent,
            vec![
                almost_faster.forward.clone(),
                almost_faster.backward.clone(),
                almost_slower.forward.clone(),
                almost_slower.backward.clone(),
            ],
            plain_grid(params),
        ),
        pick(|p| p.equivalent),
    );
    let chain_order = Directed {
        forward: cross_check(
            combine(
                RelationKind::ChainOrder,
                vec![almost_slower.forward.clone(), almost_faster.backward.clone()],
                plain_grid(params),
            ),
            pick(|p| p.chain_order.forward),
        ),
        backward: cross_check(
            combine(
                RelationKind::ChainOrder,
                vec![almost_slower.backward.clone(), almost_faster.forward.clone()],
                plain_grid(params),
            ),
            pick(|p| p.chain_order.backward),
        ),
    };
    Ok(RelationProfile {
        faster,
        weakly_faster,
        almost_faster,
        almost_slower,
        weakly_equivalent,
        equivalent,
        chain_order,
    })
}

/// Verdicts for the adjacent links of a chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainVerdict<F> {
    pub links: Vec<RelationVerdict<F>>,
    /// Index of the first link that does not hold.
    pub first_failure: Option<usize>,
}

impl<F> ChainVerdict<F> {
    pub fn holds(&self) -> bool {
        self.links.iter().all(|l| l.holds())
    }

    pub fn fails(&self) -> bool {
        self.links.iter().any(|l| l.fails())
    }
}

/// Checks that `rates` is increasing for `⋘`. A single rate is compared
/// with itself.
pub fn chain_check<F: Real>(rates: &[GrowthRate<F>], params: &RelationParams) -> Result<ChainVerdict<F>, RelationError> {
    if rates.is_empty() {
        return Err(RelationError::InvalidParams("chain needs at least one rate".into()));
    }
    let padded: Vec<&GrowthRate<F>> =
        if rates.len() == 1 { vec![&rates[0], &rates[0]] } else { rates.iter().collect() };
    let links = padded
        .windows(2)
        .map(|w| check_chain_link(w[0], w[1], params))
        .collect::<Result<Vec<_>, _>>()?;
    let first_failure = links.iter().position(|l| !l.holds());
    Ok(ChainVerdict { links, first_failure })
}
