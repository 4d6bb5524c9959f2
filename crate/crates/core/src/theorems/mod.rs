//! Executable checks of the spectral theorems on fixture systems.
//!
//! A report evaluates its conclusion only when every hypothesis holds;
//! otherwise it is skipped. Spectra and relation verdicts are cached, so a
//! full harness run computes each of them once.

mod fixtures;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::evolution::EvolutionError;
use crate::rates::{GrowthRate, RateError, RelationProfile, TimeDomain};
use crate::relations::{
    chain_check, check_faster, check_weakly_faster, classify_pair, ChainVerdict, RelationError, RelationParams,
    RelationVerdict,
};
use crate::scalar::ExtReal;
use crate::spectrum::{
    compute_spectrum, dichotomy_from_report, growth_from_report, DichotomyVerdict, EstimatorParams, GrowthVerdict,
    SpectralGap, SpectrumError, SpectrumReport,
};

pub use fixtures::{generate_quotient_system, Fixture, FixtureSummary, CATALOG_SYSTEMS};

#[derive(Debug, Error)]
pub enum TheoremError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("invalid theorem arguments: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, status: CheckStatus, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status, detail: detail.into() }
    }

    fn from_bool(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check::new(name, if ok { CheckStatus::Holds } else { CheckStatus::Fails }, detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDetails {
    pub hypotheses: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<Check>,
    /// Strong rate found per fixture (chain theorem only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_rates: Option<Vec<(String, Option<String>)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub fixture: String,
    pub rates: Vec<String>,
    pub status: TheoremStatus,
    pub details: ReportDetails,
}

impl TheoremReport {
    fn assemble(
        theorem: TheoremId,
        fixture: &str,
        rates: Vec<String>,
        hypotheses: Vec<Check>,
        conclusion: impl FnOnce() -> Result<Check, TheoremError>,
    ) -> Result<TheoremReport, TheoremError> {
        let (status, conclusion) = if hypotheses.iter().all(|h| h.status == CheckStatus::Holds) {
            let c = conclusion()?;
            (if c.status == CheckStatus::Holds { TheoremStatus::Pass } else { TheoremStatus::Fail }, Some(c))
        } else {
            (TheoremStatus::Skipped, None)
        };
        Ok(TheoremReport {
            theorem: theorem.name().to_string(),
            fixture: fixture.to_string(),
            rates,
            status,
            details: ReportDetails { hypotheses, conclusion, strong_rates: None },
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TheoremId {
    T805,
    T806,
    T808i,
    T808ii,
    T809i,
    T809ii,
    T809iii,
    T811,
    T908,
    C721,
    C722,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::T805,
        TheoremId::T806,
        TheoremId::T808i,
        TheoremId::T808ii,
        TheoremId::T809i,
        TheoremId::T809ii,
        TheoremId::T809iii,
        TheoremId::T811,
        TheoremId::T908,
        TheoremId::C721,
        TheoremId::C722,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T805 => "805",
            TheoremId::T806 => "806",
            TheoremId::T808i => "808i",
            TheoremId::T808ii => "808ii",
            TheoremId::T809i => "809i",
            TheoremId::T809ii => "809ii",
            TheoremId::T809iii => "809iii",
            TheoremId::T811 => "811",
            TheoremId::T908 => "908",
            TheoremId::C721 => "721",
            TheoremId::C722 => "722",
        }
    }

    /// Accepts a single id, `808`/`809` for all their items, or `all`.
    pub fn parse_selection(text: &str) -> Result<Vec<TheoremId>, TheoremError> {
        let t = text.trim().to_ascii_lowercase();
        match t.as_str() {
            "all" => Ok(Self::ALL.to_vec()),
            "808" => Ok(vec![TheoremId::T808i, TheoremId::T808ii]),
            "809" => Ok(vec![TheoremId::T809i, TheoremId::T809ii, TheoremId::T809iii]),
            "808_809" => Ok(Self::WEAK.to_vec()),
            _ => Self::ALL
                .into_iter()
                .find(|id| id.name() == t)
                .map(|id| vec![id])
                .ok_or(TheoremError::UnknownTheorem(text.to_string())),
        }
    }

    const WEAK: [TheoremId; 5] =
        [TheoremId::T808i, TheoremId::T808ii, TheoremId::T809i, TheoremId::T809ii, TheoremId::T809iii];

    fn is_weak(self) -> bool {
        Self::WEAK.contains(&self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TheoremParams {
    pub spectrum: EstimatorParams,
    pub relations: RelationParams,
}

type Cache<T> = Mutex<HashMap<String, Arc<T>>>;

fn cached<T>(cache: &Cache<T>, key: String, make: impl FnOnce() -> Result<T, TheoremError>) -> Result<Arc<T>, TheoremError> {
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(make()?);
    Ok(cache.lock().expect("cache lock").entry(key).or_insert(v).clone())
}

fn rate_key(r: &GrowthRate<f64>) -> String {
    format!("{}@{}", r.label(), r.time_domain)
}

fn describe_spectrum(r: &SpectrumReport<f64>) -> String {
    let mut s = String::from("{");
    for (i, iv) in r.intervals.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        if iv.is_point() {
            let _ = write!(s, "{}", fmt_ext(iv.lo));
        } else {
            let _ = write!(s, "[{}, {}]", fmt_ext(iv.lo), fmt_ext(iv.hi));
        }
    }
    s.push('}');
    if !r.converged {
        s.push_str(" (not converged)");
    }
    s
}

fn fmt_ext(x: ExtReal<f64>) -> String {
    match x {
        ExtReal::Finite(v) => format!("{v:.4}"),
        other => other.to_string(),
    }
}

fn relation_check(name: &str, v: &RelationVerdict<f64>) -> Check {
    let status = match v.decided() {
        Some(true) => CheckStatus::Holds,
        Some(false) => CheckStatus::Fails,
        None => CheckStatus::Inconclusive,
    };
    Check::new(name, status, v.status())
}

fn dichotomy_check(name: &str, d: &DichotomyVerdict) -> Check {
    match d {
        DichotomyVerdict::Admits { rank } => {
            let detail = rank.map_or_else(|| "admits".to_string(), |r| format!("admits, rank {r}"));
            Check::new(name, CheckStatus::Holds, detail)
        }
        DichotomyVerdict::Absent => Check::new(name, CheckStatus::Fails, "0 is spectral"),
        DichotomyVerdict::Inconclusive { reason } => Check::new(name, CheckStatus::Inconclusive, reason.clone()),
    }
}

fn growth_check(name: &str, g: &GrowthVerdict<f64>) -> Check {
    match g {
        GrowthVerdict::Holds { a } => Check::new(name, CheckStatus::Holds, format!("a = {a:.4}")),
        GrowthVerdict::Fails => Check::new(name, CheckStatus::Fails, "some exponent diverges"),
        GrowthVerdict::Inconclusive { reason } => Check::new(name, CheckStatus::Inconclusive, reason.clone()),
    }
}

/// Does the part of the spectrum inside `[clip_lo, clip_hi]` lie in
/// `[lo, hi]` up to `tol`?
fn part_within(r: &SpectrumReport<f64>, clip: (ExtReal<f64>, ExtReal<f64>), lo: ExtReal<f64>, hi: ExtReal<f64>, tol: f64) -> bool {
    r.intervals.iter().all(|iv| {
        let a = iv.lo.max(clip.0);
        let b = iv.hi.min(clip.1);
        a > b || (a.shift(tol) >= lo && b.shift(-tol) <= hi)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Semiaxis {
    Negative,
    Straddles,
    Positive,
}

fn semiaxis(g: &SpectralGap<f64>) -> Semiaxis {
    let zero = ExtReal::Finite(0.0);
    if g.hi <= zero {
        Semiaxis::Negative
    } else if g.lo >= zero {
        Semiaxis::Positive
    } else {
        Semiaxis::Straddles
    }
}

/// Evaluates theorem instances with shared caches.
pub struct Verifier {
    pub params: TheoremParams,
    spectra: Cache<SpectrumReport<f64>>,
    relations: Cache<RelationVerdict<f64>>,
    profiles: Cache<RelationProfile<RelationVerdict<f64>>>,
    chains: Cache<ChainVerdict<f64>>,
}

impl Verifier {
    pub fn new(params: TheoremParams) -> Self {
        Verifier {
            params,
            spectra: Mutex::default(),
            relations: Mutex::default(),
            profiles: Mutex::default(),
            chains: Mutex::default(),
        }
    }

    fn tol(&self) -> f64 {
        self.params.spectrum.tol_stab
    }

    pub fn spectrum(&self, fx: &Fixture, rate: &GrowthRate<f64>) -> Result<Arc<SpectrumReport<f64>>, TheoremError> {
        cached(&self.spectra, format!("{}|{}", fx.name, rate_key(rate)), || {
            Ok(compute_spectrum(&fx.system, rate, &self.params.spectrum)?)
        })
    }

    pub fn faster(&self, mu: &GrowthRate<f64>, omega: &GrowthRate<f64>) -> Result<Arc<RelationVerdict<f64>>, TheoremError> {
        cached(&self.relations, format!("faster|{}|{}", rate_key(mu), rate_key(omega)), || {
            Ok(check_faster(mu, omega, &self.params.relations)?)
        })
    }

    pub fn weakly_faster(
        &self,
        mu: &GrowthRate<f64>,
        omega: &GrowthRate<f64>,
    ) -> Result<Arc<RelationVerdict<f64>>, TheoremError> {
        cached(&self.relations, format!("weak|{}|{}", rate_key(mu), rate_key(omega)), || {
            Ok(check_weakly_faster(mu, omega, &self.params.relations)?)
        })
    }

    pub fn profile(
        &self,
        a: &GrowthRate<f64>,
        b: &GrowthRate<f64>,
    ) -> Result<Arc<RelationProfile<RelationVerdict<f64>>>, TheoremError> {
        cached(&self.profiles, format!("{}|{}", rate_key(a), rate_key(b)), || {
            Ok(classify_pair(a, b, &self.params.relations)?)
        })
    }

    pub fn chain(&self, rates: &[GrowthRate<f64>]) -> Result<Arc<ChainVerdict<f64>>, TheoremError> {
        let key = rates.iter().map(rate_key).collect::<Vec<_>>().join(",");
        cached(&self.chains, key, || Ok(chain_check(rates, &self.params.relations)?))
    }

    fn check_domain(fx: &Fixture, rates: &[&GrowthRate<f64>]) -> Result<(), TheoremError> {
        for r in rates {
            if r.time_domain != fx.time_domain() {
                return Err(TheoremError::Invalid(format!(
                    "rate {} is {} but fixture {} is {}",
                    r.label(),
                    r.time_domain,
                    fx.name,
                    fx.time_domain()
                )));
            }
        }
        Ok(())
    }

    /// A faster rate with a dichotomy pushes the slower spectrum to infinity.
    pub fn verify_805(&self, fx: &Fixture, mu: &GrowthRate<f64>, omega: &GrowthRate<f64>) -> Result<TheoremReport, TheoremError> {
        Self::check_domain(fx, &[mu, omega])?;
        let hyps = vec![
            relation_check("mu faster than omega", &*self.faster(mu, omega)?),
            dichotomy_check("mu-dichotomy", &dichotomy_from_report(&*self.spectrum(fx, mu)?)),
        ];
        TheoremReport::assemble(TheoremId::T805, &fx.name, vec![mu.label(), omega.label()], hyps, || {
            let r = self.spectrum(fx, omega)?;
            let ok = !r.intervals.is_empty()
                && r.intervals.iter().all(|iv| iv.is_point() && !iv.lo.is_finite());
            Ok(Check::from_bool("omega-spectrum in {+inf}, {-inf}, {-inf, +inf}", ok, describe_spectrum(&r)))
        })
    }

    /// Bounded growth for a slower rate collapses the faster spectrum to 0.
    pub fn verify_806(&self, fx: &Fixture, omega: &GrowthRate<f64>, mu: &GrowthRate<f64>) -> Result<TheoremReport, TheoremError> {
        Self::check_domain(fx, &[mu, omega])?;
        let hyps = vec![
            growth_check("omega-bounded growth", &growth_from_report(&*self.spectrum(fx, omega)?)),
            relation_check("mu faster than omega", &*self.faster(mu, omega)?),
        ];
        TheoremReport::assemble(TheoremId::T806, &fx.name, vec![omega.label(), mu.label()], hyps, || {
            let r = self.spectrum(fx, mu)?;
            let zero = ExtReal::Finite(0.0);
            let ok = r.within(zero, zero, self.tol());
            Ok(Check::from_bool("mu-spectrum = {0}", ok, describe_spectrum(&r)))
        })
    }

    /// Spectral inclusions transported along a weak comparison.
    pub fn verify_808_809(
        &self,
        fx: &Fixture,
        mu: &GrowthRate<f64>,
        omega: &GrowthRate<f64>,
        item: TheoremId,
        a: f64,
        b: f64,
    ) -> Result<TheoremReport, TheoremError> {
        Self::check_domain(fx, &[mu, omega])?;
        let (ea, eb) = (ExtReal::from_value(a), ExtReal::from_value(b));
        let (pos, neg, zero) = (ExtReal::PosInf, ExtReal::NegInf, ExtReal::Finite(0.0));
        let all = (neg, pos);
        // (clip, bound lo, bound hi, bound label, hypothesis on mu?)
        let (clip, lo, hi, label, from_mu) = match item {
            TheoremId::T808i | TheoremId::T808ii if !(a > 0.0 && a.is_finite()) => {
                return Err(TheoremError::Invalid(format!("808 needs a finite a > 0, got {a}")));
            }
            TheoremId::T809i | TheoremId::T809ii | TheoremId::T809iii if !(a <= 0.0 && b >= 0.0) => {
                return Err(TheoremError::Invalid(format!("809 needs a <= 0 <= b, got a = {a}, b = {b}")));
            }
            TheoremId::T808i => (all, neg, ExtReal::from_value(-a), format!("[-inf, {}]", -a), true),
            TheoremId::T808ii => (all, ea, pos, format!("[{a}, +inf]"), true),
            TheoremId::T809i => ((zero, pos), zero, eb, format!("positive part in [0, {}]", fmt_ext(eb)), false),
            TheoremId::T809ii => ((neg, zero), ea, zero, format!("negative part in [{}, 0]", fmt_ext(ea)), false),
            TheoremId::T809iii => (all, ea, eb, format!("[{}, {}]", fmt_ext(ea), fmt_ext(eb)), false),
            other => return Err(TheoremError::Invalid(format!("{} is not a weak-comparison item", other.name()))),
        };
        let (given, target) = if from_mu { (mu, omega) } else { (omega, mu) };
        let tol = self.tol();
        let mut hyps = vec![relation_check("mu weakly faster than omega", &*self.weakly_faster(mu, omega)?)];
        let nothing_to_prove = match item {
            TheoremId::T809i => b == f64::INFINITY,
            TheoremId::T809ii => a == f64::NEG_INFINITY,
            TheoremId::T809iii => a == f64::NEG_INFINITY && b == f64::INFINITY,
            _ => false,
        };
        if nothing_to_prove {
            hyps.push(Check::new("finite bound", CheckStatus::Fails, "infinite bound, nothing to prove"));
        } else {
            let r = self.spectrum(fx, given)?;
            let ok = part_within(&r, clip, lo, hi, tol);
            hyps.push(Check::from_bool(format!("{}-spectrum {label}", given.label()), ok, describe_spectrum(&r)));
        }
        TheoremReport::assemble(item, &fx.name, vec![mu.label(), omega.label()], hyps, || {
            let r = self.spectrum(fx, target)?;
            let ok = part_within(&r, clip, lo, hi, tol);
            Ok(Check::from_bool(format!("{}-spectrum {label}", target.label()), ok, describe_spectrum(&r)))
        })
    }

    /// Along a chain at most one rate gives a strong dichotomy.
    pub fn verify_811(&self, fixtures: &[&Fixture], chain: &[GrowthRate<f64>]) -> Result<TheoremReport, TheoremError> {
        let refs: Vec<&GrowthRate<f64>> = chain.iter().collect();
        for fx in fixtures {
            Self::check_domain(fx, &refs)?;
        }
        let c = self.chain(chain)?;
        let detail = match c.first_failure {
            Some(i) => format!("link {i} ({} -> {}) is {}", chain[i].label(), chain[i + 1].label(), c.links[i].status()),
            None => "all links hold".to_string(),
        };
        let hyps = vec![Check::from_bool("chain order", c.holds(), detail)];
        let name = fixtures.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(",");
        let mut strong_rates = None;
        let mut report = TheoremReport::assemble(TheoremId::T811, &name, chain.iter().map(|r| r.label()).collect(), hyps, || {
            let mut found = Vec::new();
            let mut worst = 0;
            let mut counts = Vec::new();
            for fx in fixtures {
                let mut strong = Vec::new();
                for r in chain {
                    let rep = self.spectrum(fx, r)?;
                    if growth_from_report(&rep).holds() && dichotomy_from_report(&rep).admits() {
                        strong.push(r.label());
                    }
                }
                worst = worst.max(strong.len());
                counts.push(format!("{}: {}", fx.name, strong.len()));
                found.push((fx.name.clone(), strong.first().cloned()));
            }
            strong_rates = Some(found);
            Ok(Check::from_bool("at most one strong rate per system", worst <= 1, counts.join(", ")))
        })?;
        report.details.strong_rates = strong_rates;
        Ok(report)
    }

    /// Equivalent rates give equal or qualitatively equal spectra.
    pub fn verify_908(&self, fx: &Fixture, mu: &GrowthRate<f64>, omega: &GrowthRate<f64>) -> Result<TheoremReport, TheoremError> {
        Self::check_domain(fx, &[mu, omega])?;
        let prof = self.profile(mu, omega)?;
        let weak = prof.weakly_equivalent.holds();
        let strong = prof.equivalent.holds();
        let status = if weak || strong {
            CheckStatus::Holds
        } else if prof.weakly_equivalent.is_inconclusive() || prof.equivalent.is_inconclusive() {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Fails
        };
        let detail = format!("~ {}, ≈ {}", prof.weakly_equivalent.status(), prof.equivalent.status());
        let hyps = vec![Check::new("equivalent rates", status, detail)];
        let tol = self.tol();
        TheoremReport::assemble(TheoremId::T908, &fx.name, vec![mu.label(), omega.label()], hyps, || {
            let (rm, rw) = (self.spectrum(fx, mu)?, self.spectrum(fx, omega)?);
            let detail = format!("{} vs {}", describe_spectrum(&rm), describe_spectrum(&rw));
            if weak {
                let ok = rm.intervals.len() == rw.intervals.len()
                    && rm
                        .intervals
                        .iter()
                        .zip(&rw.intervals)
                        .all(|(x, y)| x.lo.close_to(y.lo, tol) && x.hi.close_to(y.hi, tol));
                return Ok(Check::from_bool("equal spectra", ok, detail));
            }
            let mut failures = Vec::new();
            if rm.contains_pos_inf() != rw.contains_pos_inf() || rm.contains_neg_inf() != rw.contains_neg_inf() {
                failures.push("infinite points differ");
            }
            if rm.gaps.len() != rw.gaps.len() {
                failures.push("gap counts differ");
            } else {
                let ordered = |gs: &[SpectralGap<f64>]| gs.windows(2).all(|w| w[0].hi <= w[1].lo);
                if !ordered(&rm.gaps) || !ordered(&rw.gaps) {
                    failures.push("gap order");
                }
                if rm.gaps.iter().zip(&rw.gaps).any(|(x, y)| x.rank != y.rank) {
                    failures.push("projector ranks differ");
                }
                if rm.gaps.iter().zip(&rw.gaps).any(|(x, y)| semiaxis(x) != semiaxis(y)) {
                    failures.push("gap semiaxes differ");
                }
            }
            let detail = if failures.is_empty() { detail } else { format!("{detail}: {}", failures.join(", ")) };
            Ok(Check::from_bool("qualitatively equal spectra", failures.is_empty(), detail))
        })
    }

    /// A dichotomy for a faster rate rules out bounded growth for the slower.
    pub fn verify_721(&self, fx: &Fixture, mu: &GrowthRate<f64>, omega: &GrowthRate<f64>) -> Result<TheoremReport, TheoremError> {
        Self::check_domain(fx, &[mu, omega])?;
        let hyps = vec![
            dichotomy_check("mu-dichotomy", &dichotomy_from_report(&*self.spectrum(fx, mu)?)),
            relation_check("mu faster than omega", &*self.faster(mu, omega)?),
        ];
        TheoremReport::assemble(TheoremId::C721, &fx.name, vec![mu.label(), omega.label()], hyps, || {
            let r = self.spectrum(fx, omega)?;
            let g = growth_from_report(&r);
            Ok(Check::from_bool("no omega-bounded growth", g.fails(), describe_spectrum(&r)))
        })
    }

    /// Bounded growth for a slower rate rules out a dichotomy for the faster.
    pub fn verify_722(&self, fx: &Fixture, mu: &GrowthRate<f64>, omega: &GrowthRate<f64>) -> Result<TheoremReport, TheoremError> {
        Self::check_domain(fx, &[mu, omega])?;
        let hyps = vec![
            growth_check("omega-bounded growth", &growth_from_report(&*self.spectrum(fx, omega)?)),
            relation_check("mu faster than omega", &*self.faster(mu, omega)?),
        ];
        TheoremReport::assemble(TheoremId::C722, &fx.name, vec![mu.label(), omega.label()], hyps, || {
            let r = self.spectrum(fx, mu)?;
            let d = dichotomy_from_report(&r);
            Ok(Check::from_bool("no mu-dichotomy", !d.admits(), describe_spectrum(&r)))
        })
    }
}

/// Fixtures and rates swept by [`run_theorems`].
#[derive(Clone, Debug)]
pub struct Harness {
    pub fixtures: Vec<Fixture>,
    pub discrete_rates: Vec<GrowthRate<f64>>,
    pub continuous_rates: Vec<GrowthRate<f64>>,
    /// The chain for the strong-dichotomy theorem, by name.
    pub chain: Vec<String>,
    /// `a` values for the 808 items.
    pub thresholds: Vec<f64>,
    /// `(a, b)` bounds for the 809 items.
    pub bounds: Vec<(f64, f64)>,
}

impl Harness {
    /// The catalog systems, a few quotient systems and the catalog rates
    /// together with two rescaled rates.
    pub fn standard() -> Harness {
        use TimeDomain::{Continuous as C, Discrete as D};
        let rates = |domain: TimeDomain| {
            let mut v: Vec<GrowthRate<f64>> = crate::rates::CATALOG_RATES
                .iter()
                .filter_map(|n| GrowthRate::catalog(n, domain).ok())
                .collect();
            v.push(GrowthRate::power_exp(1.0, 3.0, domain).expect("valid"));
            v.push(GrowthRate::power_exp(2.0, 0.5, domain).expect("valid"));
            v
        };
        let mut fixtures = Fixture::all_catalog();
        let quotients: [(&str, TimeDomain, &[f64]); 6] = [
            ("q", D, &[1.0]),
            ("exp", D, &[0.0]),
            ("c", D, &[-1.0]),
            ("q", D, &[-2.0]),
            ("exp", D, &[1.0, -1.0]),
            ("c", C, &[1.0]),
        ];
        for (nu, dom, slopes) in quotients {
            let nu = GrowthRate::catalog(nu, dom).expect("catalog rate");
            fixtures.push(generate_quotient_system(&nu, slopes).expect("valid fixture"));
        }
        Harness {
            fixtures,
            discrete_rates: rates(D),
            continuous_rates: rates(C),
            chain: ["p", "exp", "q", "c"].map(String::from).to_vec(),
            thresholds: vec![0.5, 1.0],
            bounds: vec![(-1.0, 1.0), (-0.5, 2.0), (0.0, 0.0), (f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn rates(&self, domain: TimeDomain) -> &[GrowthRate<f64>] {
        match domain {
            TimeDomain::Discrete => &self.discrete_rates,
            TimeDomain::Continuous => &self.continuous_rates,
        }
    }
}

/// Runs every selected theorem over the harness grid. Reports come back in
/// a fixed order regardless of scheduling.
pub fn run_theorems(verifier: &Verifier, harness: &Harness, ids: &[TheoremId]) -> Result<Vec<TheoremReport>, TheoremError> {
    type Job<'a> = Box<dyn Fn() -> Result<TheoremReport, TheoremError> + Send + Sync + 'a>;
    let mut jobs: Vec<Job<'_>> = Vec::new();
    for &id in ids {
        if id == TheoremId::T811 {
            for domain in [TimeDomain::Discrete, TimeDomain::Continuous] {
                let fxs: Vec<&Fixture> = harness.fixtures.iter().filter(|f| f.time_domain() == domain).collect();
                if fxs.is_empty() {
                    continue;
                }
                let chain = harness
                    .chain
                    .iter()
                    .map(|n| GrowthRate::catalog(n, domain))
                    .collect::<Result<Vec<_>, _>>()?;
                jobs.push(Box::new(move || verifier.verify_811(&fxs, &chain)));
            }
            continue;
        }
        for fx in &harness.fixtures {
            let rates = harness.rates(fx.time_domain());
            for (i, mu) in rates.iter().enumerate() {
                for (j, omega) in rates.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    match id {
                        TheoremId::T805 => jobs.push(Box::new(move || verifier.verify_805(fx, mu, omega))),
                        TheoremId::T806 => jobs.push(Box::new(move || verifier.verify_806(fx, omega, mu))),
                        TheoremId::T908 => jobs.push(Box::new(move || verifier.verify_908(fx, mu, omega))),
                        TheoremId::C721 => jobs.push(Box::new(move || verifier.verify_721(fx, mu, omega))),
                        TheoremId::C722 => jobs.push(Box::new(move || verifier.verify_722(fx, mu, omega))),
                        TheoremId::T808i | TheoremId::T808ii => {
                            for &a in &harness.thresholds {
                                jobs.push(Box::new(move || verifier.verify_808_809(fx, mu, omega, id, a, 0.0)));
                            }
                        }
                        _ if id.is_weak() => {
                            for &(a, b) in &harness.bounds {
                                jobs.push(Box::new(move || verifier.verify_808_809(fx, mu, omega, id, a, b)));
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
    }
    jobs.par_iter().map(|job| job()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_names() {
        assert_eq!(TheoremId::parse_selection("all").unwrap().len(), 11);
        assert_eq!(TheoremId::parse_selection("809").unwrap().len(), 3);
        assert_eq!(TheoremId::parse_selection("811").unwrap(), vec![TheoremId::T811]);
        assert!(TheoremId::parse_selection("999").is_err());
    }

    #[test]
    fn catalog_fixtures_match_their_closed_forms() {
        for fx in Fixture::all_catalog() {
            let times: Vec<f64> = match fx.time_domain() {
                TimeDomain::Discrete => vec![-4.0, -1.0, 0.0, 2.0, 5.0],
                TimeDomain::Continuous => vec![-3.0, -0.5, 0.0, 1.5, 3.0],
            };
            let err = fx.closed_form_error(&times).unwrap().unwrap();
            assert!(err <= 1e-6, "{}: {err}", fx.name);
        }
    }

    #[test]
    fn quotient_systems_realize_their_quotients() {
        let q = GrowthRate::catalog("q", TimeDomain::Discrete).unwrap();
        let fx = generate_quotient_system(&q, &[1.0, -0.5]).unwrap();
        let err = fx.closed_form_error(&[-6.0, -1.0, 0.0, 3.0, 7.0]).unwrap().unwrap();
        assert!(err <= 1e-9, "{err}");
        assert_eq!(fx.expected["q"].len(), 2);
        let merged = generate_quotient_system(&q, &[1.0, 1.1]).unwrap();
        assert_eq!(merged.expected["q"].len(), 1);
    }
}
