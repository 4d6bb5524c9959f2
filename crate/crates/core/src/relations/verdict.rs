use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Faster,
    WeaklyFaster,
    AlmostFaster,
    AlmostSlower,
    WeaklyEquivalent,
    Equivalent,
    ChainOrder,
}

impl RelationKind {
    pub const ALL: [RelationKind; 7] = [
        RelationKind::Faster,
        RelationKind::WeaklyFaster,
        RelationKind::AlmostFaster,
        RelationKind::AlmostSlower,
        RelationKind::WeaklyEquivalent,
        RelationKind::Equivalent,
        RelationKind::ChainOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Faster => "faster",
            RelationKind::WeaklyFaster => "weakly_faster",
            RelationKind::AlmostFaster => "almost_faster",
            RelationKind::AlmostSlower => "almost_slower",
            RelationKind::WeaklyEquivalent => "weakly_equivalent",
            RelationKind::Equivalent => "equivalent",
            RelationKind::ChainOrder => "chain_order",
        }
    }

    /// Accepts snake or kebab case.
    pub fn from_name(name: &str) -> Option<Self> {
        let norm = name.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == norm)
    }
}

/// One evaluated pair `n <= k` of a sup.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessPair<F> {
    pub n: F,
    pub k: F,
    pub value: F,
}

/// The sup of one quantity along the window schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupTrace<F> {
    /// The exponent pair or ratio this trace belongs to.
    pub label: String,
    pub sups: Vec<F>,
    pub argmax: Vec<WitnessPair<F>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridChoice<F> {
    /// The exponent fixed first.
    pub fixed: F,
    /// The exponent found for it.
    pub chosen: F,
    /// Final sup, i.e. `log M`.
    pub log_m: F,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate<F> {
    /// `(ε, C(ε))` for each ε of the grid.
    Faster { envelopes: Vec<(F, F)> },
    WeaklyFaster { log_m: F },
    /// Per-grid choices and a line `L_ω <= c L_μ + C`.
    Almost { choices: Vec<GridChoice<F>>, c: F, intercept: F },
    /// Sub-verdicts that all hold.
    Composite { parts: Vec<RelationVerdict<F>> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness<F> {
    /// Exponent pair or ratio whose sup grows.
    pub parameter: String,
    pub pairs: Vec<WitnessPair<F>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics<F> {
    pub reason: String,
    pub traces: Vec<SupTrace<F>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<RelationVerdict<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<F> {
    Holds(Certificate<F>),
    Fails(Witness<F>),
    Inconclusive(Diagnostics<F>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub schedule: Vec<usize>,
    pub samples_per_unit: usize,
    pub tol_stab: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exponents: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub search: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationVerdict<F> {
    pub kind: RelationKind,
    pub outcome: Outcome<F>,
    pub grid: GridInfo,
}

impl<F> RelationVerdict<F> {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, Outcome::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self.outcome, Outcome::Fails(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.outcome, Outcome::Inconclusive(_))
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            Outcome::Holds(_) => "holds",
            Outcome::Fails(_) => "fails",
            Outcome::Inconclusive(_) => "inconclusive",
        }
    }

    /// `Some(true)` for Holds, `Some(false)` for Fails.
    pub fn decided(&self) -> Option<bool> {
        match self.outcome {
            Outcome::Holds(_) => Some(true),
            Outcome::Fails(_) => Some(false),
            Outcome::Inconclusive(_) => None,
        }
    }
}

impl<F: Serialize> Serialize for RelationVerdict<F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("relation", self.kind.name())?;
        m.serialize_entry("direction", "mu_over_omega")?;
        m.serialize_entry("outcome", self.status())?;
        match &self.outcome {
            Outcome::Holds(c) => m.serialize_entry("certificate", c)?,
            Outcome::Fails(w) => {
                m.serialize_entry("witness", &w.pairs)?;
                m.serialize_entry("parameter", &w.parameter)?;
            }
            Outcome::Inconclusive(d) => m.serialize_entry("diagnostics", d)?,
        }
        m.serialize_entry("grid", &self.grid)?;
        m.end()
    }
}
