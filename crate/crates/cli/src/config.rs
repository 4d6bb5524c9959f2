use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use muspec::evolution::{LinearSystem, SystemDescriptor};
use muspec::rates::{GrowthRate, RateDescriptor, TimeDomain, CATALOG_RATES};
use muspec::relations::RelationParams;
use muspec::spectrum::EstimatorParams;
use muspec::theorems::Fixture;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

/// Everything a command may read, from flags or a config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<Value>,
    pub rate: Option<Value>,
    pub a: Option<Value>,
    pub b: Option<Value>,
    pub mu: Option<Value>,
    pub omega: Option<Value>,
    pub relation: Option<String>,
    pub theorem: Option<String>,
    pub chain: Option<Vec<String>>,
    pub domain: Option<TimeDomain>,
    pub schedule: Option<Vec<usize>>,
    pub tol_stab: Option<f64>,
    pub cutoff_fraction: Option<f64>,
    pub gamma_max: Option<f64>,
    pub delta_merge: Option<f64>,
    pub samples_per_unit: Option<usize>,
    pub bound_a: Option<f64>,
    pub bound_b: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:ident, $file:ident; $($field:ident),*) => {
        RunConfig { $($field: $flags.$field.or($file.$field)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set on `self` win over those in `file`.
    pub fn over(self, file: RunConfig) -> RunConfig {
        let flags = self;
        overlay!(flags, file; system, rate, a, b, mu, omega, relation, theorem, chain, domain, schedule,
            tol_stab, cutoff_fraction, gamma_max, delta_merge, samples_per_unit, bound_a, bound_b, format, output)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn estimator_params(&self) -> anyhow::Result<EstimatorParams> {
        let mut p = EstimatorParams::default();
        if let Some(s) = &self.schedule {
            p.schedule = s.clone();
        }
        if let Some(x) = self.tol_stab {
            p.tol_stab = x;
        }
        if let Some(x) = self.cutoff_fraction {
            p.cutoff_fraction = x;
        }
        if let Some(x) = self.gamma_max {
            p.gamma_max = x;
        }
        if let Some(x) = self.delta_merge {
            p.delta_merge = x;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn relation_params(&self) -> anyhow::Result<RelationParams> {
        let mut p = RelationParams::default();
        if let Some(s) = &self.schedule {
            p.schedule = s.clone();
        }
        if let Some(x) = self.tol_stab {
            p.tol_stab = x;
        }
        if let Some(x) = self.samples_per_unit {
            p.samples_per_unit = x;
        }
        if p.schedule.is_empty() || p.schedule[0] == 0 || p.schedule.windows(2).any(|w| w[0] >= w[1]) {
            bail!("schedule must be positive and strictly increasing");
        }
        if !(p.tol_stab > 0.0) || p.samples_per_unit == 0 {
            bail!("tol_stab and samples_per_unit must be positive");
        }
        Ok(p)
    }
}

/// Deserializes `text`, returning the offending field path on failure.
fn decode_at<T: DeserializeOwned>(text: &str) -> Result<T, (String, serde_json::Error)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| (e.path().to_string(), e.into_inner()))
}

fn decode<T: DeserializeOwned>(what: &str, text: &str) -> anyhow::Result<T> {
    decode_at(text).map_err(|(path, e)| fault(what, &path, e))
}

fn fault(what: &str, path: &str, e: serde_json::Error) -> anyhow::Error {
    if path == "." {
        anyhow::anyhow!("{what}: {e}")
    } else {
        anyhow::anyhow!("{what} at `{path}`: {e}")
    }
}

/// Tagged rate descriptors are buffered before dispatch, which hides the field
/// path from the deserializer; this walks the raw value to find the bad field.
fn rate_fault(v: &Value, prefix: &str) -> Option<String> {
    let at = |field: &str| if prefix.is_empty() { field.to_string() } else { format!("{prefix}.{field}") };
    let Value::Object(m) = v else {
        return Some(if prefix.is_empty() { ".".into() } else { prefix.into() });
    };
    let numeric = |f: &str| match m.get(f) {
        Some(Value::Number(_)) => None,
        _ => Some(at(f)),
    };
    match m.get("kind").and_then(Value::as_str) {
        Some("power_exp") => numeric("p").or_else(|| numeric("lambda")),
        Some("polynomial") => None,
        Some("expression") => match m.get("log_rate") {
            Some(Value::String(_)) => None,
            _ => Some(at("log_rate")),
        },
        Some("glued") => rate_fault(m.get("inner").unwrap_or(&Value::Null), &at("inner"))
            .or_else(|| rate_fault(m.get("outer").unwrap_or(&Value::Null), &at("outer")))
            .or_else(|| match m.get("crossover") {
                None | Some(Value::Null) | Some(Value::Number(_)) => None,
                _ => Some(at("crossover")),
            }),
        _ => Some(at("kind")),
    }
}

fn text_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `catalog:NAME`, a bare catalog name, or a JSON descriptor.
pub fn load_rate(v: &Value, domain: TimeDomain) -> anyhow::Result<GrowthRate<f64>> {
    let text = text_of(v);
    let t = text.trim();
    if CATALOG_RATES.contains(&t) {
        return Ok(GrowthRate::catalog(t, domain)?);
    }
    if let Some(name) = t.strip_prefix("catalog:") {
        return Ok(GrowthRate::catalog(name, domain)?);
    }
    let d: RateDescriptor = decode_at(t).map_err(|(path, e)| {
        let path = match path.as_str() {
            "." => serde_json::from_str::<Value>(t).ok().and_then(|v| rate_fault(&v, "")).unwrap_or(path),
            _ => path,
        };
        fault("rate descriptor", &path, e)
    })?;
    d.build(domain).with_context(|| format!("rate `{t}`"))
}

/// `catalog:NAME`, inline JSON, or a path to a JSON descriptor.
pub fn load_system(v: &Value) -> anyhow::Result<Fixture> {
    let custom = |name: String, system: LinearSystem<f64>| Fixture {
        name,
        system,
        closed_form: None,
        expected: Default::default(),
    };
    if let Value::Object(_) = v {
        let d: SystemDescriptor = decode("system descriptor", &v.to_string())?;
        return Ok(custom("custom".into(), LinearSystem::from_descriptor(&d, None)?));
    }
    let text = text_of(v);
    let t = text.trim();
    if let Some(name) = t.strip_prefix("catalog:") {
        return Ok(Fixture::catalog(name)?);
    }
    if t.starts_with('{') {
        let d: SystemDescriptor = decode("system descriptor", t)?;
        return Ok(custom("custom".into(), LinearSystem::from_descriptor(&d, None)?));
    }
    let path = Path::new(t);
    let body = std::fs::read_to_string(path).with_context(|| format!("reading system {}", path.display()))?;
    let d: SystemDescriptor = decode(&format!("system descriptor {}", path.display()), &body)?;
    let system = LinearSystem::from_descriptor(&d, path.parent())?;
    Ok(custom(path.display().to_string(), system))
}
