mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use muspec::rates::{GrowthRate, TimeDomain, CATALOG_RATES};
use muspec::relations::{classify_pair, RelationKind, RelationVerdict};
use muspec::spectrum::{compute_spectrum, SpectrumReport};
use muspec::theorems::{
    run_theorems, Fixture, Harness, TheoremId, TheoremParams, TheoremReport, TheoremStatus, Verifier, CATALOG_SYSTEMS,
};
use serde::Serialize;
use serde_json::Value;

use config::{load_rate, load_system, Format, RunConfig};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_FAILS: u8 = 3;

#[derive(Parser)]
#[command(name = "muspec", version, about = "Dichotomy spectra and growth-rate relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum of a system relative to a growth rate.
    Spectrum(SpectrumArgs),
    /// Decide a relation between two growth rates.
    Compare(CompareArgs),
    /// Check theorems on fixture systems.
    Verify(VerifyArgs),
    /// List built-in rates and systems.
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct Common {
    /// JSON file with defaults; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Window schedule, comma separated.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
    #[arg(long)]
    tol_stab: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EstimatorFlags {
    #[arg(long)]
    cutoff_fraction: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    delta_merge: Option<f64>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    estimator: EstimatorFlags,
    /// `catalog:NAME`, inline JSON or a descriptor path.
    #[arg(long)]
    system: Option<String>,
    /// `catalog:NAME` or a JSON rate descriptor.
    #[arg(long)]
    rate: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// faster, weakly-faster, almost-faster, almost-slower,
    /// weakly-equivalent, equivalent or chain-order.
    #[arg(long)]
    relation: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long, value_parser = parse_domain)]
    domain: Option<TimeDomain>,
    #[arg(long)]
    samples_per_unit: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    estimator: EstimatorFlags,
    /// Theorem id (805, 806, 808, 808i, ..., 811, 908, 721, 722) or `all`.
    #[arg(long)]
    theorem: Option<String>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long, value_delimiter = ',')]
    chain: Option<Vec<String>>,
    /// Bound `a` for the 808/809 items.
    #[arg(long, allow_hyphen_values = true)]
    bound_a: Option<f64>,
    /// Bound `b` for the 809 items.
    #[arg(long, allow_hyphen_values = true)]
    bound_b: Option<f64>,
    #[arg(long)]
    samples_per_unit: Option<usize>,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    json: bool,
}

fn parse_domain(s: &str) -> Result<TimeDomain, String> {
    match s {
        "discrete" => Ok(TimeDomain::Discrete),
        "continuous" => Ok(TimeDomain::Continuous),
        other => Err(format!("unknown time domain `{other}`")),
    }
}

fn string_value(s: Option<String>) -> Option<Value> {
    s.map(Value::String)
}

fn with_file(flags: RunConfig, common: &Common) -> anyhow::Result<RunConfig> {
    match &common.config {
        Some(path) => Ok(flags.over(RunConfig::load(path)?)),
        None => Ok(flags),
    }
}

fn common_config(c: &Common) -> RunConfig {
    RunConfig {
        schedule: c.schedule.clone(),
        tol_stab: c.tol_stab,
        format: c.format,
        output: c.output.clone(),
        ..Default::default()
    }
}

fn emit(cfg: &RunConfig, body: &str) -> anyhow::Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(output::to_json(value)? + "\n")
}

fn spectrum_csv(report: &SpectrumReport<f64>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["window", "component", "lambda_lower", "lambda_upper"])?;
    for (i, c) in report.components.iter().enumerate() {
        for e in &c.per_window {
            w.write_record([
                e.window.to_string(),
                i.to_string(),
                output::format_float(e.lower),
                output::format_float(e.upper),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn spectrum_table(report: &SpectrumReport<f64>) -> String {
    let mut s = String::new();
    for iv in &report.intervals {
        s += &format!("interval  [{}, {}]\n", iv.lo, iv.hi);
    }
    for g in &report.gaps {
        let rank = g.rank.map_or_else(|| "-".to_string(), |r| r.to_string());
        s += &format!("gap       ({}, {})  rank {rank}\n", g.lo, g.hi);
    }
    s += &format!("converged {}\n", report.converged);
    s
}

fn cmd_spectrum(args: SpectrumArgs) -> anyhow::Result<u8> {
    let flags = RunConfig {
        system: string_value(args.system),
        rate: string_value(args.rate),
        cutoff_fraction: args.estimator.cutoff_fraction,
        gamma_max: args.estimator.gamma_max,
        delta_merge: args.estimator.delta_merge,
        ..common_config(&args.common)
    };
    let cfg = with_file(flags, &args.common)?;
    let params = cfg.estimator_params()?;
    let fixture = load_system(cfg.system.as_ref().ok_or_else(|| anyhow!("--system is required"))?)?;
    let rate = load_rate(cfg.rate.as_ref().ok_or_else(|| anyhow!("--rate is required"))?, fixture.time_domain())?;
    let report = compute_spectrum(&fixture.system, &rate, &params)?;
    let body = match cfg.format() {
        Format::Json => json_line(&report)?,
        Format::Csv => spectrum_csv(&report)?,
        Format::Table => spectrum_table(&report),
    };
    emit(&cfg, &body)?;
    Ok(if report.converged { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn pick(profile: muspec::rates::RelationProfile<RelationVerdict<f64>>, kind: RelationKind) -> RelationVerdict<f64> {
    match kind {
        RelationKind::Faster => profile.faster.forward,
        RelationKind::WeaklyFaster => profile.weakly_faster.forward,
        RelationKind::AlmostFaster => profile.almost_faster.forward,
        RelationKind::AlmostSlower => profile.almost_slower.forward,
        RelationKind::WeaklyEquivalent => profile.weakly_equivalent,
        RelationKind::Equivalent => profile.equivalent,
        RelationKind::ChainOrder => profile.chain_order.forward,
    }
}

fn verdict_csv(v: &RelationVerdict<f64>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["relation", "outcome", "trace", "window", "sup", "n", "k"])?;
    let value = serde_json::to_value(v)?;
    let mut rows: Vec<(String, Value)> = Vec::new();
    if let Some(pairs) = value.get("witness") {
        let label = value.get("parameter").and_then(Value::as_str).unwrap_or_default();
        rows.push((label.to_string(), pairs.clone()));
    }
    if let Some(traces) = value.pointer("/diagnostics/traces").and_then(Value::as_array) {
        for t in traces {
            let label = t.get("label").and_then(Value::as_str).unwrap_or_default();
            rows.push((label.to_string(), t.get("argmax").cloned().unwrap_or(Value::Null)));
        }
    }
    let num = |x: Option<&Value>| x.and_then(Value::as_f64).map(output::format_float).unwrap_or_default();
    for (label, pairs) in rows {
        for (i, p) in pairs.as_array().into_iter().flatten().enumerate() {
            let window = v.grid.schedule.get(i).map(ToString::to_string).unwrap_or_default();
            w.write_record([
                v.kind.name().to_string(),
                v.status().to_string(),
                label.clone(),
                window,
                num(p.get("value")),
                num(p.get("n")),
                num(p.get("k")),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<u8> {
    let flags = RunConfig {
        relation: args.relation,
        a: string_value(args.a),
        b: string_value(args.b),
        domain: args.domain,
        samples_per_unit: args.samples_per_unit,
        ..common_config(&args.common)
    };
    let cfg = with_file(flags, &args.common)?;
    let params = cfg.relation_params()?;
    let name = cfg.relation.as_deref().ok_or_else(|| anyhow!("--relation is required"))?;
    let kind = RelationKind::from_name(name).ok_or_else(|| anyhow!("unknown relation `{name}`"))?;
    let domain = cfg.domain.unwrap_or(TimeDomain::Discrete);
    let a = load_rate(cfg.a.as_ref().ok_or_else(|| anyhow!("--a is required"))?, domain)?;
    let b = load_rate(cfg.b.as_ref().ok_or_else(|| anyhow!("--b is required"))?, domain)?;
    let verdict = pick(classify_pair(&a, &b, &params)?, kind);
    let body = match cfg.format() {
        Format::Json => json_line(&verdict)?,
        Format::Csv => verdict_csv(&verdict)?,
        Format::Table => format!("{} {} {}: {}\n", a.label(), kind.name(), b.label(), verdict.status()),
    };
    emit(&cfg, &body)?;
    Ok(match verdict.decided() {
        Some(true) => EXIT_OK,
        Some(false) => EXIT_FAILS,
        None => EXIT_INCONCLUSIVE,
    })
}

fn status_name(s: TheoremStatus) -> &'static str {
    match s {
        TheoremStatus::Pass => "pass",
        TheoremStatus::Fail => "fail",
        TheoremStatus::Skipped => "skipped",
    }
}

fn targeted_reports(
    verifier: &Verifier,
    harness: &Harness,
    ids: &[TheoremId],
    cfg: &RunConfig,
) -> anyhow::Result<Vec<TheoremReport>> {
    let mut reports = Vec::new();
    for &id in ids {
        if id == TheoremId::T811 {
            continue;
        }
        for fx in &harness.fixtures {
            let domain = fx.time_domain();
            let mu = load_rate(cfg.mu.as_ref().ok_or_else(|| anyhow!("--mu and --omega go together"))?, domain)?;
            let omega = load_rate(cfg.omega.as_ref().ok_or_else(|| anyhow!("--mu and --omega go together"))?, domain)?;
            let r = match id {
                TheoremId::T805 => vec![verifier.verify_805(fx, &mu, &omega)?],
                TheoremId::T806 => vec![verifier.verify_806(fx, &omega, &mu)?],
                TheoremId::T908 => vec![verifier.verify_908(fx, &mu, &omega)?],
                TheoremId::C721 => vec![verifier.verify_721(fx, &mu, &omega)?],
                TheoremId::C722 => vec![verifier.verify_722(fx, &mu, &omega)?],
                TheoremId::T808i | TheoremId::T808ii => {
                    let thresholds = cfg.bound_a.map_or_else(|| harness.thresholds.clone(), |a| vec![a]);
                    thresholds
                        .into_iter()
                        .map(|a| verifier.verify_808_809(fx, &mu, &omega, id, a, 0.0))
                        .collect::<Result<_, _>>()?
                }
                _ => {
                    let bounds = match (cfg.bound_a, cfg.bound_b) {
                        (None, None) => harness.bounds.clone(),
                        (a, b) => vec![(a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))],
                    };
                    bounds
                        .into_iter()
                        .map(|(a, b)| verifier.verify_808_809(fx, &mu, &omega, id, a, b))
                        .collect::<Result<_, _>>()?
                }
            };
            reports.extend(r);
        }
    }
    Ok(reports)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let flags = RunConfig {
        theorem: args.theorem,
        system: string_value(args.system),
        mu: string_value(args.mu),
        omega: string_value(args.omega),
        chain: args.chain,
        bound_a: args.bound_a,
        bound_b: args.bound_b,
        cutoff_fraction: args.estimator.cutoff_fraction,
        gamma_max: args.estimator.gamma_max,
        delta_merge: args.estimator.delta_merge,
        samples_per_unit: args.samples_per_unit,
        ..common_config(&args.common)
    };
    let cfg = with_file(flags, &args.common)?;
    let params = TheoremParams { spectrum: cfg.estimator_params()?, relations: cfg.relation_params()? };
    let ids = TheoremId::parse_selection(cfg.theorem.as_deref().unwrap_or("all"))?;
    let mut harness = Harness::standard();
    if let Some(sys) = &cfg.system {
        harness.fixtures = vec![load_system(sys)?];
    }
    if let Some(chain) = &cfg.chain {
        harness.chain = chain.clone();
    }
    let verifier = Verifier::new(params);
    let reports = if cfg.mu.is_some() || cfg.omega.is_some() {
        let mut r = targeted_reports(&verifier, &harness, &ids, &cfg)?;
        if ids.contains(&TheoremId::T811) {
            r.extend(run_theorems(&verifier, &harness, &[TheoremId::T811])?);
        }
        r
    } else {
        run_theorems(&verifier, &harness, &ids)?
    };
    let body = match cfg.format() {
        Format::Json => reports.iter().map(json_line).collect::<anyhow::Result<String>>()?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["theorem", "fixture", "rates", "status"])?;
            for r in &reports {
                w.write_record([r.theorem.as_str(), &r.fixture, &r.rates.join(" "), status_name(r.status)])?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Table => reports
            .iter()
            .map(|r| format!("{:<7} {:<40} {:<30} {}\n", r.theorem, r.fixture, r.rates.join(","), status_name(r.status)))
            .collect(),
    };
    emit(&cfg, &body)?;
    let failed = reports.iter().any(|r| r.status == TheoremStatus::Fail);
    Ok(if failed { EXIT_FAILS } else { EXIT_OK })
}

#[derive(Serialize)]
struct CatalogRate {
    name: String,
    descriptor: muspec::rates::RateDescriptor,
}

#[derive(Serialize)]
struct Catalog {
    rates: Vec<CatalogRate>,
    systems: Vec<muspec::theorems::FixtureSummary>,
}

fn catalog() -> anyhow::Result<Catalog> {
    let rates = CATALOG_RATES
        .iter()
        .map(|&name| {
            let rate = GrowthRate::<f64>::catalog(name, TimeDomain::Discrete)
                .or_else(|_| GrowthRate::catalog(name, TimeDomain::Continuous))?;
            Ok(CatalogRate { name: name.to_string(), descriptor: rate.to_descriptor() })
        })
        .collect::<anyhow::Result<_>>()?;
    let systems = Fixture::all_catalog().iter().map(Fixture::summary).collect();
    Ok(Catalog { rates, systems })
}

fn cmd_catalog(args: CatalogArgs) -> anyhow::Result<u8> {
    let cat = catalog()?;
    let body = if args.json {
        json_line(&cat)?
    } else {
        let mut s = String::from("rates:\n");
        for r in &cat.rates {
            s += &format!("  {:<10} {}\n", r.name, output::to_json(&r.descriptor)?);
        }
        s += "systems:\n";
        for (sys, (name, desc)) in cat.systems.iter().zip(CATALOG_SYSTEMS) {
            s += &format!("  {:<10} {:<36} {}\n", name, desc, output::to_json(&sys.system)?);
        }
        s
    };
    emit(&RunConfig::default(), &body)?;
    Ok(EXIT_OK)
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("MUSPEC_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().with_context(|| format!("MUSPEC_THREADS=`{v}` is not a thread count"))?;
    if n == 0 {
        bail!("MUSPEC_THREADS must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Catalog(a) => cmd_catalog(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
