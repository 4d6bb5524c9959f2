use std::path::PathBuf;
use std::process::{Command, Output};

use muspec::evolution::{LinearSystem, SystemDescriptor};
use muspec::rates::{GrowthRate, RateDescriptor, TimeDomain};
use serde_json::Value;

fn muspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muspec")).args(args).output().expect("spawn muspec")
}

fn muspec_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muspec")).args(args).env(key, val).output().expect("spawn muspec")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Compares against tests/golden/NAME; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

const QUADRATIC: &str = r#"{"kind":"power_exp","p":2,"lambda":1}"#;

#[test]
fn spectrum_of_abs2t_under_quadratic_rate() {
    let o = muspec(&["spectrum", "--system", "catalog:abs2t", "--rate", QUADRATIC]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], true);
    assert_eq!(v["intervals"], serde_json::json!([{"lo": 1, "hi": 1}]));
    golden("spectrum_abs2t_q.json", &stdout(&o));
}

#[test]
fn spectrum_of_identity_as_csv() {
    let o = muspec(&["spectrum", "--system", "catalog:identity", "--rate", "catalog:exp", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("window,component,lambda_lower,lambda_upper"));
    golden("spectrum_identity_exp.csv", &out);
}

#[test]
fn spectrum_of_frak_a_is_minus_infinity() {
    let o = muspec(&["spectrum", "--system", "catalog:frak_a", "--rate", "exp"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["intervals"], serde_json::json!([{"lo": "-inf", "hi": "-inf"}]));
    golden("spectrum_frak_a_exp.json", &stdout(&o));
}

#[test]
fn table_format_renders() {
    let o = muspec(&["spectrum", "--system", "catalog:abs2t", "--rate", QUADRATIC, "--format", "table"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!stdout(&o).trim().is_empty());
}

#[test]
fn unconverged_spectrum_exits_two() {
    // A single window cannot show stabilisation.
    let o = muspec(&["spectrum", "--system", "catalog:abs2t", "--rate", "exp", "--schedule", "100"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], false);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_exit_codes() {
    let holds = muspec(&["compare", "--relation", "faster", "--a", "q", "--b", "exp", "--domain", "continuous"]);
    assert_eq!(code(&holds), 0, "{}", stderr(&holds));
    golden("compare_faster_q_exp.json", &stdout(&holds));

    let fails = muspec(&["compare", "--relation", "faster", "--a", "exp", "--b", "q", "--domain", "continuous"]);
    assert_eq!(code(&fails), 3, "{}", stderr(&fails));
    let v: Value = serde_json::from_str(&stdout(&fails)).unwrap();
    assert_eq!(v["outcome"], "fails");
    assert!(v["witness"].as_array().is_some_and(|w| !w.is_empty()));
    golden("compare_faster_exp_q.json", &stdout(&fails));

    let eq = muspec(&["compare", "--relation", "weakly-equivalent", "--a", "q", "--b", "q"]);
    assert_eq!(code(&eq), 0, "{}", stderr(&eq));
    golden("compare_weakly_equivalent_q_q.json", &stdout(&eq));
}

#[test]
fn verify_strong_rate_and_skip() {
    let o = muspec(&["verify", "--theorem", "811", "--chain", "p,exp,q,c", "--system", "catalog:abs2t"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(v["details"]["strong_rates"], serde_json::json!([["abs2t", "q"]]));
    golden("verify_811_abs2t.jsonl", &stdout(&o));

    let o = muspec(&["verify", "--theorem", "805", "--system", "catalog:identity", "--mu", "q", "--omega", "exp"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(v["status"], "skipped");
    golden("verify_805_identity.jsonl", &stdout(&o));
}

#[test]
fn verify_all_passes() {
    let o = muspec(&["verify", "--theorem", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|v| v["status"] != "fail"));
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 3] = [
        &["spectrum", "--system", "catalog:abs2t", "--rate", QUADRATIC],
        &["compare", "--relation", "faster", "--a", "exp", "--b", "q"],
        &["verify", "--theorem", "811", "--chain", "p,exp,q,c", "--system", "catalog:abs2t"],
    ];
    for args in runs {
        let a = muspec(args);
        let b = muspec(args);
        let c = muspec_env(args, "MUSPEC_THREADS", "1");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?} single-threaded");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"system":"catalog:abs2t","rate":{"kind":"power_exp","p":2,"lambda":1},"schedule":[50,100,200],"tol_stab":0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let o = muspec(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--tol-stab",
        "0.03",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["params"]["tol_stab"], 0.03);
    assert_eq!(v["params"]["schedule"], serde_json::json!([50, 100, 200]));
    assert_eq!(v["system"]["coefficients"]["diagonal"], serde_json::json!(["2*abs(t)"]));
}

#[test]
fn catalog_round_trips() {
    let o = muspec(&["catalog", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    golden("catalog.json", &stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rates = v["rates"].as_array().unwrap();
    assert!(rates.len() >= 5);
    for r in rates {
        let d: RateDescriptor = serde_json::from_value(r["descriptor"].clone()).unwrap();
        let _: GrowthRate<f64> = d.build(TimeDomain::Discrete).unwrap();
    }
    let systems = v["systems"].as_array().unwrap();
    for s in systems {
        let d: SystemDescriptor = serde_json::from_value(s["system"].clone()).unwrap();
        LinearSystem::<f64>::from_descriptor(&d, None).unwrap();
    }
    assert!(stdout(&o).contains("exp(-3*k^2-3*k-1)"));
}

#[test]
fn descriptor_errors_name_the_field() {
    let cases = [
        (
            r#"{"time_domain":"discrete","dimension":1,"structure":"scalar","coefficients":{"diagonal":[3]}}"#,
            "`coefficients.diagonal[0]`",
        ),
        (r#"{"time_domain":"discrete","dimension":"one","structure":"scalar","coefficients":{"diagonal":["1"]}}"#, "`dimension`"),
        (r#"{"time_domain":"discrete","dimension":1,"structure":"scalar","coefficients":{"kind":[]}}"#, "`coefficients`"),
        (
            r#"{"time_domain":"discrete","dimension":1,"structure":"scalar","coefficients":{"diagonal":["3*t^^2"]}}"#,
            "coefficients.diagonal[0]",
        ),
    ];
    for (system, path) in cases {
        let o = muspec(&["spectrum", "--system", system, "--rate", "exp"]);
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains(path), "{path} not in {}", stderr(&o));
    }
    let rates = [
        (r#"{"kind":"power_exp","p":"x","lambda":1}"#, "`p`"),
        (r#"{"kind":"glued","inner":{"kind":"polynomial"},"outer":{"kind":"power_exp","p":1}}"#, "`outer.lambda`"),
        (r#"{"kind":"nope"}"#, "`kind`"),
    ];
    for (rate, path) in rates {
        let o = muspec(&["spectrum", "--system", "catalog:abs2t", "--rate", rate]);
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains(path), "{path} not in {}", stderr(&o));
    }
}

#[test]
fn missing_arguments_are_errors() {
    let o = muspec(&["spectrum", "--rate", "exp"]);
    assert_eq!(code(&o), 1);
    let o = muspec(&["compare", "--relation", "faster", "--a", "exp"]);
    assert_eq!(code(&o), 1);
}
