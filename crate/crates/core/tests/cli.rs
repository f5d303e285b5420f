use std::path::Path;
use std::process::{Command, Output};

use polewarp::classifier::StabilityStatus;
use polewarp::manifest::{CctRecord, RunManifest, VerdictRecord};
use tempfile::TempDir;

fn polewarp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polewarp"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("POLEWARP_DIGITS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path, name: &str) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.manifest.json"))).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn assess_stable_lorenz_prints_a_round_trippable_verdict() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["assess", "--config", "lorenz_stable", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let record: VerdictRecord = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record.verdict.status, StabilityStatus::Stable);
    assert!((record.verdict.tau_pole_f64().unwrap() - 1.0).abs() <= 0.01);
    record.config.validate().unwrap();

    let file: VerdictRecord =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lorenz_stable.verdict.json")).unwrap()).unwrap();
    assert_eq!(file, record);

    let m = manifest(dir.path(), "lorenz_stable");
    assert_eq!(m.command, "assess");
    assert_eq!(m.digits, 81);
    assert_eq!(m.version, env!("CARGO_PKG_VERSION"));
    assert!(m.missing_outputs().is_empty());
    assert!((m.total_seconds - m.stage_sum()).abs() <= 0.01 * m.total_seconds);
    let stages: Vec<&str> = m.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(stages, ["prepare", "sep_solve", "propagation", "pade", "roots"]);
}

#[test]
fn unstable_verdict_exits_ten() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["assess", "--config", "lorenz_other_sep"]);
    assert_eq!(out.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&out.stdout).contains("UnstableOtherSep"));
}

#[test]
fn configuration_errors_exit_two_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let missing_network = write_config(
        dir.path(),
        "net.json",
        r#"{"schema":"polewarp.scenario/1","name":"net","model":{"kind":"wscc9","network":"absent.json"},
            "initial":{"kind":"fault","faulted_bus":9,"r_f":0,"x_f":0.001,"clearing_time":0.1},
            "mapping":{"K":1,"p":6},"order":{"L":10,"M":10}}"#,
    );
    let out = polewarp(dir.path(), &["assess", "--config", &missing_network]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("model.network"), "{}", stderr(&out));

    let out = polewarp(dir.path(), &["assess", "--config", "lorenz_stable", "--epsilon", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`epsilon`"));

    let out = polewarp(dir.path(), &["assess", "--config", "no/such/file.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"));

    let bad = write_config(dir.path(), "bad.json", r#"{"schema":"polewarp.scenario/1","name":"x"}"#);
    let out = polewarp(dir.path(), &["assess", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));

    let out = polewarp(dir.path(), &["assess"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three_and_names_the_stage() {
    let dir = TempDir::new().unwrap();
    let at_sep = write_config(
        dir.path(),
        "at_sep.json",
        r#"{"schema":"polewarp.scenario/1","name":"at_sep","model":{"kind":"lorenz","sigma":1,"rho":2,"beta":1},
            "initial":{"kind":"explicit","x":[1,1,1]},"sep_guess":[1,1,1],"mapping":{"K":1,"p":3},"order":{"L":10,"M":10}}"#,
    );
    let out = polewarp(dir.path(), &["assess", "--config", &at_sep]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("stage `propagation`"), "{}", stderr(&out));
}

#[test]
fn digits_precedence_is_flag_then_config_then_environment() {
    let dir = TempDir::new().unwrap();
    let no_digits = write_config(
        dir.path(),
        "nd.json",
        r#"{"schema":"polewarp.scenario/1","name":"nd","model":{"kind":"lorenz","sigma":1,"rho":2,"beta":1},
            "initial":{"kind":"explicit","x":[2,0.5,2]},"sep_guess":[1,1,1],"mapping":{"K":1,"p":3},"order":{"L":20,"M":20}}"#,
    );
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_polewarp"));
        c.args(args).arg("--out-dir").arg(dir.path()).env_remove("POLEWARP_DIGITS");
        if let Some(d) = env {
            c.env("POLEWARP_DIGITS", d);
        }
        assert!(c.output().unwrap().status.code().is_some());
    };
    run(&["assess", "--config", &no_digits], Some("50"));
    assert_eq!(manifest(dir.path(), "nd").digits, 50);
    run(&["assess", "--config", &no_digits, "--digits", "60"], Some("50"));
    assert_eq!(manifest(dir.path(), "nd").digits, 60);
    run(&["assess", "--config", "lorenz_stable"], Some("50"));
    assert_eq!(manifest(dir.path(), "lorenz_stable").digits, 81);
    run(&["assess", "--config", &no_digits], None);
    assert_eq!(manifest(dir.path(), "nd").digits, 41);
}

#[test]
fn batch_runs_fan_out_and_report_the_worst_verdict() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(
        dir.path(),
        &["assess", "--config", "lorenz_stable", "--config", "lorenz_other_sep", "--config", "lorenz_chaotic", "--jobs", "3", "--json"],
    );
    assert_eq!(out.status.code(), Some(10));
    let records: Vec<VerdictRecord> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let names: Vec<&str> = records.iter().map(|r| r.config.name.as_str()).collect();
    assert_eq!(names, ["lorenz_stable", "lorenz_other_sep", "lorenz_chaotic"]);
    for n in names {
        assert!(manifest(dir.path(), n).missing_outputs().is_empty());
    }
    let leftovers = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
}

#[test]
fn order_override_reaches_the_coefficient_dump() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["coeffs", "--config", "lorenz_stable", "--order", "8", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&dir.path().join("lorenz_stable.coeffs.csv"));
    assert_eq!(header, ["k", "x", "y", "z", "h"]);
    assert_eq!(rows.len(), 17);
    // h_0 = -1 / |(2, 0.5, 2) - (1, 1, 1)|^2 = -4/9, written out at 81 digits
    assert_eq!(rows[0][4], format!("-4.{}e-1", "4".repeat(80)));
    assert_eq!(rows[1][1], "-5e-1");
}

#[test]
fn simulate_writes_time_states_and_indicator() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["simulate", "--config", "lorenz_stable"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&dir.path().join("lorenz_stable.simulate.csv"));
    assert_eq!(header, ["t", "tau", "x", "y", "z", "h"]);
    assert_eq!(rows[0][..5], ["0", "0", "2", "0.5", "2"].map(String::from));
    let last: Vec<f64> = rows.last().unwrap().iter().map(|c| c.parse().unwrap()).collect();
    assert_eq!(last[0], 30.0);
    assert!(last[1] < 1.0 && last[1] > 0.9999);
    assert!(last[5] < -1e6);
    let m = manifest(dir.path(), "lorenz_stable");
    assert!((m.total_seconds - m.stage_sum()).abs() <= 0.01 * m.total_seconds);
}

#[test]
fn compare_on_undamped_slip_deviates_only_at_the_end() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["compare", "--config", "smib_div"]);
    assert!(out.status.code() == Some(10), "{}", stderr(&out));
    let (header, rows) = csv_rows(&dir.path().join("smib_div.compare.csv"));
    assert_eq!(header, ["tau", "h_oracle", "h_pade", "abs_diff"]);
    let mut early = 0.0f64;
    let mut late = 0.0f64;
    for r in &rows {
        let tau: f64 = r[0].parse().unwrap();
        let h: f64 = r[1].parse().unwrap();
        let diff: f64 = r[3].parse().unwrap();
        if tau <= 0.98 {
            early = early.max(diff / h.abs());
        } else if tau >= 0.995 {
            late = late.max(diff / h.abs());
        }
    }
    assert!(early < 1e-6, "early deviation {early}");
    assert!(late > 0.1, "late deviation {late}");
    // the approximant column keeps the working precision
    assert!(rows[0][2].len() > 150);
    let m = manifest(dir.path(), "smib_div");
    assert!(m.missing_outputs().is_empty());
    assert!((m.total_seconds - m.stage_sum()).abs() <= 0.01 * m.total_seconds);
}

#[test]
fn pade_roots_marks_the_kept_pole() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["pade-roots", "--config", "lorenz_stable"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&dir.path().join("lorenz_stable.roots.csv"));
    assert_eq!(header, ["re", "im", "residual", "residue", "nearest_zero", "status"]);
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().any(|r| r[5] == "kept"));
}

#[test]
fn cct_bisect_degenerate_and_inverted_brackets() {
    let dir = TempDir::new().unwrap();
    let out = polewarp(dir.path(), &["cct-bisect", "--config", "wscc_fault", "--lo", "0.5", "--hi", "0.5", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let record: CctRecord = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((record.report.method.stable, record.report.method.unstable), (0.5, 0.5));

    let out = polewarp(dir.path(), &["cct-bisect", "--config", "wscc_fault", "--lo", "1.0", "--hi", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not unstable"), "{}", stderr(&out));

    let out = polewarp(dir.path(), &["cct-bisect", "--config", "lorenz_stable", "--lo", "0.1", "--hi", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`initial`"), "{}", stderr(&out));
}
