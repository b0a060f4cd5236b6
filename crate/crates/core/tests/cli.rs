use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lvhc::hostcap::DistributionSummary;
use lvhc::HcSampleSet;

fn lvhc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvhc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn estimate_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("estimate.json")).unwrap()).unwrap()
}

#[test]
fn same_seed_gives_identical_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["estimate", "--feeder", "builtin:synth10", "--npen", "0.5", "--nmc", "200", "--seed", "5"];
    ok(&lvhc(&args, &a));
    ok(&lvhc(&[&args[..], &["--threads", "1"]].concat(), &b));
    let (sa, sb) = (
        fs::read(a.join("samples.json")).unwrap(),
        fs::read(b.join("samples.json")).unwrap(),
    );
    assert_eq!(sa, sb);
    let samples = HcSampleSet::from_json(std::str::from_utf8(&sa).unwrap()).unwrap();
    assert_eq!(samples.n_mc(), 200);
    assert_eq!(samples.meta.seed, 5);
    assert_eq!(samples.n_gen, 5);
}

#[test]
fn full_penetration_estimates_agree_across_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let mut phi = Vec::new();
    for method in ["fixed-voltage", "fixed-power"] {
        let dir = tmp.path().join(method);
        let args = ["estimate", "--feeder", "builtin:synth10", "--npen", "1", "--nmc", "20", "--method", method];
        ok(&lvhc(&args, &dir));
        phi.push(estimate_json(&dir)["estimates"][0]["phi_eps_total"].as_f64().unwrap());
    }
    assert!((phi[0] - phi[1]).abs() <= 1e-8 * phi[0], "{phi:?}");
}

#[test]
fn empty_penetration_list_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lvhc(&["sweep", "--feeder", "builtin:synth10", "--npen", ""], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("summary.csv").exists());
}

#[test]
fn bad_arguments_fail_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["estimate", "--feeder", "builtin:synth10", "--npen", "1.5"],
        vec!["estimate", "--feeder", "builtin:synth10", "--ngen", "3", "--nmc", "0"],
        vec!["estimate", "--feeder", "builtin:synth10", "--ngen", "3", "--eps", "1.2"],
        vec!["estimate", "--feeder", "builtin:synth10", "--ngen", "3", "--tau", "0"],
    ] {
        let out = lvhc(&args, tmp.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error[invalid_argument]"));
    }
    assert!(!tmp.path().join("estimate.json").exists());
}

#[test]
fn missing_feeder_file_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    let out = lvhc(
        &["estimate", "--feeder", missing.to_str().unwrap(), "--ngen", "2"],
        &tmp.path().join("out"),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[io]"));
}

#[test]
fn malformed_feeder_reports_location() {
    let tmp = tempfile::tempdir().unwrap();
    let text = lvhc::feeders::SYNTH10_JSON.replacen("\"phase\": \"b\"", "\"phase\": \"d\"", 1);
    assert_ne!(text, lvhc::feeders::SYNTH10_JSON);
    let path = tmp.path().join("bad.json");
    fs::write(&path, text).unwrap();
    let out = lvhc(&["validate", "--feeder", path.to_str().unwrap()], &tmp.path().join("out"));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(!out.status.success());
    assert!(err.contains("error[parse]") && err.contains(".phase"), "{err}");
}

#[test]
fn sweep_summary_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&lvhc(
        &["sweep", "--feeder", "builtin:synth10", "--ngen", "2,5,9", "--nmc", "100", "--eps", "0.05,0.1"],
        tmp.path(),
    ));
    assert!(stdout.contains("summary.csv"));
    let text = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert!(text.starts_with("n_gen,n_pen,stat_name,phi_total_kw,phi_per_gen_kw"));
    let summary = DistributionSummary::read_csv(text.as_bytes()).unwrap();
    assert_eq!(summary.levels(), vec![2, 5, 9]);
    assert_eq!(summary.rows.len(), 3 * 7);
    let mut again = Vec::new();
    summary.write_csv(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
    let full = summary.stat(9, "min").unwrap().phi_per_gen_kw;
    assert_eq!(full, summary.stat(9, "max").unwrap().phi_per_gen_kw);
    for row in &summary.rows {
        assert_eq!(row.phi_total_kw, row.n_gen as f64 * row.phi_per_gen_kw);
    }
}

#[test]
fn validate_writes_error_curve() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&lvhc(&["validate", "--feeder", "builtin:synth10", "--levels", "4"], tmp.path()));
    let text = fs::read_to_string(tmp.path().join("validate.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let col = rdr.headers().unwrap().iter().position(|h| h == "max_abs_err").unwrap();
    let errs: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(errs.len(), 5);
    assert!(errs[0] <= 1e-10);
    assert!(errs.iter().all(|e| *e <= 5e-3));
}

#[test]
fn feeders_lists_and_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lvhc")).arg("feeders").output().unwrap();
    let text = ok(&out);
    for name in lvhc::feeders::NAMES {
        assert!(text.contains(name));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_lvhc"))
        .args(["feeders", "--dump", "synth10"])
        .output()
        .unwrap();
    let dumped = ok(&out);
    let path = tmp.path().join("synth10.json");
    fs::write(&path, &dumped).unwrap();
    let reloaded = lvhc::netmodel::load_feeder(&path).unwrap();
    assert_eq!(reloaded, lvhc::feeders::synth10());
}
