use std::process::{Command, Output};

use plumbcalc::appendix::{appendix_rows, write_rows};
use plumbcalc::theta::z_series;
use plumbcalc::{load_appendix, QSeries, Rational};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plumbcalc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn classify_counts() {
    let o = run(&["classify", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 40);

    let o = run(&["classify", "--labelings", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 313);

    let v = json(&run(&["classify"]));
    assert_eq!(v["labelings"], 312);
    assert_eq!(v["classes"], 39);
    assert_eq!(v["matches_appendix"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 39);
    assert_eq!(v["rows"][0]["labels"], serde_json::json!([2, 3, 7, 1, 2, 3]));
}

#[test]
fn series_both_routes_agree() {
    let o = run(&["series", "1", "--cutoff", "30", "--route", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["equal"], true);
    let closed = QSeries::from_json(&v["closed"]).unwrap();
    let contour = QSeries::from_json(&v["contour"]).unwrap();
    assert_eq!(closed, contour);
    let direct = z_series(&load_appendix().unwrap()[0].labels, &Rational::from_integer(30.into())).unwrap();
    assert_eq!(closed, direct);
    assert!(!closed.is_empty());
}

#[test]
fn series_zhat_halves_exponents() {
    let v = json(&run(&["series", "1", "--zhat", "--cutoff", "15"]));
    let zh = QSeries::from_json(&v["closed"]).unwrap();
    let z = z_series(&load_appendix().unwrap()[0].labels, &Rational::from_integer(30.into())).unwrap();
    let half = Rational::new(1.into(), 2.into());
    let expect: Vec<(Rational, Rational)> = z.absolute().into_iter().map(|(e, c)| (e * &half, c)).collect();
    let got: Vec<(Rational, Rational)> = zh.absolute().into_iter().collect();
    assert_eq!(got, expect);
}

#[test]
fn series_rejects_singular_labels() {
    let o = run(&["series", "2,2,2,2,2,2", "--cutoff", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("det 0"));
    assert_eq!(run(&["series", "1,2,3"]).status.code(), Some(2));
    assert_eq!(run(&["series", "40"]).status.code(), Some(2));
}

#[test]
fn quantum_set_sweep() {
    let o = run(&["quantum-set", "1", "--kmax", "6", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("h,k,vanishes"));
    // 1 + 1 + 2 + 2 + 4 + 2 reduced fractions
    assert_eq!(lines.clone().count(), 12);
    assert!(lines.any(|l| l == "5,6,true"));
}

#[test]
fn verify_selected_entries() {
    let o = run(&["verify-appendix", "--entries", "1,26"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let idx: Vec<u64> = v["entries"].as_array().unwrap().iter().map(|e| e["index"].as_u64().unwrap()).collect();
    assert_eq!(idx, vec![1, 26]);
    assert_eq!(run(&["verify-appendix", "--entries", "0"]).status.code(), Some(2));
}

#[test]
fn verify_flags_injected_typo() {
    let mut rows = appendix_rows().unwrap();
    rows[4].sigma3 += 1;
    let path = std::env::temp_dir().join(format!("plumbcalc-typo-{}.csv", std::process::id()));
    write_rows(std::fs::File::create(&path).unwrap(), &rows).unwrap();
    let o = run(&["verify-appendix", "--entries", "1,5", "--format", "csv", "--dataset", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("entry  1 (2,3,7,1,2,3) ok"));
    assert!(out.lines().any(|l| l.starts_with("entry  5") && l.contains("FAILED") && l.contains("q_match")));
}

/// The printed table has three internal inconsistencies (entry 3's `s2`,
/// the `c` values of entries 10 and 15); nothing else fails.
#[test]
fn verify_full_table_names_printed_inconsistencies() {
    let o = run(&["verify-appendix", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let failing: Vec<&str> = out.lines().filter(|l| l.contains("FAILED")).collect();
    assert_eq!(failing.len(), 3, "{out}");
    assert!(failing[0].starts_with("entry  3") && failing[0].contains("family_params"));
    assert!(failing[1].starts_with("entry 10") && failing[1].contains("c_match: labels give 7/12"));
    assert!(failing[2].starts_with("entry 15") && failing[2].contains("c_match: labels give 2269/5640"));
}

#[test]
fn asympt_report_honours_precision_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_plumbcalc"))
        .args(["asympt", "1", "--h", "0", "--k", "1", "--order", "0", "--format", "csv"])
        .env("PLUMBCALC_PRECISION", "30")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,radial,partial_sum,residual,ratio");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("1/16,"));
    let radial = lines[1].split(',').nth(1).unwrap();
    let mantissa = radial.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert!(mantissa.trim_start_matches('0').len() <= 30, "{}", lines[1]);

    let bad = run(&["asympt", "1", "--h", "2", "--k", "4"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn export_appendix_round_trips() {
    let o = run(&["export", "appendix", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let mut expect = Vec::new();
    write_rows(&mut expect, &appendix_rows().unwrap()).unwrap();
    assert_eq!(o.stdout, expect);
    let v = json(&run(&["export", "appendix"]));
    assert_eq!(v.as_array().unwrap().len(), 39);
}
