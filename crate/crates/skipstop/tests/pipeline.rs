use std::process::Command;

use skipstop::case::{run_case, CaseStatus, RunOptions};
use skipstop::config::{ScenarioConfig, SweepSpec, TransitMode};
use skipstop::report::{emit_reports, ReportOptions};
use skipstop::sweep::run_sweep;
use skipstop_core::cost::generalized_cost;

fn small(mode: TransitMode, density: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(mode, density, Some(4.0), 5.0, 1.5, 20.0);
    c.length = 20.0;
    c.cells = 40;
    c
}

#[test]
fn savings_match_recomputed_costs() {
    let c = run_case(&small(TransitMode::Rail, 1000.0), &RunOptions::default()).unwrap();
    assert_eq!(c.status, CaseStatus::Ok);
    let p = c.config.params().unwrap();
    let best = c.design().unwrap();
    let all = c.all_stop().unwrap();
    let gc = generalized_cost(&c.field, &best.scalars, &best.profiles, &p).unwrap().gc;
    let base = generalized_cost(&c.field, &all.scalars, &all.profiles, &p).unwrap().gc;
    assert!((c.savings().unwrap() - (base - gc) / base).abs() < 1e-12);
    assert!(c.bound.as_ref().unwrap().value <= gc * (1.0 + 1e-12));
    assert_eq!(c.errors.len(), 11);
}

#[test]
fn report_has_one_row_per_case() {
    let mut spec = SweepSpec::preset(skipstop::config::Preset::Base);
    spec.modes = vec![TransitMode::Bus];
    spec.origin_stds = vec![4.0];
    spec.trip_means = vec![5.0];
    spec.trip_stds = vec![1.5];
    spec.values_of_time = vec![20.0];
    spec.length = 20.0;
    spec.cells = 40;
    let cases = spec.cases();
    let results = run_sweep(&cases, &RunOptions { bound: false, ..RunOptions::default() }, 2);
    let dir = tempfile::tempdir().unwrap();
    emit_reports(dir.path(), &results, &ReportOptions { per_case: false }).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("cases.csv")).unwrap();
    let ids: Vec<String> = reader.records().map(|r| r.unwrap()[0].to_string()).collect();
    let expected: Vec<String> = cases.iter().map(ScenarioConfig::id).collect();
    assert_eq!(ids, expected);
    assert!(!dir.path().join(format!("plan_{}.csv", expected[0])).exists());
}

#[test]
fn cli_reads_toml_and_writes_case_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("case.toml");
    std::fs::write(
        &config,
        "mode = \"bus\"\ndensity = 150\norigin_std = 4\ntrip_mean = 5\ntrip_std = 1.5\nvalue_of_time = 20\nlength = 20\ncells = 40\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_skipstop"))
        .args(["verify", "--config"])
        .arg(&config)
        .args(["--mu", "10", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8_lossy(&status.stdout);
    assert!(stdout.contains("case bus_so4_el5_sl1.5_mu10_d150_L20_n40"), "{stdout}");
    assert!(out.join("errors_bus_so4_el5_sl1.5_mu10_d150_L20_n40.csv").exists());

    let bad = Command::new(env!("CARGO_BIN_EXE_skipstop"))
        .args(["solve", "--config"])
        .arg(&config)
        .args(["--trip-mean", "-3"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
