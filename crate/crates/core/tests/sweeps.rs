use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use qhet_core::experiments::sweep::cross_method_disagreements;
use qhet_core::experiments::{run_sweep, RunReport, SweepSpec};
use qhet_core::scenario::load_scenario_file;
use qhet_core::Scenario;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn base_for(spec: &SweepSpec) -> Scenario {
    spec.scenario_path.as_deref().map(|p| load_scenario_file(p).unwrap()).unwrap_or_default()
}

#[test]
fn shipped_scenarios_load() {
    for name in ["optical.conf", "f_example.conf", "colored.conf"] {
        let sc = load_scenario_file(&configs().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = qhet_core::load_scenario(&sc.serialize()).unwrap();
        assert_eq!(again.digest(), sc.digest(), "{name}");
    }
    assert_eq!(load_scenario_file(&configs().join("optical.conf")).unwrap().digest(), Scenario::default().digest());
}

#[test]
fn shipped_analytic_sweeps_agree_across_methods() {
    for name in [
        "nf_vs_gain_q05.sweep",
        "nf_vs_gain_q1.sweep",
        "chi_vs_theta_45db.sweep",
        "quadratures_vs_theta.sweep",
        "chi_vs_omega.sweep",
    ] {
        let spec = SweepSpec::parse_file(&configs().join("sweeps").join(name)).unwrap();
        let base = base_for(&spec);
        let report = run_sweep(&spec, &base, &AtomicBool::new(false)).unwrap();
        assert!(!report.records.is_empty(), "{name}");
        assert!(!report.truncated);
        let bad = cross_method_disagreements(&report, &spec, &base).unwrap();
        assert!(bad.is_empty(), "{name}: {bad:?}");
    }
}

#[test]
fn written_results_reparse_and_regenerate_identically() {
    let spec = SweepSpec::parse(
        "parameter = r\nvalues = 0, 0.5, 1\noutputs = nf_db, chi, beat_cos\n\
         methods = analytic, oracle, monte-carlo\nseed_base = 11\nmc_duration = 300000\nset.q = 0.5\n",
        None,
    )
    .unwrap();
    let base = Scenario::default();
    let report = run_sweep(&spec, &base, &AtomicBool::new(false)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (csv_path, json_path) = (dir.path().join("run.csv"), dir.path().join("run.json"));
    std::fs::write(&csv_path, report.to_csv_string()).unwrap();
    std::fs::write(&json_path, report.to_json().unwrap()).unwrap();

    let from_csv = RunReport::from_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap();
    let from_json = RunReport::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!(from_csv.same_results(&report));
    assert!(from_json.same_results(&report));

    // The echoed sweep and scenario are enough to rerun the experiment.
    let spec_again = SweepSpec::parse(&from_csv.sweep, None).unwrap();
    let base_again = qhet_core::load_scenario(&from_csv.scenario).unwrap();
    assert_eq!(base_again.digest(), from_csv.scenario_digest);
    let rerun = run_sweep(&spec_again, &base_again, &AtomicBool::new(false)).unwrap();
    assert_eq!(rerun.csv_body(), report.csv_body());
}

#[test]
fn cancelled_sweep_is_marked_truncated() {
    let spec = SweepSpec::parse("parameter = r\nvalues = 0, 1, 2\noutputs = nf_db\n", None).unwrap();
    let report = run_sweep(&spec, &Scenario::default(), &AtomicBool::new(true)).unwrap();
    assert!(report.truncated);
    assert!(report.records.len() < 3);
    assert!(report.to_csv_string().contains("# truncated: true"));
}
