use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sparselaw::harness::{
    aggregate, measure_levels, measure_order, measure_parity, run_experiment, write_report, ExperimentConfig,
    ExperimentId,
};
use sparselaw::heightkit::{fingerprint_order, order_parity, Parity};
use sparselaw::pathkit::{goldilocks_eta, PhiTriple};
use sparselaw::randmodel::{DEFAULT_ALPHA1, DEFAULT_ALPHA2};
use sparselaw::relstruct::{Node, RelationalStructure};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparselaw")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn value(m: &[(String, f64)], q: &str) -> f64 {
    m.iter().find(|(k, _)| k == q).unwrap_or_else(|| panic!("no {q}")).1
}

#[test]
fn unknown_flag_exits_two() {
    let out = cli(&["sample", "--case", "b", "--n", "10", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for p in [&a, &b] {
        let out = cli(&["sample", "--case", "b", "--n", "100", "--seed", "1", "--trial", "0", "--out", path_str(p)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn order_outside_model_range_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.txt");
    let out = cli(&[
        "sample", "--case", "b", "--n", "300", "--alpha2", "0.8", "--nonpaper-regime", "--seed", "4", "--out", path_str(&f),
    ]);
    assert!(out.status.success());
    let refused = cli(&["order", "--structure", path_str(&f), "--start", "1"]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("error:"));
    let ok = cli(&["order", "--structure", path_str(&f), "--start", "1", "--nonpaper-regime", "--chain-len", "64"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!(v.get("separation").is_some());
}

#[test]
fn experiment_cli_writes_reproducible_reports() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = cli(&[
            "experiment", "--id", "levels", "--case", "b", "--n", "256,512", "--trials", "4", "--seed", "7", "--out-dir",
            path_str(d.path()),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["levels.csv", "levels.json"] {
        let (a, b) = (dirs[0].path().join(f), dirs[1].path().join(f));
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(dirs[0].path().join("levels.csv")).unwrap();
    assert!(csv.starts_with("experiment,n,trial,seed,quantity,value\n"));
    assert!(dirs[0].path().join("levels_timing.json").exists());
}

#[test]
fn embedded_aggregates_match_rows() {
    for id in [ExperimentId::Degree, ExperimentId::Height, ExperimentId::Paths] {
        let mut c = ExperimentConfig::new(id);
        c.n_grid = vec![300, 600];
        c.trials = 3;
        c.starts = 8;
        let r = run_experiment(&c).unwrap();
        assert_eq!(aggregate(&r.rows), r.aggregates);
        let json: serde_json::Value = serde_json::from_str(&r.json_string().unwrap()).unwrap();
        assert_eq!(json["config"]["thresholds"]["levels_pass_rate"], 0.9);
        let dir = tempfile::tempdir().unwrap();
        let paths = write_report(&r, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(paths.csv).unwrap(), r.csv_string().unwrap());
    }
}

#[test]
fn worker_count_does_not_change_reports() {
    let mut c = ExperimentConfig::new(ExperimentId::Height);
    c.n_grid = vec![400];
    c.trials = 4;
    let pool = |w| rayon::ThreadPoolBuilder::new().num_threads(w).build().unwrap();
    let one = pool(1).install(|| run_experiment(&c).unwrap());
    let four = pool(4).install(|| run_experiment(&c).unwrap());
    assert_eq!(one.csv_string().unwrap(), four.csv_string().unwrap());
}

#[test]
fn edgeless_structure_has_height_zero() {
    let g = RelationalStructure::digraph(50, &[], &[]).unwrap();
    let phi = PhiTriple::case_b(&g).unwrap();
    let m = measure_levels(&ExperimentConfig::new(ExperimentId::Levels), &phi, 1);
    assert_eq!(value(&m, "height"), 0.0);
    assert_eq!(value(&m, "flag_height"), 0.0);
    assert_eq!(value(&m, "pass"), 0.0);
    assert_eq!(value(&m, "nat_iso"), 1.0);
}

#[test]
fn parity_fixture_reaches_log_star_three() {
    // A 17-node chain whose step types follow the Goldilocks prefix.
    let eta = goldilocks_eta(DEFAULT_ALPHA1, DEFAULT_ALPHA2, 16).unwrap();
    let (mut r1, mut r2) = (Vec::new(), Vec::new());
    for (i, &e) in eta.entries.iter().enumerate() {
        let step = (i as Node + 1, i as Node + 2);
        if e == 2 { r2.push(step) } else { r1.push(step) }
    }
    let g = RelationalStructure::digraph(17, &r1, &r2).unwrap();
    let phi = PhiTriple::case_b(&g).unwrap();
    let mut c = ExperimentConfig::new(ExperimentId::Parity);
    c.eta_len = Some(16);
    c.starts = 0;
    let m = measure_parity(&c, &phi, 0).unwrap();
    assert!(value(&m, "length_path") >= 16.0);
    assert!(value(&m, "log_star_path") >= 3.0);
    assert_eq!(value(&m, "psi_holds"), 0.0);
}

#[test]
fn total_domain_of_ten_has_even_parity() {
    // Chain 1..4; domain nodes 5..14 get distinct 4-bit fingerprints.
    let mut r2 = vec![(1, 2), (2, 3), (3, 4)];
    for (i, d) in (5..=14).enumerate() {
        for bit in 0..4 {
            if (i + 1) >> bit & 1 == 1 {
                r2.push((d, bit as Node + 1));
            }
        }
    }
    let g = RelationalStructure::digraph(14, &[], &r2).unwrap();
    let order = fingerprint_order(&g, &[1, 2, 3, 4]).unwrap();
    let domain: Vec<Node> = (5..=14).collect();
    assert!(order.separation(&domain).total);
    assert_eq!(order_parity(&order, &domain), Parity::Even);
    assert_eq!(order_parity(&order, &domain[..9]), Parity::Odd);
    let mut c = ExperimentConfig::new(ExperimentId::Order);
    c.nonpaper_regime = true;
    c.chain_len = 4;
    let m = measure_order(&c, &g, 1, 0).unwrap();
    assert_eq!(value(&m, "parity_consistent"), 1.0);
}
