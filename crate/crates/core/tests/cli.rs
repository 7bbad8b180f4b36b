//! The command-line front end: file outputs, determinism and exit codes.

use std::fs;
use std::path::Path;

use fsuq::cli::{run, split_cut_table, EXIT_NUMERICAL, EXIT_USAGE};
use fsuq::extension::PBoxFamily;
use fsuq::FuzzyVariable;

fn fsuq(args: &[&str]) -> i32 {
    run(std::iter::once("fsuq").chain(args.iter().copied()))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn small_example1(dir: &Path, workers: &str) -> i32 {
    fsuq(&["example1", "--ms", "400", "--seed", "9", "--workers", workers, "--out", dir.to_str().unwrap()])
}

#[test]
fn example1_is_deterministic_across_runs_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(small_example1(&a, "1"), 0);
    assert_eq!(small_example1(&b, "1"), 0);
    assert_eq!(small_example1(&c, "3"), 0);
    for name in ["q1_membership.csv", "q2_field.csv", "q3_pbox.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs between runs");
        assert_eq!(read(&a, name), read(&c, name), "{name} differs between worker counts");
    }
    let report: serde_json::Value = serde_json::from_str(&read(&a, "report.json")).unwrap();
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["config"]["samples"], 400);
}

#[test]
fn example1_tables_reimport_and_nest() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(small_example1(tmp.path(), "2"), 0);
    let q1 = read(tmp.path(), "q1_membership.csv");
    assert!(q1.starts_with("# fsuq q1_membership v1\ninteraction,alpha,lo,hi\n"));
    let groups = split_cut_table(&q1).unwrap();
    assert_eq!(groups.iter().map(|g| g.0.as_str()).collect::<Vec<_>>(), ["non", "full"]);
    for (_, v) in &groups {
        assert!(v.validate().is_empty());
    }
    for (n, f) in groups[0].1.cuts().iter().zip(groups[1].1.cuts()) {
        assert!(n.contains_interval(f));
    }

    let q2 = split_cut_table(&read(tmp.path(), "q2_field.csv")).unwrap();
    assert_eq!(q2.len(), 42);
    let (non, full): (Vec<_>, Vec<_>) = q2.iter().partition(|(k, _)| k.starts_with("non,"));
    for ((kn, n), (kf, f)) in non.iter().zip(&full) {
        assert_eq!(kn.trim_start_matches("non,"), kf.trim_start_matches("full,"));
        assert!(n.validate().is_empty() && f.validate().is_empty());
        assert!(n.cuts().iter().zip(f.cuts()).all(|(a, b)| a.contains_interval(b)));
    }

    let q3 = read(tmp.path(), "q3_pbox.csv");
    let split = |label: &str| {
        let body: String = q3.lines().filter_map(|l| l.strip_prefix(label)).map(|l| format!("{l}\n")).collect();
        PBoxFamily::from_csv(&body).unwrap()
    };
    let (non, full) = (split("non,"), split("full,"));
    assert!(non.validate().is_empty() && full.validate().is_empty());
    assert!(non.contains(&full));
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"ms": 200, "seed": 1, "interaction": "full", "alphas": [0, 0.5, 1]}"#).unwrap();
    let out = tmp.path().join("o");
    let code = fsuq(&["example1", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&read(&out, "report.json")).unwrap();
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["config"]["samples"], 200);
    let groups = split_cut_table(&read(&out, "q1_membership.csv")).unwrap();
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0].1.levels(), &[0.0, 0.5, 1.0]);

    fs::write(&cfg, r#"{"samples": 200}"#).unwrap();
    assert_eq!(fsuq(&["example1", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(fsuq(&["example1", "--config", "/nonexistent/run.json"]), EXIT_USAGE);
    assert_eq!(fsuq(&["example1", "--alphas", "0.5,1", "--out", out.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(fsuq(&["example1", "--workers", "0", "--out", out.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn extend_identity_echoes_input() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("z.csv");
    let z = FuzzyVariable::decagonal(&[0.0, 0.25, 0.50, 0.75, 1.00, 1.20, 1.25, 1.50, 1.75, 2.00]).unwrap();
    fs::write(&input, z.to_cut_csv()).unwrap();
    let out = tmp.path().join("o");
    assert_eq!(fsuq(&["extend", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let echoed = read(&out, "extend.csv");
    assert_eq!(echoed.lines().skip(1).collect::<Vec<_>>(), z.to_cut_csv().lines().collect::<Vec<_>>());

    let second = tmp.path().join("w.csv");
    fs::write(&second, FuzzyVariable::triangular(-1.0, 0.0, 2.0).unwrap().to_cut_csv()).unwrap();
    let code = fsuq(&[
        "extend", "--input", input.to_str().unwrap(), "--input", second.to_str().unwrap(), "--map", "sum",
        "--interaction", "both", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let groups = split_cut_table(&read(&out, "extend.csv")).unwrap();
    let (non, full) = (&groups[0].1, &groups[1].1);
    assert_eq!((non.support().lo(), non.support().hi()), (-1.0, 4.0));
    assert!(non.cuts().iter().zip(full.cuts()).all(|(a, b)| a.contains_interval(b)));
}

#[test]
fn fit_constant_column_is_crisp() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("v.csv");
    fs::write(&input, "value\n".to_string() + &"0.25\n".repeat(30)).unwrap();
    let out = tmp.path().join("o");
    assert_eq!(fsuq(&["fit", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let v = FuzzyVariable::from_cut_csv(&read(&out, "fit.csv")).unwrap();
    assert!(v.is_crisp());
    assert_eq!(v.core().lo(), 0.25);

    fs::write(&input, "value\n1\n2\n1\n2\n").unwrap();
    assert_eq!(fsuq(&["fit", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn kl_info_reports_truncation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(fsuq(&["kl-info", "--length-um", "1000", "--nh", "100", "--out", out]), 0);
    let report: serde_json::Value = serde_json::from_str(&read(tmp.path(), "report.json")).unwrap();
    assert_eq!(report["terms"], 27);
    let eigen = read(tmp.path(), "kl_eigen.csv");
    assert_eq!(eigen.lines().count(), 2 + 100);
}

#[test]
fn ingest_then_example2_from_fitted_moments() {
    let tmp = tempfile::tempdir().unwrap();
    let ingest = tmp.path().join("ingest");
    let code = fsuq(&["ingest", "--width", "400", "--height", "200", "--seed", "3", "--out", ingest.to_str().unwrap()]);
    assert_eq!(code, 0);
    let map = fsuq::data::PixelMap::from_pgm(&fs::read(ingest.join("map.pgm")).unwrap()).unwrap();
    assert!((map.occupancy_fraction() - 0.63).abs() <= 0.01);
    let fitted = split_cut_table(&read(&ingest, "fitted_moments.csv")).unwrap();
    assert_eq!(fitted.iter().map(|g| g.0.as_str()).collect::<Vec<_>>(), ["mean", "std", "skewness", "excess_kurtosis"]);
    assert_eq!(read(&ingest, "ensemble.csv").lines().count(), 2 + 20 * 40);

    // the same map read back from disk gives the same ensemble
    let again = tmp.path().join("again");
    let pgm = ingest.join("map.pgm");
    assert_eq!(fsuq(&["ingest", "--map", pgm.to_str().unwrap(), "--out", again.to_str().unwrap()]), 0);
    assert_eq!(read(&ingest, "ensemble.csv"), read(&again, "ensemble.csv"));

    // fitted moments of a small map may leave the beta-feasible region;
    // either the run succeeds or every offending point is listed
    let run = tmp.path().join("run");
    let moments = ingest.join("fitted_moments.json");
    let code = fsuq(&[
        "example2", "--moments", moments.to_str().unwrap(), "--ms", "50", "--mf", "11", "--out", run.to_str().unwrap(),
    ]);
    match code {
        0 => assert!(run.join("q6_membership.csv").exists()),
        EXIT_NUMERICAL => assert!(read(&run, "infeasible.csv").lines().count() > 2),
        other => panic!("unexpected exit code {other}"),
    }
}

#[test]
fn example2_infeasible_moments_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let fitted: Vec<fsuq::data::FittedMembership> = [0.13, 0.02, 1.0]
        .iter()
        .map(|&c| FuzzyVariable::crisp(c).unwrap())
        .chain([FuzzyVariable::triangular(-2.0, 0.0, 0.5).unwrap()])
        .map(|variable| fsuq::data::FittedMembership { variable, bin_edges: vec![], counts: vec![], residuals: [0.0; 2] })
        .collect();
    let path = tmp.path().join("m.json");
    fs::write(&path, serde_json::to_string(&fitted).unwrap()).unwrap();
    let out = tmp.path().join("o");
    let code = fsuq(&["example2", "--moments", path.to_str().unwrap(), "--ms", "20", "--mf", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_NUMERICAL);
    let table = read(&out, "infeasible.csv");
    assert!(table.starts_with("# fsuq infeasible v1\n"));
    assert!(table.lines().count() > 2);
}

#[test]
fn example2_small_run_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir: &Path, workers: &'static str| {
        vec![
            "example2".to_string(), "--ms".into(), "60".into(), "--mf".into(), "21".into(), "--ucr".into(),
            "6.9e-5,7.2e-5".into(), "--workers".into(), workers.into(), "--out".into(), dir.to_str().unwrap().into(),
        ]
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, w) in [(&a, "1"), (&b, "2")] {
        let v = args(dir, w);
        assert_eq!(fsuq(&v.iter().map(String::as_str).collect::<Vec<_>>()), 0);
    }
    for name in ["q4_field.csv", "q5_pbox.csv", "q6_membership.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    let q6 = split_cut_table(&read(&a, "q6_membership.csv")).unwrap();
    assert_eq!(q6.len(), 2);
    for (_, v) in &q6 {
        assert!(v.validate().is_empty());
        assert!(v.cuts().iter().all(|c| c.lo() >= 0.0 && c.hi() <= 1.0));
    }
    assert!(PBoxFamily::from_csv(&read(&a, "q5_pbox.csv")).unwrap().validate().is_empty());
}
