use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/golden").join(name)
}

fn fockfade(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fockfade"));
    cmd.current_dir(dir).args(args).env_remove("FOCKFADE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = fockfade(dir, args, &[]);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn full_operational_sweep_has_one_row_per_loss_and_state() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "sweep", "--setting", "asym", "--squeezing-db", "3", "--chi2", "0.02", "--losses", "5:30:12", "--states",
            "tmsv,pss_s,pss_b,pas_s,pas_b,prs_s,prs_b", "--mode", "ensemble", "--metric", "both", "-o", "fig4",
        ],
    );
    let rows = csv_rows(&dir.path().join("fig4.csv"));
    assert_eq!(rows[0].join(","), "loss_db,state,E_LN,P_c,R_E,trace_deficit");
    assert_eq!(rows.len() - 1, 12 * 7);
    assert!(rows[1..].iter().all(|r| r.len() == 6 && r.iter().all(|f| !f.is_empty())));
    assert_eq!(rows[1][0], "5");
    assert_eq!(rows[84][0], "30");
    let m = read_json(&dir.path().join("fig4.manifest.json"));
    assert_eq!(m["subcommand"], "sweep");
    assert_eq!(m["details"]["rows"].as_array().unwrap().len(), 84);
    assert_eq!(m["details"]["cutoffs"]["f_max"], 10);
}

#[test]
fn config_file_sweep_matches_golden_sample() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(golden("sweep.conf"), dir.path().join("sweep.conf")).unwrap();
    ok(dir.path(), &["--config", "sweep.conf", "sweep", "-o", "sweep"]);
    let got = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(got, std::fs::read_to_string(golden("sweep.csv")).unwrap());

    let mut want = read_json(&golden("sweep.manifest.json"));
    let mut have = read_json(&dir.path().join("sweep.manifest.json"));
    for m in [&mut want, &mut have] {
        let o = m.as_object_mut().unwrap();
        o.remove("wall_clock_s");
        o.remove("threads");
    }
    assert_eq!(have, want);
}

#[test]
fn scalar_commands_match_golden_samples() {
    let dir = tempfile::tempdir().unwrap();
    let info = ok(dir.path(), &["channel-info", "--target-loss-db", "10"]);
    assert_eq!(info.stdout, std::fs::read(golden("channel-info.json")).unwrap());
    let th = ok(dir.path(), &["threshold", "--family", "pss_s", "--squeezing-db", "3", "--loss-db", "10"]);
    assert_eq!(th.stdout, std::fs::read(golden("threshold.json")).unwrap());
}

#[test]
fn rerun_reproduces_results_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["sweep", "--states", "tmsv,pas_b,noon_3", "--losses", "4,9.5,21", "--mode", "measured", "-o", "a"]);
    ok(d, &["rerun", "a.manifest.json", "-o", "b"]);
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());
    let (a, b) = (read_json(&d.join("a.manifest.json")), read_json(&d.join("b.manifest.json")));
    assert_eq!(a["config"], b["config"]);
    assert_eq!(a["sources"], b["sources"]);
    assert_eq!(a["details"], b["details"]);

    ok(d, &["channel-info", "--sigma-b", "0.7", "-o", "c"]);
    ok(d, &["rerun", "c.manifest.json", "-o", "e"]);
    assert_eq!(std::fs::read(d.join("c.json")).unwrap(), std::fs::read(d.join("e.json")).unwrap());
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["sweep", "--states", "tmsv,pss_b,prs_s", "--losses", "5:20:4"];
    for (stem, threads) in [("one", "1"), ("three", "3")] {
        let mut a = args.to_vec();
        a.extend(["-o", stem]);
        let out = fockfade(d, &a, &[("FOCKFADE_THREADS", threads)]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(read_json(&d.join(format!("{stem}.manifest.json")))["threads"], threads.parse::<u64>().unwrap());
    }
    assert_eq!(std::fs::read(d.join("one.csv")).unwrap(), std::fs::read(d.join("three.csv")).unwrap());
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.conf"), "# noise study\nsetting = sym\nchi = 0.4\nlosses = 2,3\n").unwrap();
    ok(d, &["--config", "run.conf", "sweep", "--chi", "0.1", "--states", "tmsv", "-o", "p"]);
    let m = read_json(&d.join("p.manifest.json"));
    assert_eq!(m["config"]["chi"], "0.1");
    assert_eq!(m["sources"]["chi"], "flag");
    assert_eq!(m["config"]["setting"], "sym");
    assert_eq!(m["sources"]["setting"], "file");
    assert_eq!(m["config"]["mode"], "ensemble");
    assert_eq!(m["sources"]["mode"], "default");
    assert_eq!(m["details"]["chi1"], 0.1);
    assert_eq!(m["details"]["chi2"], 0.1);
    assert_eq!(m["config_file"], "run.conf");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.conf"), "colour = red\n").unwrap();
    std::fs::write(d.join("garbled.conf"), "setting sym\n").unwrap();
    let cases: &[&[&str]] = &[
        &["sweep", "--bogus", "1", "-o", "x"],
        &["sweep", "--states", "tmsv"],
        &["sweep", "--losses", "0.5:3:2", "-o", "x"],
        &["sweep", "--losses", "5:3", "-o", "x"],
        &["sweep", "--states", "tmsv,bell", "-o", "x"],
        &["sweep", "--states", "tmsv,tmsv", "-o", "x"],
        &["sweep", "--setting", "sideways", "-o", "x"],
        &["sweep", "--chi", "-1", "-o", "x"],
        &["--config", "bad.conf", "sweep", "-o", "x"],
        &["--config", "garbled.conf", "sweep", "-o", "x"],
        &["--config", "missing.conf", "sweep", "-o", "x"],
        &["channel-info"],
        &["channel-info", "--sigma-b", "1", "--target-loss-db", "10"],
        &["optimize-t", "--family", "tmsv"],
        &["optimize-t", "--family", "pss_s", "--objective", "eln", "--loss-db", "10"],
        &["threshold", "--family", "pss_s", "--loss-db", "0.2"],
        &["rerun", "missing.manifest.json"],
    ];
    for args in cases {
        let out = fockfade(d, args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = fockfade(d, &["channel-info", "--sigma-b", "1"], &[("FOCKFADE_THREADS", "many")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("x.csv").exists());
}

#[test]
fn numerical_failures_exit_with_three_and_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = fockfade(
        dir.path(),
        &["sweep", "--states", "tmsv,pss_s", "--squeezing-db", "12", "--cutoff", "4", "--losses", "5,10", "-o", "x"],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tmsv at 5 dB") && err.contains("truncation"), "{err}");
    assert!(!dir.path().join("x.csv").exists());
    assert!(!dir.path().join("x.manifest.json").exists());
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = fockfade(dir.path(), &["channel-info", "--sigma-b", "1", "-o", "no/such/dir/c"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn channel_info_solves_the_mean_loss() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&ok(dir.path(), &["channel-info", "--target-loss-db", "10"]));
    assert!((v["mean_loss_db"].as_f64().unwrap() - 10.0).abs() < 0.01);
    assert!((v["mean_T"].as_f64().unwrap() - 0.1).abs() < 1e-4);
    for key in ["sigma_b", "eta0", "gamma_s", "L"] {
        assert!(v[key].as_f64().unwrap() > 0.0, "{key}");
    }
    let back = json_of(&ok(dir.path(), &["channel-info", "--sigma-b", &v["sigma_b"].to_string()]));
    assert!((back["mean_loss_db"].as_f64().unwrap() - 10.0).abs() < 0.01);
}

#[test]
fn replacement_rate_is_best_without_a_beam_splitter() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&ok(
        dir.path(),
        &["optimize-t", "--family", "prs_b", "--objective", "rate", "--squeezing-db", "3", "--loss-db", "10"],
    ));
    assert_eq!(v["t"], 1.0);
    assert_eq!(v["degenerate"], false);
}

#[test]
fn subtraction_has_no_memory_threshold_at_ten_db() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&ok(dir.path(), &["threshold", "--family", "pss_s", "--squeezing-db", "3", "--loss-db", "10"]));
    assert!(v["eta_th"].is_null());
    assert!(v["interior_roots"].as_array().unwrap().is_empty());
    let full = v["full_ratio"].as_f64().unwrap();
    assert!(full > 0.0 && full < 1.0);
}

#[test]
fn calibrated_symmetric_sweep_under_heavy_noise() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["sweep", "--setting", "sym", "--calibrate-eln", "1", "--chi", "0.4", "--states", "tmsv,noon_2", "--losses", "1.5,2,3", "-o", "f3"],
    );
    let rows = csv_rows(&d.join("f3.csv"));
    let eln = |i: usize| rows[i][2].parse::<f64>().unwrap();
    // The TMSV loses all entanglement by 2 dB; the NOON state keeps some.
    assert_eq!(rows[3][1], "tmsv");
    assert_eq!(eln(3), 0.0);
    assert!(eln(4) > 0.0);
    let m = read_json(&d.join("f3.manifest.json"));
    for s in m["details"]["states"].as_array().unwrap() {
        assert!((s["initial_eln"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn measured_mode_reports_more_than_ensemble_for_tmsv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = ["sweep", "--chi2", "0", "--squeezing-db", "10", "--states", "tmsv", "--losses", "10,20", "--metric", "eln"];
    for mode in ["measured", "ensemble"] {
        let mut a = base.to_vec();
        a.extend(["--mode", mode, "-o", mode]);
        ok(d, &a);
    }
    let (m, e) = (csv_rows(&d.join("measured.csv")), csv_rows(&d.join("ensemble.csv")));
    for i in 1..3 {
        assert_eq!(m[i][4], "");
        assert!(m[i][2].parse::<f64>().unwrap() > e[i][2].parse::<f64>().unwrap());
    }
}

#[test]
fn compare_bell_reports_a_row_per_squeezing_and_loss() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&ok(dir.path(), &["compare-bell", "--squeezing-db", "3.5,10", "--losses", "5:20:4"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let ratio = r["ratio"].as_f64().unwrap();
        assert!((ratio - r["tmsv_rate"].as_f64().unwrap() / r["bell_rate"].as_f64().unwrap()).abs() < 1e-12);
        assert!(ratio > 1.0);
    }
}

#[test]
fn help_and_version_exit_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fockfade(dir.path(), &["--version"], &[]).status.code(), Some(0));
    assert_eq!(fockfade(dir.path(), &["sweep", "--help"], &[]).status.code(), Some(0));
    assert_eq!(fockfade(dir.path(), &[], &[]).status.code(), Some(2));
}
