//! End-to-end runs of the `ccfp` binary.

use std::path::Path;
use std::process::{Command, Output};

use ccfp::cli::{read_csv, ConvergenceRow};
use ccfp::timeloop::RunReport;

fn ccfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccfp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn load_report(path: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_problem_exits_2_and_lists_ids() {
    let o = ccfp(&["run", "--problem", "heat_eq"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for id in ["stationary_ou", "ou_manufactured", "mohammadi_ou", "nonlinear_bimodal"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(ccfp(&["run", "--problem", "ou_manufactured", "--scheme", "rk4"]).status.code(), Some(2));
    assert_eq!(ccfp(&["run", "--problem", "ou_manufactured", "--cells", "80"]).status.code(), Some(2));
    assert_eq!(ccfp(&["run", "--problem", "ou_manufactured", "--tau", "0.3"]).status.code(), Some(2));
    assert_eq!(ccfp(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn list_problems() {
    let o = ccfp(&["list-problems"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn stationary_run_summary_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ccfp(&["run", "--problem", "stationary_ou", "--cells", "81", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    for key in ["N=81", "l1_paper=", "l2_paper=", "tg_max=", "seconds="] {
        assert!(line.contains(key), "{line}");
    }
    let report = load_report(&dir.path().join("report.json"));
    assert_eq!(report.n_cells, 81);
    assert!(report.cycles_per_step[0] <= 12);
    assert!(report.final_error.unwrap().linf <= 1e-6);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for key in ["scheme", "tau", "steps", "snapshots", "cycles_per_step", "mass_history", "min_value_history", "error_norms", "wall_time"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn nonlinear_run_writes_six_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccfp(&["run", "--problem", "nonlinear_bimodal", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for t in ["0.5", "1", "3", "5", "15", "30"] {
        let text = std::fs::read_to_string(dir.path().join(format!("snapshot_t{t}.dat"))).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 81);
        let peak = rows.iter().fold(0.0_f64, |m, r| m.max(r[1]));
        assert!(rows.iter().all(|r| r.len() == 2 && r[1] >= -1e-14 * peak));
        let mass: f64 = rows.iter().map(|r| r[1]).sum::<f64>() * 12.0 / 81.0;
        assert!((mass - 1.0).abs() < 1e-9, "t={t}: mass {mass}");
    }
}

#[test]
fn convergence_rejects_non_factor_three() {
    let o = ccfp(&["convergence", "--problem", "ou_manufactured", "--cells", "81,100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("factor of three"));
}

#[test]
fn convergence_csv_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccfp(&[
        "convergence", "--problem", "ou_manufactured", "--scheme", "bdf1", "--cells", "27,81,243",
        "--parallel", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fitted order"));
    let header = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "n_cells,n_steps,l1_paper,l2_paper,order_est,tg_cycles_max,wall_seconds"
    );
    let rows: Vec<ConvergenceRow> = read_csv(&dir.path().join("convergence.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let r = load_report(&dir.path().join(format!("report_n{}.json", row.n_cells)));
        let norms = r.error_norms.unwrap();
        assert_eq!(row.n_steps, r.steps);
        assert_eq!(row.l1_paper, norms.l1_paper);
        assert_eq!(row.l2_paper, norms.l2_paper);
        assert_eq!(row.tg_cycles_max, r.max_cycles());
        assert_eq!(row.wall_seconds, r.wall_time);
    }
    assert!(rows[0].order_est.is_none() && rows[1].order_est.is_some());
}

#[test]
fn mohammadi_bdf2_order_at_least_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccfp(&[
        "convergence", "--problem", "mohammadi_ou", "--scheme", "bdf2", "--cells", "81,243",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("convergence.csv")).unwrap();
    assert!(rows[1].order_est.unwrap() >= 2.0);
}

fn strip_wall_time(mut r: RunReport) -> RunReport {
    r.wall_time = 0.0;
    r
}

#[test]
fn identical_configs_give_identical_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = ccfp(&[
            "run", "--problem", "mohammadi_ou", "--scheme", "bdf2", "--cells", "81",
            "--snapshots", "0.25,0.5", "--out", dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let ra = strip_wall_time(load_report(&a.path().join("report.json")));
    let rb = strip_wall_time(load_report(&b.path().join("report.json")));
    assert_eq!(ra, rb);
    for name in ["snapshot_t0.25.dat", "snapshot_t0.5.dat", "snapshot_t1.dat"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "problem = \"mohammadi_ou\"\ncells = [27]\nscheme = \"bdf2\"\ntau = 0.05\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = ccfp(&["run", "--config", cfg.to_str().unwrap(), "--scheme", "bdf1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = load_report(&out.join("report.json"));
    assert_eq!(r.n_cells, 27);
    assert_eq!(r.tau, 0.05);
    assert_eq!(r.scheme.to_string(), "bdf1");
}
