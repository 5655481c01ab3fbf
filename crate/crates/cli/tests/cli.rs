//! End-to-end tests of the `sis` binary: report contents, exit codes and
//! byte-reproducibility of file outputs.

use std::path::Path;
use std::process::{Command, Output};

fn sis(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sis"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn write_worked_model(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("worked.json");
    std::fs::write(
        &path,
        r#"{
            "n": 2,
            "gamma": [1.0, 1.0],
            "A": [[0, 1], [1, 0]],
            "B": [[[1, 1], [1, 1]], [[1, 1], [1, 1]]],
            "beta1": 0.5,
            "beta2": 1.0
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn classify_reports_disease_free_example() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let out = sis(
        &[
            "classify",
            "--model",
            model.to_str().unwrap(),
            "--beta1",
            "0.1",
            "--beta2",
            "0.05",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("domain: disease-free"), "{text}");
    assert!(text.contains("rho_df: 0.3"), "{text}");
}

#[test]
fn classify_scalar_flags_report_nu_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = sis(
        &["classify", "--gamma", "1", "--beta1", "0.5", "--beta2", "4"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("domain: bistable"), "{text}");
    assert!(text.contains("nu_plus: 0.69519410160"), "{text}");
    assert!(text.contains("nu_minus: 0.17980589839"), "{text}");
}

#[test]
fn malformed_gamma_exits_2_and_names_entry() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "gamma": [-1.0, 1.0], "A": [[0, 1], [1, 0]], "beta1": 0.5, "beta2": 1.0}"#,
    )
    .unwrap();
    let out = sis(&["classify", "--model", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma[1]"), "{err}");
}

#[test]
fn equilibrium_bistable_with_monotone_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let trace = dir.path().join("trace.csv");
    let out = sis(
        &[
            "equilibrium",
            "--model",
            model.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("converged: true"), "{text}");
    assert!(text.contains("stability: exponentially-stable"), "{text}");
    // Both entries of x* sit at or above one half.
    let xline = text.lines().find(|l| l.starts_with("xstar:")).unwrap();
    for v in xline.trim_start_matches("xstar:").split(',') {
        assert!(v.trim().parse::<f64>().unwrap() >= 0.5);
    }
    // Trace: step column is nonincreasing with final value below tolerance.
    let csv = std::fs::read_to_string(&trace).unwrap();
    let steps: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .collect();
    assert!(!steps.is_empty());
    for w in steps.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "steps must shrink: {w:?}");
    }
    assert!(*steps.last().unwrap() <= 1e-12);
}

#[test]
fn equilibrium_in_disease_free_domain_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let out = sis(
        &[
            "equilibrium",
            "--model",
            model.to_str().unwrap(),
            "--beta1",
            "0.1",
            "--beta2",
            "0.05",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_zeros_stays_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let out = sis(
        &[
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--x0",
            "zeros",
            "--t-end",
            "1",
            "--stride",
            "10",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let mut cells = line.split(',');
        cells.next(); // time
        for v in cells {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn simulate_disease_free_extinguishes_with_monotone_monitor() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let traj = dir.path().join("traj.csv");
    let out = sis(
        &[
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--beta1",
            "0.1",
            "--beta2",
            "0.05",
            "--x0",
            "ones",
            "--t-end",
            "200",
            "--stride",
            "100",
            "--monitor",
            "lyapunov",
            "--out",
            traj.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert!(csv.starts_with("t,x1,x2,V\n"));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let v: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    for w in v.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
    }
    let last = rows.last().unwrap();
    assert!(last[1].max(last[2]) < 1e-6);
}

#[test]
fn gen_is_seed_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let m1 = dir.path().join("a.json");
    let m2 = dir.path().join("b.json");
    for path in [&m1, &m2] {
        let out = sis(
            &[
                "gen",
                "--n",
                "5",
                "--seed",
                "42",
                "--density",
                "0.4",
                "--out",
                path.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let b1 = std::fs::read(&m1).unwrap();
    let b2 = std::fs::read(&m2).unwrap();
    assert_eq!(b1, b2, "identical seeds give identical files");
    // The generated model file loads and classifies.
    let out = sis(&["classify", "--model", m1.to_str().unwrap()], dir.path());
    assert!(out.status.success());
}

#[test]
fn gen_rejects_tiny_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = sis(
        &["gen", "--n", "1", "--seed", "1", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_workers_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let csv1 = dir.path().join("d1.csv");
    let csv8 = dir.path().join("d8.csv");
    for (csv, workers) in [(&csv1, "1"), (&csv8, "8")] {
        let out = sis(
            &[
                "sweep",
                "--model",
                model.to_str().unwrap(),
                "--grid",
                "0:1.6:10,0:1.5:10",
                "--mode",
                "theory",
                "--workers",
                workers,
                "--out",
                csv.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&csv1).unwrap(), std::fs::read(&csv8).unwrap());
}

#[test]
fn sweep_theory_grid_matches_worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let csv = dir.path().join("d.csv");
    let svg = dir.path().join("d.svg");
    let out = sis(
        &[
            "sweep",
            "--model",
            model.to_str().unwrap(),
            "--grid",
            "0.1:0.5:2,0.05:1:2",
            "--mode",
            "theory",
            "--out",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    // Corners of the little grid hit the worked disease-free and bistable
    // examples.
    assert!(text.contains("0.1,0.05,disease-free"), "{text}");
    assert!(text.contains("0.5,1,bistable"), "{text}");
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn domain_escape_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_worked_model(dir.path());
    let out = sis(
        &[
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--x0",
            "ones",
            "--dt",
            "20",
            "--t-end",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn empirical_sweep_without_higher_order_has_no_bistable_cells() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classical.json");
    std::fs::write(
        &path,
        r#"{
            "n": 2,
            "gamma": [1.0, 1.0],
            "A": [[0, 1], [1, 0]],
            "B": ["zero", "zero"],
            "beta1": 0.5,
            "beta2": 1.0
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("d.csv");
    let out = sis(
        &[
            "sweep",
            "--model",
            path.to_str().unwrap(),
            "--grid",
            "0.2:1.8:3,0:1:3",
            "--mode",
            "empirical",
            "--t-end",
            "150",
            "--out",
            csv.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    for line in text.lines().skip(1).take_while(|l| !l.starts_with('#')) {
        let verdict = line.split(',').nth(3).unwrap();
        assert_ne!(verdict, "bistable", "{line}");
    }
}

#[test]
fn higher_order_model_file_classifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("higher.json");
    std::fs::write(
        &path,
        r#"{
            "n": 4,
            "gamma": [1, 1, 1, 1],
            "A": [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]],
            "beta1": 0.5,
            "orders": [{"k": 3, "beta": 6.0, "hyperedges": [
                [1, [2, 3, 4], 1.0],
                [2, [3, 4, 1], 1.0],
                [3, [4, 1, 2], 1.0],
                [4, [1, 2, 3], 1.0]
            ]}]
        }"#,
    )
    .unwrap();
    let out = sis(&["classify", "--model", path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("model: higher-order"), "{text}");
    assert!(text.contains("domain: bistable"), "{text}");
}
