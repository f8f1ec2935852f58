use std::process::Command;

use hessclip::harness::{parse_csv, trace_from_table, Table};

fn hessclip(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hessclip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_table(out: &std::process::Output) -> Table {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Table::read_from(out.stdout.as_slice()).unwrap()
}

#[test]
fn run_writes_a_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = hessclip(&[
        "run",
        "--seed",
        "5",
        "--iterations",
        "50",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let trace = trace_from_table(&parse_csv(&path).unwrap()).unwrap();
    assert_eq!(trace.rows.len(), 50);
    assert_eq!(trace.header.seed, 5);
    assert!(trace.header.config_hash.is_some());
}

#[test]
fn run_is_byte_reproducible() {
    let a = hessclip(&[
        "run",
        "--seed",
        "2",
        "--iterations",
        "100",
        "--method",
        "nsgd-hess",
    ]);
    let b = hessclip(&[
        "run",
        "--seed",
        "2",
        "--iterations",
        "100",
        "--method",
        "nsgd-hess",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn compare_and_sweep_accept_seed_counts() {
    let t = stdout_table(&hessclip(&[
        "compare",
        "--experiment",
        "fig2",
        "--seeds",
        "3",
        "--iterations",
        "100",
    ]));
    assert_eq!(t.get_meta("seeds"), Some("3"));
    assert_eq!(t.rows.len(), 100);
    let t = stdout_table(&hessclip(&[
        "sweep",
        "--seeds",
        "3",
        "--seed",
        "10",
        "--iterations",
        "100",
    ]));
    assert_eq!(t.rows.len(), 5);
    assert_eq!(t.column("median_iterations"), Some(5));
}

#[test]
fn config_file_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "experiment = \"run\"\niterations = 30\nseeds = [4]\n[optimizer]\nmethod = \"nsgdm\"\ngamma = 0.02\nalpha = 0.5\n",
    )
    .unwrap();
    let t = stdout_table(&hessclip(&["run", "--config", cfg.to_str().unwrap()]));
    assert_eq!(t.get_meta("method"), Some("nsgdm"));
    assert_eq!(t.get_meta("gamma"), Some("0.02"));
    assert_eq!(t.get_meta("seed"), Some("4"));
    assert_eq!(t.rows.len(), 30);
}

#[test]
fn schedule_prints_resolved_parameters() {
    let t = stdout_table(&hessclip(&[
        "schedule",
        "--p",
        "2",
        "--t",
        "4000",
        "--sigma",
        "1",
        "--epsilon",
        "0.1",
    ]));
    let names: Vec<&str> = t.rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        names,
        [
            "thm2-batch",
            "thm2-exact",
            "thm2-zero",
            "thm3",
            "thm3-shape",
            "clip-nsgdm-baseline"
        ]
    );
    assert_eq!(t.rows[0][5], "100");
    let alpha: f64 = t.rows[3][2].parse().unwrap();
    assert!((alpha - 4000f64.powf(-2.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn hard_instance_grid_and_trace() {
    let t = stdout_table(&hessclip(&[
        "hard-instance",
        "--delta",
        "1,10",
        "--epsilon",
        "0.01",
    ]));
    assert_eq!(t.rows.len(), 4);
    assert!(t.rows.iter().all(|r| r[8] == "ok"));
    let t = stdout_table(&hessclip(&[
        "hard-instance",
        "--trace",
        "nsgd",
        "--horizon",
        "20",
    ]));
    assert_eq!(t.rows.len(), 20);
    assert_eq!(t.columns, ["t", "grad_norm", "prog", "samples_used"]);
}

#[test]
fn violated_preconditions_exit_nonzero() {
    for (args, needle) in [
        (vec!["schedule", "--p", "2.5"], "moment order p"),
        (
            vec!["run", "--config", "/nonexistent/exp.toml"],
            "cannot read config",
        ),
        (vec!["run", "--seeds", "0"], "--seeds"),
        (vec!["run", "--iterations", "0"], "iterations"),
        (vec!["hard-instance", "--trace", "nsgd-hess"], "--sigma-h"),
        (
            vec!["hard-instance", "--trace", "nsgd", "--delta", "0.001"],
            "infeasible",
        ),
    ] {
        let out = hessclip(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}

#[test]
fn config_of_wrong_kind_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig2.toml");
    std::fs::write(&cfg, "experiment = \"fig2\"\n").unwrap();
    let out = hessclip(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not belong"));
}

#[test]
fn unknown_format_is_rejected() {
    let out = hessclip(&["run", "--format", "json"]);
    assert!(!out.status.success());
}
