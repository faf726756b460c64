//! Command-line behavior: exit codes, output files, config plumbing.

use std::path::Path;

use daesim::cli::run_cli;
use daesim::io::csv::read_trajectory_csv;
use tempfile::tempdir;

fn run(args: &[&str]) -> i32 {
    run_cli(std::iter::once("daesim").chain(args.iter().copied()))
}

#[test]
fn run_scalar_writes_outputs_and_exits_zero() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(
        &cfg,
        "model = scalar\nmodel.scalar.a = -2.0\nmodel.scalar.b = 1.0\n\
         model.scalar.c = 1.0\nmodel.scalar.x0 = 1.0\nt_end = 1.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let code = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for name in ["trajectory.csv", "steps.csv", "metrics.txt"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let traj = read_trajectory_csv(&out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.labels[0], "time");
    let t_last = traj.last_row().unwrap()[0];
    assert!((t_last - 1.0).abs() < 1e-12, "t_final {t_last}");
    let metrics = std::fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.contains("nonlinear_calls="));
    assert!(metrics.contains("diverged=0"));
}

#[test]
fn run_fixed_step_exits_zero() {
    let dir = tempdir().unwrap();
    let code = run(&[
        "run",
        "--solver",
        "pc-predict",
        "--t-end",
        "0.5",
        "--fixed-step",
        "1e-3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn unknown_solver_is_config_error() {
    let dir = tempdir().unwrap();
    let code = run(&[
        "run",
        "--solver",
        "rk4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_config_key_is_config_error() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "solvr = itm\n").unwrap();
    let code = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_case_is_config_error() {
    let dir = tempdir().unwrap();
    let case = dir.path().join("broken.case");
    std::fs::write(&case, "[bus]\n1 slack 1.0\n").unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(
        &cfg,
        format!("model = case\nmodel.case_path = {}\n", case.display()),
    )
    .unwrap();
    let code = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn missing_input_file_is_io_error() {
    let code = run(&["compare", "/nonexistent/ref.csv", "/nonexistent/cand.csv"]);
    assert_eq!(code, 3);
}

#[test]
fn compare_trajectory_with_itself_is_exact() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(
        &cfg,
        "model = scalar\nmodel.scalar.a = -2.0\nt_end = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]),
        0
    );
    let traj = out.join("trajectory.csv");
    assert_eq!(run(&["compare", traj.to_str().unwrap(), traj.to_str().unwrap()]), 0);
}

#[test]
fn converge_study_exits_zero() {
    assert_eq!(run(&["converge", "--target", "extrapolate-estimate"]), 0);
    assert_eq!(run(&["converge", "--target", "itm"]), 0);
}

#[test]
fn converge_rejects_bad_step_list() {
    assert_eq!(run(&["converge", "--h-list", "0.01,oops"]), 2);
}

#[test]
fn bench_runs_all_schemes_on_scalar_model() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(
        &cfg,
        "model = scalar\nmodel.scalar.a = -2.0\nt_end = 1.0\ncheck.epsilon = 1e-4\n",
    )
    .unwrap();
    let out = dir.path().join("bench");
    let code = run(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for solver in ["itm", "pc-hold", "pc-predict"] {
        assert!(
            out.join(solver).join("trajectory.csv").is_file(),
            "missing bench output for {solver}"
        );
    }
}

#[test]
fn run_on_bundled_three_machine_case_succeeds() {
    let dir = tempdir().unwrap();
    let case_src = Path::new(env!("CARGO_MANIFEST_DIR")).join("cases/three_machine.case");
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(
        &cfg,
        format!(
            "model = case\nmodel.case_path = {}\nsolver = pc-predict\nt_end = 1.0\n",
            case_src.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let code = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let traj = read_trajectory_csv(&out.join("trajectory.csv")).unwrap();
    // three machines (delta, omega each) and six buses (two coordinates each)
    assert_eq!(traj.labels.len(), 2 + 6 + 12);
}

#[test]
fn help_exits_zero_and_bad_flag_exits_two() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["run", "--no-such-flag"]), 2);
}
