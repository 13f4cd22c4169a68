use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarm-mimo"))
}

#[test]
fn run_writes_trace_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let status = bin()
        .args(["run", "--algorithm", "ura", "--seed", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# algorithm = ura\n"));
    assert!(text.contains("# seed = 3\n"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "iteration,icn,objective,sinr_zf_db,sinr_nv_db,sinr_mf_db,mean_traveled_m"
    );
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0,"));
    assert!(rows[2].starts_with("1,"));
}

#[test]
fn run_to_stdout() {
    let out = bin()
        .args(["run", "--algorithm", "ura", "--max-iters", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("# table = trace\n"));
}

#[test]
fn config_file_is_applied_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    fs::write(
        &cfg,
        "# overrides\nalgorithm = bf\nmax_iterations = 2\nsigma_act_m = 0.001\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--max-iters", "3"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# algorithm = bf\n"));
    assert!(text.contains("# max_iterations = 3\n"));
    assert!(text.contains("# sigma_act_m = 0.001\n"));
}

#[test]
fn configuration_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "step = 3\n").unwrap();
    for args in [
        vec!["run", "--alpha", "1.5"],
        vec!["run", "--sigma-loc", "-1"],
        vec!["run", "--algorithm", "sgd"],
        vec!["mc", "--trials", "0"],
        vec!["sweep", "--axis", "sigma_x", "--trials", "1"],
        vec!["sweep", "--values", "0.1,0.01", "--trials", "1"],
        vec!["run", "--config", cfg.to_str().unwrap()],
        vec!["run", "--config", "/nonexistent/file.cfg"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}

#[test]
fn mc_and_sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mc = dir.path().join("mc.csv");
    let status = bin()
        .args([
            "mc",
            "--algorithm",
            "ura",
            "--trials",
            "3",
            "--seed",
            "10",
            "--sigma-loc",
            "0.001",
            "--out",
        ])
        .arg(&mc)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&mc).unwrap();
    assert!(text.contains("# seed_range = 10..13\n"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("ura,sigma_loc,0.001,3,"));

    let sw = dir.path().join("sweep.csv");
    let status = bin()
        .args([
            "sweep",
            "--axis",
            "sigma_act",
            "--values",
            "0,0.001",
            "--algorithms",
            "ura,bf",
        ])
        .args(["--trials", "2", "--max-iters", "3", "--out"])
        .arg(&sw)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&sw).unwrap();
    let algos: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(algos, ["ura", "ura", "bf", "bf"]);

    let svg = dir.path().join("sweep.svg");
    let status = bin()
        .args(["plot"])
        .arg(&sw)
        .args(["--y", "mean_final_sinr_nv_db", "--out"])
        .arg(&svg)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let out = bin()
        .args(["plot"])
        .arg(&sw)
        .args(["--y", "nope", "--out"])
        .arg(&svg)
        .output()
        .unwrap();
    assert!(!out.status.success());
}
