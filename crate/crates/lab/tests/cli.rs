use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jmgt-lab"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn zero_horizon_simulation_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["simulate", "--t-end", "0", "--out-dir", path(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "t,E0,E1,E,calE,frakE,h0tau,h1tau,h2tau");
    for f in ["manifest.txt", "energy.gp", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["sweep-tau", "--set", "tau_grid.count=4", "--t-end", "2", "--out-dir"];
    for (dir, threads) in [(&a, "0"), (&b, "0"), (&c, "1")] {
        let mut v: Vec<&str> = args.to_vec();
        v.push(path(dir.path()));
        let out = lab(&v, &[("JMGT_LAB_THREADS", threads)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("sweep_tau.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
    let text = String::from_utf8(read(&a)).unwrap();
    assert!(text.starts_with("tau,sup_err_sq,uttt_integral,omega,r_squared,flag\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn manifest_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let out = lab(&["simulate", "--tau", "0.03", "--set", "init.profile=bump", "--out-dir", path(first.path())], &[]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = first.path().join("manifest.txt");
    let out = lab(&["simulate", "--config", path(&manifest), "--out-dir", path(second.path())], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(first.path().join("energy.csv")).unwrap();
    let b = std::fs::read(second.path().join("energy.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "# sweep\ntau_grid.count = -1\n").unwrap();
    let out = lab(&["sweep-tau", "--config", path(&cfg), "--out-dir", path(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tau_grid.count") && err.contains("line 2"), "{err}");

    std::fs::write(&cfg, "speed = 3\n").unwrap();
    let out = lab(&["simulate", "--config", path(&cfg)], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}

#[test]
fn flag_overrides_file_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "dt = 1e-2\nt_end = 0.5\nstride = 1\n").unwrap();
    let out = lab(&["simulate", "--config", path(&cfg), "--dt", "1e-3", "--out-dir", path(dir.path())], &[]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "dt = 0.001"), "{manifest}");
    let rows = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap().lines().count();
    assert_eq!(rows, 502);
}

#[test]
fn blow_up_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        &["simulate", "--set", "init.amplitude=3", "--set", "blowup_ceiling=50", "--out-dir", path(dir.path())],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("# exit_status = 2"));
}

#[test]
fn experiment_commands_produce_their_tables() {
    let cases: [(&str, &[&str], &str); 4] = [
        ("mms", &[], "mms.csv"),
        ("picard", &["--t-end", "1"], "picard.csv"),
        ("threshold", &["--set", "threshold.rel_tol=0.2", "--set", "decay.t_end=20"], "threshold.csv"),
        ("sweep-decay", &["--set", "tau_grid.count=3"], "sweep_decay.csv"),
    ];
    for (cmd, extra, file) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec![cmd];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out-dir", path(dir.path())]);
        let out = lab(&args, &[]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(file).exists(), "{cmd}");
        assert!(dir.path().join("summary.txt").exists());
    }
}
