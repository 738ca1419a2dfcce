use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ddchain(verb: &str, config: &str, out: &Path) -> Output {
    let dir = out.parent().unwrap();
    let cfg = dir.join(format!("{}.cfg", out.file_name().unwrap().to_string_lossy()));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ddchain"))
        .args([verb, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const HEISENBERG4: &str = "l = 4\ncoupling = heisenberg\nepsilon = -0.3\n";

#[test]
fn derive_second_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("derive");
    let o = ddchain(
        "derive",
        &format!("kind = derive_sequences\n{HEISENBERG4}order = 2\npattern = xzxzxz\nstarts = 50\n"),
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("solutions.csv")).unwrap();
    assert!(csv.starts_with("solution,pattern,parity,interval,alpha\n"));
    let a3 = (33f64.sqrt() - 3.0) / 16.0;
    let third: f64 = csv.lines().nth(3).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((third - a3).abs() < 1e-12, "{csv}");
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"spec_hash\""));
    assert!(out.join("solution_0.seq").exists());
}

#[test]
fn simulate_free_decay_reports_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("echo");
    let cfg = "kind = echo_curve\nl = 8\ncoupling = ising\nepsilon = -0.15\n\
               sequence = free\nperiod = 0.2\npropagator = trotter\ndt = 0.005\nsample_every = 0.01\n";
    let o = ddchain("simulate", cfg, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("alpha_fit"), "{stdout}");
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(
        traj.lines().next().unwrap(),
        "t,L,sigma_z,concurrence,trace_distance,norm_drift"
    );
    assert_eq!(traj.lines().count(), 22);
}

#[test]
fn validation_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown key, reported with its line
    let o = ddchain(
        "simulate",
        &format!("kind = echo_curve\n{HEISENBERG4}colour = red\n"),
        &tmp.path().join("a"),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
    // kind run under the wrong verb
    let o = ddchain(
        "sweep",
        &format!("kind = echo_curve\n{HEISENBERG4}"),
        &tmp.path().join("b"),
    );
    assert_eq!(code(&o), 2);
    // overlapping finite pulses
    let cfg =
        format!("kind = echo_curve\n{HEISENBERG4}sequence = m1_xz\nmode = finite\nfield_tesla = 10\nperiod = 0.5\n");
    let o = ddchain("simulate", &cfg, &tmp.path().join("c"));
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("overlap"), "{}", stderr(&o));
    // missing config file
    let o = Command::new(env!("CARGO_BIN_EXE_ddchain"))
        .args(["slope", "--config", "/nonexistent/x.cfg", "--out"])
        .arg(tmp.path().join("d"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn failed_tolerance_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cc");
    let cfg = "kind = oracle_cross_check\nl = 4\ncoupling = ising\nepsilon = -0.3\n\
               propagator = trotter\ndt = 0.05\nt_max = 1.0\nsample_every = 0.1\ntolerance = 1e-14\n";
    let o = ddchain("crosscheck", cfg, &out);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL determinant_vs_many_body_L4"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "kind = nop_sweep\n{HEISENBERG4}sequences = free, m1_xz, m2_xzxzxz\nfields = 20, 40\n\
         mode = finite\nperiod = t_c\ncycles = 5\n"
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&ddchain("sweep", &cfg, &a)), 0);
    assert_eq!(code(&ddchain("sweep", &cfg, &b)), 0);
    for f in ["nop.csv", "crossovers.csv", "spec.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let nop = fs::read_to_string(a.join("nop.csv")).unwrap();
    assert_eq!(nop.lines().count(), 7);
}

#[test]
fn slope_first_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("slope");
    let cfg = format!("kind = slope_check\n{HEISENBERG4}sequences = m1_xz\nt_min = 0.001\nt_max = 0.1\npoints = 5\n");
    let o = ddchain("slope", &cfg, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let slopes = fs::read_to_string(out.join("slopes.csv")).unwrap();
    let line = slopes.lines().nth(1).unwrap();
    let slope: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{line}");
}
