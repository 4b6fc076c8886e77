use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transmission")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn profile_info_reports_travel_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["profile-info", "--profile", "rational_example", "--json"], dir.path());
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["a"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-10);
    assert_eq!(v["regime"], "a_gt_1");
}

#[test]
fn spectrum_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |stem: &'static str| ["spectrum", "--profile", "rational_example", "--rect", "0,30,0,6", "--out", stem];
    assert_eq!(code(&run(&args("first"), dir.path())), 0);
    assert_eq!(code(&run(&args("second"), dir.path())), 0);
    for ext in [".csv", ".json", "_plot.csv"] {
        let a = std::fs::read(dir.path().join(format!("first{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("second{ext}"))).unwrap();
        assert_eq!(a, b, "{ext} differs");
    }
}

#[test]
fn asymptotics_rejects_spectrum_of_another_regime() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ["spectrum", "--profile", "raised_cosine:-0.5", "--rect", "0,20,0,4", "--out", "low"];
    assert_eq!(code(&run(&spec, dir.path())), 0);
    let out = run(&["asymptotics", "--profile", "rational_example", "--spectrum", "low.json"], dir.path());
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["spectrum", "--profile", "rational_example", "--rect", "5,1,0,1"],
        vec!["spectrum", "--profile", "no_such_profile", "--rect", "0,1,0,1"],
        vec!["asymptotics", "--profile", "rational_example", "--spectrum", "missing.json"],
        vec!["kernel-check"],
    ] {
        let out = run(&args, dir.path());
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn kernel_check_passes_for_vanishing_potential() {
    // η ≡ 1 gives q ≡ 0 and K ≡ 0.
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["kernel-check", "--profile", "const1", "--json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn inverse_check_default_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["inverse-check", "--samples", "10", "--json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}
