use std::path::Path;
use std::process::{Command, Output};

fn regmn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regmn"))
        .args(args)
        .output()
        .expect("running regmn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn oracle_check_passes_in_check_mode() {
    let o = regmn(&["oracle-check", "--check"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.matches("PASS").count(), 3, "{text}");
}

#[test]
fn probe_bounds_reports_no_violations() {
    let o = regmn(&["probe-bounds", "--samples", "20", "--check", "--seed", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("samples=20"), "{text}");
    assert!(text.contains("violations 0"));
}

#[test]
fn static_accuracy_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let o = regmn(&["static-accuracy", "--dg-degree", "2,4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in [2, 4] {
        let csv = std::fs::read_to_string(out.join(format!("static_accuracy_k{k}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("resolution,error,order"));
        assert_eq!(lines.count(), 9);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# probe settings\nsamples = 7\nseed = 1\norder = 2\n").unwrap();
    let path = cfg.to_str().unwrap();

    let o = regmn(&["probe-bounds", "--config", path]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("samples=7"));

    let o = regmn(&["probe-bounds", "--config", path, "--samples", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("samples=4"));
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!regmn(&["oracle-check", "--no-such-flag"]).status.success());
    assert!(!regmn(&["probe-bounds", "--entropy", "nope"]).status.success());
    assert!(!regmn(&["static-accuracy", "--dg-degree", "2,x"]).status.success());
    let missing = regmn(&["oracle-check", "--config", "/nonexistent/regmn.cfg"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!Path::new("/nonexistent/regmn.cfg").exists());
}

#[test]
fn failed_check_exits_with_two() {
    // k = 4 on the finest rows is outside the reference band
    let o = regmn(&["static-accuracy", "--dg-degree", "4", "--check"]);
    assert_eq!(o.status.code(), Some(2));
}
