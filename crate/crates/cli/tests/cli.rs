use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fujita-lab"))
        .args(args)
        .env_remove("FUJITA_LAB_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config_file(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("fujita-lab-{}-{name}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn exponent_summary() {
    let o = lab(&["exponent", "--n", "3", "--omega", "0", "--m", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("p* = 1.666667"), "{}", stdout(&o));
}

#[test]
fn negative_lists_parse() {
    let o = lab(&["exponent", "--n", "3", "--omega", "-0.25,-1", "--format", "json", "--output", "/dev/null"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("p* = 1.800000") && out.contains("p* = inf"), "{out}");
}

#[test]
fn classify_and_simulate_agree_below_critical() {
    let args = ["--n", "3", "--omega", "-0.25", "--m", "0", "--p", "1.5"];
    let o = lab(&[&["classify"], &args[..]].concat());
    assert!(o.status.success());
    assert!(stdout(&o).contains("NoGlobal (theory), p* = 1.800000"), "{}", stdout(&o));
    let o = lab(&[&["simulate", "--amplitude", "1", "--output", "/dev/null"], &args[..]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("simulation: BlowUp at t = "), "{}", stdout(&o));
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let path = config_file("unknown", "{\n  \"mode\": \"exponent\",\n  \"colour\": 2\n}");
    let o = lab(&["--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");
}

#[test]
fn invalid_p_exits_with_two() {
    let o = lab(&["classify", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = lab(&[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_with_warning() {
    let path = config_file("override", r#"{"mode": "classify", "n": 3, "omega": 0, "p": 1.5}"#);
    let o = lab(&["--config", path.to_str().unwrap(), "--p", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("p = 2: GlobalPossible"), "{}", stdout(&o));
    assert!(stderr(&o).contains("--p = [2.0] overrides config value [1.5]"), "{}", stderr(&o));
}

#[test]
fn empty_config_uses_defaults() {
    let path = config_file("empty", "{}");
    let o = lab(&["exponent", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("n = 3, omega = 0, m = 0: "), "{}", stdout(&o));
}

#[test]
fn theory_sweep_writes_csv() {
    let o = lab(&["sweep", "--theory-only", "true", "--n", "3", "--omega", "0", "--p", "1.2:3.0:0.2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(fujita_lab::sweep::SWEEP_COLUMNS));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[2].starts_with("3,0,0,1.6,"), "{}", rows[2]);
    assert!(stderr(&o).contains("10 points, 0 failed"));
}

#[test]
fn threads_env_overrides_parallelism() {
    let o = Command::new(env!("CARGO_BIN_EXE_fujita-lab"))
        .args(["sweep", "--theory-only", "true", "--parallelism", "2"])
        .env("FUJITA_LAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_reports_infeasible_and_certified() {
    let o = lab(&["certify", "--n", "3", "--omega", "3", "--m", "0", "--p", "1.4,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("p = 1.4: infeasible"), "{out}");
    assert!(out.contains("p = 2: certified (gamma = 2.227"), "{out}");
}
