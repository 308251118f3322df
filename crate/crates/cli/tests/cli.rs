use std::path::Path;
use std::process::Command;

const SETTING: &str =
    r#"{"n": 1, "alpha": "1/2", "delta": "3/10", "m": 1, "r": "4", "delta_tilde": "1/5"}"#;

fn run(dir: &Path, sub: &str, config: &str) -> (i32, String) {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args([sub, "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("WEIGHTLAB_THREADS")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn region_map_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(
        dir.path(),
        "region-map",
        &format!(r#"{{"schema_version": 1, "setting": {SETTING}}}"#),
    );
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("out").read_dir().unwrap().next().is_some());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(
        dir.path(),
        "region-map",
        &format!(r#"{{"schema_version": 1, "setting": {SETTING}, "bogus": 1}}"#),
    );
    assert_eq!(code, 2);
}

#[test]
fn wrong_schema_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(
        dir.path(),
        "region-map",
        &format!(r#"{{"schema_version": 9, "setting": {SETTING}}}"#),
    );
    assert_eq!(code, 2);
}

#[test]
fn invalid_setting_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SETTING.replace(r#""delta": "3/10""#, r#""delta": "2""#);
    let (code, _) = run(
        dir.path(),
        "region-map",
        &format!(r#"{{"schema_version": 1, "setting": {bad}}}"#),
    );
    assert_eq!(code, 2);
}

#[test]
fn check_pair_without_pair_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(
        dir.path(),
        "check-pair",
        &format!(r#"{{"schema_version": 1, "setting": {SETTING}}}"#),
    );
    assert_eq!(code, 2);
    assert!(err.contains("pair"), "{err}");
}

#[test]
fn unknown_catalog_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"schema_version": 1, "setting": {SETTING}, "pair": {{"catalog": "no-such-pair"}}}}"#
    );
    assert_eq!(run(dir.path(), "check-pair", &cfg).0, 2);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args(["catalog", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
