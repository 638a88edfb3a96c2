use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn supsob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supsob"))
        .args(args)
        .output()
        .expect("spawn supsob")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn invalid_dimension_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = supsob(&[
        "--n",
        "4",
        "--m",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
        "constants",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["error"]["module"], "cli");
    assert_eq!(v["error"]["operation"], "parse_config");
    assert!(v["error"]["diagnostic"]
        .as_str()
        .unwrap()
        .contains("n > 2m required"));
}

#[test]
fn unknown_config_keys_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n = 6\nzeta = 1\nalpah = 2.0\n").unwrap();
    let o = supsob(&["--config", cfg.to_str().unwrap(), "constants"]);
    assert_eq!(o.status.code(), Some(2));
    let d = json(&o)["error"]["diagnostic"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(d.contains("alpah") && d.contains("zeta"), "{d}");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n = 6\nm = 2\nalpha = 2.0\n").unwrap();
    let out = dir.path().join("out");
    let o = supsob(&[
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "7",
        "--out",
        out.to_str().unwrap(),
        "constants",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["config"]["params"]["n"], 7);
    assert_eq!(
        v["config"]["params"]["alpha"].to_string(),
        "2.0000000000000000e+0"
    );
    assert_eq!(fs::read(out.join("constants.json")).unwrap(), o.stdout);
}

#[test]
fn hardy_check_writes_ratio_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = supsob(&[
        "--nodes", "128", "--trials", "5", "--out", out, "check", "hardy",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&o)["pass"], true);
    let csv_file = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .expect("csv written");
    let text = fs::read_to_string(csv_file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("suite,seed,lhs,rhs,ratio,constant"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn thread_cap_must_be_positive() {
    let o = Command::new(env!("CARGO_BIN_EXE_supsob"))
        .env("SUPSOB_THREADS", "0")
        .arg("constants")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
