use std::process::{Command, Output};

const SCALAR_PAIR: &str = r#"{"S":{"rows":1,"cols":1,"data":[[1,0]]},"P":{"rows":1,"cols":1,"data":[[0.25,0]]}}"#;
const ROYAL: &str = r#"{"terms":[{"i":0,"j":1,"re":4},{"i":2,"j":0,"re":-1}]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbidisc"))
        .args(args)
        .env_remove("SYMBIDISC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fundamental_json() {
    let o = run(&["fundamental", "--pair", SCALAR_PAIR, "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = v["results"]["numerical_radius"].as_f64().unwrap();
    assert!((w - 0.8).abs() < 1e-12, "{w}");
    assert_eq!(v["config"]["grid"], 512);
}

#[test]
fn exit_codes() {
    // parse error and clap usage error
    assert_eq!(run(&["fundamental", "--pair", "{oops"]).status.code(), Some(2));
    assert_eq!(run(&["fundamental"]).status.code(), Some(2));
    assert_eq!(run(&["paper-examples", "ex-0"]).status.code(), Some(2));
    assert_eq!(run(&["classify-poly", "--poly", ROYAL, "--format", "csv", "--region", "torus"]).status.code(), Some(2));
    // not a Γ-contraction
    let big = r#"{"S":{"rows":1,"cols":1,"data":[[0,0]]},"P":{"rows":1,"cols":1,"data":[[2,0]]}}"#;
    assert_eq!(run(&["fundamental", "--pair", big]).status.code(), Some(1));
    // csv without a sample table
    assert_eq!(run(&["fundamental", "--pair", SCALAR_PAIR, "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn csv_samples() {
    let o = run(&["classify-poly", "--poly", ROYAL, "--format", "csv", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("re_s,im_s,re_p,im_p"));
    assert!(out.lines().count() > 32);
    let o = run(&["classify-poly", "--poly", ROYAL, "--format", "csv", "--grid", "64", "--region", "bidisc"]);
    assert_eq!(stdout(&o).lines().next(), Some("re_z1,im_z1,re_z2,im_z2"));
}

#[test]
fn seed_from_environment_is_deterministic() {
    let pair = r#"{"S":{"rows":2,"cols":2,"data":[[0.5,0],[0,0],[0,0],[-0.5,0]]},"P":{"rows":2,"cols":2,"data":[[0.1,0],[0,0],[0,0],[0.2,0]]}}"#;
    let go = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_symbidisc"))
            .args(["complete-vn-check", "--pair", pair, "--variety", ROYAL, "--trials", "5", "--grid", "64", "--json"])
            .env("SYMBIDISC_SEED", seed)
            .output()
            .unwrap()
    };
    let (a, b) = (go("7"), go("7"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    // the flag wins over the environment
    let flagged = run(&["complete-vn-check", "--pair", pair, "--variety", ROYAL, "--trials", "5", "--grid", "64", "--json", "--seed", "7"]);
    assert_eq!(flagged.stdout, a.stdout);
}

#[test]
fn examples_pass_and_write_to_file() {
    let path = std::env::temp_dir().join(format!("symbidisc-cli-{}.txt", std::process::id()));
    let o = run(&["paper-examples", "--grid", "256", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.contains("failed: 0"), "{text}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn unmet_hypothesis_exits_one() {
    // z1 − 1 does not annihilate the Γ-unitary (2, 1)
    let pair = r#"{"S":{"rows":1,"cols":1,"data":[[2,0]]},"P":{"rows":1,"cols":1,"data":[[1,0]]}}"#;
    let g = r#"{"terms":[{"i":1,"j":0,"re":1},{"i":0,"j":0,"re":-1}]}"#;
    let o = run(&["decompose", "--pair", pair, "--factors", g]);
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis not met"));
}
