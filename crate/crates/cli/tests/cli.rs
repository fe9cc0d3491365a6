use std::path::Path;
use std::process::{Command, Output};

fn nondiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nondiv")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn torus_build_emits_spec() {
    let o = nondiv(&["torus", "build", "--factors", "(x-1)(x-2),(x^2-2)"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["l0"], 2);
    assert_eq!(v["fields"].as_array().unwrap().len(), 1);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["torus", "build", "--factors", "(x-1)(x-1)"][..],
        &["torus", "build", "--factors", "(x-1)(x^2-2)"][..],
        &["count", "run", "--poly", "2,1", "--radii", "4"][..],
        &["polytope", "ratio", "--family", "nope"][..],
        &["equidist", "run", "--indices", "10"][..],
        &["graph", "analyze", "--family", "sl3-u", "--samples", "1,2"][..],
        &["--config", "/nonexistent/exp.toml"][..],
        &[][..],
    ] {
        let o = nondiv(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn budget_overrun_is_a_numerical_failure() {
    let o = nondiv(&["count", "run", "--poly", "1,-6,11,-6", "--radii", "6", "--budget", "10"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn check_gates() {
    let pass = nondiv(&["count", "run", "--poly", "1,0,-2", "--radii", "geom:32:2:6", "--check"]);
    assert_eq!(code(&pass), 0, "{}", String::from_utf8_lossy(&pass.stderr));
    // the x₁₂-only family has a disconnected graph: no UDS weights
    let fail = nondiv(&["graph", "analyze", "--family", "sl3-x12", "--check"]);
    assert_eq!(code(&fail), 4);
    let v: serde_json::Value = serde_json::from_str(&stdout(&fail)).unwrap();
    assert_eq!(v["connected"], false);
    assert!(v["weights"].is_null());
    assert!(v["centralizing_direction"].is_array());
    let ex = nondiv(&["examples", "verify", "ex1", "--check"]);
    assert_eq!(code(&ex), 0, "{}", String::from_utf8_lossy(&ex.stderr));
}

#[test]
fn ratio_csv_columns() {
    let o = nondiv(&["polytope", "ratio", "--family", "sl3-u", "--indices", "1e3,1e4"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,vol,vol_shrunk,ratio,cheb_radius"));
    assert_eq!(lines.count(), 2);
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("exp.toml");
    std::fs::write(
        &toml,
        "command = \"equidist run\"\nseed = 11\nout = \"a.csv\"\n\n[args]\nfamily = \"ex1\"\nindices = [10, 1000]\nsamples = 2000\n",
    )
    .unwrap();
    let json = dir.path().join("exp.json");
    std::fs::write(
        &json,
        r#"{"command": "equidist run", "seed": 11, "out": "b.csv",
            "args": {"family": "ex1", "indices": [10, 1000], "samples": 2000}}"#,
    )
    .unwrap();
    assert_eq!(code(&nondiv(&["--config", toml.to_str().unwrap()])), 0);
    assert_eq!(code(&nondiv(&["--config", json.to_str().unwrap()])), 0);
    let a = read(&dir.path().join("a.csv"));
    assert_eq!(a, read(&dir.path().join("b.csv")));
    assert_eq!(a.lines().count(), 3);

    // worker count does not change results; command-line globals override the file
    let c = dir.path().join("c.csv");
    let o = nondiv(&["--config", toml.to_str().unwrap(), "--workers", "1", "--out", c.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(a, read(&c));

    let other = nondiv(&["equidist", "run", "--indices", "10,1000", "--samples", "2000", "--seed", "12"]);
    assert_ne!(a, stdout(&other));
}

#[test]
fn bad_config_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "command = \"count run\"\n[args]\npoly = \"1,0,-2\"\nradiuses = [4]\n").unwrap();
    let o = nondiv(&["--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml"));
}

#[test]
fn torus_file_feeds_polytope_volume() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let o = nondiv(&["torus", "build", "--factors", "(x-1)(x-2)(x-3)", "--out", t.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = nondiv(&["polytope", "volume", "--torus", t.to_str().unwrap(), "--matrix", "1,5,25;0,1,5;0,0,1", "--eps", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim"], 2);
    assert!(v["stats"]["volume"]["value"].as_f64().unwrap() > 0.0);
}
