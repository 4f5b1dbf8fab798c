use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poissym")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    serde_json::from_str(&ok(&a)).unwrap()
}

#[test]
fn scalar_curvatures() {
    for (g, r) in [("heisenberg", "R = -8"), ("euclidean", "R = 0"), ("sl2tilde", "R = -5/2"), ("sol", "R = -2")] {
        assert!(ok(&["curvature", "--geometry", g]).lines().any(|l| l == r), "{g}");
    }
}

#[test]
fn killing_reports() {
    assert!(ok(&["killing", "--geometry", "sol", "--field", "So1"]).contains("So1: Killing (μ=0)"));
    assert!(ok(&["killing", "--geometry", "euclidean", "--xi", "x,y,z"]).contains("Homothety (μ=2)"));
    let s = ok(&["killing", "--geometry", "euclidean", "--solve"]);
    assert!(s.contains("dimension 10 (6 Killing, 1 homothety, 3 conformal)"), "{s}");
    assert_eq!(code(&["killing", "--geometry", "sol", "--field", "Nope"]), 2);
}

#[test]
fn classify_counts() {
    let crit = json(&["classify", "--geometry", "euclidean", "--class", "critical"]);
    assert_eq!(crit["generators"].as_array().unwrap().len(), 10);
    let routed = json(&["classify", "--geometry", "euclidean", "--class", "power", "--p", "5"]);
    assert_eq!(routed["class"], crit["class"]);
    assert_eq!(routed["generators"].as_array().unwrap().len(), 10);
    let exp = json(&["classify", "--geometry", "hyperbolic3", "--class", "exponential"]);
    assert_eq!(exp["generators"].as_array().unwrap().len(), 6);
    assert_eq!(code(&["classify", "--geometry", "euclidean", "--class", "p2n6"]), 2);
    assert_eq!(code(&["classify", "--geometry", "euclidean", "--class", "power"]), 2);
    assert_eq!(code(&["classify", "--geometry", "euclidean", "--class", "quartic"]), 2);
}

#[test]
fn classify_json_keys() {
    let v = json(&["classify", "--geometry", "sol", "--class", "linear"]);
    for key in ["class", "generators", "xi_dimension", "inconclusive", "inconsistencies"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for row in v["generators"].as_array().unwrap() {
        let mut keys: Vec<&str> = row.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(keys, ["a", "b", "case", "checks", "generator", "mu", "xi"]);
        assert!(row["checks"].as_array().unwrap().iter().all(|c| c["verdict"] == "zero"));
    }
}

#[test]
fn noether_verdicts() {
    let s = ok(&["noether", "--geometry", "euclidean", "--class", "linear", "--a", "1"]);
    assert!(s.contains("ScaledNonNoether"), "{s}");
    let s = ok(&["noether", "--geometry", "euclidean", "--class", "critical", "--xi", "x*y,-x^2/2+y^2/2-z^2/2,y*z", "--a", "-y/2"]);
    assert!(s.contains("Divergence"), "{s}");
    let s = ok(&["noether", "--geometry", "euclidean", "--class", "critical", "--xi", "x,y,z", "--a", "-1/2"]);
    assert!(s.contains("Variational"), "{s}");
    assert_eq!(code(&["noether", "--geometry", "euclidean", "--xi", "x,0,0"]), 4);
    let v = json(&["noether", "--geometry", "heisenberg", "--field", "T"]);
    assert_eq!(v["verdict"], "Variational");
}

#[test]
fn currents_verify() {
    let s = ok(&["current", "--geometry", "heisenberg", "--field", "Xt", "--verify", "100"]);
    assert!(s.contains("< 1e-7: PASS"), "{s}");
    assert!(s.lines().any(|l| l.starts_with("A^t = ")));
    let v = json(&["current", "--geometry", "h2xr", "--class", "zero", "--b", "x", "--verify", "100"]);
    assert!(v["max_divergence"].as_f64().unwrap() < 1e-7);
    assert_eq!(v["component"].as_array().unwrap().len(), 3);
    assert_eq!(v["symbolic"], true);
    assert_eq!(code(&["current", "--geometry", "euclidean", "--class", "linear", "--a", "1"]), 4);
}

#[test]
fn suite_exit_codes() {
    assert_eq!(code(&["suite", "--geometry", "heisenberg"]), 0);
    assert_eq!(code(&["suite", "--geometry", "nosuch"]), 2);
    assert_eq!(code(&["curvature", "--geometry", "nosuch"]), 2);
    assert_eq!(code(&["suite"]), 2);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for g in ["sol", "heisenberg", "sphere3"] {
        let path = dir.path().join(format!("{g}.json"));
        let p = path.to_str().unwrap();
        ok(&["export", "--geometry", g, "-o", p]);
        let a = json(&["curvature", "--geometry", g]);
        let b = json(&["curvature", p]);
        assert_eq!(a, b, "{g}");
        let m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(m["vectorfields"].as_object().unwrap().len() >= 3);
        let f = m["vectorfields"].as_object().unwrap().keys().next().unwrap().clone();
        assert!(ok(&["killing", p, "--field", &f]).contains("Killing (μ=0)"));
    }
}

#[test]
fn manifest_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let singular = write(
        dir.path(),
        "singular.json",
        r#"{"manifold": {"coords": ["x", "y"]}, "metric": {"g": [["1", "1"], ["1", "1"]]}}"#,
    );
    assert_eq!(code(&["curvature", &singular]), 3);
    let bad = write(dir.path(), "bad.json", r#"{"manifold": {"coords": ["x"]}, "metric": {"g": [["1"]]}, "extra": 1}"#);
    assert_eq!(code(&["curvature", &bad]), 2);
    assert_eq!(code(&["curvature", "/no/such/file.json"]), 2);
    let parse = write(dir.path(), "parse.json", r#"{"manifold": {"coords": ["x", "y"]}, "metric": {"g": [["1", "0"], ["0", "1+"]]}}"#);
    assert_eq!(code(&["curvature", &parse]), 2);

    let sphere = write(
        dir.path(),
        "s2.json",
        r#"{
  "manifold": {"coords": ["th", "ph", "z"], "box": {"th": [0.3, 2.8], "ph": [-3, 3]}},
  "metric": {"g": [["1", "0", "0"], ["0", "sin(th)^2", "0"], ["0", "0", "1"]]},
  "vectorfields": {"Z": ["0", "1", "0"]},
  "nonlinearity": {"class": "constant", "k": "kappa"}
}"#,
    );
    assert!(ok(&["curvature", &sphere]).lines().any(|l| l == "R = 2"));
    assert!(ok(&["noether", &sphere, "--field", "Z"]).contains("Variational"));
    let v = json(&["current", &sphere, "--field", "Z", "--verify", "50"]);
    assert!(v["max_divergence"].as_f64().unwrap() < 1e-7);

    let plane = write(dir.path(), "plane.json", r#"{"manifold": {"coords": ["x", "y"]}, "metric": {"g": [["1", "0"], ["0", "1"]]}}"#);
    assert!(ok(&["curvature", &plane]).lines().any(|l| l == "R = 0"));
    assert_eq!(code(&["noether", &plane, "--xi", "1,0"]), 2);
}

#[test]
fn seed_is_reproducible() {
    let a = ok(&["--seed", "7", "current", "--geometry", "sol", "--field", "So2", "--verify", "20"]);
    let b = ok(&["--seed", "7", "current", "--geometry", "sol", "--field", "So2", "--verify", "20"]);
    assert_eq!(a, b);
}
