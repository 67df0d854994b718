use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhc-lab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

const THREE: &str = "chi(0,1);chi(0,2);chi(1,2)";

#[test]
fn classify_exponential_is_chaotic() {
    let o = run(&["classify", "--weight", "exponential(1)", "--space", "lp"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert!(r.contains("verdict name=chaotic value=yes"));
    assert!(r.contains("verdict name=fhc_criterion value=yes"));
    for key in ["config_hash", "grid_step", "horizon", "tolerance.necessary_eps"] {
        assert!(field(&r, key).is_some(), "missing {key}");
    }
}

#[test]
fn classify_constant_on_c0() {
    let o = run(&["classify", "--weight", "constant(1)", "--space", "c0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict name=hypercyclic value=no"));
}

#[test]
fn malformed_inputs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "weight = \"exponential(1)\"\nhorizn = 10\n").unwrap();
    let o = run(&["classify", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizn"));
    assert_eq!(run(&["classify", "--weight", "nope"]).status.code(), Some(4));
    assert_eq!(run(&["construct", "--weight", "exponential(1)", "--targets", ""]).status.code(), Some(4));
    assert_eq!(run(&["construct", "--weight", "exponential(1)", "--grid-step", "0.3"]).status.code(), Some(4));
    assert_eq!(run(&["orbit", "--bogus-flag"]).status.code(), Some(4));
}

#[test]
fn divergent_weight_is_a_hypothesis_violation() {
    let o = run(&["construct", "--weight", "rational", "--horizon", "50"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not converge"));
}

#[test]
fn construct_three_levels_and_vector_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let vec = dir.path().join("x.toml");
    let o = run(&[
        "construct",
        "--weight",
        "exponential(1)",
        "--targets",
        THREE,
        "--grid-step",
        "1/16",
        "--horizon",
        "200",
        "--out",
        out.to_str().unwrap(),
        "--vector-out",
        vec.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = fs::read_to_string(&out).unwrap();
    assert_eq!(field(&r, "family.period"), Some("24"));
    assert_eq!(r.lines().filter(|l| l.starts_with("level ") && l.ends_with("pass=true")).count(), 3);
    let v: toml::Value = toml::from_str(&fs::read_to_string(&vec).unwrap()).unwrap();
    assert_eq!(v["period"].as_integer(), Some(24));
    assert_eq!(v["thresholds"].as_array().unwrap().len(), 3);
    assert!(!v["values"].as_array().unwrap().is_empty());
}

#[test]
fn reports_are_deterministic_and_config_file_mirrors_flags() {
    let flags = ["orbit", "--weight", "exponential(1)", "--targets", THREE, "--grid-step", "1/8", "--horizon", "120", "--step", "1/4"];
    let a = stdout(&run(&flags));
    let b = stdout(&run(&flags));
    assert_eq!(a, b);
    assert!(a.contains("status=ok"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "weight = \"exponential(1)\"\ntargets = [\"chi(0,1)\", \"chi(0,2)\", \"chi(1,2)\"]\ngrid-step = \"1/8\"\nhorizon = 120\nstep = 0.25\n",
    )
    .unwrap();
    let c = stdout(&run(&["orbit", "--config", cfg.to_str().unwrap()]));
    assert_eq!(a, c);
    let d = stdout(&run(&["orbit", "--config", cfg.to_str().unwrap(), "--horizon", "121"]));
    assert_ne!(field(&a, "config_hash"), field(&d, "config_hash"));
}

#[test]
fn periodic_budget_and_violation() {
    let ok = run(&["periodic", "--weight", "exponential(1)", "--period", "5", "--delta", "1/4", "--truncation", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    let r = stdout(&ok);
    assert_eq!(field(&r, "monotone"), Some("true"));
    let tight = run(&["periodic", "--weight", "exponential(1)", "--truncation", "1", "--eps", "1e-6"]);
    assert_eq!(tight.status.code(), Some(2));
    assert!(stdout(&tight).contains("status=budget_violation"));
}

#[test]
fn sampled_weight_file() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (0..=400).map(|i| format!("{:?}", (-(i as f64) / 8.0).exp())).collect();
    fs::write(
        dir.path().join("w.toml"),
        format!(
            "step = 0.125\nvalues = [{}]\ncertificate = {{ m = 1.0, omega = 1.1 }}\n\n[tail]\nhorizon = 50.0\nupper = {{ kind = \"exp\", c = 1.0, rate = 1.0 }}\nlower = {{ kind = \"exp\", c = 1.0, rate = 1.0 }}\n",
            values.join(", ")
        ),
    )
    .unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "weight = \"file:w.toml\"\nhorizon = 40\n").unwrap();
    let o = run(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict name=chaotic value=yes"));
}
