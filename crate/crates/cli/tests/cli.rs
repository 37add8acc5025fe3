use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toa-lab"))
        .args(args)
        .output()
        .expect("spawn toa-lab")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(config: &str, out: &Path) -> Output {
    lab(&["run", config, "--out", out.to_str().unwrap()])
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn kijowski_run_writes_normalized_density() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("kijowski_gaussian.json"), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("density_kijowski.csv"));
    assert_eq!(rows.len(), 201);
    let h = rows[1].0 - rows[0].0;
    let vals: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mass = toa_quad(&vals, h);
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    let peak = rows.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert!((peak - 10.0).abs() <= h + 1e-12, "{peak}");
    let r = report(dir.path());
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["name"], "kijowski_gaussian");
}

fn toa_quad(v: &[f64], h: f64) -> f64 {
    // Composite Simpson on an even number of intervals.
    assert!(v.len() % 2 == 1);
    let inner: f64 = v[1..v.len() - 1]
        .iter()
        .enumerate()
        .map(|(k, x)| if k % 2 == 0 { 4.0 * x } else { 2.0 * x })
        .sum();
    h / 3.0 * (v[0] + inner + v[v.len() - 1])
}

#[test]
fn builtin_names_resolve_without_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("kijowski_gaussian.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("density_absorption.csv").exists());
}

#[test]
fn empty_outcomes_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("empty_outcomes.json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Σ_λ P_λ = P"), "{}", stderr(&o));
    let v = lab(&["validate", &scenario("empty_outcomes.json")]);
    assert_eq!(v.status.code(), Some(2));
}

#[test]
fn oscillation_wavenumber_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let delta = dir.path().join("delta");
    let constant = dir.path().join("constant");
    assert!(run(&scenario("oscillation_two_flavor.json"), &delta).status.success());
    assert!(run(&scenario("oscillation_two_flavor_constant.json"), &constant).status.success());
    let kd = report(&delta)["results"]["fit"]["k"].as_f64().unwrap();
    let kc = report(&constant)["results"]["fit"]["k"].as_f64().unwrap();
    assert!((kc / kd - 2.0).abs() < 0.04, "{kc} / {kd}");
    let rows = read_csv(&delta.join("probability.csv"));
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.1)));
}

#[test]
fn compare_identical_and_distinct_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&scenario("kijowski_gaussian.json"), dir.path()).status.success());
    let k = dir.path().join("density_kijowski.csv");
    let a = dir.path().join("density_absorption.csv");
    let o = lab(&["compare", k.to_str().unwrap(), a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(c["total_variation"].as_f64().unwrap() <= 1e-10);

    let shifted: PathBuf = dir.path().join("shifted.csv");
    let mut text = String::from("t,value\n");
    for (t, v) in read_csv(&k) {
        text.push_str(&format!("{t},{}\n", v * (1.0 + 0.5 * (t / 20.0))));
    }
    fs::write(&shifted, text).unwrap();
    let o = lab(&["compare", k.to_str().unwrap(), shifted.to_str().unwrap()]);
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(c["total_variation"].as_f64().unwrap() > 1e-3);
}

#[test]
fn compare_rejects_mismatched_grids() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "t,value\n0,1\n1,2\n2,1\n").unwrap();
    fs::write(&b, "t,value\n0,1\n1,2\n").unwrap();
    let o = lab(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn validate_and_list() {
    let o = lab(&["validate", &scenario("transition_4level.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("transition_4level: ok"));
    let o = lab(&["list-scenarios"]);
    assert!(o.status.success());
    let listing = String::from_utf8_lossy(&o.stdout).into_owned();
    for entry in fs::read_dir(scenario("")).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(listing.contains(&name), "{name} missing from listing");
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("/nonexistent/scenario.json", dir.path());
    assert_eq!(o.status.code(), Some(4));
    let o = lab(&["compare", "/nonexistent/a.csv", "/nonexistent/b.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn malformed_json_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(scenario("kijowski_gaussian.json")).unwrap();
    fs::write(&bad, text.replace("\"units\"", "\"unit\"")).unwrap();
    assert_eq!(lab(&["validate", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn quadrature_cancellation_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("numerical.json");
    let text = fs::read_to_string(scenario("oscillation_two_flavor_constant.json")).unwrap();
    fs::write(&cfg, text.replace("\"beta\": 1,", "\"beta\": 1, \"quadrature\": \"numerical\",")).unwrap();
    let o = run(cfg.to_str().unwrap(), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("numerical"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["current_negativity.json", "oscillation_two_flavor.json"] {
        let a = dir.path().join(format!("{name}.a"));
        let b = dir.path().join(format!("{name}.b"));
        assert!(run(&scenario(name), &a).status.success());
        assert!(lab(&["--threads", "1", "run", &scenario(name), "--out", b.to_str().unwrap()]).status.success());
        for entry in fs::read_dir(&a).unwrap() {
            let f = entry.unwrap().file_name();
            assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{f:?}");
        }
    }
}
