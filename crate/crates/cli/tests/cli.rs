use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crobs::{FillabilityVerdict, SeriesFile};
use serde_json::Value;

fn crobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crobs")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn cohomology_grid_matches_and_shows_the_exceptional_class() {
    let o = crobs(&["cohomology", "--n", "4", "--kmin", "-4", "--kmax", "-4", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["all_match"], true);
    let row = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["m"] == 3 && r["bundle"] == "T" && r["q"] == 2)
        .unwrap();
    assert_eq!((row["bott"].as_u64(), row["cech"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&crobs(&["obstructions", "--kmin", "2", "--kmax", "1"])), 2);
    assert_eq!(code(&crobs(&["obstructions", "--n", "7"])), 2);
    assert_eq!(code(&crobs(&["kuranishi", "--order", "0"])), 2);
    assert_eq!(code(&crobs(&["cohomology", "--bogus"])), 2);
    assert_eq!(code(&crobs(&["classify"])), 2);
}

#[test]
fn obstruction_table_for_dimension_nine() {
    let o = crobs(&["obstructions", "--n", "5", "--kmin", "-3", "--kmax", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let w: Vec<u64> = v["weights"].as_array().unwrap().iter().map(|r| r["w_linear"].as_u64().unwrap()).collect();
    assert_eq!(w, [280, 70, 0, 0]);
    assert!(v["weights"].as_array().unwrap().iter().all(|r| r["match"] == true));

    let o = crobs(&["obstructions", "--n", "5", "--kmin", "0", "--kmax", "6", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["weights"].as_array().unwrap().iter().all(|r| r["w_linear"] == 0));
}

#[test]
fn dimension_seven_report_is_attached() {
    let o = crobs(&["obstructions", "--n", "4", "--kmin", "-4", "--kmax", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let d = &json(&o)["dimension_seven"];
    assert!(d["h1_nonnegative"].as_array().unwrap().iter().all(|p| p[1] == 0));
    assert!(d["h2_nonpositive"].as_array().unwrap().iter().all(|p| p[1] == 0));
    assert!(!d["brackets"].as_array().unwrap().is_empty());
}

#[test]
fn bundled_examples_give_documented_verdicts() {
    let o = crobs(&["classify", "--input", example("zero.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: FillabilityVerdict = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.stable);

    let o = crobs(&["classify", "--input", example("w3_obstructed.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v: FillabilityVerdict = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v.fillable_n && v.fillable_m && !v.stable);
    let input: Value = serde_json::from_str(&std::fs::read_to_string(example("w3_obstructed.json")).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(&v.residuals).unwrap(), input);

    let o = crobs(&["classify", "--input", example("gauge_trivial.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("fillable_N  true"));
}

#[test]
fn bundled_examples_are_reproducible() {
    let dir = std::env::temp_dir().join(format!("crobs-examples-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    assert_eq!(code(&crobs(&["examples", "--out", dir.to_str().unwrap()])), 0);
    for name in ["zero.json", "w3_obstructed.json", "gauge_trivial.json"] {
        let fresh = std::fs::read_to_string(dir.join(name)).unwrap();
        let bundled = std::fs::read_to_string(example(name)).unwrap();
        assert_eq!(fresh, bundled, "{name}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_input_is_a_located_usage_error() {
    let dir = std::env::temp_dir().join(format!("crobs-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\n  \"schema_version\": 1,\n  \"n\": 5,\n  \"entries\": [,]\n}\n").unwrap();
    let o = crobs(&["classify", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
    let o = crobs(&["classify", "--n", "4", "--input", example("zero.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify", "--n", "3", "--format", "json", "--seed", "9"][..],
        &["kuranishi", "--n", "3", "--format", "json", "--seed", "4"][..],
        &["obstructions", "--n", "3", "--kmin", "-3", "--kmax", "1"][..],
    ] {
        let (a, b) = (crobs(args), crobs(args));
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn json_outputs_round_trip() {
    let o = crobs(&["classify", "--input", example("w3_obstructed.json").to_str().unwrap(), "--format", "json"]);
    let v: FillabilityVerdict = serde_json::from_slice(&o.stdout).unwrap();
    let again: FillabilityVerdict = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);

    let o = crobs(&["kuranishi", "--n", "3", "--order", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["integrable_through_order"], true);
    let s: SeriesFile = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s.order, 3);
    let again: SeriesFile = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(again, s);
}

#[test]
fn verify_passes_and_detects_an_injected_fault() {
    let o = crobs(&["verify", "--n", "3", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(json(&o)["passed"], true);

    // at n = 3 three-forms vanish and the Leibniz rule holds trivially
    let o = crobs(&["verify", "--n", "4", "--format", "json", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    let group = |name: &str| v["groups"].as_array().unwrap().iter().find(|g| g["name"] == name).unwrap().clone();
    assert_eq!(group("leibniz")["passed"], false);
    assert_eq!(group("bracket-symmetry")["passed"], false);
    assert_eq!(group("bott-cech")["passed"], true);
}

#[test]
fn dimension_seven_suite_passes() {
    let o = crobs(&["verify", "--n", "4", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}
