use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(format!("{name}.spec")).display().to_string()
}

fn gcantor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcantor"))
        .args(args)
        .env_remove("GCANTOR_PRECISION")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_spec(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

/// `lo <= x <= hi` for decimal strings in plain `d.ddd` form of equal length.
fn brackets(lo: &str, hi: &str, x: &str) -> bool {
    let x = &x[..lo.len()];
    lo <= x && x <= hi
}

#[test]
fn constant_half_is_uncountable_with_every_index_a_witness() {
    let doc = json(&gcantor(&["classify", "--spec", &spec("constant_half")]));
    assert_eq!(doc["verdict"], "Uncountable");
    assert_eq!(doc["precision_bits"], 128);
    let w: Vec<u64> = doc["witnesses"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(w, (1..=32).collect::<Vec<_>>());
}

#[test]
fn paper_example_criterion_at_ten_encloses_ln_ten() {
    let doc = json(&gcantor(&["classify", "--spec", &spec("paper_example"), "--horizon", "50"]));
    assert_eq!(doc["verdict"], "CountableEvidence");
    let values = doc["criterion_values"].as_array().unwrap();
    assert_eq!(values.len(), 50);
    let ten = values.iter().find(|v| v["n"] == 10).unwrap();
    let (lo, hi) = (ten["lo"].as_str().unwrap(), ten["hi"].as_str().unwrap());
    assert!(brackets(lo, hi, "2.30258509299404568401799145468436420760110148862877"), "[{lo}, {hi}]");
    assert_eq!(ten["log_scale"], false);
}

#[test]
fn constant_half_level_one_bounds() {
    let out = gcantor(&["bounds", "--spec", &spec("constant_half"), "--levels", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("1,1,")).unwrap().split(',').collect();
    assert!(row[2].starts_with("2.07197") && row[3].starts_with("2.07197"));
    // The reported upper is the best candidate; the round annulus one is listed in JSON.
    let upper: f64 = row[5].parse().unwrap();
    assert!(upper < 12.2646);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 + 4);

    let doc = json(&gcantor(&["bounds", "--spec", &spec("constant_half"), "--levels", "2", "--format", "json"]));
    let first = &doc["bounds"][0];
    let round = first["candidates"].as_array().unwrap().iter().find(|c| c["method"] == "round_annulus").unwrap();
    assert!(round["value"]["lo"].as_str().unwrap().starts_with("12.264660009"));
    assert!(round["value"]["hi"].as_str().unwrap().starts_with("12.264660009"));
}

#[test]
fn output_is_deterministic() {
    let args = ["classify", "--spec", &spec("paper_example"), "--horizon", "12", "--levels", "4"];
    assert_eq!(gcantor(&args).stdout, gcantor(&args).stdout);
}

#[test]
fn emitted_spec_revalidates_to_the_same_digest() {
    for name in ["constant_half", "paper_example", "alternating_half_power"] {
        let first = json(&gcantor(&["spec-validate", "--spec", &spec(name)]));
        let file = temp_spec(&first["spec"].to_string());
        let second = json(&gcantor(&["spec-validate", "--spec", file.path().to_str().unwrap()]));
        assert_eq!(first["spec_digest"], second["spec_digest"], "{name}");
    }
}

#[test]
fn precision_comes_from_flag_then_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gcantor"));
        cmd.args(["spec-validate", "--spec", &spec("constant_half")]).env_remove("GCANTOR_PRECISION");
        if let Some(v) = env {
            cmd.env("GCANTOR_PRECISION", v);
        }
        if let Some(v) = flag {
            cmd.args(["--precision", v]);
        }
        json(&cmd.output().unwrap())["precision_bits"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 128);
    assert_eq!(run(Some("96"), None), 96);
    assert_eq!(run(Some("96"), Some("200")), 200);
}

#[test]
fn exit_codes() {
    let code = |out: Output| out.status.code().unwrap();
    let bad = temp_spec(r#"{"family": "constant", "q": "3/2"}"#);
    let bad = bad.path().to_str().unwrap();
    assert_eq!(code(gcantor(&["classify", "--spec", bad])), 2);
    assert_eq!(code(gcantor(&["classify", "--spec", "/nonexistent/x.spec"])), 2);
    assert_eq!(code(gcantor(&["classify"])), 2);
    assert_eq!(code(gcantor(&["classify", "--spec", &spec("constant_half"), "--precision", "40"])), 2);
    assert_eq!(code(gcantor(&["classify", "--spec", &spec("constant_half"), "--c", "2"])), 2);
    assert_eq!(code(gcantor(&["thresholds", "--spec", &spec("constant_half"), "--K", "1/2"])), 2);
    assert_eq!(code(gcantor(&["plotdata", "--spec", &spec("constant_half"), "--format", "json"])), 2);
    assert_eq!(code(gcantor(&["bounds", "--spec", &spec("constant_half"), "--levels", "21"])), 3);
}

#[test]
fn require_verdict_flags_inconclusive_results() {
    let unknown = temp_spec(r#"{"family": "user_closed_form", "q": "1/(n+1)"}"#);
    let unknown = unknown.path().to_str().unwrap();
    let out = gcantor(&["classify", "--spec", unknown, "--horizon", "8", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let out = gcantor(&["classify", "--spec", unknown, "--horizon", "8", "--levels", "2", "--require-verdict"]);
    assert_eq!(out.status.code(), Some(4));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "Unknown");

    let args = ["thresholds", "--spec", &spec("constant_half"), "--horizon", "6", "--require-verdict"];
    let out = gcantor(&args);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stdout.is_empty());
    let args = ["thresholds", "--spec", &spec("paper_example"), "--horizon", "6", "--require-verdict"];
    assert_eq!(json(&gcantor(&args))["N"], 4);
}
