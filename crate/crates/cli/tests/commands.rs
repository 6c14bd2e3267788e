//! The `secnet` binary end to end: exit codes, formats and determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn secnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secnet")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn analyze_exit_codes_follow_the_verdict() {
    let passive = secnet(&["analyze", "--fixture", "fig1", "--class", "A0"]);
    assert_eq!(passive.status.code(), Some(1));
    let report = json(&passive);
    assert_eq!(report["verdict"], "imperfectly_secure");
    assert!((report["max_leakage_bits"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(report["schema_version"], 1);

    let adaptive = secnet(&["analyze", "--fixture", "fig1", "--class", "A2"]);
    assert_eq!(adaptive.status.code(), Some(2));
    assert_eq!(json(&adaptive)["verdict"], "insecure");

    let missing = secnet(&["analyze", "--fixture", "nope"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn analyze_reads_files_written_by_build() {
    let dir = std::env::temp_dir().join(format!("secnet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let built = secnet(&["build", "--construction", "onehop", "--k", "2", "--r", "1"]);
    assert_eq!(built.status.code(), Some(0));
    let mut code = json(&built);
    let network = code["network"].take();
    let (net_path, code_path) = (dir.join("network.json"), dir.join("code.json"));
    std::fs::write(&net_path, network.to_string()).unwrap();
    std::fs::write(&code_path, code.to_string()).unwrap();
    let out = secnet(&[
        "analyze",
        "--network",
        net_path.to_str().unwrap(),
        "--code",
        code_path.to_str().unwrap(),
        "--class",
        "A3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["verdict"], "perfectly_secure");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn build_verify_and_bad_params() {
    let onehop = secnet(&["build", "--construction", "onehop", "--k", "3", "--r", "1", "--q", "5", "--verify"]);
    assert_eq!(onehop.status.code(), Some(0));
    let v = json(&onehop);
    assert_eq!(v["rate"], "2");
    assert_eq!(v["verification"]["a3"], "perfectly_secure");

    let relay = secnet(&[
        "build", "--construction", "relay", "--mode", "no_random", "--k", "2,2", "--r", "1,1", "--verify",
    ]);
    assert_eq!(relay.status.code(), Some(0));
    assert_eq!(json(&relay)["rate"], "1/2");

    let bad = secnet(&["build", "--construction", "relay", "--k", "2", "--r", "3"]);
    assert_eq!(bad.status.code(), Some(3));

    let leaky = secnet(&["build", "--construction", "fixture", "--name", "fig1", "--verify"]);
    assert_eq!(leaky.status.code(), Some(2));
}

#[test]
fn capacity_outputs_exact_values() {
    let relay = json(&secnet(&["capacity", "--relay", "--k", "2,2", "--r", "1,1", "--gamma", "0,0"]));
    assert_eq!((relay["C1"].as_str(), relay["C2"].as_str(), relay["C_gamma"].as_str()), (Some("1"), Some("1/2"), Some("1/2")));
    let limited = json(&secnet(&["capacity", "--relay", "--k", "2,2", "--r", "1,1", "--gamma", "0,1"]));
    assert_eq!(limited["C_gamma"], "1");
    let violated = secnet(&[
        "capacity", "--multicast", "--b", "2", "--groups", "2", "--k", "2,2", "--r", "1,1", "--randomness", "full",
    ]);
    assert_eq!(violated.status.code(), Some(3));
    let region = json(&secnet(&["capacity", "--multicast", "--b", "2", "--groups", "2", "--k", "2,1", "--r", "1,1"]));
    assert_eq!(region["constants"]["A1"], "1");
    assert!(region["inequalities"].as_array().unwrap().len() == 3);
}

#[test]
fn reproduce_tables_pass() {
    for table in ["nonlinear_summary", "scalar_impossibility", "lemma_entropy"] {
        let out = secnet(&["reproduce", "--table", table]);
        assert_eq!(out.status.code(), Some(0), "{table}");
        assert_eq!(json(&out)["pass"], true);
    }
    let csv = secnet(&["reproduce", "--table", "scalar_impossibility", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",PASS")));
}

#[test]
fn output_is_identical_across_parallelism() {
    let args = ["build", "--construction", "relay", "--k", "2,2", "--r", "1,1", "--q", "3", "--verify"];
    let one = secnet(&[&args[..], &["--parallelism", "1"]].concat());
    let four = secnet(&[&args[..], &["--parallelism", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn output_flag_and_world_cap() {
    let path = std::env::temp_dir().join(format!("secnet-mincut-{}.json", std::process::id()));
    let out = secnet(&["mincut", "--fixture", "five_node", "--r", "1", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((written["mincut1"].as_u64(), written["mincut2"].as_u64()), (Some(2), Some(1)));
    std::fs::remove_file(&path).ok();

    let capped = secnet(&["analyze", "--fixture", "fig1", "--max-worlds", "2"]);
    assert_eq!(capped.status.code(), Some(3));
    let too_big = secnet(&["analyze", "--fixture", "fig1", "--max-worlds", "99999999999"]);
    assert_eq!(too_big.status.code(), Some(3));

    let pp = json(&secnet(&["primepower", "--d", "6", "--n", "2", "--scan", "3"]));
    assert_eq!(pp["q"], 32);
    assert_eq!(pp["scan"].as_array().unwrap().len(), 3);
}
