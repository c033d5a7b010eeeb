use std::path::PathBuf;
use std::process::Command;

fn coview() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coview"))
}

fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

#[test]
fn simulate_writes_report_and_replayable_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let transcript = dir.path().join("run.txt");
    let out = coview()
        .args(["simulate", "--peers", "4", "--messages", "200", "--seed", "9"])
        .args(["--latency", "10:200", "--reorder", "--dup-prob", "0.1"])
        .arg("--report")
        .arg(&report)
        .arg("--transcript")
        .arg(&transcript)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("final divergence:    0e0"), "{text}");

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["peers"], 4);
    assert_eq!(json["gestures_sent"], 200);
    assert_eq!(json["final_divergence"], 0.0);
    assert!(json["delta_bytes"].as_u64().unwrap() < json["full_matrix_bytes"].as_u64().unwrap());

    let out = coview()
        .args(["replay", "--json", "--transcript"])
        .arg(&transcript)
        .output()
        .unwrap();
    assert!(out.status.success());
    let replay: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(replay["state_hash"], json["state_hash"]);
}

#[test]
fn replay_prints_golden_hash() {
    let golden = std::fs::read_to_string(core_fixture("golden_3.sha256")).unwrap();
    let out = coview()
        .args(["replay", "--transcript"])
        .arg(core_fixture("transcript_3.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains(golden.trim()));
}

#[test]
fn replay_reports_the_bad_line() {
    let out = coview()
        .args(["replay", "--transcript"])
        .arg(core_fixture("transcript_bad_line2.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
}

#[test]
fn invalid_arguments_are_rejected() {
    let bad = [
        vec!["simulate", "--latency", "200:10"],
        vec!["simulate", "--latency", "fast"],
        vec!["simulate", "--dup-prob", "1"],
        vec!["simulate", "--peers", "0"],
    ];
    for args in bad {
        let out = coview().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} was accepted");
    }
}
