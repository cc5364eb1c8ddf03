//! End-to-end tests of the `qrecover` binary.

use std::process::Command;

fn qrecover() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qrecover"))
}

#[test]
fn demo_identity_bell_exits_zero() {
    let out = qrecover()
        .args(["demo", "--channel", "identity:d=2", "--input", "bell"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("loss (epsilon)"));
    assert!(text.contains("bound status: SATISFIED"));
}

#[test]
fn demo_full_damping_reports_vacuous_bound() {
    let out = qrecover()
        .args(["demo", "--channel", "ampdamp:g=1", "--input", "bell"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("coherent_info   =    -1.000000"), "{text}");
    assert!(text.contains("VACUOUS"));
}

#[test]
fn demo_rejects_bad_specs() {
    let out = qrecover()
        .args(["demo", "--channel", "squeeze:r=2", "--input", "bell"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown channel family"));
}

#[test]
fn verify_small_corpus_passes_and_emits_json() {
    let out = qrecover()
        .args(["verify", "--trials", "50", "--max-dim", "4", "--seed", "3", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["quantum_pinsker"]["violations"], 0);
}

#[test]
fn sweep_runs_twice_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("rows.csv");
    let config = dir.path().join("cfg.txt");
    std::fs::write(
        &config,
        format!(
            "channel_family = phaseflip\nparam_grid = 0.05,0.10\ninput_spec = bell\n\
             trials_per_point = 1\nseed = 11\noutput_path = {}\nformat = csv\n",
            report.display()
        ),
    )
    .unwrap();
    let run = || {
        let out = qrecover()
            .args(["sweep", "--config"])
            .arg(&config)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(&report).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    let text = String::from_utf8_lossy(&first);
    assert!(text.starts_with("param,trial,s_q,coherent_info,epsilon,achieved_f,"));
}
