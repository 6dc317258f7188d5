//! Every shipped example builds, runs to completion and prints something.

use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: &[&str] = &[
    "thresholds",
    "return_probability",
    "peierls",
    "disconnection",
    "scaling",
    "excursions",
    "vacant_events",
    "exponential_bound",
    "local_time",
    "exit_tails",
];

fn examples_dir() -> PathBuf {
    // target/<profile>/cylwalk → target/<profile>/examples
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_cylwalk"));
    bin.parent().unwrap().join("examples")
}

#[test]
fn examples_run() {
    let dir = examples_dir();
    if EXAMPLES.iter().any(|e| !dir.join(e).exists()) {
        // e.g. when only this test target was selected
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut build = Command::new(cargo);
        build.args(["build", "--examples", "-p", "cylwalk"]);
        if dir.parent().unwrap().ends_with("release") {
            build.arg("--release");
        }
        assert!(build.status().unwrap().success(), "building the examples failed");
    }
    for name in EXAMPLES {
        let out = Command::new(dir.join(name)).output().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(out.status.success(), "{name} failed:\n{}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}

#[test]
fn every_example_is_listed() {
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut found: Vec<String> = std::fs::read_dir(src)
        .unwrap()
        .filter_map(|e| e.ok()?.path().file_stem()?.to_str().map(String::from))
        .collect();
    found.sort();
    let mut listed: Vec<String> = EXAMPLES.iter().map(|s| s.to_string()).collect();
    listed.sort();
    assert_eq!(found, listed);
}
