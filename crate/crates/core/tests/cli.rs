//! End-to-end runs of the binary against checked-in golden outputs.
//! Set `ORDWB_BLESS=1` to rewrite the goldens.

use std::path::PathBuf;
use std::process::Command;

const CASES: &[(&str, &[&str])] = &[
    ("ord_add.txt", &["ord", "add", "w^2", "w^2*2+w"]),
    ("rho_table.csv", &["rho", "table", "--zeta", "1", "--alpha-max", "w^2", "--levels", "4"]),
    ("main_theorem.json", &["check", "main-theorem", "--zeta", "1", "--alpha", "2"]),
    ("inductive_step.json", &["check", "inductive-step", "--zeta", "2", "--alpha", "w^2+w"]),
    ("rank.json", &["rank", "--zeta", "1", "--alpha", "1", "2", "w", "w+2", "w*2", "w^2"]),
    ("enum_l2.csv", &["--format", "csv", "enum-l", "--zeta", "1", "--alpha", "2"]),
    ("witness_gen.json", &["witness", "gen", "--zeta", "2", "--gamma", "w*3+2"]),
    ("lemma_b.json", &["--seed", "20240601", "verify", "lemma-b", "--families", "40", "--vectors", "20"]),
    ("l1_equiv.json", &["--seed", "7", "verify", "l1-equiv", "--zeta", "1", "--alpha", "1", "2", "w", "--vectors", "200"]),
    ("preimage.json", &["--seed", "5", "solve-preimage", "--zeta", "1", "--alpha", "1", "--max-branch", "2"]),
];

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ordwb")).args(args).env_remove("ORDWB_CACHE_DIR").output().unwrap();
    (out.status.code().unwrap(), out.stdout)
}

#[test]
fn outputs_match_goldens() {
    let bless = std::env::var_os("ORDWB_BLESS").is_some();
    for (name, args) in CASES {
        let (code, stdout) = run(args);
        assert_eq!(code, 0, "{name}: {}", String::from_utf8_lossy(&stdout));
        let path = golden_dir().join(name);
        if bless {
            std::fs::write(&path, &stdout).unwrap();
            continue;
        }
        let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(stdout == want, "{name} differs from golden:\n{}", String::from_utf8_lossy(&stdout));
    }
}

#[test]
fn repeated_runs_are_byte_identical_through_out() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "9", "verify", "l1-equiv", "--zeta", "2", "--alpha", "3", "--vectors", "100"];
    let mut files = Vec::new();
    for (k, seq) in [false, true, false].into_iter().enumerate() {
        let path = dir.path().join(format!("r{k}.json"));
        let mut full = vec!["--out", path.to_str().unwrap()];
        if seq {
            full.push("--sequential");
        }
        full.extend(args);
        assert_eq!(run(&full).0, 0);
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn cache_directory_is_used_and_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["build", "--zeta", "1", "--alpha", "w+1"];
    let fresh = run(&args);
    let cached = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_ordwb")).args(args).env("ORDWB_CACHE_DIR", dir.path()).output().unwrap();
        (out.status.code().unwrap(), out.stdout)
    };
    assert_eq!(cached(&args), fresh);
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 1, "{files:?}");
    assert_eq!(cached(&args), fresh);
    std::fs::write(dir.path().join(&files[0]), "garbage").unwrap();
    assert_eq!(cached(&args), fresh);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--nope"]).0, 2);
    assert_eq!(run(&["ord", "add", "w^", "1"]).0, 2);
    assert_eq!(run(&["rank", "--zeta", "1"]).0, 2);
    assert_eq!(run(&["check", "inductive-step", "--zeta", "1", "--alpha", "1"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    std::fs::write(&w, run(&["witness", "gen", "--zeta", "1", "--gamma", "4"]).1).unwrap();
    let w = w.to_str().unwrap();
    assert_eq!(run(&["witness", "verify", "--file", w, "--zeta", "1"]).0, 0);
    assert_eq!(run(&["witness", "verify", "--file", w, "--zeta", "1", "--at-least", "5"]).0, 1);
}
