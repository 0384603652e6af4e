#![allow(dead_code)]

pub mod oracle;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
}

impl Run {
    pub fn report(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("stdout is one JSON object")
    }
}

pub fn nonholo(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_nonholo"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
    }
}

/// A seed file for the default cell, solved once per test binary.
pub fn shared_seed() -> &'static PathBuf {
    static SEED: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &SEED
        .get_or_init(|| {
            let dir = tempfile::tempdir().unwrap();
            let run = nonholo(dir.path(), &["solve-identity", "--out", "seed.json"]);
            assert_eq!(run.code, 0, "{}", run.stdout);
            let path = dir.path().join("seed.json");
            (dir, path)
        })
        .1
}
