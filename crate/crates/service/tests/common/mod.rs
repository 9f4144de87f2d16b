#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;

use transdoc_agents::FixedClock;

pub const TIMESTAMP: &str = "2026-01-01T00:00:00+00:00";

pub fn demo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("demo")
}

pub fn clock() -> FixedClock {
    FixedClock(TIMESTAMP.into())
}

fn copy_tree(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// A scratch copy of the demo directory.
pub fn demo_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&demo_dir(), dir.path());
    dir
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary with a fixed timestamp and the given extra environment.
pub fn cli(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_transdoc"));
    cmd.current_dir(dir).args(args).env("TRANSDOC_TIMESTAMP", TIMESTAMP);
    for key in ["TRANSDOC_BACKEND", "TRANSDOC_MOCK_SCRIPT", "TRANSDOC_TRANSCRIPT", "TRANSDOC_API_KEY"] {
        cmd.env_remove(key);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn with_mock(script: &str) -> [(&'static str, &str); 2] {
    [("TRANSDOC_BACKEND", "mock"), ("TRANSDOC_MOCK_SCRIPT", script)]
}

/// Writes a mock script of plain replies.
pub fn write_script(dir: &Path, name: &str, replies: &[&str]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(replies).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[derive(Debug, Deserialize)]
pub struct GoldEntry {
    pub label: String,
    pub dataset: String,
    pub code: String,
    pub paragraph: String,
    pub target: String,
    pub gold: String,
}

pub fn gold_corpus() -> Vec<GoldEntry> {
    serde_json::from_str(&std::fs::read_to_string(demo_dir().join("gold.json")).unwrap()).unwrap()
}

pub fn gold_sources(entry: &GoldEntry) -> transdoc_core::eval::Sources {
    let rows = std::fs::read_to_string(demo_dir().join(&entry.dataset)).unwrap();
    let mut s = transdoc_core::eval::Sources::default();
    s.datasets.insert(transdoc_core::eval::TABLE_DATA.to_string(), serde_json::from_str(&rows).unwrap());
    s.code = entry.code.clone();
    s
}
