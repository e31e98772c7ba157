#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subgraph"));
    c.env("GOFFISH_LOG", "warn");
    c
}

pub fn call(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn ok(args: &[&str]) -> String {
    let out = call(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes `edges` and ingests it into `<dir>/<name>` with `k` partitions.
pub fn store(dir: &Path, name: &str, edges: &str, k: usize, extra: &[&str]) -> PathBuf {
    let file = dir.join(format!("{name}.txt"));
    fs::write(&file, edges).unwrap();
    let out = dir.join(name);
    let k = k.to_string();
    let mut args = vec!["ingest", s(&file), "--out", s(&out), "-k", &k];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

pub fn report(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).expect("report is JSON")
}

/// `vertex<TAB>value` lines as pairs.
pub fn parse_dump(text: &str) -> Vec<(u64, f64)> {
    text.lines()
        .map(|l| {
            let (v, x) = l.split_once('\t').unwrap();
            (v.parse().unwrap(), x.parse().unwrap())
        })
        .collect()
}

pub const TWO_COMPONENTS: &str = "# two triangles\n0 1 2\n1 2 3\n2 0 1\n3 4 5\n4 5 1\n5 3 2\n";
