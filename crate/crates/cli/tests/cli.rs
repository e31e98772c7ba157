mod common;

use std::fs;

use common::*;
use serde_json::Value;

#[test]
fn ingest_four_cycle_into_one_subgraph() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cycle.txt");
    fs::write(&file, "# SNAP style header\n# Nodes: 4 Edges: 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let out = dir.path().join("st");
    let text = ok(&["ingest", s(&file), "--out", s(&out), "-k", "1"]);
    assert!(text.contains("4 vertices, 4 edges"), "{text}");
    assert!(text.contains("p0: 4 vertices in 1 sub-graphs"), "{text}");
    let meta: Value = serde_json::from_str(&ok(&["inspect", s(&out)])).unwrap();
    assert_eq!(meta["k"], 1);
    assert_eq!(meta["partitions"][0]["subgraphs"][0]["vertices"], 4);
    assert_eq!(meta["meta_graph"]["diameter"], 0);
    let ids = fs::read_to_string(out.join("id_map.tsv")).unwrap();
    assert_eq!(ids, "0\t0\n1\t1\n2\t2\n3\t3\n");
}

#[test]
fn duplicate_edges_are_collapsed_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("dup.txt");
    fs::write(&file, "a b\nb a\nb c\na b\n").unwrap();
    let out = call(&["ingest", s(&file), "--out", s(&dir.path().join("st"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("collapsed 2 duplicate edges"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("3 vertices, 2 edges, 2 duplicates"));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    fs::write(&file, "0 1\n# fine\n1 2 3 4\n").unwrap();
    let out = call(&["ingest", s(&file), "--out", s(&dir.path().join("st"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn cc_report_counts_components_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let st = store(dir.path(), "two", TWO_COMPONENTS, 2, &[]);
    let r = report(&["run", s(&st), "--algorithm", "connected-components"]);
    assert_eq!(r["summary"]["components"], 2);
    assert_eq!(r["k"], 2);
    assert!(r["load_secs"].as_f64().unwrap() >= 0.0);
    assert!(r["compute_secs"].as_f64().unwrap() >= 0.0);

    let schema: Value = serde_json::from_str(include_str!("../schema/run_report.schema.json")).unwrap();
    let validator = jsonschema::JSONSchema::compile(&schema).unwrap();
    assert!(validator.is_valid(&r));
    for algo in ["max-vertex", "sssp", "pagerank", "blockrank"] {
        let r = report(&["run", s(&st), "-a", algo, "--source", "0", "--repeat", "2"]);
        if let Err(errors) = validator.validate(&r) {
            panic!("{algo}: {:?}", errors.map(|e| e.to_string()).collect::<Vec<_>>());
        }
        assert_eq!(r["timing"]["runs"], 2);
    }
    let mut broken = r.clone();
    broken["digest"] = Value::from("xyz");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn weighted_sssp_digest_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let st = store(dir.path(), "w", "0 1 4\n0 2 1\n2 1 1\n1 3 1\n3 4 7\n2 4 9\n5 6 1\n", 2, &[]);
    let r = report(&["run", s(&st), "-a", "sssp", "--source", "0", "--weighted"]);
    let digest = ok(&["oracle", s(&st), "-a", "sssp", "--source", "0", "--weighted", "--digest"]);
    assert_eq!(r["digest"].as_str().unwrap(), digest.trim());
    let from_file = ok(&["oracle", s(&dir.path().join("w.txt")), "-a", "sssp", "--source", "0", "--weighted", "--digest"]);
    assert_eq!(digest, from_file);
    let dump = ok(&["oracle", s(&st), "-a", "sssp", "--source", "0", "--weighted"]);
    assert_eq!(dump, "0\t0.0\n1\t2.0\n2\t1.0\n3\t3.0\n4\t10.0\n5\tinf\n6\tinf\n");
}

#[test]
fn pagerank_digest_is_mode_independent() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("g.txt");
    ok(&["generate", "-v", "300", "--model", "preferential-attachment", "-e", "2", "--directed", "--seed", "5", "-o", s(&gen)]);
    let st = dir.path().join("st");
    ok(&["ingest", s(&gen), "--out", s(&st), "-k", "4", "--directed"]);
    let args = |mode| vec!["run", s(&st), "-a", "pagerank", "--iterations", "30", "--mode", mode];
    let sub = report(&args("subgraph"));
    let emu = report(&args("vertex-emulation"));
    assert_eq!(sub["digest"], emu["digest"]);
    assert_eq!(sub["mode"], "subgraph");
    assert_eq!(emu["mode"], "vertex-emulation");
    assert_ne!(sub["messages"]["total"], emu["messages"]["total"]);
}

#[test]
fn oracle_small_cases() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.txt");
    fs::write(&two, TWO_COMPONENTS).unwrap();
    let cc = ok(&["oracle", s(&two), "-a", "cc"]);
    let labels: std::collections::BTreeSet<&str> = cc.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(labels.len(), 2);

    let chain = dir.path().join("chain.txt");
    fs::write(&chain, "0 1\n1 2\n2 3\n").unwrap();
    assert_eq!(ok(&["oracle", s(&chain), "-a", "sssp", "--source", "0"]), "0\t0.0\n1\t1.0\n2\t2.0\n3\t3.0\n");

    let pair = dir.path().join("pair.txt");
    fs::write(&pair, "0 1\n1 0\n").unwrap();
    let pr = parse_dump(&ok(&["oracle", s(&pair), "-a", "pagerank", "--directed"]));
    assert_eq!(pr, vec![(0, 0.5), (1, 0.5)]);
}

#[test]
fn run_and_oracle_agree_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = [
        ("two", TWO_COMPONENTS.to_string(), false),
        ("chain", (0..20).map(|i| format!("{i} {}\n", i + 1)).collect(), false),
        ("star", (1..12).map(|i| format!("0 {i} {i}\n")).collect(), true),
    ];
    for (name, edges, directed) in fixtures {
        for k in [1, 3] {
            let extra: &[&str] = if directed { &["--directed"] } else { &[] };
            let st = store(dir.path(), &format!("{name}{k}"), &edges, k, extra);
            for algo in ["cc", "sssp", "max"] {
                let out = dir.path().join("run.txt");
                ok(&["run", s(&st), "-a", algo, "--source", "0", "--weighted", "--output", s(&out)]);
                let expected = ok(&["oracle", s(&st), "-a", algo, "--source", "0", "--weighted"]);
                assert_eq!(fs::read_to_string(&out).unwrap(), expected, "{name} k={k} {algo}");
            }
            let out = dir.path().join("pr.txt");
            ok(&["run", s(&st), "-a", "pagerank", "--output", s(&out)]);
            let got = parse_dump(&fs::read_to_string(&out).unwrap());
            let want = parse_dump(&ok(&["oracle", s(&st), "-a", "pagerank"]));
            for (a, b) in got.iter().zip(&want) {
                assert!((a.1 - b.1).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn engine_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let st = store(dir.path(), "two", TWO_COMPONENTS, 2, &[]);
    let out = call(&["run", s(&st), "-a", "sssp", "--source", "99"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("source vertex v99 not found"));
    let out = call(&["run", s(&dir.path().join("missing")), "-a", "cc"]);
    assert!(!out.status.success());
    let out = call(&["run", s(&st), "-a", "nonsense"]);
    assert!(!out.status.success());
}

#[test]
fn summary_table_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let st = store(dir.path(), "two", TWO_COMPONENTS, 2, &[]);
    let cfg = dir.path().join("engine.json");
    fs::write(&cfg, r#"{"pool_width": 1, "message_order": "arrival"}"#).unwrap();
    let table = ok(&["run", s(&st), "-a", "cc", "--config", s(&cfg), "--summary"]);
    assert!(table.contains("components   2"), "{table}");
    assert!(table.contains("superstep"));
    fs::write(&cfg, r#"{"pool_width": 0}"#).unwrap();
    assert!(!call(&["run", s(&st), "-a", "cc", "--config", s(&cfg)]).status.success());
}

#[test]
fn socket_transport_matches_memory() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("g.txt");
    ok(&["generate", "-v", "120", "-e", "200", "--weighted", "--seed", "3", "-o", s(&gen)]);
    let st = dir.path().join("st");
    ok(&["ingest", s(&gen), "--out", s(&st), "-k", "3"]);
    for algo in ["cc", "sssp", "pagerank"] {
        let base = ["run", s(&st), "-a", algo, "--source", "0", "--weighted"];
        let mem = report(&base);
        let mut sock_args = base.to_vec();
        sock_args.extend(["--transport", "socket"]);
        let sock = report(&sock_args);
        assert_eq!(mem["digest"], sock["digest"], "{algo}");
        assert_eq!(mem["supersteps"], sock["supersteps"]);
        assert_eq!(mem["messages"], sock["messages"]);
        assert_eq!(sock["transport"], "socket");
    }
}
