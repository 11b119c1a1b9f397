//! End-to-end tests of the `treepack` binary: exit codes, output
//! formats, byte-for-byte determinism, and the bundled fixtures.

use std::path::Path;
use std::process::{Command, Output};

fn treepack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treepack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("output is UTF-8")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_str()
        .expect("fixture paths are UTF-8")
        .to_string()
}

#[test]
fn bundled_fixture_verifies_with_exit_zero() {
    let out = treepack(&[
        "verify",
        "--graph", &fixture("k3.graph"),
        "--trees", &fixture("k3_trees.json"),
        "--cert", &fixture("k3_cert.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("\"verdict\": \"pass\""), "unexpected output: {text}");
}

#[test]
fn tampered_certificate_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad_cert.json");
    let cert = std::fs::read_to_string(fixture("k3_cert.json")).unwrap();
    // Reroute one image so two trees claim the same host edge.
    std::fs::write(&bad, cert.replace("[1, 2]", "[1, 0]")).unwrap();
    let out = treepack(&[
        "verify",
        "--graph", &fixture("k3.graph"),
        "--trees", &fixture("k3_trees.json"),
        "--cert", bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("\"verdict\": \"fail\""));
}

#[test]
fn pack_exact_reports_mismatched_edge_counts() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("short.json");
    std::fs::write(
        &trees,
        r#"{ "trees": [ { "id": 0, "n": 2, "edges": [[0, 1]], "roots": [0] } ] }"#,
    )
    .unwrap();
    let out = treepack(&[
        "pack-exact",
        "--mode", "decompose",
        "--graph", &fixture("k3.graph"),
        "--trees", trees.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout_of(&out);
    assert!(text.contains("\"reason\": \"edge-count\""), "unexpected output: {text}");
    assert!(text.contains("\"have\": 1"));
    assert!(text.contains("\"need\": 3"));
}

#[test]
fn bench_runs_fifty_instances_and_all_pass() {
    let out = treepack(&["bench", "gl", "--n", "8", "--instances", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# {\"argv\""));
    assert_eq!(lines[1], "instance,seed,n,m,outcome,restarts,verdict");
    let rows = &lines[2..];
    assert_eq!(rows.len(), 50);
    for (i, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], i.to_string());
        assert_eq!(cols[1], (1 + i as u64).to_string());
        assert_eq!(cols[6], "pass", "instance {i} did not pass: {row}");
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["gen-graph", "--kind", "gnp", "--n", "100", "--p", "0.5", "--seed", "9"];
    let a = treepack(&args);
    let b = treepack(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = treepack(&["gen-graph", "--kind", "gnp", "--n", "100", "--p", "0.5", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bench_output_is_deterministic_across_runs() {
    let args = ["bench", "gl", "--n", "7", "--instances", "8", "--seed", "4"];
    let a = treepack(&args);
    let b = treepack(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(treepack(&["gen-graph", "--kind", "complete", "--n", "5", "--bogus"]).status.code(), Some(2));
    assert_eq!(treepack(&["no-such-command"]).status.code(), Some(2));
    // Parameter validation beyond clap: regular graphs need n·d even.
    assert_eq!(treepack(&["gen-graph", "--kind", "regular", "--n", "7", "--d", "3"]).status.code(), Some(2));
    // Help is not an error.
    assert_eq!(treepack(&["--help"]).status.code(), Some(0));
}

#[test]
fn golden_complete_graph_csv() {
    let out = treepack(&["gen-graph", "--kind", "complete", "--n", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let expected = concat!(
        "# {\"argv\":[\"gen-graph\",\"--kind\",\"complete\",\"--n\",\"5\",\"--format\",\"csv\"],",
        "\"seed\":0,\"version\":\"0.1.0\"}\n",
        "5 10\n",
        "0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n",
    );
    assert_eq!(stdout_of(&out), expected);
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let piped = treepack(&["gen-graph", "--kind", "complete", "--n", "6", "--format", "csv"]);
    let filed = treepack(&[
        "gen-graph", "--kind", "complete", "--n", "6", "--format", "csv",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(filed.status.code(), Some(0));
    assert!(filed.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
}

#[test]
fn walk_embed_reports_map_or_capacity_failure() {
    let ok = treepack(&["walk-embed", "--ell", "5", "--m", "30", "--n", "60", "--seed", "2"]);
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&ok.stderr));
    let text = stdout_of(&ok);
    assert!(text.contains("\"outcome\": \"embedded\""));
    assert!(text.contains("\"map\""));
    // A nine-leaf star: the leaves land in the two clusters adjacent
    // to the centre's, so one cluster always takes at least five and
    // capacity four fails every attempt.
    let dir = tempfile::tempdir().unwrap();
    let star = dir.path().join("star.json");
    std::fs::write(
        &star,
        r#"{ "trees": [ { "id": 0, "n": 10,
            "edges": [[0,1],[0,2],[0,3],[0,4],[0,5],[0,6],[0,7],[0,8],[0,9]],
            "roots": [0] } ] }"#,
    )
    .unwrap();
    let over = treepack(&[
        "walk-embed", "--ell", "3", "--m", "4",
        "--trees", star.to_str().unwrap(), "--seed", "2",
    ]);
    assert_eq!(over.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&over.stderr));
    assert!(stdout_of(&over).contains("\"outcome\": \"capacity-failure\""));
    // Even cycle lengths are a parameter error, not a failure.
    let even = treepack(&["walk-embed", "--ell", "4", "--m", "10", "--n", "10"]);
    assert_eq!(even.status.code(), Some(2));
}

#[test]
fn cycle_decomp_covers_a_clique() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k9.csv");
    assert_eq!(
        treepack(&[
            "gen-graph", "--kind", "complete", "--n", "9", "--format", "csv",
            "--out", graph.to_str().unwrap(),
        ])
        .status
        .code(),
        Some(0)
    );
    let out = treepack(&["cycle-decomp", "--graph", graph.to_str().unwrap(), "--r", "3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["outcome"], "decomposed");
    assert_eq!(v["leftover"]["m"], 0);
    let cycles = v["cycles"].as_array().unwrap();
    let covered: usize = cycles.iter().map(|c| c.as_array().unwrap().len()).sum();
    assert_eq!(covered, 36);
}

#[test]
fn orient_emits_an_out_regular_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k7.csv");
    assert_eq!(
        treepack(&[
            "gen-graph", "--kind", "complete", "--n", "7", "--format", "csv",
            "--out", graph.to_str().unwrap(),
        ])
        .status
        .code(),
        Some(0)
    );
    let out = treepack(&["orient", "--graph", graph.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["dbar"], 3);
    assert_eq!(v["arcs"].as_array().unwrap().len(), 21);
    // A path on 3 vertices has no orientation with equal out-degrees.
    let path = dir.path().join("p3.txt");
    std::fs::write(&path, "3 2\n0 1\n1 2\n").unwrap();
    let bad = treepack(&["orient", "--graph", path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout_of(&bad).contains("\"outcome\": \"error\""));
}

#[test]
fn diagnose_regular_pair_reads_vertex_lists() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k44.txt");
    std::fs::write(
        &graph,
        "8 16\n0 4\n0 5\n0 6\n0 7\n1 4\n1 5\n1 6\n1 7\n2 4\n2 5\n2 6\n2 7\n3 4\n3 5\n3 6\n3 7\n",
    )
    .unwrap();
    let out = treepack(&[
        "diagnose",
        "--graph", graph.to_str().unwrap(),
        "--check", "regular-pair",
        "--part-a", "0,1,2,3",
        "--part-b", "4,5,6,7",
        "--d", "1.0",
        "--epsilon", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_of(&out).contains("\"verdict\": \"pass\""));
}

#[test]
fn heuristic_packer_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k11.csv");
    let trees = dir.path().join("t11.json");
    let run = dir.path().join("run.json");
    for args in [
        vec!["gen-graph", "--kind", "complete", "--n", "11", "--format", "csv",
             "--out", graph.to_str().unwrap()],
        vec!["gen-trees", "--kind", "gl", "--n", "11", "--seed", "5",
             "--out", trees.to_str().unwrap()],
        vec!["pack-heuristic", "--graph", graph.to_str().unwrap(),
             "--trees", trees.to_str().unwrap(), "--seed", "5",
             "--out", run.to_str().unwrap()],
    ] {
        let out = treepack(&args);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    // The packer's whole output doubles as a certificate file.
    let out = treepack(&[
        "verify",
        "--graph", graph.to_str().unwrap(),
        "--trees", trees.to_str().unwrap(),
        "--cert", run.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("\"verdict\": \"pass\""));
}
