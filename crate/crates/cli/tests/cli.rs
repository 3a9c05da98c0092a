use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TINY: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 5\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 10 0\n3 0 10\n4 -10 0\n5 1 1\nEOF\n";

fn tsppc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsppc"))
        .args(args)
        .env("TSPPC_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes the tiny cloud and its children-central instance.
fn setup() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let tsp = dir.path().join("tiny.tsp");
    fs::write(&tsp, TINY).unwrap();
    let inst = dir.path().join("tiny.tsppc");
    let o = tsppc(&["gen", "--tsplib", p(&tsp), "--direction", "children", "-o", p(&inst)]);
    assert!(o.status.success(), "{o:?}");
    (dir, inst)
}

fn repo_data() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/tsplib"))
}

#[test]
fn solve_writes_both_tours_and_they_validate() {
    let (dir, inst) = setup();
    let tour = dir.path().join("t.tour");
    let o = tsppc(&["solve", "--instance", p(&inst), "--method", "both", "--tour-out", p(&tour)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("nn ") && out.contains("achci "), "{out}");
    for name in ["t.nn.tour", "t.achci.tour"] {
        let path = dir.path().join(name);
        let v = tsppc(&["validate", "--instance", p(&inst), "--tour", p(&path)]);
        assert_eq!(v.status.code(), Some(0), "{name}");
        assert!(stdout(&v).starts_with("feasible"));
    }
}

#[test]
fn validate_rejects_delivery_before_pickup() {
    let (dir, inst) = setup();
    // node 4 is the pickup for node 1
    let bad = dir.path().join("bad.tour");
    fs::write(&bad, "NAME : bad\nTYPE : TOUR\nDIMENSION : 6\nTOUR_SECTION\n0\n1\n3\n2\n4\n5\n-1\nEOF\n").unwrap();
    let o = tsppc(&["validate", "--instance", p(&inst), "--tour", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("node 1"), "{}", stdout(&o));
}

#[test]
fn exit_codes_for_usage_and_io_errors() {
    assert_eq!(tsppc(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(tsppc(&[]).status.code(), Some(2));
    let o = tsppc(&["solve", "--instance", "/nonexistent/x.tsppc"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    let dir = TempDir::new().unwrap();
    let junk = dir.path().join("junk.tsppc");
    fs::write(&junk, "NAME : x\nthis is not an instance\n").unwrap();
    assert_eq!(tsppc(&["solve", "--instance", p(&junk)]).status.code(), Some(3));
}

#[test]
fn exact_matches_or_beats_heuristics() {
    let (_dir, inst) = setup();
    let o = tsppc(&["exact", "--instance", p(&inst)]);
    assert!(o.status.success());
    let optimal: f64 = stdout(&o).split_whitespace().nth(1).unwrap().parse().unwrap();
    let s = stdout(&tsppc(&["solve", "--instance", p(&inst), "--method", "achci"]));
    let achci: f64 = s.lines().last().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(optimal <= achci);
    assert_eq!(tsppc(&["exact", "--instance", p(&inst), "--limit", "2"]).status.code(), Some(1));
}

#[test]
fn export_milp_writes_model_and_start() {
    let (dir, inst) = setup();
    let tour = dir.path().join("t.tour");
    assert!(tsppc(&["solve", "--instance", p(&inst), "--method", "nn", "--tour-out", p(&tour)]).status.success());
    let lp = dir.path().join("m.lp");
    let o = tsppc(&["export-milp", "--instance", p(&inst), "--warm-start", p(&tour), "-o", p(&lp)]);
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(&lp).unwrap();
    assert!(text.contains("Minimize") && text.contains("Binaries") && text.trim_end().ends_with("End"));
    let mst = fs::read_to_string(dir.path().join("m.mst")).unwrap();
    assert!(mst.lines().any(|l| l.starts_with("x_0_")));
}

#[test]
fn bench_writes_complete_csv() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::copy(repo_data().join("berlin52.tsp"), corpus.join("berlin52.tsp")).unwrap();
    fs::write(corpus.join("tiny.tsp"), TINY).unwrap();
    let csv = dir.path().join("out.csv");
    let o = tsppc(&["bench", "--tsplib-dir", p(&corpus), "--directions", "both", "--out", p(&csv)]);
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 4 + 1);
    assert_eq!(*lines.last().unwrap(), "#complete,4,,,,,,,");
    let berlin: Vec<&str> = lines.iter().filter(|l| l.starts_with("berlin52,")).copied().collect();
    assert_eq!(berlin.len(), 2);
    // costs in the CSV agree with solving the same instance directly
    let inst = dir.path().join("b.tsppc");
    let tsp = corpus.join("berlin52.tsp");
    assert!(tsppc(&["gen", "--tsplib", p(&tsp), "--direction", "children", "-o", p(&inst)]).status.success());
    let s = stdout(&tsppc(&["solve", "--instance", p(&inst)]));
    let cost = |name: &str| -> String {
        s.lines().rfind(|l| l.starts_with(name)).unwrap().split_whitespace().nth(1).unwrap().to_string()
    };
    let row = berlin.iter().find(|l| l.contains("children")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[3], cost("nn "));
    assert_eq!(fields[4], cost("achci "));
    assert!(fields[5].starts_with('-'), "children-central delta should be negative: {row}");
}

#[test]
fn bench_on_bad_input_leaves_no_csv() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(corpus.join("broken.tsp"), "NAME : b\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : GEO\n").unwrap();
    let csv = dir.path().join("out.csv");
    let o = tsppc(&["bench", "--tsplib-dir", p(&corpus), "--out", p(&csv)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!csv.exists());
}
