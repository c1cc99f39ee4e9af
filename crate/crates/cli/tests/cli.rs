use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL_MAP: &str = "type octile\nheight 6\nwidth 8\nmap\n........\n.@@.....\n.@@..@..\n.....@..\n..@.....\n........\n";

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn ehlstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehlstar"))
        .args(args)
        .output()
        .expect("failed to run ehlstar")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_map(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("small.map");
    std::fs::write(&p, SMALL_MAP).unwrap();
    p
}

fn build(map: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["build", "--map", path_str(map), "--out", path_str(out)];
    args.extend_from_slice(extra);
    ehlstar(&args)
}

#[test]
fn example_map_answers_fourteen() {
    let dir = TempDir::new().unwrap();
    let idx = dir.path().join("ex.ehl");
    let map = data("example3.poly");
    assert!(build(&map, &idx, &["--budget-percent", "5"])
        .status
        .success());
    let queries = data("example3.queries");
    let o = ehlstar(&[
        "query",
        "--index",
        path_str(&idx),
        "--queries",
        path_str(&queries),
        "--repeat",
        "1",
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "14");
}

#[test]
fn inline_pair_with_path() {
    let dir = TempDir::new().unwrap();
    let idx = dir.path().join("ex.ehl");
    let map = data("example3.poly");
    assert!(build(&map, &idx, &[]).status.success());
    let pair = std::fs::read_to_string(data("example3.queries")).unwrap();
    let mut args = vec![
        "query",
        "--index",
        path_str(&idx),
        "--path",
        "--repeat",
        "1",
        "--pair",
    ];
    args.extend(pair.split_whitespace());
    let o = ehlstar(&args);
    assert!(o.status.success(), "{o:?}");
    let line = stdout(&o);
    let (dist, points) = line.trim().split_once('\t').unwrap();
    assert_eq!(dist, "14");
    assert!(points.contains("(10 12)"), "{points}");
}

#[test]
fn mismatched_map_is_refused() {
    let dir = TempDir::new().unwrap();
    let idx = dir.path().join("small.ehl");
    assert!(build(&small_map(&dir), &idx, &[]).status.success());
    let o = ehlstar(&[
        "query",
        "--index",
        path_str(&idx),
        "--map",
        path_str(&data("example3.poly")),
        "--pair",
        "0.5",
        "0.5",
        "7.5",
        "5.5",
    ]);
    assert!(!o.status.success());
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("does not match"),
        "{o:?}"
    );
}

#[test]
fn empty_query_file_is_fine() {
    let dir = TempDir::new().unwrap();
    let map = small_map(&dir);
    let idx = dir.path().join("small.ehl");
    assert!(build(&map, &idx, &[]).status.success());
    let q = dir.path().join("empty.txt");
    std::fs::write(&q, "# nothing\n").unwrap();
    let o = ehlstar(&[
        "query",
        "--index",
        path_str(&idx),
        "--map",
        path_str(&map),
        "--queries",
        path_str(&q),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn full_budget_does_not_merge() {
    let dir = TempDir::new().unwrap();
    let o = build(
        &small_map(&dir),
        &dir.path().join("a.ehl"),
        &["--budget-percent", "100"],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(
        out.contains("merges: 0") && out.contains("outcome: fit"),
        "{out}"
    );
}

#[test]
fn builds_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let map = small_map(&dir);
    let (a, b) = (dir.path().join("a.ehl"), dir.path().join("b.ehl"));
    assert!(build(&map, &a, &["--budget-percent", "30"])
        .status
        .success());
    assert!(build(&map, &b, &["--budget-percent", "30"])
        .status
        .success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn tiny_budget_overflows_with_exit_two() {
    let dir = TempDir::new().unwrap();
    let o = build(
        &small_map(&dir),
        &dir.path().join("a.ehl"),
        &["--budget-percent", "0.5"],
    );
    assert_eq!(o.status.code(), Some(2), "{o:?}");
    assert!(
        stdout(&o).contains("outcome: single_region_overflow"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn verify_passes_and_accepts_zero_queries() {
    let dir = TempDir::new().unwrap();
    let idx = dir.path().join("a.ehl");
    assert!(build(&small_map(&dir), &idx, &["--budget-percent", "20"])
        .status
        .success());
    for n in ["0", "200"] {
        let o = ehlstar(&["verify", "--index", path_str(&idx), "--n", n]);
        assert!(o.status.success(), "{o:?}");
        assert!(
            stdout(&o).contains(&format!("{n}/{n} queries match")),
            "{}",
            stdout(&o)
        );
    }
}

#[test]
fn cluster_queries_write_a_sidecar() {
    let dir = TempDir::new().unwrap();
    let map = dir.path().join("open.map");
    let rows = vec!["..........................."; 30].join("\n");
    std::fs::write(
        &map,
        format!("type octile\nheight 30\nwidth 27\nmap\n{rows}\n"),
    )
    .unwrap();
    let out = dir.path().join("q.txt");
    let args = [
        "gen-queries",
        "--map",
        path_str(&map),
        "--mode",
        "cluster-2",
        "--n",
        "50",
        "--adherence",
        "80",
    ];
    let o = ehlstar(&[&args[..], &["--out", path_str(&out)]].concat());
    assert!(o.status.success(), "{o:?}");
    let lines = std::fs::read_to_string(&out).unwrap();
    assert_eq!(lines.lines().count(), 50);
    let sidecar = dir.path().join("q.txt.clusters");
    let spec = std::fs::read_to_string(&sidecar).unwrap();
    assert_eq!(spec.lines().filter(|l| !l.starts_with('#')).count(), 2);

    // reusing the sidecar gives the same rectangles
    let again = dir.path().join("r.txt");
    let reuse = ["--clusters", path_str(&sidecar), "--out", path_str(&again)];
    assert!(ehlstar(&[&args[..], &reuse].concat()).status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("r.txt.clusters")).unwrap(),
        spec
    );
}

#[test]
fn bench_writes_csv_rows() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = ehlstar(&[
        "bench",
        "--map",
        path_str(&small_map(&dir)),
        "--budgets",
        "100,20",
        "--n",
        "20",
        "--repeat",
        "1",
        "--verify",
        "20",
        "--csv",
        path_str(&csv),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("map,budget_percent,mode,outcome,memory_units"));
    assert!(
        lines[2].ends_with(",1") || lines[2].ends_with(",1.0"),
        "{}",
        lines[2]
    );
}

#[test]
fn visualize_writes_svg() {
    let dir = TempDir::new().unwrap();
    let idx = dir.path().join("a.ehl");
    assert!(build(&small_map(&dir), &idx, &["--budget-percent", "40"])
        .status
        .success());
    let svg = dir.path().join("a.svg");
    assert!(ehlstar(&[
        "visualize",
        "--index",
        path_str(&idx),
        "--out",
        path_str(&svg)
    ])
    .status
    .success());
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn workload_mode_needs_a_workload() {
    let dir = TempDir::new().unwrap();
    let o = build(
        &small_map(&dir),
        &dir.path().join("a.ehl"),
        &["--budget-percent", "20", "--mode", "workload"],
    );
    assert!(!o.status.success());
}

#[test]
fn workload_build_from_query_history() {
    let dir = TempDir::new().unwrap();
    let map = small_map(&dir);
    let history = dir.path().join("history.txt");
    let o = ehlstar(&[
        "gen-queries",
        "--map",
        path_str(&map),
        "--n",
        "300",
        "--out",
        path_str(&history),
    ]);
    assert!(o.status.success(), "{o:?}");
    let idx = dir.path().join("w.ehl");
    let o = build(
        &map,
        &idx,
        &[
            "--budget-percent",
            "20",
            "--mode",
            "workload",
            "--workload",
            path_str(&history),
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let o = ehlstar(&[
        "verify",
        "--index",
        path_str(&idx),
        "--queries",
        path_str(&history),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("300/300"), "{}", stdout(&o));
}
