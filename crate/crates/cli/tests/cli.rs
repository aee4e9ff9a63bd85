use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn relflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relflow"))
        .args(args)
        .env_remove("RELFLOW_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn build_toy(dir: &Path) -> Output {
    relflow(&[
        "build",
        "--nodes",
        data("toy7_nodes.tsv").to_str().unwrap(),
        "--edges",
        data("toy7_edges.txt").to_str().unwrap(),
        "--keywords",
        data("toy7_keywords.tsv").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ])
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in [dir.to_path_buf(), dir.join("subnets")] {
        for entry in fs::read_dir(&sub).unwrap() {
            let path = entry.unwrap().path();
            if path.is_file() {
                files.push((path.clone(), fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn scaled(line: &str) -> Vec<i64> {
    line.trim()
        .split('\t')
        .skip(2)
        .map(|x| x.parse::<f64>().unwrap() as i64)
        .collect()
}

#[test]
fn build_writes_one_cache_per_keyword_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&build_toy(dir.path()));
    let first = snapshot(dir.path());
    let subnets: Vec<_> = first
        .iter()
        .filter(|(p, _)| p.extension().is_some_and(|e| e == "subnet"))
        .collect();
    assert_eq!(subnets.len(), 1);
    let header = String::from_utf8(subnets[0].1.clone()).unwrap();
    let maxwt: f64 = header
        .lines()
        .next()
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!((maxwt * 1000.0).floor(), 815.0);
    stdout(&build_toy(dir.path()));
    assert_eq!(snapshot(dir.path()), first);
}

#[test]
fn build_needs_keywords() {
    let dir = tempfile::tempdir().unwrap();
    let out = relflow(&[
        "build",
        "--nodes",
        data("toy7_nodes.tsv").to_str().unwrap(),
        "--edges",
        data("toy7_edges.txt").to_str().unwrap(),
        "--keywords",
        dir.path().join("missing.tsv").to_str().unwrap(),
        "--out",
        dir.path().join("cache").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!dir.path().join("cache/subnets").exists());
}

#[test]
fn score_reproduces_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&build_toy(dir.path()));
    let cache = dir.path().to_str().unwrap();
    let line = stdout(&relflow(&[
        "score",
        "--cache",
        cache,
        "--paper-scale",
        "http://toy/0",
        "http://toy/1",
    ]));
    assert_eq!(scaled(&line), vec![253, 0, 0, 0]);
    let line = stdout(&relflow(&[
        "score",
        "--cache",
        cache,
        "--paper-scale",
        "http://toy/2",
        "http://toy/6",
    ]));
    assert_eq!(scaled(&line), vec![0, 0, 1183, 0]);
    let out = relflow(&["score", "--cache", cache, "http://toy/0", "http://nowhere/"]);
    assert!(!out.status.success());
}

#[test]
fn score_reads_cache_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&build_toy(dir.path()));
    let out = Command::new(env!("CARGO_BIN_EXE_relflow"))
        .args(["score", "-d", "2", "-k", "1", "http://toy/5", "http://toy/6"])
        .env("RELFLOW_CACHE", dir.path())
        .output()
        .unwrap();
    let line = stdout(&out);
    assert!(line.starts_with("http://toy/5\thttp://toy/6\t"));
}

#[test]
fn rank_lists_related_pages() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&build_toy(dir.path()));
    let cache = dir.path().to_str().unwrap();
    let text = stdout(&relflow(&[
        "rank",
        "--cache",
        cache,
        "--relation",
        "fact",
        "http://toy/2",
    ]));
    assert!(text.starts_with("1\thttp://toy/5\t"), "{text}");
    let text = stdout(&relflow(&[
        "rank",
        "--cache",
        cache,
        "--relation",
        "surf-forward",
        "http://toy/6",
    ]));
    assert!(text.is_empty());
    let text = stdout(&relflow(&[
        "--jobs",
        "2",
        "rank",
        "--cache",
        cache,
        "--relation",
        "seek",
        "-n",
        "50",
        "http://toy/0",
    ]));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn simrank_baseline_dump() {
    let text = stdout(&relflow(&[
        "baseline",
        "simrank",
        "--nodes",
        data("toy7_nodes.tsv").to_str().unwrap(),
        "--edges",
        data("toy7_edges.txt").to_str().unwrap(),
    ]));
    assert!(text.lines().any(|l| l == "2\t5\t0.5"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pagesim.tsv");
    stdout(&relflow(&[
        "baseline",
        "pagesim",
        "--nodes",
        data("toy7_nodes.tsv").to_str().unwrap(),
        "--edges",
        data("toy7_edges.txt").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(
        fs::read_to_string(out)
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("6\t6\t"))
            .count(),
        1
    );
}

#[test]
fn eval_table() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.tsv");
    let judgments = dir.path().join("judgments.tsv");
    fs::write(&runs, "http://t/\tflow\t1\thttp://a/\nhttp://t/\tflow\t2\thttp://b/\n").unwrap();
    fs::write(
        &judgments,
        "http://t/\thttp://a/\trelevant\t5\t5\nhttp://t/\thttp://b/\trelevant\t3\t3\n",
    )
    .unwrap();
    let args = [
        "eval",
        "--runs",
        runs.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--r-max",
        "2",
    ];
    let text = stdout(&relflow(&args));
    assert_eq!(text, "flow\trelevant\t1\t1\nflow\trelevant\t2\t1\n");
    fs::write(&runs, "").unwrap();
    assert!(!relflow(&args).status.success());
}
