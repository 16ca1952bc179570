use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isodimer"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn honeycomb_probabilities_are_one_third() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["probs", "--lattice", "honeycomb", "--extent", "3", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("probs.csv")).unwrap();
    assert!(text.starts_with("# {"));
    let rows = data_rows(&text);
    assert!(!rows.is_empty());
    for row in rows {
        let p: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-10, "{row}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["sample", "--extent", "3", "2", "--samples", "20", "--seed", "11", "--threads", "1"], d.path());
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| {
        // the header records the output directory, which differs
        let s = std::fs::read_to_string(d.path().join("samples.jsonl")).unwrap();
        s.lines().skip(1).map(str::to_owned).collect::<Vec<_>>()
    };
    assert_eq!(read(&a), read(&b));
    let c = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--extent", "3", "2", "--samples", "20", "--seed", "11", "--threads", "2"], c.path());
    assert!(o.status.success());
    assert_eq!(read(&a), read(&c));
}

#[test]
fn config_file_is_merged_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "lattice = \"square\"\nextent = [4, 4]\n").unwrap();
    let o = run(&["probs", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("probs.csv")).unwrap();
    for row in data_rows(&text) {
        let p: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!((p - 0.25).abs() < 1e-10);
    }
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["build", "--extent", "0", "3"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["build", "--lattice", "hexagonal"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn odd_moment_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["moments", "--shape", "flat-hexagon", "--extent", "12", "12", "--mesh", "0.0625", "--k", "3", "--samples", "300"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("moments.csv")).unwrap();
    let row = data_rows(&text).into_iter().find(|r| r.starts_with("moment,k=3,")).unwrap();
    let f: Vec<f64> = row.split(',').skip(2).map(|x| x.parse().unwrap()).collect();
    let (value, se, target) = (f[0], f[1], f[2]);
    assert_eq!(target, 0.0);
    assert!(value.abs() <= 3.0 * se, "{row}");
}

#[test]
fn validate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--lattice", "lozenge-diag", "--extent", "3", "2"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("validation.json")).unwrap()).unwrap();
    assert_eq!(v["header"]["command"], "validate");
    assert_eq!(v["report"]["passed"], true);
}
