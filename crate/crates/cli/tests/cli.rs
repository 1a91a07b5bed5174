use std::path::Path;
use std::process::{Command, Output};

use quiverlax::fuchsian::signature_distance;
use quiverlax::io;
use quiverlax::weylops::WeylOp;
use quiverlax::AffineType;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quiverlax")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn roots_report_counts() {
    let o = run(&["roots", "--type", "E8"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("240 roots / 120 hyperplanes"));
    let roots: io::RootsJson = io::parse_json(&stdout(&o)).unwrap();
    assert_eq!((roots.count, roots.block_triangular, roots.coincidence), (240, 202, 38));

    let o = run(&["roots", "--type", "d4", "--format", "csv"]);
    assert!(stderr(&o).contains("24 roots"));
    assert_eq!(stdout(&o).lines().count(), 13);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("lambda.json");
    std::fs::write(&bad, r#"{"version": 1, "type": "E6", "lambda": {"0": ["1/0", "0"]}}"#).unwrap();
    assert_eq!(run(&["regular", path(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["regular", path(&dir.path().join("missing.json"))]).status.code(), Some(2));
    assert_eq!(run(&["roots", "--type", "A3"]).status.code(), Some(2));
    assert_eq!(run(&["sample"]).status.code(), Some(2));
}

#[test]
fn regular_lists_violated_roots() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("lambda.json");
    let entries: Vec<String> = (0..5)
        .map(|k| format!("\"{k}\": [\"{}\", \"0\"]", if k == 1 { "0" } else { "1/3" }))
        .collect();
    std::fs::write(&f, format!("{{\"version\": 1, \"type\": \"D4\", \"lambda\": {{{}}}}}", entries.join(", "))).unwrap();
    let o = run(&["regular", path(&f)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["regular"], false);
    assert!(report["violated"].as_array().unwrap().contains(&serde_json::json!([0, 1, 0, 0, 0])));
}

#[test]
fn sample_is_reproducible() {
    let a = run(&["sample", "--type", "E6", "--seed", "11"]);
    let b = run(&["sample", "--type", "E6", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr(&a).contains("sum check: OK"));
    let (sys, _) = io::system_from_json(&stdout(&a)).unwrap();
    assert_eq!(sys.ty, AffineType::E6);
    assert!(sys.residues.iter().all(|r| r.shape() == (3, 3)));
    assert_eq!(io::system_to_json(&sys, None), stdout(&a));
}

#[test]
fn apply_reports_the_involution() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    let once = dir.path().join("once.json");
    let twice = dir.path().join("twice.json");
    assert!(run(&["sample", "--type", "D4", "--seed", "4", "--out", path(&s)]).status.success());
    assert!(run(&["apply", path(&s), "--word", "0", "--out", path(&once)]).status.success());
    let o = run(&["apply", path(&once), "--word", "0", "--out", path(&twice)]);
    assert!(o.status.success());
    let (_, word) = io::system_from_json(&std::fs::read_to_string(&twice).unwrap()).unwrap();
    assert_eq!(word.unwrap().0, vec![WeylOp::Central, WeylOp::Central]);

    let o = run(&["apply", path(&s), "--word", "0,0"]);
    let line = stderr(&o);
    let d: f64 = line
        .lines()
        .find_map(|l| l.strip_prefix("signature distance to input: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn degenerate_systems_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    assert!(run(&["sample", "--type", "D4", "--seed", "2", "--out", path(&s)]).status.success());
    let mut file: io::SystemFile = io::parse_json(&std::fs::read_to_string(&s).unwrap()).unwrap();
    file.residues[0] = vec![vec![[0.0, 0.0]; 2]; 2];
    let z = dir.path().join("z.json");
    std::fs::write(&z, io::pretty(&file)).unwrap();
    let o = run(&["apply", path(&z), "--word", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("rank"));
}

#[test]
fn orbit_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    assert!(run(&["sample", "--type", "D4", "--seed", "1", "--out", path(&s)]).status.success());

    let still = run(&["orbit", path(&s), "--mu", "[0,0,0,0,0]", "--steps", "3"]);
    let rows = io::parse_orbit_csv(&stdout(&still)).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.lambda == rows[0].lambda));

    let a = run(&["orbit", path(&s), "--mu", "[0,1,0,0,-1]", "--steps", "4"]);
    let b = run(&["orbit", path(&s), "--mu", "[0,1,0,0,-1]", "--steps", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = io::parse_orbit_csv(&stdout(&a)).unwrap();
    assert_eq!(io::orbit_csv(&rows), stdout(&a));
    for w in rows.windows(2) {
        assert!(signature_distance(&w[0].signature, &w[1].signature) > 1e-6);
    }

    let j = run(&["orbit", path(&s), "--mu", "[0,1,0,0,-1]", "--steps", "4", "--format", "json"]);
    let (_, mu, back) = io::parse_orbit_json(&stdout(&j)).unwrap();
    assert_eq!(mu, vec![0, 1, 0, 0, -1]);
    assert_eq!(io::orbit_csv(&back), stdout(&a));

    assert_eq!(run(&["orbit", path(&s), "--mu", "[1,0,0,0,0]"]).status.code(), Some(2));
    assert_eq!(run(&["orbit", path(&s), "--mu", "one"]).status.code(), Some(2));
}

#[test]
fn sakai_orbit_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    std::fs::write(&c, r#"["1/2", "-3", "5/7", "2/9", "11/4", "-8/5", "1/3", "7/6"]"#).unwrap();
    let a = run(&["sakai", path(&c), "--mu", "[1,0,0,0,0,0,0,-1]", "--steps", "5"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let rows = io::parse_sakai_csv(&stdout(&a)).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(io::sakai_csv(&rows), stdout(&a));
    let j = run(&["sakai", path(&c), "--mu", "[1,0,0,0,0,0,0,-1]", "--steps", "5", "--format", "json"]);
    assert_eq!(io::parse_sakai_json(&stdout(&j)).unwrap().rows, rows);

    std::fs::write(&c, r#"["1/2", "1/2", "0", "1", "2", "3"]"#).unwrap();
    let w = run(&["sakai", path(&c), "--mu", "[0,0,0,0,0,0]", "--steps", "1"]);
    assert!(stderr(&w).contains("coincident(1 2), root E1-E2"));
    std::fs::write(&c, r#"["1/2", "x"]"#).unwrap();
    assert_eq!(run(&["sakai", path(&c), "--mu", "[0,0]"]).status.code(), Some(2));
}
