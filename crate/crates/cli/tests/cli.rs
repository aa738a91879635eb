use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resilience_core::{generators, Graph};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resilience"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_edges(path: &Path, g: &Graph) {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).unwrap());
    for (u, v) in g.edges() {
        writeln!(f, "{} {}", g.external_id(u).0, g.external_id(v).0).unwrap();
    }
}

/// Data lines of a CSV written by the tool, after checking its header.
fn csv_lines(path: &Path, command: &str) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# resilience seed="), "{first}");
    assert!(first.ends_with(&format!("command={command}")), "{first}");
    lines.skip(1).map(str::to_string).collect()
}

#[test]
fn ingest_canonicalizes_six_edges() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("six.txt");
    std::fs::write(&input, "1 2\n2 3\n3 1\n3 4\n4 5\n5 4\n").unwrap();
    let out = dir.path().join("out");
    let stdout = ok(&["ingest", "--input", s(&input), "--out", s(&out), "--seed", "3"]);
    assert!(stdout.contains("n=5 m=5"), "{stdout}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n"], 5);
    assert_eq!(summary["m"], 5);
    assert_eq!(summary["seed"], 3);
    assert!(out.join("graph.clg").is_file());

    // The cache is picked up by magic and gives the same answer.
    let again = ok(&["kcore", "--input", s(&out.join("graph.clg")), "--out", s(&out)]);
    assert!(again.contains("k_max=2"), "{again}");
}

#[test]
fn empty_input_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.txt");
    std::fs::write(&input, "").unwrap();
    let stdout = ok(&["ingest", "--input", s(&input), "--out", s(&dir.path().join("o"))]);
    assert!(stdout.contains("n=0 m=0"), "{stdout}");
}

#[test]
fn malformed_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.txt");
    std::fs::write(&input, "1 2\n2 3\n3 oops\n4 5\n").unwrap();
    let out = run(&["ingest", "--input", s(&input), "--out", s(&dir.path().join("o"))]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn unknown_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["kcore", "--input", "x", "--out", s(dir.path()), "--frobnicate"]);
    assert!(!out.status.success());
}

fn fixtures(dir: &Path) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let planted = dir.join("planted.txt");
    write_edges(&planted, &generators::planted_core(&mut rng, 20, 300, 5));
    let cycle = dir.join("cycle.txt");
    write_edges(&cycle, &generators::cycle(10));
    (planted, cycle)
}

#[test]
fn resilience_reports_planted_core() {
    let dir = tempfile::tempdir().unwrap();
    let (planted, _) = fixtures(dir.path());
    let out = dir.path().join("o");
    let stdout = ok(&["resilience", "--input", s(&planted), "--out", s(&out)]);
    assert!(stdout.contains("planted k_max=19"), "{stdout}");
    let rows = csv_lines(&out.join("catastrophic.csv"), "resilience");
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("planted,0.2,") && rows[0].ends_with(",19"), "{}", rows[0]);
    assert_eq!(csv_lines(&out.join("coreness_planted.csv"), "resilience").len(), 320);
}

#[test]
fn cycle_ccdf_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cycle) = fixtures(dir.path());
    let out = dir.path().join("o");
    let stdout = ok(&["kcore", "--input", s(&cycle), "--out", s(&out)]);
    assert!(stdout.contains("k_max=2"));
    assert_eq!(
        csv_lines(&out.join("ccdf.csv"), "kcore"),
        ["0,10,1.0", "1,10,1.0", "2,10,1.0"]
    );
    ok(&["resilience", "--input", s(&cycle), "--out", s(&out), "--exceed"]);
    assert_eq!(
        csv_lines(&out.join("resilience.csv"), "resilience"),
        ["cycle,0,10,1.0", "cycle,1,10,1.0", "cycle,2,0,0.0", "cycle,3,0,0.0"]
    );
}

#[test]
fn comparison_table_concatenates_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let (planted, cycle) = fixtures(dir.path());
    let mut expected = Vec::new();
    for (i, input) in [&planted, &cycle].into_iter().enumerate() {
        let out = dir.path().join(format!("single{i}"));
        ok(&["resilience", "--input", s(input), "--out", s(&out), "--survival", "0.5", "0.2"]);
        expected.extend(csv_lines(&out.join("resilience.csv"), "resilience"));
    }
    let out = dir.path().join("both");
    ok(&[
        "resilience", "--input", s(&planted), s(&cycle), "--out", s(&out), "--survival", "0.5", "0.2",
    ]);
    let merged = csv_lines(&out.join("resilience.csv"), "resilience");
    assert_eq!(merged, expected);
    assert_eq!(merged.iter().filter(|l| l.starts_with("planted,")).count(), 21);
    assert_eq!(merged.iter().filter(|l| l.starts_with("cycle,")).count(), 4);
    assert_eq!(csv_lines(&out.join("catastrophic.csv"), "resilience").len(), 4);
}

#[test]
fn report_lists_every_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["report", "--out", s(dir.path())]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    for name in [
        "summary.json", "plfit.csv", "resilience.csv", "catastrophic.csv", "atrisk.csv", "unravel.csv", "fit.json",
    ] {
        assert!(stderr.contains(name), "{name} not listed: {stderr}");
    }
}

fn pipeline(input: &Path, out: &Path, seed: &str) {
    let graph = out.join("graph.clg");
    let g = s(&graph);
    let o = s(out);
    ok(&["ingest", "--input", s(input), "--out", o, "--seed", seed]);
    ok(&["kcore", "--input", g, "--out", o, "--seed", seed, "--bin-width", "5"]);
    ok(&["resilience", "--input", g, "--out", o, "--seed", seed, "--survival", "0.5", "0.2"]);
    ok(&["equilibrium", "--input", g, "--out", o, "--seed", seed, "--c", "5", "--b", "1"]);
    ok(&["plfit", "--input", g, "--out", o, "--seed", seed, "--trials", "20", "--emit-trials"]);
    ok(&["timeslice", "--input", g, "--out", o, "--seed", seed, "--width", "1000"]);
    ok(&["atrisk", "--input", g, "--out", o, "--seed", seed, "--width", "1000"]);
    ok(&["unravel", "--input", g, "--out", o, "--seed", seed, "--k0", "2", "--rate", "1", "--horizon", "8"]);

    // Observed series: the unravel prediction, slightly perturbed.
    let observed = out.join("observed.csv");
    let mut text = String::from("t,value\n");
    for (i, line) in csv_lines(&out.join("unravel.csv"), "unravel").iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let wobble = if i % 2 == 0 { 1.01 } else { 0.99 };
        text += &format!("{},{}\n", fields[0], fields[3].parse::<f64>().unwrap() * wobble);
    }
    std::fs::write(&observed, text).unwrap();
    ok(&[
        "fit", "--input", g, "--out", o, "--seed", seed, "--k0", "2", "--rate", "1", "--observed", s(&observed),
    ]);
    ok(&["report", "--out", o, "--seed", seed]);
}

#[test]
fn full_pipeline_is_valid_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let g = generators::planted_core(&mut rng, 30, 9970, 6);
    let mut ids: Vec<u64> = (0..10_000).collect();
    ids[30..].shuffle(&mut rng);
    let input = dir.path().join("synthetic.txt");
    write_edges(&input, &generators::with_external_ids(&g, &ids));

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    pipeline(&input, &a, "99");
    pipeline(&input, &b, "99");

    let report_a = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(report_a, std::fs::read(b.join("report.json")).unwrap());
    for entry in std::fs::read_dir(&a).unwrap() {
        let path = entry.unwrap().path();
        let other = b.join(path.file_name().unwrap());
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&other).unwrap(), "{}", path.display());
    }

    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&report_a).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(report["summary"]["n"], 10_000);
    assert_eq!(report["seed"], 99);
    assert!(report["fit"]["r_squared"].as_f64().unwrap() > 0.9);
    assert!(report["sources"].as_array().unwrap().iter().all(|s| s["seed"] == 99));

    // A different seed only changes the stochastic parts.
    let c = dir.path().join("c");
    pipeline(&input, &c, "100");
    assert_eq!(
        std::fs::read_to_string(a.join("coreness.csv")).unwrap().lines().skip(1).collect::<Vec<_>>(),
        std::fs::read_to_string(c.join("coreness.csv")).unwrap().lines().skip(1).collect::<Vec<_>>()
    );
    assert_ne!(
        std::fs::read(a.join("plfit_trials.csv")).unwrap(),
        std::fs::read(c.join("plfit_trials.csv")).unwrap()
    );
}

#[test]
fn schedule_from_references_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (planted, _) = fixtures(dir.path());
    let o = dir.path().join("o");
    ok(&["unravel", "--input", s(&planted), "--out", s(&o), "--ref-a", "0:3", "--ref-b", "4:11", "--horizon", "4"]);
    let by_ref = csv_lines(&o.join("unravel.csv"), "unravel");
    ok(&["unravel", "--input", s(&planted), "--out", s(&o), "--c", "5", "--b", "2", "--rate", "2", "--horizon", "4"]);
    assert_eq!(by_ref, csv_lines(&o.join("unravel.csv"), "unravel"));
    assert!(by_ref[0].starts_with("0.0,3,") && by_ref[4].starts_with("4.0,11,"), "{by_ref:?}");
    let bad = run(&["unravel", "--input", s(&planted), "--out", s(&o), "--rate", "1"]);
    assert!(!bad.status.success());
}
