use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperwander")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Ingests the desk corpus into `dir` and returns the KB path.
fn desk_kb(dir: &Path) -> PathBuf {
    let out = dir.join("desk.kb");
    let o = run(&["ingest", "--triples", p(&fixture("desk_corpus.csv")), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn ingest_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("desk.kb");
    let o = run(&["ingest", "--triples", p(&fixture("desk_corpus.csv")), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("400 records: 400 added"), "{}", stdout(&o));
    let kb = fs::read_to_string(&out).unwrap();
    assert!(kb.starts_with("% hyperwander-kb v1\n"));
    assert_eq!(kb.lines().filter(|l| !l.starts_with('%')).count(), 400);
}

#[test]
fn ingest_malformed_fails_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let triples = dir.path().join("bad.csv");
    fs::write(&triples, "IsA,dog,animal\nonly,two\nHasA,dog,tail\n").unwrap();
    let out = dir.path().join("bad.kb");
    let strict = run(&["ingest", "--triples", p(&triples), "--out", p(&out)]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stderr(&strict).contains("error"), "{}", stderr(&strict));
    let lenient = run(&["ingest", "--triples", p(&triples), "--out", p(&out), "--skip-bad"]);
    assert_eq!(lenient.status.code(), Some(0), "{}", stderr(&lenient));
    assert!(stdout(&lenient).contains("2 added"), "{}", stdout(&lenient));
    assert!(stdout(&lenient).contains("1 malformed"), "{}", stdout(&lenient));
}

#[test]
fn embed_info_summarizes() {
    let o = run(&["embed-info", "--embeddings", p(&fixture("desk_embedding.txt"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("dimension: 96"), "{text}");
    assert!(text.contains("rejected: 0"), "{text}");
}

#[test]
fn select_semantic_and_syntactic() {
    let dir = tempfile::tempdir().unwrap();
    let kb = desk_kb(dir.path());
    let emb = fixture("desk_embedding.txt");
    let sem = run(&["select", "--kb", p(&kb), "--embeddings", p(&emb), "--context", "dog,chew,bone"]);
    assert_eq!(sem.status.code(), Some(0), "{}", stderr(&sem));
    let text = stdout(&sem);
    assert!(text.lines().any(|l| l.ends_with("all X (dog(X) => exists Y (hasA(X,Y) & fur(Y)))")), "{text}");
    assert!(!text.contains("poodle"), "{text}");

    let syn = run(&["select", "--kb", p(&kb), "--context", "poodle", "--mode", "syntactic", "--depth", "1"]);
    assert_eq!(syn.status.code(), Some(0), "{}", stderr(&syn));
    assert!(stdout(&syn).lines().all(|l| l.split('\t').nth(1) == Some("1")), "{}", stdout(&syn));
    assert!(stdout(&syn).contains("poodle"));

    let missing = run(&["select", "--kb", p(&kb), "--context", "dog"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("--embeddings"), "{}", stderr(&missing));
}

#[test]
fn saturate_dog_bone_clauses() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.txt");
    let o = run(&[
        "saturate",
        "--clauses",
        p(&fixture("dog_bone.clauses")),
        "--max-steps",
        "10000",
        "--model-out",
        p(&model),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("status: saturated"), "{}", stderr(&o));
    let atoms: Vec<String> = fs::read_to_string(&model).unwrap().lines().map(String::from).collect();
    assert_eq!(atoms.len(), 11);
    assert!(atoms.contains(&"carnivore(a)".to_string()));
    assert!(!atoms.iter().any(|a| a.starts_with("herbivore")));
}

#[test]
fn saturate_reports_refutation_and_formula_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.txt");
    fs::write(&f, "exists X (p(X) & ~p(X))").unwrap();
    let o = run(&["saturate", "--formula", p(&f), "--timeout", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("status: refuted"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    let open = dir.path().join("open.txt");
    fs::write(&open, "p(X).\nq(a).").unwrap();
    let bad = run(&["saturate", "--clauses", p(&open)]);
    assert_eq!(bad.status.code(), Some(1), "{}", stderr(&bad));
}

#[test]
fn wander_prints_chain_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let kb = desk_kb(dir.path());
    let formula = dir.path().join("dog.txt");
    fs::write(&formula, hyperwander::fixtures::DOG_CHEWED_BONE).unwrap();
    let trace = dir.path().join("trace.jsonl");
    let emb = fixture("desk_embedding.txt");
    let args = [
        "wander",
        "--formula",
        p(&formula),
        "--kb",
        p(&kb),
        "--embeddings",
        p(&emb),
        "--max-steps",
        "10000",
        "--timeout",
        "0",
        "--trace",
        p(&trace),
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let chain = stdout(&o);
    assert!(chain.starts_with("{bone, chew, dog, r1agent, r1on} -> {animal, animals} -> "), "{chain}");
    assert!(stderr(&o).contains("round 1:"));
    let first = fs::read(&trace).unwrap();
    let rounds = hyperwander::wander::read_trace(first.as_slice()).unwrap();
    assert_eq!(rounds.len(), chain.matches(" -> ").count() + 1);

    let again = run(&args);
    assert_eq!(stdout(&again), chain);
    assert_eq!(fs::read(&trace).unwrap(), first);

    let one = run(&[&args[..9], &["--rounds", "1"]].concat());
    assert_eq!(stdout(&one).matches(" -> ").count(), 1, "{}", stdout(&one));
}

#[test]
fn wander_rejects_open_formula() {
    let dir = tempfile::tempdir().unwrap();
    let kb = desk_kb(dir.path());
    let formula = dir.path().join("open.txt");
    fs::write(&formula, "dog(X)").unwrap();
    let o =
        run(&["wander", "--formula", p(&formula), "--kb", p(&kb), "--embeddings", p(&fixture("desk_embedding.txt"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("free variable"), "{}", stderr(&o));
}

#[test]
fn copa_problem_65_report() {
    let dir = tempfile::tempdir().unwrap();
    let kb = desk_kb(dir.path());
    let report = dir.path().join("report.jsonl");
    let o = run(&[
        "copa",
        "--problems",
        p(&fixture("copa65.problems")),
        "--kb",
        p(&kb),
        "--embeddings",
        p(&fixture("desk_embedding.txt")),
        "--max-steps",
        "10000",
        "--timeout",
        "0",
        "--report",
        p(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("-> 2"), "{}", stdout(&o));
    let lines: Vec<serde_json::Value> =
        fs::read_to_string(&report).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["type"], "problem");
    assert_eq!(lines[0]["choice"], 2);
    assert_eq!(lines[1]["type"], "summary");
    assert_eq!(lines[1]["accuracy"], 1.0);
}

#[test]
fn copa_unscored_problem_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let kb = desk_kb(dir.path());
    let problems = dir.path().join("p.txt");
    // neither alternative has any symbol with a vector
    fs::write(&problems, "problem 1\nasks effect\npremise {dog}\nalt1 {zzzq}\nalt2 {qqqz}\n").unwrap();
    let o = run(&[
        "copa",
        "--problems",
        p(&problems),
        "--kb",
        p(&kb),
        "--embeddings",
        p(&fixture("desk_embedding.txt")),
        "--max-steps",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["wander", "--kb", "x"]).status.code(), Some(2));
    assert_eq!(run(&["select", "--kb", "x", "--context", "dog", "--mode", "fuzzy"]).status.code(), Some(2));
}

#[test]
fn missing_input_file_exits_1() {
    let o = run(&["embed-info", "--embeddings", "/nonexistent/vectors.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/vectors.txt"), "{}", stderr(&o));
}
