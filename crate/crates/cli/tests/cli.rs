use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ruledistill"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
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

struct Sentiment {
    _dir: tempfile::TempDir,
    root: PathBuf,
    train: PathBuf,
    test: PathBuf,
}

fn sentiment_data() -> Sentiment {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let train = root.join("train.tsv");
    let test = root.join("test.tsv");
    assert!(run(&["gen-sentiment", "--seed", "1", "--n", "200", "--out", p(&train)]).status.success());
    assert!(run(&["gen-sentiment", "--seed", "2", "--n", "80", "--out", p(&test)]).status.success());
    Sentiment {
        _dir: dir,
        root,
        train,
        test,
    }
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
}

fn config_value(rendered: &str, key: &str) -> String {
    rendered
        .lines()
        .find_map(|l| l.split_once(" = ").filter(|(k, _)| *k == key).map(|(_, v)| v.to_string()))
        .unwrap()
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    std::fs::write(&file, "# file layer\nepochs = 7\nmode = pipeline\nc = 3\n").unwrap();
    // (key, default, file value, flag value)
    let cases = [("epochs", "30", "7", "11"), ("mode", "distill", "pipeline", "base"), ("c", "6", "3", "2.5")];
    for (key, default, in_file, flag) in cases {
        let flag_name = format!("--{key}");
        for (use_file, use_flag) in [(false, false), (true, false), (false, true), (true, true)] {
            let mut args = vec!["train", "--print-config"];
            if use_file {
                args.extend(["--config", p(&file)]);
            }
            if use_flag {
                args.extend([flag_name.as_str(), flag]);
            }
            let o = run(&args);
            assert!(o.status.success(), "{}", stderr(&o));
            let expected = match (use_file, use_flag) {
                (_, true) => flag,
                (true, false) => in_file,
                (false, false) => default,
            };
            assert_eq!(config_value(&stdout(&o), key), expected, "{key} file={use_file} flag={use_flag}");
        }
    }
}

#[test]
fn task_selects_its_defaults() {
    let o = run(&["train", "--print-config", "--task", "ner"]);
    let text = stdout(&o);
    assert_eq!(config_value(&text, "pi0"), "0.9");
    assert_eq!(config_value(&text, "alpha"), "0.9");
    assert!(config_value(&text, "rules").starts_with("bioes_transitions()"));
    let o = run(&["train", "--print-config"]);
    let text = stdout(&o);
    assert_eq!(config_value(&text, "pi0"), "1");
    assert_eq!(config_value(&text, "alpha"), "0.95");
    assert_eq!(config_value(&text, "c"), "6");
}

#[test]
fn distill_reports_student_and_teacher() {
    let d = sentiment_data();
    let o = run(&[
        "train", "--task", "sentiment", "--mode", "distill", "--rules", "but(lambda=1)",
        "--train", p(&d.train), "--test", p(&d.test), "--epochs", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().next().unwrap().to_string();
    assert!(value(&line, "p_accuracy").is_some(), "{line}");
    assert!(value(&line, "q_accuracy").is_some(), "{line}");
}

#[test]
fn base_reports_no_teacher_keys() {
    let d = sentiment_data();
    let o = run(&["train", "--mode", "base", "--train", p(&d.train), "--test", p(&d.test), "--epochs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(value(&text, "p_accuracy").is_some());
    assert!(!text.contains("q_"), "{text}");
}

#[test]
fn missing_train_path_is_a_usage_error() {
    let d = sentiment_data();
    let missing = d.root.join("absent.tsv");
    let o = run(&["train", "--train", p(&missing), "--test", p(&d.test)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(p(&missing)), "{}", stderr(&o));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.conf");
    std::fs::write(&file, "epoch = 3\n").unwrap();
    let o = run(&["train", "--config", p(&file), "--print-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epoch"));
    let o = run(&["train", "--seeds", "", "--print-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["train", "--mode", "fancy", "--print-config"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn reruns_write_identical_summaries() {
    let d = sentiment_data();
    let mut summaries = Vec::new();
    for name in ["a", "b"] {
        let out = d.root.join(name);
        let o = run(&[
            "train", "--mode", "pipeline", "--train", p(&d.train), "--test", p(&d.test), "--dev", p(&d.test),
            "--epochs", "2", "--seeds", "1,2", "--out", p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        for f in ["config.txt", "run.log", "seed-1.student.json", "seed-1.base.json", "seed-2.epochs.tsv"] {
            assert!(out.join(f).exists(), "{f}");
        }
        let log = std::fs::read_to_string(out.join("seed-1.epochs.tsv")).unwrap();
        assert_eq!(log.lines().count(), 3);
        summaries.push(std::fs::read(out.join("summary.txt")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
    let text = String::from_utf8(summaries[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().last().unwrap().starts_with("aggregate seeds=2 mode=pipeline"));
}

#[test]
fn eval_is_deterministic_and_ruleless_teacher_matches_student() {
    let d = sentiment_data();
    let out = d.root.join("model");
    let o = run(&["train", "--train", p(&d.train), "--test", p(&d.test), "--epochs", "2", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ck = out.join("seed-1.student.json");
    let a = run(&["eval", "--checkpoint", p(&ck), "--data", p(&d.test), "--use-teacher"]);
    let b = run(&["eval", "--checkpoint", p(&ck), "--data", p(&d.test), "--use-teacher"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let none = stdout(&run(&["eval", "--checkpoint", p(&ck), "--data", p(&d.test), "--use-teacher", "--rules", "none"]));
    assert_eq!(value(&none, "p_accuracy"), value(&none, "q_accuracy"));
    let mismatch = run(&["eval", "--checkpoint", p(&ck), "--data", p(&d.test), "--task", "ner"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn ner_teacher_decodes_valid_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.conll");
    let test = dir.path().join("test.conll");
    assert!(run(&["gen-ner", "--seed", "1", "--docs", "30", "--out", p(&train)]).status.success());
    assert!(run(&["gen-ner", "--seed", "2", "--docs", "10", "--out", p(&test)]).status.success());
    let out = dir.path().join("m");
    let o = run(&[
        "train", "--task", "ner", "--mode", "base", "--train", p(&train), "--test", p(&test), "--epochs", "1",
        "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ck = out.join("seed-1.student.json");
    let o = run(&[
        "eval", "--checkpoint", p(&ck), "--data", p(&test), "--use-teacher", "--rules", "bioes_transitions()",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "q_validity"), Some("1.000000"));
    let rejected = run(&["train", "--task", "ner", "--rules", "but(lambda=1)", "--train", p(&train), "--test", p(&test)]);
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn verify_projection_exit_codes() {
    let o = run(&["verify-projection", "--trials", "100", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(value(&stdout(&o), "failures"), Some("0"));
    let o = run(&["verify-projection", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify-projection", "--trials", "5", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("worst trial"));
}

#[test]
fn generators_are_seeded_and_honor_options() {
    let a = run(&["gen-sentiment", "--seed", "4", "--n", "300", "--but-fraction", "0"]);
    let b = run(&["gen-sentiment", "--seed", "4", "--n", "300", "--but-fraction", "0"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 300);
    assert!(!text.split_whitespace().any(|t| t == "but"));
    let ner = stdout(&run(&["gen-ner", "--seed", "4", "--docs", "5"]));
    assert_eq!(ner.matches("-DOCSTART-").count(), 5);
    assert_eq!(run(&["gen-sentiment", "--label-noise", "2"]).status.code(), Some(2));
}

#[test]
fn detect_lists_prints_one_line_per_list() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("docs.txt");
    let doc = |sents: &[&str]| {
        let mut s = String::from("-DOCSTART-\n\n");
        for sent in sents {
            for t in sent.split(' ') {
                s.push_str(t);
                s.push('\n');
            }
            s.push('\n');
        }
        s
    };
    let text = [
        doc(&["1. Juventus 2. Barcelona 3. Milan"]),
        doc(&["1. Juventus 2. Barcelona"]),
        doc(&["- The Quick Brown Fox Jumps", "- Red", "- Blue", "- Green"]),
    ]
    .concat();
    std::fs::write(&file, text).unwrap();
    let o = run(&["detect-lists", p(&file)]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, vec!["doc=0 kind=numbered items=3 spans=0:1-2,0:3-4,0:5-6", "doc=2 kind=dashed items=3 spans=1:1-2,2:1-2,3:1-2"]);
}
