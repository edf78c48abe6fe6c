use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ruledistill::corpus::{
    detect_lists, format_classification, format_conll, gen_synthetic_ner, gen_synthetic_sentiment,
    load_classification, load_conll, LabeledSentence, ListKind, NerSpec, SentimentSpec, DOCSTART,
};
use ruledistill::predictors::{Checkpoint, ModelKind};
use ruledistill::projection::verification_sweep;
use ruledistill::rulelib::{RuleSpec, TagSet};
use ruledistill::trainer::{
    evaluate, expand_rules, EpochLog, EvalReport, Metrics, NerData, NerTask, SentimentData,
    SentimentTask, Task, Teacher, TrainError, SENTIMENT_LABELS,
};

use crate::config::{RunConfig, TaskKind};
use crate::CliError;

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(_) | TrainError::RuleMismatch { .. } | TrainError::Rule(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Documents of tokenized sentences from a column file; only the first
/// column is read, so tag columns may be present or absent.
pub fn read_token_docs(path: &Path) -> Result<Vec<Vec<Vec<String>>>, CliError> {
    let text = read_file(path)?;
    let mut docs: Vec<Vec<Vec<String>>> = vec![Vec::new()];
    let mut sent: Vec<String> = Vec::new();
    for line in text.lines() {
        let first = line.split_whitespace().next();
        match first {
            None => {
                if !sent.is_empty() {
                    docs.last_mut().unwrap().push(std::mem::take(&mut sent));
                }
            }
            Some(DOCSTART) => {
                if !sent.is_empty() {
                    docs.last_mut().unwrap().push(std::mem::take(&mut sent));
                }
                if !docs.last().unwrap().is_empty() {
                    docs.push(Vec::new());
                }
            }
            Some(tok) => sent.push(tok.to_string()),
        }
    }
    if !sent.is_empty() {
        docs.last_mut().unwrap().push(sent);
    }
    docs.retain(|d| !d.is_empty());
    Ok(docs)
}

/// Unlabeled sentences, one per line; a leading `label<TAB>` is ignored.
fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let text = read_file(path)?;
    Ok(text
        .lines()
        .map(|l| l.split_once('\t').map_or(l, |(_, r)| r))
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect())
}

fn load_sentiment(path: &Path) -> Result<Vec<LabeledSentence>, CliError> {
    let data = load_classification(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    if let Some(s) = data.iter().find(|s| s.label >= SENTIMENT_LABELS.len()) {
        return Err(CliError::Usage(format!(
            "{}: label {} out of range (expected 0 or 1)",
            path.display(),
            s.label
        )));
    }
    Ok(data)
}

fn load_ner(path: &Path) -> Result<Vec<ruledistill::corpus::TaggedSentence>, CliError> {
    load_conll(path, &TagSet::conll()).map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn epoch_log(history: &[EpochLog]) -> String {
    let mut s = String::from("epoch\tpi\tloss\tdev\n");
    for h in history {
        let dev = h.dev.map_or_else(|| "-".to_string(), |d| format!("{d:.6}"));
        let _ = writeln!(s, "{}\t{:.6}\t{:.6}\t{dev}", h.epoch, h.pi, h.loss);
    }
    s
}

/// One trained seed, ready to be written out.
struct SeedArtifacts {
    student: Checkpoint,
    frozen: Option<Checkpoint>,
    history: Vec<EpochLog>,
}

/// Trains every seed, writes artifacts when an output directory is set and
/// returns the summary text.
pub fn train(run: &RunConfig) -> Result<String, CliError> {
    run.check_paths()?;
    let path = |p: &Option<PathBuf>| p.clone().expect("checked");
    let out = run.out.as_deref();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Failure(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join("config.txt"), &run.render())?;
    }
    let mut log = String::new();
    let mut report = EvalReport::default();

    enum Loaded {
        Sentiment(SentimentData),
        Ner(NerData),
    }
    let loaded = match run.task {
        TaskKind::Sentiment => Loaded::Sentiment(SentimentData {
            train: load_sentiment(&path(&run.train))?,
            dev: run.dev.as_deref().map(load_sentiment).transpose()?.unwrap_or_default(),
            test: load_sentiment(&path(&run.test))?,
            unlabeled: run.unlabeled.as_deref().map(read_sentences).transpose()?.unwrap_or_default(),
        }),
        TaskKind::Ner => Loaded::Ner(NerData {
            train: load_ner(&path(&run.train))?,
            dev: run.dev.as_deref().map(load_ner).transpose()?.unwrap_or_default(),
            test: load_ner(&path(&run.test))?,
            unlabeled: run.unlabeled.as_deref().map(read_token_docs).transpose()?.unwrap_or_default(),
        }),
    };

    for &seed in &run.seeds {
        let config = ruledistill::trainer::TrainConfig {
            seed,
            ..run.config.clone()
        };
        let _ = writeln!(log, "{} start seed={seed}", unix_time());
        let (seed_report, art) = match &loaded {
            Loaded::Sentiment(data) => {
                let r = SentimentTask::run(&config, data)?;
                let labels: Vec<String> = SENTIMENT_LABELS.iter().map(|s| s.to_string()).collect();
                let ck = |m| Checkpoint::classifier("sentiment", labels.clone(), r.task.vocab.clone(), m);
                let art = SeedArtifacts {
                    student: ck(&r.output.student),
                    frozen: r.output.frozen.as_ref().map(ck),
                    history: r.output.history.clone(),
                };
                (r.output.report, art)
            }
            Loaded::Ner(data) => {
                let r = NerTask::run(&config, data)?;
                let labels: Vec<String> = (0..r.task.tagset.len()).map(|i| r.task.tagset.name(i)).collect();
                let ck = |m| Checkpoint::tagger("ner", labels.clone(), r.task.vocab.clone(), m);
                let art = SeedArtifacts {
                    student: ck(&r.output.student),
                    frozen: r.output.frozen.as_ref().map(ck),
                    history: r.output.history.clone(),
                };
                (r.output.report, art)
            }
        };
        let _ = writeln!(log, "{} done seed={seed}", unix_time());
        if let Some(dir) = out {
            let stem = format!("seed-{seed}");
            art.student
                .save(&dir.join(format!("{stem}.student.json")))
                .map_err(|e| CliError::Failure(e.to_string()))?;
            if let Some(f) = &art.frozen {
                f.save(&dir.join(format!("{stem}.base.json")))
                    .map_err(|e| CliError::Failure(e.to_string()))?;
            }
            write_file(&dir.join(format!("{stem}.epochs.tsv")), &epoch_log(&art.history))?;
        }
        report.runs.push(seed_report);
    }
    let summary = report.summary();
    if let Some(dir) = out {
        write_file(&dir.join("summary.txt"), &summary)?;
        write_file(&dir.join("run.log"), &log)?;
    }
    Ok(summary)
}

/// Settings for `eval`.
pub struct EvalOptions {
    pub checkpoint: PathBuf,
    pub data: PathBuf,
    pub task: Option<TaskKind>,
    pub rules: Option<Vec<RuleSpec>>,
    pub use_teacher: bool,
    pub seed: u64,
    pub c: Option<f64>,
    pub eval_sweeps: Option<usize>,
}

fn metric_fields(prefix: &str, m: &Metrics, s: &mut String) {
    for (k, v) in m.fields() {
        let _ = write!(s, " {prefix}_{k}={v:.6}");
    }
}

/// Scores a checkpoint, and its teacher when asked. Returns the report line.
pub fn eval(opts: &EvalOptions) -> Result<String, CliError> {
    for p in [&opts.checkpoint, &opts.data] {
        if !p.exists() {
            return Err(CliError::Usage(format!("{}: no such file", p.display())));
        }
    }
    let ck = Checkpoint::load(&opts.checkpoint).map_err(data_err)?;
    let task: TaskKind = ck.task.parse().map_err(CliError::Usage)?;
    if let Some(want) = opts.task {
        if want != task {
            return Err(CliError::Usage(format!(
                "checkpoint was trained for `{}`, not `{}`",
                task.name(),
                want.name()
            )));
        }
    }
    let mut config = task.defaults();
    if let Some(r) = &opts.rules {
        config.rules = r.clone();
    }
    if let Some(c) = opts.c {
        config.c = c;
    }
    if let Some(n) = opts.eval_sweeps {
        config.eval_sweeps = n;
    }
    config.validate()?;
    let seed = opts.seed;

    let mut line = format!("task={}", task.name());
    let diag = match (task, &ck.model) {
        (TaskKind::Sentiment, ModelKind::Classifier(_)) => {
            let model = ck.to_classifier().map_err(data_err)?;
            let t = SentimentTask {
                vocab: ck.vocab.clone(),
                model_config: model.config().clone(),
            };
            let items = t.encode_labeled(&load_sentiment(&opts.data)?);
            score(&t, &model, &items, &config, None, opts.use_teacher, seed, &mut line)?
        }
        (TaskKind::Ner, ModelKind::Tagger(_)) => {
            let model = ck.to_tagger().map_err(data_err)?;
            let tagset = TagSet::conll();
            let names: Vec<String> = (0..tagset.len()).map(|i| tagset.name(i)).collect();
            if ck.labels != names {
                return Err(CliError::Usage("checkpoint tag set differs from the CoNLL BIOES set".into()));
            }
            let t = NerTask {
                vocab: ck.vocab.clone(),
                tagset,
                model_config: model.config().clone(),
            };
            let items = t.encode_corpus(&load_ner(&opts.data)?);
            let tags = t.tagset.clone();
            score(&t, &model, &items, &config, Some(&tags), opts.use_teacher, seed, &mut line)?
        }
        _ => return Err(CliError::Usage("checkpoint model does not match its task".into())),
    };
    let _ = write!(
        line,
        " skipped_groundings={} floored_terms={}",
        diag.skipped_groundings, diag.floored_terms
    );
    line.push('\n');
    Ok(line)
}

#[allow(clippy::too_many_arguments)]
fn score<T: Task>(
    task: &T,
    model: &T::Model,
    items: &[T::Item],
    config: &ruledistill::trainer::TrainConfig,
    tags: Option<&TagSet>,
    use_teacher: bool,
    seed: u64,
    line: &mut String,
) -> Result<ruledistill::trainer::Diagnostics, CliError> {
    let (p, mut diag) = evaluate(task, model, items, None, seed)?;
    metric_fields("p", &p, line);
    if use_teacher {
        let rules = expand_rules(&config.rules, tags)?;
        task.check_rules(&rules)?;
        let num_labels = tags.map_or(SENTIMENT_LABELS.len(), TagSet::len);
        let teacher = Teacher::from_config(config, rules, num_labels);
        let (q, d) = evaluate(task, model, items, Some(&teacher), seed)?;
        diag += d;
        metric_fields("q", &q, line);
    }
    Ok(diag)
}

/// Runs the projection sweep. The second value is a reproduction dump
/// when any trial failed.
pub fn verify_projection(seed: u64, trials: usize, tolerance: f64) -> (String, Option<String>) {
    let r = verification_sweep(seed, trials, tolerance);
    let summary = format!(
        "seed={seed} trials={} failures={} inconclusive={} max_kl={:e} tolerance={tolerance:e}\n",
        r.trials, r.failures, r.inconclusive, r.max_kl
    );
    let dump = (!r.passed()).then(|| match &r.worst {
        Some((i, problem, report)) => format!("worst trial {i}\n{problem:#?}\n{report:#?}\n"),
        None => String::new(),
    });
    (summary, dump)
}

pub fn gen_sentiment(seed: u64, n: usize, spec: &SentimentSpec) -> String {
    format_classification(&gen_synthetic_sentiment(seed, n, spec))
}

pub fn gen_ner(seed: u64, docs: usize, spec: &NerSpec) -> String {
    format_conll(&gen_synthetic_ner(seed, docs, spec), &TagSet::conll())
}

/// One line per detected list:
/// `doc=<d> kind=<numbered|dashed> items=<n> spans=<sentence>:<start>-<end> ...`.
pub fn detect(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    for (d, doc) in read_token_docs(path)?.iter().enumerate() {
        for g in detect_lists(doc) {
            let kind = match g.kind {
                ListKind::Numbered => "numbered",
                ListKind::Dashed => "dashed",
            };
            let _ = write!(s, "doc={d} kind={kind} items={} spans=", g.items.len());
            let spans: Vec<String> =
                g.items.iter().map(|i| format!("{}:{}-{}", i.sentence, i.start, i.end)).collect();
            let _ = writeln!(s, "{}", spans.join(","));
        }
    }
    Ok(s)
}
