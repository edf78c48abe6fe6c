//! Run configuration: a flat `key = value` file merged under command-line
//! flags and over the task defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ruledistill::rulelib::{parse_rule_specs, RuleSpec};
use ruledistill::trainer::{ImitationSchedule, TrainConfig, TrainMode};

use crate::CliError;

/// Every key a config file or flag may set, in rendering order.
pub const KEYS: &[&str] = &[
    "task",
    "mode",
    "train",
    "dev",
    "test",
    "unlabeled",
    "out",
    "seeds",
    "rules",
    "c",
    "pi0",
    "alpha",
    "epochs",
    "batch_size",
    "patience",
    "lr",
    "dim",
    "hidden",
    "min_count",
    "g_max",
    "train_sweeps",
    "eval_sweeps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Sentiment,
    Ner,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Sentiment => "sentiment",
            TaskKind::Ner => "ner",
        }
    }

    pub fn defaults(self) -> TrainConfig {
        match self {
            TaskKind::Sentiment => TrainConfig::sentiment(),
            TaskKind::Ner => TrainConfig::ner(),
        }
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentiment" => Ok(TaskKind::Sentiment),
            "ner" => Ok(TaskKind::Ner),
            _ => Err(format!("unknown task `{s}` (expected sentiment or ner)")),
        }
    }
}

/// Raw assignments, before interpretation.
pub type Settings = BTreeMap<String, String>;

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// skipped; unknown and repeated keys are errors.
pub fn parse_settings(text: &str) -> Result<Settings, String> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let k = k.trim().to_string();
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("line {}: unknown key `{k}`", i + 1));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: `{k}` set twice", i + 1));
        }
    }
    Ok(out)
}

pub fn load_settings(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_settings(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
}

/// A fully resolved `train` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: TaskKind,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub unlabeled: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub config: TrainConfig,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("`{key}`: cannot parse `{v}`")))
}

pub fn parse_seeds(v: &str) -> Result<Vec<u64>, CliError> {
    let mut seeds = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse("seeds", a)?, parse("seeds", b)?);
                if a > b {
                    return Err(CliError::Usage(format!("`seeds`: empty range `{part}`")));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(parse("seeds", part)?),
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Usage("`seeds` must list at least one seed".into()));
    }
    Ok(seeds)
}

pub fn parse_rules(v: &str) -> Result<Vec<RuleSpec>, CliError> {
    if v.trim() == "none" {
        return Ok(Vec::new());
    }
    parse_rule_specs(v).map_err(|e| CliError::Usage(format!("`rules`: {e}")))
}

impl RunConfig {
    /// Resolves flags over file values over task defaults.
    pub fn resolve(file: &Settings, flags: &Settings) -> Result<Self, CliError> {
        let get = |k: &str| flags.get(k).or_else(|| file.get(k)).map(String::as_str);
        let task: TaskKind = match get("task") {
            Some(v) => v.parse().map_err(CliError::Usage)?,
            None => TaskKind::Sentiment,
        };
        let mut c = task.defaults();
        let path = |k: &str| get(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        let mut run = RunConfig {
            task,
            train: path("train"),
            dev: path("dev"),
            test: path("test"),
            unlabeled: path("unlabeled"),
            out: path("out"),
            seeds: vec![c.seed],
            config: c.clone(),
        };
        if let Some(v) = get("seeds") {
            run.seeds = parse_seeds(v)?;
        }
        if let Some(v) = get("mode") {
            c.mode = v.parse().map_err(|e: ruledistill::trainer::TrainError| CliError::Usage(e.to_string()))?;
        }
        if let Some(v) = get("rules") {
            c.rules = parse_rules(v)?;
        }
        let mut pi0 = c.schedule.pi0;
        let mut alpha = c.schedule.alpha;
        for &k in KEYS {
            let Some(v) = get(k) else { continue };
            match k {
                "c" => c.c = parse(k, v)?,
                "pi0" => pi0 = parse(k, v)?,
                "alpha" => alpha = parse(k, v)?,
                "epochs" => c.epochs = parse(k, v)?,
                "batch_size" => c.batch_size = parse(k, v)?,
                "patience" => c.patience = parse(k, v)?,
                "lr" => c.lr = parse(k, v)?,
                "dim" => c.dim = parse(k, v)?,
                "hidden" => c.hidden = parse(k, v)?,
                "min_count" => c.min_count = parse(k, v)?,
                "g_max" => c.g_max = parse(k, v)?,
                "train_sweeps" => c.train_sweeps = parse(k, v)?,
                "eval_sweeps" => c.eval_sweeps = parse(k, v)?,
                _ => {}
            }
        }
        c.schedule = ImitationSchedule::new(pi0, alpha).map_err(|e| CliError::Usage(e.to_string()))?;
        c.seed = run.seeds[0];
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if c.mode == TrainMode::Semi && run.unlabeled.is_none() {
            return Err(CliError::Usage("mode `semi` needs an `unlabeled` path".into()));
        }
        run.config = c;
        Ok(run)
    }

    /// Launch checks: required paths are set and exist.
    pub fn check_paths(&self) -> Result<(), CliError> {
        for (key, p) in [("train", &self.train), ("test", &self.test)] {
            if p.is_none() {
                return Err(CliError::Usage(format!("`{key}` path is required")));
            }
        }
        for p in [&self.train, &self.dev, &self.test, &self.unlabeled].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Usage(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }

    /// The resolved configuration in the file format.
    pub fn render(&self) -> String {
        let c = &self.config;
        let p = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let rules = if c.rules.is_empty() {
            "none".to_string()
        } else {
            c.rules.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
        };
        let seeds = self.seeds.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        let values = [
            self.task.name().to_string(),
            c.mode.to_string(),
            p(&self.train),
            p(&self.dev),
            p(&self.test),
            p(&self.unlabeled),
            p(&self.out),
            seeds,
            rules,
            c.c.to_string(),
            c.schedule.pi0.to_string(),
            c.schedule.alpha.to_string(),
            c.epochs.to_string(),
            c.batch_size.to_string(),
            c.patience.to_string(),
            c.lr.to_string(),
            c.dim.to_string(),
            c.hidden.to_string(),
            c.min_count.to_string(),
            c.g_max.to_string(),
            c.train_sweeps.to_string(),
            c.eval_sweeps.to_string(),
        ];
        let mut s = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
