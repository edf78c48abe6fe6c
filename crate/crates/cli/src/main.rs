//! Command-line front end: data generation, training in every mode,
//! evaluation, projection verification and list detection.
//!
//! Exit status is 0 on success, 1 when a verification or run fails and 2
//! on usage, configuration or data errors.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ruledistill::corpus::{NerSpec, SentimentSpec};

use config::{load_settings, parse_rules, RunConfig, Settings, TaskKind};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation, configuration or input data.
    Usage(String),
    /// The command ran and failed.
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "ruledistill", version, about = "Rule-distilled sentiment and NER models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per seed and report student (p) and teacher (q) metrics.
    Train(TrainArgs),
    /// Score a checkpoint on a labeled file.
    Eval(EvalArgs),
    /// Write a synthetic "A but B" sentiment corpus.
    GenSentiment(GenSentimentArgs),
    /// Write a synthetic NER corpus with planted lists.
    GenNer(GenNerArgs),
    /// Print the lists found in a column-format file.
    DetectLists {
        input: PathBuf,
    },
    /// Check closed-form projections against a numeric optimizer.
    VerifyProjection {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
}

/// Every option mirrors a config-file key; flags win over the file.
#[derive(Args)]
struct TrainArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    train: Option<String>,
    #[arg(long)]
    dev: Option<String>,
    #[arg(long)]
    test: Option<String>,
    #[arg(long)]
    unlabeled: Option<String>,
    /// Output directory for checkpoints, logs and the summary.
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated seeds or ranges, e.g. `1..5`.
    #[arg(long)]
    seeds: Option<String>,
    /// Rule list, e.g. `but(lambda=1)`, or `none`.
    #[arg(long)]
    rules: Option<String>,
    #[arg(long = "c")]
    c: Option<String>,
    #[arg(long)]
    pi0: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    patience: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    min_count: Option<String>,
    #[arg(long)]
    g_max: Option<String>,
    #[arg(long)]
    train_sweeps: Option<String>,
    #[arg(long)]
    eval_sweeps: Option<String>,
}

impl TrainArgs {
    fn flags(&self) -> Settings {
        let pairs = [
            ("task", &self.task),
            ("mode", &self.mode),
            ("train", &self.train),
            ("dev", &self.dev),
            ("test", &self.test),
            ("unlabeled", &self.unlabeled),
            ("out", &self.out),
            ("seeds", &self.seeds),
            ("rules", &self.rules),
            ("c", &self.c),
            ("pi0", &self.pi0),
            ("alpha", &self.alpha),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("patience", &self.patience),
            ("lr", &self.lr),
            ("dim", &self.dim),
            ("hidden", &self.hidden),
            ("min_count", &self.min_count),
            ("g_max", &self.g_max),
            ("train_sweeps", &self.train_sweeps),
            ("eval_sweeps", &self.eval_sweeps),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect()
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Labeled file in the task's format.
    #[arg(long)]
    data: PathBuf,
    /// Expected task; an error if the checkpoint was trained for another.
    #[arg(long)]
    task: Option<TaskKind>,
    /// Rules for the teacher; the task defaults when omitted.
    #[arg(long)]
    rules: Option<String>,
    /// Also decode through the teacher and report `q_*` metrics.
    #[arg(long)]
    use_teacher: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long)]
    eval_sweeps: Option<usize>,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenSentimentArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0.15)]
    but_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    label_noise: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenNerArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    docs: usize,
    #[arg(long)]
    list_prob: Option<f64>,
    #[arg(long)]
    inter_sentence_prob: Option<f64>,
    #[arg(long)]
    ambiguous_share: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn probability(name: &str, p: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(CliError::Usage(format!("--{name} must lie in [0, 1], got {p}")))
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Failure(format!("{}: {e}", p.display()))),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(args) => {
            let file = match &args.config {
                Some(p) => load_settings(p)?,
                None => Settings::new(),
            };
            let run = RunConfig::resolve(&file, &args.flags())?;
            if args.print_config {
                print!("{}", run.render());
                return Ok(());
            }
            print!("{}", commands::train(&run)?);
            Ok(())
        }
        Command::Eval(args) => {
            let rules = args.rules.as_deref().map(parse_rules).transpose()?;
            let report = commands::eval(&commands::EvalOptions {
                checkpoint: args.checkpoint,
                data: args.data,
                task: args.task,
                rules,
                use_teacher: args.use_teacher,
                seed: args.seed,
                c: args.c,
                eval_sweeps: args.eval_sweeps,
            })?;
            print!("{report}");
            if let Some(p) = &args.out {
                emit(&report, Some(p))?;
            }
            Ok(())
        }
        Command::GenSentiment(a) => {
            let spec = SentimentSpec {
                but_fraction: probability("but-fraction", a.but_fraction)?,
                label_noise: probability("label-noise", a.label_noise)?,
                ..SentimentSpec::default()
            };
            emit(&commands::gen_sentiment(a.seed, a.n, &spec), a.out.as_ref())
        }
        Command::GenNer(a) => {
            let mut spec = NerSpec::default();
            if let Some(p) = a.list_prob {
                spec.list_prob = probability("list-prob", p)?;
            }
            if let Some(p) = a.inter_sentence_prob {
                spec.inter_sentence_prob = probability("inter-sentence-prob", p)?;
            }
            if let Some(p) = a.ambiguous_share {
                spec.ambiguous_club_share = probability("ambiguous-share", p)?;
            }
            emit(&commands::gen_ner(a.seed, a.docs, &spec), a.out.as_ref())
        }
        Command::DetectLists { input } => {
            print!("{}", commands::detect(&input)?);
            Ok(())
        }
        Command::VerifyProjection {
            seed,
            trials,
            tolerance,
        } => {
            if !(tolerance >= 0.0) {
                return Err(CliError::Usage(format!("--tolerance must be non-negative, got {tolerance}")));
            }
            let (summary, dump) = commands::verify_projection(seed, trials, tolerance);
            print!("{summary}");
            match dump {
                None => Ok(()),
                Some(d) => {
                    eprint!("{d}");
                    Err(CliError::Failure("projection verification failed".into()))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
