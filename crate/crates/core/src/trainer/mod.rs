//! The distillation loop: at every minibatch the student's predictions are
//! projected onto the rule-regularized subspace, and the student then takes
//! a gradient step towards a mix of the gold labels and those projected soft
//! predictions.
//!
//! Besides plain distillation the loop runs a rule-free baseline, a
//! semi-supervised variant with an unlabeled pool, projection of a trained
//! baseline at evaluation time only, and a two-stage pipeline that distills
//! a frozen projected baseline into a fresh student.

mod metrics;
mod ner;
mod sentiment;

pub use metrics::{accuracy, entity_spans, mean_std, span_prf, tagging_metrics, Metrics};
pub use ner::{NerData, NerItem, NerRun, NerTask};
pub use sentiment::{SentimentData, SentimentItem, SentimentRun, SentimentTask, SENTIMENT_LABELS};

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::inference::{BigramPenalty, InferenceError, SamplerKind};
use crate::predictors::{backward_and_step_sum, Adadelta, MixedTarget, Predictor, PredictorError};
use crate::projection::ProjectionError;
use crate::rulelib::{bigram_penalty, Rule, RuleError, RuleKind, RuleSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("rule `{rule}` does not apply to the {task} task")]
    RuleMismatch { rule: String, task: &'static str },
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// `π(t) = min{π0, 1 − α^t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImitationSchedule {
    pub pi0: f64,
    pub alpha: f64,
}

impl ImitationSchedule {
    pub fn new(pi0: f64, alpha: f64) -> Result<Self, TrainError> {
        if !(0.0..=1.0).contains(&pi0) {
            return Err(TrainError::Config(format!("pi0 must lie in [0, 1], got {pi0}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(TrainError::Config(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { pi0, alpha })
    }

    /// `π0 = 1`, `α = 0.95`.
    pub fn classification() -> Self {
        Self { pi0: 1.0, alpha: 0.95 }
    }

    /// `π0 = 0.9`, `α = 0.9`.
    pub fn tagging() -> Self {
        Self { pi0: 0.9, alpha: 0.9 }
    }

    pub fn rate(&self, t: usize) -> f64 {
        let t = i32::try_from(t).unwrap_or(i32::MAX);
        self.pi0.min(1.0 - self.alpha.powi(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    Base,
    #[default]
    Distill,
    Semi,
    ProjectAfter,
    Pipeline,
}

impl TrainMode {
    pub fn name(self) -> &'static str {
        match self {
            TrainMode::Base => "base",
            TrainMode::Distill => "distill",
            TrainMode::Semi => "semi",
            TrainMode::ProjectAfter => "project-after",
            TrainMode::Pipeline => "pipeline",
        }
    }
}

impl std::fmt::Display for TrainMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TrainMode {
    type Err = TrainError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "base" => TrainMode::Base,
            "distill" => TrainMode::Distill,
            "semi" => TrainMode::Semi,
            "project-after" => TrainMode::ProjectAfter,
            "pipeline" => TrainMode::Pipeline,
            _ => {
                return Err(TrainError::Config(format!(
                    "unknown mode `{s}` (expected base, distill, semi, project-after or pipeline)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: TrainMode,
    /// Regularization strength `C`.
    pub c: f64,
    pub schedule: ImitationSchedule,
    pub epochs: usize,
    /// Sentences for classification, documents for tagging.
    pub batch_size: usize,
    /// Epochs without a dev improvement before stopping; 0 disables.
    pub patience: usize,
    pub seed: u64,
    pub rules: Vec<RuleSpec>,
    /// Adadelta learning-rate multiplier.
    pub lr: f64,
    /// Word-vector size.
    pub dim: usize,
    /// Feature maps per filter width (classifier) or hidden units (tagger).
    pub hidden: usize,
    /// Minimum token count for the vocabulary.
    pub min_count: usize,
    /// Largest group handed to the joint sampler.
    pub g_max: usize,
    pub train_sweeps: usize,
    pub eval_sweeps: usize,
}

impl TrainConfig {
    pub fn sentiment() -> Self {
        Self {
            mode: TrainMode::Distill,
            c: 6.0,
            schedule: ImitationSchedule::classification(),
            epochs: 30,
            batch_size: 50,
            patience: 5,
            seed: 1,
            rules: vec![RuleSpec::But {
                lambda: 1.0,
                variant: Default::default(),
            }],
            lr: 1.0,
            dim: 32,
            hidden: 16,
            min_count: 1,
            g_max: 8,
            train_sweeps: 200,
            eval_sweeps: 2000,
        }
    }

    pub fn ner() -> Self {
        Self {
            schedule: ImitationSchedule::tagging(),
            batch_size: 2,
            rules: vec![
                RuleSpec::BioesTransitions,
                RuleSpec::ListCounterpart {
                    lambda: 1.0,
                    normalize_sqrt2: false,
                    mode: Default::default(),
                },
            ],
            hidden: 32,
            min_count: 2,
            ..Self::sentiment()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        ImitationSchedule::new(self.schedule.pi0, self.schedule.alpha)?;
        let bad = |m: String| Err(TrainError::Config(m));
        if !(self.c.is_finite() && self.c >= 0.0) {
            return bad(format!("C must be finite and non-negative, got {}", self.c));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive".into());
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if self.dim == 0 || self.hidden == 0 || self.g_max == 0 || self.eval_sweeps == 0 || self.train_sweeps == 0 {
            return bad("dim, hidden, g_max and sweep counts must be positive".into());
        }
        Ok(())
    }
}

/// Rules plus everything needed to build teacher posteriors from them.
#[derive(Debug, Clone)]
pub struct Teacher {
    pub rules: Vec<Rule>,
    pub c: f64,
    pub g_max: usize,
    pub train_sweeps: usize,
    pub eval_sweeps: usize,
    pub sampler: SamplerKind,
    bigram: Option<BigramPenalty>,
}

impl Teacher {
    pub fn new(rules: Vec<Rule>, c: f64, num_labels: usize) -> Self {
        let has_bigram = rules
            .iter()
            .any(|r| matches!(r.kind, RuleKind::ForbiddenBigram { .. }));
        let bigram = has_bigram.then(|| bigram_penalty(&rules, num_labels, c));
        Self {
            rules,
            c,
            g_max: 8,
            train_sweeps: 200,
            eval_sweeps: 2000,
            sampler: SamplerKind::Blocked,
            bigram,
        }
    }

    pub fn from_config(config: &TrainConfig, rules: Vec<Rule>, num_labels: usize) -> Self {
        Self {
            g_max: config.g_max,
            train_sweeps: config.train_sweeps,
            eval_sweeps: config.eval_sweeps,
            ..Self::new(rules, config.c, num_labels)
        }
    }

    /// Compiled bigram tables, if any bigram rule is present.
    pub fn bigram(&self) -> Option<&BigramPenalty> {
        self.bigram.as_ref()
    }

    /// True when the projection cannot move any distribution: no rules, or
    /// `C = 0` with no hard rule.
    pub fn is_identity(&self) -> bool {
        self.rules.is_empty() || (self.c == 0.0 && self.rules.iter().all(|r| !r.confidence.is_hard()))
    }
}

/// Counters for events that do not stop training.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Groundings dropped because they made an instance infeasible.
    pub skipped_groundings: usize,
    /// Loss terms whose probability hit the log floor.
    pub floored_terms: usize,
}

impl std::ops::AddAssign for Diagnostics {
    fn add_assign(&mut self, o: Self) {
        self.skipped_groundings += o.skipped_groundings;
        self.floored_terms += o.floored_terms;
    }
}

/// A task couples a predictor type with the rules that apply to it.
pub trait Task {
    type Model: Predictor + Clone;
    type Item;

    fn name(&self) -> &'static str;
    fn new_model(&self, seed: u64) -> Self::Model;
    /// Encoded input sequences of an item, one per output sequence.
    fn inputs<'a>(&self, item: &'a Self::Item) -> Vec<&'a [usize]>;
    /// Gold labels per sequence, or `None` for an unlabeled item.
    fn gold<'a>(&self, item: &'a Self::Item) -> Option<Vec<&'a [usize]>>;
    /// Fails when a rule does not apply to this task.
    fn check_rules(&self, rules: &[Rule]) -> Result<(), TrainError>;
    /// Teacher soft predictions for every output row, projected from
    /// `model`'s predictions.
    fn soft_targets(
        &self,
        model: &Self::Model,
        item: &Self::Item,
        teacher: &Teacher,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Vec<Vec<Vec<f64>>>, TrainError>;
    /// Decoded labels per sequence, from the student alone or through the
    /// teacher.
    fn predict(
        &self,
        model: &Self::Model,
        item: &Self::Item,
        teacher: Option<&Teacher>,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Vec<Vec<usize>>, TrainError>;
    fn metrics(&self, pred: &[Vec<usize>], gold: &[Vec<usize>]) -> Metrics;
}

pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(a ^ splitmix(b))
}

/// Scores `model` on labeled `items`, through `teacher` when given.
pub fn evaluate<T: Task>(
    task: &T,
    model: &T::Model,
    items: &[T::Item],
    teacher: Option<&Teacher>,
    seed: u64,
) -> Result<(Metrics, Diagnostics), TrainError> {
    let mut diag = Diagnostics::default();
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let Some(g) = task.gold(item) else {
            return Err(TrainError::Config("evaluation data must be labeled".into()));
        };
        pred.extend(task.predict(model, item, teacher, mix_seed(seed, i as u64), &mut diag)?);
        gold.extend(g.into_iter().map(<[usize]>::to_vec));
    }
    Ok((task.metrics(&pred, &gold), diag))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub pi: f64,
    pub loss: f64,
    /// Student dev metric, when a dev set is given.
    pub dev: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult<M> {
    pub model: M,
    pub history: Vec<EpochLog>,
    /// Epoch whose parameters were kept (1-based).
    pub best_epoch: usize,
    pub diagnostics: Diagnostics,
}

/// Training inputs for one call of [`fit`].
pub struct FitData<'a, I> {
    pub labeled: &'a [I],
    pub unlabeled: &'a [I],
    pub dev: &'a [I],
}

impl<I> Clone for FitData<'_, I> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<I> Copy for FitData<'_, I> {}

/// How soft targets are produced during [`fit`].
pub enum Imitation<'a, M> {
    /// No imitation term.
    None,
    /// Project the student itself, with `π` from the schedule.
    Student(&'a Teacher),
    /// Project a frozen model, with `π` fixed at 1.
    Frozen(&'a Teacher, &'a M),
}

struct StepContext<'a, 'd, T: Task> {
    task: &'a T,
    imitation: &'a Imitation<'a, T::Model>,
    pi: f64,
    diag: &'d mut Diagnostics,
}

type OwnedBatch<'x> = Vec<(&'x [usize], Vec<MixedTarget>)>;

fn view<'o>(batch: &'o OwnedBatch<'_>) -> Vec<(&'o [usize], &'o [MixedTarget])> {
    batch.iter().map(|(x, t)| (*x, t.as_slice())).collect()
}

impl<T: Task> StepContext<'_, '_, T> {
    /// Per-sequence targets for a set of items: gold labels mixed with the
    /// teacher's soft predictions at weight `π`.
    fn targets<'x>(
        &mut self,
        model: &T::Model,
        items: impl Iterator<Item = &'x T::Item>,
        seed: u64,
    ) -> Result<OwnedBatch<'x>, TrainError>
    where
        T::Item: 'x,
    {
        let k = model.num_labels();
        let pi = self.pi;
        let mut out = Vec::new();
        for (j, item) in items.enumerate() {
            let gold = self.task.gold(item);
            let soft = if pi > 0.0 {
                let s = mix_seed(seed, j as u64);
                Some(match *self.imitation {
                    Imitation::Student(t) => self.task.soft_targets(model, item, t, s, self.diag)?,
                    Imitation::Frozen(t, frozen) => self.task.soft_targets(frozen, item, t, s, self.diag)?,
                    Imitation::None => unreachable!("π is 0 without imitation"),
                })
            } else {
                None
            };
            for (s, tokens) in self.task.inputs(item).into_iter().enumerate() {
                let rows = match (&gold, &soft) {
                    (Some(g), Some(soft)) => g[s]
                        .iter()
                        .zip(&soft[s])
                        .map(|(&y, q)| MixedTarget::labeled(y, q.clone(), pi))
                        .collect::<Result<Vec<_>, _>>()?,
                    (Some(g), None) => g[s].iter().map(|&y| MixedTarget::hard(y, k)).collect(),
                    (None, Some(soft)) => soft[s]
                        .iter()
                        .map(|q| MixedTarget::unlabeled(q.clone(), pi))
                        .collect::<Result<Vec<_>, _>>()?,
                    (None, None) => continue,
                };
                out.push((tokens, rows));
            }
        }
        Ok(out)
    }
}

/// The training loop shared by every mode.
pub fn fit<T: Task>(
    task: &T,
    config: &TrainConfig,
    data: FitData<'_, T::Item>,
    imitation: Imitation<'_, T::Model>,
    init_seed: u64,
) -> Result<FitResult<T::Model>, TrainError> {
    config.validate()?;
    let mut model = task.new_model(init_seed);
    let d = Adadelta::default();
    let mut optimizer = Adadelta::new(d.rho, d.eps, config.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, init_seed));
    let mut diag = Diagnostics::default();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, T::Model)> = None;
    let mut since_best = 0usize;

    let mut u_rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, init_seed ^ 0x5e31));
    let mut u_order: Vec<usize> = Vec::new();

    for epoch in 0..config.epochs {
        let pi = match imitation {
            Imitation::None => 0.0,
            Imitation::Student(_) => config.schedule.rate(epoch),
            Imitation::Frozen(..) => 1.0,
        };
        let mut order: Vec<usize> = (0..data.labeled.len()).collect();
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut steps = 0usize;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let base_seed = mix_seed(mix_seed(config.seed, epoch as u64), b as u64);
            let mut ctx = StepContext {
                task,
                imitation: &imitation,
                pi,
                diag: &mut diag,
            };
            let labeled = ctx.targets(&model, chunk.iter().map(|&i| &data.labeled[i]), base_seed)?;
            // Each labeled minibatch is paired with an equally sized draw
            // from the unlabeled pool, which only feeds the imitation term.
            let mut unlabeled = Vec::new();
            if pi > 0.0 && !data.unlabeled.is_empty() {
                let mut picks = Vec::with_capacity(chunk.len());
                while picks.len() < chunk.len() {
                    if u_order.is_empty() {
                        u_order = (0..data.unlabeled.len()).collect();
                        u_order.shuffle(&mut u_rng);
                    }
                    picks.push(u_order.pop().expect("refilled"));
                }
                unlabeled = ctx.targets(
                    &model,
                    picks.iter().map(|&i| &data.unlabeled[i]),
                    mix_seed(base_seed, 0x0a11),
                )?;
            }
            let (lv, uv) = (view(&labeled), view(&unlabeled));
            let loss = backward_and_step_sum(&mut model, &[&lv, &uv], &mut optimizer)?;
            diag.floored_terms += loss.floored;
            epoch_loss += loss.value;
            steps += 1;
        }

        let dev = if data.dev.is_empty() {
            None
        } else {
            Some(evaluate(task, &model, data.dev, None, config.seed)?.0.primary())
        };
        history.push(EpochLog {
            epoch: epoch + 1,
            pi,
            loss: epoch_loss / steps.max(1) as f64,
            dev,
        });
        match dev {
            Some(score) => {
                if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                    best = Some((score, epoch + 1, model.clone()));
                    since_best = 0;
                } else {
                    since_best += 1;
                    if config.patience > 0 && since_best >= config.patience {
                        break;
                    }
                }
            }
            None => best = Some((f64::NAN, epoch + 1, model.clone())),
        }
    }

    let (_, best_epoch, model) = best.expect("at least one epoch runs");
    Ok(FitResult {
        model,
        history,
        best_epoch,
        diagnostics: diag,
    })
}

/// Results of one seed: the student's metrics, the teacher's when rules
/// are active, and training bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    pub mode: TrainMode,
    pub student: Metrics,
    pub teacher: Option<Metrics>,
    pub epochs: usize,
    pub best_epoch: usize,
    pub diagnostics: Diagnostics,
}

impl RunReport {
    fn values(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> =
            self.student.fields().into_iter().map(|(k, v)| (format!("p_{k}"), v)).collect();
        if let Some(t) = &self.teacher {
            out.extend(t.fields().into_iter().map(|(k, v)| (format!("q_{k}"), v)));
        }
        out
    }

    /// One `key=value` record.
    pub fn summary_line(&self) -> String {
        let mut s = format!("seed={} mode={}", self.seed, self.mode);
        for (k, v) in self.values() {
            let _ = write!(s, " {k}={v:.6}");
        }
        let _ = write!(
            s,
            " epochs={} best_epoch={} skipped_groundings={} floored_terms={}",
            self.epochs, self.best_epoch, self.diagnostics.skipped_groundings, self.diagnostics.floored_terms
        );
        s
    }
}

/// Reports for a list of seeds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub runs: Vec<RunReport>,
}

impl EvalReport {
    /// Mean and standard deviation of a summary key (e.g. `q_f1`) across seeds.
    pub fn stat(&self, key: &str) -> Option<(f64, f64)> {
        let xs: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.values().into_iter().find(|(k, _)| k == key).map(|(_, v)| v))
            .collect();
        (!xs.is_empty()).then(|| mean_std(&xs))
    }

    /// One record per seed, then an `aggregate` record with `_mean` and
    /// `_std` for every metric.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            s.push_str(&r.summary_line());
            s.push('\n');
        }
        let Some(first) = self.runs.first() else {
            return s;
        };
        let _ = write!(s, "aggregate seeds={} mode={}", self.runs.len(), first.mode);
        for (k, _) in first.values() {
            let (m, sd) = self.stat(&k).expect("key present");
            let _ = write!(s, " {k}_mean={m:.6} {k}_std={sd:.6}");
        }
        s.push('\n');
        s
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput<M> {
    pub report: RunReport,
    pub student: M,
    /// The stage-one model of a pipeline run, which the teacher projects.
    pub frozen: Option<M>,
    pub history: Vec<EpochLog>,
}

/// Runs one configured mode end to end and evaluates on `test`.
pub fn run_mode<T: Task>(
    task: &T,
    config: &TrainConfig,
    teacher: &Teacher,
    data: FitData<'_, T::Item>,
    test: &[T::Item],
) -> Result<RunOutput<T::Model>, TrainError> {
    config.validate()?;
    task.check_rules(&teacher.rules)?;
    let mode = config.mode;
    let eval_seed = mix_seed(config.seed, 0xe7a1);
    let unlabeled: &[T::Item] = if mode == TrainMode::Semi { data.unlabeled } else { &[] };
    let data = FitData { unlabeled, ..data };

    let (fit, frozen) = match mode {
        TrainMode::Base | TrainMode::ProjectAfter => {
            (fit(task, config, data, Imitation::None, config.seed)?, None)
        }
        TrainMode::Distill | TrainMode::Semi => {
            (fit(task, config, data, Imitation::Student(teacher), config.seed)?, None)
        }
        TrainMode::Pipeline => {
            let stage1 = fit(
                task,
                config,
                FitData { unlabeled: &[], ..data },
                Imitation::None,
                config.seed,
            )?;
            let stage2 = fit(
                task,
                config,
                data,
                Imitation::Frozen(teacher, &stage1.model),
                mix_seed(config.seed, 2),
            )?;
            let mut s2 = stage2;
            s2.diagnostics += stage1.diagnostics;
            (s2, Some(stage1.model))
        }
    };

    let (student, mut diag) = evaluate(task, &fit.model, test, None, eval_seed)?;
    diag += fit.diagnostics;
    let teacher_metrics = if mode == TrainMode::Base {
        None
    } else {
        let base = frozen.as_ref().unwrap_or(&fit.model);
        let (m, d) = evaluate(task, base, test, Some(teacher), eval_seed)?;
        diag += d;
        Some(m)
    };
    Ok(RunOutput {
        report: RunReport {
            seed: config.seed,
            mode,
            student,
            teacher: teacher_metrics,
            epochs: fit.history.len(),
            best_epoch: fit.best_epoch,
            diagnostics: diag,
        },
        student: fit.model,
        frozen,
        history: fit.history,
    })
}

/// Expands rule specs, with a tag set for tagging rules.
pub fn expand_rules(
    specs: &[RuleSpec],
    tags: Option<&crate::rulelib::TagSet>,
) -> Result<Vec<Rule>, TrainError> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(s.to_rules(tags)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let s = ImitationSchedule::classification();
        assert_eq!(s.rate(0), 0.0);
        assert!((s.rate(1) - 0.05).abs() < 1e-15);
        let t = ImitationSchedule::tagging();
        assert_eq!(t.rate(200), 0.9);
        for sched in [s, t] {
            let mut prev = sched.rate(0);
            for i in 1..=200 {
                let r = sched.rate(i);
                assert!(r >= prev && r <= sched.pi0);
                prev = r;
            }
        }
        assert!(ImitationSchedule::new(1.1, 0.5).is_err());
        assert!(ImitationSchedule::new(0.5, 0.0).is_err());
    }

    #[test]
    fn modes_round_trip() {
        for m in [
            TrainMode::Base,
            TrainMode::Distill,
            TrainMode::Semi,
            TrainMode::ProjectAfter,
            TrainMode::Pipeline,
        ] {
            assert_eq!(m.name().parse::<TrainMode>().unwrap(), m);
        }
        assert!("fancy".parse::<TrainMode>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::sentiment().validate().is_ok());
        assert!(TrainConfig::ner().validate().is_ok());
        let mut c = TrainConfig::sentiment();
        c.c = -1.0;
        assert!(c.validate().is_err());
        c = TrainConfig::ner();
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn summary_layout() {
        let run = |seed, acc| RunReport {
            seed,
            mode: TrainMode::Distill,
            student: Metrics::Classification { accuracy: acc },
            teacher: Some(Metrics::Classification { accuracy: acc + 0.1 }),
            epochs: 3,
            best_epoch: 2,
            diagnostics: Diagnostics::default(),
        };
        let r = EvalReport {
            runs: vec![run(1, 0.5), run(2, 0.7)],
        };
        let s = r.summary();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("seed=1 mode=distill p_accuracy=0.500000 q_accuracy=0.600000"));
        assert!(lines[2].contains("p_accuracy_mean=0.600000"));
        let (m, sd) = r.stat("q_accuracy").unwrap();
        assert!((m - 0.7).abs() < 1e-12 && (sd - 0.02f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seed_mixing_spreads() {
        assert_ne!(mix_seed(1, 2), mix_seed(2, 1));
        assert_ne!(mix_seed(0, 0), 0);
    }
}
