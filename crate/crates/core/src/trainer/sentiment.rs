//! Sentence classification with the contrastive "A but B" rule.

use super::{
    expand_rules, run_mode, Diagnostics, FitData, Metrics, RunOutput, Task, Teacher, TrainConfig,
    TrainError,
};
use crate::corpus::LabeledSentence;
use crate::logspace::{argmax, exp_vec, normalize_log, softmax};
use crate::predictors::{ClassifierConfig, Predictor, TextClassifier, Vocabulary};
use crate::projection::{project, Grounding, ProjectionError, ProjectionProblem};
use crate::rulelib::{detect_but, ButContext, Rule, RuleKind, POSITIVE};

pub const SENTIMENT_LABELS: [&str; 2] = ["negative", "positive"];

#[derive(Debug, Clone, Default)]
pub struct SentimentData {
    pub train: Vec<LabeledSentence>,
    pub dev: Vec<LabeledSentence>,
    pub test: Vec<LabeledSentence>,
    pub unlabeled: Vec<Vec<String>>,
}

/// An encoded sentence. `clause_b` holds the tokens after the first "but".
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentItem {
    pub tokens: Vec<usize>,
    pub label: Option<usize>,
    pub clause_b: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SentimentTask {
    pub vocab: Vocabulary,
    pub model_config: ClassifierConfig,
}

impl SentimentTask {
    pub fn new(vocab: Vocabulary, dim: usize, maps: usize) -> Self {
        let model_config = ClassifierConfig {
            vocab_size: vocab.len(),
            dim,
            widths: vec![2, 3],
            maps,
            num_labels: SENTIMENT_LABELS.len(),
        };
        Self { vocab, model_config }
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], label: Option<usize>) -> SentimentItem {
        let ids = self.vocab.encode(tokens);
        let clause_b = detect_but(tokens).map(|b| ids[b.clause_b].to_vec());
        SentimentItem {
            tokens: ids,
            label,
            clause_b,
        }
    }

    pub fn encode_labeled(&self, data: &[LabeledSentence]) -> Vec<SentimentItem> {
        data.iter().map(|s| self.encode(&s.tokens, Some(s.label))).collect()
    }

    /// Teacher distribution for one sentence given the base model.
    pub fn posterior(
        &self,
        model: &TextClassifier,
        item: &SentimentItem,
        teacher: &Teacher,
        diag: &mut Diagnostics,
    ) -> Result<Vec<f64>, TrainError> {
        let logits = model.logits(&item.tokens)?.swap_remove(0);
        let clause_b = match &item.clause_b {
            Some(b) if !teacher.is_identity() => b,
            _ => return Ok(softmax(&logits)),
        };
        let mut logp = logits;
        normalize_log(&mut logp);
        let sigma_b_pos = model.forward(clause_b)?[0][POSITIVE];
        let ctx = ButContext {
            has_but: true,
            sigma_b_pos,
        };
        let mut groundings = Vec::new();
        for rule in &teacher.rules {
            if let RuleKind::But(r) = &rule.kind {
                groundings.push(Grounding {
                    confidence: rule.confidence,
                    truths: vec![r.truth(ctx, 0)?, r.truth(ctx, 1)?],
                });
            }
        }
        if groundings.is_empty() {
            return Ok(exp_vec(&logp));
        }
        match project(&ProjectionProblem::new(logp.clone(), groundings.clone(), teacher.c)?) {
            Ok(q) => Ok(q.probs()),
            Err(ProjectionError::Infeasible) => {
                let before = groundings.len();
                groundings.retain(|g| !g.confidence.is_hard());
                diag.skipped_groundings += before - groundings.len();
                Ok(project(&ProjectionProblem::new(logp, groundings, teacher.c)?)?.probs())
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Trains and evaluates one configured run.
    pub fn run(config: &TrainConfig, data: &SentimentData) -> Result<SentimentRun, TrainError> {
        let vocab = Vocabulary::build(
            data.train
                .iter()
                .map(|s| s.tokens.as_slice())
                .chain(data.unlabeled.iter().map(Vec::as_slice)),
            config.min_count,
        );
        let task = SentimentTask::new(vocab, config.dim, config.hidden);
        let rules = expand_rules(&config.rules, None)?;
        task.check_rules(&rules)?;
        let teacher = Teacher::from_config(config, rules, SENTIMENT_LABELS.len());
        let train = task.encode_labeled(&data.train);
        let dev = task.encode_labeled(&data.dev);
        let test = task.encode_labeled(&data.test);
        let unlabeled: Vec<SentimentItem> = data.unlabeled.iter().map(|t| task.encode(t, None)).collect();
        let output = run_mode(
            &task,
            config,
            &teacher,
            FitData {
                labeled: &train,
                unlabeled: &unlabeled,
                dev: &dev,
            },
            &test,
        )?;
        Ok(SentimentRun { task, teacher, output })
    }
}

pub struct SentimentRun {
    pub task: SentimentTask,
    pub teacher: Teacher,
    pub output: RunOutput<TextClassifier>,
}

impl Task for SentimentTask {
    type Model = TextClassifier;
    type Item = SentimentItem;

    fn name(&self) -> &'static str {
        "sentiment"
    }

    fn new_model(&self, seed: u64) -> TextClassifier {
        TextClassifier::new(self.model_config.clone(), seed)
    }

    fn inputs<'a>(&self, item: &'a SentimentItem) -> Vec<&'a [usize]> {
        vec![&item.tokens]
    }

    fn gold<'a>(&self, item: &'a SentimentItem) -> Option<Vec<&'a [usize]>> {
        item.label.as_ref().map(|l| vec![std::slice::from_ref(l)])
    }

    fn check_rules(&self, rules: &[Rule]) -> Result<(), TrainError> {
        match rules.iter().find(|r| !matches!(r.kind, RuleKind::But(_))) {
            Some(r) => Err(TrainError::RuleMismatch {
                rule: r.name.clone(),
                task: "sentiment",
            }),
            None => Ok(()),
        }
    }

    fn soft_targets(
        &self,
        model: &TextClassifier,
        item: &SentimentItem,
        teacher: &Teacher,
        _seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Vec<Vec<Vec<f64>>>, TrainError> {
        Ok(vec![vec![self.posterior(model, item, teacher, diag)?]])
    }

    fn predict(
        &self,
        model: &TextClassifier,
        item: &SentimentItem,
        teacher: Option<&Teacher>,
        _seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Vec<Vec<usize>>, TrainError> {
        let dist = match teacher {
            Some(t) => self.posterior(model, item, t, diag)?,
            None => model.forward(&item.tokens)?.swap_remove(0),
        };
        Ok(vec![vec![argmax(&dist)]])
    }

    fn metrics(&self, pred: &[Vec<usize>], gold: &[Vec<usize>]) -> Metrics {
        let p: Vec<usize> = pred.iter().map(|r| r[0]).collect();
        let g: Vec<usize> = gold.iter().map(|r| r[0]).collect();
        Metrics::Classification {
            accuracy: super::accuracy(&p, &g),
        }
    }
}
