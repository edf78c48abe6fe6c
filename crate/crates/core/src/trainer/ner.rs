//! Named-entity tagging with BIOES transition rules and the list
//! counterpart rule. Minibatch units are whole documents, so counterpart
//! links found inside a document are always available to the teacher.

use super::{
    expand_rules, mix_seed, run_mode, tagging_metrics, Diagnostics, FitData, Metrics, RunOutput,
    Task, Teacher, TrainConfig, TrainError,
};
use crate::corpus::{detect_lists, documents, TaggedSentence, TokenRef};
use crate::inference::{
    chain_map_decode, chain_marginals, form_groups, gibbs_soft_predict, BigramPenalty,
    ChainTeacherQuery, GroupMember, GroupTeacherQuery, InferenceError, PairFactor,
    SamplerSettings,
};
use crate::logspace::{argmax, exp_vec, normalize_log};
use crate::predictors::{Predictor, SequenceTagger, TaggerConfig, Vocabulary};
use crate::projection::Confidence;
use crate::rulelib::{CounterpartMode, ListRule, Rule, RuleKind, TagSet};

/// Floor added to sampled marginals before decoding them in log space.
const MARGINAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Default)]
pub struct NerData {
    pub train: Vec<TaggedSentence>,
    pub dev: Vec<TaggedSentence>,
    pub test: Vec<TaggedSentence>,
    /// Unlabeled documents, each a list of tokenized sentences.
    pub unlabeled: Vec<Vec<Vec<String>>>,
}

/// An encoded document with its counterpart links.
#[derive(Debug, Clone, PartialEq)]
pub struct NerItem {
    pub sentences: Vec<Vec<usize>>,
    pub tags: Option<Vec<Vec<usize>>>,
    pub counterparts: Vec<(TokenRef, TokenRef)>,
}

#[derive(Debug, Clone)]
pub struct NerTask {
    pub vocab: Vocabulary,
    pub tagset: TagSet,
    pub model_config: TaggerConfig,
}

/// Teacher output for one document.
struct DocPosterior {
    marginals: Vec<Vec<Vec<f64>>>,
    /// Exact chain per sentence, absent for sentences handled by sampling.
    chains: Vec<Option<ChainTeacherQuery>>,
    bigram: BigramPenalty,
}

impl NerTask {
    pub fn new(vocab: Vocabulary, tagset: TagSet, dim: usize, hidden: usize) -> Self {
        let model_config = TaggerConfig {
            vocab_size: vocab.len(),
            dim,
            radius: 2,
            hidden,
            num_labels: tagset.len(),
        };
        Self {
            vocab,
            tagset,
            model_config,
        }
    }

    pub fn encode_doc<S: AsRef<str>>(&self, doc: &[Vec<S>], tags: Option<Vec<Vec<usize>>>) -> NerItem {
        let strings: Vec<Vec<String>> = doc
            .iter()
            .map(|s| s.iter().map(|t| t.as_ref().to_string()).collect())
            .collect();
        let counterparts = detect_lists(&strings)
            .into_iter()
            .flat_map(|g| g.counterparts)
            .collect();
        NerItem {
            sentences: doc.iter().map(|s| self.vocab.encode(s)).collect(),
            tags,
            counterparts,
        }
    }

    /// Encodes labeled sentences, one item per document.
    pub fn encode_corpus(&self, data: &[TaggedSentence]) -> Vec<NerItem> {
        documents(data)
            .into_iter()
            .map(|doc| {
                let toks: Vec<Vec<String>> = doc.iter().map(|s| s.tokens.clone()).collect();
                let tags = doc.iter().map(|s| s.tags.clone()).collect();
                self.encode_doc(&toks, Some(tags))
            })
            .collect()
    }

    fn log_probs(&self, model: &SequenceTagger, item: &NerItem) -> Result<Vec<Vec<Vec<f64>>>, TrainError> {
        item.sentences
            .iter()
            .map(|s| {
                let mut rows = model.logits(s)?;
                rows.iter_mut().for_each(|r| {
                    normalize_log(r);
                });
                Ok(rows)
            })
            .collect()
    }

    fn posterior(
        &self,
        model: &SequenceTagger,
        item: &NerItem,
        teacher: &Teacher,
        sweeps: usize,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<DocPosterior, TrainError> {
        let k = self.tagset.len();
        let logp = self.log_probs(model, item)?;
        let bigram = teacher.bigram().cloned().unwrap_or_else(|| BigramPenalty::zeros(k));
        let mut unary: Vec<Vec<Vec<f64>>> = logp.iter().map(|s| vec![vec![0.0; k]; s.len()]).collect();
        let mut unary_groundings = vec![0usize; logp.len()];
        let mut links = Vec::new();
        let mut factors: Vec<(TokenRef, TokenRef, usize)> = Vec::new();
        let mut tables: Vec<Vec<f64>> = Vec::new();

        let list_rules: Vec<(Confidence, &ListRule)> = teacher
            .rules
            .iter()
            .filter_map(|r| match &r.kind {
                RuleKind::ListCounterpart(l) => Some((r.confidence, l)),
                _ => None,
            })
            .collect();
        for (conf, rule) in list_rules {
            match rule.mode {
                CounterpartMode::Joint => {
                    let table: Vec<f64> = rule
                        .pair_table()
                        .into_iter()
                        .map(|r| conf.log_penalty(teacher.c, r))
                        .collect();
                    tables.push(table);
                    for &(x, a) in &item.counterparts {
                        links.push((x.sentence, a.sentence));
                        factors.push((x, a, tables.len() - 1));
                    }
                }
                CounterpartMode::Student => {
                    for &(x, a) in &item.counterparts {
                        let sigma_a = exp_vec(&logp[a.sentence][a.token]);
                        let row = &mut unary[x.sentence][x.token];
                        for (y, u) in row.iter_mut().enumerate() {
                            *u += conf.log_penalty(teacher.c, rule.truth(y, &sigma_a)?.value());
                        }
                        unary_groundings[x.sentence] += 1;
                    }
                }
            }
        }

        let n = logp.len();
        let mut marginals = vec![Vec::new(); n];
        let mut chains: Vec<Option<ChainTeacherQuery>> = vec![None; n];
        let exact = |s: usize, diag: &mut Diagnostics| -> Result<ChainTeacherQuery, TrainError> {
            match ChainTeacherQuery::with_unary(logp[s].clone(), Some(&unary[s]), bigram.clone()) {
                Ok(q) => Ok(q),
                Err(InferenceError::Infeasible | InferenceError::MaskedPosition { .. })
                    if unary_groundings[s] > 0 =>
                {
                    diag.skipped_groundings += unary_groundings[s];
                    Ok(ChainTeacherQuery::new(logp[s].clone(), bigram.clone())?)
                }
                Err(e) => Err(e.into()),
            }
        };

        for (g, group) in form_groups(n, &links, teacher.g_max, seed).into_iter().enumerate() {
            if group.links.is_empty() {
                for &s in &group.members {
                    let q = exact(s, diag)?;
                    marginals[s] = chain_marginals(&q);
                    chains[s] = Some(q);
                }
                continue;
            }
            let local = |s: usize| group.members.binary_search(&s).expect("link inside its group");
            let query = GroupTeacherQuery {
                members: group
                    .members
                    .iter()
                    .map(|&s| GroupMember {
                        base_log_probs: logp[s].clone(),
                        unary: unary[s].clone(),
                    })
                    .collect(),
                bigram: bigram.clone(),
                pairs: group
                    .links
                    .iter()
                    .map(|&l| {
                        let (x, a, t) = factors[l];
                        PairFactor {
                            a: (local(x.sentence), x.token),
                            b: (local(a.sentence), a.token),
                            log_table: tables[t].clone(),
                        }
                    })
                    .collect(),
                settings: SamplerSettings {
                    sweeps,
                    burn_in: None,
                    seed: mix_seed(seed, g as u64),
                    kind: teacher.sampler,
                },
            };
            match gibbs_soft_predict(&query) {
                Ok(m) => {
                    for (&s, marg) in group.members.iter().zip(m) {
                        marginals[s] = marg;
                    }
                }
                Err(InferenceError::Infeasible | InferenceError::MaskedPosition { .. }) => {
                    diag.skipped_groundings += group.links.len();
                    for &s in &group.members {
                        let q = exact(s, diag)?;
                        marginals[s] = chain_marginals(&q);
                        chains[s] = Some(q);
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(DocPosterior {
            marginals,
            chains,
            bigram,
        })
    }

    /// Trains and evaluates one configured run.
    pub fn run(config: &TrainConfig, data: &NerData) -> Result<NerRun, TrainError> {
        let tagset = TagSet::conll();
        let vocab = Vocabulary::build(
            data.train
                .iter()
                .map(|s| s.tokens.as_slice())
                .chain(data.unlabeled.iter().flatten().map(Vec::as_slice)),
            config.min_count,
        );
        let task = NerTask::new(vocab, tagset, config.dim, config.hidden);
        let rules = expand_rules(&config.rules, Some(&task.tagset))?;
        task.check_rules(&rules)?;
        let teacher = Teacher::from_config(config, rules, task.tagset.len());
        let train = task.encode_corpus(&data.train);
        let dev = task.encode_corpus(&data.dev);
        let test = task.encode_corpus(&data.test);
        let unlabeled: Vec<NerItem> = data.unlabeled.iter().map(|d| task.encode_doc(d, None)).collect();
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
        Ok(NerRun { task, teacher, output })
    }
}

pub struct NerRun {
    pub task: NerTask,
    pub teacher: Teacher,
    pub output: RunOutput<SequenceTagger>,
}

impl Task for NerTask {
    type Model = SequenceTagger;
    type Item = NerItem;

    fn name(&self) -> &'static str {
        "ner"
    }

    fn new_model(&self, seed: u64) -> SequenceTagger {
        SequenceTagger::new(self.model_config.clone(), seed)
    }

    fn inputs<'a>(&self, item: &'a NerItem) -> Vec<&'a [usize]> {
        item.sentences.iter().map(Vec::as_slice).collect()
    }

    fn gold<'a>(&self, item: &'a NerItem) -> Option<Vec<&'a [usize]>> {
        item.tags.as_ref().map(|t| t.iter().map(Vec::as_slice).collect())
    }

    fn check_rules(&self, rules: &[Rule]) -> Result<(), TrainError> {
        match rules.iter().find(|r| matches!(r.kind, RuleKind::But(_))) {
            Some(r) => Err(TrainError::RuleMismatch {
                rule: r.name.clone(),
                task: "ner",
            }),
            None => Ok(()),
        }
    }

    fn soft_targets(
        &self,
        model: &SequenceTagger,
        item: &NerItem,
        teacher: &Teacher,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Vec<Vec<Vec<f64>>>, TrainError> {
        if teacher.is_identity() {
            return Ok(item.sentences.iter().map(|s| model.forward(s)).collect::<Result<_, _>>()?);
        }
        Ok(self
            .posterior(model, item, teacher, teacher.train_sweeps, seed, diag)?
            .marginals)
    }

    fn predict(
        &self,
        model: &SequenceTagger,
        item: &NerItem,
        teacher: Option<&Teacher>,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Vec<Vec<usize>>, TrainError> {
        let teacher = match teacher {
            Some(t) if !t.is_identity() => t,
            _ => {
                return item
                    .sentences
                    .iter()
                    .map(|s| Ok(model.logits(s)?.iter().map(|r| argmax(r)).collect()))
                    .collect()
            }
        };
        let post = self.posterior(model, item, teacher, teacher.eval_sweeps, seed, diag)?;
        post.chains
            .iter()
            .zip(&post.marginals)
            .map(|(chain, marg)| match chain {
                Some(q) => Ok(chain_map_decode(q)),
                None => {
                    let rows = marg
                        .iter()
                        .map(|r| r.iter().map(|m| (m + MARGINAL_FLOOR).ln()).collect())
                        .collect();
                    Ok(chain_map_decode(&ChainTeacherQuery::new(rows, post.bigram.clone())?))
                }
            })
            .collect()
    }

    fn metrics(&self, pred: &[Vec<usize>], gold: &[Vec<usize>]) -> Metrics {
        tagging_metrics(&self.tagset, pred, gold)
    }
}
