//! Versioned JSON checkpoints holding the vocabulary, label names, model
//! configuration and every parameter block.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    ClassifierConfig, ParamSet, Predictor, PredictorError, SequenceTagger, TaggerConfig,
    TextClassifier, Vocabulary,
};

pub const CHECKPOINT_FORMAT: &str = "ruledistill-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Classifier(ClassifierConfig),
    Tagger(TaggerConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Task name the model was trained for.
    pub task: String,
    pub labels: Vec<String>,
    pub vocab: Vocabulary,
    pub model: ModelKind,
    pub params: ParamSet,
}

impl Checkpoint {
    pub fn classifier(task: &str, labels: Vec<String>, vocab: Vocabulary, m: &TextClassifier) -> Self {
        Self::wrap(task, labels, vocab, ModelKind::Classifier(m.config().clone()), m.params())
    }

    pub fn tagger(task: &str, labels: Vec<String>, vocab: Vocabulary, m: &SequenceTagger) -> Self {
        Self::wrap(task, labels, vocab, ModelKind::Tagger(m.config().clone()), m.params())
    }

    fn wrap(task: &str, labels: Vec<String>, vocab: Vocabulary, model: ModelKind, params: &ParamSet) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            task: task.into(),
            labels,
            vocab,
            model,
            params: params.clone(),
        }
    }

    pub fn to_classifier(&self) -> Result<TextClassifier, PredictorError> {
        match &self.model {
            ModelKind::Classifier(c) => TextClassifier::from_parts(c.clone(), self.params.clone()),
            ModelKind::Tagger(_) => Err(PredictorError::Checkpoint(
                "checkpoint holds a tagger, not a classifier".into(),
            )),
        }
    }

    pub fn to_tagger(&self) -> Result<SequenceTagger, PredictorError> {
        match &self.model {
            ModelKind::Tagger(c) => SequenceTagger::from_parts(c.clone(), self.params.clone()),
            ModelKind::Classifier(_) => Err(PredictorError::Checkpoint(
                "checkpoint holds a classifier, not a tagger".into(),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PredictorError> {
        let c: Checkpoint =
            serde_json::from_str(text).map_err(|e| PredictorError::Checkpoint(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(PredictorError::Checkpoint(format!("unknown format `{}`", c.format)));
        }
        if c.version != CHECKPOINT_VERSION {
            return Err(PredictorError::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                c.version
            )));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), PredictorError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| PredictorError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, PredictorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PredictorError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
