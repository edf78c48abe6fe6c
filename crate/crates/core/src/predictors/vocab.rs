use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Index of the padding token.
pub const PAD: usize = 0;
/// Index of the unknown-token placeholder.
pub const UNK: usize = 1;

/// Dense token → index map. Index 0 is padding, 1 is unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let mut v = Self::empty();
        for t in tokens.into_iter().skip(2) {
            v.insert(t);
        }
        v
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub fn empty() -> Self {
        let tokens = vec!["<pad>".to_string(), "<unk>".to_string()];
        let index = tokens.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Self { tokens, index }
    }

    /// Vocabulary of every token seen at least `min_count` times, in order of
    /// first appearance.
    pub fn build<'a, I, S>(sentences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order = Vec::new();
        for s in sentences {
            for t in s {
                let c = counts.entry(t.as_ref()).or_insert_with(|| {
                    order.push(t.as_ref());
                    0
                });
                *c += 1;
            }
        }
        let mut v = Self::empty();
        for t in order {
            if counts[t] >= min_count {
                v.insert(t.to_string());
            }
        }
        v
    }

    fn insert(&mut self, t: String) {
        if !self.index.contains_key(&t) {
            self.index.insert(t.clone(), self.tokens.len());
            self.tokens.push(t);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, i: usize) -> Option<&str> {
        self.tokens.get(i).map(String::as_str)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.get(t.as_ref())).collect()
    }
}
