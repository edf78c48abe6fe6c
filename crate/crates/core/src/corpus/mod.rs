//! Data files, BIOES validation, list detection and synthetic task generators.
//!
//! Two plain-text formats are supported. Classification files hold one
//! record per line, `<label>\t<tok> <tok> ...`, with integer labels.
//! Tagging files are column-formatted: the first column is the token and
//! the last column the tag, blank lines end sentences and a `-DOCSTART-`
//! line starts a new document.

mod lists;
mod synth;

pub use lists::{detect_lists, is_list_punct, ListGroup, ListItem, ListKind, TokenRef};
pub use synth::{gen_synthetic_ner, gen_synthetic_sentiment, NerSpec, SentimentSpec};

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::rulelib::TagSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: invalid BIOES sequence at token positions {positions:?}")]
    InvalidSequence { line: usize, positions: Vec<usize> },
}

/// A sentence with a class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    pub label: usize,
}

/// A tagged sentence located in its document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<usize>,
    pub doc: usize,
    pub index: usize,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CorpusError> {
    std::fs::write(path, text).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_classification(path: &Path) -> Result<Vec<LabeledSentence>, CorpusError> {
    parse_classification(&read(path)?)
}

/// Parses classification records. Empty lines are skipped; any other line
/// must be a decimal label, one TAB, and single-space-separated tokens.
pub fn parse_classification(text: &str) -> Result<Vec<LabeledSentence>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: &str| CorpusError::Format {
            line,
            message: message.into(),
        };
        if raw.is_empty() {
            continue;
        }
        let (label, rest) = raw.split_once('\t').ok_or_else(|| err("expected <label><TAB><tokens>"))?;
        if label.is_empty() || !label.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err(&format!("label `{label}` is not a non-negative integer")));
        }
        let label: usize = label.parse().map_err(|_| err("label too large"))?;
        let tokens: Vec<String> = rest.split(' ').map(str::to_string).collect();
        if tokens.iter().any(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(err("tokens must be non-empty and separated by single spaces"));
        }
        out.push(LabeledSentence { tokens, label });
    }
    Ok(out)
}

pub fn format_classification(data: &[LabeledSentence]) -> String {
    let mut s = String::new();
    for d in data {
        let _ = writeln!(s, "{}\t{}", d.label, d.tokens.join(" "));
    }
    s
}

pub fn write_classification(path: &Path, data: &[LabeledSentence]) -> Result<(), CorpusError> {
    write(path, &format_classification(data))
}

pub fn load_conll(path: &Path, tags: &TagSet) -> Result<Vec<TaggedSentence>, CorpusError> {
    parse_conll(&read(path)?, tags)
}

pub const DOCSTART: &str = "-DOCSTART-";

/// Parses column-formatted tagging data and validates every sentence.
pub fn parse_conll(text: &str, tagset: &TagSet) -> Result<Vec<TaggedSentence>, CorpusError> {
    let mut out = Vec::new();
    let mut doc = 0usize;
    let mut seen_any_doc_content = false;
    let mut index = 0usize;
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let mut start_line = 0usize;

    let mut flush = |tokens: &mut Vec<String>,
                     tags: &mut Vec<usize>,
                     start_line: usize,
                     doc: usize,
                     index: &mut usize|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let bad = invalid_positions(tagset, tags);
        if !bad.is_empty() {
            return Err(CorpusError::InvalidSequence {
                line: start_line,
                positions: bad,
            });
        }
        out.push(TaggedSentence {
            tokens: std::mem::take(tokens),
            tags: std::mem::take(tags),
            doc,
            index: *index,
        });
        *index += 1;
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let cols: Vec<&str> = raw.split_whitespace().collect();
        if cols.is_empty() {
            flush(&mut tokens, &mut tags, start_line, doc, &mut index)?;
            continue;
        }
        if cols[0] == DOCSTART {
            flush(&mut tokens, &mut tags, start_line, doc, &mut index)?;
            if seen_any_doc_content {
                doc += 1;
            }
            seen_any_doc_content = false;
            index = 0;
            continue;
        }
        if cols.len() < 2 {
            return Err(CorpusError::Format {
                line,
                message: "expected at least two columns (token, tag)".into(),
            });
        }
        let tag = tagset.parse(cols[cols.len() - 1]).map_err(|e| CorpusError::Format {
            line,
            message: e.to_string(),
        })?;
        if tokens.is_empty() {
            start_line = line;
        }
        seen_any_doc_content = true;
        tokens.push(cols[0].to_string());
        tags.push(tag);
    }
    flush(&mut tokens, &mut tags, start_line, doc, &mut index)?;
    Ok(out)
}

/// Positions `i` where the bigram ending at `i` is forbidden; the sequence
/// end is reported as `len`.
pub fn invalid_positions(tagset: &TagSet, tags: &[usize]) -> Vec<usize> {
    let mut bad = Vec::new();
    let mut prev = None;
    for (i, &t) in tags.iter().enumerate() {
        if !tagset.allowed(prev, Some(t)) {
            bad.push(i);
        }
        prev = Some(t);
    }
    if !tags.is_empty() && !tagset.allowed(prev, None) {
        bad.push(tags.len());
    }
    bad
}

pub fn format_conll(data: &[TaggedSentence], tagset: &TagSet) -> String {
    let mut s = String::new();
    let mut current_doc = None;
    for sent in data {
        if current_doc != Some(sent.doc) {
            let _ = writeln!(s, "{DOCSTART} O\n");
            current_doc = Some(sent.doc);
        }
        for (tok, &tag) in sent.tokens.iter().zip(&sent.tags) {
            let _ = writeln!(s, "{tok} {}", tagset.name(tag));
        }
        s.push('\n');
    }
    s
}

pub fn write_conll(path: &Path, data: &[TaggedSentence], tagset: &TagSet) -> Result<(), CorpusError> {
    write(path, &format_conll(data, tagset))
}

/// Splits sentences into documents, preserving order.
pub fn documents(data: &[TaggedSentence]) -> Vec<&[TaggedSentence]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=data.len() {
        if i == data.len() || data[i].doc != data[start].doc {
            out.push(&data[start..i]);
            start = i;
        }
    }
    out
}
