//! Pattern-matching list detector.
//!
//! Lists are runs of at least three items introduced either by ascending
//! numbers starting at 1 (`1.` as one token, or `1` followed by `.`) or by
//! `-`. An item's text runs from its marker to the next marker or the end
//! of the sentence, whichever comes first, so a list can sit inside one
//! sentence or spread over consecutive sentences. Consecutive items must be
//! adjacent: the next marker starts right where the previous item's text
//! ends, or at the start of the following sentence.
//!
//! An item is kept only if every alphabetic-initial word is capitalized and
//! every punctuation-delimited block has at most three words. Items that
//! fail are dropped; a list needs three surviving items.

/// Position of a token inside a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenRef {
    pub sentence: usize,
    pub token: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListKind {
    Numbered,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListItem {
    pub sentence: usize,
    /// Token span of the item text, marker excluded.
    pub start: usize,
    pub end: usize,
    /// Word positions of each non-empty block, in order.
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListGroup {
    pub kind: ListKind,
    pub items: Vec<ListItem>,
    /// Ordered counterpart pairs; both directions of every link are present.
    pub counterparts: Vec<(TokenRef, TokenRef)>,
}

impl ListGroup {
    /// Sentences touched by the list, ascending.
    pub fn sentences(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.items.iter().map(|i| i.sentence).collect();
        s.dedup();
        s
    }
}

/// Block separators.
pub fn is_list_punct(tok: &str) -> bool {
    matches!(tok, "," | ";" | ":" | "." | "(" | ")")
}

#[derive(Debug, Clone, Copy)]
struct Marker {
    kind: ListKind,
    number: usize,
    sentence: usize,
    token: usize,
    len: usize,
}

fn number_marker(sentence: &[String], t: usize) -> Option<(usize, usize)> {
    let tok = sentence[t].as_str();
    let digits = |s: &str| !s.is_empty() && s.len() <= 4 && s.bytes().all(|b| b.is_ascii_digit());
    if let Some(num) = tok.strip_suffix('.') {
        if digits(num) {
            return num.parse().ok().map(|n| (n, 1));
        }
    }
    if digits(tok) && sentence.get(t + 1).is_some_and(|n| n == ".") {
        return tok.parse().ok().map(|n| (n, 2));
    }
    None
}

fn find_markers(doc: &[Vec<String>]) -> Vec<Marker> {
    let mut out = Vec::new();
    for (s, sent) in doc.iter().enumerate() {
        let mut t = 0;
        while t < sent.len() {
            if sent[t] == "-" {
                out.push(Marker {
                    kind: ListKind::Dashed,
                    number: 0,
                    sentence: s,
                    token: t,
                    len: 1,
                });
                t += 1;
            } else if let Some((number, len)) = number_marker(sent, t) {
                out.push(Marker {
                    kind: ListKind::Numbered,
                    number,
                    sentence: s,
                    token: t,
                    len,
                });
                t += len;
            } else {
                t += 1;
            }
        }
    }
    out
}

fn item_ok(sent: &[String], start: usize, end: usize) -> Option<Vec<Vec<usize>>> {
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new()];
    for t in start..end {
        let tok = &sent[t];
        if is_list_punct(tok) {
            blocks.push(Vec::new());
            continue;
        }
        let first = tok.chars().next()?;
        if first.is_alphabetic() && !first.is_uppercase() {
            return None;
        }
        let b = blocks.last_mut().unwrap();
        b.push(t);
        if b.len() > 3 {
            return None;
        }
    }
    blocks.retain(|b| !b.is_empty());
    (!blocks.is_empty()).then_some(blocks)
}

fn counterparts(items: &[ListItem]) -> Vec<(TokenRef, TokenRef)> {
    let mut out = Vec::new();
    for (i, a) in items.iter().enumerate() {
        for (j, b) in items.iter().enumerate() {
            if i == j {
                continue;
            }
            for (ba, bb) in a.blocks.iter().zip(&b.blocks) {
                for (&ta, &tb) in ba.iter().zip(bb) {
                    out.push((
                        TokenRef {
                            sentence: a.sentence,
                            token: ta,
                        },
                        TokenRef {
                            sentence: b.sentence,
                            token: tb,
                        },
                    ));
                }
            }
        }
    }
    out
}

/// Detects lists in one document given as tokenized sentences.
pub fn detect_lists(doc: &[Vec<String>]) -> Vec<ListGroup> {
    let markers = find_markers(doc);
    // Item text span for each marker.
    let spans: Vec<(usize, usize)> = markers
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let start = m.token + m.len;
            let end = markers
                .get(i + 1)
                .filter(|n| n.sentence == m.sentence)
                .map_or(doc[m.sentence].len(), |n| n.token);
            (start, end)
        })
        .collect();
    let adjacent = |i: usize| {
        let (m, n) = (markers[i], markers[i + 1]);
        if n.kind != m.kind {
            return false;
        }
        if m.kind == ListKind::Numbered && n.number != m.number + 1 {
            return false;
        }
        let end = spans[i].1;
        (n.sentence == m.sentence && n.token == end)
            || (n.sentence == m.sentence + 1 && n.token == 0 && end == doc[m.sentence].len())
    };

    let mut groups = Vec::new();
    let mut i = 0;
    while i < markers.len() {
        let m = markers[i];
        if m.kind == ListKind::Numbered && m.number != 1 {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < markers.len() && adjacent(j) {
            j += 1;
        }
        let items: Vec<ListItem> = (i..=j)
            .filter_map(|k| {
                let (start, end) = spans[k];
                let sentence = markers[k].sentence;
                item_ok(&doc[sentence], start, end).map(|blocks| ListItem {
                    sentence,
                    start,
                    end,
                    blocks,
                })
            })
            .collect();
        if items.len() >= 3 {
            groups.push(ListGroup {
                kind: m.kind,
                counterparts: counterparts(&items),
                items,
            });
        }
        i = j + 1;
    }
    groups
}
