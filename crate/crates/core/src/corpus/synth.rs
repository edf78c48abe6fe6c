//! Synthetic stand-ins for sentence-level sentiment and document-level NER.
//!
//! Sentiment: sentences are built from strong and mild polarity adjectives.
//! Outside "A but B" sentences the strongest adjective decides the label,
//! and a mild adjective of the other polarity may appear as a distractor.
//! In "A but B" sentences clause B decides the label and clause A has the
//! opposite polarity. One of the two adjectives is strong and the other
//! mild, so the bag of adjectives alone does not reveal the label; filler
//! words keep clause A's adjective out of any short window around "but".
//!
//! NER: documents mix prose with standings, itineraries and squad lists.
//! Some city names double as club names: they are locations in prose and
//! itineraries but organizations in standings, where the other clubs of the
//! same list are the only reliable clue.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LabeledSentence, TaggedSentence};
use crate::rulelib::{Prefix, Tag, TagSet};

const STRONG_POS: &[&str] = &[
    "brilliant", "superb", "masterful", "stunning", "wonderful", "outstanding", "magnificent",
    "gripping", "flawless", "exquisite",
];
const STRONG_NEG: &[&str] = &[
    "awful", "dreadful", "horrible", "terrible", "atrocious", "dismal", "abysmal", "unbearable",
    "insufferable", "wretched",
];
const MILD_POS: &[&str] = &[
    "decent", "pleasant", "nice", "solid", "charming", "likable", "watchable", "agreeable",
    "tidy", "sweet",
];
const MILD_NEG: &[&str] = &[
    "dull", "flat", "bland", "thin", "clumsy", "slow", "forgettable", "uneven", "messy",
    "tepid",
];
const NOUNS: &[&str] = &[
    "film", "plot", "cast", "script", "acting", "score", "ending", "story", "pacing",
    "dialogue", "camerawork", "soundtrack",
];
const TRAILERS: &[&str] = &["at", "times", "overall", "in", "places", "mostly", "throughout"];

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentSpec {
    /// Share of "A but B" sentences.
    pub but_fraction: f64,
    /// Chance that a non-"but" sentence carries an opposite mild adjective.
    pub distractor_prob: f64,
    /// Filler words after clause A's adjective, inclusive range. The same
    /// fillers also trail ordinary clauses.
    pub gap_before_but: (usize, usize),
    /// Words between "but" and clause B's adjective, inclusive range.
    pub gap_after_but: (usize, usize),
    /// Chance of flipping a gold label.
    pub label_noise: f64,
}

impl Default for SentimentSpec {
    fn default() -> Self {
        Self {
            but_fraction: 0.15,
            distractor_prob: 0.3,
            gap_before_but: (2, 3),
            gap_after_but: (0, 4),
            label_noise: 0.0,
        }
    }
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).copied().expect("non-empty pool")
}

fn adjectives(positive: bool, strong: bool) -> &'static [&'static str] {
    match (positive, strong) {
        (true, true) => STRONG_POS,
        (true, false) => MILD_POS,
        (false, true) => STRONG_NEG,
        (false, false) => MILD_NEG,
    }
}

/// "the <noun> was <adj>" with optional intensifier.
fn clause<R: Rng>(rng: &mut R, positive: bool, strong: bool) -> Vec<String> {
    let gap = if !strong && rng.gen_bool(0.3) { 4 } else { 3 };
    clause_with_gap(rng, adjectives(positive, strong), gap)
}

/// Clause whose adjective is preceded by `gap` words: "the <noun> was"
/// padded with "fairly" for `gap > 3`, shorter stems below.
fn clause_with_gap<R: Rng>(rng: &mut R, pool: &[&str], gap: usize) -> Vec<String> {
    let adj = pick(rng, pool).to_string();
    let noun = pick(rng, NOUNS).to_string();
    let verb = if rng.gen_bool(0.5) { "was" } else { "felt" };
    let mut c: Vec<String> = match gap {
        0 => vec![],
        1 => vec!["still".into()],
        2 => vec!["the".into(), noun],
        _ => {
            let mut v = vec!["the".into(), noun, verb.into()];
            v.extend(std::iter::repeat_n("fairly".to_string(), gap - 3));
            v
        }
    };
    c.push(adj);
    c
}

fn push_trailers<R: Rng>(rng: &mut R, tokens: &mut Vec<String>, n: usize) {
    for _ in 0..n {
        tokens.push(pick(rng, TRAILERS).to_string());
    }
}

/// Labeled sentences; positive is label 1, negative label 0.
pub fn gen_synthetic_sentiment(seed: u64, n: usize, spec: &SentimentSpec) -> Vec<LabeledSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let (t_lo, t_hi) = spec.gap_before_but;
    for _ in 0..n {
        let positive = rng.gen_bool(0.5);
        let mut tokens: Vec<String> = Vec::new();
        if rng.gen::<f64>() < spec.but_fraction {
            // One clause strong, the other mild: both label polarities then
            // use the same adjective types, differing only in their order.
            let a_strong = rng.gen_bool(0.5);
            tokens.extend(clause(&mut rng, !positive, a_strong));
            let gap = rng.gen_range(t_lo..=t_hi);
            push_trailers(&mut rng, &mut tokens, gap);
            tokens.push("but".into());
            let gap = rng.gen_range(spec.gap_after_but.0..=spec.gap_after_but.1);
            tokens.extend(clause_with_gap(&mut rng, adjectives(positive, !a_strong), gap));
            let gap = rng.gen_range(t_lo..=t_hi);
            push_trailers(&mut rng, &mut tokens, gap);
        } else {
            let distract = rng.gen::<f64>() < spec.distractor_prob;
            let strong = distract || rng.gen_bool(0.5);
            let mut clauses = vec![clause(&mut rng, positive, strong)];
            if rng.gen_bool(0.4) {
                let second_strong = rng.gen_bool(0.5) && strong;
                clauses.push(clause(&mut rng, positive, second_strong));
            }
            if distract {
                clauses.push(clause(&mut rng, !positive, false));
            }
            clauses.shuffle(&mut rng);
            for (i, mut c) in clauses.into_iter().enumerate() {
                // Trailing fillers occur everywhere, so they say nothing about "but".
                if rng.gen_bool(0.5) {
                    let n = rng.gen_range(t_lo.max(1)..=t_hi.max(1));
                    push_trailers(&mut rng, &mut c, n);
                }
                if i > 0 {
                    tokens.push("and".into());
                }
                tokens.extend(c);
            }
        }
        let mut label = usize::from(positive);
        if spec.label_noise > 0.0 && rng.gen::<f64>() < spec.label_noise {
            label = 1 - label;
        }
        out.push(LabeledSentence { tokens, label });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NerSpec {
    /// Prose sentences per document, inclusive range.
    pub sentences_per_doc: (usize, usize),
    /// Chance that a document contains a list.
    pub list_prob: f64,
    /// Items per list, inclusive range.
    pub list_items: (usize, usize),
    /// Chance a list puts each item in its own sentence.
    pub inter_sentence_prob: f64,
    /// Sizes of the name pools the corpus draws from.
    pub pool_size: usize,
    /// Share of standings and itinerary items drawn from the cities that
    /// also name clubs.
    pub ambiguous_club_share: f64,
}

impl Default for NerSpec {
    fn default() -> Self {
        Self {
            sentences_per_doc: (4, 7),
            list_prob: 0.8,
            list_items: (3, 5),
            inter_sentence_prob: 0.75,
            pool_size: 120,
            ambiguous_club_share: 0.5,
        }
    }
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "ten", "vor", "bel", "dan", "sur", "qui", "mon", "tal", "gor", "pel",
    "zin", "ros", "ha", "ne", "tu", "bri", "cas", "do", "fen", "lu", "mar", "ori", "sel", "vi",
];

/// The fixed name lexicon; independent of the corpus seed so every split
/// draws from the same pools.
struct Lexicon {
    first: Vec<String>,
    last: Vec<String>,
    cities: Vec<String>,
    /// Cities that also name football clubs.
    club_cities: Vec<String>,
    clubs: Vec<String>,
    companies: Vec<String>,
    nationalities: Vec<String>,
    events: Vec<String>,
}

fn word<R: Rng>(rng: &mut R, syllables: (usize, usize), suffix: &str) -> String {
    let n = rng.gen_range(syllables.0..=syllables.1);
    let mut w: String = (0..n).map(|_| pick(rng, SYLLABLES)).collect();
    w.push_str(suffix);
    let mut c = w.chars();
    let first = c.next().unwrap().to_uppercase().collect::<String>();
    first + c.as_str()
}

impl Lexicon {
    fn new(size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1e81c0);
        let mut seen = std::collections::HashSet::new();
        let mut pool = |rng: &mut ChaCha8Rng, n: usize, syl: (usize, usize), suffix: &str| {
            let mut v = Vec::with_capacity(n);
            while v.len() < n {
                let w = word(rng, syl, suffix);
                if seen.insert(w.clone()) {
                    v.push(w);
                }
            }
            v
        };
        let small = (size / 4).max(4);
        Lexicon {
            first: pool(&mut rng, size, (2, 2), ""),
            last: pool(&mut rng, size, (2, 3), ""),
            cities: pool(&mut rng, size, (2, 3), "a"),
            club_cities: pool(&mut rng, small, (2, 2), "o"),
            clubs: pool(&mut rng, small, (2, 3), "us"),
            companies: pool(&mut rng, small, (2, 2), "x"),
            nationalities: pool(&mut rng, small, (2, 2), "ian"),
            events: pool(&mut rng, small, (2, 2), "ia"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cat {
    Per,
    Loc,
    Org,
    Misc,
}

impl Cat {
    fn index(self) -> usize {
        match self {
            Cat::Per => 0,
            Cat::Loc => 1,
            Cat::Org => 2,
            Cat::Misc => 3,
        }
    }
}

struct Builder {
    tokens: Vec<String>,
    tags: Vec<usize>,
}

impl Builder {
    fn new() -> Self {
        Self {
            tokens: Vec::new(),
            tags: Vec::new(),
        }
    }

    fn words(&mut self, text: &str) {
        for w in text.split(' ').filter(|w| !w.is_empty()) {
            self.tokens.push(w.to_string());
            self.tags.push(0);
        }
    }

    fn entity(&mut self, tagset: &TagSet, words: &[String], cat: Cat) {
        let category = cat.index();
        let n = words.len();
        for (i, w) in words.iter().enumerate() {
            let prefix = match (n, i) {
                (1, _) => Prefix::S,
                (_, 0) => Prefix::B,
                (_, i) if i + 1 == n => Prefix::E,
                _ => Prefix::I,
            };
            self.tokens.push(w.clone());
            self.tags.push(tagset.index(Tag::Entity { prefix, category }));
        }
    }

    fn finish(&mut self) -> (Vec<String>, Vec<usize>) {
        (std::mem::take(&mut self.tokens), std::mem::take(&mut self.tags))
    }
}

fn person<R: Rng>(rng: &mut R, lex: &Lexicon) -> Vec<String> {
    vec![
        lex.first.choose(rng).unwrap().clone(),
        lex.last.choose(rng).unwrap().clone(),
    ]
}

fn one<R: Rng>(rng: &mut R, pool: &[String]) -> Vec<String> {
    vec![pool.choose(rng).unwrap().clone()]
}

fn location<R: Rng>(rng: &mut R, lex: &Lexicon) -> Vec<String> {
    match rng.gen_range(0..10) {
        0..=1 => one(rng, &lex.club_cities),
        2 => vec!["Port".into(), lex.cities.choose(rng).unwrap().clone()],
        _ => one(rng, &lex.cities),
    }
}

fn organization<R: Rng>(rng: &mut R, lex: &Lexicon) -> Vec<String> {
    match rng.gen_range(0..6) {
        0 => vec![lex.club_cities.choose(rng).unwrap().clone(), "United".into()],
        1 => one(rng, &lex.club_cities),
        2 => one(rng, &lex.clubs),
        3 => vec![lex.companies.choose(rng).unwrap().clone(), "Holdings".into()],
        _ => one(rng, &lex.companies),
    }
}

fn misc<R: Rng>(rng: &mut R, lex: &Lexicon) -> Vec<String> {
    if rng.gen_bool(0.6) {
        one(rng, &lex.nationalities)
    } else {
        vec![lex.events.choose(rng).unwrap().clone(), "Cup".into()]
    }
}

/// Prose template: literal words and entity slots.
fn prose<R: Rng>(rng: &mut R, lex: &Lexicon, tagset: &TagSet) -> (Vec<String>, Vec<usize>) {
    let mut b = Builder::new();
    match rng.gen_range(0..12) {
        0 => {
            b.entity(tagset, &person(rng, lex), Cat::Per);
            b.words("arrived in");
            b.entity(tagset, &location(rng, lex), Cat::Loc);
            b.words("on monday .");
        }
        1 => {
            b.entity(tagset, &person(rng, lex), Cat::Per);
            b.words(", who plays for");
            b.entity(tagset, &organization(rng, lex), Cat::Org);
            b.words(", scored twice .");
        }
        2 => {
            b.entity(tagset, &organization(rng, lex), Cat::Org);
            b.words("signed");
            b.entity(tagset, &person(rng, lex), Cat::Per);
            b.words("from");
            b.entity(tagset, &organization(rng, lex), Cat::Org);
            b.words(".");
        }
        3 => {
            b.words("the");
            b.entity(tagset, &misc(rng, lex), Cat::Misc);
            b.words("delegation met officials in");
            b.entity(tagset, &location(rng, lex), Cat::Loc);
            b.words(".");
        }
        4 => {
            b.words("fans in");
            b.entity(tagset, &location(rng, lex), Cat::Loc);
            b.words("celebrated late into the night .");
        }
        5 => {
            b.entity(tagset, &person(rng, lex), Cat::Per);
            b.words("said the");
            b.entity(tagset, &misc(rng, lex), Cat::Misc);
            b.words("market remained weak .");
        }
        6 => {
            b.words("shares of");
            b.entity(tagset, &organization(rng, lex), Cat::Org);
            b.words("rose in");
            b.entity(tagset, &location(rng, lex), Cat::Loc);
            b.words("trading .");
        }
        7 => {
            b.words("the match between");
            b.entity(tagset, &organization(rng, lex), Cat::Org);
            b.words("and");
            b.entity(tagset, &organization(rng, lex), Cat::Org);
            b.words("ended in a draw .");
        }
        8 => {
            b.entity(tagset, &person(rng, lex), Cat::Per);
            b.words("will travel to");
            b.entity(tagset, &location(rng, lex), Cat::Loc);
            b.words("next week .");
        }
        9 => {
            b.words("police in");
            b.entity(tagset, &location(rng, lex), Cat::Loc);
            b.words("arrested two men .");
        }
        10 => {
            b.words("coach");
            b.entity(tagset, &one(rng, &lex.last), Cat::Per);
            b.words("praised the");
            b.entity(tagset, &misc(rng, lex), Cat::Misc);
            b.words("players .");
        }
        _ => {
            b.words("the weather was mild and the roads were quiet .");
        }
    }
    b.finish()
}

#[derive(Clone, Copy)]
enum ListTopic {
    Standings,
    Itinerary,
    Squad,
}

fn list_sentences<R: Rng>(
    rng: &mut R,
    lex: &Lexicon,
    tagset: &TagSet,
    spec: &NerSpec,
) -> Vec<(Vec<String>, Vec<usize>)> {
    let topic = match rng.gen_range(0..3) {
        0 => ListTopic::Standings,
        1 => ListTopic::Itinerary,
        _ => ListTopic::Squad,
    };
    let n = rng.gen_range(spec.list_items.0..=spec.list_items.1);
    let numbered = rng.gen_bool(0.5);
    let inter = rng.gen::<f64>() < spec.inter_sentence_prob;
    let with_points = matches!(topic, ListTopic::Standings) && rng.gen_bool(0.5);

    // Distinct items.
    let mut items: Vec<(Vec<String>, Cat)> = Vec::new();
    while items.len() < n {
        let item = match topic {
            ListTopic::Standings => {
                let pool = if rng.gen::<f64>() < spec.ambiguous_club_share {
                    &lex.club_cities
                } else {
                    &lex.clubs
                };
                (one(rng, pool), Cat::Org)
            }
            ListTopic::Itinerary => {
                let pool = if rng.gen::<f64>() < spec.ambiguous_club_share {
                    &lex.club_cities
                } else {
                    &lex.cities
                };
                (one(rng, pool), Cat::Loc)
            }
            ListTopic::Squad => (person(rng, lex), Cat::Per),
        };
        if !items.iter().any(|(w, _)| *w == item.0) {
            items.push(item);
        }
    }

    let header = match topic {
        ListTopic::Standings => "standings after the weekend :",
        ListTopic::Itinerary => "the tour will stop in :",
        ListTopic::Squad => "the squad includes :",
    };
    let mut out = Vec::new();
    let mut b = Builder::new();
    b.words(header);
    if inter {
        out.push(b.finish());
    }
    let mut points: usize = rng.gen_range(20..30);
    for (i, (words, cat)) in items.iter().enumerate() {
        if numbered {
            b.words(&format!("{}.", i + 1));
        } else {
            b.words("-");
        }
        b.entity(tagset, words, *cat);
        if with_points {
            b.words(&points.to_string());
            points -= rng.gen_range(1..4);
        }
        if inter {
            out.push(b.finish());
        }
    }
    if !inter {
        out.push(b.finish());
    }
    out
}

/// Documents of tagged sentences over [`TagSet::conll`] indices.
pub fn gen_synthetic_ner(seed: u64, n_docs: usize, spec: &NerSpec) -> Vec<TaggedSentence> {
    let tagset = TagSet::conll();
    let lex = Lexicon::new(spec.pool_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for doc in 0..n_docs {
        let n = rng.gen_range(spec.sentences_per_doc.0..=spec.sentences_per_doc.1);
        let mut sents: Vec<(Vec<String>, Vec<usize>)> =
            (0..n).map(|_| prose(&mut rng, &lex, &tagset)).collect();
        if rng.gen::<f64>() < spec.list_prob {
            let at = rng.gen_range(0..=sents.len());
            let list = list_sentences(&mut rng, &lex, &tagset, spec);
            sents.splice(at..at, list);
        }
        for (index, (tokens, tags)) in sents.into_iter().enumerate() {
            out.push(TaggedSentence {
                tokens,
                tags,
                doc,
                index,
            });
        }
    }
    out
}
