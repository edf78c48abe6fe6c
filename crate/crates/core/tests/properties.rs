use std::collections::BTreeSet;

use proptest::prelude::*;
use ruledistill::corpus::{
    detect_lists, format_conll, gen_synthetic_ner, gen_synthetic_sentiment, is_list_punct,
    parse_classification, parse_conll, ListKind, NerSpec, SentimentSpec, TokenRef,
};
use ruledistill::inference::form_groups;
use ruledistill::projection::{project, Confidence, Grounding, ProjectionProblem};
use ruledistill::rulelib::{but_rule_truth, list_rule_truth, ButVariant, CategoryCollapse, TagSet};
use ruledistill::softlogic::{
    avg_conj, disj, implies, neg, parse_rule_expr, strong_conj, RuleExpr, TruthValue,
};

fn tv(v: f64) -> TruthValue {
    TruthValue::new(v).unwrap()
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0]
}

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

// ---- soft logic ----

proptest! {
    #[test]
    fn binary_operators_commute(a in unit(), b in unit()) {
        prop_assert_eq!(strong_conj(tv(a), tv(b)).value(), strong_conj(tv(b), tv(a)).value());
        prop_assert_eq!(disj(tv(a), tv(b)).value(), disj(tv(b), tv(a)).value());
    }

    #[test]
    fn operators_are_monotone(a in unit(), a2 in unit(), b in unit()) {
        let (lo, hi) = if a <= a2 { (a, a2) } else { (a2, a) };
        prop_assert!(strong_conj(tv(lo), tv(b)).value() <= strong_conj(tv(hi), tv(b)).value());
        prop_assert!(disj(tv(lo), tv(b)).value() <= disj(tv(hi), tv(b)).value());
        prop_assert!(neg(tv(lo)).value() >= neg(tv(hi)).value());
        // antitone in the premise, monotone in the conclusion
        prop_assert!(implies(tv(lo), tv(b)).value() >= implies(tv(hi), tv(b)).value());
        prop_assert!(implies(tv(b), tv(lo)).value() <= implies(tv(b), tv(hi)).value());
    }

    #[test]
    fn results_stay_in_unit_interval(a in unit(), b in unit(), rest in prop::collection::vec(unit(), 0..6)) {
        let mut all = vec![tv(a), tv(b)];
        all.extend(rest.iter().map(|&x| tv(x)));
        for v in [
            strong_conj(tv(a), tv(b)),
            disj(tv(a), tv(b)),
            neg(tv(a)),
            implies(tv(a), tv(b)),
            avg_conj(&all).unwrap(),
        ] {
            prop_assert!((0.0..=1.0).contains(&v.value()));
        }
    }

    #[test]
    fn single_average_is_identity(a in unit()) {
        prop_assert_eq!(avg_conj(&[tv(a)]).unwrap().value(), a);
    }

    #[test]
    fn implication_is_negated_disjunction(a in unit(), b in unit()) {
        let lhs = implies(tv(a), tv(b)).value();
        let rhs = disj(neg(tv(a)), tv(b)).value();
        prop_assert!((lhs - rhs).abs() < 1e-15);
    }
}

const NAMES: &[&str] = &["p", "has_but", "sigma_b", "y", "same_cat", "q_2"];
const ARGS: &[&str] = &["x", "y", "+", "-", "B", "0.5"];

fn expr() -> impl Strategy<Value = RuleExpr> {
    let leaf = (prop::sample::select(NAMES), prop::collection::vec(prop::sample::select(ARGS), 0..3))
        .prop_map(|(n, a)| RuleExpr::pred(n, &a));
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RuleExpr::StrongConj(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RuleExpr::Disj(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RuleExpr::Implies(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| RuleExpr::Neg(Box::new(a))),
            prop::collection::vec(inner, 1..4).prop_map(RuleExpr::AvgConj),
        ]
    })
}

proptest! {
    #[test]
    fn printed_rules_parse_back(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_rule_expr(&text).unwrap(), e, "{}", text);
    }
}

// ---- rules ----

proptest! {
    #[test]
    fn but_truth_ranges(s in unit(), positive in any::<bool>()) {
        let avg = but_rule_truth(s, positive, ButVariant::Avg).unwrap().value();
        prop_assert!((0.5..=1.0).contains(&avg));
        let strong = but_rule_truth(s, positive, ButVariant::Strong).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&strong));
        // the label agreeing with clause B is never less true
        let agree = s >= 0.5;
        let other = but_rule_truth(s, !positive, ButVariant::Avg).unwrap().value();
        if positive == agree {
            prop_assert!(avg >= other);
        }
    }

    #[test]
    fn but_truth_rejects_non_probabilities(s in prop_oneof![-10.0..-1e-9, 1.0 + 1e-9..10.0]) {
        prop_assert!(but_rule_truth(s, true, ButVariant::Avg).is_err());
    }

    #[test]
    fn collapse_conserves_mass(dist in simplex(17)) {
        let c = CategoryCollapse::new(&TagSet::conll());
        let folded = c.collapse(&dist).unwrap();
        prop_assert_eq!(folded.len(), 5);
        let total: f64 = folded.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn list_truth_ignores_prefixes(
        dist in simplex(17),
        y in 0usize..17,
        perms in prop::collection::vec(Just([0usize, 1, 2, 3]).prop_shuffle(), 4),
        y_prefix in 0usize..4,
        norm in any::<bool>(),
    ) {
        // shuffle probability mass among B/I/E/S of each category
        let tags = TagSet::conll();
        let c = CategoryCollapse::new(&tags);
        let mut moved = dist.clone();
        for (cat, p) in perms.iter().enumerate() {
            for (from, &to) in p.iter().enumerate() {
                moved[1 + 4 * cat + to] = dist[1 + 4 * cat + from];
            }
        }
        let y2 = if y == 0 { 0 } else { 1 + 4 * ((y - 1) / 4) + y_prefix };
        let a = list_rule_truth(&c, y, &dist, norm).unwrap().value();
        let b = list_rule_truth(&c, y2, &moved, norm).unwrap().value();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

// ---- projection ----

fn problem_parts() -> impl Strategy<Value = (Vec<f64>, Vec<(f64, Vec<f64>)>)> {
    (2usize..6).prop_flat_map(|k| {
        (
            simplex(k),
            prop::collection::vec((0.0f64..3.0, prop::collection::vec(unit(), k)), 1..4),
        )
    })
}

fn build(p: &[f64], gs: &[(f64, Vec<f64>)], lambda_scale: f64, c: f64) -> ProjectionProblem {
    let groundings = gs
        .iter()
        .map(|(l, t)| Grounding {
            confidence: Confidence::new(l * lambda_scale).unwrap(),
            truths: t.iter().map(|&x| tv(x)).collect(),
        })
        .collect();
    let logp: Vec<f64> = p.iter().map(|x| x.ln()).collect();
    let m = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z = m + logp.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    ProjectionProblem::new(logp.iter().map(|l| l - z).collect(), groundings, c).unwrap()
}

proptest! {
    #[test]
    fn strength_and_confidence_trade_off((p, gs) in problem_parts(), c in 0.1f64..10.0, k in 0.1f64..10.0) {
        let a = project(&build(&p, &gs, 1.0, c)).unwrap();
        let b = project(&build(&p, &gs, k, c / k)).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn stronger_projection_raises_expected_truth(p in simplex(4), t in prop::collection::vec(unit(), 4), lambda in 0.1f64..3.0, c1 in 0.0f64..8.0, dc in 0.0f64..8.0) {
        let gs = vec![(lambda, t.clone())];
        let expect = |c: f64| -> f64 {
            let q = project(&build(&p, &gs, 1.0, c)).unwrap().probs();
            q.iter().zip(&t).map(|(q, r)| q * r).sum()
        };
        prop_assert!(expect(c1 + dc) >= expect(c1) - 1e-12);
    }

    #[test]
    fn projecting_twice_adds_strength((p, gs) in problem_parts(), c in 0.0f64..5.0) {
        let once = project(&build(&p, &gs, 1.0, c)).unwrap().probs();
        let twice = project(&build(&once, &gs, 1.0, c)).unwrap().probs();
        let doubled = project(&build(&p, &gs, 1.0, 2.0 * c)).unwrap().probs();
        for (x, y) in twice.iter().zip(&doubled) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn satisfied_rules_leave_the_base_alone(p in simplex(5), lambda in 0.0f64..5.0, c in 0.0f64..10.0) {
        let q = project(&build(&p, &[(lambda, vec![1.0; 5])], 1.0, c)).unwrap().probs();
        for (x, y) in q.iter().zip(&p) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

// ---- groups ----

fn components(n: usize, links: &[(usize, usize)]) -> BTreeSet<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in links {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut out = BTreeSet::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        let mut comp = Vec::new();
        seen[s] = true;
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        out.insert(comp);
    }
    out
}

proptest! {
    #[test]
    fn small_components_are_kept_whole(
        n in 1usize..25,
        raw in prop::collection::vec((0usize..25, 0usize..25), 0..30),
        seed in any::<u64>(),
    ) {
        let links: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let comps = components(n, &links);
        let largest = comps.iter().map(Vec::len).max().unwrap();
        let groups = form_groups(n, &links, largest, seed);
        let got: BTreeSet<Vec<usize>> = groups.iter().map(|g| g.members.clone()).collect();
        prop_assert_eq!(got, comps);
        let kept: usize = groups.iter().map(|g| g.links.len()).sum();
        prop_assert_eq!(kept, links.len());
    }

    #[test]
    fn grouping_refines_components(
        n in 1usize..25,
        raw in prop::collection::vec((0usize..25, 0usize..25), 0..40),
        g_max in 1usize..5,
        seed in any::<u64>(),
    ) {
        let links: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let comps = components(n, &links);
        for g in form_groups(n, &links, g_max, seed) {
            prop_assert!(g.members.len() <= g_max);
            prop_assert!(comps.iter().any(|c| g.members.iter().all(|m| c.contains(m))));
        }
    }
}

// ---- list detection ----

const VOCAB: &[&str] = &[
    "1.", "2.", "3.", "4.", "1", "2", "3", ".", "-", "-", "Rome", "Milan", "United", "FC", "the", "won", ",", ";", "(",
];

fn noisy_doc() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec(prop::sample::select(VOCAB).prop_map(str::to_string), 1..14),
        1..6,
    )
}

fn marker_before(sent: &[String], start: usize, kind: ListKind) -> bool {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    match kind {
        ListKind::Dashed => start >= 1 && sent[start - 1] == "-",
        ListKind::Numbered => {
            (start >= 1 && sent[start - 1].strip_suffix('.').is_some_and(digits))
                || (start >= 2 && sent[start - 1] == "." && digits(&sent[start - 2]))
        }
    }
}

proptest! {
    #[test]
    fn detected_items_satisfy_the_item_rules(doc in noisy_doc()) {
        for g in detect_lists(&doc) {
            prop_assert!(g.items.len() >= 3);
            let mut words = BTreeSet::new();
            for it in &g.items {
                let sent = &doc[it.sentence];
                prop_assert!(it.start <= it.end && it.end <= sent.len());
                prop_assert!(marker_before(sent, it.start, g.kind));
                // recompute the blocks from scratch
                let mut blocks: Vec<Vec<usize>> = Vec::new();
                let mut cur = Vec::new();
                for t in it.start..it.end {
                    if is_list_punct(&sent[t]) {
                        if !cur.is_empty() {
                            blocks.push(std::mem::take(&mut cur));
                        }
                    } else {
                        let c = sent[t].chars().next().unwrap();
                        prop_assert!(!c.is_alphabetic() || c.is_uppercase(), "{}", sent[t]);
                        cur.push(t);
                    }
                }
                if !cur.is_empty() {
                    blocks.push(cur);
                }
                prop_assert!(!blocks.is_empty());
                prop_assert!(blocks.iter().all(|b| b.len() <= 3));
                prop_assert_eq!(&blocks, &it.blocks);
                for &t in it.blocks.iter().flatten() {
                    words.insert(TokenRef { sentence: it.sentence, token: t });
                }
            }
            let pairs: BTreeSet<_> = g.counterparts.iter().copied().collect();
            prop_assert_eq!(pairs.len(), g.counterparts.len());
            for &(a, b) in &g.counterparts {
                prop_assert!(a != b);
                prop_assert!(pairs.contains(&(b, a)));
                prop_assert!(words.contains(&a) && words.contains(&b));
            }
        }
    }

    #[test]
    fn planted_lists_are_found(
        items in prop::collection::vec(prop::collection::vec(prop::sample::select(&["Rome", "Milan", "United", "FC"][..]), 1..4), 3..7),
        numbered in any::<bool>(),
        one_sentence in any::<bool>(),
        before in prop::collection::vec(prop::sample::select(&["the", "won", "Rome", ","][..]), 0..4),
    ) {
        let mut doc: Vec<Vec<String>> = Vec::new();
        if !before.is_empty() {
            doc.push(before.iter().map(|s| s.to_string()).collect());
        }
        let first = doc.len();
        let mut line = Vec::new();
        for (i, words) in items.iter().enumerate() {
            line.push(if numbered { format!("{}.", i + 1) } else { "-".to_string() });
            line.extend(words.iter().map(|w| w.to_string()));
            if !one_sentence {
                doc.push(std::mem::take(&mut line));
            }
        }
        if one_sentence {
            doc.push(line);
        }
        let groups = detect_lists(&doc);
        prop_assert_eq!(groups.len(), 1);
        let g = &groups[0];
        prop_assert_eq!(g.kind, if numbered { ListKind::Numbered } else { ListKind::Dashed });
        prop_assert_eq!(g.items.len(), items.len());
        for (it, words) in g.items.iter().zip(&items) {
            let got: Vec<&str> = it.blocks.iter().flatten().map(|&t| doc[it.sentence][t].as_str()).collect();
            prop_assert_eq!(&got, words);
            if !one_sentence {
                prop_assert!(it.sentence >= first);
            }
        }
    }
}

// ---- loaders ----

fn classification_grammar(text: &str) -> bool {
    text.lines().filter(|l| !l.is_empty()).all(|l| {
        let Some(tab) = l.find('\t') else { return false };
        let (label, rest) = (&l[..tab], &l[tab + 1..]);
        let label_ok = !label.is_empty()
            && label.chars().all(|c| c.is_ascii_digit())
            && label.parse::<u128>().is_ok_and(|v| v <= usize::MAX as u128);
        let tokens_ok = !rest.is_empty()
            && !rest.starts_with(' ')
            && !rest.ends_with(' ')
            && !rest.contains("  ")
            && !rest.contains('\t');
        label_ok && tokens_ok
    })
}

proptest! {
    #[test]
    fn classification_parser_matches_grammar(text in "[01a\t \n]{0,40}") {
        let parsed = parse_classification(&text);
        prop_assert_eq!(parsed.is_ok(), classification_grammar(&text), "{:?}", text);
    }
}

// ---- generators ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generators_are_deterministic(seed in any::<u64>()) {
        let s = SentimentSpec::default();
        let a = gen_synthetic_sentiment(seed, 40, &s);
        prop_assert_eq!(&a, &gen_synthetic_sentiment(seed, 40, &s));
        prop_assert!(a.iter().all(|x| x.label < 2 && !x.tokens.is_empty()));
        let spec = NerSpec::default();
        let n = gen_synthetic_ner(seed, 4, &spec);
        prop_assert_eq!(&n, &gen_synthetic_ner(seed, 4, &spec));
        let tags = TagSet::conll();
        prop_assert!(n.iter().all(|s| tags.is_valid_sequence(&s.tags)));
        // what we write we can read back
        let back = parse_conll(&format_conll(&n, &tags), &tags).unwrap();
        prop_assert_eq!(back, n);
    }
}
