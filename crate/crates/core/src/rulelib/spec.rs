//! Rule selection strings, e.g. `but(lambda=1, variant=avg); bioes_transitions()`.

use super::{
    transition_rules, ButVariant, CounterpartMode, ListRule, Rule, RuleError, TagSet,
};

#[derive(Debug, Clone, PartialEq)]
pub enum RuleSpec {
    But {
        lambda: f64,
        variant: ButVariant,
    },
    BioesTransitions,
    ListCounterpart {
        lambda: f64,
        normalize_sqrt2: bool,
        mode: CounterpartMode,
    },
}

impl RuleSpec {
    /// Expands the spec into concrete rules. Tagging rules need a tag set.
    pub fn to_rules(&self, tags: Option<&TagSet>) -> Result<Vec<Rule>, RuleError> {
        let need_tags = || RuleError::Spec("tagging rule used without a tag set".into());
        match *self {
            RuleSpec::But { lambda, variant } => Ok(vec![Rule::but(lambda, variant)?]),
            RuleSpec::BioesTransitions => Ok(transition_rules(tags.ok_or_else(need_tags)?)),
            RuleSpec::ListCounterpart {
                lambda,
                normalize_sqrt2,
                mode,
            } => {
                let mut rule = ListRule::new(tags.ok_or_else(need_tags)?);
                rule.normalize_sqrt2 = normalize_sqrt2;
                rule.mode = mode;
                Ok(vec![Rule::list_counterpart(lambda, rule)?])
            }
        }
    }
}

impl std::fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuleSpec::But { lambda, variant } => {
                let v = match variant {
                    ButVariant::Avg => "avg",
                    ButVariant::Strong => "strong",
                };
                write!(f, "but(lambda={lambda}, variant={v})")
            }
            RuleSpec::BioesTransitions => f.write_str("bioes_transitions()"),
            RuleSpec::ListCounterpart {
                lambda,
                normalize_sqrt2,
                mode,
            } => {
                let m = match mode {
                    CounterpartMode::Joint => "joint",
                    CounterpartMode::Student => "student",
                };
                write!(
                    f,
                    "list_counterpart(lambda={lambda}, normalize_sqrt2={normalize_sqrt2}, mode={m})"
                )
            }
        }
    }
}

fn split_top_level(text: &str) -> Result<Vec<&str>, RuleError> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(RuleError::Spec(format!("unbalanced `)` at byte {i}")));
                }
            }
            ',' | ';' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(RuleError::Spec("unbalanced `(`".into()));
    }
    parts.push(&text[start..]);
    Ok(parts.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect())
}

fn parse_lambda(v: &str) -> Result<f64, RuleError> {
    let x = match v {
        "inf" | "infinity" => f64::INFINITY,
        _ => v
            .parse::<f64>()
            .map_err(|_| RuleError::Spec(format!("bad lambda `{v}`")))?,
    };
    if x.is_nan() || x < 0.0 {
        return Err(RuleError::Spec(format!("lambda must be non-negative, got `{v}`")));
    }
    Ok(x)
}

fn parse_bool(v: &str) -> Result<bool, RuleError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(RuleError::Spec(format!("bad boolean `{v}`"))),
    }
}

/// Parses a rule list: items separated by `;` or top-level `,`.
pub fn parse_rule_specs(text: &str) -> Result<Vec<RuleSpec>, RuleError> {
    let mut out = Vec::new();
    for item in split_top_level(text)? {
        let (name, rest) = item
            .split_once('(')
            .ok_or_else(|| RuleError::Spec(format!("`{item}`: expected name(args)")))?;
        let args = rest
            .trim_end()
            .strip_suffix(')')
            .ok_or_else(|| RuleError::Spec(format!("`{item}`: missing `)`")))?;
        let mut kv = Vec::new();
        for a in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| RuleError::Spec(format!("`{a}`: expected key=value")))?;
            kv.push((k.trim(), v.trim()));
        }
        let unknown = |k: &str| RuleError::Spec(format!("{}: unknown argument `{k}`", name.trim()));
        let spec = match name.trim() {
            "but" => {
                let mut lambda = 1.0;
                let mut variant = ButVariant::Avg;
                for (k, v) in kv {
                    match k {
                        "lambda" => lambda = parse_lambda(v)?,
                        "variant" => {
                            variant = match v {
                                "avg" => ButVariant::Avg,
                                "strong" => ButVariant::Strong,
                                _ => return Err(RuleError::Spec(format!("bad variant `{v}`"))),
                            }
                        }
                        _ => return Err(unknown(k)),
                    }
                }
                RuleSpec::But { lambda, variant }
            }
            "bioes_transitions" => {
                if let Some((k, _)) = kv.first() {
                    return Err(unknown(k));
                }
                RuleSpec::BioesTransitions
            }
            "list_counterpart" => {
                let mut lambda = 1.0;
                let mut normalize_sqrt2 = false;
                let mut mode = CounterpartMode::Joint;
                for (k, v) in kv {
                    match k {
                        "lambda" => lambda = parse_lambda(v)?,
                        "normalize_sqrt2" => normalize_sqrt2 = parse_bool(v)?,
                        "mode" => {
                            mode = match v {
                                "joint" => CounterpartMode::Joint,
                                "student" => CounterpartMode::Student,
                                _ => return Err(RuleError::Spec(format!("bad mode `{v}`"))),
                            }
                        }
                        _ => return Err(unknown(k)),
                    }
                }
                RuleSpec::ListCounterpart {
                    lambda,
                    normalize_sqrt2,
                    mode,
                }
            }
            other => return Err(RuleError::Spec(format!("unknown rule `{other}`"))),
        };
        out.push(spec);
    }
    Ok(out)
}
