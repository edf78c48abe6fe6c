//! Rule expressions: AST, parser, canonical printer and evaluator.
//!
//! Grammar (whitespace-insensitive between tokens):
//!
//! ```text
//! implies := disj ( "=>" implies )?          right-associative
//! disj    := conj ( "|" conj )*
//! conj    := unary ( "&&" unary )*            strong (selection) conjunction
//! unary   := "!" unary | primary
//! primary := "(" implies ")"
//!          | "avg" "(" implies ( "," implies )* ")"
//!          | IDENT "(" ( ARG ( "," ARG )* )? ")"
//! ```

use std::collections::HashMap;
use std::fmt;

use super::truth::{self, TruthValue};
use super::SoftLogicError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleExpr {
    Predicate { name: String, args: Vec<String> },
    StrongConj(Box<RuleExpr>, Box<RuleExpr>),
    Disj(Box<RuleExpr>, Box<RuleExpr>),
    AvgConj(Vec<RuleExpr>),
    Neg(Box<RuleExpr>),
    Implies(Box<RuleExpr>, Box<RuleExpr>),
}

impl RuleExpr {
    pub fn pred(name: &str, args: &[&str]) -> Self {
        RuleExpr::Predicate {
            name: name.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// Names of all predicates, in first-occurrence order, deduplicated.
    pub fn predicate_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            RuleExpr::Predicate { name, .. } => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            RuleExpr::StrongConj(a, b) | RuleExpr::Disj(a, b) | RuleExpr::Implies(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            RuleExpr::AvgConj(children) => children.iter().for_each(|c| c.collect_names(out)),
            RuleExpr::Neg(c) => c.collect_names(out),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(
            self,
            RuleExpr::StrongConj(..) | RuleExpr::Disj(..) | RuleExpr::Implies(..)
        )
    }

    /// Evaluates the expression for one `(instance, candidate)` pair.
    pub fn evaluate<I: ?Sized, C: ?Sized>(
        &self,
        bindings: &PredicateBinding<I, C>,
        instance: &I,
        candidate: &C,
    ) -> Result<TruthValue, SoftLogicError> {
        Ok(match self {
            RuleExpr::Predicate { name, args } => {
                let f = bindings
                    .get(name)
                    .ok_or_else(|| SoftLogicError::Unbound(name.clone()))?;
                f(args, instance, candidate)?
            }
            RuleExpr::StrongConj(a, b) => truth::strong_conj(
                a.evaluate(bindings, instance, candidate)?,
                b.evaluate(bindings, instance, candidate)?,
            ),
            RuleExpr::Disj(a, b) => truth::disj(
                a.evaluate(bindings, instance, candidate)?,
                b.evaluate(bindings, instance, candidate)?,
            ),
            RuleExpr::AvgConj(children) => {
                let vals = children
                    .iter()
                    .map(|c| c.evaluate(bindings, instance, candidate))
                    .collect::<Result<Vec<_>, _>>()?;
                truth::avg_conj(&vals)?
            }
            RuleExpr::Neg(c) => truth::neg(c.evaluate(bindings, instance, candidate)?),
            RuleExpr::Implies(a, b) => truth::implies(
                a.evaluate(bindings, instance, candidate)?,
                b.evaluate(bindings, instance, candidate)?,
            ),
        })
    }
}

/// Canonical form: every binary operand that is itself binary is
/// parenthesized, so printing never depends on precedence tables.
impl fmt::Display for RuleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, e: &RuleExpr) -> fmt::Result {
            if e.is_binary() {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            RuleExpr::Predicate { name, args } => write!(f, "{}({})", name, args.join(", ")),
            RuleExpr::StrongConj(a, b) => {
                operand(f, a)?;
                f.write_str(" && ")?;
                operand(f, b)
            }
            RuleExpr::Disj(a, b) => {
                operand(f, a)?;
                f.write_str(" | ")?;
                operand(f, b)
            }
            RuleExpr::Implies(a, b) => {
                operand(f, a)?;
                f.write_str(" => ")?;
                operand(f, b)
            }
            RuleExpr::AvgConj(children) => {
                f.write_str("avg(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            RuleExpr::Neg(c) => {
                f.write_str("!")?;
                operand(f, c)
            }
        }
    }
}

pub type PredicateFn<I, C> =
    dyn Fn(&[String], &I, &C) -> Result<TruthValue, SoftLogicError> + Send + Sync;

/// Maps predicate names to grounding functions.
pub struct PredicateBinding<I: ?Sized, C: ?Sized> {
    preds: HashMap<String, Box<PredicateFn<I, C>>>,
}

impl<I: ?Sized, C: ?Sized> Default for PredicateBinding<I, C> {
    fn default() -> Self {
        Self { preds: HashMap::new() }
    }
}

impl<I: ?Sized, C: ?Sized> PredicateBinding<I, C> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`, replacing any earlier binding of the same name.
    pub fn bind<F>(&mut self, name: &str, f: F) -> &mut Self
    where
        F: Fn(&[String], &I, &C) -> Result<TruthValue, SoftLogicError> + Send + Sync + 'static,
    {
        self.preds.insert(name.to_string(), Box::new(f));
        self
    }

    pub fn get(&self, name: &str) -> Option<&PredicateFn<I, C>> {
        self.preds.get(name).map(|b| b.as_ref())
    }

    /// Checks that every predicate in `expr` has a binding.
    pub fn check(&self, expr: &RuleExpr) -> Result<(), SoftLogicError> {
        match expr
            .predicate_names()
            .into_iter()
            .find(|n| !self.preds.contains_key(*n))
        {
            Some(n) => Err(SoftLogicError::Unbound(n.to_string())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    LParen,
    RParen,
    Comma,
    Bang,
    AndAnd,
    Pipe,
    Arrow,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bang => "`!`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+' | '.')
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SoftLogicError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '!' => Tok::Bang,
            '|' => Tok::Pipe,
            '&' if bytes.get(i + 1) == Some(&b'&') => {
                i += 1;
                Tok::AndAnd
            }
            '=' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            c if is_word_char(c) => {
                let end = text[i..]
                    .find(|ch: char| !is_word_char(ch))
                    .map_or(text.len(), |k| i + k);
                let w = text[i..end].to_string();
                i = end;
                out.push((start, Tok::Word(w)));
                continue;
            }
            _ => {
                return Err(SoftLogicError::Parse {
                    offset: i,
                    expected: vec!["a token".into()],
                    found: format!("`{c}`"),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SoftLogicError {
        SoftLogicError::Parse {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), SoftLogicError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn implies(&mut self) -> Result<RuleExpr, SoftLogicError> {
        let lhs = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(RuleExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<RuleExpr, SoftLogicError> {
        let mut lhs = self.conj()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.conj()?;
            lhs = RuleExpr::Disj(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<RuleExpr, SoftLogicError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.unary()?;
            lhs = RuleExpr::StrongConj(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<RuleExpr, SoftLogicError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(RuleExpr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<RuleExpr, SoftLogicError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.implies()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Word(w) if w == "avg" => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                if *self.peek() == Tok::RParen {
                    return Err(self.error(&["`!`", "`(`", "avg", "predicate"]));
                }
                let mut children = vec![self.implies()?];
                loop {
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                            children.push(self.implies()?);
                        }
                        Tok::RParen => {
                            self.bump();
                            return Ok(RuleExpr::AvgConj(children));
                        }
                        _ => return Err(self.error(&["`,`", "`)`"])),
                    }
                }
            }
            Tok::Word(w) if is_ident(&w) => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let mut args = Vec::new();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(RuleExpr::Predicate { name: w, args });
                }
                loop {
                    match self.peek().clone() {
                        Tok::Word(a) => {
                            self.bump();
                            args.push(a);
                        }
                        _ => return Err(self.error(&["argument"])),
                    }
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RParen => {
                            self.bump();
                            return Ok(RuleExpr::Predicate { name: w, args });
                        }
                        _ => return Err(self.error(&["`,`", "`)`"])),
                    }
                }
            }
            _ => Err(self.error(&["`!`", "`(`", "avg", "predicate"])),
        }
    }
}

/// Parses rule-expression text into an AST.
pub fn parse_rule_expr(text: &str) -> Result<RuleExpr, SoftLogicError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.implies()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["`=>`", "`|`", "`&&`", "end of input"]));
    }
    Ok(e)
}
