//! First-order syntax: vocabularies, finite universes, formulas, the
//! negation normal form transformation, and the formula parser.
//!
//! Formulas are plain trees and are never shared or deduplicated: a
//! sentence that repeats a subformula has more proof trees than one that
//! does not, so every occurrence counts.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Relation symbols and their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    relations: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Vocabulary {
        Vocabulary::default()
    }

    pub fn with(relations: &[(&str, usize)]) -> Result<Vocabulary> {
        let mut v = Vocabulary::new();
        for &(name, arity) in relations {
            v.add(name, arity)?;
        }
        Ok(v)
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<()> {
        if !crate::poly::is_identifier(name) {
            return Err(Error::VocabularyMismatch(format!(
                "`{name}` is not a valid relation name"
            )));
        }
        if arity == 0 {
            return Err(Error::VocabularyMismatch(format!(
                "relation {name} must have positive arity"
            )));
        }
        if self.relations.insert(name.to_string(), arity).is_some() {
            return Err(Error::VocabularyMismatch(format!(
                "relation {name} declared twice"
            )));
        }
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, &a)| (n.as_str(), a))
    }
}

/// A finite, nonempty, ordered universe. The element order is fixed at
/// construction and drives quantifier iteration and every canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    elements: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Universe> {
        let elements: Vec<String> = names.into_iter().map(Into::into).collect();
        if elements.is_empty() {
            return Err(Error::VocabularyMismatch("the universe is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if !crate::poly::is_identifier(e) {
                return Err(Error::VocabularyMismatch(format!(
                    "`{e}` is not a valid element name"
                )));
            }
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::VocabularyMismatch(format!(
                    "element {e} listed twice"
                )));
            }
        }
        Ok(Universe { elements, index })
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Sort key of a ground tuple under the universe order.
    pub fn tuple_key(&self, tuple: &[String]) -> Vec<usize> {
        tuple
            .iter()
            .map(|v| self.index_of(v).unwrap_or(usize::MAX))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Value(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Value(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// An atomic fact over ground values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundFact {
    pub sym: String,
    pub args: Vec<String>,
}

impl GroundFact {
    pub fn new(sym: &str, args: &[&str]) -> GroundFact {
        GroundFact {
            sym: sym.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.sym, self.args.join(","))
    }
}

/// A fact or its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundLiteral {
    pub fact: GroundFact,
    pub positive: bool,
}

impl GroundLiteral {
    pub fn positive(fact: GroundFact) -> GroundLiteral {
        GroundLiteral {
            fact,
            positive: true,
        }
    }

    pub fn negative(fact: GroundFact) -> GroundLiteral {
        GroundLiteral {
            fact,
            positive: false,
        }
    }

    pub fn negated(&self) -> GroundLiteral {
        GroundLiteral {
            fact: self.fact.clone(),
            positive: !self.positive,
        }
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.positive { "+" } else { "-" }, self.fact)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Neq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Accepted only in extended mode; must be rewritten away before NNF.
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            let mut term = |t: &Term| {
                if let Term::Var(v) = t {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.clone());
                    }
                }
            };
            match f {
                Formula::Rel(_, args) => args.iter().for_each(term),
                Formula::Eq(a, b) | Formula::Neq(a, b) => {
                    term(a);
                    term(b);
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                    walk(l, bound, out);
                    walk(r, bound, out);
                }
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    bound.push(v.clone());
                    walk(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn has_implies(&self) -> bool {
        match self {
            Formula::Implies(..) => true,
            Formula::Rel(..) | Formula::Eq(..) | Formula::Neq(..) => false,
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.has_implies(),
            Formula::And(l, r) | Formula::Or(l, r) => l.has_implies() || r.has_implies(),
        }
    }

    /// Negation normal form: negation only directly on relational atoms,
    /// no implications.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Rel(..) | Formula::Eq(..) | Formula::Neq(..) => true,
            Formula::Not(g) => matches!(**g, Formula::Rel(..)),
            Formula::And(l, r) | Formula::Or(l, r) => l.is_nnf() && r.is_nnf(),
            Formula::Implies(..) => false,
            Formula::Exists(_, g) | Formula::Forall(_, g) => g.is_nnf(),
        }
    }

    /// Replaces every implication by the material form: not-left or right.
    pub fn rewrite_implies(&self) -> Formula {
        match self {
            Formula::Rel(..) | Formula::Eq(..) | Formula::Neq(..) => self.clone(),
            Formula::Not(g) => Formula::not(g.rewrite_implies()),
            Formula::And(l, r) => Formula::and(l.rewrite_implies(), r.rewrite_implies()),
            Formula::Or(l, r) => Formula::or(l.rewrite_implies(), r.rewrite_implies()),
            Formula::Implies(l, r) => Formula::or(
                Formula::not(l.rewrite_implies()),
                r.rewrite_implies(),
            ),
            Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(g.rewrite_implies())),
            Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(g.rewrite_implies())),
        }
    }

    /// Capture-free substitution of a ground value for a free variable.
    pub fn instantiate(&self, var: &str, value: &str) -> Formula {
        let term = |t: &Term| match t {
            Term::Var(v) if v == var => Term::Value(value.to_string()),
            other => other.clone(),
        };
        match self {
            Formula::Rel(sym, args) => Formula::Rel(sym.clone(), args.iter().map(term).collect()),
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Neq(a, b) => Formula::Neq(term(a), term(b)),
            Formula::Not(g) => Formula::not(g.instantiate(var, value)),
            Formula::And(l, r) => {
                Formula::and(l.instantiate(var, value), r.instantiate(var, value))
            }
            Formula::Or(l, r) => Formula::or(l.instantiate(var, value), r.instantiate(var, value)),
            Formula::Implies(l, r) => {
                Formula::implies(l.instantiate(var, value), r.instantiate(var, value))
            }
            Formula::Exists(v, g) if v != var => {
                Formula::Exists(v.clone(), Box::new(g.instantiate(var, value)))
            }
            Formula::Forall(v, g) if v != var => {
                Formula::Forall(v.clone(), Box::new(g.instantiate(var, value)))
            }
            shadowed => shadowed.clone(),
        }
    }
}

/// Rewrites to negation normal form. Implications must be gone already.
pub fn nnf(f: &Formula) -> Result<Formula> {
    fn pos(f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::Rel(..) | Formula::Eq(..) | Formula::Neq(..) => f.clone(),
            Formula::Not(g) => neg(g)?,
            Formula::And(l, r) => Formula::and(pos(l)?, pos(r)?),
            Formula::Or(l, r) => Formula::or(pos(l)?, pos(r)?),
            Formula::Implies(..) => {
                return Err(Error::ExtendedOnly {
                    construct: "implication",
                })
            }
            Formula::Exists(v, g) => Formula::Exists(v.clone(), Box::new(pos(g)?)),
            Formula::Forall(v, g) => Formula::Forall(v.clone(), Box::new(pos(g)?)),
        })
    }
    fn neg(f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::Rel(..) => Formula::not(f.clone()),
            Formula::Eq(a, b) => Formula::Neq(a.clone(), b.clone()),
            Formula::Neq(a, b) => Formula::Eq(a.clone(), b.clone()),
            Formula::Not(g) => pos(g)?,
            Formula::And(l, r) => Formula::or(neg(l)?, neg(r)?),
            Formula::Or(l, r) => Formula::and(neg(l)?, neg(r)?),
            Formula::Implies(..) => {
                return Err(Error::ExtendedOnly {
                    construct: "implication",
                })
            }
            Formula::Exists(v, g) => Formula::Forall(v.clone(), Box::new(neg(g)?)),
            Formula::Forall(v, g) => Formula::Exists(v.clone(), Box::new(neg(g)?)),
        })
    }
    pos(f)
}

/// All ground literals of the vocabulary over the universe, facts first
/// within each tuple, tuples in universe order, relations alphabetical.
pub fn ground_literals(vocab: &Vocabulary, universe: &Universe) -> Vec<GroundLiteral> {
    let mut out = Vec::new();
    for (sym, arity) in vocab.relations() {
        for tuple in tuples(universe, arity) {
            let fact = GroundFact {
                sym: sym.to_string(),
                args: tuple,
            };
            out.push(GroundLiteral::positive(fact.clone()));
            out.push(GroundLiteral::negative(fact));
        }
    }
    out
}

/// Ground tuples of the given arity in universe order.
pub fn tuples(universe: &Universe, arity: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                universe.elements().iter().map(move |e| {
                    let mut next = prefix.clone();
                    next.push(e.clone());
                    next
                })
            })
            .collect();
    }
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Rel(sym, args) => {
                let names: Vec<&str> = args.iter().map(Term::name).collect();
                write!(f, "{}({})", sym, names.join(","))
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Neq(a, b) => write!(f, "{a} != {b}"),
            Formula::Not(g) => match **g {
                Formula::Rel(..) => write!(f, "!{g}"),
                _ => write!(f, "!({g})"),
            },
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Implies(l, r) => write!(f, "({l} -> {r})"),
            Formula::Exists(v, g) => write!(f, "exists {v}. {g}"),
            Formula::Forall(v, g) => write!(f, "forall {v}. {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LPar,
    RPar,
    Comma,
    Amp,
    Pipe,
    Bang,
    Arrow,
    Eq,
    Neq,
    Dot,
    Assign,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let bytes: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let here = |tok| Spanned {
                tok,
                line: li + 1,
                col: i + 1,
            };
            match c {
                ' ' | '\t' | '\r' => i += 1,
                '(' => {
                    out.push(here(Tok::LPar));
                    i += 1;
                }
                ')' => {
                    out.push(here(Tok::RPar));
                    i += 1;
                }
                ',' => {
                    out.push(here(Tok::Comma));
                    i += 1;
                }
                '&' => {
                    out.push(here(Tok::Amp));
                    i += 1;
                }
                '|' => {
                    out.push(here(Tok::Pipe));
                    i += 1;
                }
                '.' => {
                    out.push(here(Tok::Dot));
                    i += 1;
                }
                '=' => {
                    out.push(here(Tok::Eq));
                    i += 1;
                }
                '!' => {
                    if bytes.get(i + 1) == Some(&'=') {
                        out.push(here(Tok::Neq));
                        i += 2;
                    } else {
                        out.push(here(Tok::Bang));
                        i += 1;
                    }
                }
                '-' => {
                    if bytes.get(i + 1) == Some(&'>') {
                        out.push(here(Tok::Arrow));
                        i += 2;
                    } else {
                        return Err(Error::Syntax {
                            line: li + 1,
                            col: i + 1,
                            msg: "expected `->`".into(),
                        });
                    }
                }
                ':' => {
                    if bytes.get(i + 1) == Some(&'=') {
                        out.push(here(Tok::Assign));
                        i += 2;
                    } else {
                        return Err(Error::Syntax {
                            line: li + 1,
                            col: i + 1,
                            msg: "expected `:=`".into(),
                        });
                    }
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                        i += 1;
                    }
                    let word: String = bytes[start..i].iter().collect();
                    out.push(Spanned {
                        tok: Tok::Ident(word),
                        line: li + 1,
                        col: start + 1,
                    });
                }
                other => {
                    return Err(Error::Syntax {
                        line: li + 1,
                        col: i + 1,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone)]
struct Macro {
    params: Vec<String>,
    body: Formula,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vocab: &'a Vocabulary,
    universe: &'a Universe,
    extended: bool,
    macros: HashMap<String, Macro>,
}

impl<'a> Parser<'a> {
    fn err_here(&self, msg: String) -> Error {
        let (line, col) = match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => self
                .toks
                .last()
                .map(|s| (s.line, s.col + 1))
                .unwrap_or((1, 1)),
        };
        Error::Syntax { line, col, msg }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(name)) => Ok(name),
                _ => unreachable!(),
            },
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let left = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            if !self.extended {
                return Err(self.err_here(
                    "`->` needs extended mode; rewrite as `!a | b` or enable it".into(),
                ));
            }
            self.pos += 1;
            let right = self.formula()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn or_level(&mut self) -> Result<Formula> {
        let mut f = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            f = Formula::or(f, self.and_level()?);
        }
        Ok(f)
    }

    fn and_level(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(w)) if w == "forall" || w == "exists" => {
                let kw = self.ident("quantifier")?;
                let var = self.ident("a variable name")?;
                if self.universe.contains(&var) {
                    return Err(
                        self.err_here(format!("`{var}` is a ground value, not a variable"))
                    );
                }
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                // The body extends maximally to the right, but stops
                // before `->`.
                let body = self.or_level()?;
                Ok(if kw == "forall" {
                    Formula::forall(&var, body)
                } else {
                    Formula::exists(&var, body)
                })
            }
            Some(Tok::LPar) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RPar, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.err_here("expected a formula".into())),
        }
    }

    fn term_from(&self, name: String) -> Term {
        if self.universe.contains(&name) {
            Term::Value(name)
        } else {
            Term::Var(name)
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let name = self.ident("an atom")?;
        if self.peek() == Some(&Tok::LPar) {
            self.pos += 1;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RPar) {
                loop {
                    let t = self.ident("a term")?;
                    args.push(self.term_from(t));
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RPar, "`)`")?;
            if let Some(mac) = self.macros.get(&name) {
                if mac.params.len() != args.len() {
                    return Err(self.err_here(format!(
                        "{name} takes {} arguments, got {}",
                        mac.params.len(),
                        args.len()
                    )));
                }
                let map: HashMap<String, Term> = mac
                    .params
                    .iter()
                    .cloned()
                    .zip(args.iter().cloned())
                    .collect();
                return Ok(substitute(&mac.body, &map));
            }
            match self.vocab.arity(&name) {
                Some(arity) if arity == args.len() => Ok(Formula::Rel(name, args)),
                Some(arity) => Err(self.err_here(format!(
                    "{name} has arity {arity}, got {} arguments",
                    args.len()
                ))),
                None => Err(self.err_here(format!("unknown relation `{name}`"))),
            }
        } else {
            let left = self.term_from(name);
            match self.peek() {
                Some(Tok::Eq) => {
                    self.pos += 1;
                    let right = self.ident("a term")?;
                    Ok(Formula::Eq(left, self.term_from(right)))
                }
                Some(Tok::Neq) => {
                    self.pos += 1;
                    let right = self.ident("a term")?;
                    Ok(Formula::Neq(left, self.term_from(right)))
                }
                _ => Err(self.err_here("expected `=`, `!=`, or a relation atom".into())),
            }
        }
    }
}

/// Substitutes terms for free variables, renaming bound variables that
/// would capture an argument.
fn substitute(f: &Formula, map: &HashMap<String, Term>) -> Formula {
    let term = |t: &Term| match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    };
    match f {
        Formula::Rel(sym, args) => Formula::Rel(sym.clone(), args.iter().map(term).collect()),
        Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
        Formula::Neq(a, b) => Formula::Neq(term(a), term(b)),
        Formula::Not(g) => Formula::not(substitute(g, map)),
        Formula::And(l, r) => Formula::and(substitute(l, map), substitute(r, map)),
        Formula::Or(l, r) => Formula::or(substitute(l, map), substitute(r, map)),
        Formula::Implies(l, r) => Formula::implies(substitute(l, map), substitute(r, map)),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let mut inner = map.clone();
            inner.remove(v);
            let captured = inner
                .values()
                .any(|t| matches!(t, Term::Var(name) if name == v));
            let (v, g) = if captured {
                let mut fresh = format!("{v}_1");
                let mut n = 1;
                let avoid: BTreeSet<String> = g
                    .free_vars()
                    .into_iter()
                    .chain(inner.keys().cloned())
                    .chain(inner.values().map(|t| t.name().to_string()))
                    .collect();
                while avoid.contains(&fresh) {
                    n += 1;
                    fresh = format!("{v}_{n}");
                }
                let renamed = substitute(
                    g,
                    &HashMap::from([(v.clone(), Term::Var(fresh.clone()))]),
                );
                (fresh, renamed)
            } else {
                (v.clone(), (**g).clone())
            };
            let body = Box::new(substitute(&g, &inner));
            match f {
                Formula::Exists(..) => Formula::Exists(v, body),
                _ => Formula::Forall(v, body),
            }
        }
    }
}

/// Parses a formula program: zero or more `def name(params) := body` lines
/// followed by one formula, with macros expanded syntactically.
pub fn parse_formula(
    text: &str,
    vocab: &Vocabulary,
    universe: &Universe,
    extended: bool,
) -> Result<Formula> {
    let mut macros = HashMap::new();
    let mut formula_lines: Vec<&str> = Vec::new();
    let mut formula_first_line = 0;
    for (li, line) in text.lines().enumerate() {
        let stripped = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let trimmed = stripped.trim();
        if trimmed.starts_with("def ") || trimmed == "def" {
            if !formula_lines.iter().any(|l| !l.trim().is_empty()) {
                formula_lines.clear();
            } else {
                return Err(Error::Syntax {
                    line: li + 1,
                    col: 1,
                    msg: "definitions must precede the formula".into(),
                });
            }
            let (name, mac) = parse_def(trimmed, li + 1, vocab, universe, extended, &macros)?;
            if vocab.arity(&name).is_some() {
                return Err(Error::Syntax {
                    line: li + 1,
                    col: 1,
                    msg: format!("`{name}` is already a relation"),
                });
            }
            if macros.insert(name.clone(), mac).is_some() {
                return Err(Error::Syntax {
                    line: li + 1,
                    col: 1,
                    msg: format!("`{name}` defined twice"),
                });
            }
        } else {
            if formula_lines.is_empty() && !trimmed.is_empty() {
                formula_first_line = li;
            }
            formula_lines.push(stripped);
        }
    }
    let body: String = formula_lines.join("\n");
    if body.trim().is_empty() {
        return Err(Error::Syntax {
            line: 1,
            col: 1,
            msg: "no formula given".into(),
        });
    }
    let mut toks = lex(&body)?;
    for s in &mut toks {
        s.line += formula_first_line;
    }
    let mut p = Parser {
        toks,
        pos: 0,
        vocab,
        universe,
        extended,
        macros,
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(p.err_here("unexpected trailing input".into()));
    }
    Ok(f)
}

fn parse_def(
    line: &str,
    line_no: usize,
    vocab: &Vocabulary,
    universe: &Universe,
    extended: bool,
    macros: &HashMap<String, Macro>,
) -> Result<(String, Macro)> {
    let rest = line.strip_prefix("def").unwrap_or(line);
    let toks = lex(rest)?;
    let reline = |mut e: Error| {
        if let Error::Syntax { line, .. } = &mut e {
            *line = line_no;
        }
        e
    };
    let mut p = Parser {
        toks,
        pos: 0,
        vocab,
        universe,
        extended,
        macros: HashMap::new(),
    };
    let build = |p: &mut Parser| -> Result<(String, Vec<String>)> {
        let name = p.ident("a definition name")?;
        p.expect(Tok::LPar, "`(`")?;
        let mut params = Vec::new();
        if p.peek() != Some(&Tok::RPar) {
            loop {
                let v = p.ident("a parameter")?;
                if p.universe.contains(&v) {
                    return Err(p.err_here(format!("parameter `{v}` is a ground value")));
                }
                params.push(v);
                if p.peek() == Some(&Tok::Comma) {
                    p.pos += 1;
                } else {
                    break;
                }
            }
        }
        p.expect(Tok::RPar, "`)`")?;
        p.expect(Tok::Assign, "`:=`")?;
        Ok((name, params))
    };
    let (name, params) = build(&mut p).map_err(reline)?;
    // The body may call earlier definitions.
    p.macros = macros.clone();
    let body = p.formula().map_err(reline)?;
    if p.pos != p.toks.len() {
        return Err(reline(p.err_here("unexpected trailing input".into())));
    }
    Ok((name, Macro { params, body }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni() -> Universe {
        Universe::new(["a", "b", "c"]).unwrap()
    }

    fn vocab() -> Vocabulary {
        Vocabulary::with(&[("E", 2)]).unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &vocab(), &uni(), false).unwrap()
    }

    fn parse_ext(text: &str) -> Formula {
        parse_formula(text, &vocab(), &uni(), true).unwrap()
    }

    const DOMINANT: &str = "def dominant(x) := forall y. (x = y | (E(x,y) & !E(y,x)))";

    #[test]
    fn macro_expansion_builds_the_dominant_sentence() {
        let f = parse(&format!("{DOMINANT}\nforall x. !dominant(x)"));
        let expected = Formula::forall(
            "x",
            Formula::not(Formula::forall(
                "y",
                Formula::or(
                    Formula::Eq(Term::Var("x".into()), Term::Var("y".into())),
                    Formula::and(
                        Formula::Rel(
                            "E".into(),
                            vec![Term::Var("x".into()), Term::Var("y".into())],
                        ),
                        Formula::not(Formula::Rel(
                            "E".into(),
                            vec![Term::Var("y".into()), Term::Var("x".into())],
                        )),
                    ),
                ),
            )),
        );
        assert_eq!(f, expected);
        assert!(f.is_sentence());
    }

    #[test]
    fn comment_lines_may_precede_definitions() {
        let plain = parse(&format!("{DOMINANT}\nforall x. !dominant(x)"));
        let commented = parse(&format!(
            "# no vertex beats every other vertex\n{DOMINANT}\n# body\nforall x. !dominant(x)"
        ));
        assert_eq!(plain, commented);
    }

    #[test]
    fn macro_arguments_avoid_capture() {
        let f = parse(&format!("{DOMINANT}\ndominant(y)"));
        // The binder y in the body must be renamed away from the argument.
        match f {
            Formula::Forall(v, _) => assert_eq!(v, "y_1"),
            other => panic!("unexpected shape: {other}"),
        }
    }

    #[test]
    fn implication_parses_at_lowest_precedence_in_extended_mode() {
        let f = parse_ext("exists x. forall y. E(x,y) -> forall y. exists x. E(x,y)");
        match &f {
            Formula::Implies(l, r) => {
                assert_eq!(l.to_string(), "exists x. forall y. E(x,y)");
                assert_eq!(r.to_string(), "forall y. exists x. E(x,y)");
            }
            other => panic!("expected an implication, got {other}"),
        }
        assert!(parse_formula(
            "E(a,b) -> E(b,a)",
            &vocab(),
            &uni(),
            false
        )
        .is_err());
    }

    #[test]
    fn nnf_of_the_dominant_negation() {
        let dominant_a = parse(&format!("{DOMINANT}\ndominant(a)"));
        let got = nnf(&Formula::not(dominant_a)).unwrap();
        let want = parse("exists y. a != y & (!E(a,y) | E(y,a))");
        assert_eq!(got, want);
        assert!(got.is_nnf());
        assert_eq!(nnf(&got).unwrap(), got);
    }

    #[test]
    fn nnf_of_the_negated_tautology() {
        let psi = parse_ext("exists x. forall y. E(x,y) -> forall y. exists x. E(x,y)");
        let got = nnf(&Formula::not(psi.rewrite_implies())).unwrap();
        let want = parse("(exists x. forall y. E(x,y)) & (exists y. forall x. !E(x,y))");
        assert_eq!(got, want);
        let lit = parse("!E(a,b)");
        assert_eq!(nnf(&lit).unwrap(), lit);
    }

    #[test]
    fn nnf_rejects_implications() {
        let psi = parse_ext("E(a,b) -> E(b,a)");
        assert!(matches!(nnf(&psi), Err(Error::ExtendedOnly { .. })));
        assert!(nnf(&psi.rewrite_implies()).is_ok());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_formula("E(a,b) & E(b,", &vocab(), &uni(), false).unwrap_err();
        match err {
            Error::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 14);
            }
            other => panic!("unexpected error {other}"),
        }
        assert!(parse_formula("E(a)", &vocab(), &uni(), false).is_err());
        assert!(parse_formula("F(a,b)", &vocab(), &uni(), false).is_err());
        assert!(parse_formula("forall a. E(a,a)", &vocab(), &uni(), false).is_err());
    }

    #[test]
    fn instantiation_substitutes_free_occurrences_only() {
        let dominant_x = parse(&format!("{DOMINANT}\ndominant(x)"));
        let at_b = dominant_x.instantiate("x", "b");
        assert_eq!(
            at_b.to_string(),
            "forall y. (b = y | (E(b,y) & !E(y,b)))"
        );
        let shadowed = parse("exists x. E(x,x)").instantiate("x", "a");
        assert_eq!(shadowed.to_string(), "exists x. E(x,x)");
    }

    #[test]
    fn ground_literal_enumeration() {
        let lits = ground_literals(&vocab(), &uni());
        assert_eq!(lits.len(), 18);
        assert!(lits[0].positive);
        assert_eq!(lits[0].fact.to_string(), "E(a,a)");
        assert_eq!(lits[1].to_string(), "-E(a,a)");
        let single = ground_literals(
            &Vocabulary::with(&[("R", 1)]).unwrap(),
            &Universe::new(["a"]).unwrap(),
        );
        assert_eq!(single.len(), 2);
        assert_eq!(single[0].to_string(), "+R(a)");
        assert_eq!(single[1].to_string(), "-R(a)");
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        for text in [
            "forall x. !dominant(x)",
            "exists y. a != y & (!E(a,y) | E(y,a))",
            "(E(a,b) & E(b,c)) | !E(a,c)",
            "forall x. exists y. E(x,y) | x = y",
        ] {
            let f = if text.contains("dominant") {
                parse(&format!("{DOMINANT}\n{text}"))
            } else {
                parse(text)
            };
            let reparsed = parse(&f.to_string());
            assert_eq!(reparsed, f, "through {text}");
        }
    }

    #[test]
    fn quantifier_scope_extends_over_disjunction() {
        let f = parse("forall x. E(x,a) | E(x,b)");
        match f {
            Formula::Forall(_, body) => {
                assert!(matches!(*body, Formula::Or(..)));
            }
            other => panic!("unexpected shape: {other}"),
        }
    }
}
