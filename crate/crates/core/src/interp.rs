//! Finite structures and semiring interpretations of ground literals.
//!
//! An interpretation maps every ground literal to a semiring value, with
//! per-sign defaults covering the literals it does not list. Depending on
//! its shape it may define a single model, or carve out a whole family of
//! compatible models whose facts are left as tracked unknowns.

use crate::error::{Error, Result};
use crate::logic::{tuples, Formula, GroundFact, GroundLiteral, Term, Universe, Vocabulary};
use crate::poly::Token;
use crate::semiring::{Semiring, Value};
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Checks a ground fact against a vocabulary and universe.
pub(crate) fn check_fact(
    vocab: &Vocabulary,
    universe: &Universe,
    fact: &GroundFact,
) -> Result<()> {
    match vocab.arity(&fact.sym) {
        None => {
            return Err(Error::VocabularyMismatch(format!(
                "unknown relation `{}`",
                fact.sym
            )))
        }
        Some(a) if a != fact.args.len() => {
            return Err(Error::VocabularyMismatch(format!(
                "{} has arity {a}, got {} arguments",
                fact.sym,
                fact.args.len()
            )))
        }
        _ => {}
    }
    for v in &fact.args {
        if !universe.contains(v) {
            return Err(Error::VocabularyMismatch(format!(
                "`{v}` is not a universe element"
            )));
        }
    }
    Ok(())
}

/// A finite relational structure: the universe, the vocabulary, and per
/// relation the set of tuples it holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    universe: Universe,
    vocab: Vocabulary,
    relations: BTreeMap<String, BTreeSet<Vec<String>>>,
}

impl Structure {
    pub fn new(universe: Universe, vocab: Vocabulary) -> Structure {
        let relations = vocab
            .relations()
            .map(|(n, _)| (n.to_string(), BTreeSet::new()))
            .collect();
        Structure {
            universe,
            vocab,
            relations,
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn check_fact(&self, fact: &GroundFact) -> Result<()> {
        check_fact(&self.vocab, &self.universe, fact)
    }

    pub fn insert(&mut self, fact: &GroundFact) -> Result<()> {
        self.check_fact(fact)?;
        self.relations
            .get_mut(&fact.sym)
            .unwrap()
            .insert(fact.args.clone());
        Ok(())
    }

    pub fn remove(&mut self, fact: &GroundFact) -> Result<()> {
        self.check_fact(fact)?;
        self.relations.get_mut(&fact.sym).unwrap().remove(&fact.args);
        Ok(())
    }

    pub fn holds(&self, fact: &GroundFact) -> bool {
        self.relations
            .get(&fact.sym)
            .is_some_and(|tuples| tuples.contains(&fact.args))
    }

    pub fn satisfies_literal(&self, lit: &GroundLiteral) -> bool {
        self.holds(&lit.fact) == lit.positive
    }

    /// Every fact that holds, relations alphabetical, tuples in universe
    /// order.
    pub fn facts(&self) -> Vec<GroundFact> {
        let mut out = Vec::new();
        for (sym, _) in self.vocab.relations() {
            let mut held: Vec<&Vec<String>> = self.relations[sym].iter().collect();
            held.sort_by_key(|t| self.universe.tuple_key(t));
            for tuple in held {
                out.push(GroundFact {
                    sym: sym.to_string(),
                    args: tuple.clone(),
                });
            }
        }
        out
    }

    /// The structure after applying a set of insertions and deletions.
    pub fn updated(&self, insert: &[GroundFact], delete: &[GroundFact]) -> Result<Structure> {
        let mut next = self.clone();
        for f in insert {
            next.insert(f)?;
        }
        for f in delete {
            next.remove(f)?;
        }
        Ok(next)
    }

    /// Classical two-valued satisfaction, defined for any formula shape
    /// including nested negation and implication. Serves as the
    /// independent truth oracle.
    pub fn satisfies(&self, f: &Formula) -> Result<bool> {
        fn term<'a>(
            t: &'a Term,
            env: &'a HashMap<String, String>,
            uni: &Universe,
        ) -> Result<&'a str> {
            match t {
                Term::Var(v) => env
                    .get(v)
                    .map(String::as_str)
                    .ok_or_else(|| Error::FreeVariable(v.clone())),
                Term::Value(c) => {
                    if uni.contains(c) {
                        Ok(c)
                    } else {
                        Err(Error::VocabularyMismatch(format!(
                            "`{c}` is not a universe element"
                        )))
                    }
                }
            }
        }
        fn sat(s: &Structure, f: &Formula, env: &mut HashMap<String, String>) -> Result<bool> {
            Ok(match f {
                Formula::Rel(sym, args) => {
                    let mut ground = Vec::with_capacity(args.len());
                    for a in args {
                        ground.push(term(a, env, &s.universe)?.to_string());
                    }
                    let fact = GroundFact {
                        sym: sym.clone(),
                        args: ground,
                    };
                    s.check_fact(&fact)?;
                    s.holds(&fact)
                }
                Formula::Eq(a, b) => term(a, env, &s.universe)? == term(b, env, &s.universe)?,
                Formula::Neq(a, b) => term(a, env, &s.universe)? != term(b, env, &s.universe)?,
                Formula::Not(g) => !sat(s, g, env)?,
                Formula::And(l, r) => sat(s, l, env)? && sat(s, r, env)?,
                Formula::Or(l, r) => sat(s, l, env)? || sat(s, r, env)?,
                Formula::Implies(l, r) => !sat(s, l, env)? || sat(s, r, env)?,
                Formula::Exists(v, g) => {
                    let saved = env.get(v).cloned();
                    let mut found = false;
                    for e in s.universe.elements() {
                        env.insert(v.clone(), e.clone());
                        if sat(s, g, env)? {
                            found = true;
                            break;
                        }
                    }
                    restore(env, v, saved);
                    found
                }
                Formula::Forall(v, g) => {
                    let saved = env.get(v).cloned();
                    let mut all = true;
                    for e in s.universe.elements() {
                        env.insert(v.clone(), e.clone());
                        if !sat(s, g, env)? {
                            all = false;
                            break;
                        }
                    }
                    restore(env, v, saved);
                    all
                }
            })
        }
        fn restore(env: &mut HashMap<String, String>, v: &str, saved: Option<String>) {
            match saved {
                Some(old) => env.insert(v.to_string(), old),
                None => env.remove(v),
            };
        }
        sat(self, f, &mut HashMap::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpretationClass {
    ModelDefining,
    ModelCompatible,
    Neither,
}

impl fmt::Display for InterpretationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterpretationClass::ModelDefining => "model-defining",
            InterpretationClass::ModelCompatible => "model-compatible",
            InterpretationClass::Neither => "neither",
        })
    }
}

/// A total map from ground literals to semiring values, stored as the
/// explicit assignments plus one default per literal sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    semiring: Semiring,
    universe: Universe,
    vocab: Vocabulary,
    assignments: BTreeMap<GroundLiteral, Value>,
    default_positive: Value,
    default_negative: Value,
}

impl Interpretation {
    /// Starts out all-default: facts are absent (0) and negated facts
    /// hold freely (1).
    pub fn new(semiring: Semiring, universe: Universe, vocab: Vocabulary) -> Interpretation {
        let default_positive = semiring.zero();
        let default_negative = semiring.one();
        Interpretation {
            semiring,
            universe,
            vocab,
            assignments: BTreeMap::new(),
            default_positive,
            default_negative,
        }
    }

    pub fn semiring(&self) -> &Semiring {
        &self.semiring
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn default_for(&self, positive: bool) -> &Value {
        if positive {
            &self.default_positive
        } else {
            &self.default_negative
        }
    }

    pub fn set_default(&mut self, positive: bool, value: Value) -> Result<()> {
        self.semiring.check_value(&value)?;
        if positive {
            self.default_positive = value;
        } else {
            self.default_negative = value;
        }
        Ok(())
    }

    pub fn assign(&mut self, lit: GroundLiteral, value: Value) -> Result<()> {
        check_fact(&self.vocab, &self.universe, &lit.fact)?;
        self.semiring.check_value(&value)?;
        self.assignments.insert(lit, value);
        Ok(())
    }

    /// Shorthand for an untracked present fact: the fact maps to 1 and
    /// its negation to 0.
    pub fn add_fact(&mut self, fact: GroundFact) -> Result<()> {
        self.assign(GroundLiteral::positive(fact.clone()), self.semiring.one())?;
        self.assign(GroundLiteral::negative(fact), self.semiring.zero())
    }

    pub fn lookup(&self, lit: &GroundLiteral) -> &Value {
        self.assignments
            .get(lit)
            .unwrap_or_else(|| self.default_for(lit.positive))
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&GroundLiteral, &Value)> {
        self.assignments.iter()
    }

    /// Every ground fact of the vocabulary over the universe, in
    /// canonical order.
    pub fn ground_facts(&self) -> Vec<GroundFact> {
        let mut out = Vec::new();
        for (sym, arity) in self.vocab.relations() {
            for tuple in tuples(&self.universe, arity) {
                out.push(GroundFact {
                    sym: sym.to_string(),
                    args: tuple,
                });
            }
        }
        out
    }

    fn fact_pair(&self, fact: &GroundFact) -> (&Value, &Value) {
        (
            self.lookup(&GroundLiteral::positive(fact.clone())),
            self.lookup(&GroundLiteral::negative(fact.clone())),
        )
    }

    pub fn is_model_defining(&self) -> Result<bool> {
        for fact in self.ground_facts() {
            let (p, n) = self.fact_pair(&fact);
            if self.semiring.is_zero(p)? == self.semiring.is_zero(n)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The facts whose value pair breaks the one-zero-per-pair rule.
    fn defining_violations(&self) -> Result<Vec<GroundFact>> {
        let mut out = Vec::new();
        for fact in self.ground_facts() {
            let (p, n) = self.fact_pair(&fact);
            if self.semiring.is_zero(p)? == self.semiring.is_zero(n)? {
                out.push(fact);
            }
        }
        Ok(out)
    }

    /// Per fact, either both values are untracked constants deciding the
    /// fact, or they form a token and its twin, each token base naming at
    /// most one fact. Requires a polynomial semiring with twin
    /// cancellation.
    pub fn is_model_compatible(&self) -> Result<bool> {
        if !self.semiring.poly_tag().is_some_and(|t| t.dual()) {
            return Ok(false);
        }
        let mut base_owner: HashMap<&'static str, GroundFact> = HashMap::new();
        for fact in self.ground_facts() {
            let (p, n) = self.fact_pair(&fact);
            let decided = (self.semiring.is_zero(p)? && self.semiring.is_one(n)?)
                || (self.semiring.is_one(p)? && self.semiring.is_zero(n)?);
            if decided {
                continue;
            }
            match (single_token(p), single_token(n)) {
                (Some(x), Some(y)) if x.is_positive() && y == x.twin() => {
                    if let Some(prev) = base_owner.insert(x.base(), fact.clone()) {
                        if prev != fact {
                            return Ok(false);
                        }
                    }
                }
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn classify(&self) -> Result<InterpretationClass> {
        if self.is_model_defining()? {
            Ok(InterpretationClass::ModelDefining)
        } else if self.is_model_compatible()? {
            Ok(InterpretationClass::ModelCompatible)
        } else {
            Ok(InterpretationClass::Neither)
        }
    }

    /// The unique structure holding exactly the facts with nonzero value.
    pub fn defined_model(&self) -> Result<Structure> {
        let violations = self.defining_violations()?;
        if !violations.is_empty() {
            let listed: Vec<String> = violations.iter().map(|f| f.to_string()).collect();
            return Err(Error::NotModelDefining(listed.join(", ")));
        }
        let mut a = Structure::new(self.universe.clone(), self.vocab.clone());
        for fact in self.ground_facts() {
            if !self.semiring.is_zero(self.fact_pair(&fact).0)? {
                a.insert(&fact)?;
            }
        }
        Ok(a)
    }

    /// Membership of a structure in the family the interpretation leaves
    /// open: every literal pinned to 1 must hold.
    pub fn compatible(&self, a: &Structure) -> Result<bool> {
        if !self.is_model_compatible()? {
            return Err(Error::NotModelCompatible(
                "the interpretation does not split into decided facts and token pairs".into(),
            ));
        }
        Ok(self.violated_literal(a)?.is_none())
    }

    fn violated_literal(&self, a: &Structure) -> Result<Option<GroundLiteral>> {
        for fact in self.ground_facts() {
            for lit in [
                GroundLiteral::positive(fact.clone()),
                GroundLiteral::negative(fact),
            ] {
                if self.semiring.is_one(self.lookup(&lit))? && !a.satisfies_literal(&lit) {
                    return Ok(Some(lit));
                }
            }
        }
        Ok(None)
    }

    /// Pins the interpretation down to one compatible structure: literals
    /// that fail in it drop to 0, everything else keeps its value.
    pub fn specialize(&self, a: &Structure) -> Result<Interpretation> {
        if !self.is_model_compatible()? {
            return Err(Error::NotModelCompatible(
                "the interpretation does not split into decided facts and token pairs".into(),
            ));
        }
        if let Some(lit) = self.violated_literal(a)? {
            return Err(Error::IncompatibleStructure {
                literal: lit.to_string(),
            });
        }
        let mut out = Interpretation::new(
            self.semiring.clone(),
            self.universe.clone(),
            self.vocab.clone(),
        );
        out.default_positive = self.default_positive.clone();
        out.default_negative = self.default_negative.clone();
        for fact in self.ground_facts() {
            for lit in [
                GroundLiteral::positive(fact.clone()),
                GroundLiteral::negative(fact),
            ] {
                let value = if a.satisfies_literal(&lit) {
                    self.lookup(&lit).clone()
                } else {
                    self.semiring.zero()
                };
                if value != *out.default_for(lit.positive) {
                    out.assignments.insert(lit, value);
                }
            }
        }
        Ok(out)
    }

    /// For provenance-tracking interpretations: which literal each token
    /// annotates. Fails when a value is neither a constant nor a single
    /// matching-sign token, or when a base names two facts.
    pub fn tracked_literals(&self) -> Result<BTreeMap<Token, GroundLiteral>> {
        if self.semiring.poly_tag().is_none() {
            return Err(Error::NotProvenanceTracking(format!(
                "semiring {} carries no tokens",
                self.semiring.name()
            )));
        }
        for d in [&self.default_positive, &self.default_negative] {
            if !(self.semiring.is_zero(d)? || self.semiring.is_one(d)?) {
                return Err(Error::NotProvenanceTracking(format!(
                    "default value {d} is not 0 or 1"
                )));
            }
        }
        let mut map = BTreeMap::new();
        let mut base_owner: HashMap<&'static str, GroundFact> = HashMap::new();
        for (lit, value) in &self.assignments {
            if self.semiring.is_zero(value)? || self.semiring.is_one(value)? {
                continue;
            }
            let token = match single_token(value) {
                Some(t) => t,
                None => {
                    return Err(Error::NotProvenanceTracking(format!(
                        "literal {lit} maps to {value}, not a constant or single token"
                    )))
                }
            };
            if token.is_positive() != lit.positive {
                return Err(Error::NotProvenanceTracking(format!(
                    "literal {lit} maps to the wrong-sign token {token}"
                )));
            }
            if let Some(prev) = base_owner.insert(token.base(), lit.fact.clone()) {
                if prev != lit.fact {
                    return Err(Error::NotProvenanceTracking(format!(
                        "token base {} annotates both {prev} and {}",
                        token.base(),
                        lit.fact
                    )));
                }
            }
            if map.insert(token, lit.clone()).is_some() {
                return Err(Error::NotProvenanceTracking(format!(
                    "token {token} annotates two literals"
                )));
            }
        }
        Ok(map)
    }
}

/// The single-token polynomial reading of a value, if it has one.
fn single_token(v: &Value) -> Option<Token> {
    match v {
        Value::Poly(p) => match p.monomials() {
            [m] if m.coeff().is_one() => match m.factors() {
                [(tok, 1)] => Some(*tok),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// The Boolean interpretation that is exactly the structure: facts that
/// hold map to true, everything else follows the defaults.
pub fn canonical_truth(a: &Structure) -> Interpretation {
    canonical(a, Semiring::Bool)
}

/// The counting interpretation: every fact that holds counts once.
pub fn canonical_counting(a: &Structure) -> Interpretation {
    canonical(a, Semiring::Nat)
}

fn canonical(a: &Structure, semiring: Semiring) -> Interpretation {
    let mut pi = Interpretation::new(semiring, a.universe().clone(), a.vocab().clone());
    for fact in a.facts() {
        pi.add_fact(fact).expect("facts of a structure are valid");
    }
    pi
}

/// Parses the line-oriented structure file format.
pub fn parse_interpretation(text: &str) -> Result<Interpretation> {
    let mut universe: Option<Universe> = None;
    let mut vocab = Vocabulary::new();
    let mut semiring: Option<Semiring> = None;
    let mut pending: Vec<(usize, String)> = Vec::new();

    let syntax = |line: usize, msg: String| Error::Syntax { line, col: 1, msg };

    for (li, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (directive, rest) = match line.split_once(char::is_whitespace) {
            Some((d, r)) => (d, r.trim()),
            None => (line, ""),
        };
        let (directive, rest) = match directive.strip_suffix(':') {
            Some(d) => (d, rest),
            None => match rest.strip_prefix(':') {
                Some(r) if directive == "universe" || directive == "relation"
                    || directive == "semiring" => (directive, r.trim()),
                _ => (directive, rest),
            },
        };
        match directive {
            "universe" => {
                if universe.is_some() {
                    return Err(syntax(li + 1, "universe declared twice".into()));
                }
                universe = Some(Universe::new(rest.split_whitespace())?);
            }
            "relation" => {
                let (name, arity) = rest.split_once('/').ok_or_else(|| {
                    syntax(li + 1, format!("expected `name/arity`, got `{rest}`"))
                })?;
                let arity: usize = arity
                    .trim()
                    .parse()
                    .map_err(|_| syntax(li + 1, format!("bad arity `{arity}`")))?;
                vocab.add(name.trim(), arity)?;
            }
            "semiring" => {
                if semiring.is_some() {
                    return Err(syntax(li + 1, "semiring declared twice".into()));
                }
                semiring = Some(Semiring::from_name(rest)?);
            }
            "default" | "annot" | "fact" => {
                pending.push((li + 1, line.to_string()));
            }
            other => {
                return Err(syntax(li + 1, format!("unknown directive `{other}`")));
            }
        }
    }

    let universe =
        universe.ok_or_else(|| syntax(1, "missing `universe:` declaration".into()))?;
    let semiring =
        semiring.ok_or_else(|| syntax(1, "missing `semiring:` declaration".into()))?;
    let mut pi = Interpretation::new(semiring, universe, vocab);

    for (ln, line) in pending {
        let (directive, rest) = line
            .split_once(char::is_whitespace)
            .unwrap_or((line.as_str(), ""));
        let rest = rest.trim();
        match directive {
            "default" => {
                let rest = rest.trim_start();
                let (sign, tail) = rest
                    .split_at_checked(1)
                    .filter(|(s, _)| *s == "+" || *s == "-")
                    .ok_or_else(|| syntax(ln, "expected `default + : value`".into()))?;
                let value_text = tail
                    .trim_start()
                    .strip_prefix(':')
                    .ok_or_else(|| syntax(ln, "expected `:` after the sign".into()))?
                    .trim();
                let value = pi
                    .semiring
                    .parse_value(value_text)
                    .map_err(|e| relocate(e, ln))?;
                pi.set_default(sign == "+", value)?;
            }
            "annot" => {
                let (lit_text, value_text) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(ln, "expected `annot literal = value`".into()))?;
                let lit = parse_ground_literal(lit_text.trim(), &pi.vocab, &pi.universe)
                    .map_err(|e| relocate(e, ln))?;
                let value = pi
                    .semiring
                    .parse_value(value_text.trim())
                    .map_err(|e| relocate(e, ln))?;
                pi.assign(lit, value)?;
            }
            "fact" => {
                let fact = parse_ground_fact(rest, &pi.vocab, &pi.universe)
                    .map_err(|e| relocate(e, ln))?;
                pi.add_fact(fact)?;
            }
            _ => unreachable!(),
        }
    }
    Ok(pi)
}

fn relocate(mut e: Error, ln: usize) -> Error {
    if let Error::Syntax { line, .. } = &mut e {
        *line = ln;
    }
    e
}

/// Parses `+E(a,b)` or `-E(a,b)`.
pub fn parse_ground_literal(
    text: &str,
    vocab: &Vocabulary,
    universe: &Universe,
) -> Result<GroundLiteral> {
    let text = text.trim();
    let (positive, rest) = match text.split_at_checked(1) {
        Some(("+", rest)) => (true, rest),
        Some(("-", rest)) => (false, rest),
        _ => {
            return Err(Error::Syntax {
                line: 1,
                col: 1,
                msg: format!("literal `{text}` must start with `+` or `-`"),
            })
        }
    };
    Ok(GroundLiteral {
        fact: parse_ground_fact(rest, vocab, universe)?,
        positive,
    })
}

/// Parses `E(a,b)` against the vocabulary and universe.
pub fn parse_ground_fact(
    text: &str,
    vocab: &Vocabulary,
    universe: &Universe,
) -> Result<GroundFact> {
    let text = text.trim();
    let bad = |msg: String| Error::Syntax {
        line: 1,
        col: 1,
        msg,
    };
    let (sym, tail) = text
        .split_once('(')
        .ok_or_else(|| bad(format!("expected `relation(args)`, got `{text}`")))?;
    let sym = sym.trim();
    let args_text = tail
        .strip_suffix(')')
        .ok_or_else(|| bad(format!("missing `)` in `{text}`")))?;
    let args: Vec<String> = args_text
        .split(',')
        .map(|a| a.trim().to_string())
        .collect();
    if args.iter().any(String::is_empty) {
        return Err(bad(format!("empty argument in `{text}`")));
    }
    match vocab.arity(sym) {
        None => return Err(bad(format!("unknown relation `{sym}`"))),
        Some(a) if a != args.len() => {
            return Err(bad(format!(
                "{sym} has arity {a}, got {} arguments",
                args.len()
            )))
        }
        _ => {}
    }
    for v in &args {
        if !universe.contains(v) {
            return Err(bad(format!("`{v}` is not a universe element")));
        }
    }
    Ok(GroundFact {
        sym: sym.to_string(),
        args,
    })
}
