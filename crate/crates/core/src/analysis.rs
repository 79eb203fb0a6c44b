//! What the provenance is for: explaining answers and non-answers,
//! re-scoring a polynomial in other semirings, updating provenance under
//! fact insertions and deletions without re-evaluating, and computing
//! minimal repairs that make a failing sentence true, ranked by cost.
//!
//! Everything here works on the canonical dual polynomials produced by the
//! evaluator. The monomials of a pinned-down provenance are the sentence's
//! alternative justifications; their tokens decode back to literals, their
//! complements mark the facts a repair has to touch, and homomorphic
//! images turn the same polynomial into confidences, clearances or costs.

use crate::circuit::{fold, Folded};
use crate::error::{Error, Result};
use crate::eval::{evaluate, evaluate_circuit};
use crate::interp::{canonical_truth, Interpretation, Structure};
use crate::logic::{Formula, GroundFact, GroundLiteral};
use crate::poly::{Monomial, PolyTag, Polynomial, Token};
use crate::semiring::{Semiring, Value};
use num_traits::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

/// How many levels of alternating sums and products the equation-based
/// repair solver accepts before falling back to the monomial method.
const EQUATION_DEPTH_BUDGET: usize = 3;

/// Upper bound on candidate token sets while solving the repair equation.
const SOLUTION_CAP: usize = 10_000;

/// Label under which the sum of all monomial confidences is reported. The
/// sum mixes mutually exclusive readings of the tracked facts, so it is
/// never returned as a confidence.
pub const INCONSISTENT_AGGREGATE: &str = "inconsistent aggregate";

fn as_poly(pi: &Interpretation, value: Value, op: &'static str) -> Result<Polynomial> {
    match value {
        Value::Poly(p) => Ok(p),
        _ => Err(Error::Unsupported {
            semiring: pi.semiring().name(),
            op,
        }),
    }
}

fn dual_tag(pi: &Interpretation, op: &'static str) -> Result<PolyTag> {
    match pi.semiring().poly_tag() {
        Some(tag) if tag.dual() => Ok(tag),
        _ => Err(Error::Unsupported {
            semiring: pi.semiring().name(),
            op,
        }),
    }
}

/// Each tracked fact with its positive-form token.
fn tracked_facts(pi: &Interpretation) -> Result<BTreeMap<GroundFact, Token>> {
    let mut out: BTreeMap<GroundFact, Token> = BTreeMap::new();
    for (token, lit) in pi.tracked_literals()? {
        let pos = if token.is_positive() {
            token
        } else {
            token.twin()
        };
        if let Some(prev) = out.insert(lit.fact.clone(), pos) {
            if prev != pos {
                return Err(Error::NotProvenanceTracking(format!(
                    "fact {} is tracked by two token bases, {} and {}",
                    lit.fact,
                    prev.base(),
                    pos.base()
                )));
            }
        }
    }
    Ok(out)
}

/// The interpretation pinned to one structure: a model-compatible
/// interpretation is specialized to `a`, a model-defining one is kept as
/// is provided it defines exactly `a`.
fn pinned(pi: &Interpretation, a: &Structure) -> Result<Interpretation> {
    if pi.universe() != a.universe() || pi.vocab() != a.vocab() {
        return Err(Error::VocabularyMismatch(
            "the structure and the interpretation disagree on universe or vocabulary".into(),
        ));
    }
    if pi.is_model_defining()? {
        let model = pi.defined_model()?;
        if model != *a {
            let lit = model
                .facts()
                .into_iter()
                .find(|f| !a.holds(f))
                .map(GroundLiteral::positive)
                .or_else(|| {
                    a.facts()
                        .into_iter()
                        .find(|f| !model.holds(f))
                        .map(GroundLiteral::negative)
                })
                .expect("unequal structures differ on some fact");
            return Err(Error::IncompatibleStructure {
                literal: lit.to_string(),
            });
        }
        return Ok(pi.clone());
    }
    pi.specialize(a)
}

/// A monomial of the provenance together with the literals its tokens
/// annotate: one self-contained way of making the sentence true.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub monomial: Monomial,
    /// In monomial token order; empty for a constant monomial, which says
    /// the sentence holds on untracked facts alone.
    pub literals: Vec<GroundLiteral>,
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.monomial)?;
        if self.literals.is_empty() {
            return Ok(());
        }
        let listed: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        write!(f, " ({})", listed.join(", "))
    }
}

fn decode(m: Monomial, tracked: &BTreeMap<Token, GroundLiteral>) -> Result<Explanation> {
    let mut literals = Vec::new();
    for t in m.tokens() {
        match tracked.get(&t) {
            Some(lit) => literals.push(lit.clone()),
            None => {
                return Err(Error::NotProvenanceTracking(format!(
                    "token {t} does not annotate any literal"
                )))
            }
        }
    }
    Ok(Explanation {
        monomial: m,
        literals,
    })
}

/// Why the sentence holds in `a`: every monomial of the pinned provenance,
/// decoded. With `minimal` set, only absorption-minimal monomials are
/// kept, i.e. justifications not subsumed by a smaller one.
pub fn explanations(
    pi: &Interpretation,
    a: &Structure,
    s: &Formula,
    minimal: bool,
) -> Result<Vec<Explanation>> {
    let spec = pinned(pi, a)?;
    let tracked = spec.tracked_literals()?;
    let value = evaluate(&spec, s)?;
    let poly = as_poly(&spec, value, "explanations")?;
    if poly.is_zero() {
        return Err(Error::SentenceFalse);
    }
    let picked = if minimal {
        poly.minimal_monomials()
    } else {
        poly.monomials().to_vec()
    };
    picked.into_iter().map(|m| decode(m, &tracked)).collect()
}

/// Why the sentence fails in `a`: the explanations of its negation. Each
/// one names absences and presences that jointly block the sentence.
pub fn why_not(
    pi: &Interpretation,
    a: &Structure,
    s: &Formula,
    minimal: bool,
) -> Result<Vec<Explanation>> {
    let spec = pinned(pi, a)?;
    let value = evaluate(&spec, s)?;
    if !spec.semiring().is_zero(&value)? {
        return Err(Error::SentenceTrue);
    }
    explanations(pi, a, &Formula::not(s.clone()), minimal)
}

/// Which facts may change, and which changes are chosen: `insertable`
/// facts are absent from the base structure and may be added, `deletable`
/// ones are present and may be removed, and `chosen` is the update itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdatePlan {
    pub insertable: BTreeSet<GroundFact>,
    pub deletable: BTreeSet<GroundFact>,
    pub chosen: BTreeSet<GroundFact>,
}

impl UpdatePlan {
    pub fn new(
        insertable: BTreeSet<GroundFact>,
        deletable: BTreeSet<GroundFact>,
        chosen: BTreeSet<GroundFact>,
    ) -> Result<UpdatePlan> {
        let plan = UpdatePlan {
            insertable,
            deletable,
            chosen,
        };
        plan.check()?;
        Ok(plan)
    }

    /// The same changeable sets with a different chosen update.
    pub fn with_chosen(&self, chosen: BTreeSet<GroundFact>) -> Result<UpdatePlan> {
        UpdatePlan::new(self.insertable.clone(), self.deletable.clone(), chosen)
    }

    fn check(&self) -> Result<()> {
        if let Some(f) = self.insertable.intersection(&self.deletable).next() {
            return Err(Error::InvalidUpdate(format!(
                "{f} is listed as both insertable and deletable"
            )));
        }
        for f in &self.chosen {
            if !self.insertable.contains(f) && !self.deletable.contains(f) {
                return Err(Error::InvalidUpdate(format!(
                    "chosen fact {f} is neither insertable nor deletable"
                )));
            }
        }
        Ok(())
    }

    /// The structure after applying the chosen update to `base`.
    pub fn apply(&self, base: &Structure) -> Result<Structure> {
        let inserts: Vec<GroundFact> = self
            .chosen
            .iter()
            .filter(|f| self.insertable.contains(*f))
            .cloned()
            .collect();
        let deletes: Vec<GroundFact> = self
            .chosen
            .iter()
            .filter(|f| self.deletable.contains(*f))
            .cloned()
            .collect();
        base.updated(&inserts, &deletes)
    }
}

/// Reopens a tracking model-defining interpretation: every tracked fact
/// becomes an undecided token twin pair, every untracked fact keeps its
/// truth value. Also derives the plan skeleton: tracked absent facts are
/// insertable, tracked present ones deletable, nothing chosen yet.
pub fn generalized_interpretation(beta: &Interpretation) -> Result<(Interpretation, UpdatePlan)> {
    let tag = dual_tag(beta, "twin-token tracking")?;
    let base = beta.defined_model()?;
    let token_of = tracked_facts(beta)?;
    let mut general = Interpretation::new(
        beta.semiring().clone(),
        beta.universe().clone(),
        beta.vocab().clone(),
    );
    let mut insertable = BTreeSet::new();
    let mut deletable = BTreeSet::new();
    for fact in general.ground_facts() {
        if let Some(&token) = token_of.get(&fact) {
            general.assign(
                GroundLiteral::positive(fact.clone()),
                Value::Poly(Polynomial::from_token(tag, token)),
            )?;
            general.assign(
                GroundLiteral::negative(fact.clone()),
                Value::Poly(Polynomial::from_token(tag, token.twin())),
            )?;
            if base.holds(&fact) {
                deletable.insert(fact);
            } else {
                insertable.insert(fact);
            }
        } else if base.holds(&fact) {
            general.add_fact(fact)?;
        }
    }
    Ok((
        general,
        UpdatePlan::new(insertable, deletable, BTreeSet::new())?,
    ))
}

/// The provenance of `s` after applying the chosen update, computed from
/// the generalized provenance instead of re-evaluating from scratch.
///
/// Every tracked fact loses the token side the update decides against: a
/// fact left absent or deleted loses its positive token, one left present
/// or inserted loses its negative one. The result equals the provenance
/// under the tracking interpretation rebuilt for the updated structure.
pub fn update_provenance(
    beta: &Interpretation,
    plan: &UpdatePlan,
    s: &Formula,
) -> Result<Polynomial> {
    plan.check()?;
    let (general, derived) = generalized_interpretation(beta)?;
    if plan.insertable != derived.insertable || plan.deletable != derived.deletable {
        return Err(Error::InvalidUpdate(
            "the plan must list exactly the tracked absent facts as insertable \
             and the tracked present facts as deletable"
                .into(),
        ));
    }
    let token_of = tracked_facts(beta)?;
    let value = evaluate(&general, s)?;
    let poly = as_poly(&general, value, "provenance updates")?;
    let mut dead = HashSet::new();
    for (fact, token) in &token_of {
        let becomes_present = plan.deletable.contains(fact) != plan.chosen.contains(fact);
        dead.insert(if becomes_present {
            token.twin()
        } else {
            *token
        });
    }
    Ok(poly.zero_tokens(&dead))
}

/// An update that makes the target sentence hold.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Repair {
    pub inserts: BTreeSet<GroundFact>,
    pub deletes: BTreeSet<GroundFact>,
}

impl Repair {
    pub fn is_empty(&self) -> bool {
        self.inserts.is_empty() && self.deletes.is_empty()
    }

    /// Whether this repair changes no more than `other` does.
    pub fn subset_of(&self, other: &Repair) -> bool {
        self.inserts.is_subset(&other.inserts) && self.deletes.is_subset(&other.deletes)
    }

    pub fn apply(&self, base: &Structure) -> Result<Structure> {
        let inserts: Vec<GroundFact> = self.inserts.iter().cloned().collect();
        let deletes: Vec<GroundFact> = self.deletes.iter().cloned().collect();
        base.updated(&inserts, &deletes)
    }
}

impl fmt::Display for Repair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "no change");
        }
        let mut parts: Vec<String> = Vec::new();
        parts.extend(self.inserts.iter().map(|x| format!("insert {x}")));
        parts.extend(self.deletes.iter().map(|x| format!("delete {x}")));
        write!(f, "{}", parts.join("; "))
    }
}

fn keep_minimal(candidates: BTreeSet<Repair>) -> Vec<Repair> {
    candidates
        .iter()
        .filter(|r| !candidates.iter().any(|o| o != *r && o.subset_of(r)))
        .cloned()
        .collect()
}

fn verify_repair(base: &Structure, repair: &Repair, s: &Formula) -> Result<()> {
    let fixed = repair.apply(base)?;
    match evaluate(&canonical_truth(&fixed), s)? {
        Value::Bool(true) => Ok(()),
        _ => Err(Error::Internal(format!(
            "repair `{repair}` fails to satisfy the sentence"
        ))),
    }
}

/// The base structure a generalized interpretation and its plan describe:
/// deletable facts are present, and so is every untracked fact pinned to 1.
fn base_structure(pi: &Interpretation, plan: &UpdatePlan) -> Result<Structure> {
    let mut base = Structure::new(pi.universe().clone(), pi.vocab().clone());
    for fact in pi.ground_facts() {
        let held = plan.deletable.contains(&fact)
            || pi
                .semiring()
                .is_one(pi.lookup(&GroundLiteral::positive(fact.clone())))?;
        if held {
            base.insert(&fact)?;
        }
    }
    Ok(base)
}

/// Reads the minimal repairs off the monomials of the generalized
/// provenance. Within a monomial, a positive token of an insertable fact
/// and a negative token of a deletable fact name exactly the changes that
/// monomial's justification needs; every minimal repair shows up this way.
pub fn repairs_from_monomials(
    pi: &Interpretation,
    s: &Formula,
    plan: &UpdatePlan,
) -> Result<Vec<Repair>> {
    plan.check()?;
    if !pi.is_model_compatible()? {
        return Err(Error::NotModelCompatible(
            "repairs are read off an interpretation that leaves its tracked facts \
             open as token twin pairs"
                .into(),
        ));
    }
    let token_of = tracked_facts(pi)?;
    for f in plan.insertable.iter().chain(&plan.deletable) {
        if !token_of.contains_key(f) {
            return Err(Error::InvalidUpdate(format!(
                "{f} is not tracked by the interpretation"
            )));
        }
    }
    if token_of.len() != plan.insertable.len() + plan.deletable.len() {
        let missing = token_of
            .keys()
            .find(|f| !plan.insertable.contains(*f) && !plan.deletable.contains(*f))
            .expect("count mismatch implies an unlisted tracked fact");
        return Err(Error::InvalidUpdate(format!(
            "tracked fact {missing} is neither insertable nor deletable in the plan"
        )));
    }
    let base = base_structure(pi, plan)?;
    let value = evaluate(pi, s)?;
    let poly = as_poly(pi, value, "repair search")?;
    if poly.is_zero() {
        return Err(Error::NoRepair);
    }
    let fact_of: BTreeMap<&'static str, &GroundFact> =
        token_of.iter().map(|(f, t)| (t.base(), f)).collect();
    let mut candidates = BTreeSet::new();
    for m in poly.monomials() {
        let mut repair = Repair::default();
        for t in m.tokens() {
            let fact = *fact_of.get(t.base()).ok_or_else(|| {
                Error::Internal(format!("token {t} in the provenance is not tracked"))
            })?;
            if t.is_positive() && plan.insertable.contains(fact) {
                repair.inserts.insert(fact.clone());
            } else if !t.is_positive() && plan.deletable.contains(fact) {
                repair.deletes.insert(fact.clone());
            }
        }
        candidates.insert(repair);
    }
    let repairs = keep_minimal(candidates);
    for r in &repairs {
        verify_repair(&base, r, s)?;
    }
    Ok(repairs)
}

/// What has to vanish for the negated provenance to be zero: a product
/// vanishes when any child does, a sum when all of them do.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquationNode {
    /// Set this token to zero.
    Zero(Token),
    /// A nonzero constant; nothing zeroes it.
    Impossible,
    AnyOf(Vec<EquationNode>),
    AllOf(Vec<EquationNode>),
}

impl fmt::Display for EquationNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationNode::Zero(t) => write!(f, "{t} = 0"),
            EquationNode::Impossible => write!(f, "unsolvable"),
            EquationNode::AnyOf(ch) | EquationNode::AllOf(ch) => {
                write!(
                    f,
                    "{}(",
                    if matches!(self, EquationNode::AnyOf(_)) {
                        "any"
                    } else {
                        "all"
                    }
                )?;
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn equation_node(shape: &Folded, depth: usize) -> Option<EquationNode> {
    Some(match shape {
        Folded::Zero => EquationNode::AllOf(Vec::new()),
        Folded::One => EquationNode::Impossible,
        Folded::Leaf(t) => EquationNode::Zero(*t),
        Folded::Prod(ch) | Folded::Sum(ch) => {
            if depth == 0 {
                return None;
            }
            let kids = ch
                .iter()
                .map(|c| equation_node(c, depth - 1))
                .collect::<Option<Vec<_>>>()?;
            if matches!(shape, Folded::Prod(_)) {
                EquationNode::AnyOf(kids)
            } else {
                EquationNode::AllOf(kids)
            }
        }
    })
}

fn flat_sum(kids: Vec<Folded>) -> Folded {
    let mut out = Vec::new();
    for k in kids {
        match k {
            Folded::Zero => {}
            Folded::Sum(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Folded::Zero,
        1 => out.pop().unwrap(),
        _ => Folded::Sum(out),
    }
}

fn flat_prod(kids: Vec<Folded>) -> Folded {
    let mut out = Vec::new();
    for k in kids {
        match k {
            Folded::One => {}
            Folded::Zero => return Folded::Zero,
            Folded::Prod(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Folded::One,
        1 => out.pop().unwrap(),
        _ => Folded::Prod(out),
    }
}

/// One distributivity step: the first product with a sum child becomes
/// the sum of its instances. None when nothing is left to distribute.
fn distribute_once(shape: &Folded) -> Option<Folded> {
    match shape {
        Folded::Prod(ch) => {
            let i = ch.iter().position(|c| matches!(c, Folded::Sum(_)))?;
            let Folded::Sum(addends) = ch[i].clone() else {
                return None;
            };
            let mut rest = ch.clone();
            rest.remove(i);
            let instances = addends
                .into_iter()
                .map(|a| {
                    let mut kids = rest.clone();
                    kids.push(a);
                    flat_prod(kids)
                })
                .collect();
            Some(flat_sum(instances))
        }
        Folded::Sum(ch) => {
            for (i, c) in ch.iter().enumerate() {
                if let Some(d) = distribute_once(c) {
                    let mut kids = ch.clone();
                    kids[i] = d;
                    return Some(flat_sum(kids));
                }
            }
            None
        }
        _ => None,
    }
}

fn solution_sets(node: &EquationNode) -> Option<Vec<BTreeSet<Token>>> {
    Some(match node {
        EquationNode::Zero(t) => vec![BTreeSet::from([*t])],
        EquationNode::Impossible => Vec::new(),
        EquationNode::AnyOf(ch) => {
            let mut out = Vec::new();
            for c in ch {
                out.extend(solution_sets(c)?);
                if out.len() > SOLUTION_CAP {
                    return None;
                }
            }
            out
        }
        EquationNode::AllOf(ch) => {
            let mut acc = vec![BTreeSet::new()];
            for c in ch {
                let sols = solution_sets(c)?;
                if sols.is_empty() {
                    return Some(Vec::new());
                }
                let mut next = Vec::with_capacity(acc.len() * sols.len());
                for a in &acc {
                    for s in &sols {
                        let mut joined = a.clone();
                        joined.extend(s.iter().copied());
                        next.push(joined);
                    }
                }
                if next.len() > SOLUTION_CAP {
                    return None;
                }
                acc = next;
            }
            acc
        }
    })
}

fn minimal_sets(sets: Vec<BTreeSet<Token>>) -> Vec<BTreeSet<Token>> {
    let uniq: BTreeSet<BTreeSet<Token>> = sets.into_iter().collect();
    uniq.iter()
        .filter(|s| !uniq.iter().any(|o| o != *s && o.is_subset(s)))
        .cloned()
        .collect()
}

/// The outcome of solving "negated provenance = 0" for repairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationRepairs {
    /// The solved and-or tree; absent when the solver fell back.
    pub tree: Option<EquationNode>,
    /// Minimal token sets that zero the whole expression.
    pub solutions: Vec<BTreeSet<Token>>,
    pub repairs: Vec<Repair>,
    /// Set when the factored form did not cooperate and the monomial
    /// method answered instead.
    pub notice: Option<String>,
}

/// Solves for repairs on the factored provenance of the negation: a
/// product is zero once some factor is zeroed, a sum once all its addends
/// are. Zeroing a surviving positive token deletes its fact; zeroing a
/// negative one inserts it. Falls back to [`repairs_from_monomials`] when
/// the factored form nests too deep.
pub fn repairs_by_equation(
    pi: &Interpretation,
    a: &Structure,
    s: &Formula,
) -> Result<EquationRepairs> {
    let spec = pinned(pi, a)?;
    let value = evaluate(&spec, s)?;
    if !spec.semiring().is_zero(&value)? {
        return Err(Error::SentenceTrue);
    }
    let token_of = tracked_facts(&spec)?;
    let circuit = evaluate_circuit(&spec, &Formula::not(s.clone()))?;
    let mut shape = fold(&circuit);
    let mut tree = None;
    for _ in 0..=EQUATION_DEPTH_BUDGET {
        if let Some(t) = equation_node(&shape, EQUATION_DEPTH_BUDGET) {
            tree = Some(t);
            break;
        }
        match distribute_once(&shape) {
            Some(next) => shape = next,
            None => break,
        }
    }
    let Some(tree) = tree else {
        return equation_fallback(
            pi,
            a,
            s,
            "the factored form nests sums and products past the depth budget",
        );
    };
    let Some(raw) = solution_sets(&tree) else {
        return equation_fallback(pi, a, s, "the factored form has too many candidate solutions");
    };
    let solutions = minimal_sets(raw);
    let fact_of: BTreeMap<&'static str, &GroundFact> =
        token_of.iter().map(|(f, t)| (t.base(), f)).collect();
    let mut candidates = BTreeSet::new();
    for y in &solutions {
        let mut repair = Repair::default();
        for t in y {
            let fact = *fact_of.get(t.base()).ok_or_else(|| {
                Error::Internal(format!("token {t} in the provenance is not tracked"))
            })?;
            if t.is_positive() {
                repair.deletes.insert(fact.clone());
            } else {
                repair.inserts.insert(fact.clone());
            }
        }
        candidates.insert(repair);
    }
    let repairs = keep_minimal(candidates);
    for r in &repairs {
        verify_repair(a, r, s)?;
    }
    Ok(EquationRepairs {
        tree: Some(tree),
        solutions,
        repairs,
        notice: None,
    })
}

fn equation_fallback(
    pi: &Interpretation,
    a: &Structure,
    s: &Formula,
    why: &str,
) -> Result<EquationRepairs> {
    let (general, plan) = if pi.is_model_defining()? {
        generalized_interpretation(pi)?
    } else {
        let token_of = tracked_facts(pi)?;
        let mut insertable = BTreeSet::new();
        let mut deletable = BTreeSet::new();
        for fact in token_of.keys() {
            if a.holds(fact) {
                deletable.insert(fact.clone());
            } else {
                insertable.insert(fact.clone());
            }
        }
        (
            pi.clone(),
            UpdatePlan::new(insertable, deletable, BTreeSet::new())?,
        )
    };
    let repairs = repairs_from_monomials(&general, s, &plan)?;
    Ok(EquationRepairs {
        tree: None,
        solutions: Vec::new(),
        repairs,
        notice: Some(format!("fell back to the monomial method: {why}")),
    })
}

/// Per-token prices plus flat charges for the two kinds of change.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostModel {
    pub token_costs: BTreeMap<Token, f64>,
    pub insert_cost: f64,
    pub delete_cost: f64,
}

impl CostModel {
    pub fn new(insert_cost: f64, delete_cost: f64) -> CostModel {
        CostModel {
            token_costs: BTreeMap::new(),
            insert_cost,
            delete_cost,
        }
    }

    pub fn set_token(&mut self, token: Token, cost: f64) {
        self.token_costs.insert(token, cost);
    }

    fn check(&self) -> Result<()> {
        for (what, cost) in [("insert", self.insert_cost), ("delete", self.delete_cost)]
            .into_iter()
            .chain(self.token_costs.iter().map(|(t, &c)| (t.base(), c)))
        {
            if !cost.is_finite() || cost < 0.0 {
                return Err(Error::Carrier {
                    semiring: "tropical".into(),
                    value: cost.to_string(),
                    reason: format!("the cost for {what} must be finite and nonnegative"),
                });
            }
        }
        Ok(())
    }

    /// Reads lines of the form `insert = 20`, `delete = 15` and
    /// `token p = 10`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<CostModel> {
        let mut token_costs: BTreeMap<Token, f64> = BTreeMap::new();
        let mut insert_cost = None;
        let mut delete_cost = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |msg: String| Error::Syntax {
                line: idx + 1,
                col: 1,
                msg,
            };
            let (target, amount) = line
                .split_once('=')
                .ok_or_else(|| fail("expected `name = cost`".into()))?;
            let amount: f64 = amount
                .trim()
                .parse()
                .map_err(|_| fail(format!("`{}` is not a number", amount.trim())))?;
            if !amount.is_finite() || amount < 0.0 {
                return Err(fail("costs must be finite and nonnegative".into()));
            }
            match target.trim() {
                "insert" => {
                    if insert_cost.replace(amount).is_some() {
                        return Err(fail("the insert cost is set twice".into()));
                    }
                }
                "delete" => {
                    if delete_cost.replace(amount).is_some() {
                        return Err(fail("the delete cost is set twice".into()));
                    }
                }
                entry => {
                    let name = entry.strip_prefix("token").map(str::trim).filter(|n| {
                        !n.is_empty() && entry.len() > "token".len()
                    });
                    let name =
                        name.ok_or_else(|| fail(format!("unknown cost entry `{entry}`")))?;
                    let token = Token::parse(name)
                        .map_err(|_| fail(format!("`{name}` is not a token")))?;
                    if token_costs.insert(token, amount).is_some() {
                        return Err(fail(format!("the cost of {token} is set twice")));
                    }
                }
            }
        }
        let position = |msg: &str| Error::Syntax {
            line: text.lines().count().max(1),
            col: 1,
            msg: msg.into(),
        };
        match (insert_cost, delete_cost) {
            (Some(insert_cost), Some(delete_cost)) => Ok(CostModel {
                token_costs,
                insert_cost,
                delete_cost,
            }),
            (None, _) => Err(position("the cost model never sets the insert cost")),
            (_, None) => Err(position("the cost model never sets the delete cost")),
        }
    }
}

/// A repair together with the provenance it leaves behind and the
/// tropical cost of its cheapest justification.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRepair {
    pub repair: Repair,
    /// The provenance of the sentence in the repaired structure.
    pub provenance: Polynomial,
    /// The monomial realizing the cost, first in canonical order on ties.
    pub best_monomial: Monomial,
    pub cost: f64,
}

/// Prices every repair by evaluating its updated provenance in the
/// tropical semiring: freshly inserted facts charge the insertion cost,
/// freshly deleted ones the deletion cost, and every retained tracked
/// literal its own token cost. Returns the repairs cheapest first.
pub fn rank_repairs(
    repairs: &[Repair],
    pi: &Interpretation,
    a: &Structure,
    s: &Formula,
    cost: &CostModel,
) -> Result<Vec<RankedRepair>> {
    cost.check()?;
    let open = if pi.is_model_defining()? {
        generalized_interpretation(pi)?.0
    } else {
        pi.clone()
    };
    let token_of = tracked_facts(&open)?;
    let fact_of: BTreeMap<&'static str, &GroundFact> =
        token_of.iter().map(|(f, t)| (t.base(), f)).collect();
    let mut out = Vec::new();
    for repair in repairs {
        let fixed = repair.apply(a)?;
        let spec = open.specialize(&fixed)?;
        let value = evaluate(&spec, s)?;
        let prov = as_poly(&spec, value, "repair ranking")?;
        let mut price: HashMap<Token, f64> = HashMap::new();
        let mut missing: Vec<String> = Vec::new();
        for t in prov.token_set() {
            let fact = fact_of.get(t.base()).copied();
            let charged = if t.is_positive() && fact.is_some_and(|f| repair.inserts.contains(f)) {
                Some(cost.insert_cost)
            } else if !t.is_positive() && fact.is_some_and(|f| repair.deletes.contains(f)) {
                Some(cost.delete_cost)
            } else {
                cost.token_costs.get(&t).copied()
            };
            match charged {
                Some(c) => {
                    price.insert(t, c);
                }
                None => missing.push(t.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingAssignment(missing.join(", ")));
        }
        let assign: HashMap<Token, Value> =
            price.iter().map(|(&t, &c)| (t, Value::Real(c))).collect();
        let total = match prov.eval_hom(&Semiring::Tropical, &assign)? {
            Value::Real(x) => x,
            other => {
                return Err(Error::Internal(format!(
                    "tropical evaluation produced {other}"
                )))
            }
        };
        let best = prov
            .monomials()
            .iter()
            .map(|m| {
                let c: f64 = m
                    .factors()
                    .iter()
                    .map(|&(t, e)| price[&t] * f64::from(e))
                    .sum();
                (m, c)
            })
            .reduce(|best, next| if next.1 < best.1 { next } else { best })
            .ok_or_else(|| Error::Internal("a verified repair left zero provenance".into()))?;
        out.push(RankedRepair {
            repair: repair.clone(),
            provenance: prov.clone(),
            best_monomial: best.0.clone(),
            cost: total,
        });
    }
    out.sort_by(|x, y| x.cost.total_cmp(&y.cost));
    Ok(out)
}

/// One block per repair: the changes, the provenance they leave, and the
/// cost of the cheapest justification.
pub fn render_repair_report(ranked: &[RankedRepair]) -> String {
    let blocks: Vec<String> = ranked
        .iter()
        .map(|r| {
            format!(
                "repair: {}\nprovenance: {}\ncost: {}",
                r.repair,
                r.provenance,
                Value::Real(r.cost)
            )
        })
        .collect();
    blocks.join("\n\n")
}

/// Evaluates an already computed provenance polynomial in another
/// semiring: the same polynomial yields confidences, clearances or costs
/// depending on the assignment.
pub fn score(p: &Polynomial, sr: &Semiring, assign: &HashMap<Token, Value>) -> Result<Value> {
    p.eval_hom(sr, assign)
}

/// The tracked facts a monomial commits to, by token base; bases of the
/// polynomial it leaves untouched stay free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSketch {
    pub present: BTreeSet<&'static str>,
    pub absent: BTreeSet<&'static str>,
    pub free: BTreeSet<&'static str>,
}

impl ModelSketch {
    /// Human form, with `name` turning a token base into a fact name.
    pub fn describe<F: Fn(&'static str) -> String>(&self, name: F) -> String {
        let list = |bases: &BTreeSet<&'static str>| -> String {
            bases.iter().map(|b| name(b)).collect::<Vec<_>>().join(", ")
        };
        let mut parts = Vec::new();
        if !self.present.is_empty() {
            parts.push(format!("{} present", list(&self.present)));
        }
        if !self.absent.is_empty() {
            parts.push(format!("{} absent", list(&self.absent)));
        }
        if !self.free.is_empty() {
            parts.push(format!("{} free", list(&self.free)));
        }
        if parts.is_empty() {
            return "no tracked facts".into();
        }
        parts.join("; ")
    }
}

impl fmt::Display for ModelSketch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe(|b| b.to_string()))
    }
}

/// The most confident single justification and the partial model it picks.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxConfidence {
    pub monomial: Monomial,
    pub confidence: f64,
    /// Sum over all monomials; mixes incompatible readings, so it is
    /// reported under [`INCONSISTENT_AGGREGATE`], never as a confidence.
    pub aggregate: f64,
    pub sketch: ModelSketch,
}

/// Picks the monomial with the largest product of token confidences,
/// breaking ties by canonical order. Unlike any single homomorphic image,
/// this respects that distinct monomials describe different models.
pub fn maximize_confidence(p: &Polynomial, conf: &HashMap<Token, f64>) -> Result<MaxConfidence> {
    if p.is_zero() {
        return Err(Error::SentenceFalse);
    }
    let tokens = p.token_set();
    let missing: Vec<String> = tokens
        .iter()
        .filter(|t| !conf.contains_key(t))
        .map(|t| t.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingAssignment(missing.join(", ")));
    }
    for t in &tokens {
        let c = conf[t];
        if !(0.0..=1.0).contains(&c) || !c.is_finite() {
            return Err(Error::Carrier {
                semiring: "viterbi".into(),
                value: c.to_string(),
                reason: format!("the confidence for {t} is outside [0, 1]"),
            });
        }
    }
    let mut best: Option<(&Monomial, f64)> = None;
    let mut aggregate = 0.0;
    for m in p.monomials() {
        let c: f64 = m
            .factors()
            .iter()
            .map(|&(t, e)| conf[&t].powi(e as i32))
            .product();
        aggregate += m.coeff().to_f64().unwrap_or(f64::INFINITY) * c;
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((m, c));
        }
    }
    let (monomial, confidence) = best.expect("nonzero polynomial has a monomial");
    let mut sketch = ModelSketch {
        present: BTreeSet::new(),
        absent: BTreeSet::new(),
        free: BTreeSet::new(),
    };
    for t in monomial.tokens() {
        if t.is_positive() {
            sketch.present.insert(t.base());
        } else {
            sketch.absent.insert(t.base());
        }
    }
    for t in &tokens {
        let base = t.base();
        if !sketch.present.contains(base) && !sketch.absent.contains(base) {
            sketch.free.insert(base);
        }
    }
    Ok(MaxConfidence {
        monomial: monomial.clone(),
        confidence,
        aggregate,
        sketch,
    })
}
