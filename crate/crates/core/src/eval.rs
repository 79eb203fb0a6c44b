//! Sentence evaluation: the semiring value of a sentence under an
//! interpretation, the circuit form that defers expansion, proof-tree
//! enumeration with the sum-of-trees oracle, and double valuations.

use crate::circuit::{Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::interp::Interpretation;
use crate::logic::{nnf, Formula, GroundFact, GroundLiteral, Term};
use crate::poly::{PolyTag, Polynomial};
use crate::semiring::{Semiring, Value};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt;

/// Proof-tree enumerations and the oracle refuse to run past this many
/// trees.
pub const TREE_ORACLE_CAP: usize = 10_000;

fn check_sentence(s: &Formula) -> Result<()> {
    match s.free_vars().into_iter().next() {
        Some(v) => Err(Error::FreeVariable(v)),
        None => Ok(()),
    }
}

fn ground_fact(pi: &Interpretation, sym: &str, args: &[Term]) -> Result<GroundFact> {
    let mut names = Vec::with_capacity(args.len());
    for t in args {
        match t {
            Term::Value(v) => names.push(v.clone()),
            Term::Var(v) => return Err(Error::FreeVariable(v.clone())),
        }
    }
    let fact = GroundFact {
        sym: sym.to_string(),
        args: names,
    };
    crate::interp::check_fact(pi.vocab(), pi.universe(), &fact)?;
    Ok(fact)
}

/// The ground literal a negation-normal leaf denotes.
fn leaf_literal(pi: &Interpretation, f: &Formula) -> Result<GroundLiteral> {
    match f {
        Formula::Rel(sym, args) => Ok(GroundLiteral::positive(ground_fact(pi, sym, args)?)),
        Formula::Not(inner) => match &**inner {
            Formula::Rel(sym, args) => Ok(GroundLiteral::negative(ground_fact(pi, sym, args)?)),
            _ => Err(Error::Internal(
                "negation below a leaf position is not in negation normal form".into(),
            )),
        },
        _ => Err(Error::Internal("not a literal".into())),
    }
}

fn equality_holds(pi: &Interpretation, a: &Term, b: &Term) -> Result<bool> {
    let name = |t: &Term| -> Result<String> {
        match t {
            Term::Value(v) if pi.universe().contains(v) => Ok(v.clone()),
            Term::Value(v) => Err(Error::VocabularyMismatch(format!(
                "`{v}` is not a universe element"
            ))),
            Term::Var(v) => Err(Error::FreeVariable(v.clone())),
        }
    };
    Ok(name(a)? == name(b)?)
}

/// The value of a sentence: disjunction adds, conjunction multiplies,
/// quantifiers sum and multiply over the universe, equality atoms are the
/// untracked constants 0 and 1, and negation is pushed to the atoms
/// first.
pub fn evaluate(pi: &Interpretation, s: &Formula) -> Result<Value> {
    check_sentence(s)?;
    eval_nnf(pi, &nnf(s)?)
}

fn eval_nnf(pi: &Interpretation, f: &Formula) -> Result<Value> {
    let sr = pi.semiring();
    Ok(match f {
        Formula::Rel(..) | Formula::Not(..) => pi.lookup(&leaf_literal(pi, f)?).clone(),
        Formula::Eq(a, b) | Formula::Neq(a, b) => {
            let want = matches!(f, Formula::Eq(..));
            if equality_holds(pi, a, b)? == want {
                sr.one()
            } else {
                sr.zero()
            }
        }
        Formula::And(l, r) => sr.mul(&eval_nnf(pi, l)?, &eval_nnf(pi, r)?)?,
        Formula::Or(l, r) => sr.add(&eval_nnf(pi, l)?, &eval_nnf(pi, r)?)?,
        Formula::Exists(v, g) => {
            let mut acc = sr.zero();
            for e in pi.universe().elements() {
                acc = sr.add(&acc, &eval_nnf(pi, &g.instantiate(v, e))?)?;
            }
            acc
        }
        Formula::Forall(v, g) => {
            let mut acc = sr.one();
            for e in pi.universe().elements() {
                acc = sr.mul(&acc, &eval_nnf(pi, &g.instantiate(v, e))?)?;
            }
            acc
        }
        Formula::Implies(..) => {
            return Err(Error::ExtendedOnly {
                construct: "implication",
            })
        }
    })
}

/// The same fold kept as a circuit: nothing is expanded, so the result
/// stays polynomial-sized in the universe for a fixed sentence.
pub fn evaluate_circuit(pi: &Interpretation, s: &Formula) -> Result<Circuit> {
    if pi.semiring().poly_tag().is_none() {
        return Err(Error::Unsupported {
            semiring: pi.semiring().name(),
            op: "circuit construction",
        });
    }
    check_sentence(s)?;
    let f = nnf(s)?;
    let mut b = CircuitBuilder::new();
    let root = circuit_node(pi, &mut b, &f)?;
    Ok(b.finish(root))
}

fn circuit_node(pi: &Interpretation, b: &mut CircuitBuilder, f: &Formula) -> Result<usize> {
    Ok(match f {
        Formula::Rel(..) | Formula::Not(..) => {
            let value = pi.lookup(&leaf_literal(pi, f)?);
            match value {
                Value::Poly(p) => poly_node(b, p)?,
                other => {
                    return Err(Error::Internal(format!(
                        "polynomial annotation expected, found {other}"
                    )))
                }
            }
        }
        Formula::Eq(a, b2) | Formula::Neq(a, b2) => {
            let want = matches!(f, Formula::Eq(..));
            if equality_holds(pi, a, b2)? == want {
                b.one()
            } else {
                b.zero()
            }
        }
        Formula::And(l, r) => {
            let ln = circuit_node(pi, b, l)?;
            let rn = circuit_node(pi, b, r)?;
            b.prod(vec![ln, rn])
        }
        Formula::Or(l, r) => {
            let ln = circuit_node(pi, b, l)?;
            let rn = circuit_node(pi, b, r)?;
            b.sum(vec![ln, rn])
        }
        Formula::Exists(v, g) => {
            let mut children = Vec::new();
            for e in pi.universe().elements() {
                children.push(circuit_node(pi, b, &g.instantiate(v, e))?);
            }
            b.sum(children)
        }
        Formula::Forall(v, g) => {
            let mut children = Vec::new();
            for e in pi.universe().elements() {
                children.push(circuit_node(pi, b, &g.instantiate(v, e))?);
            }
            b.prod(children)
        }
        Formula::Implies(..) => {
            return Err(Error::ExtendedOnly {
                construct: "implication",
            })
        }
    })
}

/// A polynomial value as a sum-of-products subcircuit.
fn poly_node(b: &mut CircuitBuilder, p: &Polynomial) -> Result<usize> {
    if p.is_zero() {
        return Ok(b.zero());
    }
    let mut terms = Vec::new();
    for m in p.monomials() {
        let mut factors = Vec::new();
        for (tok, exp) in m.factors() {
            for _ in 0..*exp {
                factors.push(b.leaf(*tok));
            }
        }
        let node = match factors.len() {
            0 => b.one(),
            1 => factors[0],
            _ => b.prod(factors),
        };
        let copies = m.coeff().to_usize().ok_or_else(|| {
            Error::Internal("annotation coefficient too large for circuit form".into())
        })?;
        terms.extend(std::iter::repeat(node).take(copies));
    }
    Ok(match terms.len() {
        1 => terms[0],
        _ => b.sum(terms),
    })
}

/// One way of establishing the sentence: disjunctions pick a disjunct,
/// existentials pick a witness, universals keep one subtree per element,
/// and every leaf is a held literal. Only trees with nonzero valuation
/// are proof trees.
#[derive(Debug, Clone, PartialEq)]
pub enum ProofTree {
    Leaf {
        formula: Formula,
        literal: Option<GroundLiteral>,
        value: Value,
    },
    Or {
        formula: Formula,
        right: bool,
        child: Box<ProofTree>,
    },
    And {
        formula: Formula,
        left: Box<ProofTree>,
        right: Box<ProofTree>,
    },
    Exists {
        formula: Formula,
        witness: String,
        child: Box<ProofTree>,
    },
    Forall {
        formula: Formula,
        children: Vec<ProofTree>,
    },
}

impl ProofTree {
    /// How many times each ground literal appears at the leaves.
    pub fn multiplicities(&self) -> BTreeMap<GroundLiteral, usize> {
        let mut out = BTreeMap::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeMap<GroundLiteral, usize>) {
        match self {
            ProofTree::Leaf { literal, .. } => {
                if let Some(lit) = literal {
                    *out.entry(lit.clone()).or_insert(0) += 1;
                }
            }
            ProofTree::Or { child, .. } | ProofTree::Exists { child, .. } => child.collect(out),
            ProofTree::And { left, right, .. } => {
                left.collect(out);
                right.collect(out);
            }
            ProofTree::Forall { children, .. } => {
                for c in children {
                    c.collect(out);
                }
            }
        }
    }

    /// The product of the leaf values.
    pub fn valuation(&self, sr: &Semiring) -> Result<Value> {
        match self {
            ProofTree::Leaf { value, .. } => Ok(value.clone()),
            ProofTree::Or { child, .. } | ProofTree::Exists { child, .. } => child.valuation(sr),
            ProofTree::And { left, right, .. } => {
                sr.mul(&left.valuation(sr)?, &right.valuation(sr)?)
            }
            ProofTree::Forall { children, .. } => {
                let mut acc = sr.one();
                for c in children {
                    acc = sr.mul(&acc, &c.valuation(sr)?)?;
                }
                Ok(acc)
            }
        }
    }

    fn write(&self, depth: usize, out: &mut String) {
        if depth > 0 {
            out.push_str(&"   ".repeat(depth - 1));
            out.push_str("|- ");
        }
        match self {
            ProofTree::Leaf { formula, value, .. } => {
                out.push_str(&format!("{formula} [{value}]\n"));
            }
            ProofTree::Or { formula, child, .. } => {
                out.push_str(&format!("{formula}\n"));
                child.write(depth + 1, out);
            }
            ProofTree::And {
                formula,
                left,
                right,
            } => {
                out.push_str(&format!("{formula}\n"));
                left.write(depth + 1, out);
                right.write(depth + 1, out);
            }
            ProofTree::Exists { formula, child, .. } => {
                out.push_str(&format!("{formula}\n"));
                child.write(depth + 1, out);
            }
            ProofTree::Forall { formula, children } => {
                out.push_str(&format!("{formula}\n"));
                for c in children {
                    c.write(depth + 1, out);
                }
            }
        }
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(0, &mut s);
        f.write_str(s.trim_end_matches('\n'))
    }
}

pub struct TreeEnumeration {
    pub trees: Vec<ProofTree>,
    pub truncated: bool,
}

type Sink<'a> = &'a mut dyn FnMut(ProofTree, Value) -> Result<bool>;

/// Enumerates proof trees in depth-first choice order, up to `limit`.
/// Branches whose partial product is already zero are pruned, which is
/// exact: zero annihilates whatever the rest contributes.
pub fn enumerate_proof_trees(
    pi: &Interpretation,
    s: &Formula,
    limit: usize,
) -> Result<TreeEnumeration> {
    check_sentence(s)?;
    let f = nnf(s)?;
    let mut trees = Vec::new();
    let mut truncated = false;
    walk(pi, &f, &mut |t, _| {
        if trees.len() == limit {
            truncated = true;
            return Ok(false);
        }
        trees.push(t);
        Ok(true)
    })?;
    Ok(TreeEnumeration { trees, truncated })
}

fn walk(pi: &Interpretation, f: &Formula, sink: Sink) -> Result<bool> {
    let sr = pi.semiring();
    match f {
        Formula::Rel(..) | Formula::Not(..) => {
            let literal = leaf_literal(pi, f)?;
            let value = pi.lookup(&literal).clone();
            if sr.is_zero(&value)? {
                return Ok(true);
            }
            sink(
                ProofTree::Leaf {
                    formula: f.clone(),
                    literal: Some(literal),
                    value: value.clone(),
                },
                value,
            )
        }
        Formula::Eq(a, b) | Formula::Neq(a, b) => {
            let want = matches!(f, Formula::Eq(..));
            if equality_holds(pi, a, b)? != want {
                return Ok(true);
            }
            sink(
                ProofTree::Leaf {
                    formula: f.clone(),
                    literal: None,
                    value: sr.one(),
                },
                sr.one(),
            )
        }
        Formula::Or(l, r) => {
            let cont = walk(pi, l, &mut |t, v| {
                sink(
                    ProofTree::Or {
                        formula: f.clone(),
                        right: false,
                        child: Box::new(t),
                    },
                    v,
                )
            })?;
            if !cont {
                return Ok(false);
            }
            walk(pi, r, &mut |t, v| {
                sink(
                    ProofTree::Or {
                        formula: f.clone(),
                        right: true,
                        child: Box::new(t),
                    },
                    v,
                )
            })
        }
        Formula::And(l, r) => walk(pi, l, &mut |lt, lv| {
            walk(pi, r, &mut |rt, rv| {
                let v = sr.mul(&lv, &rv)?;
                if sr.is_zero(&v)? {
                    return Ok(true);
                }
                sink(
                    ProofTree::And {
                        formula: f.clone(),
                        left: Box::new(lt.clone()),
                        right: Box::new(rt),
                    },
                    v,
                )
            })
        }),
        Formula::Exists(var, g) => {
            for e in pi.universe().elements() {
                let body = g.instantiate(var, e);
                let cont = walk(pi, &body, &mut |t, v| {
                    sink(
                        ProofTree::Exists {
                            formula: f.clone(),
                            witness: e.clone(),
                            child: Box::new(t),
                        },
                        v,
                    )
                })?;
                if !cont {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Forall(var, g) => {
            let elems: Vec<String> = pi.universe().elements().to_vec();
            let mut partial = Vec::new();
            forall_walk(pi, f, var, g, &elems, 0, &mut partial, sr.one(), sink)
        }
        Formula::Implies(..) => Err(Error::ExtendedOnly {
            construct: "implication",
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn forall_walk(
    pi: &Interpretation,
    whole: &Formula,
    var: &str,
    body: &Formula,
    elems: &[String],
    idx: usize,
    partial: &mut Vec<ProofTree>,
    acc: Value,
    sink: Sink,
) -> Result<bool> {
    if idx == elems.len() {
        return sink(
            ProofTree::Forall {
                formula: whole.clone(),
                children: partial.clone(),
            },
            acc,
        );
    }
    let inst = body.instantiate(var, &elems[idx]);
    let sr = pi.semiring();
    walk(pi, &inst, &mut |t, v| {
        let next = sr.mul(&acc, &v)?;
        if sr.is_zero(&next)? {
            return Ok(true);
        }
        partial.push(t);
        let r = forall_walk(pi, whole, var, body, elems, idx + 1, partial, next, &mut *sink);
        partial.pop();
        r
    })
}

/// Adds up the valuations of all proof trees. Agrees with [`evaluate`];
/// kept as an independent oracle.
pub fn sum_of_trees_oracle(pi: &Interpretation, s: &Formula) -> Result<Value> {
    let e = enumerate_proof_trees(pi, s, TREE_ORACLE_CAP)?;
    if e.truncated {
        return Err(Error::TreeLimitExceeded {
            limit: TREE_ORACLE_CAP,
        });
    }
    let sr = pi.semiring();
    let mut acc = sr.zero();
    for t in &e.trees {
        acc = sr.add(&acc, &t.valuation(sr)?)?;
    }
    Ok(acc)
}

/// The number of proof trees, read off the evaluation: the coefficient
/// sum of the polynomial, or the value itself when counting directly.
pub fn count_proof_trees(pi: &Interpretation, s: &Formula) -> Result<BigUint> {
    match evaluate(pi, s)? {
        Value::Nat(n) => Ok(n),
        Value::Poly(p) if matches!(p.tag(), PolyTag::NPoly | PolyTag::NDualPoly) => {
            Ok(p.coefficient_sum())
        }
        _ => Err(Error::Unsupported {
            semiring: pi.semiring().name(),
            op: "proof-tree counting",
        }),
    }
}

/// Evaluates the sentence and its negation in one compositional pass,
/// carrying a (positive, negative) pair through every connective.
pub fn evaluate_double(pi: &Interpretation, s: &Formula) -> Result<(Value, Value)> {
    check_sentence(s)?;
    double(pi, s)
}

fn double(pi: &Interpretation, f: &Formula) -> Result<(Value, Value)> {
    let sr = pi.semiring();
    Ok(match f {
        Formula::Rel(sym, args) => {
            let fact = ground_fact(pi, sym, args)?;
            (
                pi.lookup(&GroundLiteral::positive(fact.clone())).clone(),
                pi.lookup(&GroundLiteral::negative(fact)).clone(),
            )
        }
        Formula::Eq(a, b) | Formula::Neq(a, b) => {
            let want = matches!(f, Formula::Eq(..));
            if equality_holds(pi, a, b)? == want {
                (sr.one(), sr.zero())
            } else {
                (sr.zero(), sr.one())
            }
        }
        Formula::Not(g) => {
            let (p, n) = double(pi, g)?;
            (n, p)
        }
        Formula::And(l, r) => {
            let (lp, ln) = double(pi, l)?;
            let (rp, rn) = double(pi, r)?;
            (sr.mul(&lp, &rp)?, sr.add(&ln, &rn)?)
        }
        Formula::Or(l, r) => {
            let (lp, ln) = double(pi, l)?;
            let (rp, rn) = double(pi, r)?;
            (sr.add(&lp, &rp)?, sr.mul(&ln, &rn)?)
        }
        Formula::Exists(v, g) => {
            let mut pos = sr.zero();
            let mut neg = sr.one();
            for e in pi.universe().elements() {
                let (p, n) = double(pi, &g.instantiate(v, e))?;
                pos = sr.add(&pos, &p)?;
                neg = sr.mul(&neg, &n)?;
            }
            (pos, neg)
        }
        Formula::Forall(v, g) => {
            let mut pos = sr.one();
            let mut neg = sr.zero();
            for e in pi.universe().elements() {
                let (p, n) = double(pi, &g.instantiate(v, e))?;
                pos = sr.mul(&pos, &p)?;
                neg = sr.add(&neg, &n)?;
            }
            (pos, neg)
        }
        Formula::Implies(..) => {
            return Err(Error::ExtendedOnly {
                construct: "implication",
            })
        }
    })
}

/// Whether some structure compatible with the interpretation satisfies
/// the sentence.
pub fn sat_in_mod(pi: &Interpretation, s: &Formula) -> Result<bool> {
    require_compatible(pi)?;
    Ok(!pi.semiring().is_zero(&evaluate(pi, s)?)?)
}

/// Whether every structure compatible with the interpretation satisfies
/// the sentence.
pub fn valid_in_mod(pi: &Interpretation, s: &Formula) -> Result<bool> {
    require_compatible(pi)?;
    Ok(pi
        .semiring()
        .is_zero(&evaluate(pi, &Formula::not(s.clone()))?)?)
}

fn require_compatible(pi: &Interpretation) -> Result<()> {
    if pi.is_model_compatible()? {
        Ok(())
    } else {
        Err(Error::NotModelCompatible(
            "the interpretation does not split into decided facts and token pairs".into(),
        ))
    }
}

/// Evaluation where negation of a non-atomic subformula collapses its
/// value to 0 or 1 instead of rewriting to negation normal form. Atomic
/// negation still reads the annotation.
pub fn evaluate_with_flattening(pi: &Interpretation, s: &Formula) -> Result<Value> {
    check_sentence(s)?;
    flat(pi, s)
}

fn flat(pi: &Interpretation, f: &Formula) -> Result<Value> {
    let sr = pi.semiring();
    Ok(match f {
        Formula::Rel(..) => pi.lookup(&leaf_literal(pi, f)?).clone(),
        Formula::Not(g) => match &**g {
            Formula::Rel(..) => pi.lookup(&leaf_literal(pi, f)?).clone(),
            _ => sr.flatten_negate(&flat(pi, g)?)?,
        },
        Formula::Eq(a, b) | Formula::Neq(a, b) => {
            let want = matches!(f, Formula::Eq(..));
            if equality_holds(pi, a, b)? == want {
                sr.one()
            } else {
                sr.zero()
            }
        }
        Formula::And(l, r) => sr.mul(&flat(pi, l)?, &flat(pi, r)?)?,
        Formula::Or(l, r) => sr.add(&flat(pi, l)?, &flat(pi, r)?)?,
        Formula::Exists(v, g) => {
            let mut acc = sr.zero();
            for e in pi.universe().elements() {
                acc = sr.add(&acc, &flat(pi, &g.instantiate(v, e))?)?;
            }
            acc
        }
        Formula::Forall(v, g) => {
            let mut acc = sr.one();
            for e in pi.universe().elements() {
                acc = sr.mul(&acc, &flat(pi, &g.instantiate(v, e))?)?;
            }
            acc
        }
        Formula::Implies(..) => {
            return Err(Error::ExtendedOnly {
                construct: "implication",
            })
        }
    })
}
