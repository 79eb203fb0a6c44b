//! Seeded generators for the randomized suites and benchmarks, available
//! behind the `testing` feature.
//!
//! Every generator takes an explicit [`StdRng`] so a failing case replays
//! from the seed the suite prints.

use crate::interp::{Interpretation, Structure};
use crate::logic::{tuples, Formula, GroundFact, GroundLiteral, Term, Universe, Vocabulary};
use crate::poly::{PolyTag, Polynomial, Token};
use crate::semiring::{Access, Semiring, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeSet, HashMap};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Up to eight single-letter element names starting at `a`.
pub fn small_universe(size: usize) -> Universe {
    const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
    Universe::new(NAMES[..size].iter().copied()).expect("distinct names")
}

/// A binary edge relation, optionally joined by a unary one.
pub fn small_vocab(with_unary: bool) -> Vocabulary {
    let mut relations = vec![("E", 2)];
    if with_unary {
        relations.push(("R", 1));
    }
    Vocabulary::with(&relations).expect("distinct relation names")
}

/// Every possible fact of the signature, in canonical order.
pub fn all_facts(universe: &Universe, vocab: &Vocabulary) -> Vec<GroundFact> {
    let mut out = Vec::new();
    for (name, arity) in vocab.relations() {
        for tuple in tuples(universe, arity) {
            let args: Vec<&str> = tuple.iter().map(String::as_str).collect();
            out.push(GroundFact::new(name, &args));
        }
    }
    out
}

/// Each fact held with probability one half.
pub fn random_structure(rng: &mut StdRng, universe: &Universe, vocab: &Vocabulary) -> Structure {
    let mut a = Structure::new(universe.clone(), vocab.clone());
    for fact in all_facts(universe, vocab) {
        if rng.gen() {
            a.insert(&fact).expect("enumerated facts fit the signature");
        }
    }
    a
}

fn term(rng: &mut StdRng, universe: &Universe, scope: &[String]) -> Term {
    if !scope.is_empty() && rng.gen() {
        Term::Var(scope[rng.gen_range(0..scope.len())].clone())
    } else {
        Term::Value(universe.elements()[rng.gen_range(0..universe.len())].clone())
    }
}

fn leaf(
    rng: &mut StdRng,
    universe: &Universe,
    relations: &[(String, usize)],
    scope: &[String],
) -> Formula {
    match rng.gen_range(0..6u8) {
        0 => Formula::Eq(term(rng, universe, scope), term(rng, universe, scope)),
        1 => Formula::Neq(term(rng, universe, scope), term(rng, universe, scope)),
        _ => {
            let (name, arity) = &relations[rng.gen_range(0..relations.len())];
            let atom = Formula::Rel(
                name.clone(),
                (0..*arity).map(|_| term(rng, universe, scope)).collect(),
            );
            if rng.gen() {
                Formula::not(atom)
            } else {
                atom
            }
        }
    }
}

fn grow(
    rng: &mut StdRng,
    universe: &Universe,
    relations: &[(String, usize)],
    depth: usize,
    scope: &mut Vec<String>,
) -> Formula {
    if depth == 0 {
        return leaf(rng, universe, relations, scope);
    }
    match rng.gen_range(0..4u8) {
        0 => Formula::and(
            grow(rng, universe, relations, depth - 1, scope),
            grow(rng, universe, relations, depth - 1, scope),
        ),
        1 => Formula::or(
            grow(rng, universe, relations, depth - 1, scope),
            grow(rng, universe, relations, depth - 1, scope),
        ),
        kind => {
            let var = format!("v{}", scope.len());
            scope.push(var.clone());
            let body = grow(rng, universe, relations, depth - 1, scope);
            scope.pop();
            if kind == 2 {
                Formula::exists(&var, body)
            } else {
                Formula::forall(&var, body)
            }
        }
    }
}

/// A closed formula of the given connective depth: atoms and negated
/// atoms at the leaves, conjunction, disjunction and both quantifiers
/// inside. Leaves draw terms from the enclosing bound variables and the
/// universe, so the result is always a sentence.
pub fn random_sentence(
    rng: &mut StdRng,
    universe: &Universe,
    vocab: &Vocabulary,
    depth: usize,
) -> Formula {
    let relations: Vec<(String, usize)> = vocab
        .relations()
        .map(|(n, a)| (n.to_string(), a))
        .collect();
    let mut scope = Vec::new();
    grow(rng, universe, &relations, depth, &mut scope)
}

/// A model-defining interpretation over the dual polynomials: each fact
/// is independently present or absent, and a random subset of the facts
/// is tracked by tokens `t0, t1, ...` in fact order.
pub fn random_tracking_interpretation(
    rng: &mut StdRng,
    universe: &Universe,
    vocab: &Vocabulary,
) -> Interpretation {
    let tag = PolyTag::NDualPoly;
    let mut pi = Interpretation::new(Semiring::Poly(tag), universe.clone(), vocab.clone());
    for (i, fact) in all_facts(universe, vocab).into_iter().enumerate() {
        let present = rng.gen();
        if rng.gen() {
            let base = format!("t{i}");
            let token = if present {
                Token::pos(&base)
            } else {
                Token::neg(&base)
            };
            let (on_present, on_absent) = if present {
                (Polynomial::from_token(tag, token), Polynomial::zero(tag))
            } else {
                (Polynomial::zero(tag), Polynomial::from_token(tag, token))
            };
            pi.assign(GroundLiteral::positive(fact.clone()), Value::Poly(on_present))
                .expect("token annotation fits the carrier");
            pi.assign(GroundLiteral::negative(fact), Value::Poly(on_absent))
                .expect("token annotation fits the carrier");
        } else if present {
            pi.add_fact(fact).expect("enumerated facts fit the signature");
        }
    }
    pi
}

/// Counting annotations with no structure imposed: presences weighted
/// 0 to 3, absences 0 or 1.
pub fn random_counting_interpretation(
    rng: &mut StdRng,
    universe: &Universe,
    vocab: &Vocabulary,
) -> Interpretation {
    let mut pi = Interpretation::new(Semiring::Nat, universe.clone(), vocab.clone());
    for fact in all_facts(universe, vocab) {
        pi.assign(
            GroundLiteral::positive(fact.clone()),
            Value::nat(rng.gen_range(0..=3)),
        )
        .expect("naturals fit the carrier");
        pi.assign(
            GroundLiteral::negative(fact),
            Value::nat(rng.gen_range(0..=1)),
        )
        .expect("naturals fit the carrier");
    }
    pi
}

/// A small pool of carrier values including zero, one and interior
/// points, for exercising algebraic laws.
pub fn sample_values(sr: &Semiring) -> Vec<Value> {
    let candidates: Vec<Value> = match sr {
        Semiring::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Semiring::Nat => [0u64, 1, 2, 3, 7].map(Value::nat).to_vec(),
        Semiring::Tropical => [f64::INFINITY, 0.0, 0.5, 2.0, 7.5]
            .map(Value::Real)
            .to_vec(),
        // Dyadic points keep every sum and product exact in f64, so the
        // law suites can compare without tolerances.
        Semiring::Viterbi | Semiring::Fuzzy | Semiring::Lukasiewicz => {
            [0.0, 0.25, 0.5, 0.75, 1.0].map(Value::Real).to_vec()
        }
        Semiring::Doubt => [1.0, 0.5, 0.25, 0.0].map(Value::Real).to_vec(),
        Semiring::Access => [
            Access::Denied,
            Access::TopSecret,
            Access::Secret,
            Access::Confidential,
            Access::Public,
        ]
        .map(Value::Access)
        .to_vec(),
        Semiring::Poly(tag) => ["0", "1", "x", "~x", "y", "x + y", "x*y", "1 + y", "2*x + y^2"]
            .iter()
            .map(|text| Value::Poly(crate::poly::parse(*tag, text).expect("sample parses")))
            .collect(),
        Semiring::Table(_) => (0..16).map(Value::Table).collect(),
    };
    candidates
        .into_iter()
        .filter(|v| sr.check_value(v).is_ok())
        .collect()
}

/// A random pick from [`sample_values`].
pub fn random_value(rng: &mut StdRng, sr: &Semiring) -> Value {
    let pool = sample_values(sr);
    pool[rng.gen_range(0..pool.len())].clone()
}

/// Values for every token base tracked by `pi`, zeroing one side of each
/// twin pair so that dual products vanish under the assignment as well.
pub fn random_dual_assignment(
    rng: &mut StdRng,
    pi: &Interpretation,
    sr: &Semiring,
) -> HashMap<Token, Value> {
    let bases: BTreeSet<&'static str> = pi
        .tracked_literals()
        .expect("a tracking interpretation")
        .keys()
        .map(|t| t.base())
        .collect();
    let mut out = HashMap::new();
    for base in bases {
        let value = random_value(rng, sr);
        let (kept, zeroed) = if rng.gen() {
            (Token::pos(base), Token::neg(base))
        } else {
            (Token::neg(base), Token::pos(base))
        };
        out.insert(kept, value);
        out.insert(zeroed, sr.zero());
    }
    out
}

/// The homomorphic image of a polynomial-valued interpretation: every
/// annotation is pushed through the assignment into `sr`.
pub fn materialize(
    pi: &Interpretation,
    sr: &Semiring,
    assign: &HashMap<Token, Value>,
) -> crate::error::Result<Interpretation> {
    let image = |v: &Value| -> crate::error::Result<Value> {
        match v {
            Value::Poly(p) => p.eval_hom(sr, assign),
            other => Err(crate::error::Error::Internal(format!(
                "expected a polynomial annotation, found {other}"
            ))),
        }
    };
    let mut out = Interpretation::new(sr.clone(), pi.universe().clone(), pi.vocab().clone());
    out.set_default(true, image(pi.default_for(true))?)?;
    out.set_default(false, image(pi.default_for(false))?)?;
    for (lit, value) in pi.assignments() {
        out.assign(lit.clone(), image(value)?)?;
    }
    Ok(out)
}
