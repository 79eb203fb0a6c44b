//! End-to-end checks over the public API, one test per advertised
//! behavior. Each prints a single summary line, so a full run under
//! `--nocapture` reads as a checklist.

use prov_core::testing::{
    materialize, random_dual_assignment, random_sentence, random_structure,
    random_tracking_interpretation, rng, sample_values, small_universe, small_vocab,
};
use prov_core::*;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

const GRAPH_FILE: &str = "\
universe: a b c
relation: E/2
semiring: ndualpoly
default + : 0
default - : 1
annot +E(a,b) = p
annot -E(a,b) = 0
annot +E(b,c) = q
annot -E(b,c) = 0
annot +E(a,c) = 0
annot -E(a,c) = ~r
annot +E(c,b) = 0
annot -E(c,b) = ~s
annot +E(b,a) = t
annot -E(b,a) = 0
";

const OPEN_FILE: &str = "\
universe: a b c
relation: E/2
semiring: ndualpoly
default + : 0
default - : 1
annot +E(a,b) = p
annot -E(a,b) = ~p
annot +E(b,c) = q
annot -E(b,c) = ~q
annot +E(a,c) = r
annot -E(a,c) = ~r
annot +E(c,b) = s
annot -E(c,b) = ~s
annot +E(b,a) = t
annot -E(b,a) = ~t
";

const NO_DOMINANT: &str =
    "def dominant(x) := forall y. (x = y | (E(x,y) & !E(y,x)))\nforall x. !dominant(x)";

fn tracked_graph() -> Interpretation {
    parse_interpretation(GRAPH_FILE).unwrap()
}

fn open_graph() -> Interpretation {
    parse_interpretation(OPEN_FILE).unwrap()
}

fn graph() -> Structure {
    tracked_graph().defined_model().unwrap()
}

fn empty_graph() -> Structure {
    Structure::new(graph().universe().clone(), graph().vocab().clone())
}

fn full_graph() -> Structure {
    let mut a = empty_graph();
    for (x, y) in [("a", "b"), ("b", "c"), ("a", "c"), ("c", "b"), ("b", "a")] {
        a.insert(&GroundFact::new("E", &[x, y])).unwrap();
    }
    a
}

fn graph_formula(text: &str) -> Formula {
    parse_formula(text, graph().vocab(), graph().universe(), false).unwrap()
}

fn no_dominant() -> Formula {
    graph_formula(NO_DOMINANT)
}

fn poly_of(v: Value) -> Polynomial {
    match v {
        Value::Poly(p) => p,
        other => panic!("expected a polynomial, got {other}"),
    }
}

fn pass(n: usize, name: &str) {
    println!("ACCEPTANCE {n:02} ({name}): PASS");
}

#[test]
fn acceptance_01_dominant_vertex_provenance() {
    let start = Instant::now();
    let poly = poly_of(evaluate(&tracked_graph(), &no_dominant()).unwrap());
    assert_eq!(
        poly.to_string(),
        "p*~r + p*t + p*q*~r + p*q*t + p*~r*~s + p*~s*t"
    );
    assert_eq!(poly.monomial_count(), 6);
    assert_eq!(poly.coefficient_sum(), 6u32.into());
    assert!(start.elapsed() < Duration::from_secs(1));
    pass(1, "dominant-vertex provenance");
}

#[test]
fn acceptance_02_reverse_analysis() {
    let start = Instant::now();
    let pi = open_graph();
    let phi = no_dominant();
    let full = poly_of(evaluate(&pi, &phi).unwrap());
    assert_eq!(full.monomial_count(), 30);
    let neg = poly_of(evaluate(&pi, &Formula::not(phi.clone())).unwrap());
    assert_eq!(neg.to_string(), "p*r*~t + ~p*q*~s*t");

    let no_edges = pi.specialize(&empty_graph()).unwrap();
    assert_eq!(
        evaluate_circuit(&no_edges, &phi).unwrap().to_string(),
        "(~p + ~r)*(~q + ~t)*(1 + ~s)"
    );
    assert_eq!(poly_of(evaluate(&no_edges, &phi).unwrap()).monomial_count(), 8);

    let all_edges = pi.specialize(&full_graph()).unwrap();
    assert_eq!(
        evaluate_circuit(&all_edges, &phi).unwrap().to_string(),
        "t*(p + s)*(1 + q + r)"
    );
    assert_eq!(poly_of(evaluate(&all_edges, &phi).unwrap()).monomial_count(), 6);
    assert!(start.elapsed() < Duration::from_secs(1));
    pass(2, "reverse analysis");
}

#[test]
fn acceptance_03_confidence_and_clearance() {
    let poly = poly_of(evaluate(&tracked_graph(), &no_dominant()).unwrap());

    let confidences: HashMap<Token, Value> = [
        ("p", 0.9),
        ("q", 0.9),
        ("t", 0.2),
        ("~r", 0.6),
        ("~s", 0.6),
    ]
    .into_iter()
    .map(|(t, c)| (Token::parse(t).unwrap(), Value::Real(c)))
    .collect();
    match score(&poly, &Semiring::Viterbi, &confidences).unwrap() {
        Value::Real(x) => assert!((x - 0.54).abs() < 1e-12),
        other => panic!("expected a real, got {other}"),
    }

    let clearances: HashMap<Token, Value> = [
        ("p", Access::Public),
        ("q", Access::Public),
        ("t", Access::Public),
        ("~r", Access::TopSecret),
        ("~s", Access::TopSecret),
    ]
    .into_iter()
    .map(|(t, a)| (Token::parse(t).unwrap(), Value::Access(a)))
    .collect();
    assert_eq!(
        score(&poly, &Semiring::Access, &clearances).unwrap(),
        Value::Access(Access::Public)
    );
    let first = prov_core::poly::parse(poly.tag(), "p*~r").unwrap();
    assert_eq!(
        score(&first, &Semiring::Access, &clearances).unwrap(),
        Value::Access(Access::TopSecret)
    );
    pass(3, "confidence and clearance scoring");
}

#[test]
fn acceptance_04_tautology_check() {
    let pi = parse_interpretation(
        "universe: a b\nrelation: E/2\nsemiring: ndualpoly\n\
         annot +E(a,b) = p\nannot -E(a,b) = ~p\n\
         annot +E(b,a) = q\nannot -E(b,a) = ~q\n\
         annot +E(a,a) = r\nannot -E(a,a) = ~r\n\
         annot +E(b,b) = s\nannot -E(b,b) = ~s\n",
    )
    .unwrap();
    let psi = parse_formula(
        "(exists x. forall y. E(x,y)) -> (forall y. exists x. E(x,y))",
        pi.vocab(),
        pi.universe(),
        true,
    )
    .unwrap()
    .rewrite_implies();

    let negated = nnf(&Formula::not(psi.clone())).unwrap();
    assert!(poly_of(evaluate(&pi, &negated).unwrap()).is_zero());

    let parse = |t: &str| prov_core::poly::parse(PolyTag::NDualPoly, t).unwrap();
    let expected = parse("~p + ~r")
        .mul(&parse("~q + ~s"))
        .unwrap()
        .add(&parse("q + r").mul(&parse("p + s")).unwrap())
        .unwrap();
    assert_eq!(poly_of(evaluate(&pi, &psi).unwrap()), expected);
    assert_eq!(expected.monomial_count(), 8);
    pass(4, "tautology check");
}

#[test]
fn acceptance_05_proof_tree_oracle() {
    let start = Instant::now();
    let mut r = rng(0x5eed_0005);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 200 {
        attempts += 1;
        assert!(attempts < 2000, "generator keeps missing the tree budget");
        let size = 2 + r.gen_range(0..2usize);
        let universe = small_universe(size);
        let vocab = small_vocab(false);
        let pi = random_tracking_interpretation(&mut r, &universe, &vocab);
        let depth = 1 + r.gen_range(0..3usize);
        let s = random_sentence(&mut r, &universe, &vocab, depth);
        let oracle = match sum_of_trees_oracle(&pi, &s) {
            Ok(v) => v,
            Err(Error::TreeLimitExceeded { .. }) => continue,
            Err(e) => panic!("oracle failed on {s}: {e}"),
        };
        let direct = evaluate(&pi, &s).unwrap();
        assert_eq!(oracle, direct, "oracle disagrees on {s}");
        let circuit = evaluate_circuit(&pi, &s).unwrap();
        let expanded = match circuit.expand(PolyTag::NDualPoly, DEFAULT_EXPANSION_CAP) {
            Ok(p) => p,
            Err(Error::CapExceeded { .. }) => continue,
            Err(e) => panic!("expansion failed on {s}: {e}"),
        };
        assert_eq!(Value::Poly(expanded), direct, "expansion disagrees on {s}");
        checked += 1;
    }
    assert!(start.elapsed() < Duration::from_secs(60));
    pass(5, "proof-tree oracle agreement on 200 instances");
}

#[test]
fn acceptance_06_introduction_counts() {
    let universe = Universe::new(["a", "b"]).unwrap();
    let vocab = Vocabulary::with(&[("R", 1), ("S", 1)]).unwrap();
    let mut all = Structure::new(universe.clone(), vocab.clone());
    for sym in ["R", "S"] {
        for e in ["a", "b"] {
            all.insert(&GroundFact::new(sym, &[e])).unwrap();
        }
    }
    let pi = canonical_counting(&all);
    let count = |text: &str| {
        let f = parse_formula(text, &vocab, &universe, false).unwrap();
        let n = count_proof_trees(&pi, &f).unwrap();
        let e = enumerate_proof_trees(&pi, &f, 100).unwrap();
        assert!(!e.truncated);
        assert_eq!(n, e.trees.len().into(), "count and enumeration split on {text}");
        n
    };
    assert_eq!(count("(exists x. R(x)) | S(a)"), 3u32.into());
    assert_eq!(count("exists x. R(x) | S(a)"), 4u32.into());
    let conj_outside = count("(exists x. R(x)) & S(a)");
    let conj_inside = count("exists x. R(x) & S(a)");
    assert_eq!(conj_outside, conj_inside);
    assert_eq!(conj_outside, 2u32.into());
    pass(6, "proof-tree counts across quantifier rewrites");
}

/// A tracking interpretation rebuilt from scratch: same token bases as
/// `beta`, memberships taken from `target`.
fn rebuilt_for(beta: &Interpretation, target: &Structure) -> Interpretation {
    let tag = beta.semiring().poly_tag().unwrap();
    let tracked: BTreeMap<GroundFact, &'static str> = beta
        .tracked_literals()
        .unwrap()
        .into_iter()
        .map(|(token, lit)| (lit.fact, token.base()))
        .collect();
    let mut out = Interpretation::new(
        beta.semiring().clone(),
        beta.universe().clone(),
        beta.vocab().clone(),
    );
    for fact in out.ground_facts() {
        if let Some(base) = tracked.get(&fact) {
            let (pos, neg) = if target.holds(&fact) {
                (Polynomial::from_token(tag, Token::pos(base)), Polynomial::zero(tag))
            } else {
                (Polynomial::zero(tag), Polynomial::from_token(tag, Token::neg(base)))
            };
            out.assign(GroundLiteral::positive(fact.clone()), Value::Poly(pos))
                .unwrap();
            out.assign(GroundLiteral::negative(fact), Value::Poly(neg))
                .unwrap();
        } else if target.holds(&fact) {
            out.add_fact(fact).unwrap();
        }
    }
    out
}

#[test]
fn acceptance_07_update_correctness() {
    let beta = tracked_graph();
    let phi = no_dominant();
    let (general, skeleton) = generalized_interpretation(&beta).unwrap();
    let fact = |x: &str, y: &str| GroundFact::new("E", &[x, y]);

    let cases = [
        (
            BTreeSet::from([fact("a", "b"), fact("b", "c")]),
            "(~p + ~r + t)*~q*(1 + ~s)",
        ),
        (
            BTreeSet::from([fact("a", "c"), fact("c", "b")]),
            "t*(p + s)*(1 + q + r)",
        ),
    ];
    for (chosen, factored) in cases {
        let plan = skeleton.with_chosen(chosen).unwrap();
        let updated = update_provenance(&beta, &plan, &phi).unwrap();
        let moved = plan.apply(&graph()).unwrap();
        assert_eq!(
            evaluate_circuit(&general.specialize(&moved).unwrap(), &phi)
                .unwrap()
                .to_string(),
            factored
        );
        let from_scratch = evaluate(&rebuilt_for(&beta, &moved), &phi).unwrap();
        assert_eq!(Value::Poly(updated), from_scratch);
    }

    let mut r = rng(0x5eed_0007);
    for _ in 0..100 {
        let universe = small_universe(2 + r.gen_range(0..2usize));
        let vocab = small_vocab(r.gen());
        let beta = random_tracking_interpretation(&mut r, &universe, &vocab);
        let depth = r.gen_range(0..=4usize);
        let s = random_sentence(&mut r, &universe, &vocab, depth);
        let (_, skeleton) = generalized_interpretation(&beta).unwrap();
        let chosen: BTreeSet<GroundFact> = skeleton
            .insertable
            .iter()
            .chain(&skeleton.deletable)
            .filter(|_| r.gen())
            .cloned()
            .collect();
        let plan = skeleton.with_chosen(chosen).unwrap();
        let updated = update_provenance(&beta, &plan, &s).unwrap();
        let moved = plan.apply(&beta.defined_model().unwrap()).unwrap();
        let from_scratch = evaluate(&rebuilt_for(&beta, &moved), &s).unwrap();
        assert_eq!(Value::Poly(updated), from_scratch, "update mismatch on {s}");
    }
    pass(7, "incremental update correctness");
}

#[test]
fn acceptance_08_repairs() {
    let pi = open_graph();
    let dominant_a = graph_formula(
        "def dominant(x) := forall y. (x = y | (E(x,y) & !E(y,x)))\ndominant(a)",
    );
    let some_dominant = graph_formula(
        "def dominant(x) := forall y. (x = y | (E(x,y) & !E(y,x)))\nexists x. dominant(x)",
    );
    let slots = [("a", "b"), ("b", "c"), ("a", "c"), ("c", "b"), ("b", "a")];
    let plan_for = |a: &Structure| {
        let mut insertable = BTreeSet::new();
        let mut deletable = BTreeSet::new();
        for (x, y) in slots {
            let f = GroundFact::new("E", &[x, y]);
            if a.holds(&f) {
                deletable.insert(f);
            } else {
                insertable.insert(f);
            }
        }
        UpdatePlan::new(insertable, deletable, BTreeSet::new()).unwrap()
    };

    let mut answer_model = empty_graph();
    for (x, y) in [("b", "c"), ("a", "c"), ("b", "a")] {
        answer_model.insert(&GroundFact::new("E", &[x, y])).unwrap();
    }
    let unique = repairs_from_monomials(&pi, &dominant_a, &plan_for(&answer_model)).unwrap();
    assert_eq!(unique.len(), 1);
    assert_eq!(unique[0].to_string(), "insert E(a,b); delete E(b,a)");

    let mut constraint_model = empty_graph();
    for (x, y) in [("a", "c"), ("c", "b"), ("b", "a")] {
        constraint_model
            .insert(&GroundFact::new("E", &[x, y]))
            .unwrap();
    }
    let repairs = repairs_from_monomials(&pi, &some_dominant, &plan_for(&constraint_model)).unwrap();
    let cost = CostModel::parse(
        "insert = 20\ndelete = 15\ntoken ~p = 10\ntoken ~q = 10\n\
         token s = 5\ntoken t = 5\ntoken r = 10\n",
    )
    .unwrap();
    let ranked = rank_repairs(&repairs, &pi, &constraint_model, &some_dominant, &cost).unwrap();
    assert_eq!(ranked.len(), 2);
    assert_eq!(ranked[0].repair.to_string(), "insert E(a,b); delete E(b,a)");
    assert_eq!(ranked[0].cost, 45.0);
    assert_eq!(ranked[1].repair.to_string(), "insert E(b,c); delete E(c,b)");
    assert_eq!(ranked[1].cost, 50.0);

    // Brute force over all 2^5 ways of touching the tracked edge slots:
    // collect every change set that satisfies the constraint, keep the
    // inclusion-minimal ones, and compare.
    let mut satisfying: Vec<Repair> = Vec::new();
    for mask in 0u32..32 {
        let mut inserts = BTreeSet::new();
        let mut deletes = BTreeSet::new();
        for (i, (x, y)) in slots.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let f = GroundFact::new("E", &[x, y]);
            if constraint_model.holds(&f) {
                deletes.insert(f);
            } else {
                inserts.insert(f);
            }
        }
        let repair = Repair { inserts, deletes };
        let changed = repair.apply(&constraint_model).unwrap();
        if changed.satisfies(&some_dominant).unwrap() {
            satisfying.push(repair);
        }
    }
    let mut minimal: Vec<Repair> = satisfying
        .iter()
        .filter(|r| !satisfying.iter().any(|o| *o != **r && o.subset_of(r)))
        .cloned()
        .collect();
    minimal.sort();
    let mut expected = repairs.clone();
    expected.sort();
    assert_eq!(minimal, expected);
    pass(8, "minimal repairs with ranked costs");
}

fn excluded_middle_family(n: usize) -> (Interpretation, Formula) {
    let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let universe = Universe::new(names.clone()).unwrap();
    let vocab = Vocabulary::with(&[("R", 1)]).unwrap();
    let tag = PolyTag::NDualPoly;
    let mut pi = Interpretation::new(Semiring::Poly(tag), universe.clone(), vocab.clone());
    for (i, element) in names.iter().enumerate() {
        let fact = GroundFact::new("R", &[element.as_str()]);
        let base = format!("x{}", i + 1);
        pi.assign(
            GroundLiteral::positive(fact.clone()),
            Value::Poly(Polynomial::from_token(tag, Token::pos(&base))),
        )
        .unwrap();
        pi.assign(
            GroundLiteral::negative(fact),
            Value::Poly(Polynomial::from_token(tag, Token::neg(&base))),
        )
        .unwrap();
    }
    let s = parse_formula("forall x. (R(x) | !R(x))", &vocab, &universe, false).unwrap();
    (pi, s)
}

#[test]
fn acceptance_09_size_separation() {
    for n in 2..=12 {
        let (pi, s) = excluded_middle_family(n);
        let circuit = evaluate_circuit(&pi, &s).unwrap();
        assert!(
            circuit.size() <= 3 * n + 2 && circuit.size() >= 2 * n,
            "circuit for n = {n} has size {}",
            circuit.size()
        );
        let expanded = circuit.expand(PolyTag::NDualPoly, 1 << 21).unwrap();
        assert_eq!(expanded.monomial_count(), 1 << n);
    }

    let (pi, s) = excluded_middle_family(20);
    let circuit = evaluate_circuit(&pi, &s).unwrap();
    assert!(circuit.size() <= 62);
    let start = Instant::now();
    match circuit.expand(PolyTag::NDualPoly, DEFAULT_EXPANSION_CAP) {
        Err(Error::CapExceeded { cap }) => assert_eq!(cap, DEFAULT_EXPANSION_CAP),
        other => panic!("expected the cap to abort the expansion, got {other:?}"),
    }
    assert!(start.elapsed() < Duration::from_secs(1));
    pass(9, "linear circuits against exponential expansions");
}

fn law_semirings() -> Vec<Semiring> {
    let mut out: Vec<Semiring> = Semiring::names()
        .iter()
        .map(|n| Semiring::from_name(n).unwrap())
        .collect();
    out.push(z4());
    out
}

fn z4() -> Semiring {
    let add: Vec<Vec<u8>> = (0..4)
        .map(|a| (0..4).map(|b| ((a + b) % 4) as u8).collect())
        .collect();
    let mul: Vec<Vec<u8>> = (0..4)
        .map(|a| (0..4).map(|b| ((a * b) % 4) as u8).collect())
        .collect();
    Semiring::Table(TableSemiring::new("z4", 0, 1, &add, &mul).unwrap())
}

#[test]
fn acceptance_10_property_suites() {
    let mut r = rng(0x5eed_0010);

    // Semiring axioms on random triples.
    let mut axiom_cases = 0;
    for sr in law_semirings() {
        let pool = sample_values(&sr);
        let eq = |a: &Value, b: &Value| sr.values_eq(a, b).unwrap();
        for _ in 0..40 {
            let a = &pool[r.gen_range(0..pool.len())];
            let b = &pool[r.gen_range(0..pool.len())];
            let c = &pool[r.gen_range(0..pool.len())];
            let add = |x: &Value, y: &Value| sr.add(x, y).unwrap();
            let mul = |x: &Value, y: &Value| sr.mul(x, y).unwrap();
            assert!(eq(&add(a, b), &add(b, a)));
            assert!(eq(&mul(a, b), &mul(b, a)));
            assert!(eq(&add(&add(a, b), c), &add(a, &add(b, c))));
            assert!(eq(&mul(&mul(a, b), c), &mul(a, &mul(b, c))));
            assert!(eq(&add(a, &sr.zero()), a));
            assert!(eq(&mul(a, &sr.one()), a));
            assert!(eq(&mul(a, &sr.zero()), &sr.zero()));
            assert!(eq(&mul(a, &add(b, c)), &add(&mul(a, b), &mul(a, c))));
            axiom_cases += 1;
        }
    }
    assert!(axiom_cases >= 500, "only {axiom_cases} axiom cases");

    // Positivity flags, observed against claimed.
    let mut flag_cases = 0;
    for sr in law_semirings() {
        let pool = sample_values(&sr);
        let flags = sr.flags();
        let report = sr.check_flags(&pool).unwrap();
        assert!(report.consistent(), "flag report for {}", sr.name());
        let mut witness = false;
        for a in &pool {
            for b in &pool {
                let sum = sr.add(a, b).unwrap();
                if flags.plus_positive && sr.is_zero(&sum).unwrap() {
                    assert!(sr.is_zero(a).unwrap() && sr.is_zero(b).unwrap());
                }
                let product = sr.mul(a, b).unwrap();
                if sr.is_zero(&product).unwrap()
                    && !sr.is_zero(a).unwrap()
                    && !sr.is_zero(b).unwrap()
                {
                    witness = true;
                }
                flag_cases += 1;
            }
        }
        assert_eq!(
            witness && !flags.zero_divisors,
            false,
            "undeclared zero divisors in {}",
            sr.name()
        );
    }
    let crushed = Semiring::Lukasiewicz
        .mul(&Value::Real(0.3), &Value::Real(0.4))
        .unwrap();
    assert!(Semiring::Lukasiewicz.is_zero(&crushed).unwrap());
    assert!(Semiring::Lukasiewicz.flags().zero_divisors);
    // The torsion counterexample: both a sentence and its negation can
    // evaluate to zero once addition stops being positive.
    let z4 = z4();
    let universe = Universe::new(["a1", "a2"]).unwrap();
    let vocab = Vocabulary::with(&[("R", 1)]).unwrap();
    let mut pi = Interpretation::new(z4.clone(), universe.clone(), vocab.clone());
    for e in ["a1", "a2"] {
        let fact = GroundFact::new("R", &[e]);
        pi.assign(GroundLiteral::positive(fact.clone()), Value::Table(2))
            .unwrap();
        pi.assign(GroundLiteral::negative(fact), Value::Table(2))
            .unwrap();
    }
    let both = parse_formula("R(a1) & R(a2)", &vocab, &universe, false).unwrap();
    assert_eq!(evaluate(&pi, &both).unwrap(), Value::Table(0));
    assert_eq!(
        evaluate(&pi, &Formula::not(both)).unwrap(),
        Value::Table(0)
    );
    assert!(flag_cases >= 500, "only {flag_cases} flag cases");

    // Monus as the adjoint of addition: a - b <= c iff a <= b + c.
    let monus_capable: Vec<Semiring> = law_semirings()
        .into_iter()
        .filter(|sr| sr.flags().has_monus && sr.flags().has_natural_order)
        .collect();
    assert!(!monus_capable.is_empty());
    let mut monus_cases = 0;
    while monus_cases < 520 {
        let sr = &monus_capable[r.gen_range(0..monus_capable.len())];
        let pool = sample_values(sr);
        let a = &pool[r.gen_range(0..pool.len())];
        let b = &pool[r.gen_range(0..pool.len())];
        let c = &pool[r.gen_range(0..pool.len())];
        let difference = sr.monus(a, b).unwrap();
        let lhs = sr.natural_leq(&difference, c).unwrap();
        let rhs = sr.natural_leq(a, &sr.add(b, c).unwrap()).unwrap();
        assert_eq!(lhs, rhs, "monus adjunction fails in {}", sr.name());
        monus_cases += 1;
    }

    // Evaluating then specializing tokens equals specializing then
    // evaluating, across target semirings.
    let targets = [
        Semiring::Bool,
        Semiring::Nat,
        Semiring::Tropical,
        Semiring::Viterbi,
        Semiring::Access,
    ];
    let mut commute_cases = 0;
    for _ in 0..105 {
        let universe = small_universe(2 + r.gen_range(0..2usize));
        let vocab = small_vocab(r.gen());
        let pi = random_tracking_interpretation(&mut r, &universe, &vocab);
        let depth = r.gen_range(0..=3usize);
        let s = random_sentence(&mut r, &universe, &vocab, depth);
        let poly = poly_of(evaluate(&pi, &s).unwrap());
        for sr in &targets {
            let assign = random_dual_assignment(&mut r, &pi, sr);
            let hom_first = poly.eval_hom(sr, &assign).unwrap();
            let direct = evaluate(&materialize(&pi, sr, &assign).unwrap(), &s).unwrap();
            assert!(
                sr.values_eq(&hom_first, &direct).unwrap(),
                "commutation fails on {s} in {}",
                sr.name()
            );
            commute_cases += 1;
        }
    }
    assert!(commute_cases >= 500, "only {commute_cases} commutation cases");

    // Dualizing a circuit twice gives the circuit back.
    let mut dual_cases = 0;
    for _ in 0..500 {
        let universe = small_universe(2 + r.gen_range(0..2usize));
        let vocab = small_vocab(r.gen());
        let pi = random_tracking_interpretation(&mut r, &universe, &vocab);
        let depth = r.gen_range(0..=3usize);
        let s = random_sentence(&mut r, &universe, &vocab, depth);
        let circuit = evaluate_circuit(&pi, &s).unwrap();
        assert_eq!(circuit.dualize().dualize(), circuit);
        dual_cases += 1;
    }

    // Negation normal form preserves both classical truth and provenance.
    let mut nnf_cases = 0;
    for _ in 0..500 {
        let universe = small_universe(2 + r.gen_range(0..2usize));
        let vocab = small_vocab(r.gen());
        let depth = r.gen_range(0..=3usize);
        let s = random_sentence(&mut r, &universe, &vocab, depth);
        let negated = Formula::not(s.clone());
        let doubled = Formula::not(negated.clone());

        let a = random_structure(&mut r, &universe, &vocab);
        assert_eq!(
            a.satisfies(&negated).unwrap(),
            a.satisfies(&nnf(&negated).unwrap()).unwrap()
        );
        assert_eq!(a.satisfies(&doubled).unwrap(), a.satisfies(&s).unwrap());

        let pi = random_tracking_interpretation(&mut r, &universe, &vocab);
        let plain = evaluate(&pi, &s).unwrap();
        assert_eq!(evaluate(&pi, &doubled).unwrap(), plain);
        assert_eq!(evaluate(&pi, &nnf(&doubled).unwrap()).unwrap(), plain);
        nnf_cases += 1;
    }

    println!(
        "property cases: axioms {axiom_cases}, flags {flag_cases}, monus {monus_cases}, \
         commutation {commute_cases}, dualize {dual_cases}, nnf {nnf_cases}"
    );
    pass(10, "property suites");
}
