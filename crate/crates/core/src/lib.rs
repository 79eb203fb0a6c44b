//! Semiring semantics for first-order logic over finite universes.
//!
//! The pipeline: a [`Structure`](interp::Structure) fixes a finite universe
//! and its relations; an [`Interpretation`](interp::Interpretation) maps
//! ground literals to values of a commutative [`Semiring`](semiring::Semiring);
//! the evaluator folds a sentence in negation normal form over those values,
//! producing a plain truth value, a count, a cost, a confidence, or a
//! provenance polynomial that tracks which facts (and absent facts) the
//! result depends on. On top of the polynomial view sit explanations,
//! proof-tree counting, incremental updates, and minimal repairs.

pub mod analysis;
pub mod circuit;
pub mod error;
pub mod eval;
pub mod interp;
pub mod logic;
pub mod poly;
pub mod semiring;
#[cfg(feature = "testing")]
pub mod testing;

pub use analysis::{
    explanations, generalized_interpretation, maximize_confidence, rank_repairs,
    render_repair_report, repairs_by_equation, repairs_from_monomials, score, update_provenance,
    why_not, CostModel, EquationNode, EquationRepairs, Explanation, MaxConfidence, ModelSketch,
    RankedRepair, Repair, UpdatePlan, INCONSISTENT_AGGREGATE,
};
pub use circuit::{Circuit, CircuitBuilder, DEFAULT_EXPANSION_CAP};
pub use error::{Error, Result};
pub use eval::{
    count_proof_trees, enumerate_proof_trees, evaluate, evaluate_circuit, evaluate_double,
    evaluate_with_flattening, sat_in_mod, sum_of_trees_oracle, valid_in_mod, ProofTree,
    TreeEnumeration, TREE_ORACLE_CAP,
};
pub use interp::{
    canonical_counting, canonical_truth, parse_ground_fact, parse_ground_literal,
    parse_interpretation, Interpretation, InterpretationClass, Structure,
};
pub use logic::{
    ground_literals, nnf, parse_formula, Formula, GroundFact, GroundLiteral, Term, Universe,
    Vocabulary,
};
pub use poly::{Monomial, PolyTag, Polynomial, Token};
pub use semiring::{Access, Flags, Semiring, TableSemiring, Value};
