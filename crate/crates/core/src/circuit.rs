//! Expression circuits: provenance in unexpanded form.
//!
//! The evaluator produces its polynomial semantics as a DAG of sum and
//! product nodes over token leaves, with identical subexpressions shared.
//! That form stays polynomial-sized in the universe even when the expanded
//! polynomial is exponential, so expansion is deferred and capped. Circuits
//! also support dualization (swap sums with products, each token with its
//! twin, 0 with 1), which mirrors negating the sentence.

use crate::error::{Error, Result};
use crate::poly::{Monomial, PolyTag, Polynomial, Token};
use crate::semiring::{Semiring, Value};
use num_bigint::BigUint;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Monomial cap used when no explicit limit is given.
pub const DEFAULT_EXPANSION_CAP: usize = 1_000_000;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Zero,
    One,
    Leaf(Token),
    Sum(Vec<NodeId>),
    Prod(Vec<NodeId>),
}

/// Assembles a circuit bottom-up, sharing structurally identical nodes.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
}

impl CircuitBuilder {
    pub fn new() -> CircuitBuilder {
        CircuitBuilder::default()
    }

    fn push(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.interned.insert(node, id);
        id
    }

    pub fn zero(&mut self) -> NodeId {
        self.push(Node::Zero)
    }

    pub fn one(&mut self) -> NodeId {
        self.push(Node::One)
    }

    pub fn leaf(&mut self, token: Token) -> NodeId {
        self.push(Node::Leaf(token))
    }

    pub fn sum(&mut self, children: Vec<NodeId>) -> NodeId {
        debug_assert!(children.iter().all(|&c| c < self.nodes.len()));
        self.push(Node::Sum(children))
    }

    pub fn prod(&mut self, children: Vec<NodeId>) -> NodeId {
        debug_assert!(children.iter().all(|&c| c < self.nodes.len()));
        self.push(Node::Prod(children))
    }

    /// Finishes the circuit, keeping only nodes reachable from the root.
    pub fn finish(self, root: NodeId) -> Circuit {
        assert!(root < self.nodes.len(), "root must be a built node");
        // Children are pushed before parents, so ids are already in
        // topological order; compaction preserves that.
        let mut keep = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if keep[id] {
                continue;
            }
            keep[id] = true;
            match &self.nodes[id] {
                Node::Sum(ch) | Node::Prod(ch) => stack.extend(ch.iter().copied()),
                _ => {}
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (id, node) in self.nodes.into_iter().enumerate() {
            if !keep[id] {
                continue;
            }
            remap[id] = nodes.len();
            nodes.push(match node {
                Node::Sum(ch) => Node::Sum(ch.into_iter().map(|c| remap[c]).collect()),
                Node::Prod(ch) => Node::Prod(ch.into_iter().map(|c| remap[c]).collect()),
                other => other,
            });
        }
        Circuit {
            root: remap[root],
            nodes,
        }
    }
}

/// An immutable expression DAG. Node ids are topologically ordered
/// (children before parents) and every node is reachable from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    nodes: Vec<Node>,
    root: NodeId,
}

impl Circuit {
    pub fn from_node(node: Node) -> Circuit {
        let mut b = CircuitBuilder::new();
        let root = b.push(node);
        b.finish(root)
    }

    /// Number of nodes; the reported circuit size.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn tokens(&self) -> BTreeSet<Token> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(t) => Some(*t),
                _ => None,
            })
            .collect()
    }

    /// Swaps sums with products, 0 with 1, and each token with its twin,
    /// node for node. Applying it twice gives back the identical circuit.
    pub fn dualize(&self) -> Circuit {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Zero => Node::One,
                Node::One => Node::Zero,
                Node::Leaf(t) => Node::Leaf(t.twin()),
                Node::Sum(ch) => Node::Prod(ch.clone()),
                Node::Prod(ch) => Node::Sum(ch.clone()),
            })
            .collect();
        Circuit {
            nodes,
            root: self.root,
        }
    }

    /// Evaluates the circuit in a semiring under a token assignment.
    ///
    /// When the target polynomial tag identifies `p*~p` with 0, a circuit
    /// can multiply twin tokens that its expansion would cancel, so here
    /// (unlike on canonical polynomials) twin images must multiply to zero
    /// whenever both twins occur; otherwise the circuit and its expansion
    /// could disagree.
    pub fn eval(
        &self,
        sr: &Semiring,
        assign: &HashMap<Token, Value>,
        check_duals: bool,
    ) -> Result<Value> {
        if check_duals {
            let tokens = self.tokens();
            for t in &tokens {
                if t.is_positive() && tokens.contains(&t.twin()) {
                    let (a, b) = (
                        assign
                            .get(t)
                            .ok_or_else(|| Error::MissingAssignment(t.to_string()))?,
                        assign
                            .get(&t.twin())
                            .ok_or_else(|| Error::MissingAssignment(t.twin().to_string()))?,
                    );
                    if !sr.is_zero(&sr.mul(a, b)?)? {
                        return Err(Error::DualAssignment {
                            pos: t.to_string(),
                            neg: t.twin().to_string(),
                        });
                    }
                }
            }
        }
        let mut values: Vec<Value> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Zero => sr.zero(),
                Node::One => sr.one(),
                Node::Leaf(t) => assign
                    .get(t)
                    .cloned()
                    .ok_or_else(|| Error::MissingAssignment(t.to_string()))?,
                Node::Sum(ch) => {
                    let mut acc = sr.zero();
                    for &c in ch {
                        acc = sr.add(&acc, &values[c])?;
                    }
                    acc
                }
                Node::Prod(ch) => {
                    let mut acc = sr.one();
                    for &c in ch {
                        acc = sr.mul(&acc, &values[c])?;
                    }
                    acc
                }
            };
            values.push(v);
        }
        Ok(values.swap_remove(self.root))
    }

    /// Expands to a canonical polynomial, failing once the monomial count
    /// of any intermediate canonical result would exceed `cap`.
    ///
    /// Products over disjoint token alphabets are counted before they are
    /// materialized (their canonical size is exactly the product of the
    /// factor sizes, whatever the tag), so a hopeless expansion aborts
    /// without allocating it.
    pub fn expand(&self, tag: PolyTag, cap: usize) -> Result<Polynomial> {
        let mut values: Vec<Polynomial> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let poly = match node {
                Node::Zero => Polynomial::zero(tag),
                Node::One => Polynomial::one(tag),
                Node::Leaf(t) => Polynomial::from_token(tag, *t),
                Node::Sum(ch) => {
                    let mut acc = Polynomial::zero(tag);
                    for &c in ch {
                        acc = acc.add(&values[c])?;
                        if acc.monomial_count() > cap {
                            return Err(Error::CapExceeded { cap });
                        }
                    }
                    acc
                }
                Node::Prod(ch) => {
                    let factors: Vec<&Polynomial> = ch.iter().map(|&c| &values[c]).collect();
                    prod_capped(tag, &factors, cap)?
                }
            };
            values.push(poly);
        }
        Ok(values.swap_remove(self.root))
    }
}

fn bases(p: &Polynomial) -> BTreeSet<&'static str> {
    p.token_set().iter().map(|t| t.base()).collect()
}

/// Multiplies the factors of a product node under the cap.
///
/// When every pair of factors draws on disjoint token alphabets, the
/// canonical size of the product is exactly the product of the factor
/// sizes regardless of the tag, so a blowup is detected from the counts
/// alone, before a single monomial is built.
fn prod_capped(tag: PolyTag, factors: &[&Polynomial], cap: usize) -> Result<Polynomial> {
    if factors.iter().any(|p| p.is_zero()) {
        return Ok(Polynomial::zero(tag));
    }
    let mut seen: BTreeSet<&'static str> = BTreeSet::new();
    let mut all_disjoint = true;
    let mut exact: Option<usize> = Some(1);
    for p in factors {
        let b = bases(p);
        if !seen.is_disjoint(&b) {
            all_disjoint = false;
            break;
        }
        seen.extend(b);
        exact = exact.and_then(|n| n.checked_mul(p.monomial_count()));
    }
    if all_disjoint {
        match exact {
            Some(n) if n <= cap => {}
            _ => return Err(Error::CapExceeded { cap }),
        }
    }
    let mut acc = Polynomial::one(tag);
    for p in factors {
        acc = mul_capped(&acc, p, cap)?;
    }
    Ok(acc)
}

fn mul_capped(a: &Polynomial, b: &Polynomial, cap: usize) -> Result<Polynomial> {
    let exceeded = || Error::CapExceeded { cap };
    if bases(a).is_disjoint(&bases(b)) {
        // Disjoint alphabets: no twin pair can form, no two products
        // collide, and products of incomparable monomials stay
        // incomparable, so the canonical size is exactly |a|*|b| for
        // every tag. Known too big means no need to materialize.
        let exact = a
            .monomial_count()
            .checked_mul(b.monomial_count())
            .ok_or_else(exceeded)?;
        if exact > cap {
            return Err(exceeded());
        }
        return a.mul(b);
    }
    let tag = a.tag();
    let mut map: HashMap<Vec<(Token, u32)>, BigUint> = HashMap::new();
    for ma in a.monomials() {
        for mb in b.monomials() {
            let m = ma.mul(mb);
            if tag.dual() && m.has_complementary_pair() {
                continue;
            }
            let m = if tag.drops_exponents() {
                let flat: Vec<(Token, u32)> =
                    m.factors().iter().map(|&(t, _)| (t, 1)).collect();
                Monomial::new(m.coeff().clone(), &flat)
            } else {
                m
            };
            let coeff = m.coeff().clone();
            *map.entry(m.factors().to_vec()).or_default() += coeff;
            // Distinct keys only grow, except under absorption, which is
            // applied at the end; aborting early is conservative there.
            if map.len() > cap {
                return Err(exceeded());
            }
        }
    }
    let poly = Polynomial::new(
        tag,
        map.into_iter()
            .map(|(factors, coeff)| Monomial::new(coeff, &factors))
            .collect(),
    );
    if poly.monomial_count() > cap {
        return Err(exceeded());
    }
    Ok(poly)
}

/// The folded, human-readable form: zero summands and unit factors vanish,
/// an annihilating factor collapses the product, nested sums and products
/// flatten, and single-child nodes collapse. Unit summands stay, because
/// `1 + q + r` really does say "or nothing changes". The repair machinery
/// reads this shape off directly when solving for annihilating token sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Folded {
    Zero,
    One,
    Leaf(Token),
    Sum(Vec<Folded>),
    Prod(Vec<Folded>),
}

impl Folded {
    /// Sort key inside a sum: constants first, then leaf tokens in token
    /// order, then composites by their rendered text.
    fn sum_key(&self) -> (u8, Option<Token>, String) {
        match self {
            Folded::Zero | Folded::One => (0, None, self.render()),
            Folded::Leaf(t) => (1, Some(*t), String::new()),
            _ => (2, None, self.render()),
        }
    }

    fn render(&self) -> String {
        match self {
            Folded::Zero => "0".into(),
            Folded::One => "1".into(),
            Folded::Leaf(t) => t.to_string(),
            Folded::Sum(ch) => ch
                .iter()
                .map(Folded::render)
                .collect::<Vec<_>>()
                .join(" + "),
            Folded::Prod(ch) => ch
                .iter()
                .map(|c| match c {
                    Folded::Sum(_) => format!("({})", c.render()),
                    _ => c.render(),
                })
                .collect::<Vec<_>>()
                .join("*"),
        }
    }
}

pub(crate) fn fold(circuit: &Circuit) -> Folded {
    let mut values: Vec<Folded> = Vec::with_capacity(circuit.nodes.len());
    for node in &circuit.nodes {
        let f = match node {
            Node::Zero => Folded::Zero,
            Node::One => Folded::One,
            Node::Leaf(t) => Folded::Leaf(*t),
            Node::Sum(ch) => {
                let mut kids: Vec<Folded> = Vec::new();
                for &c in ch {
                    match values[c].clone() {
                        Folded::Zero => {}
                        Folded::Sum(inner) => kids.extend(inner),
                        other => kids.push(other),
                    }
                }
                kids.sort_by_cached_key(Folded::sum_key);
                match kids.len() {
                    0 => Folded::Zero,
                    1 => kids.pop().unwrap(),
                    _ => Folded::Sum(kids),
                }
            }
            Node::Prod(ch) => {
                let mut kids: Vec<Folded> = Vec::new();
                let mut zero = false;
                for &c in ch {
                    match values[c].clone() {
                        Folded::One => {}
                        Folded::Zero => zero = true,
                        Folded::Prod(inner) => kids.extend(inner),
                        other => kids.push(other),
                    }
                }
                if zero {
                    Folded::Zero
                } else {
                    match kids.len() {
                        0 => Folded::One,
                        1 => kids.pop().unwrap(),
                        _ => Folded::Prod(kids),
                    }
                }
            }
        };
        values.push(f);
    }
    values.swap_remove(circuit.root)
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fold(self).render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(name: &str) -> Token {
        Token::parse(name).unwrap()
    }

    /// Sum-of-products circuit from token rows; "0"/"1" are constants.
    fn sop(rows: &[&[&str]]) -> Circuit {
        let mut b = CircuitBuilder::new();
        let mut sums = Vec::new();
        for row in rows {
            let leaves: Vec<NodeId> = row
                .iter()
                .map(|n| match *n {
                    "0" => b.zero(),
                    "1" => b.one(),
                    other => b.leaf(tok(other)),
                })
                .collect();
            sums.push(b.prod(leaves));
        }
        let root = b.sum(sums);
        b.finish(root)
    }

    /// Product-of-sums circuit from token rows.
    fn pos(rows: &[&[&str]]) -> Circuit {
        let mut b = CircuitBuilder::new();
        let mut prods = Vec::new();
        for row in rows {
            let leaves: Vec<NodeId> = row
                .iter()
                .map(|n| match *n {
                    "0" => b.zero(),
                    "1" => b.one(),
                    other => b.leaf(tok(other)),
                })
                .collect();
            prods.push(b.sum(leaves));
        }
        let root = b.prod(prods);
        b.finish(root)
    }

    fn tautology_family(n: usize) -> Circuit {
        let mut b = CircuitBuilder::new();
        let mut factors = Vec::new();
        for i in 1..=n {
            let p = b.leaf(Token::pos(&format!("p{i}")));
            let np = b.leaf(Token::neg(&format!("p{i}")));
            factors.push(b.sum(vec![p, np]));
        }
        let root = b.prod(factors);
        b.finish(root)
    }

    #[test]
    fn sharing_keeps_the_linear_family_linear() {
        for n in [2usize, 5, 12] {
            let c = tautology_family(n);
            // n positive leaves, n negative leaves, n sums, one product.
            assert_eq!(c.size(), 3 * n + 1);
        }
        // Shared subexpressions are stored once.
        let mut b = CircuitBuilder::new();
        let p = b.leaf(tok("p"));
        let q = b.leaf(tok("q"));
        let s = b.sum(vec![p, q]);
        let s2 = b.sum(vec![p, q]);
        assert_eq!(s, s2);
        let root = b.prod(vec![s, s2]);
        assert_eq!(b.finish(root).size(), 4);
    }

    #[test]
    fn unreachable_nodes_are_dropped() {
        let mut b = CircuitBuilder::new();
        let p = b.leaf(tok("p"));
        let _orphan = b.leaf(tok("q"));
        let root = b.sum(vec![p, p]);
        let c = b.finish(root);
        assert_eq!(c.size(), 2);
        assert_eq!(c.to_string(), "p + p");
    }

    #[test]
    fn folded_rendering_examples() {
        let c = pos(&[&["~p", "~r", "t"], &["p", "~q", "s", "~t"], &["1", "q", "r", "~s"]]);
        assert_eq!(
            c.to_string(),
            "(~p + ~r + t)*(p + ~q + s + ~t)*(1 + q + r + ~s)"
        );
        assert_eq!(tautology_family(3).to_string(), "(p1 + ~p1)*(p2 + ~p2)*(p3 + ~p3)");
        // Zero summands and unit factors fold away; zero factors annihilate.
        let c = sop(&[&["p", "1", "r"], &["0", "q"]]);
        assert_eq!(c.to_string(), "p*r");
        let c = pos(&[&["0", "p"], &["1"]]);
        assert_eq!(c.to_string(), "p");
        assert_eq!(Circuit::from_node(Node::Zero).to_string(), "0");
        // Sum ordering: constants, then tokens in canonical order, then
        // composite children by rendered text.
        let mut b = CircuitBuilder::new();
        let q = b.leaf(tok("q"));
        let np = b.leaf(tok("~p"));
        let one = b.one();
        let r = b.leaf(tok("r"));
        let s = b.leaf(tok("s"));
        let inner = b.prod(vec![r, s]);
        let root = b.sum(vec![inner, q, np, one]);
        assert_eq!(b.finish(root).to_string(), "1 + ~p + q + r*s");
    }

    #[test]
    fn dualize_swaps_everything_and_is_self_inverse() {
        let mut b = CircuitBuilder::new();
        let p = b.leaf(tok("p"));
        let q = b.leaf(tok("q"));
        let root = b.sum(vec![p, q]);
        let c = b.finish(root);
        let dual = c.dualize();
        assert_eq!(dual.to_string(), "~p*~q");
        assert_eq!(dual.dualize(), c);

        let c = sop(&[&["p", "r", "~t"], &["~p", "q", "~s", "t"], &["0", "~q", "~r", "s"]]);
        let dual = c.dualize();
        assert_eq!(
            dual.to_string(),
            "(~p + ~r + t)*(p + ~q + s + ~t)*(1 + q + r + ~s)"
        );
        // The two sides expand to the same free polynomial.
        let direct = pos(&[&["~p", "~r", "t"], &["p", "~q", "s", "~t"], &["1", "q", "r", "~s"]]);
        let cap = DEFAULT_EXPANSION_CAP;
        assert_eq!(
            dual.expand(PolyTag::NPoly, cap).unwrap(),
            direct.expand(PolyTag::NPoly, cap).unwrap()
        );
        assert_eq!(dual.expand(PolyTag::NPoly, cap).unwrap().monomial_count(), 48);
        assert_eq!(
            dual.expand(PolyTag::NDualPoly, cap).unwrap().monomial_count(),
            30
        );
    }

    #[test]
    fn expansion_counts_and_cap() {
        assert_eq!(
            tautology_family(10)
                .expand(PolyTag::NDualPoly, DEFAULT_EXPANSION_CAP)
                .unwrap()
                .monomial_count(),
            1 << 10
        );
        let err = tautology_family(20)
            .expand(PolyTag::NDualPoly, DEFAULT_EXPANSION_CAP)
            .unwrap_err();
        assert_eq!(
            err,
            Error::CapExceeded {
                cap: DEFAULT_EXPANSION_CAP
            }
        );
    }

    #[test]
    fn aborting_at_the_cap_is_fast_even_for_huge_products() {
        let start = std::time::Instant::now();
        for _ in 0..20 {
            assert!(tautology_family(64)
                .expand(PolyTag::NDualPoly, DEFAULT_EXPANSION_CAP)
                .is_err());
        }
        assert!(start.elapsed().as_secs() < 5);
    }

    #[test]
    fn expansion_merges_repeated_summands_per_tag() {
        let mut b = CircuitBuilder::new();
        let p = b.leaf(tok("p"));
        let root = b.sum(vec![p, p]);
        let c = b.finish(root);
        assert_eq!(
            c.expand(PolyTag::NPoly, 10).unwrap().to_string(),
            "2*p"
        );
        assert_eq!(c.expand(PolyTag::BPoly, 10).unwrap().to_string(), "p");
    }

    #[test]
    fn circuit_eval_matches_expansion_and_checks_twins() {
        let c = pos(&[&["~p", "~r", "t"], &["p", "~q", "s", "~t"], &["1", "q", "r", "~s"]]);
        let sr = Semiring::Nat;
        let mut assign: HashMap<Token, Value> = HashMap::new();
        for t in c.tokens() {
            // Positive twins get values, negative twins zero: consistent.
            assign.insert(t, if t.is_positive() { Value::nat(3) } else { Value::nat(0) });
        }
        let direct = c.eval(&sr, &assign, true).unwrap();
        let expanded = c
            .expand(PolyTag::NDualPoly, DEFAULT_EXPANSION_CAP)
            .unwrap()
            .eval_hom(&sr, &assign)
            .unwrap();
        assert_eq!(direct, expanded);

        let mut bad = assign.clone();
        bad.insert(tok("~p"), Value::nat(1));
        assert!(matches!(
            c.eval(&sr, &bad, true),
            Err(Error::DualAssignment { .. })
        ));
        // Without the check the circuit happily multiplies twins.
        assert!(c.eval(&sr, &bad, false).is_ok());
    }
}
