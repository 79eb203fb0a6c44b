//! Provenance polynomials over paired positive/negative tokens.
//!
//! A [`Token`] annotates one ground literal; `p` tracks the presence of a
//! fact, its twin `~p` tracks its absence. Polynomials over these tokens
//! come in several flavours, selected by a [`PolyTag`]: the free semiring
//! keeps everything, the dual variants delete monomials that assert a fact
//! and its negation at once (`p*~p = 0`), and the smaller quotients drop
//! coefficients, drop exponents, or keep only absorption-minimal monomials.
//!
//! Everything here is exact: coefficients are arbitrary-precision naturals
//! and canonical form is restored after every operation, so structural
//! equality is semantic equality.

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Value};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Mutex, OnceLock};

fn intern(name: &str) -> &'static str {
    static POOL: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    let mut pool = POOL.get_or_init(|| Mutex::new(HashSet::new())).lock().unwrap();
    match pool.get(name) {
        Some(s) => s,
        None => {
            let s: &'static str = Box::leak(name.to_string().into_boxed_str());
            pool.insert(s);
            s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

/// An indeterminate. Tokens are interned, so they are `Copy` and cheap to
/// compare. Ordering is by base name, with the positive twin first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token {
    base: &'static str,
    polarity: Polarity,
}

impl Token {
    pub fn pos(base: &str) -> Token {
        Token {
            base: intern(base),
            polarity: Polarity::Positive,
        }
    }

    pub fn neg(base: &str) -> Token {
        Token {
            base: intern(base),
            polarity: Polarity::Negative,
        }
    }

    pub fn base(&self) -> &'static str {
        self.base
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }

    /// The twin token of opposite polarity.
    pub fn twin(&self) -> Token {
        Token {
            base: self.base,
            polarity: match self.polarity {
                Polarity::Positive => Polarity::Negative,
                Polarity::Negative => Polarity::Positive,
            },
        }
    }

    pub fn parse(text: &str) -> Result<Token> {
        let (neg, name) = match text.strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        if !is_identifier(name) {
            return Err(Error::Syntax {
                line: 1,
                col: 1,
                msg: format!("`{text}` is not a token name"),
            });
        }
        Ok(if neg { Token::neg(name) } else { Token::pos(name) })
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Negative {
            write!(f, "~")?;
        }
        write!(f, "{}", self.base)
    }
}

/// Which polynomial semiring a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolyTag {
    /// Free polynomials over all tokens; nothing is identified.
    NPoly,
    /// Quotient by `p*~p = 0`: monomials using both twins of a pair vanish.
    NDualPoly,
    /// Coefficients collapsed to 1.
    BPoly,
    /// Coefficients and exponents collapsed to 1.
    Why,
    /// Coefficients collapsed, monomial sets kept absorption-minimal
    /// (exponents survive).
    Sorp,
    /// Sets of token sets, absorption-minimal: coefficients and exponents
    /// collapsed and dominated monomials removed.
    PosBool,
    /// [`PolyTag::PosBool`] plus the `p*~p = 0` quotient.
    PosBoolDual,
}

impl PolyTag {
    pub const ALL: [PolyTag; 7] = [
        PolyTag::NPoly,
        PolyTag::NDualPoly,
        PolyTag::BPoly,
        PolyTag::Why,
        PolyTag::Sorp,
        PolyTag::PosBool,
        PolyTag::PosBoolDual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolyTag::NPoly => "npoly",
            PolyTag::NDualPoly => "ndualpoly",
            PolyTag::BPoly => "bpoly",
            PolyTag::Why => "why",
            PolyTag::Sorp => "sorp",
            PolyTag::PosBool => "posbool",
            PolyTag::PosBoolDual => "posbool-dual",
        }
    }

    pub fn from_name(name: &str) -> Option<PolyTag> {
        PolyTag::ALL.iter().copied().find(|t| t.name() == name)
    }

    /// Whether the `p*~p = 0` congruence applies.
    pub fn dual(self) -> bool {
        matches!(self, PolyTag::NDualPoly | PolyTag::PosBoolDual)
    }

    pub fn drops_coefficients(self) -> bool {
        !matches!(self, PolyTag::NPoly | PolyTag::NDualPoly)
    }

    pub fn drops_exponents(self) -> bool {
        matches!(self, PolyTag::Why | PolyTag::PosBool | PolyTag::PosBoolDual)
    }

    pub fn absorptive(self) -> bool {
        matches!(self, PolyTag::Sorp | PolyTag::PosBool | PolyTag::PosBoolDual)
    }
}

/// A product of token powers with a natural-number coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    coeff: BigUint,
    /// Sorted by token, exponents >= 1.
    factors: Vec<(Token, u32)>,
}

impl Monomial {
    pub fn constant(coeff: BigUint) -> Monomial {
        Monomial {
            coeff,
            factors: Vec::new(),
        }
    }

    pub fn from_token(token: Token) -> Monomial {
        Monomial {
            coeff: BigUint::one(),
            factors: vec![(token, 1)],
        }
    }

    pub fn new(coeff: BigUint, factors: &[(Token, u32)]) -> Monomial {
        let mut map: Vec<(Token, u32)> = Vec::new();
        for &(t, e) in factors {
            if e == 0 {
                continue;
            }
            match map.iter_mut().find(|(u, _)| *u == t) {
                Some((_, acc)) => *acc += e,
                None => map.push((t, e)),
            }
        }
        map.sort();
        Monomial {
            coeff,
            factors: map,
        }
    }

    pub fn coeff(&self) -> &BigUint {
        &self.coeff
    }

    pub fn factors(&self) -> &[(Token, u32)] {
        &self.factors
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = Token> + '_ {
        self.factors.iter().map(|&(t, _)| t)
    }

    pub fn contains(&self, token: Token) -> bool {
        self.factors.iter().any(|&(t, _)| t == token)
    }

    /// Whether both twins of some pair occur.
    pub fn has_complementary_pair(&self) -> bool {
        self.factors
            .windows(2)
            .any(|w| w[0].0.base() == w[1].0.base())
    }

    /// Divisibility ignoring coefficients: every factor of `self` occurs in
    /// `other` with at least the same exponent.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.factors.iter().all(|&(t, e)| {
            other
                .factors
                .iter()
                .any(|&(u, f)| u == t && f >= e)
        })
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Monomial::new(&self.coeff * &other.coeff, &factors)
    }

    /// The token sequence with multiplicity, e.g. `p^2*q` gives p, p, q.
    /// Canonical monomial order compares degree first, then this sequence.
    fn expanded_key(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for &(t, e) in &self.factors {
            for _ in 0..e {
                out.push(t);
            }
        }
        out
    }

    fn order_key(&self) -> (u64, Vec<Token>) {
        (self.degree(), self.expanded_key())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "{}", self.coeff);
        }
        let mut lead = false;
        if !self.coeff.is_one() {
            write!(f, "{}", self.coeff)?;
            lead = true;
        }
        for &(t, e) in &self.factors {
            if lead {
                write!(f, "*")?;
            }
            lead = true;
            write!(f, "{t}")?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial in canonical form under its tag's congruences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    tag: PolyTag,
    /// Canonically ordered, no duplicate factor maps, no zero coefficients.
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(tag: PolyTag) -> Polynomial {
        Polynomial {
            tag,
            monomials: Vec::new(),
        }
    }

    pub fn one(tag: PolyTag) -> Polynomial {
        Polynomial::constant(tag, BigUint::one())
    }

    pub fn constant(tag: PolyTag, coeff: BigUint) -> Polynomial {
        Polynomial::new(tag, vec![Monomial::constant(coeff)])
    }

    pub fn from_token(tag: PolyTag, token: Token) -> Polynomial {
        Polynomial::new(tag, vec![Monomial::from_token(token)])
    }

    /// Builds a polynomial, restoring canonical form.
    pub fn new(tag: PolyTag, monomials: Vec<Monomial>) -> Polynomial {
        let mut entries: Vec<Monomial> = Vec::new();
        for mut m in monomials {
            if m.coeff.is_zero() {
                continue;
            }
            if tag.drops_exponents() {
                for f in &mut m.factors {
                    f.1 = 1;
                }
            }
            if tag.dual() && m.has_complementary_pair() {
                continue;
            }
            match entries.iter_mut().find(|e| e.factors == m.factors) {
                Some(e) => e.coeff += &m.coeff,
                None => entries.push(m),
            }
        }
        if tag.drops_coefficients() {
            for m in &mut entries {
                m.coeff = BigUint::one();
            }
        }
        if tag.absorptive() {
            let keep: Vec<bool> = entries
                .iter()
                .map(|m| {
                    !entries
                        .iter()
                        .any(|d| d.factors != m.factors && d.divides(m))
                })
                .collect();
            let mut it = keep.iter();
            entries.retain(|_| *it.next().unwrap());
        }
        entries.sort_by_cached_key(|m| m.order_key());
        Polynomial {
            tag,
            monomials: entries,
        }
    }

    pub fn tag(&self) -> PolyTag {
        self.tag
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.monomials.len() == 1
            && self.monomials[0].is_constant()
            && self.monomials[0].coeff.is_one()
    }

    /// All tokens occurring in the polynomial, in canonical order.
    pub fn token_set(&self) -> BTreeSet<Token> {
        self.monomials.iter().flat_map(|m| m.tokens()).collect()
    }

    /// The coefficient of the monomial with exactly these factors.
    pub fn coefficient(&self, factors: &[(Token, u32)]) -> BigUint {
        let probe = Monomial::new(BigUint::one(), factors);
        self.monomials
            .iter()
            .find(|m| m.factors == probe.factors)
            .map(|m| m.coeff.clone())
            .unwrap_or_else(BigUint::zero)
    }

    fn check_tag(&self, other: &Polynomial) -> Result<()> {
        if self.tag == other.tag {
            Ok(())
        } else {
            Err(Error::TagMismatch {
                left: self.tag.name().into(),
                right: other.tag.name().into(),
            })
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_tag(other)?;
        let mut all = self.monomials.clone();
        all.extend(other.monomials.iter().cloned());
        Ok(Polynomial::new(self.tag, all))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_tag(other)?;
        let mut all = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                let m = a.mul(b);
                // Eager quotient: drop vanishing products before they pile up.
                if self.tag.dual() && m.has_complementary_pair() {
                    continue;
                }
                all.push(m);
            }
        }
        Ok(Polynomial::new(self.tag, all))
    }

    /// Decides `self <= other` in the natural order (some r adds up).
    /// With idempotent addition this is `self + other == other`; otherwise
    /// it is coefficient-wise comparison, which is exact here because
    /// addition of canonical forms never cancels monomials.
    pub fn natural_leq(&self, other: &Polynomial) -> Result<bool> {
        self.check_tag(other)?;
        if self.tag.drops_coefficients() {
            return Ok(&self.add(other)? == other);
        }
        Ok(self
            .monomials
            .iter()
            .all(|m| m.coeff <= other.coefficient(&m.factors)))
    }

    /// Absorption-minimal monomials: drops every monomial strictly divisible
    /// by another (coefficients ignored).
    pub fn minimal_monomials(&self) -> Vec<Monomial> {
        self.monomials
            .iter()
            .filter(|m| {
                !self
                    .monomials
                    .iter()
                    .any(|d| d.factors != m.factors && d.divides(m))
            })
            .cloned()
            .collect()
    }

    /// Kills every monomial mentioning one of the given tokens, as if they
    /// were set to 0.
    pub fn zero_tokens(&self, dead: &HashSet<Token>) -> Polynomial {
        if dead.is_empty() {
            return self.clone();
        }
        Polynomial {
            tag: self.tag,
            monomials: self
                .monomials
                .iter()
                .filter(|m| !m.tokens().any(|t| dead.contains(&t)))
                .cloned()
                .collect(),
        }
    }

    /// Positive tokens whose twin also occurs somewhere in the polynomial.
    pub fn dual_pairs(&self) -> Vec<Token> {
        let tokens = self.token_set();
        tokens
            .iter()
            .filter(|t| t.is_positive() && tokens.contains(&t.twin()))
            .copied()
            .collect()
    }

    /// Applies the token assignment monomial-wise and sums the images.
    ///
    /// The assignment must cover every token occurring here. On canonical
    /// forms this is unambiguous even when twin tokens both receive nonzero
    /// values (cost maps price an insertion and a deletion of the same fact
    /// at once): no monomial of a dual-tag polynomial mentions both twins,
    /// so the vanishing products never arise. Circuit evaluation, where
    /// they can arise, does enforce the zero-product requirement.
    pub fn eval_hom(&self, sr: &Semiring, assign: &HashMap<Token, Value>) -> Result<Value> {
        let lookup = |t: Token| -> Result<&Value> {
            assign
                .get(&t)
                .ok_or_else(|| Error::MissingAssignment(t.to_string()))
        };
        let mut total = sr.zero();
        for m in &self.monomials {
            let mut prod = sr.one();
            for &(t, e) in &m.factors {
                let v = lookup(t)?;
                for _ in 0..e {
                    prod = sr.mul(&prod, v)?;
                }
            }
            total = sr.add(&total, &sr.nat_scale(&m.coeff, &prod)?)?;
        }
        Ok(total)
    }

    /// Substitutes polynomials for tokens; tokens absent from the map stay
    /// themselves. The dual-consistency requirement of [`Polynomial::eval_hom`]
    /// applies.
    pub fn substitute(&self, map: &HashMap<Token, Polynomial>) -> Result<Polynomial> {
        let image = |t: Token| -> Polynomial {
            map.get(&t)
                .cloned()
                .unwrap_or_else(|| Polynomial::from_token(self.tag, t))
        };
        if self.tag.dual() {
            for pos in self.dual_pairs() {
                let prod = image(pos).mul(&image(pos.twin()))?;
                if !prod.is_zero() {
                    return Err(Error::DualAssignment {
                        pos: pos.to_string(),
                        neg: pos.twin().to_string(),
                    });
                }
            }
        }
        let mut total = Polynomial::zero(self.tag);
        for m in &self.monomials {
            let mut prod = Polynomial::constant(self.tag, m.coeff.clone());
            for &(t, e) in &m.factors {
                let img = image(t);
                for _ in 0..e {
                    prod = prod.mul(&img)?;
                }
            }
            total = total.add(&prod)?;
        }
        Ok(total)
    }

    /// Sum of coefficients, i.e. the image under "every token to 1" in the
    /// counting semiring.
    pub fn coefficient_sum(&self) -> BigUint {
        self.monomials.iter().map(|m| m.coeff.clone()).sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Parses the textual polynomial form, e.g. `2*~p*~q + r^2 + 1`.
pub fn parse(tag: PolyTag, text: &str) -> Result<Polynomial> {
    let syntax = |col: usize, msg: String| Error::Syntax { line: 1, col, msg };
    let mut monomials = Vec::new();
    let mut offset = 0;
    for chunk in text.split('+') {
        let col = offset + 1 + (chunk.len() - chunk.trim_start().len());
        offset += chunk.len() + 1;
        let term = chunk.trim();
        if term.is_empty() {
            return Err(syntax(col, "empty term".into()));
        }
        let mut coeff = BigUint::one();
        let mut factors: Vec<(Token, u32)> = Vec::new();
        let mut saw_number = false;
        for piece in term.split('*') {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(syntax(col, "empty factor".into()));
            }
            if piece.chars().all(|c| c.is_ascii_digit()) {
                if saw_number || !factors.is_empty() {
                    return Err(syntax(col, format!("misplaced coefficient `{piece}`")));
                }
                saw_number = true;
                coeff = piece.parse::<BigUint>().unwrap();
                continue;
            }
            let (name, exp) = match piece.split_once('^') {
                Some((n, e)) => {
                    let exp = e.parse::<u32>().map_err(|_| {
                        syntax(col, format!("`{e}` is not a valid exponent"))
                    })?;
                    if exp == 0 {
                        return Err(syntax(col, "exponents must be positive".into()));
                    }
                    (n, exp)
                }
                None => (piece, 1),
            };
            let token = Token::parse(name)
                .map_err(|_| syntax(col, format!("`{name}` is not a token name")))?;
            factors.push((token, exp));
        }
        if coeff.is_zero() && factors.is_empty() {
            continue;
        }
        if coeff.is_zero() {
            return Err(syntax(col, "zero coefficient on a non-constant term".into()));
        }
        monomials.push(Monomial::new(coeff, &factors));
    }
    Ok(Polynomial::new(tag, monomials))
}
