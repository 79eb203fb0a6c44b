//! The commutative semiring kernel.
//!
//! A [`Semiring`] is a runtime handle naming one of the built-in semirings
//! (or a finite semiring loaded from operation tables). Elements are tagged
//! [`Value`]s; every operation checks that its arguments belong to the
//! carrier and reports a typed error otherwise. Besides addition and
//! multiplication the kernel derives, where they exist: the natural order,
//! monus (truncated difference), the residual implications, and the
//! flattening negation that collapses a value to 0 or 1.

use crate::error::{Error, Result};
use crate::poly::{self, PolyTag, Polynomial};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Arc;

/// Comparison tolerance for the real-valued carriers.
pub const REAL_EPS: f64 = 1e-12;

/// Clearance levels of the access-control semiring, ordered
/// 0 < T < S < C < P. 0 means "no one may access", P "public".
/// Addition is max (the most permissive evidence wins), multiplication is
/// min (a conjunction is as restricted as its most classified part).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Access {
    Denied,
    TopSecret,
    Secret,
    Confidential,
    Public,
}

impl Access {
    pub fn symbol(self) -> &'static str {
        match self {
            Access::Denied => "0",
            Access::TopSecret => "T",
            Access::Secret => "S",
            Access::Confidential => "C",
            Access::Public => "P",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Access> {
        Some(match s {
            "0" => Access::Denied,
            "T" => Access::TopSecret,
            "S" => Access::Secret,
            "C" => Access::Confidential,
            "P" => Access::Public,
            _ => return None,
        })
    }
}

/// A tagged semiring element.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    /// Counting semiring element; arbitrary precision.
    Nat(BigUint),
    /// Element of one of the real carriers (tropical, Viterbi, fuzzy,
    /// Łukasiewicz, doubt). Never NaN.
    Real(f64),
    Access(Access),
    Poly(Polynomial),
    /// Index into the carrier of a table-loaded finite semiring.
    Table(u8),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", if *b { "true" } else { "false" }),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Real(x) if x.is_infinite() => write!(f, "inf"),
            Value::Real(x) => write!(f, "{x}"),
            Value::Access(a) => write!(f, "{}", a.symbol()),
            Value::Poly(p) => write!(f, "{p}"),
            Value::Table(i) => write!(f, "{i}"),
        }
    }
}

impl Value {
    pub fn nat(n: u64) -> Value {
        Value::Nat(BigUint::from(n))
    }
}

/// Structural and capability flags of a semiring.
///
/// The first five describe the algebra and can be spot-checked on samples
/// with [`Semiring::check_flags`]; the rest advertise which derived
/// operations the kernel provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    /// a + b = 0 implies a = 0 and b = 0.
    pub plus_positive: bool,
    /// Some a, b != 0 have a * b = 0.
    pub zero_divisors: bool,
    pub add_idempotent: bool,
    pub mul_idempotent: bool,
    /// a + a*b = a for all a, b.
    pub absorptive: bool,
    /// Addition and multiplication are max and min of a total order.
    pub min_max: bool,
    pub has_monus: bool,
    pub has_goedel_implication: bool,
    pub has_general_implication: bool,
    /// The natural order (a <= b iff a + r = b for some r) is decidable here.
    pub has_natural_order: bool,
}

/// A finite commutative semiring given by its operation tables.
///
/// Exists so that tests can exercise semirings outside the built-in list,
/// e.g. rings with torsion on which completeness of the evaluation relation
/// fails. The constructor validates every axiom exhaustively.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSemiring {
    name: String,
    size: u8,
    add: Vec<u8>,
    mul: Vec<u8>,
    zero: u8,
    one: u8,
    flags: Flags,
}

impl TableSemiring {
    pub fn new(
        name: &str,
        zero: u8,
        one: u8,
        add: &[Vec<u8>],
        mul: &[Vec<u8>],
    ) -> Result<Arc<TableSemiring>> {
        let n = add.len();
        let bad = |msg: String| Error::Carrier {
            semiring: name.to_string(),
            value: "table".into(),
            reason: msg,
        };
        if n == 0 || n > 256 || mul.len() != n {
            return Err(bad("tables must be square and of equal size".into()));
        }
        for row in add.iter().chain(mul) {
            if row.len() != n || row.iter().any(|&v| v as usize >= n) {
                return Err(bad("table entries must index the carrier".into()));
            }
        }
        if zero as usize >= n || one as usize >= n || zero == one {
            return Err(bad("zero and one must be distinct carrier elements".into()));
        }
        let flat = |t: &[Vec<u8>], a: usize, b: usize| t[a][b] as usize;
        for a in 0..n {
            for b in 0..n {
                if flat(add, a, b) != flat(add, b, a) || flat(mul, a, b) != flat(mul, b, a) {
                    return Err(bad("operations must be commutative".into()));
                }
                for c in 0..n {
                    if flat(add, flat(add, a, b), c) != flat(add, a, flat(add, b, c)) {
                        return Err(bad("addition must be associative".into()));
                    }
                    if flat(mul, flat(mul, a, b), c) != flat(mul, a, flat(mul, b, c)) {
                        return Err(bad("multiplication must be associative".into()));
                    }
                    if flat(mul, a, flat(add, b, c)) != flat(add, flat(mul, a, b), flat(mul, a, c))
                    {
                        return Err(bad("multiplication must distribute over addition".into()));
                    }
                }
            }
            if flat(add, a, zero as usize) != a || flat(mul, a, one as usize) != a {
                return Err(bad("0 must be neutral for + and 1 for *".into()));
            }
            if flat(mul, a, zero as usize) != zero as usize {
                return Err(bad("0 must annihilate".into()));
            }
        }
        let z = zero as usize;
        let flags = Flags {
            plus_positive: (0..n)
                .all(|a| (0..n).all(|b| flat(add, a, b) != z || (a == z && b == z))),
            zero_divisors: (0..n)
                .any(|a| (0..n).any(|b| a != z && b != z && flat(mul, a, b) == z)),
            add_idempotent: (0..n).all(|a| flat(add, a, a) == a),
            mul_idempotent: (0..n).all(|a| flat(mul, a, a) == a),
            absorptive: (0..n).all(|a| (0..n).all(|b| flat(add, a, flat(mul, a, b)) == a)),
            min_max: false,
            has_monus: false,
            has_goedel_implication: false,
            has_general_implication: false,
            has_natural_order: false,
        };
        Ok(Arc::new(TableSemiring {
            name: name.to_string(),
            size: n as u8,
            add: add.iter().flatten().copied().collect(),
            mul: mul.iter().flatten().copied().collect(),
            zero,
            one,
            flags,
        }))
    }

    fn apply(&self, table: &[u8], a: u8, b: u8) -> u8 {
        table[a as usize * self.size as usize + b as usize]
    }
}

/// Runtime handle to a semiring.
#[derive(Debug, Clone, PartialEq)]
pub enum Semiring {
    /// Two-valued truth: or / and.
    Bool,
    /// Counting: natural numbers with + and *.
    Nat,
    /// Cost: nonnegative reals with infinity, min and +. 0 of the semiring
    /// is infinity, 1 is 0.0; smaller cost is "larger" evidence.
    Tropical,
    /// Best confidence: [0,1] with max and *.
    Viterbi,
    /// Fuzzy truth: [0,1] with max and min.
    Fuzzy,
    /// [0,1] with max and the Łukasiewicz t-norm max(a+b-1, 0).
    Lukasiewicz,
    /// Accumulated doubt: [0,1] with min and truncated sum; 0 of the
    /// semiring is 1.0 (full doubt), 1 is 0.0 (no doubt).
    Doubt,
    /// Clearance levels 0 < T < S < C < P with max and min.
    Access,
    /// A provenance polynomial semiring; see [`PolyTag`] for the variants.
    Poly(PolyTag),
    /// A finite semiring loaded from tables.
    Table(Arc<TableSemiring>),
}

const NAMES: &[(&str, Semiring)] = &[
    ("bool", Semiring::Bool),
    ("nat", Semiring::Nat),
    ("tropical", Semiring::Tropical),
    ("viterbi", Semiring::Viterbi),
    ("fuzzy", Semiring::Fuzzy),
    ("lukasiewicz", Semiring::Lukasiewicz),
    ("doubt", Semiring::Doubt),
    ("access", Semiring::Access),
];

impl Semiring {
    /// Looks up a semiring by its canonical name.
    pub fn from_name(name: &str) -> Result<Semiring> {
        for (n, s) in NAMES {
            if *n == name {
                return Ok(s.clone());
            }
        }
        if let Some(tag) = PolyTag::from_name(name) {
            return Ok(Semiring::Poly(tag));
        }
        Err(Error::UnknownSemiring(name.to_string()))
    }

    /// All canonical names accepted by [`Semiring::from_name`].
    pub fn names() -> Vec<&'static str> {
        let mut out: Vec<&'static str> = NAMES.iter().map(|(n, _)| *n).collect();
        out.extend(PolyTag::ALL.iter().map(|t| t.name()));
        out
    }

    pub fn name(&self) -> String {
        match self {
            Semiring::Bool => "bool".into(),
            Semiring::Nat => "nat".into(),
            Semiring::Tropical => "tropical".into(),
            Semiring::Viterbi => "viterbi".into(),
            Semiring::Fuzzy => "fuzzy".into(),
            Semiring::Lukasiewicz => "lukasiewicz".into(),
            Semiring::Doubt => "doubt".into(),
            Semiring::Access => "access".into(),
            Semiring::Poly(tag) => tag.name().into(),
            Semiring::Table(t) => t.name.clone(),
        }
    }

    pub fn poly_tag(&self) -> Option<PolyTag> {
        match self {
            Semiring::Poly(tag) => Some(*tag),
            _ => None,
        }
    }

    pub fn zero(&self) -> Value {
        match self {
            Semiring::Bool => Value::Bool(false),
            Semiring::Nat => Value::Nat(BigUint::zero()),
            Semiring::Tropical => Value::Real(f64::INFINITY),
            Semiring::Viterbi | Semiring::Fuzzy | Semiring::Lukasiewicz => Value::Real(0.0),
            Semiring::Doubt => Value::Real(1.0),
            Semiring::Access => Value::Access(Access::Denied),
            Semiring::Poly(tag) => Value::Poly(Polynomial::zero(*tag)),
            Semiring::Table(t) => Value::Table(t.zero),
        }
    }

    pub fn one(&self) -> Value {
        match self {
            Semiring::Bool => Value::Bool(true),
            Semiring::Nat => Value::Nat(BigUint::one()),
            Semiring::Tropical => Value::Real(0.0),
            Semiring::Viterbi | Semiring::Fuzzy | Semiring::Lukasiewicz => Value::Real(1.0),
            Semiring::Doubt => Value::Real(0.0),
            Semiring::Access => Value::Access(Access::Public),
            Semiring::Poly(tag) => Value::Poly(Polynomial::one(*tag)),
            Semiring::Table(t) => Value::Table(t.one),
        }
    }

    pub fn flags(&self) -> Flags {
        let caps_off = Flags {
            plus_positive: true,
            zero_divisors: false,
            add_idempotent: false,
            mul_idempotent: false,
            absorptive: false,
            min_max: false,
            has_monus: false,
            has_goedel_implication: false,
            has_general_implication: false,
            has_natural_order: true,
        };
        match self {
            Semiring::Bool => Flags {
                add_idempotent: true,
                mul_idempotent: true,
                absorptive: true,
                min_max: true,
                has_monus: true,
                has_goedel_implication: true,
                has_general_implication: true,
                ..caps_off
            },
            Semiring::Nat => Flags {
                has_monus: true,
                ..caps_off
            },
            Semiring::Tropical => Flags {
                add_idempotent: true,
                absorptive: true,
                has_monus: true,
                has_general_implication: true,
                ..caps_off
            },
            Semiring::Viterbi => Flags {
                add_idempotent: true,
                absorptive: true,
                has_monus: true,
                ..caps_off
            },
            Semiring::Fuzzy => Flags {
                add_idempotent: true,
                mul_idempotent: true,
                absorptive: true,
                min_max: true,
                has_monus: true,
                has_goedel_implication: true,
                has_general_implication: true,
                ..caps_off
            },
            Semiring::Lukasiewicz => Flags {
                zero_divisors: true,
                add_idempotent: true,
                absorptive: true,
                has_monus: true,
                has_general_implication: true,
                ..caps_off
            },
            Semiring::Doubt => Flags {
                zero_divisors: true,
                add_idempotent: true,
                absorptive: true,
                ..caps_off
            },
            Semiring::Access => Flags {
                add_idempotent: true,
                mul_idempotent: true,
                absorptive: true,
                min_max: true,
                has_monus: true,
                has_goedel_implication: true,
                has_general_implication: true,
                ..caps_off
            },
            Semiring::Poly(tag) => Flags {
                zero_divisors: tag.dual(),
                add_idempotent: tag.drops_coefficients(),
                mul_idempotent: matches!(tag, PolyTag::PosBool | PolyTag::PosBoolDual),
                absorptive: tag.absorptive(),
                ..caps_off
            },
            Semiring::Table(t) => t.flags,
        }
    }

    fn unsupported(&self, op: &'static str) -> Error {
        Error::Unsupported {
            semiring: self.name(),
            op,
        }
    }

    fn carrier_err(&self, v: &Value, reason: &str) -> Error {
        Error::Carrier {
            semiring: self.name(),
            value: v.to_string(),
            reason: reason.to_string(),
        }
    }

    /// Checks that `v` belongs to this semiring's carrier.
    pub fn check_value(&self, v: &Value) -> Result<()> {
        match (self, v) {
            (Semiring::Bool, Value::Bool(_)) => Ok(()),
            (Semiring::Nat, Value::Nat(_)) => Ok(()),
            (Semiring::Tropical, Value::Real(x)) => {
                if x.is_nan() || *x < 0.0 {
                    Err(self.carrier_err(v, "costs are nonnegative reals or inf"))
                } else {
                    Ok(())
                }
            }
            (
                Semiring::Viterbi | Semiring::Fuzzy | Semiring::Lukasiewicz | Semiring::Doubt,
                Value::Real(x),
            ) => {
                if x.is_nan() || !(0.0..=1.0).contains(x) {
                    Err(self.carrier_err(v, "values live in the unit interval"))
                } else {
                    Ok(())
                }
            }
            (Semiring::Access, Value::Access(_)) => Ok(()),
            (Semiring::Poly(tag), Value::Poly(p)) => {
                if p.tag() == *tag {
                    Ok(())
                } else {
                    Err(Error::TagMismatch {
                        left: tag.name().into(),
                        right: p.tag().name().into(),
                    })
                }
            }
            (Semiring::Table(t), Value::Table(i)) => {
                if *i < t.size {
                    Ok(())
                } else {
                    Err(self.carrier_err(v, "index is outside the carrier"))
                }
            }
            _ => Err(self.carrier_err(v, "wrong carrier")),
        }
    }

    fn real(&self, v: &Value) -> Result<f64> {
        self.check_value(v)?;
        match v {
            Value::Real(x) => Ok(*x),
            _ => unreachable!(),
        }
    }

    pub fn add(&self, a: &Value, b: &Value) -> Result<Value> {
        self.check_value(a)?;
        self.check_value(b)?;
        Ok(match (self, a, b) {
            (Semiring::Bool, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x || *y),
            (Semiring::Nat, Value::Nat(x), Value::Nat(y)) => Value::Nat(x + y),
            (Semiring::Tropical | Semiring::Doubt, Value::Real(x), Value::Real(y)) => {
                Value::Real(x.min(*y))
            }
            (
                Semiring::Viterbi | Semiring::Fuzzy | Semiring::Lukasiewicz,
                Value::Real(x),
                Value::Real(y),
            ) => Value::Real(x.max(*y)),
            (Semiring::Access, Value::Access(x), Value::Access(y)) => Value::Access(*x.max(y)),
            (Semiring::Poly(_), Value::Poly(x), Value::Poly(y)) => Value::Poly(x.add(y)?),
            (Semiring::Table(t), Value::Table(x), Value::Table(y)) => {
                Value::Table(t.apply(&t.add, *x, *y))
            }
            _ => unreachable!(),
        })
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Result<Value> {
        self.check_value(a)?;
        self.check_value(b)?;
        Ok(match (self, a, b) {
            (Semiring::Bool, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x && *y),
            (Semiring::Nat, Value::Nat(x), Value::Nat(y)) => Value::Nat(x * y),
            (Semiring::Tropical, Value::Real(x), Value::Real(y)) => Value::Real(x + y),
            (Semiring::Viterbi, Value::Real(x), Value::Real(y)) => Value::Real(x * y),
            (Semiring::Fuzzy, Value::Real(x), Value::Real(y)) => Value::Real(x.min(*y)),
            (Semiring::Lukasiewicz, Value::Real(x), Value::Real(y)) => {
                Value::Real((x + y - 1.0).max(0.0))
            }
            (Semiring::Doubt, Value::Real(x), Value::Real(y)) => Value::Real((x + y).min(1.0)),
            (Semiring::Access, Value::Access(x), Value::Access(y)) => Value::Access(*x.min(y)),
            (Semiring::Poly(_), Value::Poly(x), Value::Poly(y)) => Value::Poly(x.mul(y)?),
            (Semiring::Table(t), Value::Table(x), Value::Table(y)) => {
                Value::Table(t.apply(&t.mul, *x, *y))
            }
            _ => unreachable!(),
        })
    }

    /// Semantic equality on the carrier; reals compare with tolerance.
    pub fn values_eq(&self, a: &Value, b: &Value) -> Result<bool> {
        self.check_value(a)?;
        self.check_value(b)?;
        Ok(match (a, b) {
            (Value::Real(x), Value::Real(y)) => {
                (x.is_infinite() && y.is_infinite()) || (x - y).abs() <= REAL_EPS
            }
            _ => a == b,
        })
    }

    pub fn is_zero(&self, a: &Value) -> Result<bool> {
        self.values_eq(a, &self.zero())
    }

    pub fn is_one(&self, a: &Value) -> Result<bool> {
        self.values_eq(a, &self.one())
    }

    /// Decides the natural order: a <= b iff a + r = b for some r.
    pub fn natural_leq(&self, a: &Value, b: &Value) -> Result<bool> {
        if !self.flags().has_natural_order {
            return Err(self.unsupported("the natural order"));
        }
        self.check_value(a)?;
        self.check_value(b)?;
        Ok(match (self, a, b) {
            (Semiring::Bool, Value::Bool(x), Value::Bool(y)) => !*x || *y,
            (Semiring::Nat, Value::Nat(x), Value::Nat(y)) => x <= y,
            // Adding cost evidence can only lower cost (min), so the natural
            // order on costs is the reverse of the numeric one. Same for
            // doubt, which also adds by min.
            (Semiring::Tropical | Semiring::Doubt, Value::Real(x), Value::Real(y)) => y <= x,
            (
                Semiring::Viterbi | Semiring::Fuzzy | Semiring::Lukasiewicz,
                Value::Real(x),
                Value::Real(y),
            ) => x <= y,
            (Semiring::Access, Value::Access(x), Value::Access(y)) => x <= y,
            (Semiring::Poly(_), Value::Poly(x), Value::Poly(y)) => x.natural_leq(y)?,
            _ => unreachable!(),
        })
    }

    /// Monus: the least c with a <= b + c, where it exists.
    pub fn monus(&self, a: &Value, b: &Value) -> Result<Value> {
        if !self.flags().has_monus {
            return Err(self.unsupported("monus"));
        }
        self.check_value(a)?;
        self.check_value(b)?;
        Ok(match (self, a, b) {
            (Semiring::Bool, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x && !*y),
            (Semiring::Nat, Value::Nat(x), Value::Nat(y)) => {
                Value::Nat(if x <= y { BigUint::zero() } else { x - y })
            }
            // On a totally ordered carrier whose addition is the order's
            // join, monus collapses to "bottom if a <= b, else a".
            _ => {
                if self.natural_leq(a, b)? {
                    self.zero()
                } else {
                    a.clone()
                }
            }
        })
    }

    /// Gödel implication on min-max semirings: 1 if a <= b, else b.
    pub fn goedel_implies(&self, a: &Value, b: &Value) -> Result<Value> {
        if !self.flags().has_goedel_implication {
            return Err(self.unsupported("Gödel implication"));
        }
        Ok(if self.natural_leq(a, b)? {
            self.one()
        } else {
            b.clone()
        })
    }

    /// Residual implication: the largest r with r * a <= b, on the semirings
    /// where that supremum exists and is computable.
    ///
    /// On min-max semirings this coincides with [`Semiring::goedel_implies`].
    /// On Łukasiewicz it is min(1 - a + b, 1). On the tropical semiring it
    /// is the extra cost still to pay: 0 if b is already within a, else
    /// b - a.
    pub fn general_implies(&self, a: &Value, b: &Value) -> Result<Value> {
        if !self.flags().has_general_implication {
            return Err(self.unsupported("general implication"));
        }
        match self {
            Semiring::Bool | Semiring::Fuzzy | Semiring::Access => self.goedel_implies(a, b),
            Semiring::Lukasiewicz => {
                let (x, y) = (self.real(a)?, self.real(b)?);
                Ok(Value::Real((1.0 - x + y).min(1.0)))
            }
            Semiring::Tropical => {
                let (x, y) = (self.real(a)?, self.real(b)?);
                Ok(if y <= x {
                    self.one()
                } else {
                    Value::Real(y - x)
                })
            }
            _ => unreachable!(),
        }
    }

    /// Flattening negation: 1 if a = 0, else 0.
    pub fn flatten_negate(&self, a: &Value) -> Result<Value> {
        Ok(if self.is_zero(a)? {
            self.one()
        } else {
            self.zero()
        })
    }

    /// n-fold sum of `v`, by doubling.
    pub fn nat_scale(&self, n: &BigUint, v: &Value) -> Result<Value> {
        self.check_value(v)?;
        let mut acc = self.zero();
        let mut pow = v.clone();
        for i in 0..n.bits() {
            if n.bit(i) {
                acc = self.add(&acc, &pow)?;
            }
            if i + 1 < n.bits() {
                pow = self.add(&pow, &pow)?;
            }
        }
        Ok(acc)
    }

    /// Parses a carrier element from text.
    pub fn parse_value(&self, text: &str) -> Result<Value> {
        let text = text.trim();
        let syntax = |msg: String| Error::Syntax {
            line: 1,
            col: 1,
            msg,
        };
        let v = match self {
            Semiring::Bool => match text {
                "0" | "false" => Value::Bool(false),
                "1" | "true" => Value::Bool(true),
                _ => return Err(syntax(format!("expected a truth value, got `{text}`"))),
            },
            Semiring::Nat => Value::Nat(
                text.parse::<BigUint>()
                    .map_err(|_| syntax(format!("expected a natural number, got `{text}`")))?,
            ),
            Semiring::Tropical
            | Semiring::Viterbi
            | Semiring::Fuzzy
            | Semiring::Lukasiewicz
            | Semiring::Doubt => {
                let x = if text == "inf" || text == "infinity" {
                    f64::INFINITY
                } else {
                    text.parse::<f64>()
                        .map_err(|_| syntax(format!("expected a real number, got `{text}`")))?
                };
                Value::Real(x)
            }
            Semiring::Access => Value::Access(
                Access::from_symbol(text)
                    .ok_or_else(|| syntax(format!("expected one of 0 T S C P, got `{text}`")))?,
            ),
            Semiring::Poly(tag) => Value::Poly(poly::parse(*tag, text)?),
            Semiring::Table(_) => Value::Table(
                text.parse::<u8>()
                    .map_err(|_| syntax(format!("expected a carrier index, got `{text}`")))?,
            ),
        };
        self.check_value(&v)?;
        Ok(v)
    }

    /// Spot-checks the declared structural flags against samples.
    pub fn check_flags(&self, samples: &[Value]) -> Result<FlagReport> {
        for v in samples {
            self.check_value(v)?;
        }
        let flags = self.flags();
        let mut plus_positive = true;
        let mut zero_divisors = false;
        let mut add_idempotent = true;
        let mut mul_idempotent = true;
        let mut absorptive = true;
        for a in samples {
            add_idempotent &= self.values_eq(&self.add(a, a)?, a)?;
            mul_idempotent &= self.values_eq(&self.mul(a, a)?, a)?;
            for b in samples {
                let sum = self.add(a, b)?;
                if self.is_zero(&sum)? && !(self.is_zero(a)? && self.is_zero(b)?) {
                    plus_positive = false;
                }
                let prod = self.mul(a, b)?;
                if self.is_zero(&prod)? && !self.is_zero(a)? && !self.is_zero(b)? {
                    zero_divisors = true;
                }
                absorptive &= self.values_eq(&self.add(a, &prod)?, a)?;
            }
        }
        let entries = vec![
            // (name, declared, observed on samples, universally quantified)
            FlagCheck::new("plus-positive", flags.plus_positive, plus_positive, true),
            FlagCheck::new("zero-divisors", flags.zero_divisors, zero_divisors, false),
            FlagCheck::new("add-idempotent", flags.add_idempotent, add_idempotent, true),
            FlagCheck::new("mul-idempotent", flags.mul_idempotent, mul_idempotent, true),
            FlagCheck::new("absorptive", flags.absorptive, absorptive, true),
        ];
        Ok(FlagReport { entries })
    }
}

/// Outcome of checking one structural flag on samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagCheck {
    pub name: &'static str,
    pub declared: bool,
    /// Whether the property held over the samples.
    pub observed: bool,
    /// Universal properties can be falsified by samples; existential ones
    /// (zero divisors) can only be witnessed.
    universal: bool,
}

impl FlagCheck {
    fn new(name: &'static str, declared: bool, observed: bool, universal: bool) -> FlagCheck {
        FlagCheck {
            name,
            declared,
            observed,
            universal,
        }
    }

    /// True unless the samples contradict the declaration.
    pub fn consistent(&self) -> bool {
        if self.universal {
            // declared => must hold on every sample
            !self.declared || self.observed
        } else {
            // not declared => no witness may exist among the samples
            self.declared || !self.observed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagReport {
    pub entries: Vec<FlagCheck>,
}

impl FlagReport {
    pub fn consistent(&self) -> bool {
        self.entries.iter().all(|e| e.consistent())
    }

    pub fn observed(&self, name: &str) -> Option<bool> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.observed)
    }
}

impl fmt::Display for FlagReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", e.name, if e.observed { "pass" } else { "fail" })?;
        }
        Ok(())
    }
}
