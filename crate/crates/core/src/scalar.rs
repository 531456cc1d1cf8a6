//! Exact scalars: arbitrary-precision rationals extended multiplicatively by
//! a finite set of named nilpotent formal parameters.
//!
//! A [`Scalar`] is a finite sum `sum_m  c_m * m` where each `c_m` is a reduced
//! `BigRational` and `m` is a monomial in nilpotent parameters.  Every
//! parameter carries a truncation order `W`: any monomial containing the
//! parameter with exponent `> W` is dropped (ideal quotient semantics,
//! `w^{W+1} = 0`).  No floating point anywhere.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rat = BigRational;

/// A nilpotent formal parameter: `name^(order+1) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub name: String,
    pub order: u32,
}

impl Param {
    pub fn new(name: impl Into<String>, order: u32) -> Self {
        Param { name: name.into(), order }
    }
}

/// A monomial in nilpotent parameters, canonically sorted by parameter name.
///
/// Invariant: factors sorted by name, no duplicate names, all exponents
/// `>= 1` and `<= order` of the corresponding parameter.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ParamMono(Vec<(Param, u32)>);

impl ParamMono {
    pub fn unit() -> Self {
        ParamMono(Vec::new())
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Param, u32)] {
        &self.0
    }

    /// Single parameter to the given power; `None` if truncated away.
    pub fn single(param: &Param, exp: u32) -> Option<Self> {
        if exp == 0 {
            return Some(ParamMono::unit());
        }
        if exp > param.order {
            return None;
        }
        Some(ParamMono(vec![(param.clone(), exp)]))
    }

    /// Product of two monomials; `None` if any exponent exceeds its order.
    pub fn mul(&self, other: &ParamMono) -> Option<Self> {
        let mut out: Vec<(Param, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e > self.0[i].0.order {
                        return None;
                    }
                    out.push((self.0[i].0.clone(), e));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Some(ParamMono(out))
    }
}

/// Exact scalar: rational plus nilpotent-parameter corrections.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Scalar {
    /// Monomial -> nonzero reduced rational coefficient.
    terms: BTreeMap<ParamMono, Rat>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Scalar::from_rat(Rat::one())
    }

    pub fn from_rat(r: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(ParamMono::unit(), r);
        }
        Scalar { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rat(Rat::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::from_rat(Rat::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The formal parameter itself as a scalar (coefficient 1).
    pub fn param(p: &Param) -> Self {
        let mut terms = BTreeMap::new();
        if let Some(m) = ParamMono::single(p, 1) {
            terms.insert(m, Rat::one());
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&ParamMono::unit())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    /// True if no nilpotent parameters appear.
    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|m| m.is_unit())
    }

    /// The coefficient of the empty parameter monomial.
    pub fn constant_part(&self) -> Rat {
        self.terms.get(&ParamMono::unit()).cloned().unwrap_or_else(Rat::zero)
    }

    /// Rational value, if purely rational.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.constant_part())
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamMono, &Rat)> {
        self.terms.iter()
    }

    fn insert(&mut self, m: ParamMono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some(m) = m1.mul(m2) {
                    out.insert(m, c1 * c2);
                }
            }
        }
        out
    }

    pub fn mul_rat(&self, r: &Rat) -> Scalar {
        if r.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    /// Multiplicative inverse.  Defined iff the constant part is nonzero;
    /// the nilpotent correction is inverted by a finite geometric series.
    pub fn inverse(&self) -> Option<Scalar> {
        let c0 = self.constant_part();
        if c0.is_zero() {
            return None;
        }
        let c0_inv = Rat::one() / c0;
        // self = c0 (1 + eps) with eps nilpotent
        let eps = self.mul_rat(&c0_inv).sub(&Scalar::one());
        let mut inv = Scalar::one();
        let mut power = Scalar::one();
        let mut sign = true;
        loop {
            power = power.mul(&eps);
            if power.is_zero() {
                break;
            }
            sign = !sign;
            inv = if sign { inv.add(&power) } else { inv.sub(&power) };
        }
        Some(inv.mul_rat(&c0_inv))
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().ok()?;
        let den: BigInt = d.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Rat::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(num))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            let c = if first { c.clone() } else { c.abs() };
            first = false;
            write!(f, "{}", fmt_rat(&c))?;
            for (p, e) in m.factors() {
                if *e == 1 {
                    write!(f, "*{}", p.name)?;
                } else {
                    write!(f, "*{}^{}", p.name, e)?;
                }
            }
        }
        Ok(())
    }
}

// JSON form: a pure rational serializes as the string "p/q" (lowest terms);
// anything else as a list of {"num": "p/q", "param_monomial": [[name, order, exp], ...]}.
impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if let Some(r) = self.as_rat() {
            return ser.serialize_str(&fmt_rat(&r));
        }
        #[derive(Serialize)]
        struct Term {
            num: String,
            param_monomial: Vec<(String, u32, u32)>,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(m, c)| Term {
                num: fmt_rat(c),
                param_monomial: m
                    .factors()
                    .iter()
                    .map(|(p, e)| (p.name.clone(), p.order, *e))
                    .collect(),
            })
            .collect();
        terms.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Rational(String),
            Terms(Vec<TermRepr>),
        }
        #[derive(Deserialize)]
        struct TermRepr {
            num: String,
            param_monomial: Vec<(String, u32, u32)>,
        }
        match Repr::deserialize(de)? {
            Repr::Rational(s) => {
                let r = parse_rat(&s).ok_or_else(|| D::Error::custom(format!("bad rational: {s}")))?;
                Ok(Scalar::from_rat(r))
            }
            Repr::Terms(ts) => {
                let mut out = Scalar::zero();
                for t in ts {
                    let c = parse_rat(&t.num)
                        .ok_or_else(|| D::Error::custom(format!("bad rational: {}", t.num)))?;
                    let mut mono = ParamMono::unit();
                    for (name, order, exp) in t.param_monomial {
                        let p = Param::new(name, order);
                        let m = ParamMono::single(&p, exp)
                            .ok_or_else(|| D::Error::custom("exponent above truncation order"))?;
                        mono = mono
                            .mul(&m)
                            .ok_or_else(|| D::Error::custom("exponent above truncation order"))?;
                    }
                    out.insert(mono, c);
                }
                Ok(out)
            }
        }
    }
}

/// Parse "p/q" or "p" into a pure rational scalar.
pub fn scalar_from_str(s: &str) -> Option<Scalar> {
    parse_rat(s).map(Scalar::from_rat)
}
