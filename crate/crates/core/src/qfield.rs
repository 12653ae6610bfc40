//! Exact arithmetic in a real quadratic field Q(sqrt(d)).
//!
//! A [`QuadNum`] is `(p + q*sqrt(d)) / den` with arbitrary-precision integer
//! parts, kept in canonical form (`den > 0`, `gcd(p, q, den) = 1`). Purely
//! rational values are tagged with `d = 0` so they combine with any field;
//! mixing two distinct nonzero discriminants is a hard error.
//!
//! [`SeriesQN`] is a Laurent polynomial / truncated series in one formal
//! parameter with `QuadNum` coefficients, used for symbolic rescaling limits.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// An element (p + q*sqrt(d))/den of Q(sqrt(d)), exact and canonical.
///
/// `d = 0` marks a rational value; canonicalization clears `d` whenever
/// `q = 0`, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    d: u32,
    p: BigInt,
    q: BigInt,
    den: BigInt,
}

fn combine_disc(a: u32, b: u32) -> u32 {
    match (a, b) {
        (0, d) | (d, 0) => d,
        (x, y) if x == y => x,
        (x, y) => panic!("mixed quadratic field discriminants: {x} vs {y}"),
    }
}

impl QuadNum {
    pub fn new(d: u32, p: impl Into<BigInt>, q: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let mut v = QuadNum {
            d,
            p: p.into(),
            q: q.into(),
            den: den.into(),
        };
        v.canonicalize();
        v
    }

    /// A rational integer.
    pub fn int(n: impl Into<BigInt>) -> Self {
        QuadNum::new(0, n, 0, 1)
    }

    /// The rational p/den.
    pub fn rational(p: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        QuadNum::new(0, p, 0, den)
    }

    /// q * sqrt(d).
    pub fn sqrt_multiple(d: u32, q: impl Into<BigInt>) -> Self {
        QuadNum::new(d, 0, q, 1)
    }

    fn canonicalize(&mut self) {
        assert!(!self.den.is_zero(), "zero denominator");
        if self.den.is_negative() {
            self.p = -std::mem::take(&mut self.p);
            self.q = -std::mem::take(&mut self.q);
            self.den = -std::mem::take(&mut self.den);
        }
        let g = self.p.gcd(&self.q).gcd(&self.den);
        if !g.is_one() && !g.is_zero() {
            self.p = &self.p / &g;
            self.q = &self.q / &g;
            self.den = &self.den / &g;
        }
        if self.q.is_zero() {
            self.d = 0;
        }
    }

    pub fn disc(&self) -> u32 {
        self.d
    }

    pub fn numer_rat(&self) -> &BigInt {
        &self.p
    }

    pub fn numer_irr(&self) -> &BigInt {
        &self.q
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.q.is_zero() && self.p == self.den
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// Galois conjugate, sqrt(d) -> -sqrt(d).
    pub fn conjugate(&self) -> Self {
        QuadNum::new(self.d, self.p.clone(), -&self.q, self.den.clone())
    }

    /// Field norm p^2 - d q^2 over den^2, a rational.
    pub fn norm(&self) -> Self {
        let num = &self.p * &self.p - BigInt::from(self.d) * &self.q * &self.q;
        QuadNum::new(0, num, 0, &self.den * &self.den)
    }

    /// Exact sign of the real embedding with sqrt(d) > 0.
    ///
    /// Integer comparisons only: when p and q disagree in sign the comparison
    /// of p^2 against d q^2 decides (they can never tie, since sqrt(d) is
    /// irrational for squarefree d >= 2).
    pub fn signum(&self) -> i8 {
        let sp = bigint_sign(&self.p);
        let sq = bigint_sign(&self.q);
        match (sp, sq) {
            (0, 0) => 0,
            (s, 0) | (0, s) => s,
            (a, b) if a == b => a,
            _ => {
                let p2 = &self.p * &self.p;
                let dq2 = BigInt::from(self.d) * &self.q * &self.q;
                debug_assert_ne!(p2, dq2, "sqrt({}) rational? non-squarefree d", self.d);
                if p2 > dq2 {
                    sp
                } else {
                    sq
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // 1 / ((p + q r)/den) = den (p - q r) / (p^2 - d q^2)
        let nrm = &self.p * &self.p - BigInt::from(self.d) * &self.q * &self.q;
        Ok(QuadNum::new(
            self.d,
            &self.den * &self.p,
            &self.den * -&self.q,
            nrm,
        ))
    }

    pub fn try_div(&self, rhs: &QuadNum) -> Result<Self, Error> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: i32) -> Result<Self, Error> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = QuadNum::int(1);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn scale_int(&self, k: impl Into<BigInt>) -> Self {
        let k = k.into();
        QuadNum::new(self.d, &self.p * &k, &self.q * &k, self.den.clone())
    }

    /// Parse against the textual grammar: `5`, `-7/2`, `3*r`, `(p+q*r)/den`.
    pub fn parse(s: &str, d: u32) -> Result<Self, Error> {
        parse_quadnum(s, d)
    }
}

fn bigint_sign(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_negative() {
        -1
    } else {
        1
    }
}

impl Zero for QuadNum {
    fn zero() -> Self {
        QuadNum::int(0)
    }
    fn is_zero(&self) -> bool {
        QuadNum::is_zero(self)
    }
}

impl One for QuadNum {
    fn one() -> Self {
        QuadNum::int(1)
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::new(self.d, -&self.p, -&self.q, self.den.clone())
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        -&self
    }
}

impl Add for &QuadNum {
    type Output = QuadNum;
    fn add(self, rhs: &QuadNum) -> QuadNum {
        let d = combine_disc(self.d, rhs.d);
        QuadNum::new(
            d,
            &self.p * &rhs.den + &rhs.p * &self.den,
            &self.q * &rhs.den + &rhs.q * &self.den,
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &QuadNum {
    type Output = QuadNum;
    fn sub(self, rhs: &QuadNum) -> QuadNum {
        self + &(-rhs)
    }
}

impl Mul for &QuadNum {
    type Output = QuadNum;
    fn mul(self, rhs: &QuadNum) -> QuadNum {
        let d = combine_disc(self.d, rhs.d);
        let big_d = BigInt::from(d);
        QuadNum::new(
            d,
            &self.p * &rhs.p + &big_d * &self.q * &rhs.q,
            &self.p * &rhs.q + &self.q * &rhs.p,
            &self.den * &rhs.den,
        )
    }
}

/// Panics on division by zero; use [`QuadNum::try_div`] on unchecked input.
impl Div for &QuadNum {
    type Output = QuadNum;
    fn div(self, rhs: &QuadNum) -> QuadNum {
        self.try_div(rhs).expect("division by zero")
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for QuadNum {
            type Output = QuadNum;
            fn $f(self, rhs: QuadNum) -> QuadNum {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $f(self, rhs: &QuadNum) -> QuadNum {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            if self.den.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.den)
            }
        } else if self.p.is_zero() && self.den.is_one() {
            write!(f, "{}*r", self.q)
        } else {
            let qs = if self.q.is_negative() {
                format!("-{}", self.q.magnitude())
            } else {
                format!("+{}", self.q)
            };
            if self.den.is_one() {
                write!(f, "({}{}*r)", self.p, qs)
            } else {
                write!(f, "({}{}*r)/{}", self.p, qs, self.den)
            }
        }
    }
}

fn parse_quadnum(s: &str, d: u32) -> Result<QuadNum, Error> {
    let bad = |why: &str| Error::BadLiteral {
        literal: s.to_string(),
        reason: why.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(bad("empty literal"));
    }
    let (head, den) = match t.rsplit_once('/') {
        // A '/' inside parentheses would split wrong; the grammar only allows
        // a trailing denominator, so check the head is balanced.
        Some((h, dn)) if h.matches('(').count() == h.matches(')').count() => {
            let den: BigInt = dn
                .trim()
                .parse()
                .map_err(|_| bad("denominator is not an integer"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            (h.trim(), den)
        }
        _ => (t, BigInt::one()),
    };
    let inner = if head.starts_with('(') && head.ends_with(')') {
        &head[1..head.len() - 1]
    } else {
        head
    };
    // inner is now `p`, `q*r`, or `p±q*r`.
    let mut p = BigInt::zero();
    let mut q = BigInt::zero();
    for term in split_signed_terms(inner).ok_or_else(|| bad("malformed sign structure"))? {
        let term = term.trim();
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        if let Some(coeff) = term.strip_suffix("*r").or_else(|| term.strip_suffix("r")) {
            let coeff = coeff.trim_end_matches('*').trim();
            let c: BigInt = if coeff.is_empty() || coeff == "+" {
                BigInt::one()
            } else if coeff == "-" {
                -BigInt::one()
            } else {
                coeff.parse().map_err(|_| bad("bad sqrt coefficient"))?
            };
            q += c;
        } else {
            let c: BigInt = term.parse().map_err(|_| bad("bad integer term"))?;
            p += c;
        }
    }
    if !q.is_zero() && d == 0 {
        return Err(bad("sqrt term present but no field discriminant in scope"));
    }
    Ok(QuadNum::new(if q.is_zero() { 0 } else { d }, p, q, den))
}

/// Split "a+b-c" into signed terms ["a", "+b", "-c"], keeping leading signs.
fn split_signed_terms(s: &str) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            out.push(std::mem::take(&mut cur));
            cur.push(ch);
        } else {
            cur.push(ch);
        }
    }
    if cur.is_empty() && out.is_empty() {
        return None;
    }
    out.push(cur);
    Some(out)
}

/// Laurent polynomial / truncated series in one formal parameter.
///
/// `hi = None` means the value is exact; `hi = Some(h)` means coefficients
/// above degree `h` are unknown and arithmetic truncates there. Low-degree
/// terms are never dropped, so poles at 0 stay visible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesQN {
    coeffs: BTreeMap<i64, QuadNum>,
    hi: Option<i64>,
}

impl SeriesQN {
    pub fn zero() -> Self {
        SeriesQN {
            coeffs: BTreeMap::new(),
            hi: None,
        }
    }

    pub fn constant(c: QuadNum) -> Self {
        SeriesQN::monomial(0, c)
    }

    pub fn monomial(exp: i64, c: QuadNum) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        SeriesQN { coeffs, hi: None }
    }

    pub fn truncated(mut self, hi: i64) -> Self {
        self.coeffs.retain(|&e, _| e <= hi);
        self.hi = Some(match self.hi {
            Some(h) => h.min(hi),
            None => hi,
        });
        self
    }

    /// Lowest tracked exponent, if any coefficient is present.
    pub fn lo(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn hi(&self) -> Option<i64> {
        self.hi
    }

    pub fn coeff(&self, exp: i64) -> QuadNum {
        self.coeffs.get(&exp).cloned().unwrap_or_else(QuadNum::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn insert(&mut self, exp: i64, c: QuadNum) {
        if let Some(h) = self.hi {
            if exp > h {
                return;
            }
        }
        if c.is_zero() {
            return;
        }
        self.coeffs.insert(exp, c);
    }

    /// Exponent of the first unknown coefficient (None = exact).
    fn err_order(&self) -> Option<i64> {
        self.hi.map(|h| h + 1)
    }

    pub fn add(&self, rhs: &SeriesQN) -> SeriesQN {
        let hi = min_opt(self.err_order(), rhs.err_order()).map(|e| e - 1);
        let mut out = SeriesQN {
            coeffs: BTreeMap::new(),
            hi,
        };
        for (&e, c) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            let cur = out.coeff(e);
            let sum = &cur + c;
            out.coeffs.remove(&e);
            out.insert(e, sum);
        }
        out
    }

    pub fn neg(&self) -> SeriesQN {
        SeriesQN {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
            hi: self.hi,
        }
    }

    pub fn sub(&self, rhs: &SeriesQN) -> SeriesQN {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &SeriesQN) -> SeriesQN {
        // The product is exact up to the first exponent where an unknown
        // coefficient of one factor can interact with the other's lowest term.
        let e1 = self.err_order().map(|e| e + rhs.lo().unwrap_or(0));
        let e2 = rhs.err_order().map(|e| e + self.lo().unwrap_or(0));
        let hi = min_opt(e1, e2).map(|e| e - 1);
        let mut out = SeriesQN {
            coeffs: BTreeMap::new(),
            hi,
        };
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &rhs.coeffs {
                let e = ea + eb;
                if let Some(h) = hi {
                    if e > h {
                        continue;
                    }
                }
                let cur = out.coeff(e);
                let sum = &cur + &(ca * cb);
                out.coeffs.remove(&e);
                out.insert(e, sum);
            }
        }
        out
    }

    pub fn scale(&self, c: &QuadNum) -> SeriesQN {
        let mut out = SeriesQN {
            coeffs: BTreeMap::new(),
            hi: self.hi,
        };
        for (&e, v) in &self.coeffs {
            out.insert(e, v * c);
        }
        out
    }

    /// Value at parameter -> 0: the degree-0 coefficient, provided no
    /// negative-exponent coefficient survives.
    pub fn limit0(&self) -> Result<QuadNum, Error> {
        if let Some((&e, c)) = self.coeffs.iter().next() {
            if e < 0 && !c.is_zero() {
                return Err(Error::PoleAtZero {
                    exponent: e,
                    coefficient: c.to_string(),
                });
            }
        }
        Ok(self.coeff(0))
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl fmt::Display for SeriesQN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{e}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qn(p: i64, q: i64, den: i64) -> QuadNum {
        QuadNum::new(21, p, q, den)
    }

    #[test]
    fn lambda_norm_is_one() {
        // (5+r)/2 * (5-r)/2 = (25-21)/4 = 1
        let l = qn(5, 1, 2);
        let li = qn(5, -1, 2);
        assert!((&l * &li).is_one());
        assert_eq!(l.inv().unwrap(), li);
    }

    #[test]
    fn additive_identity() {
        let x = qn(-3, 1, 2);
        assert_eq!(&x + &QuadNum::zero(), x);
    }

    #[test]
    fn square_of_a1() {
        // ((3+r)/2)^2 = (30+6r)/4 = (15+3r)/2
        let a1 = qn(3, 1, 2);
        assert_eq!(&a1 * &a1, qn(15, 3, 2));
    }

    #[test]
    fn signs() {
        assert_eq!((&qn(5, 1, 2) - &QuadNum::int(1)).signum(), 1);
        assert_eq!(QuadNum::zero().signum(), 0);
        assert_eq!(qn(3, -1, 1).signum(), -1); // 3 - sqrt(21) < 0
        assert_eq!(qn(-3, 1, 1).signum(), 1);
        assert_eq!(qn(5, -1, 1).signum(), 1); // 25 > 21
        assert_eq!(qn(-5, 1, 1).signum(), -1);
    }

    #[test]
    fn mixed_rational_ops() {
        let x = qn(1, 1, 3);
        let two = QuadNum::rational(2, 1);
        assert_eq!(&x * &two, qn(2, 2, 3));
        assert_eq!((&x - &x).signum(), 0);
    }

    #[test]
    #[should_panic(expected = "mixed quadratic field discriminants")]
    fn mixing_discriminants_panics() {
        let a = QuadNum::new(21, 0, 1, 1);
        let b = QuadNum::new(5, 0, 1, 1);
        let _ = &a + &b;
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let x = qn(1, 1, 1);
        assert!(matches!(
            x.try_div(&QuadNum::zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn parse_roundtrip() {
        for s in [
            "0",
            "5",
            "-7",
            "7/2",
            "-4*r",
            "(3+1*r)/2",
            "(-3+1*r)/2",
            "(-3-2*r)/5",
            "(0+1*r)/3",
        ] {
            let v = QuadNum::parse(s, 21).unwrap();
            let v2 = QuadNum::parse(&v.to_string(), 21).unwrap();
            assert_eq!(v, v2, "roundtrip failed for {s}");
        }
        assert_eq!(QuadNum::parse("(5+1*r)/2", 21).unwrap(), qn(5, 1, 2));
        assert_eq!(QuadNum::parse("1*r", 21).unwrap(), qn(0, 1, 1));
        assert!(QuadNum::parse("abc", 21).is_err());
        assert!(QuadNum::parse("1/0", 21).is_err());
    }

    #[test]
    fn series_basic_products() {
        let one = SeriesQN::constant(QuadNum::int(1));
        let s = SeriesQN::monomial(1, QuadNum::int(1));
        let sinv = SeriesQN::monomial(-1, QuadNum::int(1));
        // (1+s)(1-s) truncated at 2 -> 1 - s^2
        let a = one.add(&s).truncated(2);
        let b = one.sub(&s).truncated(2);
        let p = a.mul(&b);
        assert_eq!(p.coeff(0), QuadNum::int(1));
        assert_eq!(p.coeff(1), QuadNum::zero());
        assert_eq!(p.coeff(2), QuadNum::int(-1));
        // s^-1 * s = 1
        let q = sinv.mul(&s);
        assert!(q.limit0().unwrap().is_one());
    }

    #[test]
    fn series_limits() {
        let a = SeriesQN::constant(QuadNum::int(2)).add(&SeriesQN::monomial(1, QuadNum::int(3)));
        assert_eq!(a.limit0().unwrap(), QuadNum::int(2));
        let pole = SeriesQN::monomial(-1, QuadNum::int(1));
        assert!(matches!(pole.limit0(), Err(Error::PoleAtZero { .. })));
        // (1/2)(s + s^-1) * a * s has limit a/2
        let half = QuadNum::rational(1, 2);
        let resc = SeriesQN::monomial(1, half.clone()).add(&SeriesQN::monomial(-1, half));
        let a = QuadNum::new(21, 3, 1, 2);
        let prod = resc
            .scale(&a)
            .mul(&SeriesQN::monomial(1, QuadNum::int(1)));
        assert_eq!(
            prod.limit0().unwrap(),
            &QuadNum::new(21, 3, 1, 2) * &QuadNum::rational(1, 2)
        );
    }

    #[test]
    fn monomial_product_window() {
        // (w t)(m t) truncated at 2 -> w m t^2
        let w = qn(0, 2, 1);
        let m = qn(1, 0, 2);
        let a = SeriesQN::monomial(1, w.clone()).truncated(2);
        let b = SeriesQN::monomial(1, m.clone()).truncated(2);
        assert_eq!(a.mul(&b).coeff(2), &w * &m);
    }
}
