//! Affine forms `c + sum c_s * s` over named free parameters, with exact
//! coefficients. Deformation solves stay symbolic in the free parameters by
//! computing over these forms; a run with every parameter bound degenerates
//! to plain numbers.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::Error;
use crate::qfield::QuadNum;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    terms: BTreeMap<String, QuadNum>,
    constant: QuadNum,
}

impl Affine {
    pub fn zero() -> Self {
        Affine {
            terms: BTreeMap::new(),
            constant: QuadNum::zero(),
        }
    }

    pub fn constant(c: QuadNum) -> Self {
        Affine {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.into(), QuadNum::int(1));
        Affine {
            terms,
            constant: QuadNum::zero(),
        }
    }

    pub fn constant_part(&self) -> &QuadNum {
        &self.constant
    }

    pub fn coeff(&self, name: &str) -> QuadNum {
        self.terms.get(name).cloned().unwrap_or_else(QuadNum::zero)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(|s| s.as_str())
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<&QuadNum> {
        self.is_constant().then_some(&self.constant)
    }

    fn set(&mut self, name: &str, value: QuadNum) {
        if value.is_zero() {
            self.terms.remove(name);
        } else {
            self.terms.insert(name.to_string(), value);
        }
    }

    pub fn add(&self, rhs: &Affine) -> Affine {
        let mut out = self.clone();
        out.constant = &out.constant + &rhs.constant;
        for (name, c) in &rhs.terms {
            let cur = out.coeff(name);
            out.set(name, &cur + c);
        }
        out
    }

    pub fn neg(&self) -> Affine {
        let mut out = Affine::constant(-&self.constant);
        for (name, c) in &self.terms {
            out.set(name, -c);
        }
        out
    }

    pub fn sub(&self, rhs: &Affine) -> Affine {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, k: &QuadNum) -> Affine {
        if k.is_zero() {
            return Affine::zero();
        }
        let mut out = Affine::constant(&self.constant * k);
        for (name, c) in &self.terms {
            out.set(name, c * k);
        }
        out
    }

    /// Bind some symbols to exact values.
    pub fn substitute(&self, values: &BTreeMap<String, QuadNum>) -> Affine {
        let mut out = Affine::constant(self.constant.clone());
        for (name, c) in &self.terms {
            match values.get(name) {
                Some(v) => out.constant = &out.constant + &(c * v),
                None => out.set(name, c.clone()),
            }
        }
        out
    }

    /// The exact value, or an error naming the first unbound symbol.
    pub fn value(&self) -> Result<QuadNum, Error> {
        match self.terms.keys().next() {
            None => Ok(self.constant.clone()),
            Some(sym) => Err(Error::Precondition {
                check: "numeric evaluation".into(),
                message: format!("free parameter {sym} is unbound"),
            }),
        }
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "{}", self.constant);
        }
        let mut first = true;
        if !self.constant.is_zero() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (name, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{c}*{name}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_substitution() {
        let y5 = Affine::symbol("y5");
        let two = QuadNum::int(2);
        let e = y5.scale(&two).add(&Affine::constant(QuadNum::int(-3)));
        assert_eq!(e.coeff("y5"), two);
        assert_eq!(*e.constant_part(), QuadNum::int(-3));
        let mut vals = BTreeMap::new();
        vals.insert("y5".to_string(), QuadNum::int(4));
        assert_eq!(e.substitute(&vals).value().unwrap(), QuadNum::int(5));
        assert!(e.value().is_err());
        assert!(e.sub(&e).is_zero());
    }

    #[test]
    fn display_is_deterministic() {
        let e = Affine::symbol("y6")
            .add(&Affine::symbol("y5"))
            .add(&Affine::constant(QuadNum::new(21, 0, 2, 1)));
        assert_eq!(e.to_string(), "2*r + y5 + y6");
    }
}
