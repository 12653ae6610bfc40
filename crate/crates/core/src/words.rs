//! Freely reduced words over the generator alphabet {a_i, b_i, d_j, t}.
//!
//! Token grammar for files and reports: whitespace-separated `a<i>`, `b<i>`,
//! `d<j>`, `t`, with a trailing apostrophe marking an inverse, e.g.
//! `a1 b1' d1'`.

use std::fmt;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenClass {
    Alpha,
    Beta,
    Delta,
    Tau,
}

/// One generator of the presentation. Indices are 1-based; `Tau` always has
/// index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen {
    pub class: GenClass,
    pub index: u32,
}

impl Gen {
    pub fn alpha(i: u32) -> Self {
        Gen {
            class: GenClass::Alpha,
            index: i,
        }
    }
    pub fn beta(i: u32) -> Self {
        Gen {
            class: GenClass::Beta,
            index: i,
        }
    }
    pub fn delta(j: u32) -> Self {
        Gen {
            class: GenClass::Delta,
            index: j,
        }
    }
    pub fn tau() -> Self {
        Gen {
            class: GenClass::Tau,
            index: 1,
        }
    }

    /// Position in the ordered basis (a_1..a_g, b_1..b_g, d_1..d_n, t).
    pub fn slot(&self, g: usize, n: usize) -> usize {
        let i = self.index as usize - 1;
        match self.class {
            GenClass::Alpha => i,
            GenClass::Beta => g + i,
            GenClass::Delta => 2 * g + i,
            GenClass::Tau => 2 * g + n,
        }
    }

    /// Inverse of `slot` over the surface generators only.
    pub fn from_slot(slot: usize, g: usize, n: usize) -> Gen {
        if slot < g {
            Gen::alpha(slot as u32 + 1)
        } else if slot < 2 * g {
            Gen::beta((slot - g) as u32 + 1)
        } else if slot < 2 * g + n {
            Gen::delta((slot - 2 * g) as u32 + 1)
        } else {
            Gen::tau()
        }
    }

    pub fn in_range(&self, g: usize, n: usize) -> bool {
        let i = self.index as usize;
        match self.class {
            GenClass::Alpha | GenClass::Beta => (1..=g).contains(&i),
            GenClass::Delta => (1..=n).contains(&i),
            GenClass::Tau => i == 1,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            GenClass::Alpha => write!(f, "a{}", self.index),
            GenClass::Beta => write!(f, "b{}", self.index),
            GenClass::Delta => write!(f, "d{}", self.index),
            GenClass::Tau => write!(f, "t"),
        }
    }
}

/// A single signed letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: Gen) -> Self {
        Letter { gen, inv: false }
    }
    pub fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }
    pub fn exp(&self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }
    fn cancels(&self, other: &Letter) -> bool {
        self.gen == other.gen && self.inv != other.inv
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.gen, if self.inv { "'" } else { "" })
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn gen(g: Gen) -> Self {
        Word {
            letters: vec![Letter::new(g)],
        }
    }

    /// Free reduction of an arbitrary letter sequence. Idempotent.
    pub fn reduce(raw: impl IntoIterator<Item = Letter>) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in raw {
            match stack.last() {
                Some(top) if top.cancels(&l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        Word { letters: stack }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Letter order reversed, exponents kept.
    pub fn reversed(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    /// Reduced product self * rhs, or self * rhs^-1.
    pub fn concat_inv(&self, rhs: &Word, invert_rhs: bool) -> Word {
        let rhs = if invert_rhs {
            rhs.inverse()
        } else {
            rhs.clone()
        };
        Word::reduce(self.letters.iter().copied().chain(rhs.letters))
    }

    pub fn concat(&self, rhs: &Word) -> Word {
        self.concat_inv(rhs, false)
    }

    /// u * self * u^-1, reduced.
    pub fn conjugated_by(&self, u: &Word) -> Word {
        u.concat(self).concat(&u.inverse())
    }

    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    /// Replace every letter by its image under `f` (inverting images of
    /// inverse letters) and reduce.
    pub fn substitute(&self, mut f: impl FnMut(Gen) -> Word) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in &self.letters {
            let img = f(l.gen);
            if l.inv {
                out.extend(img.inverse().letters);
            } else {
                out.extend(img.letters);
            }
        }
        Word::reduce(out)
    }

    /// Exponent-sum vector over (a_1..a_g, b_1..b_g, d_1..d_n, t).
    pub fn abelianize(&self, g: usize, n: usize) -> Vec<i64> {
        let mut v = vec![0i64; 2 * g + n + 1];
        for l in &self.letters {
            v[l.gen.slot(g, n)] += l.exp();
        }
        v
    }

    /// Write `self = u * core * u^-1` with `core` a single letter, by cyclic
    /// reduction. Errors when the cyclically reduced core is longer than one
    /// letter.
    pub fn extract_conjugacy(&self) -> Result<(Word, Letter), Error> {
        if self.is_empty() {
            return Err(Error::NotConjugate);
        }
        let mut u: Vec<Letter> = Vec::new();
        let mut core = self.letters.clone();
        while core.len() > 1 {
            let first = core[0];
            let last = *core.last().unwrap();
            if first.cancels(&last) {
                u.push(first);
                core.pop();
                core.remove(0);
            } else {
                return Err(Error::NotConjugate);
            }
        }
        match core.len() {
            1 => Ok((Word { letters: u }, core[0])),
            _ => Err(Error::NotConjugate),
        }
    }

    pub fn parse(s: &str) -> Result<Word, Error> {
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            letters.push(parse_letter(token)?);
        }
        Ok(Word::reduce(letters))
    }
}

fn parse_letter(token: &str) -> Result<Letter, Error> {
    let bad = |why: &str| Error::BadWordToken {
        token: token.to_string(),
        reason: why.to_string(),
    };
    let (body, inv) = match token.strip_suffix('\'') {
        Some(b) => (b, true),
        None => (token, false),
    };
    if body == "t" {
        return Ok(Letter {
            gen: Gen::tau(),
            inv,
        });
    }
    let (class, rest) = match body.split_at(1) {
        ("a", r) => (GenClass::Alpha, r),
        ("b", r) => (GenClass::Beta, r),
        ("d", r) => (GenClass::Delta, r),
        _ => return Err(bad("unknown generator class")),
    };
    let index: u32 = rest.parse().map_err(|_| bad("bad generator index"))?;
    if index == 0 {
        return Err(bad("generator indices are 1-based"));
    }
    Ok(Letter {
        gen: Gen { class, index },
        inv,
    })
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduction() {
        assert!(w("a1 a1'").is_empty());
        assert_eq!(w("b1 a1' a1 b1"), w("b1 b1"));
        assert_eq!(w("b1 a1'"), w("b1 a1'")); // already reduced stays put
    }

    #[test]
    fn reduce_is_idempotent() {
        let raw = w("a1 b2' b2 a1 a1' d1");
        assert_eq!(Word::reduce(raw.letters().iter().copied()), raw);
    }

    #[test]
    fn concat_inverse() {
        let a = w("a1");
        assert!(a.concat_inv(&a, true).is_empty());
        let u = w("a1 b2 d1'");
        let v = w("b1' a2");
        assert_eq!(
            u.concat(&v).inverse(),
            v.inverse().concat(&u.inverse()),
            "(uv)^-1 = v^-1 u^-1"
        );
        assert_eq!(u.inverse().inverse(), u);
    }

    #[test]
    fn abelianize_examples() {
        // phi(b1) = b1 a1' for g=2, n=2: -1 at a1, +1 at b1
        assert_eq!(w("b1 a1'").abelianize(2, 2), vec![-1, 0, 1, 0, 0, 0, 0]);
        assert_eq!(Word::empty().abelianize(2, 2), vec![0; 7]);
        let c = Word::commutator(&w("a1"), &w("b1"));
        assert_eq!(c.abelianize(2, 2), vec![0; 7]);
    }

    #[test]
    fn abelianize_is_a_homomorphism() {
        let u = w("a1 b2' d1 d1 a2'");
        let v = w("a2 d1' b1");
        let sum: Vec<i64> = u
            .abelianize(2, 2)
            .iter()
            .zip(v.abelianize(2, 2))
            .map(|(x, y)| x + y)
            .collect();
        assert_eq!(u.concat(&v).abelianize(2, 2), sum);
    }

    fn conjugate_letter(core: Letter, u: &Word) -> Word {
        Word::reduce([core]).conjugated_by(u)
    }

    #[test]
    fn conjugacy_extraction() {
        let (u, core) = w("d1").extract_conjugacy().unwrap();
        assert!(u.is_empty());
        assert_eq!(core, Letter::new(Gen::delta(1)));

        // the genus-2 image of d2
        let phi_d2 = w("a2 b2 a2' a2' a1 b1' d1' d2 d1 b1 a1' a2 a2 b2' a2'");
        let (u, core) = phi_d2.extract_conjugacy().unwrap();
        assert_eq!(u, w("a2 b2 a2' a2' a1 b1' d1'"));
        assert_eq!(core, Letter::new(Gen::delta(2)));
        assert_eq!(conjugate_letter(core, &u), phi_d2);

        assert!(w("a1 b1").extract_conjugacy().is_err());
    }

    #[test]
    fn conjugacy_roundtrip_on_short_conjugators() {
        let gens = [
            Gen::alpha(1),
            Gen::alpha(2),
            Gen::beta(1),
            Gen::beta(2),
            Gen::delta(1),
        ];
        for gi in gens {
            for gj in gens {
                for inv in [false, true] {
                    let u = Word::reduce([Letter { gen: gi, inv }, Letter::new(gj)]);
                    let core = Letter::new(Gen::delta(2));
                    let conj = conjugate_letter(core, &u);
                    let (u2, core2) = conj.extract_conjugacy().unwrap();
                    assert_eq!(core2, core);
                    assert_eq!(conjugate_letter(core2, &u2), conj);
                }
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!(Word::parse("x1").is_err());
        assert!(Word::parse("a0").is_err());
        assert!(Word::parse("a").is_err());
        assert!(Word::parse("t2").is_err());
    }

    #[test]
    fn substitute_then_reduce() {
        // w_j d_j w_j^-1 built from parts reduces to the conjugate form
        let wj = w("a2 b2 a2' a2' a1 b1' d1'");
        let built = Word::gen(Gen::delta(2)).conjugated_by(&wj);
        let (u, _) = built.extract_conjugacy().unwrap();
        assert_eq!(u, wj);
    }
}
