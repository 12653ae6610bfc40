//! Input model and validation for the mapping-torus presentation and the
//! measure data of the invariant foliations.
//!
//! The input document lists the monodromy images as words in application
//! order (leftmost letter applied first). Holonomy matrices compose the
//! other way, so the images are stored internally with their letter order
//! reversed; every downstream evaluation is then a plain left fold. The
//! as-written words are kept alongside for echoing the input back out.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Deserialize;

use crate::cohomology::{self, QMatrix};
use crate::error::Error;
use crate::qfield::QuadNum;
use crate::words::{Gen, GenClass, Word};

/// Validated presentation data: genus, singularity count, dilatation,
/// monodromy images, and the stable/unstable measure vectors.
#[derive(Debug, Clone)]
pub struct MappingTorusInput {
    pub g: usize,
    pub n: usize,
    pub disc: u32,
    pub lambda: QuadNum,
    /// Monodromy images in composition order, indexed by generator slot.
    phi: Vec<Word>,
    /// The same images as written in the input document.
    phi_source: Vec<Word>,
    /// Unstable measures a_i, length 2g+n.
    pub mu_u: Vec<QuadNum>,
    /// Stable measures b_i, length 2g+n.
    pub mu_s: Vec<QuadNum>,
}

/// Permutation and conjugator data of the singular orbits.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    /// perm[j] = k means the j-th puncture loop maps to a conjugate of the
    /// k-th (0-based).
    pub perm: Vec<usize>,
    /// Conjugator of the j-th puncture loop image, in composition order.
    pub conjugators: Vec<Word>,
    /// Cycles of the permutation, each starting at its smallest element.
    pub orbits: Vec<Vec<usize>>,
}

impl BoundaryData {
    /// Number of boundary components of the mapping-torus complement.
    pub fn k(&self) -> usize {
        self.orbits.len()
    }

    /// Index of the orbit containing puncture j.
    pub fn orbit_of(&self, j: usize) -> usize {
        self.orbits
            .iter()
            .position(|o| o.contains(&j))
            .expect("puncture index in range")
    }
}

#[derive(Debug, Deserialize)]
struct RawInput {
    disc: u32,
    genus: usize,
    num_sing: usize,
    lambda: String,
    phi: BTreeMap<String, String>,
    mu_u: Vec<String>,
    mu_s: Vec<String>,
}

impl MappingTorusInput {
    pub fn num_gens(&self) -> usize {
        2 * self.g + self.n
    }

    /// Monodromy image of the generator at `slot`, composition order.
    pub fn phi_word(&self, slot: usize) -> &Word {
        &self.phi[slot]
    }

    /// Monodromy image as written in the input document.
    pub fn phi_source_word(&self, slot: usize) -> &Word {
        &self.phi_source[slot]
    }

    /// Apply the monodromy to an arbitrary word in the surface generators
    /// (composition-order in, composition-order out).
    pub fn apply_phi(&self, w: &Word) -> Word {
        w.substitute(|gen| self.phi[gen.slot(self.g, self.n)].clone())
    }

    /// Translation length sum(a_i * exponent sum) of a composition-order word
    /// in the surface generators.
    pub fn translation(&self, w: &Word) -> QuadNum {
        let ab = w.abelianize(self.g, self.n);
        assert_eq!(ab[self.num_gens()], 0, "word contains the circle generator");
        let mut acc = QuadNum::zero();
        for (i, &e) in ab[..self.num_gens()].iter().enumerate() {
            acc = &acc + &self.mu_u[i].scale_int(e);
        }
        acc
    }

    pub fn parse_input(document: &str) -> Result<Self, Error> {
        let raw: RawInput =
            serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawInput) -> Result<Self, Error> {
        let g = raw.genus;
        let n = raw.num_sing;
        if g < 1 {
            return Err(Error::validation("genus", "genus must be at least 1"));
        }
        if n < 1 {
            return Err(Error::validation(
                "num_sing",
                "at least one singular point is required",
            ));
        }
        if 2 * g + n <= 2 {
            return Err(Error::validation(
                "genus/num_sing",
                "the surface must satisfy 2g + n > 2",
            ));
        }
        if !is_squarefree(raw.disc) || raw.disc < 2 {
            return Err(Error::validation(
                "disc",
                "field discriminant parameter must be squarefree and >= 2",
            ));
        }
        let lambda = QuadNum::parse(&raw.lambda, raw.disc)
            .map_err(|e| Error::validation("lambda", e.to_string()))?;
        if (&lambda - &QuadNum::int(1)).signum() <= 0 {
            return Err(Error::validation("lambda", "dilatation must exceed 1"));
        }

        let m = 2 * g + n;
        let parse_measure = |list: &[String], field: &str| -> Result<Vec<QuadNum>, Error> {
            if list.len() != m {
                return Err(Error::validation(
                    field,
                    format!("expected {m} entries, found {}", list.len()),
                ));
            }
            list.iter()
                .enumerate()
                .map(|(i, s)| {
                    QuadNum::parse(s, raw.disc)
                        .map_err(|e| Error::validation(format!("{field}[{i}]"), e.to_string()))
                })
                .collect()
        };
        let mu_u = parse_measure(&raw.mu_u, "mu_u")?;
        let mu_s = parse_measure(&raw.mu_s, "mu_s")?;
        for j in 0..n {
            for (field, mu) in [("mu_u", &mu_u), ("mu_s", &mu_s)] {
                if !mu[2 * g + j].is_zero() {
                    return Err(Error::validation(
                        format!("{field}[{}]", 2 * g + j),
                        "measure of puncture loop must vanish",
                    ));
                }
            }
        }

        let mut phi_source = Vec::with_capacity(m);
        for slot in 0..m {
            let gen = Gen::from_slot(slot, g, n);
            let key = gen.to_string();
            let text = raw
                .phi
                .get(&key)
                .ok_or_else(|| Error::validation(format!("phi.{key}"), "missing image"))?;
            let word = Word::parse(text)
                .map_err(|e| Error::validation(format!("phi.{key}"), e.to_string()))?;
            for l in word.letters() {
                if l.gen.class == GenClass::Tau {
                    return Err(Error::validation(
                        format!("phi.{key}"),
                        "images may not contain the circle generator t",
                    ));
                }
                if !l.gen.in_range(g, n) {
                    return Err(Error::validation(
                        format!("phi.{key}"),
                        format!("generator {} out of range", l.gen),
                    ));
                }
            }
            phi_source.push(word);
        }
        if raw.phi.len() != m {
            let known: Vec<String> = (0..m).map(|s| Gen::from_slot(s, g, n).to_string()).collect();
            let extra: Vec<&String> = raw
                .phi
                .keys()
                .filter(|k| !known.contains(k))
                .collect();
            return Err(Error::validation(
                "phi",
                format!("unexpected keys: {extra:?}"),
            ));
        }

        let phi: Vec<Word> = phi_source.iter().map(Word::reversed).collect();
        let input = MappingTorusInput {
            g,
            n,
            disc: raw.disc,
            lambda,
            phi,
            phi_source,
            mu_u,
            mu_s,
        };
        // The puncture images must be conjugates of puncture loops with
        // positive core, and the induced puncture permutation a bijection.
        let bd = input.boundary_data()?;
        let mut seen = vec![false; n];
        for &k in &bd.perm {
            seen[k] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::validation(
                "phi",
                "puncture permutation is not a bijection",
            ));
        }
        Ok(input)
    }

    /// Permutation, conjugators, and orbit partition of the puncture loops.
    pub fn boundary_data(&self) -> Result<BoundaryData, Error> {
        let mut perm = Vec::with_capacity(self.n);
        let mut conjugators = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let image = self.phi_word(2 * self.g + j);
            let (u, core) = image.extract_conjugacy().map_err(|_| {
                Error::validation(
                    format!("phi.d{}", j + 1),
                    "image is not a conjugate of a puncture loop",
                )
            })?;
            if core.gen.class != GenClass::Delta {
                return Err(Error::validation(
                    format!("phi.d{}", j + 1),
                    "conjugacy core is not a puncture loop",
                ));
            }
            if core.inv {
                return Err(Error::validation(
                    format!("phi.d{}", j + 1),
                    "orientation-reversing puncture permutation is not allowed",
                ));
            }
            perm.push(core.gen.index as usize - 1);
            conjugators.push(u);
        }
        let orbits = cycles_of(&perm);
        Ok(BoundaryData {
            perm,
            conjugators,
            orbits,
        })
    }

    /// Exact homology-level checks: eigen-equations of the measures, the
    /// surface relation, and regularity of the closed-surface block.
    pub fn validate_homology(&self) -> HomologyReport {
        let act = cohomology::action_matrix(self);
        let mut checks = Vec::new();

        let eigen = |vec: &[QuadNum], val: &QuadNum| -> Vec<QuadNum> {
            let image = act.mul_vec(vec);
            image
                .iter()
                .zip(vec)
                .map(|(im, v)| im - &(val * v))
                .collect()
        };
        let res_u = eigen(&self.mu_u, &self.lambda);
        checks.push(CheckResult::res(
            "unstable measure is a dilatation eigenvector",
            &res_u,
        ));
        let lambda_inv = self.lambda.inv().expect("dilatation is nonzero");
        let res_s = eigen(&self.mu_s, &lambda_inv);
        checks.push(CheckResult::res(
            "stable measure is a contraction eigenvector",
            &res_s,
        ));

        // Homology of the surface relation: the image of the commutator
        // product minus the image of the puncture product must lie in the
        // span of the all-ones puncture vector.
        let rel = self.surface_relator_lhs();
        let phi_rel = self.apply_phi(&rel);
        let mut delta_prod = Word::empty();
        for j in 0..self.n {
            delta_prod = delta_prod.concat(self.phi_word(2 * self.g + j));
        }
        let diff = phi_rel.concat_inv(&delta_prod, true);
        let ab = diff.abelianize(self.g, self.n);
        let surface_ok = ab[..2 * self.g].iter().all(|&e| e == 0)
            && ab[2 * self.g..2 * self.g + self.n]
                .windows(2)
                .all(|w| w[0] == w[1]);
        checks.push(CheckResult {
            name: "surface relation holds in homology".into(),
            passed: surface_ok,
            warning: false,
            detail: if surface_ok {
                String::new()
            } else {
                format!("residual exponents {ab:?}")
            },
        });

        let no_unit_eigenvalue = cohomology::eigenvalue_one_check(self);
        checks.push(CheckResult {
            name: "closed-surface action has no unit eigenvalue".into(),
            passed: no_unit_eigenvalue,
            warning: false,
            detail: String::new(),
        });

        // Free-group comparison of the two relator images. Basepoint choices
        // can break this without breaking anything downstream, so it only
        // warns.
        let conjugate_ok = cyclically_conjugate(&phi_rel, &delta_prod);
        checks.push(CheckResult {
            name: "surface relation image is conjugate to the puncture product".into(),
            passed: conjugate_ok,
            warning: true,
            detail: String::new(),
        });

        HomologyReport { checks }
    }

    /// The word prod [a_i, b_i] * (d_1 ... d_n)^-1 in composition order.
    pub fn surface_relator_lhs(&self) -> Word {
        let mut acc = Word::empty();
        for i in 1..=self.g {
            let c = Word::commutator(
                &Word::gen(Gen::alpha(i as u32)),
                &Word::gen(Gen::beta(i as u32)),
            );
            acc = acc.concat(&c);
        }
        acc
    }

    /// The full relator of the fiber surface, composition order:
    /// prod [a_i, b_i] * (d_1 .. d_n)^-1.
    pub fn surface_relator(&self) -> Word {
        let mut deltas = Word::empty();
        for j in 1..=self.n {
            deltas = deltas.concat(&Word::gen(Gen::delta(j as u32)));
        }
        self.surface_relator_lhs().concat_inv(&deltas, true)
    }

    /// Conjugation relator of the generator at `slot`:
    /// phi(gen) * t * gen^-1 * t^-1, composition order.
    pub fn conjugation_relator(&self, slot: usize) -> Word {
        let gen = Gen::from_slot(slot, self.g, self.n);
        self.phi_word(slot)
            .concat(&Word::gen(Gen::tau()))
            .concat_inv(&Word::gen(gen), true)
            .concat_inv(&Word::gen(Gen::tau()), true)
    }

    /// All relators: one conjugation relator per surface generator plus the
    /// surface relator.
    pub fn relators(&self) -> Vec<Word> {
        let mut rs: Vec<Word> = (0..self.num_gens())
            .map(|s| self.conjugation_relator(s))
            .collect();
        rs.push(self.surface_relator());
        rs
    }

    /// Render back to the canonical input document.
    pub fn to_json(&self) -> serde_json::Value {
        let mut phi = serde_json::Map::new();
        for slot in 0..self.num_gens() {
            let gen = Gen::from_slot(slot, self.g, self.n);
            phi.insert(
                gen.to_string(),
                serde_json::Value::String(self.phi_source[slot].to_string()),
            );
        }
        serde_json::json!({
            "disc": self.disc,
            "genus": self.g,
            "num_sing": self.n,
            "lambda": self.lambda.to_string(),
            "phi": phi,
            "mu_u": self.mu_u.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "mu_s": self.mu_s.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Warnings do not fail validation.
    pub warning: bool,
    pub detail: String,
}

impl CheckResult {
    fn res(name: &str, residual: &[QuadNum]) -> Self {
        let passed = residual.iter().all(|e| e.is_zero());
        CheckResult {
            name: name.into(),
            passed,
            warning: false,
            detail: if passed {
                String::new()
            } else {
                format!(
                    "residual ({})",
                    residual
                        .iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomologyReport {
    pub checks: Vec<CheckResult>,
}

impl HomologyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.warning)
    }
}

fn is_squarefree(d: u32) -> bool {
    let mut d = d;
    let mut p = 2u32;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        while d % p == 0 {
            d /= p;
        }
        p += 1;
    }
    true
}

fn cycles_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut orbits = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = perm[start];
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            cur = perm[cur];
        }
        orbits.push(cycle);
    }
    orbits
}

/// Free-group conjugacy test via cyclic reduction and rotation.
fn cyclically_conjugate(a: &Word, b: &Word) -> bool {
    let ra = cyclic_reduce(a);
    let rb = cyclic_reduce(b);
    if ra.len() != rb.len() {
        return false;
    }
    if ra.is_empty() {
        return true;
    }
    let la = ra.letters();
    let lb = rb.letters();
    (0..la.len()).any(|shift| (0..la.len()).all(|i| la[(i + shift) % la.len()] == lb[i]))
}

fn cyclic_reduce(w: &Word) -> Word {
    let mut letters = w.letters().to_vec();
    while letters.len() >= 2 {
        let first = letters[0];
        let last = *letters.last().unwrap();
        if first.gen == last.gen && first.inv != last.inv {
            letters.pop();
            letters.remove(0);
        } else {
            break;
        }
    }
    Word::reduce(letters)
}

/// The bundled genus-2 example input.
pub fn genus2_fixture_json() -> &'static str {
    include_str!("../fixtures/genus2.json")
}

pub fn genus2_fixture() -> MappingTorusInput {
    MappingTorusInput::parse_input(genus2_fixture_json()).expect("bundled fixture is valid")
}

/// Copy of `action_matrix` re-exported here for convenience in reports.
pub fn action_matrix(input: &MappingTorusInput) -> QMatrix {
    cohomology::action_matrix(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses_and_validates() {
        let input = genus2_fixture();
        assert_eq!(input.g, 2);
        assert_eq!(input.n, 2);
        assert_eq!(input.disc, 21);
        assert_eq!(input.lambda, QuadNum::new(21, 5, 1, 2));
        let report = input.validate_homology();
        for c in &report.checks {
            assert!(c.passed || c.warning, "failed: {} {}", c.name, c.detail);
        }
        assert!(report.passed());
    }

    #[test]
    fn fixture_boundary_data() {
        let input = genus2_fixture();
        let bd = input.boundary_data().unwrap();
        assert_eq!(bd.perm, vec![0, 1]);
        assert_eq!(bd.k(), 2);
        assert_eq!(bd.orbits, vec![vec![0], vec![1]]);
        assert!(bd.conjugators[0].is_empty());
    }

    #[test]
    fn orbit_sizes_sum_to_n() {
        let input = genus2_fixture();
        let bd = input.boundary_data().unwrap();
        let total: usize = bd.orbits.iter().map(|o| o.len()).sum();
        assert_eq!(total, input.n);
    }

    #[test]
    fn rejects_unit_dilatation() {
        let doc = genus2_fixture_json().replace("(5+1*r)/2", "1");
        let err = MappingTorusInput::parse_input(&doc).unwrap_err();
        assert!(err.to_string().contains("dilatation must exceed 1"));
    }

    #[test]
    fn rejects_nonzero_puncture_measure() {
        let input = genus2_fixture();
        let mut doc: serde_json::Value =
            serde_json::from_str(genus2_fixture_json()).unwrap();
        doc["mu_u"][2 * input.g] = serde_json::Value::String("1".into());
        let err = MappingTorusInput::parse_input(&doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("measure of puncture loop"));
    }

    #[test]
    fn serialize_parse_roundtrip() {
        let input = genus2_fixture();
        let doc = serde_json::to_string_pretty(&input.to_json()).unwrap();
        let again = MappingTorusInput::parse_input(&doc).unwrap();
        assert_eq!(again.to_json(), input.to_json());
    }

    #[test]
    fn cycle_structure() {
        assert_eq!(cycles_of(&[0, 1]), vec![vec![0], vec![1]]);
        assert_eq!(cycles_of(&[1, 2, 0]), vec![vec![0, 1, 2]]);
        assert_eq!(cycles_of(&[1, 0, 2]), vec![vec![0, 1], vec![2]]);
    }
}
