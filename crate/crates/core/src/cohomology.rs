//! Exact linear algebra over the quadratic field: the induced cohomology
//! action of the monodromy, characteristic polynomials, nullspaces, and the
//! algebraic intersection pairing.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::presentation::MappingTorusInput;
use crate::qfield::QuadNum;

/// Dense rectangular matrix with exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<QuadNum>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![QuadNum::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = QuadNum::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> QuadNum) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<QuadNum>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[QuadNum] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn add(&self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] + &rhs[(r, c)])
    }

    pub fn sub(&self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] - &rhs[(r, c)])
    }

    pub fn scale(&self, k: &QuadNum) -> QMatrix {
        QMatrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] * k)
    }

    pub fn mul(&self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        QMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = QuadNum::zero();
            for k in 0..self.cols {
                acc = &acc + &(&self[(r, k)] * &rhs[(k, c)]);
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[QuadNum]) -> Vec<QuadNum> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = QuadNum::zero();
                for c in 0..self.cols {
                    acc = &acc + &(&self[(r, c)] * &v[c]);
                }
                acc
            })
            .collect()
    }

    /// self - k*I.
    pub fn sub_scalar_diag(&self, k: &QuadNum) -> QMatrix {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] = &m[(i, i)] - k;
        }
        m
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> QMatrix {
        QMatrix::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    /// Row-reduced echelon form with unit pivots. Returns the reduced matrix
    /// and the pivot column of each pivot row. Pivot choice is the first
    /// nonzero entry in column order, so the result is deterministic.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, pr);
            let inv = m[(row, col)].inv().expect("pivot is nonzero");
            for c in col..m.cols {
                m[(row, c)] = &m[(row, c)] * &inv;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for c in col..m.cols {
                        m[(r, c)] = &m[(r, c)] - &(&factor * &m[(row, c)]);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact nullspace basis, echelon-normalized: each basis vector has a 1
    /// in its free coordinate and zeros in the other free coordinates.
    pub fn kernel(&self) -> Vec<Vec<QuadNum>> {
        let (r, pivots) = self.rref();
        let mut pivot_of_col = vec![None; self.cols];
        for (prow, &pcol) in pivots.iter().enumerate() {
            pivot_of_col[pcol] = Some(prow);
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut vec = vec![QuadNum::zero(); self.cols];
            vec[free] = QuadNum::one();
            for (col, &p) in pivot_of_col.iter().enumerate() {
                if let Some(prow) = p {
                    vec[col] = -&r[(prow, free)];
                }
            }
            basis.push(vec);
        }
        basis
    }

    pub fn det(&self) -> QuadNum {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = QuadNum::one();
        for col in 0..m.cols {
            let Some(pr) = (col..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                return QuadNum::zero();
            };
            if pr != col {
                m.swap_rows(col, pr);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det = &det * &pivot;
            let inv = pivot.inv().expect("pivot is nonzero");
            for r in col + 1..m.rows {
                if !m[(r, col)].is_zero() {
                    let factor = &m[(r, col)] * &inv;
                    for c in col..m.cols {
                        m[(r, c)] = &m[(r, c)] - &(&factor * &m[(col, c)]);
                    }
                }
            }
        }
        det
    }

    /// Exact characteristic polynomial det(xI - M) via the trace recurrence
    /// (Faddeev-LeVerrier); divisions are by integers only.
    pub fn char_poly(&self) -> QPoly {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![QuadNum::zero(); n + 1];
        coeffs[n] = QuadNum::one();
        let mut m = self.clone();
        for k in 1..=n {
            let c = -&(m.trace().try_div(&QuadNum::int(k as i64)).expect("k > 0"));
            coeffs[n - k] = c.clone();
            if k < n {
                for i in 0..n {
                    m[(i, i)] = &m[(i, i)] + &c;
                }
                m = self.mul(&m);
            }
        }
        QPoly::new(coeffs)
    }

    pub fn trace(&self) -> QuadNum {
        assert_eq!(self.rows, self.cols);
        let mut acc = QuadNum::zero();
        for i in 0..self.rows {
            acc = &acc + &self[(i, i)];
        }
        acc
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = QuadNum;
    fn index(&self, (r, c): (usize, usize)) -> &QuadNum {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut QuadNum {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Polynomial with exact coefficients, stored low degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<QuadNum>,
}

impl QPoly {
    pub fn new(coeffs: Vec<QuadNum>) -> Self {
        let mut p = QPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&c| QuadNum::int(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[QuadNum] {
        &self.coeffs
    }

    pub fn mul(&self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::new(vec![]);
        }
        let mut out = vec![QuadNum::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        QPoly::new(out)
    }

    /// Exact division with remainder.
    pub fn divrem(&self, div: &QPoly) -> Result<(QPoly, QPoly), Error> {
        if div.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut rem = self.coeffs.clone();
        let dd = div.degree().unwrap();
        let lead_inv = div.coeffs[dd].inv()?;
        if rem.len() <= dd {
            return Ok((QPoly::new(vec![]), QPoly::new(rem)));
        }
        let mut quot = vec![QuadNum::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = &rem[i] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            quot[i - dd] = c.clone();
            for j in 0..=dd {
                rem[i - dd + j] = &rem[i - dd + j] - &(&c * &div.coeffs[j]);
            }
        }
        Ok((QPoly::new(quot), QPoly::new(rem)))
    }

    pub fn divides(&self, other: &QPoly) -> bool {
        other
            .divrem(self)
            .map(|(_, r)| r.is_zero())
            .unwrap_or(false)
    }

    /// Evaluate at a square matrix.
    pub fn eval_matrix(&self, m: &QMatrix) -> QMatrix {
        let n = m.rows();
        let mut acc = QMatrix::zero(n, n);
        for c in self.coeffs.iter().rev() {
            acc = m.mul(&acc);
            for i in 0..n {
                acc[(i, i)] = &acc[(i, i)] + c;
            }
        }
        acc
    }

    pub fn eval(&self, x: &QuadNum) -> QuadNum {
        let mut acc = QuadNum::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// The (2g+n) x (2g+n) matrix of the induced action on first cohomology of
/// the punctured surface, in the dual basis (a_1..a_g, b_1..b_g, d_1..d_n):
/// row i is the exponent-sum vector of the image of the i-th generator.
pub fn action_matrix(input: &MappingTorusInput) -> QMatrix {
    let m = input.num_gens();
    QMatrix::from_fn(m, m, |r, c| {
        let ab = input.phi_word(r).abelianize(input.g, input.n);
        QuadNum::int(ab[c])
    })
}

/// True when 1 is not an eigenvalue of the closed-surface block.
pub fn eigenvalue_one_check(input: &MappingTorusInput) -> bool {
    let act = action_matrix(input);
    let block = act.submatrix(0, 0, 2 * input.g, 2 * input.g);
    !block.sub(&QMatrix::identity(2 * input.g)).det().is_zero()
}

/// Algebraic intersection pairing on the closed-surface part,
/// sum over i of u_i v_{g+i} - u_{g+i} v_i.
pub fn intersection_pairing(u: &[QuadNum], v: &[QuadNum], g: usize) -> Result<QuadNum, Error> {
    if u.len() < 2 * g || v.len() < 2 * g {
        return Err(Error::Precondition {
            check: "intersection_pairing".into(),
            message: format!("vectors must have length >= {}", 2 * g),
        });
    }
    let mut acc = QuadNum::zero();
    for i in 0..g {
        acc = &acc + &(&(&u[i] * &v[g + i]) - &(&u[g + i] * &v[i]));
    }
    Ok(acc)
}

/// Minimal polynomial x^2 - tr(l) x + N(l) of a quadratic number, with
/// rational coefficients.
pub fn unit_min_poly(lambda: &QuadNum) -> Result<QPoly, Error> {
    let tr = lambda + &lambda.conjugate();
    let nrm = lambda.norm();
    if !tr.is_rational() {
        return Err(Error::Precondition {
            check: "unit_min_poly".into(),
            message: "trace is not rational".into(),
        });
    }
    Ok(QPoly::new(vec![nrm, -&tr, QuadNum::one()]))
}

/// (x - 1)^k.
pub fn x_minus_one_pow(k: usize) -> QPoly {
    let lin = QPoly::new(vec![QuadNum::int(-1), QuadNum::one()]);
    let mut acc = QPoly::new(vec![QuadNum::one()]);
    for _ in 0..k {
        acc = acc.mul(&lin);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi(v: i64) -> QuadNum {
        QuadNum::int(v)
    }

    #[test]
    fn rref_kernel_rank() {
        let m = QMatrix::from_rows(vec![
            vec![qi(1), qi(2), qi(3)],
            vec![qi(2), qi(4), qi(6)],
            vec![qi(1), qi(0), qi(1)],
        ]);
        assert_eq!(m.rank(), 2);
        let ker = m.kernel();
        assert_eq!(ker.len(), 1);
        for v in &ker {
            assert!(m.mul_vec(v).iter().all(|e| e.is_zero()));
        }
        assert!(QMatrix::identity(4).kernel().is_empty());
    }

    #[test]
    fn char_poly_small_cases() {
        let id2 = QMatrix::identity(2);
        assert_eq!(id2.char_poly(), QPoly::from_i64(&[1, -2, 1])); // (x-1)^2

        // diag(l, 1/l) for l = (5+r)/2 -> x^2 - 5x + 1
        let l = QuadNum::new(21, 5, 1, 2);
        let li = l.inv().unwrap();
        let mut d = QMatrix::zero(2, 2);
        d[(0, 0)] = l;
        d[(1, 1)] = li;
        assert_eq!(d.char_poly(), QPoly::from_i64(&[1, -5, 1]));
    }

    #[test]
    fn cayley_hamilton_on_pseudorandom_4x4() {
        let mut seed = 1u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 33) % 7) as i64 - 3
        };
        for _ in 0..25 {
            let m = QMatrix::from_fn(4, 4, |_, _| qi(next()));
            assert_eq!(m.char_poly().eval_matrix(&m), QMatrix::zero(4, 4));
        }
    }

    #[test]
    fn rank_nullity_on_pseudorandom_matrices() {
        let mut seed = 99u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 33) % 5) as i64 - 2
        };
        for _ in 0..200 {
            let rows = 2 + (next().unsigned_abs() as usize % 4);
            let cols = 2 + (next().unsigned_abs() as usize % 4);
            let m = QMatrix::from_fn(rows, cols, |_, _| qi(next()));
            let ker = m.kernel();
            assert_eq!(m.rank() + ker.len(), cols);
            for v in &ker {
                assert!(m.mul_vec(v).iter().all(|e| e.is_zero()));
            }
        }
    }

    #[test]
    fn poly_division() {
        let a = QPoly::from_i64(&[1, -5, 1]);
        let b = QPoly::from_i64(&[1, -3, 1]);
        let prod = a.mul(&b);
        assert!(a.divides(&prod));
        assert!(b.divides(&prod));
        let (q, r) = prod.divrem(&a).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, b);
        assert!(!QPoly::from_i64(&[1, 1]).divides(&prod));
    }

    #[test]
    fn pairing_is_antisymmetric_and_normalized() {
        let g = 2;
        let e = |i: usize| {
            let mut v = vec![QuadNum::zero(); 4];
            v[i] = QuadNum::one();
            v
        };
        // i(a1*, b1*) = 1 on the standard basis
        assert_eq!(
            intersection_pairing(&e(0), &e(2), g).unwrap(),
            QuadNum::one()
        );
        let u = vec![qi(1), qi(-2), qi(3), qi(5)];
        let v = vec![qi(2), qi(0), qi(-1), qi(4)];
        let uv = intersection_pairing(&u, &v, g).unwrap();
        let vu = intersection_pairing(&v, &u, g).unwrap();
        assert_eq!(uv, -&vu);
        assert!(intersection_pairing(&u, &u, g).unwrap().is_zero());
        assert!(intersection_pairing(&u[..3], &v[..3], g).is_err());
    }
}
