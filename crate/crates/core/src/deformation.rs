//! The twisted-cocycle linear system at the metabelian holonomy.
//!
//! A cocycle assigns to every generator an sl2 value, written in the basis
//! e1 = [[0,1],[0,0]], e2 = [[1,0],[0,-1]], e3 = [[0,0],[1,0]] as
//! coordinates (x, y, z). Extending along words by
//! `z(uv) = z(u) + Ad(rho0(u)) z(v)` and demanding that every relator maps
//! to zero yields a homogeneous linear system over the quadratic field. The
//! system is built by direct symbolic evaluation; the named blocks are then
//! extracted from its rows rather than assembled by hand.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::affine::Affine;
use crate::cohomology::{self, QMatrix};
use crate::error::Error;
use crate::presentation::MappingTorusInput;
use crate::qfield::QuadNum;
use crate::words::{Gen, GenClass, Letter, Word};

/// Homogeneous linear form over the system unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinExpr {
    terms: BTreeMap<usize, QuadNum>,
    constant: QuadNum,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: QuadNum::zero(),
        }
    }

    pub fn unknown(id: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, QuadNum::int(1));
        LinExpr {
            terms,
            constant: QuadNum::zero(),
        }
    }

    pub fn coeff(&self, id: usize) -> QuadNum {
        self.terms.get(&id).cloned().unwrap_or_else(QuadNum::zero)
    }

    pub fn constant(&self) -> &QuadNum {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &QuadNum)> {
        self.terms.iter().map(|(&id, c)| (id, c))
    }

    fn set(&mut self, id: usize, value: QuadNum) {
        if value.is_zero() {
            self.terms.remove(&id);
        } else {
            self.terms.insert(id, value);
        }
    }

    pub fn add(&self, rhs: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.constant = &out.constant + &rhs.constant;
        for (&id, c) in &rhs.terms {
            let cur = out.coeff(id);
            out.set(id, &cur + c);
        }
        out
    }

    pub fn neg(&self) -> LinExpr {
        let mut out = LinExpr::zero();
        out.constant = -&self.constant;
        for (&id, c) in &self.terms {
            out.set(id, -c);
        }
        out
    }

    pub fn scale(&self, k: &QuadNum) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        let mut out = LinExpr::zero();
        out.constant = &self.constant * k;
        for (&id, c) in &self.terms {
            out.set(id, c * k);
        }
        out
    }

    /// Evaluate at an assignment of affine values to the unknowns.
    pub fn eval_affine(&self, values: &[Affine]) -> Affine {
        let mut acc = Affine::constant(self.constant.clone());
        for (&id, c) in &self.terms {
            acc = acc.add(&values[id].scale(c));
        }
        acc
    }

    pub fn eval_numeric(&self, values: &[QuadNum]) -> QuadNum {
        let mut acc = self.constant.clone();
        for (&id, c) in &self.terms {
            acc = &acc + &(c * &values[id]);
        }
        acc
    }
}

/// Unknown layout: generator slot i owns (x, y, z) = (3i, 3i+1, 3i+2);
/// the circle generator owns the final triple.
#[derive(Debug, Clone, Copy)]
pub struct UnknownLayout {
    pub num_gens: usize,
}

impl UnknownLayout {
    pub fn x(&self, slot: usize) -> usize {
        3 * slot
    }
    pub fn y(&self, slot: usize) -> usize {
        3 * slot + 1
    }
    pub fn z(&self, slot: usize) -> usize {
        3 * slot + 2
    }
    pub fn x0(&self) -> usize {
        3 * self.num_gens
    }
    pub fn y0(&self) -> usize {
        3 * self.num_gens + 1
    }
    pub fn z0(&self) -> usize {
        3 * self.num_gens + 2
    }
    pub fn total(&self) -> usize {
        3 * self.num_gens + 3
    }
}

/// The linear system cut out by the relators.
#[derive(Debug, Clone)]
pub struct CocycleSystem {
    pub layout: UnknownLayout,
    /// Relator name plus its three coordinate equations (x, y, z rows).
    pub relators: Vec<(String, [LinExpr; 3])>,
}

impl CocycleSystem {
    pub fn num_equations(&self) -> usize {
        3 * self.relators.len()
    }

    pub fn equations(&self) -> impl Iterator<Item = &LinExpr> {
        self.relators.iter().flat_map(|(_, rows)| rows.iter())
    }

    pub fn to_matrix(&self) -> QMatrix {
        let cols = self.layout.total();
        let rows: Vec<Vec<QuadNum>> = self
            .equations()
            .map(|eq| (0..cols).map(|c| eq.coeff(c)).collect())
            .collect();
        QMatrix::from_rows(rows)
    }

    /// Dimension of the solution space (the space of cocycles).
    pub fn nullity(&self) -> usize {
        self.layout.total() - self.to_matrix().rank()
    }

    /// True when the assignment satisfies every equation exactly.
    pub fn satisfied_by(&self, values: &[QuadNum]) -> bool {
        self.equations().all(|eq| eq.eval_numeric(values).is_zero())
    }
}

/// Adjoint action of rho0 of a single letter on sl2 in the (e1, e2, e3)
/// basis: a parabolic with translation A acts by [[1,-2A,-A^2],[0,1,A],
/// [0,0,1]]; the circle generator acts by diag(lambda, 1, 1/lambda).
fn ad_letter(l: &Letter, input: &MappingTorusInput) -> QMatrix {
    match l.gen.class {
        GenClass::Tau => {
            let lam = if l.inv {
                input.lambda.inv().expect("dilatation nonzero")
            } else {
                input.lambda.clone()
            };
            let mut m = QMatrix::identity(3);
            m[(2, 2)] = lam.inv().expect("dilatation nonzero");
            m[(0, 0)] = lam;
            m
        }
        _ => {
            let slot = l.gen.slot(input.g, input.n);
            let a = &input.mu_u[slot];
            let a = if l.inv { -a } else { a.clone() };
            unipotent_ad(&a)
        }
    }
}

fn unipotent_ad(a: &QuadNum) -> QMatrix {
    let mut m = QMatrix::identity(3);
    m[(0, 1)] = -&a.scale_int(2);
    m[(0, 2)] = -&(a * a);
    m[(1, 2)] = a.clone();
    m
}

/// Adjoint action of rho0 of a whole word (composition order).
pub fn ad_rho0(w: &Word, input: &MappingTorusInput) -> QMatrix {
    let mut acc = QMatrix::identity(3);
    for l in w.letters() {
        acc = acc.mul(&ad_letter(l, input));
    }
    acc
}

fn apply_ad(m: &QMatrix, v: &[LinExpr; 3]) -> [LinExpr; 3] {
    std::array::from_fn(|r| {
        let mut acc = LinExpr::zero();
        for c in 0..3 {
            acc = acc.add(&v[c].scale(&m[(r, c)]));
        }
        acc
    })
}

/// Symbolic cocycle value of a word, as linear forms in the generator
/// unknowns: fold of `z(l w) = z(l) + Ad(rho0(l)) z(w)`.
pub fn cocycle_of_word(w: &Word, input: &MappingTorusInput) -> [LinExpr; 3] {
    let layout = UnknownLayout {
        num_gens: input.num_gens(),
    };
    let letter_value = |l: &Letter| -> [LinExpr; 3] {
        let base_ids = if l.gen.class == GenClass::Tau {
            [layout.x0(), layout.y0(), layout.z0()]
        } else {
            let slot = l.gen.slot(input.g, input.n);
            [layout.x(slot), layout.y(slot), layout.z(slot)]
        };
        let v = base_ids.map(LinExpr::unknown);
        if l.inv {
            // z(g^-1) = -Ad(rho0(g)^-1) z(g)
            let ad_inv = ad_letter(l, input);
            apply_ad(&ad_inv, &v).map(|e| e.neg())
        } else {
            v
        }
    };
    let mut acc = [LinExpr::zero(), LinExpr::zero(), LinExpr::zero()];
    for l in w.letters().iter().rev() {
        let ad = ad_letter(l, input);
        let mapped = apply_ad(&ad, &acc);
        let zl = letter_value(l);
        acc = std::array::from_fn(|i| zl[i].add(&mapped[i]));
    }
    acc
}

/// Build the full relator system: three coordinate equations per relator.
pub fn build_system(input: &MappingTorusInput) -> CocycleSystem {
    let layout = UnknownLayout {
        num_gens: input.num_gens(),
    };
    let mut relators = Vec::new();
    for slot in 0..input.num_gens() {
        let gen = Gen::from_slot(slot, input.g, input.n);
        let rows = cocycle_of_word(&input.conjugation_relator(slot), input);
        relators.push((format!("conj[{gen}]"), rows));
    }
    let rows = cocycle_of_word(&input.surface_relator(), input);
    relators.push(("surface".into(), rows));
    CocycleSystem { layout, relators }
}

/// dim of first cohomology: nullity minus the three coboundary directions.
pub fn dim_h1(system: &CocycleSystem) -> usize {
    system.nullity() - 3
}

/// The named coefficient blocks of the conjugation rows, in the unknown
/// order (x_1..x_m, y_0, y_1..y_m, z_1..z_m) with the gauge x_0 = z_0 = 0.
pub struct Blocks {
    /// y-part of the x-coordinate equations.
    pub k_block: QMatrix,
    /// z-part of the x-coordinate equations.
    pub c_block: QMatrix,
    /// z-part of the y-coordinate equations.
    pub d_block: QMatrix,
    /// x-part of the x-coordinate equations (the action minus dilatation).
    pub x_block: QMatrix,
    /// y0 column of the x-coordinate equations.
    pub y0_col: Vec<QuadNum>,
}

pub fn extract_blocks(system: &CocycleSystem, input: &MappingTorusInput) -> Blocks {
    let m = input.num_gens();
    let layout = system.layout;
    let conj = &system.relators[..m];
    let k_block = QMatrix::from_fn(m, m, |r, c| conj[r].1[0].coeff(layout.y(c)));
    let c_block = QMatrix::from_fn(m, m, |r, c| conj[r].1[0].coeff(layout.z(c)));
    let d_block = QMatrix::from_fn(m, m, |r, c| conj[r].1[1].coeff(layout.z(c)));
    let x_block = QMatrix::from_fn(m, m, |r, c| conj[r].1[0].coeff(layout.x(c)));
    let y0_col = (0..m).map(|r| conj[r].1[0].coeff(layout.y0())).collect();
    Blocks {
        k_block,
        c_block,
        d_block,
        x_block,
        y0_col,
    }
}

/// The tangent vector at the metabelian holonomy, affine in the free orbit
/// parameters. The z-part is the stable measure scaled by `z_scale`; the
/// gauge fixes x0 = z0 = 0 and zeroes the pivot x coordinate.
#[derive(Debug, Clone)]
pub struct DeformationCocycle {
    pub x: Vec<Affine>,
    pub y: Vec<Affine>,
    pub z: Vec<Affine>,
    pub x0: Affine,
    pub y0: Affine,
    pub z0: Affine,
    /// Linear form in the free parameters that the surface relator forces
    /// to vanish.
    pub constraint: Affine,
    /// Names of the still-unbound orbit parameters.
    pub free_names: Vec<String>,
    /// Pivot x coordinate zeroed by the gauge.
    pub pivot: usize,
}

impl DeformationCocycle {
    /// Bind free parameters to exact values.
    pub fn substitute(&self, values: &BTreeMap<String, QuadNum>) -> DeformationCocycle {
        let sub = |v: &Affine| v.substitute(values);
        DeformationCocycle {
            x: self.x.iter().map(sub).collect(),
            y: self.y.iter().map(sub).collect(),
            z: self.z.iter().map(sub).collect(),
            x0: sub(&self.x0),
            y0: sub(&self.y0),
            z0: sub(&self.z0),
            constraint: sub(&self.constraint),
            free_names: self
                .free_names
                .iter()
                .filter(|n| !values.contains_key(*n))
                .cloned()
                .collect(),
            pivot: self.pivot,
        }
    }

    /// Exact values as a flat unknown vector, when no parameter is free.
    pub fn numeric_vector(&self, layout: &UnknownLayout) -> Result<Vec<QuadNum>, Error> {
        let mut out = vec![QuadNum::zero(); layout.total()];
        for slot in 0..self.x.len() {
            out[layout.x(slot)] = self.x[slot].value()?;
            out[layout.y(slot)] = self.y[slot].value()?;
            out[layout.z(slot)] = self.z[slot].value()?;
        }
        out[layout.x0()] = self.x0.value()?;
        out[layout.y0()] = self.y0.value()?;
        out[layout.z0()] = self.z0.value()?;
        Ok(out)
    }

    pub fn is_numeric(&self) -> bool {
        self.free_names.is_empty()
    }
}

/// Solve a square numeric system with affine right-hand sides.
fn solve_affine(a: &QMatrix, rhs: &[Affine]) -> Result<Vec<Affine>, Error> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(rhs.len(), n);
    let mut m = a.clone();
    let mut b: Vec<Affine> = rhs.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| !m[(perm[r], col)].is_zero()) else {
            return Err(Error::SingularSolve(format!("no pivot in column {col}")));
        };
        perm.swap(col, pr);
        let prow = perm[col];
        let inv = m[(prow, col)].inv()?;
        for &rr in &perm[col + 1..] {
            if m[(rr, col)].is_zero() {
                continue;
            }
            let factor = &m[(rr, col)] * &inv;
            for c in col..n {
                m[(rr, c)] = &m[(rr, c)] - &(&factor * &m[(prow, c)]);
            }
            b[rr] = b[rr].sub(&b[prow].scale(&factor));
        }
    }
    let mut x = vec![Affine::zero(); n];
    for col in (0..n).rev() {
        let prow = perm[col];
        let mut acc = b[prow].clone();
        for c in col + 1..n {
            acc = acc.sub(&x[c].scale(&m[(prow, c)]));
        }
        let inv = m[(prow, col)].inv()?;
        x[col] = acc.scale(&inv);
    }
    Ok(x)
}

/// Orbit parameter name for the orbit whose smallest puncture index is `j`
/// (0-based): the y coordinate of that puncture loop, 1-based.
pub fn orbit_param_name(g: usize, j: usize) -> String {
    format!("y{}", 2 * g + j + 1)
}

/// Solve for the deformation cocycle with z-part `z_scale * mu_s`.
///
/// `free_y` optionally binds the per-orbit free parameters by name; unbound
/// parameters stay symbolic. Bound values are checked against the surface
/// relator constraint when they determine it completely.
pub fn solve_deformation(
    input: &MappingTorusInput,
    z_scale: &QuadNum,
    free_y: &BTreeMap<String, QuadNum>,
) -> Result<DeformationCocycle, Error> {
    if z_scale.is_zero() {
        return Err(Error::Precondition {
            check: "solve_deformation".into(),
            message: "z_scale must be nonzero".into(),
        });
    }
    if !cohomology::eigenvalue_one_check(input) {
        return Err(Error::Precondition {
            check: "solve_deformation".into(),
            message: "closed-surface action has a unit eigenvalue".into(),
        });
    }
    let g = input.g;
    let m = input.num_gens();
    let bd = input.boundary_data()?;
    let system = build_system(input);
    let blocks = extract_blocks(&system, input);
    let act = cohomology::action_matrix(input);

    let valid_names: Vec<String> = bd
        .orbits
        .iter()
        .map(|o| orbit_param_name(g, o[0]))
        .collect();
    for name in free_y.keys() {
        if !valid_names.contains(name) {
            return Err(Error::Precondition {
                check: "solve_deformation".into(),
                message: format!("unknown free parameter {name}; expected one of {valid_names:?}"),
            });
        }
    }

    // z-part: the contraction eigenvector direction.
    let z: Vec<Affine> = input
        .mu_s
        .iter()
        .map(|b| Affine::constant(b * z_scale))
        .collect();

    // y-part: puncture coordinates are per-orbit parameters; the surface
    // coordinates solve the closed-surface block against them.
    let mut y = vec![Affine::zero(); m];
    for orbit in &bd.orbits {
        let name = orbit_param_name(g, orbit[0]);
        let value = match free_y.get(&name) {
            Some(v) => Affine::constant(v.clone()),
            None => Affine::symbol(&name),
        };
        for &j in orbit {
            y[2 * g + j] = value.clone();
        }
    }
    let dz: Vec<Affine> = (0..m)
        .map(|r| {
            let mut acc = Affine::zero();
            for c in 0..m {
                acc = acc.add(&z[c].scale(&blocks.d_block[(r, c)]));
            }
            acc
        })
        .collect();
    let surf_block = QMatrix::from_fn(2 * g, 2 * g, |r, c| {
        if r == c {
            &act[(r, c)] - &QuadNum::int(1)
        } else {
            act[(r, c)].clone()
        }
    });
    let rhs: Vec<Affine> = (0..2 * g)
        .map(|r| {
            let mut acc = dz[r].neg();
            for c in 2 * g..m {
                acc = acc.sub(&y[c].scale(&act[(r, c)]));
            }
            acc
        })
        .collect();
    let y_surface = solve_affine(&surf_block, &rhs)?;
    y[..2 * g].clone_from_slice(&y_surface);

    // The puncture rows of the y block must now hold identically.
    for r in 2 * g..m {
        let mut acc = dz[r].clone();
        for c in 0..m {
            let coeff = if r == c {
                &act[(r, c)] - &QuadNum::int(1)
            } else {
                act[(r, c)].clone()
            };
            acc = acc.add(&y[c].scale(&coeff));
        }
        if !acc.is_zero() {
            return Err(Error::SingularSolve(format!(
                "puncture row {r} of the y system does not close: {acc}"
            )));
        }
    }

    // x-part and y0: drop the pivot x column (gauge) and solve the square
    // system [action - lambda I | y0 column].
    let pivot = (0..2 * g)
        .rev()
        .find(|&i| !input.mu_u[i].is_zero())
        .ok_or_else(|| Error::SingularSolve("unstable measure vanishes".into()))?;
    let cols: Vec<usize> = (0..m).filter(|&c| c != pivot).collect();
    let xmat = QMatrix::from_fn(m, m, |r, c| {
        if c < cols.len() {
            blocks.x_block[(r, cols[c])].clone()
        } else {
            blocks.y0_col[r].clone()
        }
    });
    let ky: Vec<Affine> = (0..m)
        .map(|r| {
            let mut acc = Affine::zero();
            for c in 0..m {
                acc = acc.add(&y[c].scale(&blocks.k_block[(r, c)]));
            }
            acc
        })
        .collect();
    let cz: Vec<Affine> = (0..m)
        .map(|r| {
            let mut acc = Affine::zero();
            for c in 0..m {
                acc = acc.add(&z[c].scale(&blocks.c_block[(r, c)]));
            }
            acc
        })
        .collect();
    let rhs: Vec<Affine> = (0..m).map(|r| ky[r].add(&cz[r]).neg()).collect();
    let sol = solve_affine(&xmat, &rhs)?;
    let mut x = vec![Affine::zero(); m];
    for (idx, &c) in cols.iter().enumerate() {
        x[c] = sol[idx].clone();
    }
    let y0 = sol[m - 1].clone();

    // Surface relator rows at the solution: the z row vanishes identically,
    // the y row is the free-parameter constraint, and the x row must be
    // implied by it.
    let mut values = vec![Affine::zero(); system.layout.total()];
    for slot in 0..m {
        values[system.layout.x(slot)] = x[slot].clone();
        values[system.layout.y(slot)] = y[slot].clone();
        values[system.layout.z(slot)] = z[slot].clone();
    }
    values[system.layout.y0()] = y0.clone();
    let surface_rows = &system.relators.last().expect("surface relator").1;
    let row_x = surface_rows[0].eval_affine(&values);
    let row_y = surface_rows[1].eval_affine(&values);
    let row_z = surface_rows[2].eval_affine(&values);
    if !row_z.is_zero() {
        return Err(Error::SingularSolve(format!(
            "surface relator z row does not close: {row_z}"
        )));
    }
    if !affine_parallel(&row_x, &row_y) {
        return Err(Error::SingularSolve(format!(
            "surface relator x row is independent of the y row: {row_x} vs {row_y}"
        )));
    }
    let constraint = row_y;
    if constraint.is_constant() && !constraint.is_zero() {
        return Err(Error::InconsistentFreeValues(format!(
            "surface relator demands {constraint} = 0"
        )));
    }

    // Every conjugation row must close symbolically.
    for (name, rows) in &system.relators[..m] {
        for row in rows {
            let v = row.eval_affine(&values);
            if !v.is_zero() {
                return Err(Error::SingularSolve(format!(
                    "relator {name} does not close: {v}"
                )));
            }
        }
    }

    Ok(DeformationCocycle {
        x,
        y,
        z,
        x0: Affine::zero(),
        y0,
        z0: Affine::zero(),
        constraint,
        free_names: valid_names
            .into_iter()
            .filter(|n| !free_y.contains_key(n))
            .collect(),
        pivot,
    })
}

/// True when one affine form is an exact scalar multiple of the other.
fn affine_parallel(a: &Affine, b: &Affine) -> bool {
    if a.is_zero() || b.is_zero() {
        return a.is_zero();
    }
    let ratio = if !b.constant_part().is_zero() {
        a.constant_part().try_div(b.constant_part())
    } else {
        match b.symbols().next() {
            Some(n) => a.coeff(n).try_div(&b.coeff(n)),
            None => return false,
        }
    };
    let Ok(ratio) = ratio else {
        return false;
    };
    a.sub(&b.scale(&ratio)).is_zero()
}

/// Coboundary of u = (ux, uy, uz): gen |-> u - Ad(rho0(gen)) u, as a flat
/// unknown vector.
pub fn coboundary_vector(input: &MappingTorusInput, u: &[QuadNum; 3]) -> Vec<QuadNum> {
    let layout = UnknownLayout {
        num_gens: input.num_gens(),
    };
    let mut out = vec![QuadNum::zero(); layout.total()];
    let uvec = u.to_vec();
    for slot in 0..input.num_gens() {
        let gen = Gen::from_slot(slot, input.g, input.n);
        let img = ad_rho0(&Word::gen(gen), input).mul_vec(&uvec);
        out[layout.x(slot)] = &u[0] - &img[0];
        out[layout.y(slot)] = &u[1] - &img[1];
        out[layout.z(slot)] = &u[2] - &img[2];
    }
    let img = ad_rho0(&Word::gen(Gen::tau()), input).mul_vec(&uvec);
    out[layout.x0()] = &u[0] - &img[0];
    out[layout.y0()] = &u[1] - &img[1];
    out[layout.z0()] = &u[2] - &img[2];
    out
}

/// Independent homomorphism oracle over the dual numbers: checks that
/// gamma -> (I + eps z(gamma)) rho0(gamma) kills every relator, by direct
/// 2x2 matrix arithmetic with eps^2 = 0. Shares no code with the symbolic
/// cocycle evaluation above.
pub fn verify_cocycle(cocycle: &DeformationCocycle, input: &MappingTorusInput) -> bool {
    let layout = UnknownLayout {
        num_gens: input.num_gens(),
    };
    match cocycle.numeric_vector(&layout) {
        Ok(vals) => verify_cocycle_vector(&vals, input),
        Err(_) => false,
    }
}

/// Same oracle on a flat unknown vector.
pub fn verify_cocycle_vector(values: &[QuadNum], input: &MappingTorusInput) -> bool {
    let layout = UnknownLayout {
        num_gens: input.num_gens(),
    };
    let image = |l: &Letter| -> DualMat2 {
        let (rho, zmat) = if l.gen.class == GenClass::Tau {
            (
                mat2(
                    input.lambda.clone(),
                    QuadNum::zero(),
                    QuadNum::zero(),
                    QuadNum::int(1),
                ),
                sl2(
                    &values[layout.x0()],
                    &values[layout.y0()],
                    &values[layout.z0()],
                ),
            )
        } else {
            let slot = l.gen.slot(input.g, input.n);
            (
                mat2(
                    QuadNum::int(1),
                    input.mu_u[slot].clone(),
                    QuadNum::zero(),
                    QuadNum::int(1),
                ),
                sl2(
                    &values[layout.x(slot)],
                    &values[layout.y(slot)],
                    &values[layout.z(slot)],
                ),
            )
        };
        let d = DualMat2 {
            re: rho.clone(),
            eps: mat2_mul(&zmat, &rho),
        };
        if l.inv {
            dual_inverse(&d)
        } else {
            d
        }
    };
    for relator in input.relators() {
        let mut acc = DualMat2 {
            re: mat2_identity(),
            eps: mat2_zero(),
        };
        for l in relator.letters() {
            acc = dual_mul(&acc, &image(l));
        }
        if acc.re != mat2_identity() || acc.eps != mat2_zero() {
            return false;
        }
    }
    true
}

type Mat2 = [[QuadNum; 2]; 2];

struct DualMat2 {
    re: Mat2,
    eps: Mat2,
}

fn mat2(a: QuadNum, b: QuadNum, c: QuadNum, d: QuadNum) -> Mat2 {
    [[a, b], [c, d]]
}

fn sl2(x: &QuadNum, y: &QuadNum, z: &QuadNum) -> Mat2 {
    mat2(y.clone(), x.clone(), z.clone(), -y)
}

fn mat2_zero() -> Mat2 {
    mat2(
        QuadNum::zero(),
        QuadNum::zero(),
        QuadNum::zero(),
        QuadNum::zero(),
    )
}

fn mat2_identity() -> Mat2 {
    mat2(
        QuadNum::int(1),
        QuadNum::zero(),
        QuadNum::zero(),
        QuadNum::int(1),
    )
}

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| &(&a[r][0] * &b[0][c]) + &(&a[r][1] * &b[1][c]))
    })
}

fn mat2_inverse(a: &Mat2) -> Mat2 {
    let det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
    let inv = det.inv().expect("holonomy matrices are invertible");
    mat2(
        &a[1][1] * &inv,
        -&(&a[0][1] * &inv),
        -&(&a[1][0] * &inv),
        &a[0][0] * &inv,
    )
}

fn mat2_neg(a: &Mat2) -> Mat2 {
    std::array::from_fn(|r| std::array::from_fn(|c| -&a[r][c]))
}

fn dual_mul(a: &DualMat2, b: &DualMat2) -> DualMat2 {
    let re = mat2_mul(&a.re, &b.re);
    let eps1 = mat2_mul(&a.re, &b.eps);
    let eps2 = mat2_mul(&a.eps, &b.re);
    let eps = std::array::from_fn(|r| std::array::from_fn(|c| &eps1[r][c] + &eps2[r][c]));
    DualMat2 { re, eps }
}

fn dual_inverse(a: &DualMat2) -> DualMat2 {
    // (R + eps M)^-1 = R^-1 - eps R^-1 M R^-1
    let rinv = mat2_inverse(&a.re);
    let eps = mat2_neg(&mat2_mul(&mat2_mul(&rinv, &a.eps), &rinv));
    DualMat2 { re: rinv, eps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::genus2_fixture;

    fn qn(p: i64, q: i64, den: i64) -> QuadNum {
        QuadNum::new(21, p, q, den)
    }

    #[test]
    fn ad_of_single_letters() {
        let input = genus2_fixture();
        let a1 = &input.mu_u[0];
        let ad = ad_rho0(&Word::gen(Gen::alpha(1)), &input);
        assert_eq!(ad[(0, 0)], QuadNum::int(1));
        assert_eq!(ad[(0, 1)], -&a1.scale_int(2));
        assert_eq!(ad[(0, 2)], -&(a1 * a1));
        assert_eq!(ad[(1, 2)], a1.clone());
        // the puncture loop d1 has measure zero, so it acts trivially
        let ad_d1 = ad_rho0(&Word::gen(Gen::delta(1)), &input);
        assert_eq!(ad_d1, QMatrix::identity(3));
        // the circle generator acts diagonally
        let ad_t = ad_rho0(&Word::gen(Gen::tau()), &input);
        assert_eq!(ad_t[(0, 0)], input.lambda);
        assert_eq!(ad_t[(1, 1)], QuadNum::int(1));
        assert_eq!(ad_t[(2, 2)], input.lambda.inv().unwrap());
        assert_eq!(ad_rho0(&Word::empty(), &input), QMatrix::identity(3));
    }

    #[test]
    fn system_shape_and_dimensions() {
        let input = genus2_fixture();
        let system = build_system(&input);
        assert_eq!(system.num_equations(), 21);
        assert_eq!(system.layout.total(), 21);
        assert_eq!(system.nullity(), 5);
        assert_eq!(dim_h1(&system), 2);
    }

    #[test]
    fn coboundaries_are_cocycles() {
        let input = genus2_fixture();
        let system = build_system(&input);
        let basis = [
            [QuadNum::int(1), QuadNum::zero(), QuadNum::zero()],
            [QuadNum::zero(), QuadNum::int(1), QuadNum::zero()],
            [QuadNum::zero(), QuadNum::zero(), QuadNum::int(1)],
            [qn(1, 1, 2), qn(-3, 0, 1), qn(0, 5, 7)],
        ];
        for u in &basis {
            let v = coboundary_vector(&input, u);
            assert!(system.satisfied_by(&v));
            assert!(verify_cocycle_vector(&v, &input));
        }
    }

    #[test]
    fn coboundaries_span_three_dimensions() {
        let input = genus2_fixture();
        let rows: Vec<Vec<QuadNum>> = [
            [QuadNum::int(1), QuadNum::zero(), QuadNum::zero()],
            [QuadNum::zero(), QuadNum::int(1), QuadNum::zero()],
            [QuadNum::zero(), QuadNum::zero(), QuadNum::int(1)],
        ]
        .iter()
        .map(|u| coboundary_vector(&input, u))
        .collect();
        assert_eq!(QMatrix::from_rows(rows).rank(), 3);
    }

    #[test]
    fn unstable_direction_is_in_the_kernel() {
        let input = genus2_fixture();
        let system = build_system(&input);
        let layout = system.layout;
        let mut v = vec![QuadNum::zero(); layout.total()];
        for slot in 0..input.num_gens() {
            v[layout.x(slot)] = input.mu_u[slot].clone();
        }
        assert!(system.satisfied_by(&v));
    }

    #[test]
    fn block_structure_matches_the_action() {
        let input = genus2_fixture();
        let system = build_system(&input);
        let blocks = extract_blocks(&system, &input);
        let act = cohomology::action_matrix(&input);
        let m = input.num_gens();
        assert_eq!(blocks.x_block, act.sub_scalar_diag(&input.lambda));
        for r in 0..m {
            let expect = -&(&input.lambda.scale_int(2) * &input.mu_u[r]);
            assert_eq!(blocks.y0_col[r], expect);
        }
        assert_eq!(blocks.k_block, blocks.d_block.scale(&QuadNum::int(-2)));
        // z rows carry action - lambda^-1 I on the z part and nothing else
        let layout = system.layout;
        let lam_inv = input.lambda.inv().unwrap();
        for r in 0..m {
            let zrow = &system.relators[r].1[2];
            for c in 0..m {
                let expect = if r == c {
                    &act[(r, c)] - &lam_inv
                } else {
                    act[(r, c)].clone()
                };
                assert_eq!(zrow.coeff(layout.z(c)), expect);
                assert!(zrow.coeff(layout.x(c)).is_zero());
                assert!(zrow.coeff(layout.y(c)).is_zero());
            }
        }
    }

    #[test]
    fn solve_produces_a_cocycle() {
        let input = genus2_fixture();
        let cocycle = solve_deformation(&input, &QuadNum::int(1), &BTreeMap::new()).unwrap();
        assert_eq!(cocycle.free_names, vec!["y5", "y6"]);
        assert_eq!(cocycle.pivot, 3);
        assert!(cocycle.x[3].is_zero());
        assert!(cocycle.x0.is_zero() && cocycle.z0.is_zero());

        let con = &cocycle.constraint;
        assert!(!con.is_constant());
        let c5 = con.coeff("y5");
        let c6 = con.coeff("y6");
        assert!(!c5.is_zero() && !c6.is_zero());
        let y5 = qn(1, -1, 3);
        let y6 = (-&(con.constant_part() + &(&c5 * &y5))).try_div(&c6).unwrap();
        let mut vals = BTreeMap::new();
        vals.insert("y5".to_string(), y5);
        vals.insert("y6".to_string(), y6);
        let numeric = cocycle.substitute(&vals);
        assert!(numeric.is_numeric());
        assert!(numeric.constraint.is_zero());
        assert!(verify_cocycle(&numeric, &input));

        let mut bad = BTreeMap::new();
        bad.insert("y5".to_string(), QuadNum::int(0));
        bad.insert("y6".to_string(), QuadNum::int(1));
        assert!(matches!(
            solve_deformation(&input, &QuadNum::int(1), &bad),
            Err(Error::InconsistentFreeValues(_))
        ));
    }

    #[test]
    fn oracle_rejects_perturbations() {
        let input = genus2_fixture();
        let cocycle = solve_deformation(&input, &QuadNum::int(1), &BTreeMap::new()).unwrap();
        let con = &cocycle.constraint;
        let y6 = (-con.constant_part()).try_div(&con.coeff("y6")).unwrap();
        let mut vals = BTreeMap::new();
        vals.insert("y5".to_string(), QuadNum::zero());
        vals.insert("y6".to_string(), y6);
        let numeric = cocycle.substitute(&vals);
        let layout = UnknownLayout {
            num_gens: input.num_gens(),
        };
        let good = numeric.numeric_vector(&layout).unwrap();
        assert!(verify_cocycle_vector(&good, &input));
        for i in 0..layout.total() {
            let mut bad = good.clone();
            bad[i] = &bad[i] + &QuadNum::int(1);
            assert!(
                !verify_cocycle_vector(&bad, &input),
                "perturbation of unknown {i} went undetected"
            );
        }
    }
}
