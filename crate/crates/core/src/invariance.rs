//! Group averages of points, functionals and operators, the fixed subspace
//! X_G, and invariance tests.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::attainment::operator_norm;
use crate::error::{check_dim, Error, Result};
use crate::hull::{ConvexBody, MEMBERSHIP_TOL};
use crate::norms::{is_norm_invariant, unit_ball_vertices, NormSpec};
use crate::perm_group::{orbits, Permutation, PermutationGroup};
use crate::tol;

/// A linear map `(ℝⁿ, domain) → (ℝᵐ, codomain)` stored as an m×n matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<f64>,
    domain: NormSpec,
    codomain: NormSpec,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    matrix: Vec<Vec<f64>>,
    domain: NormSpec,
    codomain: NormSpec,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr {
            matrix: self.rows_vec(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OperatorRepr::deserialize(d)?;
        Operator::from_rows(&r.matrix, r.domain, r.codomain).map_err(serde::de::Error::custom)
    }
}

impl Operator {
    pub fn new(matrix: DMatrix<f64>, domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        domain.validate(Some(matrix.ncols()))?;
        codomain.validate(Some(matrix.nrows()))?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::PreconditionFailed("operator has non-finite entries".into()));
        }
        Ok(Self { matrix, domain, codomain })
    }

    /// Row-major construction; `n` is taken from the first row.
    pub fn from_rows(rows: &[Vec<f64>], domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(domain.dim().unwrap_or(0), Vec::len);
        for r in rows {
            check_dim(n, r.len())?;
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]), domain, codomain)
    }

    pub fn zero(m: usize, n: usize, domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        Self::new(DMatrix::zeros(m, n), domain, codomain)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &NormSpec {
        &self.domain
    }

    pub fn codomain(&self) -> &NormSpec {
        &self.codomain
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn rows_vec(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.matrix.row(i).iter().copied().collect()
    }

    /// Same norms, new matrix.
    pub fn with_matrix(&self, matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix, self.domain.clone(), self.codomain.clone())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }

    /// The adjoint applied to a functional on the codomain.
    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows(), y.len())?;
        Ok((0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.matrix[(i, j)] * y[i]).sum())
            .collect())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `(1/|G|) Σ_g g(x)`.
pub fn symmetrize_point(x: &[f64], g: &PermutationGroup) -> Result<Vec<f64>> {
    check_dim(g.degree(), x.len())?;
    let mut acc = vec![0.0; x.len()];
    for e in g.elements() {
        for (a, v) in acc.iter_mut().zip(e.apply_unchecked(x)) {
            *a += v;
        }
    }
    let w = g.haar_weight();
    Ok(acc.into_iter().map(|a| a * w).collect())
}

/// The coefficients of `x ↦ (1/|G|) Σ_g f(g(x))`.
pub fn symmetrize_functional(f: &[f64], g: &PermutationGroup) -> Result<Vec<f64>> {
    check_dim(g.degree(), f.len())?;
    // f(g(x)) = <M(g)ᵀ f, x> and M(g)ᵀ f = apply(g⁻¹, f)
    let mut acc = vec![0.0; f.len()];
    for e in g.elements() {
        for (a, v) in acc.iter_mut().zip(e.inverse().apply_unchecked(f)) {
            *a += v;
        }
    }
    let w = g.haar_weight();
    Ok(acc.into_iter().map(|a| a * w).collect())
}

/// `x ↦ (1/|G|) Σ_g T(g(x))`, computed row by row.
pub fn symmetrize_operator(t: &Operator, g: &PermutationGroup) -> Result<Operator> {
    check_dim(g.degree(), t.cols())?;
    let mut m = DMatrix::zeros(t.rows(), t.cols());
    for i in 0..t.rows() {
        let row = symmetrize_functional(&t.row(i), g)?;
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    t.with_matrix(m)
}

/// X_G with its orbit-indicator basis and the averaging projector.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedSubspace {
    pub basis: Vec<Vec<f64>>,
    pub projector: DMatrix<f64>,
}

impl FixedSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn fixed_subspace(g: &PermutationGroup) -> FixedSubspace {
    let n = g.degree();
    let basis = orbits(g)
        .blocks
        .iter()
        .map(|b| {
            let c = 1.0 / (b.len() as f64).sqrt();
            let mut v = vec![0.0; n];
            for &i in b {
                v[i] = c;
            }
            v
        })
        .collect();
    let mut projector = DMatrix::zeros(n, n);
    for e in g.elements() {
        projector += e.matrix();
    }
    projector *= g.haar_weight();
    FixedSubspace { basis, projector }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= tol::INVARIANCE * scale.max(1.0)
}

/// `T·M(g) = T` for every group element.
pub fn is_invariant_operator(t: &Operator, g: &PermutationGroup) -> Result<bool> {
    check_dim(g.degree(), t.cols())?;
    let scale = t.max_abs_entry();
    for e in g.elements() {
        let tm = t.matrix() * e.matrix();
        if tm.iter().zip(t.matrix().iter()).any(|(a, b)| !close(*a, *b, scale)) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_invariant_point(x: &[f64], g: &PermutationGroup) -> Result<bool> {
    check_dim(g.degree(), x.len())?;
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(g.elements().iter().all(|e| {
        e.apply_unchecked(x)
            .iter()
            .zip(x)
            .all(|(a, b)| close(*a, *b, scale))
    }))
}

/// `f ∘ g = f` for every group element.
pub fn is_invariant_functional(f: &[f64], g: &PermutationGroup) -> Result<bool> {
    check_dim(g.degree(), f.len())?;
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(g.elements().iter().all(|e| {
        e.inverse()
            .apply_unchecked(f)
            .iter()
            .zip(f)
            .all(|(a, b)| close(*a, *b, scale))
    }))
}

/// Setwise `g(points) = points`, matching within the invariance tolerance.
pub fn is_invariant_set(points: &[Vec<f64>], g: &PermutationGroup) -> Result<bool> {
    for p in points {
        check_dim(g.degree(), p.len())?;
    }
    let scale = points
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for e in g.generators() {
        for p in points {
            let gp = e.apply_unchecked(p);
            let found = points
                .iter()
                .any(|q| q.iter().zip(&gp).all(|(a, b)| close(*a, *b, scale)));
            if !found {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Invariance of `T` against invariance of every `T*(e_i*)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointReport {
    pub operator_invariant: bool,
    pub adjoint_images_invariant: bool,
    /// The bidual statement coincides with the first one in finite dimension.
    pub bidual: String,
    pub agree: bool,
    /// `(g, i)`: `T*(e_i*) ∘ g ≠ T*(e_i*)`, with `i` 1-based.
    pub witness: Option<(Permutation, usize)>,
}

pub fn adjoint_invariance_equivalence(t: &Operator, g: &PermutationGroup) -> Result<AdjointReport> {
    let a = is_invariant_operator(t, g)?;
    let scale = t.max_abs_entry();
    let mut witness = None;
    'outer: for i in 0..t.rows() {
        let mut ei = vec![0.0; t.rows()];
        ei[i] = 1.0;
        let f = t.adjoint_apply(&ei)?;
        for e in g.elements() {
            let fg = e.inverse().apply_unchecked(&f);
            if fg.iter().zip(&f).any(|(x, y)| !close(*x, *y, scale)) {
                witness = Some((e.clone(), i + 1));
                break 'outer;
            }
        }
    }
    let b = witness.is_none();
    Ok(AdjointReport {
        operator_invariant: a,
        adjoint_images_invariant: b,
        bidual: "collapsed".into(),
        agree: a == b,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormingReport {
    pub operator_norm: f64,
    pub invariant_ball_sup: f64,
    pub defect: f64,
    pub points_checked: usize,
}

/// `‖T‖ − sup { ‖Tx‖ : x ∈ B_X ∩ X_G }` for invariant `T`.
///
/// For polyhedral domains `B_X ∩ X_G` is the image of `B_X` under the
/// averaging projector (a norm-one projection onto X_G), so its vertices are
/// among the projected ball vertices. For L2 the sup is the top singular value
/// of `T` restricted to X_G.
pub fn norming_check(t: &Operator, g: &PermutationGroup) -> Result<NormingReport> {
    if !is_invariant_operator(t, g)? {
        return Err(Error::NotInvariant);
    }
    if !is_norm_invariant(t.domain(), g)?.invariant {
        return Err(Error::NormNotInvariant);
    }
    let full = operator_norm(t)?.operator_norm;
    let fs = fixed_subspace(g);
    let (sup, count) = if t.domain().is_polyhedral() {
        let verts = unit_ball_vertices(t.domain(), t.cols())?;
        let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut sup = 0.0f64;
        for v in &verts {
            let pv = symmetrize_point(v, g)?;
            let key: Vec<i64> = pv.iter().map(|c| (c * 1e10).round() as i64).collect();
            if seen.insert(key) {
                let tx = t.apply_unchecked(&pv);
                sup = sup.max(crate::norms::norm(&tx, t.codomain())?);
            }
        }
        (sup, seen.len())
    } else if matches!(t.domain(), NormSpec::L2) {
        let k = fs.dim();
        let q = DMatrix::from_fn(t.cols(), k, |i, j| fs.basis[j][i]);
        let restricted = Operator::new(t.matrix() * q, NormSpec::L2, t.codomain().clone())?;
        (operator_norm(&restricted)?.operator_norm, k)
    } else {
        return Err(Error::UnsupportedDomain(t.domain().name().into()));
    };
    Ok(NormingReport {
        operator_norm: full,
        invariant_ball_sup: sup,
        defect: full - sup,
        points_checked: count,
    })
}

/// Membership of the average of `z` in an invariant body `c` containing `z`.
pub fn convex_membership_after_symmetrization(
    c: &ConvexBody,
    g: &PermutationGroup,
    z: &[f64],
) -> Result<bool> {
    if !c.is_invariant(g)? {
        return Err(Error::PreconditionFailed("body is not G-invariant".into()));
    }
    if !c.contains(z, MEMBERSHIP_TOL)? {
        return Err(Error::PreconditionFailed("z is not in the body".into()));
    }
    c.contains(&symmetrize_point(z, g)?, MEMBERSHIP_TOL)
}
