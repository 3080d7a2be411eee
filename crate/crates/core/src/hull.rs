//! Polytopes in V-representation: LP membership, rays, Euclidean projection
//! (Wolfe's minimum-norm-point method) and distances in polyhedral norms.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::norms::{unit_ball_vertices, NormSpec};
use crate::perm_group::PermutationGroup;

/// Residual threshold for LP hull membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `conv(generators)`, or `conv(±generators)` when `absolutely_convex`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexBody {
    pub generators: Vec<Vec<f64>>,
    #[serde(default)]
    pub absolutely_convex: bool,
}

fn lp_err(e: minilp::Error) -> Error {
    Error::Lp(e.to_string())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConvexBody {
    pub fn new(generators: Vec<Vec<f64>>, absolutely_convex: bool) -> Result<Self> {
        let body = Self { generators, absolutely_convex };
        body.validate()?;
        Ok(body)
    }

    /// The absolutely convex body generated by the unit-ball vertices of `spec`.
    pub fn unit_ball(spec: &NormSpec, n: usize) -> Result<Self> {
        Self::new(unit_ball_vertices(spec, n)?, true)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .generators
            .first()
            .ok_or_else(|| Error::PreconditionFailed("body has no generators".into()))?;
        for p in &self.generators {
            check_dim(first.len(), p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::PreconditionFailed("non-finite generator".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    /// Points whose convex hull is the body.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut pts = self.generators.clone();
        if self.absolutely_convex {
            pts.extend(self.generators.iter().map(|p| p.iter().map(|v| -v).collect::<Vec<_>>()));
        }
        pts
    }

    /// `sup { <f, x> : x ∈ body }`.
    pub fn support(&self, f: &[f64]) -> f64 {
        self.points().iter().map(|p| dot(f, p)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimal L1 residual `‖x − Σ λ_i p_i‖₁` over convex weights λ.
    pub fn membership_residual(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let n = self.dim();
        let pts = self.points();
        let mut pb = Problem::new(OptimizationDirection::Minimize);
        let lam: Vec<Variable> = pts.iter().map(|_| pb.add_var(0.0, (0.0, f64::INFINITY))).collect();
        for i in 0..n {
            let sp = pb.add_var(1.0, (0.0, f64::INFINITY));
            let sm = pb.add_var(1.0, (0.0, f64::INFINITY));
            let mut row: Vec<(Variable, f64)> = pts
                .iter()
                .zip(&lam)
                .filter(|(p, _)| p[i] != 0.0)
                .map(|(p, &v)| (v, p[i]))
                .collect();
            row.push((sp, 1.0));
            row.push((sm, -1.0));
            pb.add_constraint(row.as_slice(), ComparisonOp::Eq, x[i]);
        }
        let ones: Vec<(Variable, f64)> = lam.iter().map(|&v| (v, 1.0)).collect();
        let op = if self.absolutely_convex { ComparisonOp::Le } else { ComparisonOp::Eq };
        pb.add_constraint(ones.as_slice(), op, 1.0);
        let sol = pb.solve().map_err(lp_err)?;
        Ok(sol.objective().max(0.0))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.membership_residual(x)? <= tol)
    }

    /// `max { t ≥ 0 : t·d ∈ body }`, or `None` when even `t = 0` is infeasible.
    pub fn ray_max(&self, d: &[f64]) -> Result<Option<f64>> {
        check_dim(self.dim(), d.len())?;
        let pts = self.points();
        let mut pb = Problem::new(OptimizationDirection::Maximize);
        let lam: Vec<Variable> = pts.iter().map(|_| pb.add_var(0.0, (0.0, f64::INFINITY))).collect();
        let t = pb.add_var(1.0, (0.0, f64::INFINITY));
        for i in 0..self.dim() {
            let mut row: Vec<(Variable, f64)> = pts
                .iter()
                .zip(&lam)
                .filter(|(p, _)| p[i] != 0.0)
                .map(|(p, &v)| (v, p[i]))
                .collect();
            row.push((t, -d[i]));
            pb.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
        }
        let ones: Vec<(Variable, f64)> = lam.iter().map(|&v| (v, 1.0)).collect();
        let op = if self.absolutely_convex { ComparisonOp::Le } else { ComparisonOp::Eq };
        pb.add_constraint(ones.as_slice(), op, 1.0);
        match pb.solve() {
            Ok(sol) => Ok(Some(sol[t])),
            Err(minilp::Error::Unbounded) => Ok(Some(f64::INFINITY)),
            Err(minilp::Error::Infeasible) => Ok(None),
        }
    }

    /// Whether `g(body) = body` for all `g`, checked on the group generators by LP.
    pub fn is_invariant(&self, g: &PermutationGroup) -> Result<bool> {
        check_dim(self.dim(), g.degree())?;
        for gen in g.generators() {
            for p in &self.generators {
                if !self.contains(&gen.apply_unchecked(p), MEMBERSHIP_TOL)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Euclidean projection of `x0` onto the body and the distance.
    pub fn nearest_point(&self, x0: &[f64]) -> Result<(Vec<f64>, f64)> {
        check_dim(self.dim(), x0.len())?;
        let shifted: Vec<Vec<f64>> = self
            .points()
            .into_iter()
            .map(|p| p.iter().zip(x0).map(|(a, b)| a - b).collect())
            .collect();
        let y = min_norm_point(&shifted);
        let dist = dot(&y, &y).sqrt();
        Ok((y.iter().zip(x0).map(|(a, b)| a + b).collect(), dist))
    }

    /// `min { ‖x0 − y‖ : y ∈ body }` for a polyhedral norm, with a functional
    /// `f`, `‖f‖* ≤ 1`, such that `f(x0) − sup_body f` equals the distance.
    pub fn polyhedral_distance(&self, x0: &[f64], spec: &NormSpec) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim(), x0.len())?;
        let n = self.dim();
        let verts = unit_ball_vertices(spec, n)?;
        let mut pb = Problem::new(OptimizationDirection::Maximize);
        let f: Vec<Variable> = x0
            .iter()
            .map(|&c| pb.add_var(c, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        let t = pb.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY));
        for p in self.points() {
            let mut row: Vec<(Variable, f64)> =
                f.iter().zip(&p).filter(|(_, c)| **c != 0.0).map(|(&v, &c)| (v, c)).collect();
            row.push((t, -1.0));
            pb.add_constraint(row.as_slice(), ComparisonOp::Le, 0.0);
        }
        for v in &verts {
            let row: Vec<(Variable, f64)> =
                f.iter().zip(v).filter(|(_, c)| **c != 0.0).map(|(&fv, &c)| (fv, c)).collect();
            pb.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
            pb.add_constraint(row.as_slice(), ComparisonOp::Ge, -1.0);
        }
        let sol = pb.solve().map_err(lp_err)?;
        let fv: Vec<f64> = f.iter().map(|&v| sol[v]).collect();
        Ok((sol.objective().max(0.0), fv))
    }
}

/// Affine minimizer of `‖Σ α_k p_k‖` with `Σ α_k = 1` over the points `idx`.
fn affine_min(points: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    if k == 1 {
        return vec![1.0];
    }
    let n = points[0].len();
    let p0 = &points[idx[0]];
    let q = DMatrix::from_fn(n, k - 1, |r, c| points[idx[c + 1]][r] - p0[r]);
    let rhs = DVector::from_iterator(n, p0.iter().map(|v| -v));
    let svd = q.svd(true, true);
    let beta = svd.solve(&rhs, 1e-13).expect("svd solve");
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}

/// Wolfe's algorithm: the point of `conv(points)` closest to the origin.
pub fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points[0].len();
    let norms: Vec<f64> = points.iter().map(|p| dot(p, p)).collect();
    let scale = norms.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let start = (0..points.len())
        .min_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap().then(a.cmp(&b)))
        .unwrap();
    let mut set = vec![start];
    let mut lam = vec![1.0];
    let combine = |set: &[usize], lam: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (&i, &l) in set.iter().zip(lam) {
            for r in 0..n {
                x[r] += l * points[i][r];
            }
        }
        x
    };
    let mut x = points[start].clone();
    for _ in 0..(50 * points.len() + 100) {
        let xx = dot(&x, &x);
        if xx <= 1e-30 * scale {
            break;
        }
        let (j, v) = (0..points.len())
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            .unwrap();
        if xx - v <= 1e-14 * scale || set.contains(&j) {
            break;
        }
        set.push(j);
        lam.push(0.0);
        let mut stuck = false;
        for _ in 0..(set.len() + 5) {
            let alpha = affine_min(points, &set);
            if alpha.iter().all(|&a| a > 1e-15) {
                lam = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lam.iter().zip(&alpha) {
                if *a <= 1e-15 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let keep: Vec<usize> = (0..set.len()).filter(|&k| lam[k] > 1e-15).collect();
            if keep.len() == set.len() {
                stuck = true;
                break;
            }
            set = keep.iter().map(|&k| set[k]).collect();
            lam = keep.iter().map(|&k| lam[k]).collect();
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
        }
        let next = combine(&set, &lam);
        if stuck || dot(&next, &next) > xx * (1.0 + 1e-12) {
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_vec, rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn nearest_point_examples() {
        let seg = ConvexBody::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        let (p, d) = seg.nearest_point(&[2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 2f64.sqrt(), epsilon = 1e-12);
        let l1 = ConvexBody::unit_ball(&NormSpec::L1, 2).unwrap();
        let (p, d) = l1.nearest_point(&[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        let (_, d) = l1.nearest_point(&[0.2, 0.3]).unwrap();
        assert!(d <= 1e-9);
    }

    /// Brute-force projection oracle: minimize over the simplex by sampling
    /// edges, which is exact for segments and polygons in the plane.
    #[test]
    fn wolfe_matches_edge_projection_in_plane() {
        let mut r = rng(17);
        for _ in 0..200 {
            let pts: Vec<Vec<f64>> = (0..5).map(|_| random_vec(&mut r, 2, 1.0)).collect();
            let x0 = random_vec(&mut r, 2, 3.0);
            let body = ConvexBody::new(pts.clone(), false).unwrap();
            let (_, d) = body.nearest_point(&x0).unwrap();
            let mut best = f64::INFINITY;
            for a in &pts {
                for b in &pts {
                    let ab = [b[0] - a[0], b[1] - a[1]];
                    let len = ab[0] * ab[0] + ab[1] * ab[1];
                    let t = if len == 0.0 { 0.0 } else {
                        (((x0[0] - a[0]) * ab[0] + (x0[1] - a[1]) * ab[1]) / len).clamp(0.0, 1.0)
                    };
                    let p = [a[0] + t * ab[0] - x0[0], a[1] + t * ab[1] - x0[1]];
                    best = best.min((p[0] * p[0] + p[1] * p[1]).sqrt());
                }
            }
            if body.contains(&x0, 1e-12).unwrap() {
                best = 0.0;
            }
            assert_abs_diff_eq!(d, best, epsilon = 1e-9);
        }
    }

    #[test]
    fn membership_and_rays() {
        let simplex = ConvexBody::new(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            false,
        )
        .unwrap();
        assert!(simplex.contains(&[1.0 / 3.0; 3], MEMBERSHIP_TOL).unwrap());
        assert!(!simplex.contains(&[0.5, 0.5, 0.5], MEMBERSHIP_TOL).unwrap());
        let cube = ConvexBody::unit_ball(&NormSpec::Linf, 2).unwrap();
        assert_abs_diff_eq!(cube.ray_max(&[2.0, 1.0]).unwrap().unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(simplex.ray_max(&[1.0, 0.0, 0.0]).unwrap().unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(simplex.ray_max(&[0.0, 0.0, -1.0]).unwrap(), None);
    }

    #[test]
    fn polyhedral_distance_matches_direct_norm() {
        let cube = ConvexBody::unit_ball(&NormSpec::Linf, 2).unwrap();
        let (d, f) = cube.polyhedral_distance(&[3.0, 0.5], &NormSpec::L1).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-9);
        let margin = dot(&f, &[3.0, 0.5]) - cube.support(&f);
        assert_abs_diff_eq!(margin, d, epsilon = 1e-9);
        let (d, _) = cube.polyhedral_distance(&[3.0, 3.0], &NormSpec::L1).unwrap();
        assert_abs_diff_eq!(d, 4.0, epsilon = 1e-9);
        let (d, _) = cube.polyhedral_distance(&[3.0, 3.0], &NormSpec::Linf).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn body_invariance() {
        let g = PermutationGroup::symmetric(2).unwrap();
        assert!(ConvexBody::unit_ball(&NormSpec::Linf, 2).unwrap().is_invariant(&g).unwrap());
        let seg = ConvexBody::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        assert!(!seg.is_invariant(&g).unwrap());
    }
}
