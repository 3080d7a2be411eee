//! Hahn–Banach separation of points from polytopes, plain and G-invariant,
//! with margins, Minkowski functionals and invariant supporting functionals.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hull::ConvexBody;
use crate::invariance::{is_invariant_point, symmetrize_functional, symmetrize_point};
use crate::norms::{dual_norm, is_norm_invariant, norm, supporting_functional, NormSpec};
use crate::perm_group::PermutationGroup;
use crate::tol;

/// Below this Euclidean distance a point counts as inside the body.
pub const INSIDE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub functional: Vec<f64>,
    pub margin: f64,
    pub sup_over_c: f64,
    pub value_at_x0: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SeparationResult {
    fn evaluate(c: &ConvexBody, f: Vec<f64>, x0: &[f64]) -> Self {
        let sup_over_c = c.support(&f);
        let value_at_x0 = dot(&f, x0);
        Self { margin: value_at_x0 - sup_over_c, functional: f, sup_over_c, value_at_x0 }
    }

    /// The same separator scaled to unit dual norm for `spec`.
    pub fn normalized(&self, spec: &NormSpec) -> Result<Self> {
        let d = dual_norm(&self.functional, spec)?;
        if d == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            functional: self.functional.iter().map(|v| v / d).collect(),
            margin: self.margin / d,
            sup_over_c: self.sup_over_c / d,
            value_at_x0: self.value_at_x0 / d,
        })
    }
}

/// Euclidean projection onto `C` and the distance.
pub fn nearest_point(c: &ConvexBody, x0: &[f64]) -> Result<(Vec<f64>, f64)> {
    c.nearest_point(x0)
}

/// Separator `(x0 − P_C x0)/‖x0 − P_C x0‖₂`.
pub fn separate(c: &ConvexBody, x0: &[f64]) -> Result<SeparationResult> {
    let (proj, distance) = c.nearest_point(x0)?;
    if distance <= INSIDE_TOL {
        return Err(Error::PointInsideBody { distance });
    }
    let f: Vec<f64> = x0.iter().zip(&proj).map(|(a, b)| (a - b) / distance).collect();
    Ok(SeparationResult::evaluate(c, f, x0))
}

fn check_invariant_inputs(c: &ConvexBody, g: &PermutationGroup, x0: &[f64]) -> Result<()> {
    check_dim(c.dim(), x0.len())?;
    check_dim(c.dim(), g.degree())?;
    if !c.is_invariant(g)? {
        return Err(Error::BodyNotInvariant);
    }
    if !is_invariant_point(x0, g)? {
        return Err(Error::PointNotInvariant);
    }
    Ok(())
}

/// Symmetrization of the classical separator; `f(x0)` is unchanged and
/// `sup_C f` can only drop, so the margin stays positive.
pub fn separate_invariant(c: &ConvexBody, g: &PermutationGroup, x0: &[f64]) -> Result<SeparationResult> {
    check_invariant_inputs(c, g, x0)?;
    let classical = separate(c, x0)?;
    let f = symmetrize_functional(&classical.functional, g)?;
    Ok(SeparationResult::evaluate(c, f, x0))
}

/// Distance from `x0` to `C` in `spec` with a functional `f`, `‖f‖* ≤ 1`,
/// attaining it as `f(x0) − sup_C f`.
pub fn ambient_distance(c: &ConvexBody, x0: &[f64], spec: &NormSpec) -> Result<(f64, Vec<f64>)> {
    spec.validate(Some(c.dim()))?;
    if spec.is_polyhedral() {
        return c.polyhedral_distance(x0, spec);
    }
    if matches!(spec, NormSpec::L2) {
        let (proj, d) = c.nearest_point(x0)?;
        if d == 0.0 {
            return Ok((0.0, vec![0.0; x0.len()]));
        }
        return Ok((d, x0.iter().zip(&proj).map(|(a, b)| (a - b) / d).collect()));
    }
    Err(Error::UnsupportedDomain(format!("distance in {}", spec.name())))
}

/// Invariant `x*` with `‖x*‖* = 1` and `x*(x0) > sup_C x* + δ`, where the
/// distance is measured in the invariant ambient norm.
pub fn separate_with_margin(
    c: &ConvexBody,
    g: &PermutationGroup,
    x0: &[f64],
    delta: f64,
    ambient: &NormSpec,
) -> Result<SeparationResult> {
    if !(delta >= 0.0) {
        return Err(Error::PreconditionFailed(format!("delta must be nonnegative, got {delta}")));
    }
    check_invariant_inputs(c, g, x0)?;
    if !is_norm_invariant(ambient, g)?.invariant {
        return Err(Error::NormNotInvariant);
    }
    let (distance, f) = ambient_distance(c, x0, ambient)?;
    if distance <= delta || distance <= INSIDE_TOL {
        return Err(Error::MarginInfeasible { distance, delta });
    }
    let fs = symmetrize_functional(&f, g)?;
    SeparationResult::evaluate(c, fs, x0).normalized(ambient)
}

/// Whether `±t·e_i ∈ D` for some `t > 0` and every `i`.
pub fn origin_interior(d: &ConvexBody) -> Result<bool> {
    let n = d.dim();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            match d.ray_max(&e)? {
                Some(t) if t > 1e-9 => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// `μ_D(x) = inf { λ > 0 : x ∈ λD } = 1 / max { t : t·x ∈ D }`.
pub fn minkowski_functional(d: &ConvexBody, x: &[f64]) -> Result<f64> {
    check_dim(d.dim(), x.len())?;
    if !origin_interior(d)? {
        return Err(Error::OriginNotInterior);
    }
    if x.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let t = d.ray_max(x)?.ok_or(Error::OriginNotInterior)?;
    Ok(1.0 / t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SupportOutcome {
    /// Invariant `f` with `f(x) = 1 = ‖f‖*`.
    Functional { functional: Vec<f64>, value_at_x: f64, dual_norm: f64 },
    /// The orbit hull leaves the sphere: its barycenter has norm below 1.
    HullOffSphere { barycenter: Vec<f64>, barycenter_norm: f64 },
}

/// Invariant supporting functional at a unit vector `x`, which exists iff the
/// orbit barycenter `x̄` has norm 1.
pub fn invariant_supporting_functional(x: &[f64], g: &PermutationGroup, spec: &NormSpec) -> Result<SupportOutcome> {
    check_dim(g.degree(), x.len())?;
    let nx = norm(x, spec)?;
    if (nx - 1.0).abs() > tol::NORM_REL {
        return Err(Error::NotUnitVector(nx));
    }
    if !is_norm_invariant(spec, g)?.invariant {
        return Err(Error::NormNotInvariant);
    }
    let bar = symmetrize_point(x, g)?;
    let nb = norm(&bar, spec)?;
    if (nb - 1.0).abs() > tol::NORM_REL {
        return Ok(SupportOutcome::HullOffSphere { barycenter: bar, barycenter_norm: nb });
    }
    let f = symmetrize_functional(&supporting_functional(&bar, spec)?, g)?;
    Ok(SupportOutcome::Functional {
        value_at_x: dot(&f, x),
        dual_norm: dual_norm(&f, spec)?,
        functional: f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::unit_ball_vertices;
    use crate::random::{random_group, random_vec, rng, GroupShape};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn linf_ball() -> ConvexBody {
        ConvexBody::unit_ball(&NormSpec::Linf, 2).unwrap()
    }

    fn swap() -> PermutationGroup {
        PermutationGroup::symmetric(2).unwrap()
    }

    #[test]
    fn nearest_point_examples() {
        let seg = ConvexBody::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        let (p, d) = nearest_point(&seg, &[2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 2f64.sqrt(), epsilon = 1e-12);
        let l1 = ConvexBody::unit_ball(&NormSpec::L1, 2).unwrap();
        let (p, d) = nearest_point(&l1, &[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nearest_point(&l1, &[0.2, 0.3]).unwrap().1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn separate_examples() {
        let sq = linf_ball();
        let r = separate(&sq, &[2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(r.functional[0], r.functional[1], epsilon = 1e-12);
        assert!(r.margin > 0.0);
        let origin = ConvexBody::new(vec![vec![0.0, 0.0]], false).unwrap();
        let r = separate(&origin, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r.functional[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.margin, 1.0, epsilon = 1e-12);
        assert!(matches!(separate(&sq, &[1.0, 0.5]), Err(Error::PointInsideBody { .. })));
    }

    #[test]
    fn separate_invariant_examples() {
        let sq = linf_ball();
        let r = separate_invariant(&sq, &swap(), &[2.0, 2.0]).unwrap().normalized(&NormSpec::Linf).unwrap();
        assert_abs_diff_eq!(r.functional[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.functional[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.margin, 1.0, epsilon = 1e-12);
        assert_eq!(separate_invariant(&sq, &swap(), &[1.5, -1.5]), Err(Error::PointNotInvariant));
        let lopsided = ConvexBody::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        assert_eq!(separate_invariant(&lopsided, &swap(), &[2.0, 2.0]), Err(Error::BodyNotInvariant));
        let triv = PermutationGroup::trivial(2);
        assert_eq!(separate_invariant(&sq, &triv, &[3.0, 1.0]).unwrap(), separate(&sq, &[3.0, 1.0]).unwrap());
    }

    #[test]
    fn swap_obstruction() {
        let mut r = rng(5);
        for _ in 0..100 {
            let f = symmetrize_functional(&random_vec(&mut r, 2, 10.0), &swap()).unwrap();
            for t in -10..=10 {
                let t = t as f64;
                assert!(dot(&f, &[t, -t]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn margin_examples() {
        let origin = ConvexBody::new(vec![vec![0.0, 0.0]], false).unwrap();
        let x0 = [0.5f64.sqrt(), 0.5f64.sqrt()];
        let r = separate_with_margin(&origin, &swap(), &x0, 0.5, &NormSpec::L2).unwrap();
        assert!(r.margin > 0.5);
        assert_abs_diff_eq!(dual_norm(&r.functional, &NormSpec::L2).unwrap(), 1.0, epsilon = 1e-9);
        let r0 = separate_with_margin(&origin, &swap(), &x0, 0.0, &NormSpec::L2).unwrap();
        let ri = separate_invariant(&origin, &swap(), &x0).unwrap().normalized(&NormSpec::L2).unwrap();
        assert_abs_diff_eq!(r0.margin, ri.margin, epsilon = 1e-12);
        assert!(matches!(
            separate_with_margin(&origin, &swap(), &x0, 1.0, &NormSpec::L2),
            Err(Error::MarginInfeasible { .. })
        ));
        let sq = linf_ball();
        for spec in [NormSpec::L1, NormSpec::Linf, NormSpec::LorentzD { w: vec![0.7, 0.4] }] {
            let r = separate_with_margin(&sq, &swap(), &[3.0, 3.0], 0.5, &spec).unwrap();
            assert!(r.margin > 0.5);
            assert_abs_diff_eq!(dual_norm(&r.functional, &spec).unwrap(), 1.0, epsilon = 1e-9);
        }
        assert_eq!(
            separate_with_margin(&sq, &swap(), &[3.0, 3.0], 0.5, &NormSpec::Xw { w: vec![0.6, 0.4] }),
            Err(Error::NormNotInvariant)
        );
    }

    #[test]
    fn minkowski_examples() {
        let cube = linf_ball();
        assert_abs_diff_eq!(minkowski_functional(&cube, &[2.0, 1.0]).unwrap(), 2.0, epsilon = 1e-12);
        let l1 = ConvexBody::unit_ball(&NormSpec::L1, 2).unwrap();
        assert_abs_diff_eq!(minkowski_functional(&l1, &[1.0, 1.0]).unwrap(), 2.0, epsilon = 1e-12);
        let off = ConvexBody::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], false).unwrap();
        assert_eq!(minkowski_functional(&off, &[1.0, 1.0]), Err(Error::OriginNotInterior));
    }

    /// Line-search oracle `1/sup{t : t·x ∈ D}` by bisection on membership.
    #[test]
    fn minkowski_line_search_oracle() {
        let mut r = rng(13);
        for _ in 0..20 {
            let mut pts: Vec<Vec<f64>> = (0..8).map(|_| random_vec(&mut r, 3, 2.0)).collect();
            for v in unit_ball_vertices(&NormSpec::L1, 3).unwrap() {
                pts.push(v.iter().map(|c| c * 0.3).collect());
                pts.push(v.iter().map(|c| c * -0.3).collect());
            }
            let d = ConvexBody::new(pts, false).unwrap();
            let x = random_vec(&mut r, 3, 1.0);
            let mu = minkowski_functional(&d, &x).unwrap();
            let (mut lo, mut hi) = (0.0, 100.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let p: Vec<f64> = x.iter().map(|c| c * mid).collect();
                if d.contains(&p, 1e-10).unwrap() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((mu - 1.0 / lo).abs() <= 1e-6 * mu.max(1.0), "{mu} vs {}", 1.0 / lo);
        }
    }

    #[test]
    fn supporting_examples() {
        let s3 = PermutationGroup::symmetric(3).unwrap();
        match invariant_supporting_functional(&[1.0, 0.0, 0.0], &s3, &NormSpec::L1).unwrap() {
            SupportOutcome::Functional { functional, value_at_x, dual_norm } => {
                for v in functional {
                    assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
                }
                assert_abs_diff_eq!(value_at_x, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(dual_norm, 1.0, epsilon = 1e-12);
            }
            o => panic!("{o:?}"),
        }
        match invariant_supporting_functional(&[1.0, 0.0], &swap(), &NormSpec::Linf).unwrap() {
            SupportOutcome::HullOffSphere { barycenter, barycenter_norm } => {
                assert_eq!(barycenter, vec![0.5, 0.5]);
                assert_eq!(barycenter_norm, 0.5);
            }
            o => panic!("{o:?}"),
        }
        let triv = PermutationGroup::trivial(2);
        match invariant_supporting_functional(&[0.6, 0.8], &triv, &NormSpec::L2).unwrap() {
            SupportOutcome::Functional { functional, .. } => {
                assert_eq!(functional, supporting_functional(&[0.6, 0.8], &NormSpec::L2).unwrap())
            }
            o => panic!("{o:?}"),
        }
        assert!(matches!(
            invariant_supporting_functional(&[2.0, 0.0], &triv, &NormSpec::L2),
            Err(Error::NotUnitVector(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn invariant_separator_is_fixed(seed in any::<u64>()) {
            let mut r = rng(seed);
            let g = random_group(&mut r, 4, &GroupShape::default());
            let pts: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut r, 4, 1.0)).collect();
            let mut orbit = Vec::new();
            for p in &pts {
                for e in g.elements() {
                    orbit.push(e.apply(p).unwrap());
                }
            }
            let c = ConvexBody::new(orbit, false).unwrap();
            let x0 = symmetrize_point(&random_vec(&mut r, 4, 5.0), &g).unwrap();
            prop_assume!(c.nearest_point(&x0).unwrap().1 > 1e-6);
            let res = separate_invariant(&c, &g, &x0).unwrap();
            prop_assert!(res.margin > 0.0);
            let sym = symmetrize_functional(&res.functional, &g).unwrap();
            for (a, b) in sym.iter().zip(&res.functional) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn minkowski_sublinear(seed in any::<u64>()) {
            let mut r = rng(seed);
            let g = random_group(&mut r, 3, &GroupShape::default());
            let mut pts = Vec::new();
            for _ in 0..3 {
                let p = random_vec(&mut r, 3, 2.0);
                for e in g.elements() {
                    pts.push(e.apply(&p).unwrap());
                }
            }
            let d = ConvexBody::new(pts, true).unwrap();
            prop_assume!(origin_interior(&d).unwrap());
            let x = random_vec(&mut r, 3, 1.0);
            let y = random_vec(&mut r, 3, 1.0);
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let mx = minkowski_functional(&d, &x).unwrap();
            let my = minkowski_functional(&d, &y).unwrap();
            prop_assert!(minkowski_functional(&d, &s).unwrap() <= mx + my + 1e-7);
            let x3: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
            prop_assert!((minkowski_functional(&d, &x3).unwrap() - 3.0 * mx).abs() <= 1e-7 * mx.max(1.0));
            for e in g.elements() {
                let gx = e.apply(&x).unwrap();
                prop_assert!((minkowski_functional(&d, &gx).unwrap() - mx).abs() <= 1e-7 * mx.max(1.0));
            }
        }
    }
}
