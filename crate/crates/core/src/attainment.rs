//! Operator norms with attaining points, slices of finite point sets, and the
//! A_ε test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::invariance::{is_invariant_operator, is_invariant_point, is_invariant_set, Operator};
use crate::norms::{ball_argmax, dual_ball_vertices, dual_norm, norm, supporting_functional, unit_ball_vertices, NormSpec};
use crate::perm_group::{orbits, PermutationGroup};
use crate::random::{random_direction, rng};
use crate::tol;

/// Number of deterministic starts for the numeric route.
pub const NUMERIC_STARTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    /// Maximum over the domain's unit-ball vertices.
    Vertex,
    /// Largest singular value.
    Svd,
    /// Maximum of `‖T* u‖*` over the codomain's dual-ball vertices.
    Dual,
    /// Multi-start ascent; a lower bound.
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttainmentReport {
    pub operator_norm: f64,
    pub witness: Option<Vec<f64>>,
    /// `operator_norm − ‖T(witness)‖`.
    pub defect: f64,
    pub attained: bool,
    pub method: NormMethod,
}

fn first_max(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn report(t: &Operator, value: f64, witness: Vec<f64>, method: NormMethod) -> Result<AttainmentReport> {
    let achieved = norm(&t.apply_unchecked(&witness), t.codomain())?;
    let defect = value - achieved;
    Ok(AttainmentReport {
        operator_norm: value,
        witness: Some(witness),
        defect,
        attained: defect <= tol::ATTAINED,
        method,
    })
}

/// `‖T‖ = sup { ‖Tx‖ : ‖x‖ ≤ 1 }` with a maximizing point.
pub fn operator_norm(t: &Operator) -> Result<AttainmentReport> {
    let (dom, cod) = (t.domain(), t.codomain());
    if let NormSpec::Lp { .. } = dom {
        return Err(Error::UnsupportedDomain(format!("Lp domain ({:?})", dom)));
    }
    if t.cols() == 0 {
        return Ok(AttainmentReport {
            operator_norm: 0.0,
            witness: None,
            defect: 0.0,
            attained: true,
            method: NormMethod::Vertex,
        });
    }
    if dom.is_polyhedral() {
        let verts = unit_ball_vertices(dom, t.cols())?;
        let values: Vec<f64> = verts
            .par_iter()
            .map(|v| crate::norms::norm_unchecked(&t.apply_unchecked(v), cod))
            .collect();
        let (i, value) = first_max(&values);
        return report(t, value, verts[i].clone(), NormMethod::Vertex);
    }
    if matches!(dom, NormSpec::L2) && matches!(cod, NormSpec::L2) {
        let svd = t.matrix().clone().svd(false, true);
        let vt = svd.v_t.expect("right singular vectors");
        let (k, sigma) = first_max(svd.singular_values.as_slice());
        let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-14) {
            if *first < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        return report(t, sigma, v, NormMethod::Svd);
    }
    if cod.is_polyhedral() {
        let us = dual_ball_vertices(cod, t.rows())?;
        let values: Vec<f64> = us
            .par_iter()
            .map(|u| dual_norm(&t.adjoint_apply(u).expect("dims"), dom).expect("dual norm"))
            .collect();
        let (i, value) = first_max(&values);
        let x = ball_argmax(&t.adjoint_apply(&us[i])?, dom)?;
        return report(t, value, x, NormMethod::Dual);
    }
    if matches!(dom, NormSpec::L2) {
        return numeric_norm(t);
    }
    Err(Error::UnsupportedDomain(format!(
        "{} domain with {} codomain",
        dom.name(),
        cod.name()
    )))
}

/// Ascent `x ← normalize(T* φ(Tx))` from basis vectors and seeded random starts;
/// each step does not decrease `‖Tx‖`.
fn numeric_norm(t: &Operator) -> Result<AttainmentReport> {
    let n = t.cols();
    let mut r = rng(0x6e6f726d);
    let mut starts: Vec<Vec<f64>> = (0..n.min(NUMERIC_STARTS))
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    while starts.len() < NUMERIC_STARTS {
        starts.push(random_direction(&mut r, n, 1.0));
    }
    let runs: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|mut x| {
            let mut val = norm(&t.apply_unchecked(&x), t.codomain()).expect("norm");
            for _ in 0..2000 {
                let tx = t.apply_unchecked(&x);
                let Ok(phi) = supporting_functional(&tx, t.codomain()) else { break };
                let next = ball_argmax(&t.adjoint_apply(&phi).expect("dims"), &NormSpec::L2).expect("argmax");
                let nv = norm(&t.apply_unchecked(&next), t.codomain()).expect("norm");
                if nv <= val * (1.0 + 1e-15) {
                    if nv >= val {
                        x = next;
                        val = nv;
                    }
                    break;
                }
                x = next;
                val = nv;
            }
            (val, x)
        })
        .collect();
    let values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (i, value) = first_max(&values);
    report(t, value, runs[i].1.clone(), NormMethod::Numeric)
}

/// `‖T‖_B = max { ‖Tx‖ : x ∈ B }` over a finite set (0 when empty).
pub fn sup_on_set(t: &Operator, b: &[Vec<f64>]) -> Result<f64> {
    let mut sup = 0.0f64;
    for x in b {
        sup = sup.max(norm(&t.apply(x)?, t.codomain())?);
    }
    Ok(sup)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub eta: f64,
    pub sup_on_b: f64,
    /// Indices into `B` of the members.
    pub indices: Vec<usize>,
    pub members: Vec<Vec<f64>>,
}

fn check_slice_pre(b: &[Vec<f64>], g: &PermutationGroup) -> Result<()> {
    if !is_invariant_set(b, g)? {
        return Err(Error::SetNotInvariant);
    }
    Ok(())
}

fn fixed_indices(b: &[Vec<f64>], g: &PermutationGroup) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, x) in b.iter().enumerate() {
        if is_invariant_point(x, g)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// `S(T, η) = { x ∈ B ∩ X_G : ‖Tx‖ > ‖T‖_B − η }`.
pub fn slice(t: &Operator, b: &[Vec<f64>], g: &PermutationGroup, eta: f64) -> Result<Slice> {
    if !(eta > 0.0) {
        return Err(Error::PreconditionFailed(format!("eta must be positive, got {eta}")));
    }
    check_slice_pre(b, g)?;
    let sup = sup_on_set(t, b)?;
    let fixed = fixed_indices(b, g)?;
    slice_from(t, b, &fixed, sup, eta)
}

fn slice_from(t: &Operator, b: &[Vec<f64>], fixed: &[usize], sup: f64, eta: f64) -> Result<Slice> {
    let mut indices = Vec::new();
    for &i in fixed {
        if norm(&t.apply_unchecked(&b[i]), t.codomain())? > sup - eta {
            indices.push(i);
        }
    }
    Ok(Slice {
        eta,
        sup_on_b: sup,
        members: indices.iter().map(|&i| b[i].clone()).collect(),
        indices,
    })
}

/// The η grid `base·2^{-j}`, `j = 1..=30`, with base `‖T‖_B` (1 when that is 0).
pub fn eta_grid(sup: f64) -> Vec<f64> {
    let base = if sup > 0.0 { sup } else { 1.0 };
    (1..=30).map(|j| base * 0.5f64.powi(j)).collect()
}

/// Member with the largest `‖Tx‖`, ties to the lexicographically largest point.
fn peak(t: &Operator, s: &Slice) -> Result<Vec<f64>> {
    let mut best: Option<(f64, &Vec<f64>)> = None;
    for x in &s.members {
        let v = norm(&t.apply_unchecked(x), t.codomain())?;
        best = match best {
            None => Some((v, x)),
            Some((bv, bx)) => {
                let lex_gt = x.partial_cmp(bx) == Some(std::cmp::Ordering::Greater);
                if v > bv || (v == bv && lex_gt) {
                    Some((v, x))
                } else {
                    Some((bv, bx))
                }
            }
        };
    }
    Ok(best.map(|(_, x)| x.clone()).unwrap_or_default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AEpsReport {
    pub member: bool,
    pub eta: Option<f64>,
    pub p: Option<Vec<f64>>,
    pub slice: Vec<Vec<f64>>,
    pub grid_points_tried: usize,
    pub caveat: String,
}

const A_EPS_CAVEAT: &str = "grid search over eta with p a peak slice member: true is certified, false means not found on the grid";

/// Searches the η grid for `S(T,η) ⊆ B(p,ε) ∪ B(−p,ε)` in the domain norm.
pub fn in_a_eps(t: &Operator, b: &[Vec<f64>], g: &PermutationGroup, eps: f64) -> Result<AEpsReport> {
    check_slice_pre(b, g)?;
    let sup = sup_on_set(t, b)?;
    let fixed = fixed_indices(b, g)?;
    let grid = eta_grid(sup);
    for (k, &eta) in grid.iter().enumerate() {
        let s = slice_from(t, b, &fixed, sup, eta)?;
        let p = if s.members.is_empty() { vec![0.0; t.cols()] } else { peak(t, &s)? };
        let mut covered = true;
        for x in &s.members {
            let dm: Vec<f64> = x.iter().zip(&p).map(|(a, c)| a - c).collect();
            let dp: Vec<f64> = x.iter().zip(&p).map(|(a, c)| a + c).collect();
            let d = norm(&dm, t.domain())?.min(norm(&dp, t.domain())?);
            if d >= eps + 1e-12 {
                covered = false;
                break;
            }
        }
        if covered {
            return Ok(AEpsReport {
                member: true,
                eta: Some(eta),
                p: Some(p),
                slice: s.members,
                grid_points_tried: k + 1,
                caveat: A_EPS_CAVEAT.into(),
            });
        }
    }
    Ok(AEpsReport {
        member: false,
        eta: None,
        p: None,
        slice: vec![],
        grid_points_tried: grid.len(),
        caveat: A_EPS_CAVEAT.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposingReport {
    pub exposing: bool,
    pub x: Option<Vec<f64>>,
    /// Largest grid η from which on the slice is `{x, −x}` or `{x}`.
    pub collapse_eta: Option<f64>,
    pub final_slice_size: usize,
}

fn is_pair(members: &[Vec<f64>]) -> bool {
    match members {
        [_] => true,
        [a, b] => a.iter().zip(b).all(|(u, v)| (u + v).abs() <= tol::INVARIANCE),
        _ => false,
    }
}

/// Whether small slices collapse to a single antipodal pair.
pub fn absolutely_exposing_check(t: &Operator, b: &[Vec<f64>], g: &PermutationGroup) -> Result<ExposingReport> {
    check_slice_pre(b, g)?;
    let sup = sup_on_set(t, b)?;
    let fixed = fixed_indices(b, g)?;
    let grid = eta_grid(sup);
    let slices: Vec<Slice> = grid
        .iter()
        .map(|&eta| slice_from(t, b, &fixed, sup, eta))
        .collect::<Result<_>>()?;
    let last = slices.last().expect("non-empty grid");
    if !is_pair(&last.members) {
        return Ok(ExposingReport {
            exposing: false,
            x: None,
            collapse_eta: None,
            final_slice_size: last.members.len(),
        });
    }
    let first = slices
        .iter()
        .position(|s| is_pair(&s.members) && s.members == last.members)
        .expect("last slice qualifies");
    Ok(ExposingReport {
        exposing: true,
        x: Some(peak(t, last)?),
        collapse_eta: Some(grid[first]),
        final_slice_size: last.members.len(),
    })
}

/// Largest spread of `f` over an orbit; zero iff `f` is invariant.
pub fn orbit_constancy_defect(f: &[f64], g: &PermutationGroup) -> Result<f64> {
    check_dim(g.degree(), f.len())?;
    Ok(orbits(g)
        .blocks
        .iter()
        .map(|b| {
            let hi = b.iter().map(|&i| f[i]).fold(f64::NEG_INFINITY, f64::max);
            let lo = b.iter().map(|&i| f[i]).fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnBound {
    /// 1-based coordinate.
    pub index: usize,
    pub orbit_size: usize,
    pub column_norm: f64,
    /// `‖T‖·‖1_{Orb(j)}‖ / |Orb(j)|`.
    pub bound: f64,
    /// `‖T e_j‖ / ‖T‖` (0 for the zero operator).
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnBoundReport {
    pub operator_norm: f64,
    pub columns: Vec<ColumnBound>,
    pub holds: bool,
}

/// For invariant `T` on a sup-norm domain, `T(1_{Orb(j)}) = |Orb(j)|·T e_j`
/// forces `‖T e_j‖ ≤ ‖T‖·‖1_{Orb(j)}‖ / |Orb(j)|`.
pub fn orbit_column_bound(t: &Operator, g: &PermutationGroup) -> Result<ColumnBoundReport> {
    if !matches!(t.domain(), NormSpec::Linf | NormSpec::StrictC0 { .. }) {
        return Err(Error::WrongDomainKind(t.domain().name().into()));
    }
    if !is_invariant_operator(t, g)? {
        return Err(Error::NotInvariant);
    }
    let tn = operator_norm(t)?.operator_norm;
    let orb = orbits(g);
    let mut columns = Vec::new();
    let mut holds = true;
    for j in 0..t.cols() {
        let block = &orb.blocks[orb.block_of(j)];
        let mut ind = vec![0.0; t.cols()];
        block.iter().for_each(|&i| ind[i] = 1.0);
        let mut e = vec![0.0; t.cols()];
        e[j] = 1.0;
        let column_norm = norm(&t.apply_unchecked(&e), t.codomain())?;
        let bound = tn * norm(&ind, t.domain())? / block.len() as f64;
        holds &= column_norm <= bound + 1e-9;
        columns.push(ColumnBound {
            index: j + 1,
            orbit_size: block.len(),
            column_norm,
            bound,
            ratio: if tn > 0.0 { column_norm / tn } else { 0.0 },
        });
    }
    Ok(ColumnBoundReport { operator_norm: tn, columns, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariance::symmetrize_operator;
    use crate::random::{random_matrix, random_vec};
    use approx::assert_abs_diff_eq;

    fn pm_basis(n: usize) -> Vec<Vec<f64>> {
        let mut b = Vec::new();
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                b.push(e);
            }
        }
        b
    }

    fn diag(a: f64, c: f64, dom: NormSpec) -> Operator {
        Operator::from_rows(&[vec![a, 0.0], vec![0.0, c]], dom, NormSpec::L2).unwrap()
    }

    #[test]
    fn operator_norm_examples() {
        let id = Operator::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], NormSpec::L1, NormSpec::L1).unwrap();
        let r = operator_norm(&id).unwrap();
        assert_eq!(r.operator_norm, 1.0);
        assert_eq!(r.witness.unwrap(), vec![1.0, 0.0]);
        let row = Operator::from_rows(&[vec![1.0, 1.0]], NormSpec::Linf, NormSpec::L1).unwrap();
        let r = operator_norm(&row).unwrap();
        assert_eq!(r.operator_norm, 2.0);
        assert_eq!(r.witness.unwrap(), vec![1.0, 1.0]);
        let z = Operator::zero(2, 2, NormSpec::L2, NormSpec::L2).unwrap();
        let r = operator_norm(&z).unwrap();
        assert_eq!(r.operator_norm, 0.0);
        assert!(r.attained);
        let lp = Operator::zero(2, 2, NormSpec::Lp { p: 3.0 }, NormSpec::L2).unwrap();
        assert!(matches!(operator_norm(&lp), Err(Error::UnsupportedDomain(_))));
    }

    /// Brute force: the max over many random unit-ball samples never exceeds
    /// the computed norm, and comes close to it.
    #[test]
    fn operator_norm_beats_sampling() {
        let mut r = rng(21);
        let specs = [
            NormSpec::L1,
            NormSpec::L2,
            NormSpec::Linf,
            NormSpec::Lp { p: 3.0 },
            NormSpec::Xw { w: vec![0.6, 0.5, 0.3, 0.2] },
            NormSpec::LorentzPredual { w: vec![0.6, 0.5, 0.3, 0.2] },
            NormSpec::strict_c0(),
        ];
        for dom in &specs {
            for cod in &specs {
                let t = match Operator::new(random_matrix(&mut r, 4, 4, 1.0), dom.clone(), cod.clone()) {
                    Ok(t) => t,
                    Err(_) => continue,
                };
                let rep = match operator_norm(&t) {
                    Ok(rep) => rep,
                    Err(Error::UnsupportedDomain(_)) => continue,
                    Err(e) => panic!("{e}"),
                };
                assert!(rep.defect >= -1e-9);
                let mut sampled = 0.0f64;
                for _ in 0..20_000 {
                    let x = random_vec(&mut r, 4, 1.0);
                    let nx = norm(&x, dom).unwrap();
                    sampled = sampled.max(norm(&t.apply(&x).unwrap(), cod).unwrap() / nx);
                }
                assert!(sampled <= rep.operator_norm + 1e-6, "{dom:?}->{cod:?}");
                assert!(sampled >= 0.8 * rep.operator_norm, "{dom:?}->{cod:?}");
            }
        }
    }

    #[test]
    fn sup_and_slice_examples() {
        let b = pm_basis(2);
        let t = diag(2.0, 1.0, NormSpec::L2);
        assert_eq!(sup_on_set(&t, &b).unwrap(), 2.0);
        assert_eq!(sup_on_set(&t, &[vec![0.0, 3.0]]).unwrap(), 3.0);
        let triv = PermutationGroup::trivial(2);
        let s = slice(&t, &b, &triv, 0.5).unwrap();
        assert_eq!(s.members, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let s = slice(&t, &b, &triv, 3.0).unwrap();
        assert_eq!(s.members.len(), 4);
        let swap = PermutationGroup::symmetric(2).unwrap();
        let s = slice(&t, &b, &swap, 3.0).unwrap();
        assert!(s.members.is_empty());
        assert_eq!(slice(&t, &[vec![1.0, 0.0]], &swap, 1.0), Err(Error::SetNotInvariant));
        let l1 = Operator::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], NormSpec::L1, NormSpec::L1).unwrap();
        let verts = unit_ball_vertices(&NormSpec::L1, 2).unwrap();
        assert_eq!(sup_on_set(&l1, &verts).unwrap(), operator_norm(&l1).unwrap().operator_norm);
    }

    #[test]
    fn a_eps_examples() {
        let b = pm_basis(2);
        let triv = PermutationGroup::trivial(2);
        let t = diag(2.0, 1.0, NormSpec::L2);
        let r = in_a_eps(&t, &b, &triv, 0.1).unwrap();
        assert!(r.member);
        assert_eq!(r.p.unwrap(), vec![1.0, 0.0]);
        assert_eq!(r.slice, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let z = diag(0.0, 0.0, NormSpec::L2);
        assert!(!in_a_eps(&z, &b, &triv, 0.5).unwrap().member);
        assert!(in_a_eps(&z, &b, &triv, 2.0).unwrap().member);
    }

    #[test]
    fn exposing_examples() {
        let b = pm_basis(2);
        let triv = PermutationGroup::trivial(2);
        let r = absolutely_exposing_check(&diag(2.0, 1.0, NormSpec::L2), &b, &triv).unwrap();
        assert!(r.exposing);
        assert_eq!(r.x.unwrap(), vec![1.0, 0.0]);
        let r = absolutely_exposing_check(&diag(1.0, 1.0, NormSpec::L2), &b, &triv).unwrap();
        assert!(!r.exposing);
        assert_eq!(r.final_slice_size, 4);
        let pair = vec![vec![1.0, 2.0], vec![-1.0, -2.0]];
        assert!(absolutely_exposing_check(&diag(1.0, 1.0, NormSpec::L2), &pair, &triv).unwrap().exposing);
    }

    #[test]
    fn orbit_defect_examples() {
        let g = crate::perm_group::generate_group(
            3,
            vec![crate::perm_group::Permutation::from_one_based(&[2, 1, 3]).unwrap()],
            10,
        )
        .unwrap();
        assert_eq!(orbit_constancy_defect(&[1.0, 1.0, 5.0], &g).unwrap(), 0.0);
        assert_eq!(orbit_constancy_defect(&[1.0, 2.0, 5.0], &g).unwrap(), 1.0);
        let mut r = rng(2);
        let t = Operator::new(random_matrix(&mut r, 2, 3, 1.0), NormSpec::L1, NormSpec::L1).unwrap();
        let tb = symmetrize_operator(&t, &g).unwrap();
        for i in 0..2 {
            let mut e = vec![0.0; 2];
            e[i] = 1.0;
            assert!(orbit_constancy_defect(&tb.adjoint_apply(&e).unwrap(), &g).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn column_bound_examples() {
        let mut r = rng(8);
        let s4 = PermutationGroup::symmetric(4).unwrap();
        let t = Operator::new(random_matrix(&mut r, 3, 4, 1.0), NormSpec::Linf, NormSpec::L1).unwrap();
        let tb = symmetrize_operator(&t, &s4).unwrap();
        let rep = orbit_column_bound(&tb, &s4).unwrap();
        assert!(rep.holds);
        for c in &rep.columns {
            assert!(c.column_norm <= rep.operator_norm / 4.0 + 1e-9);
        }
        let rep = orbit_column_bound(&t, &PermutationGroup::trivial(4)).unwrap();
        assert!(rep.columns.iter().all(|c| c.column_norm <= rep.operator_norm + 1e-12));
        let z = Operator::zero(2, 4, NormSpec::Linf, NormSpec::L2).unwrap();
        assert!(orbit_column_bound(&z, &s4).unwrap().columns.iter().all(|c| c.ratio == 0.0));
        let wrong = Operator::zero(2, 4, NormSpec::L1, NormSpec::L2).unwrap();
        assert!(matches!(orbit_column_bound(&wrong, &s4), Err(Error::WrongDomainKind(_))));
        assert_eq!(orbit_column_bound(&t, &s4), Err(Error::NotInvariant));
        let sc = Operator::new(tb.matrix().clone(), NormSpec::strict_c0(), NormSpec::L1).unwrap();
        assert!(orbit_column_bound(&sc, &s4).unwrap().holds);
        assert_abs_diff_eq!(
            operator_norm(&sc).unwrap().defect,
            0.0,
            epsilon = 1e-9
        );
    }
}
