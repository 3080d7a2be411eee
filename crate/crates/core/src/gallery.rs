//! Counterexample operators built from orbit blocks, their distance to
//! operators of truncated support, and the X(w) non-invariance witness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::invariance::{is_invariant_operator, Operator};
use crate::norms::{dual_norm, is_norm_invariant, norm, unit_ball_vertices, vertex_count, NormSpec, STRICT_C0_THETA};
use crate::perm_group::{orbits, Permutation, PermutationGroup};
use crate::random::{random_vec, sub_rng};

/// Vertex budget for the exact lower bound on `‖T − S‖`.
pub const TRUNCATION_VERTEX_BUDGET: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    C0,
    Dstar,
    Xw,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::C0 => "c0",
            Construction::Dstar => "dstar",
            Construction::Xw => "xw",
        }
    }
}

/// A constructed operator with the orbit blocks it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryOperator {
    pub construction: Construction,
    pub operator: Operator,
    /// 0-based blocks, ordered by their minima.
    pub blocks: Vec<Vec<usize>>,
}

impl GalleryOperator {
    pub fn n(&self) -> usize {
        self.operator.cols()
    }
}

/// `T(e_i) = e_j` for `i ∈ H_j`, from the sup-norm space into a strictly
/// convex renorming of `ℓ∞^K`, `K` the number of orbits.
pub fn build_c0_counterexample(g: &PermutationGroup, n: usize) -> Result<GalleryOperator> {
    check_dim(g.degree(), n)?;
    let blocks = orbits(g).blocks;
    let mut rows = vec![vec![0.0; n]; blocks.len()];
    for (j, b) in blocks.iter().enumerate() {
        b.iter().for_each(|&i| rows[j][i] = 1.0);
    }
    let op = Operator::from_rows(&rows, NormSpec::Linf, NormSpec::StrictC0 { theta: STRICT_C0_THETA })?;
    Ok(GalleryOperator { construction: Construction::C0, operator: op, blocks })
}

/// The uniform functional on a block, of unit dual norm for the block norm.
fn block_functional(domain: &NormSpec, block: &[usize]) -> Result<f64> {
    let restricted = domain.restrict(block);
    Ok(1.0 / dual_norm(&vec![1.0; block.len()], &restricted)?)
}

fn block_rows(domain: &NormSpec, blocks: &[Vec<usize>], n: usize, m: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = vec![vec![0.0; n]; m];
    for (j, b) in blocks.iter().enumerate() {
        let c = block_functional(domain, b)?;
        b.iter().for_each(|&i| rows[j][i] = c);
    }
    Ok(rows)
}

/// `T(e_j) = f_n(e_j) e_n` from `d*(w,1)` into `ℓ_p^K`, `f_n` the uniform unit
/// functional on the block `H_n`; blocks must have at most `max_block` elements.
pub fn build_dstar_counterexample(g: &PermutationGroup, w: &[f64], p: f64, max_block: usize) -> Result<GalleryOperator> {
    let n = w.len();
    check_dim(g.degree(), n)?;
    let domain = NormSpec::lorentz_predual(w.to_vec())?;
    if !is_norm_invariant(&domain, g)?.invariant {
        return Err(Error::NormNotInvariant);
    }
    let codomain = NormSpec::lp(p)?;
    let blocks = orbits(g).blocks;
    if let Some(b) = blocks.iter().find(|b| b.len() > max_block) {
        return Err(Error::BlockTooBig { size: b.len(), bound: max_block });
    }
    let rows = block_rows(&domain, &blocks, n, blocks.len())?;
    Ok(GalleryOperator { construction: Construction::Dstar, operator: Operator::from_rows(&rows, domain, codomain)?, blocks })
}

/// `T(e_j) = f_n(e_j) y_n` from `X(w)` into `ℓ₂^m`, `y_n` the standard basis.
pub fn build_xw_counterexample(g: &PermutationGroup, w: &[f64], m: usize) -> Result<GalleryOperator> {
    let n = w.len();
    check_dim(g.degree(), n)?;
    let domain = NormSpec::xw(w.to_vec())?;
    if !is_norm_invariant(&domain, g)?.invariant {
        return Err(Error::NormNotInvariant);
    }
    let blocks = orbits(g).blocks;
    if m < blocks.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), got: m });
    }
    let rows = block_rows(&domain, &blocks, n, m)?;
    Ok(GalleryOperator { construction: Construction::Xw, operator: Operator::from_rows(&rows, domain, NormSpec::L2)?, blocks })
}

/// `‖Tx‖_p^p ≤ C^{p−1} · max|f|^p · ‖x‖_p^p` for the d* construction, whose
/// rows carry the constant block coefficients `f`.
pub fn jensen_violations(op: &GalleryOperator, max_block: usize, samples: usize, seed: u64) -> Result<usize> {
    let NormSpec::Lp { p } = *op.operator.codomain() else {
        return Err(Error::WrongDomainKind(op.operator.codomain().name().into()));
    };
    let fmax = op.operator.max_abs_entry();
    let c = (max_block as f64).powf(p - 1.0) * fmax.powf(p);
    let violations = (0..samples)
        .into_par_iter()
        .filter(|&k| {
            let mut r = sub_rng(seed, k as u64);
            let x = random_vec(&mut r, op.n(), 1.0);
            let lhs: f64 = op.operator.apply_unchecked(&x).iter().map(|v| v.abs().powf(p)).sum();
            let rhs: f64 = x.iter().map(|v| v.abs().powf(p)).sum::<f64>() * c;
            lhs > rhs * (1.0 + 1e-12)
        })
        .count();
    Ok(violations)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockBound {
    /// 1-based block members.
    pub block: Vec<usize>,
    /// `sup { ‖Tx‖ : x ∈ B_{X_n} }`.
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub construction: Construction,
    pub n: usize,
    pub cutoff: usize,
    pub blocks: Vec<BlockBound>,
    /// Smallest block supremum beyond the cutoff, a lower bound for `‖T − S‖`.
    pub certified_bound: f64,
    /// Whether the certified bound equals 1 within 1e−9.
    pub unit_bound: bool,
    pub trials: usize,
    /// Smallest exact lower bound for `‖T − S‖` over the sampled `S`.
    pub empirical_min: f64,
}

fn embed(v: &[f64], idx: &[usize], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (&i, &c) in idx.iter().zip(v) {
        x[i] = c;
    }
    x
}

fn subspace_vertices(domain: &NormSpec, idx: &[usize], n: usize) -> Result<Vec<Vec<f64>>> {
    Ok(unit_ball_vertices(&domain.restrict(idx), idx.len())?
        .into_iter()
        .map(|v| embed(&v, idx, n))
        .collect())
}

/// Exact suprema over the blocks with minimum beyond `cutoff` (1-based
/// coordinates `1..=cutoff` may be used by `S`), and `trials` random `S`
/// supported on those coordinates.
pub fn distance_to_truncated(op: &GalleryOperator, cutoff: usize, trials: usize, seed: u64) -> Result<TruncationReport> {
    let t = &op.operator;
    let n = t.cols();
    let beyond: Vec<&Vec<usize>> = op.blocks.iter().filter(|b| b[0] >= cutoff).collect();
    if beyond.is_empty() {
        return Err(Error::NoBlockBeyondCutoff(cutoff));
    }
    let mut blocks = Vec::new();
    for b in &beyond {
        let sup = subspace_vertices(t.domain(), b, n)?
            .iter()
            .map(|x| norm(&t.apply_unchecked(x), t.codomain()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        blocks.push(BlockBound { block: b.iter().map(|i| i + 1).collect(), sup });
    }
    let (kmin, certified_bound) = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| (k, b.sup))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    // the certifying block plus as many truncation coordinates as the budget allows
    let mut idx: Vec<usize> = beyond[kmin].clone();
    for i in 0..cutoff.min(n) {
        let mut trial = idx.clone();
        trial.push(i);
        trial.sort_unstable();
        let count = vertex_count(&t.domain().restrict(&trial), trial.len()).unwrap_or(u128::MAX);
        if count > TRUNCATION_VERTEX_BUDGET as u128 {
            break;
        }
        idx = trial;
    }
    let verts = subspace_vertices(t.domain(), &idx, n)?;
    let head: Vec<usize> = (0..cutoff.min(n)).collect();
    let empirical_min = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = sub_rng(seed, k as u64);
            let scale = 2.0 * random_vec(&mut r, 1, 1.0)[0].abs();
            let mut d = t.matrix().clone();
            for &j in &head {
                let col = random_vec(&mut r, t.rows(), scale);
                for (i, c) in col.into_iter().enumerate() {
                    d[(i, j)] -= c;
                }
            }
            let diff = t.with_matrix(d).expect("finite");
            verts
                .iter()
                .map(|x| crate::norms::norm_unchecked(&diff.apply_unchecked(x), diff.codomain()))
                .fold(0.0, f64::max)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(TruncationReport {
        construction: op.construction,
        n,
        cutoff,
        blocks,
        certified_bound,
        unit_bound: (certified_bound - 1.0).abs() <= 1e-9,
        trials,
        empirical_min: if trials == 0 { certified_bound } else { empirical_min },
    })
}

/// Checks that a gallery operator is invariant under the group it came from.
pub fn check_invariant(op: &GalleryOperator, g: &PermutationGroup) -> Result<bool> {
    is_invariant_operator(&op.operator, g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessPattern {
    /// `x = e_i + Σ_{top} e_j`.
    TopBlock,
    /// `x = e_b + t·e_n` with `t = (1 − w_n)/2`.
    Fallback,
}

/// A point `x` and group element `g` with `‖g(x)‖ < ‖x‖` in X(w).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxWitness {
    pub x: Vec<f64>,
    pub g: Permutation,
    pub norm_x: f64,
    pub norm_gx: f64,
    /// Number of further indices sharing the top weight of the block.
    pub k: usize,
    /// 1-based index of the first top-weight coordinate.
    pub n: usize,
    pub pattern: WitnessPattern,
    /// `1 + (k+1)·w_n` for the top-block pattern, `1 + t·w_n` for the fallback.
    pub formula: f64,
}

/// Within the first orbit on which `w` is not constant, with `top` the
/// indices of largest weight, tries `x = e_i + Σ_{top} e_j` for `i` outside
/// `top`, and otherwise `x = e_b + t·e_n`.
pub fn auxlemma_witness(w: &[f64], g: &PermutationGroup) -> Result<AuxWitness> {
    let spec = NormSpec::xw(w.to_vec())?;
    check_dim(g.degree(), w.len())?;
    let orb = orbits(g);
    let block = orb
        .blocks
        .iter()
        .find(|b| b.iter().any(|&i| w[i] != w[b[0]]))
        .ok_or(Error::NoWitness)?;
    let wmax = block.iter().map(|&i| w[i]).fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<usize> = block.iter().copied().filter(|&i| w[i] == wmax).collect();
    let rest: Vec<usize> = block.iter().copied().filter(|&i| w[i] != wmax).collect();
    let n0 = top[0];
    let k = top.len() - 1;
    let dim = w.len();
    let gap = |x: &[f64]| -> Result<Option<(Permutation, f64, f64)>> {
        let nx = norm(x, &spec)?;
        for e in g.elements() {
            let ngx = norm(&e.apply_unchecked(x), &spec)?;
            if nx - ngx > 1e-12 {
                return Ok(Some((e.clone(), nx, ngx)));
            }
        }
        Ok(None)
    };
    for &i in &rest {
        let mut x = vec![0.0; dim];
        x[i] = 1.0;
        top.iter().for_each(|&j| x[j] = 1.0);
        if let Some((h, nx, ngx)) = gap(&x)? {
            return Ok(AuxWitness {
                x,
                g: h,
                norm_x: nx,
                norm_gx: ngx,
                k,
                n: n0 + 1,
                pattern: WitnessPattern::TopBlock,
                formula: 1.0 + (k as f64 + 1.0) * w[n0],
            });
        }
    }
    let t = (1.0 - wmax) / 2.0;
    for &b in &rest {
        let mut x = vec![0.0; dim];
        x[b] = 1.0;
        x[n0] = t;
        if let Some((h, nx, ngx)) = gap(&x)? {
            return Ok(AuxWitness {
                x,
                g: h,
                norm_x: nx,
                norm_gx: ngx,
                k,
                n: n0 + 1,
                pattern: WitnessPattern::Fallback,
                formula: 1.0 + t * w[n0],
            });
        }
    }
    Err(Error::NoWitness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attainment::operator_norm;
    use crate::perm_group::{generate_group, Family};
    use crate::random::{random_group, random_weights, rng, GroupShape};
    use approx::assert_abs_diff_eq;

    fn two_pairs() -> PermutationGroup {
        PermutationGroup::on_blocks(4, &[vec![0, 1], vec![2, 3]], Family::Symmetric, 100).unwrap()
    }

    #[test]
    fn c0_examples() {
        let op = build_c0_counterexample(&two_pairs(), 4).unwrap();
        assert_eq!(op.operator.rows_vec(), vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]);
        assert!(check_invariant(&op, &two_pairs()).unwrap());
        let id = build_c0_counterexample(&PermutationGroup::trivial(3), 3).unwrap();
        assert_eq!(id.operator.rows_vec(), vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!(matches!(build_c0_counterexample(&two_pairs(), 3), Err(Error::DimensionMismatch { .. })));
        let nrm = operator_norm(&op.operator).unwrap();
        assert_abs_diff_eq!(nrm.operator_norm, 2.0 + 0.1 * 8f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn dstar_examples() {
        let w = vec![0.9, 0.6, 0.5, 0.4];
        let op = build_dstar_counterexample(&two_pairs(), &w, 2.0, 2).unwrap();
        let c = 1.0 / 1.5;
        for (i, row) in op.operator.rows_vec().iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if j / 2 == i { c } else { 0.0 };
                assert_abs_diff_eq!(*v, expect, epsilon = 1e-15);
            }
        }
        assert!(check_invariant(&op, &two_pairs()).unwrap());
        assert_eq!(jensen_violations(&op, 2, 1000, 1).unwrap(), 0);
        let whole = build_dstar_counterexample(&PermutationGroup::symmetric(4).unwrap(), &w, 3.0, 4).unwrap();
        assert_eq!(whole.operator.rows(), 1);
        assert!(matches!(
            build_dstar_counterexample(&PermutationGroup::symmetric(4).unwrap(), &w, 3.0, 3),
            Err(Error::BlockTooBig { size: 4, bound: 3 })
        ));
    }

    #[test]
    fn xw_examples() {
        let op = build_xw_counterexample(&two_pairs(), &[0.4, 0.4, 0.3, 0.3], 2).unwrap();
        let rows = op.operator.rows_vec();
        let expect = [[0.7, 0.7, 0.0, 0.0], [0.0, 0.0, 0.65, 0.65]];
        for (r, e) in rows.iter().zip(expect) {
            for (a, b) in r.iter().zip(e) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
            }
        }
        assert!(check_invariant(&op, &two_pairs()).unwrap());
        let one = build_xw_counterexample(&PermutationGroup::symmetric(3).unwrap(), &[0.4, 0.4, 0.4], 1).unwrap();
        assert_eq!(one.operator.matrix().rank(1e-12), 1);
        assert_eq!(
            build_xw_counterexample(&two_pairs(), &[0.5, 0.4, 0.3, 0.3], 2),
            Err(Error::NormNotInvariant)
        );
        assert!(matches!(
            build_xw_counterexample(&two_pairs(), &[0.4, 0.4, 0.3, 0.3], 1),
            Err(Error::DimensionMismatch { .. })
        ));
        let nrm = operator_norm(&op.operator).unwrap();
        assert!(nrm.operator_norm.is_finite() && nrm.attained);
    }

    #[test]
    fn truncation_examples() {
        let w = vec![0.9, 0.6, 0.5, 0.4];
        let op = build_dstar_counterexample(&two_pairs(), &w, 2.0, 2).unwrap();
        let rep = distance_to_truncated(&op, 2, 200, 7).unwrap();
        assert!(rep.unit_bound);
        assert_abs_diff_eq!(rep.certified_bound, 1.0, epsilon = 1e-9);
        assert!(rep.empirical_min >= 1.0 - 1e-9);
        assert_eq!(distance_to_truncated(&op, 3, 10, 7), Err(Error::NoBlockBeyondCutoff(3)));
        let xw = build_xw_counterexample(&two_pairs(), &[0.4, 0.4, 0.3, 0.3], 2).unwrap();
        let rep = distance_to_truncated(&xw, 1, 200, 7).unwrap();
        assert!(rep.unit_bound && rep.empirical_min >= 1.0 - 1e-9);
        let c0 = build_c0_counterexample(&two_pairs(), 4).unwrap();
        let rep = distance_to_truncated(&c0, 2, 200, 7).unwrap();
        assert_abs_diff_eq!(rep.certified_bound, 2.0 * (1.0 + STRICT_C0_THETA), epsilon = 1e-12);
        assert!(rep.empirical_min >= rep.certified_bound - 1e-9);
    }

    #[test]
    fn auxlemma_examples() {
        let c4 = PermutationGroup::cyclic(4).unwrap();
        let a = auxlemma_witness(&[0.5, 0.5, 0.3, 0.2], &c4).unwrap();
        assert_eq!(a.pattern, WitnessPattern::TopBlock);
        assert_eq!((a.k, a.n), (1, 1));
        assert_abs_diff_eq!(a.norm_x, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.formula, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.norm_gx, 1.8, epsilon = 1e-15);
        assert_eq!(auxlemma_witness(&[0.4; 4], &c4), Err(Error::NoWitness));
        let s2 = PermutationGroup::symmetric(2).unwrap();
        let b = auxlemma_witness(&[0.6, 0.5], &s2).unwrap();
        assert_eq!(b.k, 0);
        assert!(b.norm_gx < b.norm_x - 1e-12);
        assert_abs_diff_eq!(b.norm_x, b.formula, epsilon = 1e-15);
        let g = generate_group(3, vec![Permutation::from_one_based(&[1, 3, 2]).unwrap()], 10).unwrap();
        let c = auxlemma_witness(&[0.7, 0.5, 0.2], &g).unwrap();
        assert!(c.norm_gx < c.norm_x - 1e-12);
    }

    #[test]
    fn auxlemma_random() {
        let mut r = rng(17);
        let mut found = 0;
        for _ in 0..40 {
            let g = random_group(&mut r, 6, &GroupShape::default());
            let w = random_weights(&mut r, 6, 0.1, 0.9, None);
            match auxlemma_witness(&w, &g) {
                Ok(a) => {
                    found += 1;
                    assert!(a.norm_gx < a.norm_x - 1e-12);
                    assert_abs_diff_eq!(a.norm_x, a.formula, epsilon = 1e-12);
                }
                Err(Error::NoWitness) => assert!(is_norm_invariant(&NormSpec::Xw { w }, &g).unwrap().invariant),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(found > 0);
    }
}
