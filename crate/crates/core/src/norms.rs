//! Sequence-space norms on ℝⁿ: evaluation, duality, supporting functionals
//! and generating points of polyhedral unit balls.
//!
//! Ties are always broken towards the lowest index, and zero coordinates get
//! sign `+1` wherever a sign has to be chosen.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::perm_group::{orbits, Permutation, PermutationGroup};

/// Upper bound on the number of enumerated unit-ball vertices.
pub const VERTEX_LIMIT: usize = 2_000_000;

/// θ of the strictly convex renorming `‖y‖∞ + θ‖y‖₂` of c₀.
pub const STRICT_C0_THETA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    L1,
    L2,
    Lp { p: f64 },
    Linf,
    /// Lorentz space d(w,1): `Σ [x]_i w_i`.
    LorentzD { w: Vec<f64> },
    /// Predual d*(w,1): `max_k Σ_{i≤k} [x]_i / Σ_{i≤k} w_i`.
    LorentzPredual { w: Vec<f64> },
    /// X(w): `‖(1−w)x‖∞ + ‖wx‖₁`.
    Xw { w: Vec<f64> },
    /// `‖y‖∞ + θ‖y‖₂`.
    StrictC0 { theta: f64 },
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Indices sorted by decreasing |x|, ties by index.
fn order_by_abs_desc(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        x[b].abs()
            .partial_cmp(&x[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

fn lowest_argmax_abs(x: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

impl NormSpec {
    pub fn lp(p: f64) -> Result<Self> {
        let s = NormSpec::Lp { p };
        s.validate(None)?;
        Ok(s)
    }

    pub fn lorentz_d(w: Vec<f64>) -> Result<Self> {
        let s = NormSpec::LorentzD { w };
        s.validate(None)?;
        Ok(s)
    }

    pub fn lorentz_predual(w: Vec<f64>) -> Result<Self> {
        let s = NormSpec::LorentzPredual { w };
        s.validate(None)?;
        Ok(s)
    }

    pub fn xw(w: Vec<f64>) -> Result<Self> {
        let s = NormSpec::Xw { w };
        s.validate(None)?;
        Ok(s)
    }

    pub fn strict_c0() -> Self {
        NormSpec::StrictC0 { theta: STRICT_C0_THETA }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormSpec::L1 => "L1",
            NormSpec::L2 => "L2",
            NormSpec::Lp { .. } => "Lp",
            NormSpec::Linf => "Linf",
            NormSpec::LorentzD { .. } => "LorentzD",
            NormSpec::LorentzPredual { .. } => "LorentzPredual",
            NormSpec::Xw { .. } => "Xw",
            NormSpec::StrictC0 { .. } => "StrictC0",
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            NormSpec::LorentzD { w } | NormSpec::LorentzPredual { w } | NormSpec::Xw { w } => {
                Some(w)
            }
            _ => None,
        }
    }

    /// Dimension fixed by the weights, if any.
    pub fn dim(&self) -> Option<usize> {
        self.weights().map(<[f64]>::len)
    }

    /// Checks the parameters, and the dimension when `n` is given.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        match self {
            NormSpec::Lp { p } if !(p.is_finite() && *p > 1.0) => {
                return Err(Error::InvalidNorm(format!("Lp needs finite p > 1, got {p}")))
            }
            NormSpec::StrictC0 { theta } if !(theta.is_finite() && *theta > 0.0) => {
                return Err(Error::InvalidNorm(format!("StrictC0 needs theta > 0, got {theta}")))
            }
            _ => {}
        }
        if let Some(w) = self.weights() {
            if w.is_empty() {
                return Err(Error::InvalidNorm("empty weight sequence".into()));
            }
            if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidNorm("weights must be positive and finite".into()));
            }
            if w.windows(2).any(|p| p[1] > p[0]) {
                return Err(Error::InvalidNorm("weights must be non-increasing".into()));
            }
            if matches!(self, NormSpec::Xw { .. }) && w[0] >= 1.0 {
                return Err(Error::InvalidNorm("X(w) needs w_1 < 1".into()));
            }
            if let Some(n) = n {
                check_dim(w.len(), n)?;
            }
        }
        Ok(())
    }

    /// Unit ball is a polytope with enumerable generating points.
    pub fn is_polyhedral(&self) -> bool {
        matches!(
            self,
            NormSpec::L1
                | NormSpec::Linf
                | NormSpec::LorentzD { .. }
                | NormSpec::LorentzPredual { .. }
                | NormSpec::Xw { .. }
        )
    }

    /// The dual norm as a spec, when it belongs to the family.
    pub fn dual_spec(&self) -> Option<NormSpec> {
        match self {
            NormSpec::L1 => Some(NormSpec::Linf),
            NormSpec::Linf => Some(NormSpec::L1),
            NormSpec::L2 => Some(NormSpec::L2),
            NormSpec::Lp { p } => Some(NormSpec::Lp { p: p / (p - 1.0) }),
            NormSpec::LorentzD { w } => Some(NormSpec::LorentzPredual { w: w.clone() }),
            NormSpec::LorentzPredual { w } => Some(NormSpec::LorentzD { w: w.clone() }),
            NormSpec::Xw { .. } | NormSpec::StrictC0 { .. } => None,
        }
    }

    /// The norm restricted to vectors supported on `idx` (sorted), in local coordinates.
    pub fn restrict(&self, idx: &[usize]) -> NormSpec {
        match self {
            NormSpec::Xw { w } => NormSpec::Xw { w: idx.iter().map(|&i| w[i]).collect() },
            NormSpec::LorentzD { w } => NormSpec::LorentzD { w: w[..idx.len()].to_vec() },
            NormSpec::LorentzPredual { w } => NormSpec::LorentzPredual { w: w[..idx.len()].to_vec() },
            other => other.clone(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(d, n),
            None => Ok(()),
        }
    }
}

pub fn norm(x: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.check(x.len())?;
    Ok(norm_unchecked(x, spec))
}

pub(crate) fn norm_unchecked(x: &[f64], spec: &NormSpec) -> f64 {
    match spec {
        NormSpec::L1 => x.iter().map(|v| v.abs()).sum(),
        NormSpec::L2 => l2(x),
        NormSpec::Lp { p } => x.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p),
        NormSpec::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        NormSpec::LorentzD { w } => {
            let idx = order_by_abs_desc(x);
            idx.iter().zip(w).map(|(&i, wi)| x[i].abs() * wi).sum()
        }
        NormSpec::LorentzPredual { w } => {
            let idx = order_by_abs_desc(x);
            let (mut s, mut wk, mut best) = (0.0, 0.0, 0.0f64);
            for (k, &i) in idx.iter().enumerate() {
                s += x[i].abs();
                wk += w[k];
                best = best.max(s / wk);
            }
            best
        }
        NormSpec::Xw { w } => {
            let sup = x.iter().zip(w).fold(0.0f64, |m, (v, wi)| m.max((1.0 - wi) * v.abs()));
            sup + x.iter().zip(w).map(|(v, wi)| wi * v.abs()).sum::<f64>()
        }
        NormSpec::StrictC0 { theta } => {
            x.iter().fold(0.0f64, |m, v| m.max(v.abs())) + theta * l2(x)
        }
    }
}

/// `sup { f(x) : ‖x‖ ≤ 1 }`.
pub fn dual_norm(f: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.check(f.len())?;
    Ok(match spec {
        NormSpec::Xw { w } => xw_dual(f, w).0,
        NormSpec::StrictC0 { theta } => strict_c0_dual(f, *theta).0,
        other => norm_unchecked(f, &other.dual_spec().expect("closed-form dual")),
    })
}

/// Exact dual of X(w). The maximizing ball point is `σ ⊙ c_S` on a set `S`;
/// maximizing `Σ_S a_m / (1 + Σ_S b_m)` picks a prefix in the order of `a_m / b_m`.
fn xw_dual(f: &[f64], w: &[f64]) -> (f64, Vec<f64>) {
    let n = f.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        (f[j].abs() / w[j])
            .partial_cmp(&(f[i].abs() / w[i]))
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let (mut a, mut b) = (0.0, 0.0);
    let (mut best, mut best_len) = (0.0, 0);
    for (k, &m) in idx.iter().enumerate() {
        a += f[m].abs() / (1.0 - w[m]);
        b += w[m] / (1.0 - w[m]);
        let r = a / (1.0 + b);
        if r > best {
            best = r;
            best_len = k + 1;
        }
    }
    let mut x = vec![0.0; n];
    if best_len > 0 {
        let set = &idx[..best_len];
        let q: f64 = set.iter().map(|&m| w[m] / (1.0 - w[m])).sum();
        for &m in set {
            x[m] = sign(f[m]) / ((1.0 + q) * (1.0 - w[m]));
        }
    }
    (best, x)
}

/// `max <a, y>` over `0 ≤ y ≤ s`, `‖y‖₂ ≤ r` for `a ≥ 0`, by water-filling.
fn box_ball_max(a: &[f64], s: f64, r: f64) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut y = vec![0.0; n];
    if r <= 0.0 || s <= 0.0 {
        return (0.0, y);
    }
    let idx = order_by_abs_desc(a);
    let support: Vec<usize> = idx.into_iter().filter(|&i| a[i] > 0.0).collect();
    if support.is_empty() {
        return (0.0, y);
    }
    if s * (support.len() as f64).sqrt() <= r {
        for &i in &support {
            y[i] = s;
        }
        return (s * support.iter().map(|&i| a[i]).sum::<f64>(), y);
    }
    // j entries capped at s, the rest scaled by lambda.
    let mut tail_sq: f64 = support.iter().map(|&i| a[i] * a[i]).sum();
    for j in 0..support.len() {
        let rem = r * r - j as f64 * s * s;
        if rem > 0.0 && tail_sq > 0.0 {
            let lambda = (rem / tail_sq).sqrt();
            let top_uncapped = a[support[j]];
            if lambda * top_uncapped <= s * (1.0 + 1e-15) {
                for (k, &i) in support.iter().enumerate() {
                    y[i] = if k < j { s } else { (lambda * a[i]).min(s) };
                }
                return (dot(a, &y), y);
            }
        }
        tail_sq -= a[support[j]] * a[support[j]];
    }
    for &i in &support {
        y[i] = s;
    }
    (dot(a, &y), y)
}

/// Dual of `‖·‖∞ + θ‖·‖₂`: golden-section search over the sup-norm level `s`,
/// the inner value being concave in `s`.
fn strict_c0_dual(f: &[f64], theta: f64) -> (f64, Vec<f64>) {
    let a: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let h = |s: f64| box_ball_max(&a, s, (1.0 - s) / theta);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = h(x1).0;
    let mut f2 = h(x2).0;
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = h(x2).0;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = h(x1).0;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let (val, y) = h(0.5 * (lo + hi));
    let x: Vec<f64> = y.iter().zip(f).map(|(yi, fi)| yi * sign(*fi)).collect();
    (val, x)
}

/// A unit-ball point `x` with `f(x) = dual_norm(f)`.
pub fn ball_argmax(f: &[f64], spec: &NormSpec) -> Result<Vec<f64>> {
    spec.check(f.len())?;
    let n = f.len();
    Ok(match spec {
        NormSpec::L1 => {
            let mut x = vec![0.0; n];
            if n > 0 {
                let i = lowest_argmax_abs(f);
                x[i] = sign(f[i]);
            }
            x
        }
        NormSpec::Linf => f.iter().map(|v| sign(*v)).collect(),
        NormSpec::L2 => {
            let r = l2(f);
            if r == 0.0 {
                vec![0.0; n]
            } else {
                f.iter().map(|v| v / r).collect()
            }
        }
        NormSpec::Lp { p } => {
            let q = p / (p - 1.0);
            let r = norm_unchecked(f, &NormSpec::Lp { p: q });
            if r == 0.0 {
                vec![0.0; n]
            } else {
                f.iter().map(|v| sign(*v) * (v.abs() / r).powf(q - 1.0)).collect()
            }
        }
        // dual is d*(w,1): indicator of the best top-k set
        NormSpec::LorentzD { w } => {
            let idx = order_by_abs_desc(f);
            let (mut s, mut wk, mut best, mut best_k) = (0.0, 0.0, -1.0, 1);
            for (k, &i) in idx.iter().enumerate() {
                s += f[i].abs();
                wk += w[k];
                if s / wk > best {
                    best = s / wk;
                    best_k = k + 1;
                }
            }
            let wk: f64 = w[..best_k].iter().sum();
            let mut x = vec![0.0; n];
            for &i in &idx[..best_k] {
                x[i] = sign(f[i]) / wk;
            }
            x
        }
        // dual is d(w,1): w placed along the decreasing rearrangement of f
        NormSpec::LorentzPredual { w } => {
            let idx = order_by_abs_desc(f);
            let mut x = vec![0.0; n];
            for (k, &i) in idx.iter().enumerate() {
                x[i] = sign(f[i]) * w[k];
            }
            x
        }
        NormSpec::Xw { w } => xw_dual(f, w).1,
        NormSpec::StrictC0 { theta } => strict_c0_dual(f, *theta).1,
    })
}

/// A functional `f` with `f(x) = ‖x‖` and `‖f‖* = 1`.
pub fn supporting_functional(x: &[f64], spec: &NormSpec) -> Result<Vec<f64>> {
    spec.check(x.len())?;
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let n = x.len();
    Ok(match spec {
        NormSpec::L1 => x
            .iter()
            .map(|v| if *v == 0.0 { 0.0 } else { sign(*v) })
            .collect(),
        NormSpec::Linf => {
            let mut f = vec![0.0; n];
            let i = lowest_argmax_abs(x);
            f[i] = sign(x[i]);
            f
        }
        NormSpec::L2 | NormSpec::Lp { .. } | NormSpec::LorentzD { .. } | NormSpec::LorentzPredual { .. } => {
            ball_argmax(x, &spec.dual_spec().expect("closed-form dual"))?
        }
        NormSpec::Xw { w } => {
            let mut m_star = 0;
            for m in 1..n {
                if (1.0 - w[m]) * x[m].abs() > (1.0 - w[m_star]) * x[m_star].abs() {
                    m_star = m;
                }
            }
            let mut f: Vec<f64> = x.iter().zip(w).map(|(v, wi)| sign(*v) * wi).collect();
            f[m_star] += sign(x[m_star]) * (1.0 - w[m_star]);
            f
        }
        NormSpec::StrictC0 { theta } => {
            let r = l2(x);
            let i = lowest_argmax_abs(x);
            let mut f: Vec<f64> = x.iter().map(|v| theta * v / r).collect();
            f[i] += sign(x[i]);
            f
        }
    })
}

fn pow_u128(b: u128, e: usize) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(b))
}

fn distinct_perm_count(w: &[f64]) -> u128 {
    let mut count: u128 = (1..=w.len() as u128).fold(1u128, |a, k| a.saturating_mul(k));
    let mut i = 0;
    while i < w.len() {
        let mut j = i;
        while j < w.len() && w[j] == w[i] {
            j += 1;
        }
        count /= (1..=(j - i) as u128).product::<u128>();
        i = j;
    }
    count
}

/// Number of points `unit_ball_vertices` returns, if polyhedral.
pub fn vertex_count(spec: &NormSpec, n: usize) -> Option<u128> {
    let half_signs = pow_u128(2, n.saturating_sub(1));
    match spec {
        NormSpec::L1 => Some(n as u128),
        NormSpec::Linf => Some(half_signs),
        NormSpec::LorentzD { .. } | NormSpec::Xw { .. } => Some((pow_u128(3, n) - 1) / 2),
        NormSpec::LorentzPredual { w } => Some(distinct_perm_count(w).saturating_mul(half_signs)),
        _ => None,
    }
}

fn check_count(count: u128) -> Result<()> {
    if count > VERTEX_LIMIT as u128 {
        Err(Error::TooManyVertices { count, limit: VERTEX_LIMIT })
    } else {
        Ok(())
    }
}

/// Sign patterns on `support` (first entry +1), in increasing mask order.
fn sign_patterns(support: &[usize], magnitudes: &[f64], n: usize, out: &mut Vec<Vec<f64>>) {
    let k = support.len();
    if k == 0 {
        return;
    }
    for mask in 0..(1usize << (k - 1)) {
        let mut v = vec![0.0; n];
        for (t, &i) in support.iter().enumerate() {
            let neg = t > 0 && (mask >> (t - 1)) & 1 == 1;
            v[i] = if neg { -magnitudes[t] } else { magnitudes[t] };
        }
        out.push(v);
    }
}

/// Generating points of the unit ball, one per antipodal pair (first nonzero
/// coordinate positive). The ball is the convex hull of `V ∪ −V`.
pub fn unit_ball_vertices(spec: &NormSpec, n: usize) -> Result<Vec<Vec<f64>>> {
    spec.check(n)?;
    let count = vertex_count(spec, n).ok_or_else(|| Error::NonPolyhedral(spec.name().into()))?;
    check_count(count)?;
    let mut out = Vec::with_capacity(count as usize);
    match spec {
        NormSpec::L1 => {
            for i in 0..n {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                out.push(v);
            }
        }
        NormSpec::Linf => sign_patterns(&(0..n).collect::<Vec<_>>(), &vec![1.0; n], n, &mut out),
        NormSpec::LorentzD { w } => {
            for mask in 1usize..(1 << n) {
                let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let wk: f64 = w[..support.len()].iter().sum();
                sign_patterns(&support, &vec![1.0 / wk; support.len()], n, &mut out);
            }
        }
        NormSpec::Xw { w } => {
            for mask in 1usize..(1 << n) {
                let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let q: f64 = support.iter().map(|&m| w[m] / (1.0 - w[m])).sum();
                let mags: Vec<f64> =
                    support.iter().map(|&m| 1.0 / ((1.0 + q) * (1.0 - w[m]))).collect();
                sign_patterns(&support, &mags, n, &mut out);
            }
        }
        NormSpec::LorentzPredual { w } => {
            // distinct arrangements of w via next-permutation on value ranks
            let mut ranks: Vec<usize> = Vec::with_capacity(n);
            let mut values: Vec<f64> = Vec::new();
            for &v in w.iter().rev() {
                if values.last() != Some(&v) {
                    values.push(v);
                }
                ranks.push(values.len() - 1);
            }
            loop {
                let arranged: Vec<f64> = ranks.iter().map(|&r| values[r]).collect();
                sign_patterns(&(0..n).collect::<Vec<_>>(), &arranged, n, &mut out);
                if !next_permutation(&mut ranks) {
                    break;
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(out)
}

fn next_permutation(a: &mut [usize]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Generating points of the dual unit ball (one per antipodal pair).
pub fn dual_ball_vertices(spec: &NormSpec, n: usize) -> Result<Vec<Vec<f64>>> {
    spec.check(n)?;
    match spec {
        NormSpec::Xw { w } => {
            check_count((n as u128).saturating_mul(pow_u128(2, n.saturating_sub(1))))?;
            let mut out = Vec::new();
            for m in 0..n {
                let mut mags = w.clone();
                mags[m] = 1.0;
                sign_patterns(&(0..n).collect::<Vec<_>>(), &mags, n, &mut out);
            }
            Ok(out)
        }
        NormSpec::L1 | NormSpec::Linf | NormSpec::LorentzD { .. } | NormSpec::LorentzPredual { .. } => {
            unit_ball_vertices(&spec.dual_spec().expect("dual spec"), n)
        }
        other => Err(Error::NonPolyhedral(format!("dual of {}", other.name()))),
    }
}

/// Outcome of the norm-invariance test, with a witness on failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormInvariance {
    pub invariant: bool,
    pub witness: Option<NormWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormWitness {
    pub x: Vec<f64>,
    pub g: Permutation,
    pub norm_x: f64,
    pub norm_gx: f64,
}

/// Whether `‖g x‖ = ‖x‖` for all `g ∈ G`.
///
/// Every kind except X(w) depends on `|x|` only through its rearrangement, so
/// it is invariant under all permutations. X(w) is invariant iff `w` is
/// constant on every orbit.
pub fn is_norm_invariant(spec: &NormSpec, g: &PermutationGroup) -> Result<NormInvariance> {
    spec.check(g.degree())?;
    let NormSpec::Xw { w } = spec else {
        return Ok(NormInvariance { invariant: true, witness: None });
    };
    let constant = orbits(g)
        .blocks
        .iter()
        .all(|b| b.iter().all(|&i| w[i] == w[b[0]]));
    if constant {
        return Ok(NormInvariance { invariant: true, witness: None });
    }
    let aux = crate::gallery::auxlemma_witness(w, g)?;
    Ok(NormInvariance {
        invariant: false,
        witness: Some(NormWitness {
            x: aux.x,
            g: aux.g,
            norm_x: aux.norm_x,
            norm_gx: aux.norm_gx,
        }),
    })
}
