//! Norm-attainment perturbations: the Lindenstrauss iteration, the quasi-α
//! rank-one perturbation and the β rank-one perturbation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::attainment::operator_norm;
use crate::certificates::{verify_beta, verify_quasi_alpha, AlphaCertificate, BetaCertificate};
use crate::error::{check_dim, Error, Result};
use crate::invariance::{is_invariant_operator, Operator};
use crate::norms::{dual_norm, norm, supporting_functional, NormSpec};
use crate::perm_group::PermutationGroup;
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub eps: f64,
    pub terms: Vec<f64>,
}

fn next_term(prev: f64, k: usize) -> f64 {
    (prev * prev / 8.0).min(1.0 / (10.0 * k as f64))
}

/// Number of schedule terms before they leave the normal floating-point range.
pub fn schedule_capacity(eps: f64) -> usize {
    let mut e = (eps / 8.0).min(0.1);
    let mut k = 0;
    while e.is_normal() {
        k += 1;
        e = next_term(e, k + 1);
    }
    k
}

/// `ε₁ = min(ε/8, 1/10)`, `ε_{k+1} = min(ε_k²/8, 1/(10(k+1)))`, with
/// `2Σε_i < ε`, `2Σ_{i>k} ε_i < ε_k²` and `ε_k < 1/(10k)` checked.
pub fn epsilon_schedule(eps: f64, len: usize) -> Result<EpsilonSchedule> {
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(Error::BadEps(eps));
    }
    let mut terms = Vec::with_capacity(len);
    let mut e = (eps / 8.0).min(0.1);
    for k in 1..=len {
        if !e.is_normal() {
            return Err(Error::ScheduleUnderflow(k));
        }
        terms.push(e);
        e = next_term(e, k + 1);
    }
    let total: f64 = terms.iter().sum();
    let ok = 2.0 * total < eps
        && terms.iter().enumerate().all(|(k, &t)| {
            let tail: f64 = terms[k + 1..].iter().sum();
            (2.0 * tail).sqrt() < t && t < 1.0 / (10.0 * (k + 1) as f64)
        });
    if !ok {
        return Err(Error::PreconditionFailed("schedule inequalities fail".into()));
    }
    Ok(EpsilonSchedule { eps, terms })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub eps_k: f64,
    pub norm_tk: f64,
    pub defect_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindenstraussOptions {
    pub max_steps: usize,
    pub tol: f64,
    /// Updates performed before the attainment test may stop the run.
    pub min_steps: usize,
}

impl Default for LindenstraussOptions {
    fn default() -> Self {
        Self { max_steps: 100, tol: tol::ATTAINED, min_steps: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindenstraussResult {
    pub operator: Operator,
    pub trace: Vec<TraceRecord>,
    /// Updates applied.
    pub iterations: usize,
    /// Iterates `T_0, …, T_K` in the original scale.
    #[serde(skip)]
    pub iterates: Vec<Operator>,
    /// `‖T_∞ − T‖ / ‖T‖`.
    pub drift: f64,
    pub defect: f64,
}

fn rank_one(y: &[f64], f: &[f64]) -> DMatrix<f64> {
    DVector::from_column_slice(y) * DVector::from_column_slice(f).transpose()
}

/// `T_{k+1} = T_k + ε_k · x_k*(T_k ·) T_k(x_k)` on `T/‖T‖`, with `x_k` the
/// exact maximizer and `x_k*` a supporting functional at `T_k(x_k)`.
pub fn lindenstrauss_iterate(
    t: &Operator,
    g: &PermutationGroup,
    eps: f64,
    opts: &LindenstraussOptions,
) -> Result<LindenstraussResult> {
    check_dim(g.degree(), t.cols())?;
    if !is_invariant_operator(t, g)? {
        return Err(Error::NotInvariant);
    }
    let first = operator_norm(t)?;
    let scale = first.operator_norm;
    let unchanged = |trace: Vec<TraceRecord>| LindenstraussResult {
        operator: t.clone(),
        trace,
        iterations: 0,
        iterates: vec![t.clone()],
        drift: 0.0,
        defect: first.defect,
    };
    if eps == 0.0 || scale == 0.0 {
        return Ok(unchanged(vec![]));
    }
    let steps = opts.max_steps.min(schedule_capacity(eps));
    let schedule = epsilon_schedule(eps, steps.max(1))?;
    let mut tk = t.with_matrix(t.matrix() / scale)?;
    let mut iterates = vec![t.clone()];
    let mut trace = Vec::new();
    let mut defect = first.defect / scale;
    for (k, &ek) in schedule.terms.iter().enumerate().take(steps) {
        let rep = operator_norm(&tk)?;
        defect = rep.defect;
        trace.push(TraceRecord { k: k + 1, eps_k: ek, norm_tk: rep.operator_norm * scale, defect_k: rep.defect * scale });
        if defect <= opts.tol && k >= opts.min_steps {
            break;
        }
        let xk = rep.witness.expect("nonzero operator has a witness");
        let y = tk.apply(&xk)?;
        let phi = supporting_functional(&y, tk.codomain())?;
        let row = tk.adjoint_apply(&phi)?;
        tk = tk.with_matrix(tk.matrix() + rank_one(&y, &row) * ek)?;
        iterates.push(tk.with_matrix(tk.matrix() * scale)?);
    }
    if iterates.len() == 1 && trace.len() == 1 {
        return Ok(unchanged(trace));
    }
    let last = operator_norm(&tk)?;
    defect = last.defect.min(defect);
    if last.defect > opts.tol {
        return Err(Error::NoConvergence { steps: iterates.len() - 1, defect: last.defect });
    }
    let out = tk.with_matrix(tk.matrix() * scale)?;
    let diff = t.with_matrix(out.matrix() - t.matrix())?;
    let drift = operator_norm(&diff)?.operator_norm / scale;
    Ok(LindenstraussResult {
        operator: out,
        trace,
        iterations: iterates.len() - 1,
        iterates,
        drift,
        defect: defect * scale,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiAlphaResult {
    pub operator: Operator,
    /// 1-based index of the chosen pair.
    pub lambda0: usize,
    pub norm_t: f64,
    /// `‖S(x_{λ₀})‖`.
    pub peak: f64,
    /// `(1+ε)(1−δ)‖T‖`.
    pub peak_bound: f64,
    /// `max { ‖S(g x_μ)‖ : μ ≠ λ₀, g ∈ G }`.
    pub others: f64,
    /// `(1+ερ_max)‖T‖`.
    pub others_bound: f64,
}

fn same_space(a: &NormSpec, b: &NormSpec) -> bool {
    a == b
}

/// `S = T + ε · x*_{λ₀}(·) T(x_{λ₀})`, with `λ₀` maximizing `‖T(x_λ)‖`.
pub fn quasi_alpha_perturb(
    t: &Operator,
    cert: &AlphaCertificate,
    g: &PermutationGroup,
    eps: f64,
    delta: f64,
) -> Result<QuasiAlphaResult> {
    check_dim(g.degree(), t.cols())?;
    if !(eps >= 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DeltaInfeasible(format!("eps = {eps}, delta = {delta}")));
    }
    if !same_space(&cert.spec, t.domain()) || cert.group.degree() != t.cols() {
        return Err(Error::CertInvalid("certificate space differs from the domain".into()));
    }
    if !verify_quasi_alpha(cert)?.passed() {
        return Err(Error::CertInvalid("quasi-alpha certificate does not verify".into()));
    }
    if !is_invariant_operator(t, g)? {
        return Err(Error::NotInvariant);
    }
    let rho_max = cert.rho.max(cert.pairs.len());
    if eps > 0.0 && !((1.0 + eps) * (1.0 - delta) > 1.0 + eps * rho_max) {
        return Err(Error::DeltaInfeasible(format!(
            "(1+{eps})(1-{delta}) = {} is not above 1+eps*rho = {}",
            (1.0 + eps) * (1.0 - delta),
            1.0 + eps * rho_max
        )));
    }
    let norm_t = operator_norm(t)?.operator_norm;
    let images: Vec<f64> = cert
        .pairs
        .iter()
        .map(|p| norm(&t.apply_unchecked(&p.point), t.codomain()))
        .collect::<Result<_>>()?;
    let mut l0 = 0;
    for (k, &v) in images.iter().enumerate() {
        if v > images[l0] {
            l0 = k;
        }
    }
    if images.is_empty() || images[l0] < (1.0 - delta) * norm_t {
        return Err(Error::NoEligibleLambda);
    }
    let x0 = &cert.pairs[l0].point;
    let tx0 = t.apply_unchecked(x0);
    let s = if eps == 0.0 {
        t.clone()
    } else {
        t.with_matrix(t.matrix() + rank_one(&tx0, &cert.pairs[l0].functional) * eps)?
    };
    let peak = norm(&s.apply_unchecked(x0), s.codomain())?;
    let mut others = 0.0f64;
    for (k, p) in cert.pairs.iter().enumerate() {
        if k == l0 {
            continue;
        }
        for e in g.elements() {
            others = others.max(norm(&s.apply_unchecked(&e.apply_unchecked(&p.point)), s.codomain())?);
        }
    }
    Ok(QuasiAlphaResult {
        operator: s,
        lambda0: l0 + 1,
        norm_t,
        peak,
        peak_bound: (1.0 + eps) * (1.0 - delta) * norm_t,
        others,
        others_bound: (1.0 + eps * rho_max) * norm_t,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaResult {
    pub operator: Operator,
    /// 1-based index of the chosen pair.
    pub lambda0: usize,
    /// `x* = T* y*_{λ₀}`.
    pub x_star: Vec<f64>,
    pub norm_t: f64,
    /// `‖S − T‖`.
    pub distance: f64,
    pub defect: f64,
    pub attained: bool,
}

/// `S = T + [(1+ε/2) x* − T* y*_{λ₀}](·) y_{λ₀}` with `x* = T* y*_{λ₀}`,
/// i.e. `S = T + (ε/2) y_{λ₀} ⊗ T* y*_{λ₀}`.
pub fn beta_perturb(
    t: &Operator,
    cert: &BetaCertificate,
    g: &PermutationGroup,
    eps: f64,
    delta: f64,
) -> Result<BetaResult> {
    check_dim(g.degree(), t.cols())?;
    if !same_space(&cert.spec, t.codomain()) || cert.group.degree() != t.rows() {
        return Err(Error::CertInvalid("certificate space differs from the codomain".into()));
    }
    if !verify_beta(cert)?.passed() {
        return Err(Error::CertInvalid("beta certificate does not verify".into()));
    }
    if !is_invariant_operator(t, g)? {
        return Err(Error::NotInvariant);
    }
    let r = cert.rho.max(cert.pairs.len());
    let half = eps / 2.0;
    if eps > 0.0 && !(delta > 0.0 && delta < half && 1.0 + r * (half + delta) < (1.0 + half) * (1.0 - delta)) {
        return Err(Error::DeltaInfeasible(format!(
            "need 0 < delta < eps/2 and 1 + r(eps/2 + delta) < (1 + eps/2)(1 - delta); eps = {eps}, delta = {delta}, r = {r}"
        )));
    }
    let norm_t = operator_norm(t)?.operator_norm;
    let adj: Vec<Vec<f64>> = cert.pairs.iter().map(|p| t.adjoint_apply(&p.functional)).collect::<Result<_>>()?;
    let values: Vec<f64> = adj.iter().map(|f| dual_norm(f, t.domain())).collect::<Result<_>>()?;
    let mut l0 = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[l0] {
            l0 = k;
        }
    }
    if values.is_empty() || (norm_t > 0.0 && !(values[l0] > (1.0 - delta) * norm_t)) {
        return Err(Error::NoEligibleLambda);
    }
    let s = if eps == 0.0 {
        t.clone()
    } else {
        t.with_matrix(t.matrix() + rank_one(&cert.pairs[l0].point, &adj[l0]) * half)?
    };
    let rep = operator_norm(&s)?;
    let distance = operator_norm(&t.with_matrix(s.matrix() - t.matrix())?)?.operator_norm;
    Ok(BetaResult {
        operator: s,
        lambda0: l0 + 1,
        x_star: adj[l0].clone(),
        norm_t,
        distance,
        defect: rep.defect,
        attained: rep.attained,
    })
}
