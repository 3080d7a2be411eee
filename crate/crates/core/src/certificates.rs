//! Property α-G / quasi-α-G and β-H / quasi-β-H certificates: verification,
//! the ℓ₁ construction and dualization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attainment::orbit_constancy_defect;
use crate::error::{check_dim, Error, Result};
use crate::hull::{ConvexBody, MEMBERSHIP_TOL};
use crate::invariance::is_invariant_point;
use crate::norms::{dual_norm, norm, unit_ball_vertices, NormSpec};
use crate::perm_group::{generate_group, orbits, PermutationGroup, DEFAULT_CAP};
use crate::random::{random_vec, rng};
use crate::tol;

/// Random test vectors used for condition (iv) of β certificates.
pub const BETA_SAMPLES: usize = 1000;
const BETA_SEED: u64 = 0xbe7a;

/// A point and a functional, `(x_λ, x*_λ)` or `(y_λ, y*_λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertPair {
    pub point: Vec<f64>,
    pub functional: Vec<f64>,
}

/// A constant ρ, or one value per pair for the quasi variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rho {
    Constant(f64),
    PerPair(Vec<f64>),
}

impl Rho {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Rho::Constant(r) => *r,
            Rho::PerPair(v) => v.get(i).copied().unwrap_or(f64::NAN),
        }
    }

    pub fn max(&self, len: usize) -> f64 {
        (0..len).map(|i| self.at(i)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    pub pairs: Vec<CertPair>,
    pub rho: Rho,
    pub spec: NormSpec,
    pub group: PermutationGroup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaCertificate {
    pub pairs: Vec<CertPair>,
    pub rho: Rho,
    pub spec: NormSpec,
    pub group: PermutationGroup,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl Condition {
    fn pass() -> Self {
        Self { passed: true, ..Self::default() }
    }

    fn fail(detail: impl Into<String>, witness: Option<Vec<f64>>) -> Self {
        Self { passed: false, detail: Some(detail.into()), witness }
    }
}

/// Per-condition outcome of a certificate check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub i: Condition,
    pub ii: Condition,
    pub iii: Condition,
    pub iv: Condition,
    /// `max_{λ≠μ} |x*_λ(x_μ)|`.
    pub rho_observed: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub vertices: Vec<VertexFinding>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.i.passed && self.ii.passed && self.iii.passed && self.iv.passed
    }
}

/// For a unit-ball vertex `e`: the pairs λ with `t·e ∈ G(x_λ)` and `r_e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexFinding {
    pub vertex: Vec<f64>,
    pub sign: f64,
    pub pairs: Vec<usize>,
    pub r_e: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_shapes(pairs: &[CertPair], spec: &NormSpec, group: &PermutationGroup, rho: &Rho) -> Result<usize> {
    let n = group.degree();
    spec.validate(Some(n))?;
    for p in pairs {
        check_dim(n, p.point.len())?;
        check_dim(n, p.functional.len())?;
    }
    if let Rho::PerPair(v) = rho {
        check_dim(pairs.len(), v.len())?;
    }
    Ok(n)
}

/// (ii): `x*(x) = ‖x‖ = ‖x*‖* = 1`.
fn unit_pairs(pairs: &[CertPair], spec: &NormSpec) -> Result<Condition> {
    for (k, p) in pairs.iter().enumerate() {
        let v = dot(&p.functional, &p.point);
        let nx = norm(&p.point, spec)?;
        let nf = dual_norm(&p.functional, spec)?;
        for (name, val) in [("x*(x)", v), ("‖x‖", nx), ("‖x*‖", nf)] {
            if (val - 1.0).abs() > tol::NORM_REL {
                return Ok(Condition::fail(format!("pair {}: {name} = {val}", k + 1), Some(p.point.clone())));
            }
        }
    }
    Ok(Condition::pass())
}

/// (iii): `|x*_a(x_b)| ≤ ρ(a) < 1` for `a ≠ b` (α), or `|y*_b(y_a)| ≤ ρ(a)` (β).
fn cross_terms(pairs: &[CertPair], rho: &Rho, quasi: bool, functional_index: bool) -> (Condition, f64) {
    let mut observed = 0.0f64;
    let mut cond = Condition::pass();
    for a in 0..pairs.len() {
        let r = rho.at(a);
        if !(0.0..1.0).contains(&r) {
            cond = Condition::fail(format!("rho({}) = {r} is not in [0,1)", a + 1), None);
        }
        for b in 0..pairs.len() {
            if a == b {
                continue;
            }
            let v = if functional_index {
                dot(&pairs[a].functional, &pairs[b].point).abs()
            } else {
                dot(&pairs[b].functional, &pairs[a].point).abs()
            };
            observed = observed.max(v);
            if v > r + tol::NORM_REL && cond.passed {
                let what = if quasi { "quasi" } else { "" };
                cond = Condition::fail(
                    format!("{what} cross term for pairs ({}, {}) is {v} > {r}", a + 1, b + 1),
                    None,
                );
            }
        }
    }
    (cond, observed)
}

fn orbit_points(pairs: &[CertPair], g: &PermutationGroup) -> Vec<(usize, Vec<f64>)> {
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, p) in pairs.iter().enumerate() {
        for e in g.elements() {
            let q = e.apply_unchecked(&p.point);
            if !out.iter().any(|(j, o)| *j == k && o == &q) {
                out.push((k, q));
            }
        }
    }
    out
}

/// Definition (a) of property α-G, with (iv) checked vertex by vertex.
pub fn verify_alpha(cert: &AlphaCertificate) -> Result<CertReport> {
    check_shapes(&cert.pairs, &cert.spec, &cert.group, &cert.rho)?;
    let i = verify_alpha_i(cert)?;
    let ii = unit_pairs(&cert.pairs, &cert.spec)?;
    let (iii, rho_observed) = cross_terms(&cert.pairs, &cert.rho, false, true);
    let iv = hull_is_ball(cert)?;
    Ok(CertReport { i, ii, iii, iv, rho_observed, vertices: vec![] })
}

fn hull_is_ball(cert: &AlphaCertificate) -> Result<Condition> {
    if cert.pairs.is_empty() {
        return Ok(Condition::fail("no pairs", None));
    }
    let pts: Vec<Vec<f64>> = orbit_points(&cert.pairs, &cert.group).into_iter().map(|(_, p)| p).collect();
    for p in &pts {
        let np = norm(p, &cert.spec)?;
        if np > 1.0 + tol::NORM_REL {
            return Ok(Condition::fail(format!("orbit point of norm {np}"), Some(p.clone())));
        }
    }
    let verts = match unit_ball_vertices(&cert.spec, cert.group.degree()) {
        Ok(v) => v,
        Err(e @ (Error::NonPolyhedral(_) | Error::TooManyVertices { .. })) => {
            return Ok(Condition::fail(e.to_string(), None));
        }
        Err(e) => return Err(e),
    };
    let body = ConvexBody::new(pts, true)?;
    let misses: Vec<Option<Vec<f64>>> = verts
        .par_iter()
        .map(|v| match body.contains(v, MEMBERSHIP_TOL) {
            Ok(true) => None,
            _ => Some(v.clone()),
        })
        .collect();
    match misses.into_iter().flatten().next() {
        Some(v) => Ok(Condition::fail("unit-ball vertex outside the absolutely convex hull", Some(v))),
        None => Ok(Condition::pass()),
    }
}

/// Definition (b), quasi-α-G, with per-pair ρ; (iv) reads extreme points as
/// unit-ball vertices and asks for `t·e ∈ G(A_e)` exactly, `t = ±1`.
pub fn verify_quasi_alpha(cert: &AlphaCertificate) -> Result<CertReport> {
    check_shapes(&cert.pairs, &cert.spec, &cert.group, &cert.rho)?;
    let alpha_i = verify_alpha_i(cert)?;
    let ii = unit_pairs(&cert.pairs, &cert.spec)?;
    let (iii, rho_observed) = cross_terms(&cert.pairs, &cert.rho, true, true);
    let orbit = orbit_points(&cert.pairs, &cert.group);
    let verts = match unit_ball_vertices(&cert.spec, cert.group.degree()) {
        Ok(v) => v,
        Err(e @ (Error::NonPolyhedral(_) | Error::TooManyVertices { .. })) => {
            let iv = Condition::fail(e.to_string(), None);
            return Ok(CertReport { i: alpha_i, ii, iii, iv, rho_observed, vertices: vec![] });
        }
        Err(e) => return Err(e),
    };
    let close = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).all(|(u, v)| (s * u - v).abs() <= 1e-12);
    let mut vertices = Vec::new();
    let mut iv = Condition::pass();
    for v in verts {
        let mut best: Option<VertexFinding> = None;
        for s in [1.0, -1.0] {
            let mut found: Vec<usize> = orbit.iter().filter(|(_, q)| close(&v, q, s)).map(|(k, _)| *k).collect();
            found.dedup();
            if found.is_empty() {
                continue;
            }
            let r_e = found.iter().map(|&k| cert.rho.at(k)).fold(0.0, f64::max);
            if best.as_ref().map_or(true, |b| r_e < b.r_e) {
                best = Some(VertexFinding { vertex: v.clone(), sign: s, pairs: found, r_e });
            }
        }
        match best {
            Some(f) if f.r_e < 1.0 => vertices.push(f),
            Some(f) => {
                if iv.passed {
                    iv = Condition::fail(format!("r_e = {} at a vertex", f.r_e), Some(v.clone()));
                }
                vertices.push(f);
            }
            None => {
                if iv.passed {
                    iv = Condition::fail("vertex not in ±G(A)", Some(v.clone()));
                }
            }
        }
    }
    Ok(CertReport { i: alpha_i, ii, iii, iv, rho_observed, vertices })
}

fn verify_alpha_i(cert: &AlphaCertificate) -> Result<Condition> {
    for (k, p) in cert.pairs.iter().enumerate() {
        let d = orbit_constancy_defect(&p.functional, &cert.group)?;
        if d > tol::INVARIANCE {
            return Ok(Condition::fail(
                format!("functional {} varies by {d} on an orbit", k + 1),
                Some(p.functional.clone()),
            ));
        }
    }
    Ok(Condition::pass())
}

/// One pair per orbit, `(e_{min H}, 1_H)`, orbits ordered by their minima; ρ = 0.
pub fn build_alpha_ell1(g: &PermutationGroup, n: usize) -> Result<AlphaCertificate> {
    check_dim(g.degree(), n)?;
    let pairs = orbits(g)
        .blocks
        .iter()
        .map(|b| {
            let mut point = vec![0.0; n];
            point[b[0]] = 1.0;
            let mut functional = vec![0.0; n];
            b.iter().for_each(|&i| functional[i] = 1.0);
            CertPair { point, functional }
        })
        .collect();
    Ok(AlphaCertificate { pairs, rho: Rho::Constant(0.0), spec: NormSpec::L1, group: g.clone() })
}

/// The induced β certificate on the dual space: `y_λ = x*_λ`, `y*_λ = x_λ`,
/// acted on by the inverse permutations.
pub fn dualize_alpha(cert: &AlphaCertificate) -> Result<BetaCertificate> {
    let report = verify_alpha(cert)?;
    if !report.passed() {
        return Err(Error::CertInvalid("alpha certificate does not verify".into()));
    }
    let spec = cert
        .spec
        .dual_spec()
        .ok_or_else(|| Error::CertInvalid(format!("no closed-form dual for {}", cert.spec.name())))?;
    let inv: Vec<_> = cert.group.generators().iter().map(|g| g.inverse()).collect();
    let group = generate_group(cert.group.degree(), inv, DEFAULT_CAP.max(cert.group.order()))?;
    Ok(BetaCertificate {
        pairs: cert
            .pairs
            .iter()
            .map(|p| CertPair { point: p.functional.clone(), functional: p.point.clone() })
            .collect(),
        rho: cert.rho.clone(),
        spec,
        group,
    })
}

/// `sup_{λ,h} |y*_λ(h(y))|`.
fn beta_sup(cert: &BetaCertificate, y: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for h in cert.group.elements() {
        let hy = h.apply_unchecked(y);
        for p in &cert.pairs {
            sup = sup.max(dot(&p.functional, &hy).abs());
        }
    }
    sup
}

/// Definition (a) of property β-H; (iv) on unit-ball vertices and seeded
/// random vectors.
pub fn verify_beta(cert: &BetaCertificate) -> Result<CertReport> {
    check_shapes(&cert.pairs, &cert.spec, &cert.group, &cert.rho)?;
    let mut i = Condition::pass();
    for (k, p) in cert.pairs.iter().enumerate() {
        if !is_invariant_point(&p.point, &cert.group)? {
            i = Condition::fail(format!("point {} is not fixed", k + 1), Some(p.point.clone()));
            break;
        }
    }
    let ii = unit_pairs(&cert.pairs, &cert.spec)?;
    let (iii, rho_observed) = cross_terms(&cert.pairs, &cert.rho, false, false);
    let n = cert.group.degree();
    let mut tests = match unit_ball_vertices(&cert.spec, n) {
        Ok(v) => v,
        Err(Error::NonPolyhedral(_) | Error::TooManyVertices { .. }) => vec![],
        Err(e) => return Err(e),
    };
    let mut r = rng(BETA_SEED);
    tests.extend((0..BETA_SAMPLES).map(|_| random_vec(&mut r, n, 1.0)));
    let mut iv = Condition::pass();
    for y in tests {
        let gap = (norm(&y, &cert.spec)? - beta_sup(cert, &y)).abs();
        if gap > tol::NORM_REL {
            iv = Condition::fail(format!("norm and functional sup differ by {gap}"), Some(y));
            break;
        }
    }
    Ok(CertReport { i, ii, iii, iv, rho_observed, vertices: vec![] })
}
