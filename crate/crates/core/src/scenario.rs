//! Scenario files: one command with JSON parameters, run deterministically
//! from a seed, reported as JSON or CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attainment::{absolutely_exposing_check, eta_grid, in_a_eps, operator_norm, slice, sup_on_set};
use crate::certificates::{
    build_alpha_ell1, dualize_alpha, verify_alpha, verify_beta, verify_quasi_alpha, AlphaCertificate, BetaCertificate,
    CertPair, Rho,
};
use crate::error::Error;
use crate::gallery::{
    auxlemma_witness, build_c0_counterexample, build_dstar_counterexample, build_xw_counterexample, check_invariant,
    distance_to_truncated, jensen_violations, Construction,
};
use crate::hull::ConvexBody;
use crate::invariance::{
    is_invariant_operator, is_invariant_point, norming_check, symmetrize_functional, symmetrize_operator,
    symmetrize_point, Operator,
};
use crate::norms::{dual_norm, norm, NormSpec};
use crate::perm_group::{generate_group, Family, Permutation, PermutationGroup, DEFAULT_CAP};
use crate::perturbation::{beta_perturb, lindenstrauss_iterate, quasi_alpha_perturb, LindenstraussOptions};
use crate::separation::{separate_invariant, separate_with_margin};
use crate::tol;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Orbits,
    Symmetrize,
    Separate,
    CertifyAlpha,
    CertifyBeta,
    Perturb,
    Slice,
    Gallery,
    Auxlemma,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub params: Value,
}

/// A group given by generators, or by a family acting on blocks (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub degree: usize,
    #[serde(default)]
    pub generators: Option<Vec<Permutation>>,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub blocks: Option<Vec<Vec<usize>>>,
}

impl GroupSpec {
    pub fn build(&self) -> crate::Result<PermutationGroup> {
        if let Some(gens) = &self.generators {
            return generate_group(self.degree, gens.clone(), DEFAULT_CAP);
        }
        let blocks: Vec<Vec<usize>> = match &self.blocks {
            Some(b) => b
                .iter()
                .map(|blk| {
                    blk.iter()
                        .map(|&i| {
                            if i == 0 || i > self.degree {
                                Err(Error::InvalidPermutation(format!("block index {i} outside 1..={}", self.degree)))
                            } else {
                                Ok(i - 1)
                            }
                        })
                        .collect()
                })
                .collect::<crate::Result<_>>()?,
            None => vec![(0..self.degree).collect()],
        };
        PermutationGroup::on_blocks(self.degree, &blocks, self.family.unwrap_or(Family::Trivial), DEFAULT_CAP)
    }
}

/// A polytope by generators, or the unit ball of a polyhedral norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    #[serde(default)]
    pub generators: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub absolutely_convex: bool,
    #[serde(default)]
    pub unit_ball: Option<NormSpec>,
    #[serde(default)]
    pub n: Option<usize>,
}

impl BodySpec {
    pub fn build(&self) -> crate::Result<ConvexBody> {
        match (&self.generators, &self.unit_ball) {
            (Some(g), None) => ConvexBody::new(g.clone(), self.absolutely_convex),
            (None, Some(spec)) => {
                let n = self.n.or(spec.dim()).ok_or_else(|| Error::InvalidNorm("unit_ball needs n".into()))?;
                ConvexBody::unit_ball(spec, n)
            }
            _ => Err(Error::InvalidNorm("body needs exactly one of generators and unit_ball".into())),
        }
    }
}

/// Failure to read or decode a scenario, with the JSON pointer of the bad field.
#[derive(Clone, Debug, PartialEq)]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment;
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

fn decode<T: serde::de::DeserializeOwned>(v: &Value, base: &str) -> Result<T, InputError> {
    serde_path_to_error::deserialize(v).map_err(|e| InputError {
        path: format!("{base}{}", pointer(e.path())),
        message: e.inner().to_string(),
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, InputError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| InputError {
        path: pointer(e.path()),
        message: e.inner().to_string(),
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError {
        path: String::new(),
        message: format!("{}: {e}", path.display()),
    })?;
    parse_scenario(&text)
}

/// Rows for CSV output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Result of running a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub json: Value,
    pub table: Option<Table>,
}

struct Run {
    report: Value,
    checks: BTreeMap<String, bool>,
    table: Option<Table>,
}

enum Failure {
    Input(InputError),
    Math(Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(InputError { path: "/params".into(), message: e.to_string() })
        } else {
            Failure::Math(e)
        }
    }
}

type Step = std::result::Result<Run, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn field<T: serde::de::DeserializeOwned>(params: &Value, key: &str) -> Result<T, InputError> {
    let v = params.get(key).ok_or_else(|| InputError {
        path: format!("/params/{key}"),
        message: "missing field".into(),
    })?;
    decode(v, &format!("/params/{key}"))
}

fn opt_field<T: serde::de::DeserializeOwned>(params: &Value, key: &str) -> Result<Option<T>, InputError> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => decode(v, &format!("/params/{key}")).map(Some),
    }
}

fn group_or_trivial(params: &Value, n: usize) -> std::result::Result<PermutationGroup, Failure> {
    match opt_field::<GroupSpec>(params, "group")? {
        Some(g) => Ok(g.build()?),
        None => Ok(PermutationGroup::trivial(n)),
    }
}

/// Runs a scenario; `tol` overrides the scenario's tolerance.
pub fn run(s: &Scenario, tol_override: Option<f64>) -> Outcome {
    let tol = tol_override.or(s.tol).unwrap_or(tol::ATTAINED);
    let p = &s.params;
    let step = match s.command {
        Command::Orbits => run_orbits(p),
        Command::Symmetrize => run_symmetrize(p),
        Command::Separate => run_separate(p),
        Command::CertifyAlpha => run_certify_alpha(p),
        Command::CertifyBeta => run_certify_beta(p),
        Command::Perturb => run_perturb(p, tol),
        Command::Slice => run_slice(p),
        Command::Gallery => run_gallery(p, s.seed),
        Command::Auxlemma => run_auxlemma(p),
    };
    let command = to_value(&s.command);
    match step {
        Ok(run) => {
            let pass = run.checks.values().all(|&b| b);
            Outcome {
                exit_code: if pass { EXIT_PASS } else { EXIT_FAIL },
                json: json!({
                    "command": command,
                    "seed": s.seed,
                    "tol": tol,
                    "status": if pass { "pass" } else { "fail" },
                    "checks": run.checks,
                    "report": run.report,
                }),
                table: run.table,
            }
        }
        Err(Failure::Math(e)) => Outcome {
            exit_code: EXIT_FAIL,
            json: json!({
                "command": command,
                "seed": s.seed,
                "tol": tol,
                "status": "error",
                "error": {"kind": e.kind(), "message": e.to_string()},
            }),
            table: None,
        },
        Err(Failure::Input(e)) => input_failure(Some(command), &e),
    }
}

/// The JSON body for an input error.
pub fn input_failure(command: Option<Value>, e: &InputError) -> Outcome {
    Outcome {
        exit_code: EXIT_INPUT,
        json: json!({
            "command": command,
            "status": "input-error",
            "error": {"path": e.path, "message": e.message},
        }),
        table: None,
    }
}

fn run_orbits(p: &Value) -> Step {
    let g: GroupSpec = field(p, "group")?;
    let g = g.build()?;
    let orb = g.orbits();
    let blocks = orb.one_based();
    let table = Table {
        header: vec!["block".into(), "size".into(), "members".into()],
        rows: blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                vec![
                    (k + 1).to_string(),
                    b.len().to_string(),
                    b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
                ]
            })
            .collect(),
    };
    Ok(Run {
        report: json!({"degree": g.degree(), "order": g.order(), "orbits": blocks, "sizes": orb.sizes()}),
        checks: BTreeMap::new(),
        table: Some(table),
    })
}

fn run_symmetrize(p: &Value) -> Step {
    let n: Option<usize> = opt_field(p, "n")?;
    let x: Option<Vec<f64>> = opt_field(p, "x")?;
    let f: Option<Vec<f64>> = opt_field(p, "functional")?;
    let t: Option<Operator> = opt_field(p, "operator")?;
    let spec: NormSpec = opt_field(p, "norm")?.unwrap_or(NormSpec::L2);
    let dim = n
        .or(x.as_ref().map(Vec::len))
        .or(f.as_ref().map(Vec::len))
        .or(t.as_ref().map(Operator::cols))
        .ok_or_else(|| InputError { path: "/params".into(), message: "nothing to symmetrize".into() })?;
    let g = group_or_trivial(p, dim)?;
    let mut report = serde_json::Map::new();
    let mut checks = BTreeMap::new();
    if let Some(x) = x {
        let xb = symmetrize_point(&x, &g)?;
        let xbb = symmetrize_point(&xb, &g)?;
        checks.insert("point_idempotent".into(), xb.iter().zip(&xbb).all(|(a, b)| (a - b).abs() <= tol::INVARIANCE));
        checks.insert("point_invariant".into(), is_invariant_point(&xb, &g)?);
        if crate::norms::is_norm_invariant(&spec, &g)?.invariant {
            let (nx, nb) = (norm(&x, &spec)?, norm(&xb, &spec)?);
            checks.insert("point_norm_decreases".into(), nb <= nx * (1.0 + tol::NORM_REL) + tol::NORM_REL);
        }
        report.insert("point".into(), to_value(&xb));
    }
    if let Some(f) = f {
        let fb = symmetrize_functional(&f, &g)?;
        let fbb = symmetrize_functional(&fb, &g)?;
        checks.insert("functional_idempotent".into(), fb.iter().zip(&fbb).all(|(a, b)| (a - b).abs() <= tol::INVARIANCE));
        if crate::norms::is_norm_invariant(&spec, &g)?.invariant {
            let (nf, nb) = (dual_norm(&f, &spec)?, dual_norm(&fb, &spec)?);
            checks.insert("functional_dual_norm_decreases".into(), nb <= nf * (1.0 + tol::NORM_REL) + tol::NORM_REL);
        }
        report.insert("functional".into(), to_value(&fb));
    }
    if let Some(t) = t {
        let tb = symmetrize_operator(&t, &g)?;
        checks.insert("operator_invariant".into(), is_invariant_operator(&tb, &g)?);
        let idem = symmetrize_operator(&tb, &g)?;
        checks.insert(
            "operator_idempotent".into(),
            (idem.matrix() - tb.matrix()).amax() <= tol::INVARIANCE * tb.max_abs_entry().max(1.0),
        );
        let domain_inv = crate::norms::is_norm_invariant(t.domain(), &g)?.invariant;
        if domain_inv {
            if let (Ok(a), Ok(b)) = (operator_norm(&t), operator_norm(&tb)) {
                checks.insert(
                    "operator_norm_decreases".into(),
                    b.operator_norm <= a.operator_norm * (1.0 + tol::NORM_REL) + tol::NORM_REL,
                );
                report.insert("operator_norm".into(), json!({"before": a.operator_norm, "after": b.operator_norm}));
            }
            if let Ok(nr) = norming_check(&tb, &g) {
                checks.insert("norming_defect".into(), nr.defect.abs() <= tol::NORM_REL * nr.operator_norm.max(1.0));
                report.insert("norming".into(), to_value(&nr));
            }
        }
        report.insert("operator".into(), to_value(&tb));
    }
    Ok(Run { report: Value::Object(report), checks, table: None })
}

fn run_separate(p: &Value) -> Step {
    let body: BodySpec = field(p, "body")?;
    let c = body.build()?;
    let x0: Vec<f64> = field(p, "x0")?;
    let g = group_or_trivial(p, c.dim())?;
    let delta: Option<f64> = opt_field(p, "delta")?;
    let res = match delta {
        Some(d) => {
            let ambient: NormSpec = opt_field(p, "ambient")?.unwrap_or(NormSpec::L2);
            separate_with_margin(&c, &g, &x0, d, &ambient)?
        }
        None => separate_invariant(&c, &g, &x0)?,
    };
    let sym = symmetrize_functional(&res.functional, &g)?;
    let mut checks = BTreeMap::new();
    checks.insert("margin_positive".into(), res.margin > delta.unwrap_or(0.0));
    checks.insert(
        "functional_invariant".into(),
        sym.iter().zip(&res.functional).all(|(a, b)| (a - b).abs() <= tol::INVARIANCE),
    );
    Ok(Run { report: to_value(&res), checks, table: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertInput {
    pairs: Vec<CertPair>,
    rho: Rho,
    spec: NormSpec,
}

fn run_certify_alpha(p: &Value) -> Step {
    let n: usize = field(p, "n")?;
    let g = group_or_trivial(p, n)?;
    let cert = match opt_field::<CertInput>(p, "certificate")? {
        Some(c) => AlphaCertificate { pairs: c.pairs, rho: c.rho, spec: c.spec, group: g },
        None => build_alpha_ell1(&g, n)?,
    };
    let alpha = verify_alpha(&cert)?;
    let quasi = verify_quasi_alpha(&cert)?;
    let mut checks = BTreeMap::new();
    checks.insert("alpha".into(), alpha.passed());
    checks.insert("quasi_alpha".into(), quasi.passed());
    Ok(Run {
        report: json!({
            "certificate": cert,
            "rho": cert.rho,
            "alpha": alpha,
            "quasi_alpha": quasi,
        }),
        checks,
        table: None,
    })
}

fn run_certify_beta(p: &Value) -> Step {
    let n: usize = field(p, "n")?;
    let g = group_or_trivial(p, n)?;
    let cert = match opt_field::<CertInput>(p, "certificate")? {
        Some(c) => BetaCertificate { pairs: c.pairs, rho: c.rho, spec: c.spec, group: g },
        None => dualize_alpha(&build_alpha_ell1(&g, n)?)?,
    };
    let beta = verify_beta(&cert)?;
    let mut checks = BTreeMap::new();
    checks.insert("beta".into(), beta.passed());
    Ok(Run { report: json!({"certificate": cert, "beta": beta}), checks, table: None })
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Scheme {
    Lindenstrauss,
    QuasiAlpha,
    Beta,
}

fn run_perturb(p: &Value, tol: f64) -> Step {
    let scheme: Scheme = field(p, "scheme")?;
    let t: Operator = field(p, "operator")?;
    let g = group_or_trivial(p, t.cols())?;
    let eps: f64 = field(p, "eps")?;
    let mut checks = BTreeMap::new();
    match scheme {
        Scheme::Lindenstrauss => {
            let opts = LindenstraussOptions {
                max_steps: opt_field(p, "max_steps")?.unwrap_or(100),
                min_steps: opt_field(p, "min_steps")?.unwrap_or(0),
                tol,
            };
            let r = lindenstrauss_iterate(&t, &g, eps, &opts)?;
            let mut inv = true;
            for it in &r.iterates {
                inv &= is_invariant_operator(it, &g)?;
            }
            checks.insert("iterates_invariant".into(), inv);
            checks.insert("drift_below_eps".into(), r.drift < eps || r.iterations == 0);
            checks.insert("attained".into(), r.defect <= tol);
            let table = Table {
                header: ["k", "eps_k", "norm_Tk", "defect_k"].map(String::from).to_vec(),
                rows: r
                    .trace
                    .iter()
                    .map(|t| vec![t.k.to_string(), t.eps_k.to_string(), t.norm_tk.to_string(), t.defect_k.to_string()])
                    .collect(),
            };
            Ok(Run { report: to_value(&r), checks, table: Some(table) })
        }
        Scheme::QuasiAlpha => {
            let delta: f64 = field(p, "delta")?;
            let cert = match opt_field::<CertInput>(p, "certificate")? {
                Some(c) => AlphaCertificate { pairs: c.pairs, rho: c.rho, spec: c.spec, group: g.clone() },
                None => build_alpha_ell1(&g, t.cols())?,
            };
            let r = quasi_alpha_perturb(&t, &cert, &g, eps, delta)?;
            checks.insert("peak".into(), r.peak >= r.peak_bound - tol::NORM_REL);
            checks.insert("others".into(), r.others <= r.others_bound + tol::NORM_REL);
            checks.insert("invariant".into(), is_invariant_operator(&r.operator, &g)?);
            Ok(Run { report: to_value(&r), checks, table: None })
        }
        Scheme::Beta => {
            let delta: f64 = field(p, "delta")?;
            let cert = match opt_field::<CertInput>(p, "certificate")? {
                Some(c) => BetaCertificate {
                    pairs: c.pairs,
                    rho: c.rho,
                    spec: c.spec,
                    group: PermutationGroup::trivial(t.rows()),
                },
                None => dualize_alpha(&build_alpha_ell1(&PermutationGroup::trivial(t.rows()), t.rows())?)?,
            };
            let r = beta_perturb(&t, &cert, &g, eps, delta)?;
            checks.insert("distance".into(), r.distance <= eps * r.norm_t + tol::NORM_REL);
            checks.insert("attained".into(), r.defect <= tol);
            checks.insert("invariant".into(), is_invariant_operator(&r.operator, &g)?);
            Ok(Run { report: to_value(&r), checks, table: None })
        }
    }
}

fn run_slice(p: &Value) -> Step {
    let t: Operator = field(p, "operator")?;
    let b: Vec<Vec<f64>> = field(p, "points")?;
    let g = group_or_trivial(p, t.cols())?;
    let eps: f64 = opt_field(p, "eps")?.unwrap_or(0.1);
    let sup = sup_on_set(&t, &b)?;
    let grid = eta_grid(sup);
    let mut sizes = Vec::new();
    let mut monotone = true;
    let mut prev: Option<Vec<usize>> = None;
    for &eta in &grid {
        let s = slice(&t, &b, &g, eta)?;
        if let Some(pv) = &prev {
            monotone &= s.indices.iter().all(|i| pv.contains(i));
        }
        sizes.push(s.indices.len());
        prev = Some(s.indices);
    }
    let a = in_a_eps(&t, &b, &g, eps)?;
    let ex = absolutely_exposing_check(&t, &b, &g)?;
    let mut checks = BTreeMap::new();
    checks.insert("monotone".into(), monotone);
    Ok(Run {
        report: json!({
            "sup_on_b": sup,
            "grid": grid,
            "slice_sizes": sizes,
            "a_eps": a,
            "exposing": ex,
        }),
        checks,
        table: None,
    })
}

fn run_gallery(p: &Value, seed: u64) -> Step {
    let construction: Construction = field(p, "construction")?;
    let gspec: GroupSpec = field(p, "group")?;
    let g = gspec.build()?;
    let n = g.degree();
    let cutoff: usize = field(p, "cutoff")?;
    let trials: usize = opt_field(p, "trials")?.unwrap_or(1000);
    let mut checks = BTreeMap::new();
    let mut extra = serde_json::Map::new();
    let op = match construction {
        Construction::C0 => build_c0_counterexample(&g, n)?,
        Construction::Dstar => {
            let w: Vec<f64> = field(p, "w")?;
            let pp: f64 = field(p, "p")?;
            let c: usize = field(p, "max_block")?;
            let op = build_dstar_counterexample(&g, &w, pp, c)?;
            let samples: usize = opt_field(p, "jensen_samples")?.unwrap_or(10_000);
            let v = jensen_violations(&op, c, samples, seed)?;
            checks.insert("jensen".into(), v == 0);
            extra.insert("jensen_violations".into(), json!(v));
            op
        }
        Construction::Xw => {
            let w: Vec<f64> = field(p, "w")?;
            let m: usize = opt_field(p, "m")?.unwrap_or(g.orbits().len());
            build_xw_counterexample(&g, &w, m)?
        }
    };
    checks.insert("invariant".into(), check_invariant(&op, &g)?);
    let rep = distance_to_truncated(&op, cutoff, trials, seed)?;
    checks.insert("bound_at_least_one".into(), rep.certified_bound >= 1.0 - 1e-9);
    checks.insert("approximants_never_beat_bound".into(), rep.empirical_min >= rep.certified_bound - 1e-9);
    let table = Table {
        header: ["construction", "n", "cutoff", "certified_bound", "empirical_min"].map(String::from).to_vec(),
        rows: vec![vec![
            construction.name().into(),
            rep.n.to_string(),
            rep.cutoff.to_string(),
            rep.certified_bound.to_string(),
            rep.empirical_min.to_string(),
        ]],
    };
    extra.insert("operator".into(), to_value(&op.operator));
    extra.insert("truncation".into(), to_value(&rep));
    Ok(Run { report: Value::Object(extra), checks, table: Some(table) })
}

fn run_auxlemma(p: &Value) -> Step {
    let w: Vec<f64> = field(p, "w")?;
    let g = group_or_trivial(p, w.len())?;
    let a = auxlemma_witness(&w, &g)?;
    let mut checks = BTreeMap::new();
    checks.insert("strict_gap".into(), a.norm_x - a.norm_gx > 1e-12);
    checks.insert("formula".into(), (a.norm_x - a.formula).abs() <= tol::NORM_REL);
    Ok(Run { report: to_value(&a), checks, table: None })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&format!("{prefix}/{k}"), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&format!("{prefix}/{i}"), v, out)),
        Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
        other => out.push(vec![prefix.to_string(), other.to_string()]),
    }
}

/// Serialized output: pretty JSON, or the command's CSV table (field/value
/// rows when the command defines none).
pub fn render(outcome: &Outcome, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("json");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let table = outcome.table.clone().unwrap_or_else(|| {
                let mut rows = Vec::new();
                flatten("", &outcome.json, &mut rows);
                Table { header: vec!["field".into(), "value".into()], rows }
            });
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).expect("csv");
            for r in &table.rows {
                w.write_record(r).expect("csv");
            }
            w.into_inner().expect("csv")
        }
    }
}

/// Writes the rendered outcome to `path`, or stdout when `None`.
pub fn emit(outcome: &Outcome, format: Format, path: Option<&Path>) -> std::io::Result<()> {
    let bytes = render(outcome, format);
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().write_all(&bytes),
    }
}
