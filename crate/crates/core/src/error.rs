use thiserror::Error;

/// Errors raised across the crate. Variants mirror the failure modes each
/// operation documents; callers usually match on a handful of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("group closure exceeded the cap of {cap} elements")]
    CapExceeded { cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid norm parameters: {0}")]
    InvalidNorm(String),
    #[error("the zero vector has no supporting functional")]
    ZeroVector,
    #[error("norm kind {0} has no polyhedral unit ball")]
    NonPolyhedral(String),
    #[error("dual norm unsupported for {0}")]
    UnsupportedDual(String),
    #[error("unit ball has {count} vertices, above the enumeration limit {limit}")]
    TooManyVertices { count: u128, limit: usize },
    #[error("unsupported domain norm: {0}")]
    UnsupportedDomain(String),
    #[error("operator is not invariant under the group")]
    NotInvariant,
    #[error("domain norm kind not allowed here: {0}")]
    WrongDomainKind(String),
    #[error("point set is not invariant under the group")]
    SetNotInvariant,
    #[error("body is not invariant under the group")]
    BodyNotInvariant,
    #[error("point is not invariant under the group")]
    PointNotInvariant,
    #[error("point lies inside the body (distance {distance:e})")]
    PointInsideBody { distance: f64 },
    #[error("margin {delta} is not below the distance {distance}")]
    MarginInfeasible { distance: f64, delta: f64 },
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("x is not a unit vector (norm {0})")]
    NotUnitVector(f64),
    #[error("norm is not invariant under the group")]
    NormNotInvariant,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("epsilon must lie in (0, 1/3), got {0}")]
    BadEps(f64),
    #[error("epsilon schedule underflows at term {0}")]
    ScheduleUnderflow(usize),
    #[error("no convergence after {steps} steps (defect {defect:e})")]
    NoConvergence { steps: usize, defect: f64 },
    #[error("no pair satisfies the near-maximality requirement")]
    NoEligibleLambda,
    #[error("delta is infeasible: {0}")]
    DeltaInfeasible(String),
    #[error("certificate invalid: {0}")]
    CertInvalid(String),
    #[error("orbit block of size {size} is not below the bound {bound}")]
    BlockTooBig { size: usize, bound: usize },
    #[error("no orbit block starts beyond the cutoff {0}")]
    NoBlockBeyondCutoff(usize),
    #[error("weights are constant on every orbit block; the norm is invariant")]
    NoWitness,
    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

impl Error {
    /// The variant name, e.g. `"PointNotInvariant"`.
    pub fn kind(&self) -> String {
        let dbg = format!("{self:?}");
        dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
    }

    /// Whether the error reflects malformed input rather than a mathematical
    /// outcome.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidPermutation(_) | Error::CapExceeded { .. } | Error::DimensionMismatch { .. } | Error::InvalidNorm(_)
        )
    }
}
