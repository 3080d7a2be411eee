//! Group-invariant operators between finite-dimensional sequence spaces.
//!
//! Finite permutation groups act on coordinates of ℝⁿ. The crate averages
//! points, functionals and operators over such groups, separates invariant
//! polytopes by invariant functionals, measures and perturbs operator norms,
//! checks biorthogonal-system certificates, and builds the block operators
//! that show norm-attaining invariant operators need not be dense.

pub mod attainment;
pub mod certificates;
pub mod error;
pub mod gallery;
pub mod hull;
pub mod invariance;
pub mod norms;
pub mod perm_group;
pub mod perturbation;
pub mod random;
pub mod scenario;
pub mod separation;

pub use error::{Error, Result};
pub use hull::ConvexBody;
pub use invariance::Operator;
pub use norms::NormSpec;
pub use perm_group::{Permutation, PermutationGroup};

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Relative tolerance for norm identities.
    pub const NORM_REL: f64 = 1e-9;
    /// Exact-invariance checks for points, functionals and operators.
    pub const INVARIANCE: f64 = 1e-12;
    /// An operator attains its norm when the defect is at most this.
    pub const ATTAINED: f64 = 1e-7;
}

/// Caps the global rayon pool at `INVBANACH_THREADS` when that is set.
pub fn init_threads() {
    if let Some(n) = std::env::var("INVBANACH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
