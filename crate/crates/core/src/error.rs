use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical pipeline.
///
/// Variants are grouped by the stage that raises them; callers that drive
/// parameter scans usually only distinguish "refine the step and retry"
/// (`StepTooLarge`, `AmbiguousMatching`) from everything else.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // polynomial substrate
    #[error("root finder did not converge: residual {residual:e} exceeds {tol:e}")]
    NonConvergence { residual: f64, tol: f64 },
    #[error("polynomial of degree {0} has no roots to locate")]
    ConstantPolynomial(usize),
    #[error("root matching is ambiguous (cost gap ratio {ratio:.3} below guard {guard})")]
    AmbiguousMatching { ratio: f64, guard: f64 },
    #[error("root sets have different sizes ({0} vs {1})")]
    CardinalityMismatch(usize, usize),

    // curve model
    #[error("odd number of odd-parity branch clusters ({0})")]
    OddTotalParity(usize),
    #[error("polynomial degree {0} is odd; only even degree is admitted")]
    OddDegree(usize),
    #[error("double cover is disconnected: no odd-parity branch cluster")]
    DegenerateCover,
    #[error("path passes within {distance:e} of branch point {point}")]
    PathThroughBranchPoint { point: Complex64, distance: f64 },
    #[error("sheet tracking exceeded the subdivision depth cap")]
    StepLimitExceeded,
    #[error("local order fit is unstable (R^2 = {r2:.6})")]
    FitUnstable { r2: f64 },

    // cycles
    #[error("cluster at {center} is crowded: separation {separation:e} < required {required:e}")]
    ClusterCrowded {
        center: Complex64,
        separation: f64,
        required: f64,
    },
    #[error("no route between {from} and {to}: obstacle detours overlap")]
    NoRoute { from: Complex64, to: Complex64 },
    #[error("pairing plan is inconsistent: {0}")]
    PlanInconsistent(String),
    #[error("parameter step too large: {0}")]
    StepTooLarge(String),

    // quadrature and linear algebra
    #[error("quadrature tolerance not met: error {error:e} > target {target:e}")]
    ToleranceNotMet { error: f64, target: f64 },
    #[error("integrand has a pole on the path at {0}")]
    PoleOnPath(Complex64),
    #[error("a-period matrix is ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // metric and scans
    #[error("model metric is singular: |z| = {0} >= 1 on a transverse coordinate")]
    ModelSingular(f64),
    #[error("need at least {need} rows for a fit, got {got}")]
    InsufficientRows { need: usize, got: usize },
}
