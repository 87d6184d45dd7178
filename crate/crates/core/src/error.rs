use thiserror::Error;

/// The five contracts checked after a deformation solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Contract {
    /// `c_j(f*) = c_j(f) + d_j` on the targeted indices.
    Coefficients = 1,
    /// Area p-norm changed by the requested amount.
    AreaNorm = 2,
    /// Hardy p-norm moved at most first order in the target size.
    HardyNorm = 3,
    /// The map is conformal on the image of the disk.
    Conformal = 4,
    /// The deformed function is still zero free.
    Nonvanishing = 5,
}

impl std::fmt::Display for Contract {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Contract::Coefficients => "coefficient targets",
            Contract::AreaNorm => "area-norm preservation",
            Contract::HardyNorm => "hardy-norm first-order distortion",
            Contract::Conformal => "conformality on f(D)",
            Contract::Nonvanishing => "nonvanishing output",
        };
        write!(f, "contract {} ({name})", *self as u8)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("aliasing guard: degree {degree} needs at least {needed} samples, got {samples}")]
    Aliasing {
        degree: usize,
        samples: usize,
        needed: usize,
    },

    #[error("series is identically zero")]
    ZeroSeries,

    #[error("degenerate input: leading coefficient c_0 vanishes")]
    DegenerateLeading,

    #[error("no single-valued branch: series winds {winding} times on |z| = {radius}")]
    Branch { winding: i64, radius: f64 },

    #[error("zero too close to contour |z| = {radius} at angle {angle:.6} (|f| = {modulus:.3e})")]
    ZeroNearContour {
        radius: f64,
        angle: f64,
        modulus: f64,
    },

    #[error("unsupported exponent p = {0}; need p >= 1")]
    UnsupportedExponent(f64),

    #[error("densities live on different annuli")]
    AnnulusMismatch,

    #[error("annulus invariant violated: {0}")]
    AnnulusInvariant(String),

    #[error("point {re:+.6}{im:+.6}i lies within the boundary band of the annulus")]
    BoundaryBand { re: f64, im: f64 },

    #[error("Beltrami budget exceeded: sup|mu| = {sup:.4e} >= cap {cap:.4e}")]
    BudgetExceeded { sup: f64, cap: f64 },

    #[error("target budget exceeded: {0}")]
    TargetBudget(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),

    #[error("problem structure: {0}")]
    ProblemStructure(String),

    #[error("{contract} violated: {detail}")]
    ContractViolation { contract: Contract, detail: String },

    #[error("series vanishes on |z| <= {radius}: winding {winding}")]
    Vanishing { radius: f64, winding: i64 },

    #[error("H^p norm {norm:.12} exceeds 1 + {tol:e}")]
    NormExcess { norm: f64, tol: f64 },

    #[error("w'(0) = 0: map is not locally univalent at the origin")]
    NotLocallyUnivalent,

    #[error("pole of the Schwarzian solution near z = {re:+.6}{im:+.6}i")]
    Pole { re: f64, im: f64 },

    #[error("family member {index} is not injective: {detail}")]
    NonInjective { index: usize, detail: String },

    #[error("Rouche margin violated: max|p_eps| = {perturbation:.4e} >= min|p_N| = {minimum:.4e}")]
    RoucheMargin { perturbation: f64, minimum: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
