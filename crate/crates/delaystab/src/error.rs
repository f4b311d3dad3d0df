use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid interval set: {0}")]
    InvalidInterval(String),

    #[error("root finding failed after scanning {branches} branches; best residual {best_residual:e}")]
    RootNotCertified { branches: usize, best_residual: f64 },

    #[error("no delay branch: curve construction is degenerate when the delay coefficient vanishes")]
    NoDelayBranch,

    #[error("strip {strip} admits no curve intersection; advance branch")]
    AdvanceBranch { strip: i64 },

    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("stabilizability check failed: mode {mode} (eigenvalue {re}{im:+}i) is unreachable, smallest singular value {sigma_min:e}")]
    HautusFailed {
        mode: usize,
        re: f64,
        im: f64,
        sigma_min: f64,
    },

    #[error("Riccati iteration did not converge: residual {residual:e} after {iterations} iterations")]
    RiccatiDiverged { residual: f64, iterations: usize },

    #[error("parameter overflow: {0}")]
    Overflow(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("state became non-finite at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("Picard contraction failed: factor {factor} >= 1 at the minimal step length")]
    ContractionFailed { factor: f64 },

    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    ScenarioInvalid(Vec<String>),

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
