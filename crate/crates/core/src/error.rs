use thiserror::Error;

/// Errors raised anywhere in the modeling, design and simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (pivot magnitude {pivot:.3e})")]
    SingularMatrix { pivot: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("state outside model domain: position x1 = {x1} must be > 0")]
    Domain { x1: f64 },

    #[error("degenerate equilibrium: zero nominal voltage puts the ball on the magnet")]
    DegenerateEquilibrium,

    #[error("invalid plant parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("system is not controllable (rank {rank} < {n})")]
    NotControllable { rank: usize, n: usize },

    #[error("system is not observable (rank {rank} < {n})")]
    NotObservable { rank: usize, n: usize },

    #[error("pole set is not closed under conjugation; gain would need complex coefficients")]
    ComplexCoefficients,

    #[error("invalid pole specification: {0}")]
    InvalidPoleSpec(String),

    #[error("invalid LQR weights: {0}")]
    InvalidWeights(String),

    #[error("no stabilizing initial gain for the Riccati iteration")]
    NoStabilizingSeed,

    #[error("invalid simulation config: {}", .0.join("; "))]
    InvalidSimConfig(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
