use thiserror::Error;

/// Residual history and reason for a Newton-type solve that did not reach
/// its tolerance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DivergenceReport {
    pub reason: String,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum VStateError {
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{points} grid points cannot resolve {modes} Fourier modes (need at least {needed})")]
    Aliasing {
        modes: usize,
        points: usize,
        needed: usize,
    },

    #[error("singular geometry: non-positive log argument {value:e} at x={x}, y={y}")]
    SingularGeometry { x: f64, y: f64, value: f64 },

    #[error("ellipse projection error {error:e} exceeds tolerance {tolerance:e} with {modes} modes")]
    Projection {
        error: f64,
        tolerance: f64,
        modes: usize,
    },

    #[error("solver did not converge: {}", .0.reason)]
    Divergence(DivergenceReport),

    #[error(
        "Jacobian is rank deficient (condition estimate {condition:e}); \
         the point is likely a bifurcation, use the amplitude-constrained solve"
    )]
    RankDeficient { condition: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, VStateError>;
