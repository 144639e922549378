//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {max_dev:.3e}, tolerance {tol:.3e})")]
    NotHermitian { max_dev: f64, tol: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diag:.3e})")]
    EigNoConvergence { sweeps: usize, off_diag: f64 },

    #[error("ill-conditioned system: condition number {cond:.3e} exceeds {limit:.3e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("angle {theta_deg} deg outside the open interval (-90, 90)")]
    AngleOutOfDomain { theta_deg: f64 },

    #[error("scene sampling gave up after {attempts} attempts (min separation {min_separation_deg} deg infeasible)")]
    SeparationInfeasible { attempts: usize, min_separation_deg: f64 },

    #[error("ML search refused: M={m} over {grid_points} grid points needs ~{estimated_ops:.2e} operations")]
    MlBudgetExceeded {
        m: usize,
        grid_points: usize,
        estimated_ops: f64,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("training diverged at iteration {iteration}: loss is not finite")]
    TrainDiverged { iteration: usize },

    #[error("checkpoint version {found} unsupported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("network spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("sweep failed: method {method} errored on {failures}/{trials} trials")]
    MethodFailing {
        method: String,
        failures: usize,
        trials: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
