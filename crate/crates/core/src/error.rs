//! Error type shared by all solver and study components.

use thiserror::Error;

/// Errors produced by meshing, assembly, solvers and the study driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point lies outside the mesh domain beyond tolerance.
    #[error("point ({0}, {1}) lies outside the mesh domain")]
    OutOfDomain(f64, f64),

    /// The problem setup cannot produce a well-posed system
    /// (e.g. empty Dirichlet boundary).
    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    /// Element-level assembly failed (degenerate geometry).
    #[error("assembly error: {0}")]
    Assembly(String),

    /// The linear system is singular or not positive definite.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// An iterative solver exhausted its iteration budget.
    #[error("solver did not converge after {iterations} iterations (last residual {last_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        last_residual: f64,
        /// Residual norm after each iteration, for diagnostics.
        history: Vec<f64>,
    },

    /// File reading or writing failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A mesh or report file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
