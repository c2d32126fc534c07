use thiserror::Error;

/// Errors raised by model construction, series evaluation and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The channel model cannot be built from the given configuration.
    #[error("model error: {0}")]
    Model(String),

    /// A series did not reach its tolerance within the term budget.
    #[error("series not converged after {terms} terms (last term {last_term:e}, accumulated {accumulated:e})")]
    Convergence { terms: usize, last_term: f64, accumulated: f64 },

    /// A root finder or line search failed.
    #[error("solver error: {0}")]
    Solver(String),

    /// A numerical check (PSD, finiteness, eigensolver) failed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The sensing direction carries no power in the scattering subspace.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Invalid scenario file or command combination.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
