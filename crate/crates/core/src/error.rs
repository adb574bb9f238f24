use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Kinematically inadmissible state (det F ≤ 0, non-SPD B, nonpositive
    /// principal value passed to a logarithm).
    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    /// Gent locking limit reached: the isochoric invariant hit J_m.
    #[error("Gent locking limit: |F/J^(1/3)|^2 - 3 = {i1bar_minus_3} >= Jm = {jm}")]
    LockingLimit { i1bar_minus_3: f64, jm: f64 },

    /// Poisson ratio at or beyond the incompressible limit.
    #[error("incompressible limit: nu = {0} gives an unbounded bulk modulus")]
    Incompressibility(f64),

    /// Invalid material or case parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Jacobi eigensolver failed to converge (unreachable for finite symmetric input).
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    JacobiNonConvergence(usize),

    /// Reference element with nonpositive isoparametric Jacobian.
    #[error("degenerate element {element}: det J = {detj} <= 0 at a Gauss point")]
    DegenerateElement { element: usize, detj: f64 },

    /// Element inverted by the current displacement state (det F ≤ 0).
    #[error("inverted element {element}: det F = {detf} <= 0 at a Gauss point")]
    InvertedElement { element: usize, detf: f64 },

    /// Singular global tangent during a linear solve.
    #[error("singular tangent at step {step}, iteration {iteration}")]
    SingularTangent { step: usize, iteration: usize },

    /// Newton iteration exceeded its budget.
    #[error("no convergence at step {step} after {iterations} iterations (|R| = {residual})")]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    /// Least-squares calibration failed.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Bad run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
