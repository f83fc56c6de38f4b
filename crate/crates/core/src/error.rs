use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve exponent a = {0}: require a > 0 and a != 1")]
    InvalidCurve(f64),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("memory guard: requested {requested} lattice points exceeds cap {cap}")]
    MemoryGuard { requested: usize, cap: usize },

    #[error("oscillation guard: {0} time samples cannot resolve phase at frequency {1:.3e}")]
    OscillationGuard(usize, f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("division guard: square function norm underflows ({0:.3e})")]
    DivisionGuard(f64),

    #[error("size cap exceeded: {0} > {1}")]
    CapExceeded(usize, usize),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
