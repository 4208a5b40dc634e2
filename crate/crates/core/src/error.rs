use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operator is not skew-symmetric (deviation {0:e})")]
    NotSkew(f64),
    #[error("degenerate spectrum: eigenvalue gap {gap:e} below tolerance {tol:e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("generators not closed under bracket (residual {0:e})")]
    NotClosed(f64),
    #[error("bilinear form degenerate on subspace")]
    DegenerateRestriction,
    #[error("splitting is not reductive (residual {0:e})")]
    NotReductive(f64),
    #[error("form restricted to m is not positive definite (smallest eigenvalue {0:e})")]
    IndefiniteMetric(f64),
    #[error("bilinear form is not ad-invariant (residual {0:e})")]
    NonInvariantForm(f64),
    #[error("vectors span a degenerate plane")]
    DegeneratePlane,
    #[error("not an orthogonal complex structure (residual {0:e})")]
    NotComplexStructure(f64),
    #[error("inadmissible fiber parameter s = {0}")]
    InadmissibleS(f64),
    #[error("subspace is not an ideal of k (residual {0:e})")]
    NotNormalSubalgebra(f64),
    #[error("quotient k/h has dimension {0}, expected 1")]
    NotOneDimensional(usize),
    #[error("only {accepted} generic samples accepted, need {required}")]
    InsufficientSamples { accepted: usize, required: usize },
    #[error("polarization stencil rank deficient (residual {0:e})")]
    PolarizationRankDeficient(f64),
    #[error("invalid parameter s = {0}")]
    InvalidS(f64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("postcondition violated: {0}")]
    Postcondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
