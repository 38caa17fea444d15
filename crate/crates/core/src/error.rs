use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("critical point q = 1 has no closed form ({0})")]
    Critical(&'static str),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("eigenvalue iteration did not converge at index {index}")]
    EigenNoConvergence { index: usize },

    #[error("Fock truncation would exceed the hard cap ({requested} > {cap} states)")]
    Truncation { requested: usize, cap: usize },

    #[error("levels disagree with diagonalization: max relative deviation {deviation:e}")]
    CrossCheck { deviation: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds {tolerance:e}")]
    QuadratureUnconverged { estimate: f64, tolerance: f64 },

    #[error("summand does not decay by n = {upper}")]
    NotDecaying { upper: f64 },

    #[error("least-squares design matrix is rank deficient")]
    RankDeficient,

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. }
                | Error::Truncation { .. }
                | Error::CrossCheck { .. }
                | Error::QuadratureUnconverged { .. }
                | Error::NotDecaying { .. }
                | Error::RankDeficient
        )
    }
}
