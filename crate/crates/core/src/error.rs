use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix dimension {0} exceeds the supported maximum of 16")]
    DimensionOverflow(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("state is not pure (purity {0})")]
    NotPure(f64),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("probabilities are not normalised: {0}")]
    NotNormalized(&'static str),
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("input operators do not span the operator space")]
    Singular,
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("no solution: {0}")]
    NoSolution(&'static str),
    #[error("session aborted: certification failed")]
    Aborted,
    #[error("invalid subsystem specification")]
    BadSubsystems,
}

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
