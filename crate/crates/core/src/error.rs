use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter fell outside its admissible range.
    #[error("{name} = {value} is invalid: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The stationarity equation showed no sign change inside the search bracket.
    #[error("no root of the stationarity equation in ({lo}, {hi}); the unconstrained optimum cannot be obtained")]
    NoRoot { lo: f64, hi: f64 },

    #[error("erasure pattern length {pattern} does not match series length {series}")]
    LengthMismatch { series: usize, pattern: usize },

    /// Every sample of the pattern was erased, so nothing can be reconstructed.
    #[error("all {0} samples were erased")]
    AllErased(usize),

    #[error("exhaustive enumeration needs at most {max} samples, got {len}")]
    TooManySamples { len: usize, max: usize },
}

pub(crate) fn ensure(
    ok: bool,
    name: &'static str,
    value: f64,
    expected: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected,
        })
    }
}
