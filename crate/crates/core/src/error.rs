use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("both atom-cavity couplings are zero; the dark state is undefined")]
    DegenerateCoupling,

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("uniform variate must lie in (0, 1], got {0}")]
    InvalidUniform(f64),

    #[error("total emission rate vanishes for the supplied state")]
    ZeroRate,

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("time grid must be sorted ascending and non-negative")]
    UnsortedGrid,

    #[error("trajectory count must be at least 1")]
    NoTrajectories,

    #[error("failed to start worker pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}
