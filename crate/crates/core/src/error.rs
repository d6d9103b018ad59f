use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters or run configuration.
    Config(String),
    /// Two fields (or a field and a basis) do not share a basis.
    BasisMismatch,
    /// Two physical fields live on different grids.
    GridMismatch,
    /// A non-finite value appeared during time stepping.
    NumericalFailure { step: usize, t: f64, mode: Option<usize> },
    /// A monitored norm exceeded the blow-up ceiling.
    BlowUp { step: usize, t: f64, norm: f64 },
    /// Not enough usable samples for a fit.
    TooFewSamples { needed: usize, found: usize },
    /// A log-log fit received a non-positive coordinate.
    NonPositiveInput,
    /// Snapshot times of two trajectories do not line up.
    TimeGridMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::BasisMismatch => f.write_str("fields do not share a spectral basis"),
            Error::GridMismatch => f.write_str("physical fields live on different grids"),
            Error::NumericalFailure { step, t, mode } => match mode {
                Some(m) => write!(f, "non-finite value in mode {m} at step {step} (t = {t})"),
                None => write!(f, "non-finite value at step {step} (t = {t})"),
            },
            Error::BlowUp { step, t, norm } => {
                write!(f, "norm {norm:e} exceeded the blow-up ceiling at step {step} (t = {t})")
            }
            Error::TooFewSamples { needed, found } => {
                write!(f, "need at least {needed} samples above the floor, found {found}")
            }
            Error::NonPositiveInput => f.write_str("log-log fit requires positive coordinates"),
            Error::TimeGridMismatch => f.write_str("trajectories are sampled on different time grids"),
        }
    }
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
