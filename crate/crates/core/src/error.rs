use thiserror::Error;

/// Errors raised by the simulator.
///
/// Parameter errors carry the config key that failed validation so that
/// front ends can point the user at it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {value} ({reason})")]
    InvalidParameter {
        key: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("incompatible bases: {0}")]
    BasisMismatch(String),

    #[error("mode index {mode} out of range for {num_modes} modes")]
    InvalidMode { mode: usize, num_modes: usize },

    #[error("too many modes: {0} (maximum {max})", max = crate::fock::MAX_MODES)]
    TooManyModes(usize),

    #[error("cannot remove every mode of the state")]
    NoModesLeft,

    #[error("truncation discarded {discarded:e} of the trace (tolerance {tolerance:e})")]
    TruncationOverflow { discarded: f64, tolerance: f64 },

    #[error("negative measurement probability {0:e}")]
    NegativeProbability(f64),

    #[error("state is not normalized (trace {0})")]
    Unnormalized(f64),

    #[error("thermal tail mass {tail:e} above cutoff {cutoff} exceeds tolerance")]
    ThermalTail { tail: f64, cutoff: usize },

    #[error("the direct scheme has no gain setting")]
    NoGainSetting,

    #[error("need at least {needed} points in the fit window, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("non-positive value {0} cannot be log-transformed")]
    NonPositive(f64),

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("no crossover found in [{lo}, {hi}] km")]
    NoCrossover { lo: f64, hi: f64 },
}

impl Error {
    /// True for errors that come from bad input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidMode { .. }
                | Error::TooManyModes(_)
                | Error::NoGainSetting
                | Error::InvalidGrid(_)
                | Error::BasisMismatch(_)
                | Error::NoModesLeft
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(key: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            key,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

pub(crate) fn check_open_unit(key: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::InvalidParameter {
            key,
            value,
            reason: "must lie in the open interval (0, 1)",
        });
    }
    Ok(())
}
