/// `FromStr` for clap value enums, so config-file values parse the same way.
macro_rules! value_enum_from_str {
    ($($t:ty),*) => {$(
        impl std::str::FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <Self as clap::ValueEnum>::from_str(s, true)
            }
        }
    )*};
}

pub mod condense;
pub mod constants;
pub mod debt;
pub mod flicker;
pub mod sample;
pub mod solve;
pub mod threshold;

use crate::error::CliError;

/// Tolerances, scales and windows must be finite and strictly positive.
pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be positive, got {v}")))
    }
}
