//! Certified interval scalars: the arithmetic substrate for every other module.
//!
//! All quantities are enclosures computed at a precision fixed per run
//! ([`DEFAULT_PRECISION`] unless configured otherwise). Constants such as
//! `pi` are produced at that precision on demand.

mod log_scale;
mod parse;
mod real;

use thiserror::Error;

pub use log_scale::{LogScaleValue, Magnitude};
pub use parse::parse_rational;
pub use real::{decimal_digits, decimal_down, decimal_up, Real};

pub const DEFAULT_PRECISION: u32 = 128;

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_PRECISION: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericsError {
    #[error("cannot parse `{0}` as a decimal or rational number")]
    Parse(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("{function}: endpoint {endpoint} lies outside the real domain")]
    Domain { function: &'static str, endpoint: String },
    #[error("value overflows the exponent range; only its logarithm is representable")]
    Overflow,
    #[error("value underflows the exponent range; only its logarithm is representable")]
    Underflow,
    #[error("precision of {0} bits is below the supported minimum")]
    Precision(u32),
}

/// Validates a requested working precision.
pub fn check_precision(bits: u32) -> Result<u32, NumericsError> {
    if bits < MIN_PRECISION || bits > rug::float::prec_max() {
        return Err(NumericsError::Precision(bits));
    }
    Ok(bits)
}

/// Enclosure of a decimal or `p/q` literal at the given precision.
pub fn make_certified(text: &str, precision_bits: u32) -> Result<Real, NumericsError> {
    check_precision(precision_bits)?;
    Real::parse(text, precision_bits)
}
