//! Serialized forms shared by the subcommands.

use gcantor_core::numerics::{decimal_down, decimal_up};
use gcantor_core::{Magnitude, Real};
use serde::Serialize;

/// Decimal enclosure `[lo, hi]`, outward rounded. With `log_scale` set the
/// pair encloses the natural log of the quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: String,
    pub hi: String,
    pub log_scale: bool,
}

impl Enclosure {
    pub fn real(x: &Real) -> Enclosure {
        Enclosure { lo: decimal_down(x.lo()), hi: decimal_up(x.hi()), log_scale: false }
    }

    pub fn magnitude(m: &Magnitude) -> Enclosure {
        match m {
            Magnitude::Scalar(x) => Enclosure::real(x),
            Magnitude::Log(v) => Enclosure { log_scale: true, ..Enclosure::real(v.log_value()) },
        }
    }

    pub fn csv_pair(&self) -> String {
        format!("{},{}", self.lo, self.hi)
    }
}

/// First line of every CSV document.
pub fn csv_preamble(spec_digest: &str, precision_bits: u32) -> String {
    format!("# spec_digest={spec_digest} precision_bits={precision_bits}\n")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
