//! Hyperbolic lengths of the curves `γ_n^i` separating `I_n^i` from the
//! rest of the Cantor set, and the trigonometry of the pants they bound.

mod lengths;
mod pants;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cantor::CantorError;
use crate::conformal::ConformalError;
use crate::numerics::NumericsError;
use crate::seqspec::SeqError;

pub use lengths::{
    annulus_candidates, annulus_upper_bound, bounds_csv, collar_eta, collar_ratio, curve_bounds, level_bounds,
    level_representatives, lower_bound_paper, pants_geometry, upper_bound_paper, upper_bound_paper_channels,
    LengthBounds, LevelBounds, LowerBound, PantsGeometry, UpperCandidate,
};
pub use pants::{
    common_perpendicular, geodesic_distance, hexagon_seam, hexagon_seam_matrix, pants_seam_distance,
    pants_seam_distance_matrix, pants_seam_distance_pentagon, Geodesic, ProjPoint,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypError {
    #[error("{name} = {value} is not certified positive")]
    NonPositive { name: &'static str, value: String },
    #[error("geodesic endpoints coincide")]
    DegenerateGeodesic,
    #[error("the two geodesics coincide")]
    CoincidentGeodesics,
    #[error("hexagon realization failed: {0}")]
    Realization(String),
    #[error("corner too extreme for the matrix route")]
    MatrixRouteUnavailable,
    #[error("curve {0} is outside the built levels")]
    CurveOutOfRange(CurveId),
    #[error("inconsistent bounds for {curve}: lower {lower} exceeds {method} upper {upper}")]
    Inconsistent { curve: CurveId, lower: String, upper: String, method: Method },
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The curve `γ_n^i`, `1 <= i <= 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CurveId {
    pub n: u32,
    pub i: u64,
}

impl CurveId {
    pub fn new(n: u32, i: u64) -> Option<CurveId> {
        let valid = n >= 1 && i >= 1 && (n >= 64 || i <= 1u64 << n);
        valid.then_some(CurveId { n, i })
    }

    /// `I_n^1` or `I_n^{2^n}`: the curve is the mirror image of `γ_n^1`.
    pub fn is_outermost(&self) -> bool {
        self.i == 1 || (self.n < 64 && self.i == 1u64 << self.n)
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "γ_{}^{}", self.n, self.i)
    }
}

/// Where a bound comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Collar lower bound `2η(π² / ln((1+q)/(2q)))`.
    PaperCollar,
    /// Upper bound `π² / atanh(q)`.
    PaperAtanh,
    /// Round annulus around `I_n^i` reaching the nearest gap.
    RoundAnnulus,
    /// Complement of `I_n^i` and the arc carrying the rest of the set.
    TwoSlit,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::PaperCollar => "paper_collar",
            Method::PaperAtanh => "paper_atanh",
            Method::RoundAnnulus => "round_annulus",
            Method::TwoSlit => "two_slit",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
