//! Certified numerics for generalized Cantor sets `E(ω)` and the hyperbolic
//! geometry of the surfaces `Ĉ \ E(ω)`.

pub mod cantor;
pub mod classify;
pub mod conformal;
pub mod hyperbolic;
pub mod numerics;
pub mod seqspec;

pub use cantor::CantorTree;
pub use classify::{ClassificationReport, ThresholdReport, Verdict};
pub use conformal::RingModulus;
pub use hyperbolic::{CurveId, LengthBounds, PantsGeometry};
pub use numerics::{LogScaleValue, Magnitude, NumericsError, Real, DEFAULT_PRECISION};
pub use seqspec::{LogChannels, SequenceSpec};
