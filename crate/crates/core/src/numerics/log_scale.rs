//! Positive quantities stored through their logarithm.
//!
//! Values such as `exp(-3^719)` leave every fixed exponent range; keeping
//! `ln x` as an enclosure lets later formulas work in the log domain.

use rug::Float;

use super::{NumericsError, Real};

/// A positive number `x = exp(log_value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogScaleValue {
    log_value: Real,
}

/// True when an exponential result sits at the edge of the exponent range,
/// i.e. MPFR saturated it.
fn saturated(x: &Float) -> bool {
    if x.is_infinite() {
        return true;
    }
    match x.get_exp() {
        Some(e) => e >= rug::float::exp_max() - 1 || e <= rug::float::exp_min() + 1,
        None => x.is_zero(),
    }
}

impl LogScaleValue {
    pub fn new(log_value: Real) -> Self {
        LogScaleValue { log_value }
    }

    pub fn from_real(x: &Real) -> Result<Self, NumericsError> {
        if !x.certainly_positive() {
            return Err(NumericsError::domain("ln", x.lo()));
        }
        Ok(LogScaleValue { log_value: x.ln()? })
    }

    pub fn log_value(&self) -> &Real {
        &self.log_value
    }

    pub fn prec(&self) -> u32 {
        self.log_value.prec()
    }

    /// Converts back to a direct enclosure, refusing to hand out a
    /// saturated interval.
    pub fn to_real(&self) -> Result<Real, NumericsError> {
        let x = self.log_value.exp();
        if saturated(x.hi()) && *x.hi() > 1 {
            return Err(NumericsError::Overflow);
        }
        if saturated(x.lo()) && *x.lo() < 1 {
            return Err(NumericsError::Underflow);
        }
        if saturated(x.lo()) || saturated(x.hi()) {
            return Err(NumericsError::Overflow);
        }
        Ok(x)
    }

    pub fn mul(&self, other: &LogScaleValue) -> LogScaleValue {
        LogScaleValue::new(&self.log_value + &other.log_value)
    }

    pub fn div(&self, other: &LogScaleValue) -> LogScaleValue {
        LogScaleValue::new(&self.log_value - &other.log_value)
    }

    pub fn recip(&self) -> LogScaleValue {
        LogScaleValue::new(-&self.log_value)
    }

    pub fn powr(&self, exponent: &Real) -> LogScaleValue {
        LogScaleValue::new(&self.log_value * exponent)
    }
}

/// A positive quantity held directly when representable, otherwise in log
/// scale.
#[derive(Clone, Debug, PartialEq)]
pub enum Magnitude {
    Scalar(Real),
    Log(LogScaleValue),
}

impl Magnitude {
    /// Chooses the direct form whenever `exp(log_value)` is representable.
    pub fn from_log(log_value: Real) -> Magnitude {
        let v = LogScaleValue::new(log_value);
        match v.to_real() {
            Ok(x) => Magnitude::Scalar(x),
            Err(_) => Magnitude::Log(v),
        }
    }

    pub fn is_log_scale(&self) -> bool {
        matches!(self, Magnitude::Log(_))
    }

    pub fn as_scalar(&self) -> Option<&Real> {
        match self {
            Magnitude::Scalar(x) => Some(x),
            Magnitude::Log(_) => None,
        }
    }

    pub fn prec(&self) -> u32 {
        match self {
            Magnitude::Scalar(x) => x.prec(),
            Magnitude::Log(v) => v.prec(),
        }
    }

    /// Enclosure of `ln x`. Scalars whose lower endpoint is not positive give
    /// `-inf` there.
    pub fn ln(&self) -> Real {
        match self {
            Magnitude::Scalar(x) => {
                let prec = x.prec();
                let clipped = if *x.lo() < 0 {
                    Real::from_bounds(Float::with_val(prec, 0), x.hi().clone())
                } else {
                    x.clone()
                };
                clipped.ln().unwrap_or_else(|_| Real::entire(prec))
            }
            Magnitude::Log(v) => v.log_value().clone(),
        }
    }

    /// A direct enclosure, saturating to `[MAX, +inf]` or `[0, MIN]` when
    /// the value is outside the exponent range.
    pub fn to_real_saturating(&self) -> Real {
        match self {
            Magnitude::Scalar(x) => x.clone(),
            Magnitude::Log(v) => v.log_value().exp(),
        }
    }

    pub fn certainly_gt(&self, threshold: &Real) -> bool {
        match self {
            Magnitude::Scalar(x) => x.certainly_gt(threshold),
            Magnitude::Log(v) => {
                if *threshold.hi() <= 0 {
                    return true;
                }
                match Real::point(threshold.hi().clone()).ln() {
                    Ok(l) => v.log_value().certainly_gt(&l),
                    Err(_) => false,
                }
            }
        }
    }

    pub fn certainly_lt(&self, threshold: &Real) -> bool {
        match self {
            Magnitude::Scalar(x) => x.certainly_lt(threshold),
            Magnitude::Log(v) => {
                if *threshold.lo() <= 0 {
                    return false;
                }
                match Real::point(threshold.lo().clone()).ln() {
                    Ok(l) => v.log_value().certainly_lt(&l),
                    Err(_) => false,
                }
            }
        }
    }

    /// Certified `self < other` for two positive magnitudes.
    pub fn certainly_lt_mag(&self, other: &Magnitude) -> bool {
        match (self, other) {
            (Magnitude::Scalar(a), Magnitude::Scalar(b)) => a.certainly_lt(b),
            _ => self.ln().certainly_lt(&other.ln()),
        }
    }

    /// Enclosure of `min(self, other)`.
    pub fn min(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Scalar(a), Magnitude::Scalar(b)) => Magnitude::Scalar(a.min(b)),
            _ => Magnitude::from_log(self.ln().min(&other.ln())),
        }
    }

    /// `self ⊆ other`, compared in the log domain when either side needs it.
    pub fn is_subset_of(&self, other: &Magnitude) -> bool {
        match (self, other) {
            (Magnitude::Scalar(a), Magnitude::Scalar(b)) => a.is_subset_of(b),
            _ => self.ln().is_subset_of(&other.ln()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    #[test]
    fn round_trip_when_representable() {
        let x = Real::parse("0.367879441171442", P).unwrap();
        let v = LogScaleValue::from_real(&x).unwrap();
        let back = v.to_real().unwrap();
        assert!(x.is_subset_of(&back));
    }

    #[test]
    fn overflow_is_reported_not_saturated() {
        // ln x = 2^40 is far beyond the exponent range.
        let v = LogScaleValue::new(Real::from_int(1 << 40, P));
        assert_eq!(v.to_real(), Err(NumericsError::Overflow));
        assert_eq!(v.recip().to_real(), Err(NumericsError::Underflow));
        assert!(Magnitude::from_log(Real::from_int(1 << 40, P)).is_log_scale());
    }

    #[test]
    fn log_comparisons() {
        let big = Magnitude::from_log(Real::from_int(1 << 40, P));
        assert!(big.certainly_gt(&Real::from_int(1_000_000, P)));
        let tiny = Magnitude::from_log(Real::from_int(-(1 << 40), P));
        assert!(tiny.certainly_lt(&Real::parse("1e-300", P).unwrap()));
        assert!(tiny.certainly_lt_mag(&big));
        assert!(matches!(big.min(&tiny), Magnitude::Log(_)));
    }
}
