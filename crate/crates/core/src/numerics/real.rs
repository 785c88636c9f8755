//! Outward-rounded interval enclosures over MPFR floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round, Special};
use rug::{Float, Rational};

use super::NumericsError;

/// A closed interval `[lo, hi]` of extended reals that encloses one exact
/// real number.
///
/// Every operation rounds its lower endpoint toward `-inf` and its upper
/// endpoint toward `+inf`, so the exact result of the mathematical operation
/// on any pair of enclosed values lies inside the returned interval.
/// Endpoints may be infinite; an evaluation that leaves the representable
/// range degrades to a wide interval rather than an error.
#[derive(Clone, PartialEq)]
pub struct Real {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, val: T) -> Float
where
    Float: rug::Assign<T>,
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: rug::Assign<T>,
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

/// Endpoint product with the interval convention `0 * inf = 0`.
fn mul_endpoint(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    if a.is_zero() || b.is_zero() {
        return Float::with_val(prec, 0);
    }
    Float::with_val_round(prec, a * b, round).0
}

fn div_endpoint(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    if a.is_zero() {
        return Float::with_val(prec, 0);
    }
    Float::with_val_round(prec, a / b, round).0
}

fn apply(prec: u32, x: &Float, round: Round, f: fn(&mut Float, Round) -> Ordering) -> Float {
    let mut out = Float::with_val(prec, x);
    f(&mut out, round);
    out
}

fn min_of(values: impl IntoIterator<Item = Float>) -> Float {
    values
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("non-empty")
}

fn max_of(values: impl IntoIterator<Item = Float>) -> Float {
    values
        .into_iter()
        .reduce(|a, b| if b > a { b } else { a })
        .expect("non-empty")
}

impl Real {
    /// Builds an interval from raw endpoints. NaN endpoints widen to the
    /// corresponding infinity.
    pub fn from_bounds(lo: Float, hi: Float) -> Self {
        let prec = lo.prec().max(hi.prec());
        let lo = if lo.is_nan() { Float::with_val(prec, Special::NegInfinity) } else { lo };
        let hi = if hi.is_nan() { Float::with_val(prec, Special::Infinity) } else { hi };
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Real { lo, hi }
    }

    pub fn point(value: Float) -> Self {
        Real { lo: value.clone(), hi: value }
    }

    pub fn from_int(value: i64, prec: u32) -> Self {
        Real::point(Float::with_val(prec, value))
    }

    pub fn from_rational(value: &Rational, prec: u32) -> Self {
        Real {
            lo: down(prec, value),
            hi: up(prec, value),
        }
    }

    /// Encloses a decimal (`-1.25e-3`) or rational (`3/8`) literal.
    pub fn parse(text: &str, prec: u32) -> Result<Self, NumericsError> {
        let value = super::parse::parse_rational(text)?;
        Ok(Real::from_rational(&value, prec))
    }

    pub fn zero(prec: u32) -> Self {
        Real::from_int(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Real::from_int(1, prec)
    }

    /// The whole extended real line.
    pub fn entire(prec: u32) -> Self {
        Real {
            lo: Float::with_val(prec, Special::NegInfinity),
            hi: Float::with_val(prec, Special::Infinity),
        }
    }

    /// `[lo, +inf]`.
    pub fn at_least(lo: Float) -> Self {
        let prec = lo.prec();
        Real::from_bounds(lo, Float::with_val(prec, Special::Infinity))
    }

    pub fn pi(prec: u32) -> Self {
        Real {
            lo: down(prec, Constant::Pi),
            hi: up(prec, Constant::Pi),
        }
    }

    pub fn pi_squared(prec: u32) -> Self {
        Real::pi(prec).sqr()
    }

    pub fn ln2(prec: u32) -> Self {
        Real {
            lo: down(prec, Constant::Log2),
            hi: up(prec, Constant::Log2),
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    fn prec2(&self, other: &Real) -> u32 {
        self.prec().max(other.prec())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    /// Width relative to the smaller endpoint magnitude.
    pub fn rel_width(&self) -> Float {
        let prec = self.prec();
        let scale = if self.lo.is_zero() || self.hi.is_zero() {
            Float::with_val(prec, 1)
        } else {
            Float::with_val(prec, self.lo.as_abs().clone().min(&self.hi.as_abs()))
        };
        up(prec, self.width() / &scale)
    }

    /// Rounded midpoint, for display and tolerance checks only.
    pub fn mid_f64(&self) -> f64 {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            if self.lo.is_infinite() && self.hi.is_infinite() {
                return f64::NAN;
            }
            return if self.lo.is_infinite() { self.hi.to_f64() } else { self.lo.to_f64() };
        }
        let prec = self.prec() + 1;
        let mid = Float::with_val(prec, &self.lo + &self.hi) / 2u32;
        mid.to_f64()
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo <= x && self.hi >= x
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        let lo_ok = match self.lo.partial_cmp(x) {
            Some(o) => o != Ordering::Greater,
            None => self.lo.is_infinite() && self.lo.is_sign_negative(),
        };
        let hi_ok = match self.hi.partial_cmp(x) {
            Some(o) => o != Ordering::Less,
            None => self.hi.is_infinite() && self.hi.is_sign_positive(),
        };
        lo_ok && hi_ok
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Real) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Real) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Real) -> Option<Real> {
        if !self.intersects(other) {
            return None;
        }
        let lo = if self.lo >= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi <= other.hi { self.hi.clone() } else { other.hi.clone() };
        Some(Real { lo, hi })
    }

    pub fn hull(&self, other: &Real) -> Real {
        let lo = if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() };
        Real { lo, hi }
    }

    /// Certified `self < other`.
    pub fn certainly_lt(&self, other: &Real) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_gt(&self, other: &Real) -> bool {
        self.lo > other.hi
    }

    pub fn certainly_le(&self, other: &Real) -> bool {
        self.hi <= other.lo
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn certainly_negative(&self) -> bool {
        self.hi < 0
    }

    /// Interval enclosure of `max(x, y)`.
    pub fn max(&self, other: &Real) -> Real {
        let lo = if self.lo >= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() };
        Real { lo, hi }
    }

    /// Interval enclosure of `min(x, y)`.
    pub fn min(&self, other: &Real) -> Real {
        let lo = if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi <= other.hi { self.hi.clone() } else { other.hi.clone() };
        Real { lo, hi }
    }

    /// Re-rounds outward to a different working precision.
    pub fn with_prec(&self, prec: u32) -> Real {
        Real {
            lo: down(prec, &self.lo),
            hi: up(prec, &self.hi),
        }
    }

    pub fn sqr(&self) -> Real {
        let prec = self.prec();
        if self.lo >= 0 {
            Real::from_bounds(
                mul_endpoint(prec, &self.lo, &self.lo, Round::Down),
                mul_endpoint(prec, &self.hi, &self.hi, Round::Up),
            )
        } else if self.hi <= 0 {
            Real::from_bounds(
                mul_endpoint(prec, &self.hi, &self.hi, Round::Down),
                mul_endpoint(prec, &self.lo, &self.lo, Round::Up),
            )
        } else {
            let a = mul_endpoint(prec, &self.lo, &self.lo, Round::Up);
            let b = mul_endpoint(prec, &self.hi, &self.hi, Round::Up);
            Real::from_bounds(Float::with_val(prec, 0), max_of([a, b]))
        }
    }

    pub fn recip(&self) -> Real {
        Real::one(self.prec()) / self
    }

    pub fn mul_int(&self, k: i64) -> Real {
        self * &Real::from_int(k, self.prec())
    }

    /// Exact division by a power of two (up to exponent range).
    pub fn div_pow2(&self, k: u32) -> Real {
        let prec = self.prec();
        Real::from_bounds(down(prec, &self.lo >> k), up(prec, &self.hi >> k))
    }

    pub fn abs(&self) -> Real {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            -self
        } else {
            let prec = self.prec();
            let m = max_of([Float::with_val(prec, -&self.lo), self.hi.clone()]);
            Real::from_bounds(Float::with_val(prec, 0), m)
        }
    }

    fn monotone_up(&self, f: fn(&mut Float, Round) -> Ordering) -> Real {
        let prec = self.prec();
        Real::from_bounds(apply(prec, &self.lo, Round::Down, f), apply(prec, &self.hi, Round::Up, f))
    }

    pub fn exp(&self) -> Real {
        self.monotone_up(Float::exp_round)
    }

    pub fn sinh(&self) -> Real {
        self.monotone_up(Float::sinh_round)
    }

    pub fn tanh(&self) -> Real {
        self.monotone_up(Float::tanh_round)
    }

    pub fn asinh(&self) -> Real {
        self.monotone_up(Float::asinh_round)
    }

    pub fn cosh(&self) -> Real {
        let prec = self.prec();
        if self.lo >= 0 {
            self.monotone_up(Float::cosh_round)
        } else if self.hi <= 0 {
            Real::from_bounds(
                apply(prec, &self.hi, Round::Down, Float::cosh_round),
                apply(prec, &self.lo, Round::Up, Float::cosh_round),
            )
        } else {
            let a = apply(prec, &self.lo, Round::Up, Float::cosh_round);
            let b = apply(prec, &self.hi, Round::Up, Float::cosh_round);
            Real::from_bounds(Float::with_val(prec, 1), max_of([a, b]))
        }
    }

    pub fn ln(&self) -> Result<Real, NumericsError> {
        if self.lo < 0 {
            return Err(NumericsError::domain("ln", &self.lo));
        }
        Ok(self.monotone_up(Float::ln_round))
    }

    /// `ln(1 + x)`, accurate for small `x`.
    pub fn ln_1p(&self) -> Result<Real, NumericsError> {
        if self.lo < -1 {
            return Err(NumericsError::domain("ln_1p", &self.lo));
        }
        Ok(self.monotone_up(Float::ln_1p_round))
    }

    pub fn sqrt(&self) -> Result<Real, NumericsError> {
        if self.lo < 0 {
            return Err(NumericsError::domain("sqrt", &self.lo));
        }
        Ok(self.monotone_up(Float::sqrt_round))
    }

    pub fn atanh(&self) -> Result<Real, NumericsError> {
        if self.lo <= -1 {
            return Err(NumericsError::domain("atanh", &self.lo));
        }
        if self.hi >= 1 {
            return Err(NumericsError::domain("atanh", &self.hi));
        }
        Ok(self.monotone_up(Float::atanh_round))
    }

    pub fn acosh(&self) -> Result<Real, NumericsError> {
        if self.lo < 1 {
            return Err(NumericsError::domain("acosh", &self.lo));
        }
        Ok(self.monotone_up(Float::acosh_round))
    }

    /// `acosh(max(x, 1))`: the part of the enclosure below 1 maps to 0.
    pub fn acosh_clamped(&self) -> Real {
        let prec = self.prec();
        let clamp = |x: &Float| {
            if *x <= 1 {
                Float::with_val(prec, 1)
            } else {
                x.clone()
            }
        };
        let lo = apply(prec, &clamp(&self.lo), Round::Down, Float::acosh_round);
        let hi = apply(prec, &clamp(&self.hi), Round::Up, Float::acosh_round);
        Real::from_bounds(lo, hi)
    }

    /// `x^y = exp(y ln x)` for `x > 0`.
    pub fn pow(&self, exponent: &Real) -> Result<Real, NumericsError> {
        Ok((exponent * &self.ln()?).exp())
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl Add for &Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        let prec = self.prec2(rhs);
        Real::from_bounds(down(prec, &self.lo + &rhs.lo), up(prec, &self.hi + &rhs.hi))
    }
}

impl Sub for &Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        let prec = self.prec2(rhs);
        Real::from_bounds(down(prec, &self.lo - &rhs.hi), up(prec, &self.hi - &rhs.lo))
    }
}

impl Mul for &Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        let prec = self.prec2(rhs);
        let pairs = [(&self.lo, &rhs.lo), (&self.lo, &rhs.hi), (&self.hi, &rhs.lo), (&self.hi, &rhs.hi)];
        let lo = min_of(pairs.iter().map(|(a, b)| mul_endpoint(prec, a, b, Round::Down)));
        let hi = max_of(pairs.iter().map(|(a, b)| mul_endpoint(prec, a, b, Round::Up)));
        Real::from_bounds(lo, hi)
    }
}

impl Div for &Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        let prec = self.prec2(rhs);
        let strictly_signed = rhs.lo > 0 || rhs.hi < 0;
        if strictly_signed {
            let pairs = [(&self.lo, &rhs.lo), (&self.lo, &rhs.hi), (&self.hi, &rhs.lo), (&self.hi, &rhs.hi)];
            let lo = min_of(pairs.iter().map(|(a, b)| div_endpoint(prec, a, b, Round::Down)));
            let hi = max_of(pairs.iter().map(|(a, b)| div_endpoint(prec, a, b, Round::Up)));
            return Real::from_bounds(lo, hi);
        }
        // Denominator touches zero: use the one-sided reciprocal when the
        // zero is an endpoint, otherwise give up on the sign.
        let inf = Float::with_val(prec, Special::Infinity);
        let neg_inf = Float::with_val(prec, Special::NegInfinity);
        let recip = if rhs.lo.is_zero() && rhs.hi > 0 {
            Real::from_bounds(div_endpoint(prec, &Float::with_val(prec, 1), &rhs.hi, Round::Down), inf)
        } else if rhs.hi.is_zero() && rhs.lo < 0 {
            Real::from_bounds(neg_inf, div_endpoint(prec, &Float::with_val(prec, 1), &rhs.lo, Round::Up))
        } else {
            return Real::entire(prec);
        };
        self * &recip
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Decimal digits that cover `prec` bits, plus a guard digit.
pub fn decimal_digits(prec: u32) -> usize {
    (prec as usize * 30103).div_ceil(100000) + 1
}

/// Lower endpoint as a decimal string rounded toward `-inf`.
pub fn decimal_down(x: &Float) -> String {
    x.to_string_radix_round(10, Some(decimal_digits(x.prec())), Round::Down)
}

/// Upper endpoint as a decimal string rounded toward `+inf`.
pub fn decimal_up(x: &Float) -> String {
    x.to_string_radix_round(10, Some(decimal_digits(x.prec())), Round::Up)
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", decimal_down(&self.lo), decimal_up(&self.hi))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.10e}, {:.10e}]", self.lo.to_f64_round(Round::Down), self.hi.to_f64_round(Round::Up))
    }
}

impl NumericsError {
    pub(crate) fn domain(function: &'static str, endpoint: &Float) -> Self {
        NumericsError::Domain {
            function,
            endpoint: endpoint.to_string_radix(10, Some(20)),
        }
    }
}
