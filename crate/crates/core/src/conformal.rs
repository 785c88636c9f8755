//! Conformal moduli of doubly connected domains.
//!
//! Normalization: the round annulus `{1 < |z| < R}` has modulus
//! `ln R / (2π)`, and a ring of modulus `m` has core geodesic length `π/m`
//! in its own hyperbolic metric.

use thiserror::Error;

use crate::numerics::{NumericsError, Real};

/// Fixed AGM step count. Convergence is quadratic once `a` and `b` are
/// comparable, so this covers complementary moduli far below `2^-10000`; a
/// fixed count also keeps enclosures nested as the precision grows.
const AGM_STEPS: usize = 80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("{what} = {value} is outside the admissible range")]
    OutOfRange { what: &'static str, value: String },
    #[error("slit endpoints are not certified to satisfy a < b < c < d")]
    Ordering,
    #[error("slits touch (b = c cannot be excluded)")]
    Touching,
    #[error("radii are not certified to satisfy 0 < r1 < r2")]
    Degenerate,
    #[error("modulus is not certified positive")]
    ZeroModulus,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn out_of_range(what: &'static str, x: &Real) -> ConformalError {
    ConformalError::OutOfRange { what, value: format!("{x:?}") }
}

/// Modulus of a ring domain.
#[derive(Clone, Debug, PartialEq)]
pub struct RingModulus {
    pub value: Real,
}

/// Arithmetic–geometric mean `M(1, b)` of a point `b > 0`.
///
/// Each step keeps `[b_n.lo, a_n.hi]`, which contains the limit because
/// `b_n <= M <= a_n`; the running intersection is returned.
fn agm_point(b: Real) -> Real {
    let prec = b.prec();
    let mut a = Real::one(prec);
    let mut b = b;
    let mut best = Real::from_bounds(b.lo().clone(), a.hi().clone());
    for _ in 0..AGM_STEPS {
        let next_a = (&a + &b).div_pow2(1);
        let next_b = (&a * &b).sqrt().expect("AGM terms stay positive");
        a = next_a;
        b = next_b;
        let candidate = Real::from_bounds(b.lo().clone(), a.hi().clone());
        if let Some(tighter) = best.intersect(&candidate) {
            best = tighter;
        }
    }
    best
}

/// `M(1, b)` for an interval `b > 0`, using monotonicity in `b`.
fn agm(b: &Real) -> Real {
    let lo = agm_point(Real::point(b.lo().clone()));
    let hi = agm_point(Real::point(b.hi().clone()));
    Real::from_bounds(lo.lo().clone(), hi.hi().clone())
}

/// `K` from the complementary modulus: `K = π / (2 M(1, k'))`.
fn k_from_complement(k_prime: &Real) -> Real {
    Real::pi(k_prime.prec()) / agm(k_prime).mul_int(2)
}

/// `sqrt(1 - x^2)` evaluated as `sqrt((1 - x)(1 + x))`, for `0 <= x <= 1`.
fn complement(x: &Real) -> Result<Real, NumericsError> {
    let one = Real::one(x.prec());
    let prod = (&one - x) * (&one + x);
    let clipped = if *prod.lo() < 0 {
        Real::from_bounds(rug::Float::with_val(x.prec(), 0), prod.hi().clone())
    } else {
        prod
    };
    clipped.sqrt()
}

/// Complete elliptic integral of the first kind `K(k)`, `0 <= k < 1`.
pub fn elliptic_k(k: &Real) -> Result<Real, ConformalError> {
    if *k.lo() < 0 || *k.hi() >= 1 {
        return Err(out_of_range("k", k));
    }
    Ok(k_from_complement(&complement(k)?))
}

/// `μ(r) = (π/2) K(r') / K(r)` from `r` and `r' = sqrt(1 - r^2)`, both given.
///
/// Equal to `(π/2) M(1, r') / M(1, r)`; the numerator falls and the
/// denominator rises with `r`, so plain interval division is already tight.
fn mu_pair(r: &Real, r_prime: &Real) -> Real {
    let prec = r.prec();
    Real::pi(prec).div_pow2(1) * agm(r_prime) / agm(r)
}

/// Grötzsch ring function `μ(r)` for `0 < r < 1`.
pub fn grotzsch_mu(r: &Real) -> Result<Real, ConformalError> {
    if !r.certainly_positive() || *r.hi() >= 1 {
        return Err(out_of_range("r", r));
    }
    Ok(mu_pair(r, &complement(r)?))
}

/// `{r1 < |z| < r2}` has modulus `ln(r2/r1) / (2π)`.
pub fn round_annulus_modulus(r1: &Real, r2: &Real) -> Result<RingModulus, ConformalError> {
    if !r1.certainly_positive() || !r1.certainly_lt(r2) {
        return Err(ConformalError::Degenerate);
    }
    let prec = r1.prec().max(r2.prec());
    let value = (r2 / r1).ln()? / Real::pi(prec).mul_int(2);
    Ok(RingModulus { value })
}

/// Modulus of the complement of `[-1, 0] ∪ [t, +∞]`, `t > 0`.
///
/// This is `μ(1/sqrt(1+t)) / π`; the complementary argument is computed as
/// `1/sqrt(1 + 1/t)` so that small `t` keeps full relative accuracy.
pub fn teichmuller_ring_modulus(t: &Real) -> Result<RingModulus, ConformalError> {
    if !t.certainly_positive() {
        return Err(out_of_range("t", t));
    }
    let prec = t.prec();
    let one = Real::one(prec);
    let r = (&one + t).sqrt()?.recip();
    let r_prime = (&one + &t.recip()).sqrt()?.recip();
    let value = mu_pair(&r, &r_prime) / Real::pi(prec);
    Ok(RingModulus { value })
}

/// Cross ratio `(c - b)(d - a) / ((d - c)(b - a))` of four points.
///
/// For `a < b < c < d` this is the `t` for which `[a, b] ∪ [c, d]` is
/// Möbius-equivalent to `[-1, 0] ∪ [t, +∞]`.
pub fn slit_cross_ratio(a: &Real, b: &Real, c: &Real, d: &Real) -> Real {
    ((c - b) * (d - a)) / ((d - c) * (b - a))
}

/// Modulus of the sphere minus `[a, b] ∪ [c, d]`.
pub fn two_slit_modulus(a: &Real, b: &Real, c: &Real, d: &Real) -> Result<RingModulus, ConformalError> {
    if !a.certainly_lt(b) || !c.certainly_lt(d) {
        return Err(ConformalError::Ordering);
    }
    if !b.certainly_lt(c) {
        return Err(if c.certainly_lt(b) { ConformalError::Ordering } else { ConformalError::Touching });
    }
    teichmuller_ring_modulus(&slit_cross_ratio(a, b, c, d))
}

/// Hyperbolic length `π/m` of the core geodesic of a ring of modulus `m`.
pub fn core_length(m: &RingModulus) -> Result<Real, ConformalError> {
    if !m.value.certainly_positive() {
        return Err(ConformalError::ZeroModulus);
    }
    Ok(Real::pi(m.value.prec()) / &m.value)
}
