//! Right-angled hexagons, pants seams and distances between geodesics in
//! the upper half-plane.
//!
//! A pair of pants with boundary lengths `(a, b, c)` is two copies of the
//! right-angled hexagon with alternate sides `a/2, b/2, c/2`. The seam
//! `s_bc` joins boundaries `b` and `c`.

use rug::Float;

use super::HypError;
use crate::numerics::Real;

/// Boundary lengths above this are replaced by the sound limit: a corner
/// this large would overflow `cosh` at any working precision.
const CLAMP: f64 = 1_048_576.0;

/// Largest number of guard bits the matrix route may add.
const MATRIX_MAX_EXTRA_BITS: u32 = 8192;

/// A point `(x1 : x2)` of the real projective line; `(1 : 0)` is infinity.
#[derive(Clone, Debug)]
pub struct ProjPoint {
    x1: Real,
    x2: Real,
}

impl ProjPoint {
    pub fn finite(x: Real) -> ProjPoint {
        let prec = x.prec();
        ProjPoint { x1: x, x2: Real::one(prec) }
    }

    pub fn infinity(prec: u32) -> ProjPoint {
        ProjPoint { x1: Real::one(prec), x2: Real::zero(prec) }
    }

    /// Image under `z ↦ (m11 z + m12) / (m21 z + m22)`.
    pub fn mobius(&self, m: &[[Real; 2]; 2]) -> ProjPoint {
        ProjPoint {
            x1: &m[0][0] * &self.x1 + &m[0][1] * &self.x2,
            x2: &m[1][0] * &self.x1 + &m[1][1] * &self.x2,
        }
    }
}

fn det(a: &ProjPoint, b: &ProjPoint) -> Real {
    &a.x1 * &b.x2 - &a.x2 * &b.x1
}

fn exactly_zero(x: &Real) -> bool {
    x.is_point() && x.lo().is_zero()
}

/// A complete geodesic of the upper half-plane, given by its two ideal
/// endpoints.
#[derive(Clone, Debug)]
pub struct Geodesic {
    pub p: ProjPoint,
    pub q: ProjPoint,
}

impl Geodesic {
    pub fn new(p: ProjPoint, q: ProjPoint) -> Geodesic {
        Geodesic { p, q }
    }

    /// The semicircle over `[a, b]`.
    pub fn finite(a: Real, b: Real) -> Geodesic {
        Geodesic::new(ProjPoint::finite(a), ProjPoint::finite(b))
    }

    /// The vertical line over `x`.
    pub fn vertical(x: Real) -> Geodesic {
        let prec = x.prec();
        Geodesic::new(ProjPoint::finite(x), ProjPoint::infinity(prec))
    }

    pub fn mobius(&self, m: &[[Real; 2]; 2]) -> Geodesic {
        Geodesic::new(self.p.mobius(m), self.q.mobius(m))
    }

    /// Trace-zero matrix whose fixed points are the endpoints.
    fn matrix(&self) -> [[Real; 2]; 2] {
        let (p, q) = (&self.p, &self.q);
        let m = &p.x1 * &q.x2 + &q.x1 * &p.x2;
        [[m.clone(), (&p.x1 * &q.x1).mul_int(-2)], [(&p.x2 * &q.x2).mul_int(2), -m]]
    }
}

fn mat_mul(a: &[[Real; 2]; 2], b: &[[Real; 2]; 2]) -> [[Real; 2]; 2] {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Fixed point of a trace-zero matrix `[[x, y], [z, -x]]`, written either as
/// `(x + σr : z)` or as `(-y : x - σr)`, whichever is certainly not `(0 : 0)`.
fn fixed_point(x: &Real, y: &Real, z: &Real, r: &Real, sign: i64) -> Result<ProjPoint, HypError> {
    let sr = r.mul_int(sign);
    let first = ProjPoint { x1: x + &sr, x2: z.clone() };
    if !first.x1.contains_f64(0.0) || !first.x2.contains_f64(0.0) {
        return Ok(first);
    }
    let second = ProjPoint { x1: -y, x2: x - &sr };
    if !second.x1.contains_f64(0.0) || !second.x2.contains_f64(0.0) {
        return Ok(second);
    }
    Err(HypError::Realization("common perpendicular endpoint is not resolved".into()))
}

/// The common perpendicular of two disjoint, non-asymptotic geodesics: the
/// axis of the commutator of their matrices.
pub fn common_perpendicular(g1: &Geodesic, g2: &Geodesic) -> Result<Geodesic, HypError> {
    let a = g1.matrix();
    let b = g2.matrix();
    let ab = mat_mul(&a, &b);
    let ba = mat_mul(&b, &a);
    let x = &ab[0][0] - &ba[0][0];
    let y = &ab[0][1] - &ba[0][1];
    let z = &ab[1][0] - &ba[1][0];
    let disc = &x.sqr() + &(&y * &z);
    if !disc.certainly_positive() {
        return Err(HypError::Realization("geodesics are not certified disjoint".into()));
    }
    let r = disc.sqrt()?;
    Ok(Geodesic::new(fixed_point(&x, &y, &z, &r, 1)?, fixed_point(&x, &y, &z, &r, -1)?))
}

/// Hyperbolic distance between two complete geodesics; 0 when they cross
/// or share an endpoint.
///
/// Uses `cosh d = |[a1,b2][b1,a2] + [a1,a2][b1,b2]| / |[a1,b1][a2,b2]|`
/// with `[u,v]` the 2x2 determinant of homogeneous coordinates.
pub fn geodesic_distance(g1: &Geodesic, g2: &Geodesic) -> Result<Real, HypError> {
    let (a1, b1, a2, b2) = (&g1.p, &g1.q, &g2.p, &g2.q);
    let d11 = det(a1, b1);
    let d22 = det(a2, b2);
    if d11.contains_f64(0.0) || d22.contains_f64(0.0) {
        return Err(HypError::DegenerateGeodesic);
    }
    let da = det(a1, a2);
    let db = det(b1, b2);
    let dab = det(a1, b2);
    let dba = det(b1, a2);
    if (exactly_zero(&da) && exactly_zero(&db)) || (exactly_zero(&dab) && exactly_zero(&dba)) {
        return Err(HypError::CoincidentGeodesics);
    }
    let x = (&dab * &dba + &da * &db) / (&d11 * &d22);
    Ok(x.abs().acosh_clamped())
}

fn halves(a: &Real, b: &Real, c: &Real) -> (Real, Real, Real) {
    (a.div_pow2(1), b.div_pow2(1), c.div_pow2(1))
}

/// `cosh x - 1` for the hexagon side opposite `x`:
/// `(cosh u + cosh(v - w)) / (sinh v sinh w)`.
fn cosh_minus_one(u: &Real, v: &Real, w: &Real) -> Real {
    (u.cosh() + (v - w).cosh()) / (v.sinh() * w.sinh())
}

/// `x` from `cosh x - 1`, as `2 asinh(sqrt((cosh x - 1) / 2))`.
fn from_cosh_minus_one(cm1: &Real) -> Result<Real, HypError> {
    let zero = Real::zero(cm1.prec());
    let half = cm1.div_pow2(1).max(&zero);
    Ok(half.sqrt()?.asinh().mul_int(2))
}

fn seam_closed_point(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    let (alpha, beta, gamma) = halves(a, b, c);
    from_cosh_minus_one(&cosh_minus_one(&alpha, &beta, &gamma))
}

fn distance_pentagon_point(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    let (alpha, beta, gamma) = halves(a, b, c);
    // z is the seam between boundaries a and b; the pentagon cut off by the
    // b–c seam gives cosh h = sinh z sinh(b/2).
    let zm1 = cosh_minus_one(&gamma, &alpha, &beta);
    let two = Real::from_int(2, a.prec());
    let sinh_z = (&zm1 * &(&zm1 + &two)).sqrt()?;
    Ok((sinh_z * beta.sinh()).acosh_clamped())
}

/// The hexagon realized in the upper half-plane at a point corner.
struct Realization {
    l_x: Geodesic,
    l_y: Geodesic,
    l_z: Geodesic,
    s: Real,
    sum: Real,
}

/// Places side `a/2` on the imaginary axis between the seams `(-1, 1)` and
/// `(-e^{a/2}, e^{a/2})`, then solves for the third seam `(p, q)` at
/// distance `c/2` from the first and `b/2` from the second.
fn realize(a: &Real, b: &Real, c: &Real) -> Result<Realization, HypError> {
    let prec = a.prec();
    let (alpha, beta, gamma) = halves(a, b, c);
    let one = Real::one(prec);
    let e = alpha.exp();
    let c1 = gamma.cosh();
    let c2 = beta.cosh();
    let s = (&e.sqr() - &one) / (&c1 + &(&e * &c2));
    let p_prod = &one + &(&c1 * &s);
    let sum = (&s.sqr() + &p_prod.mul_int(4)).sqrt()?;
    let p = (&sum - &s).div_pow2(1);
    let q = (&sum + &s).div_pow2(1);
    if !(one.certainly_lt(&p) && p.certainly_lt(&q) && q.certainly_lt(&e)) {
        return Err(HypError::Realization(format!("seam endpoints {p:?}, {q:?} out of order")));
    }
    Ok(Realization {
        l_x: Geodesic::finite(p, q),
        l_y: Geodesic::finite(-&one, one),
        l_z: Geodesic::finite(-&e, e),
        s,
        sum,
    })
}

/// Working precision the realization needs: long boundaries push seam
/// endpoints apart like `e^{(a+b+c)/2}`, short ones squeeze `p` towards 1
/// like `(c/2)²`.
fn matrix_guard_bits(a: &Real, b: &Real, c: &Real) -> Option<u32> {
    let large = (a + b + c).hi().to_f64() * std::f64::consts::LOG2_E;
    let small: i64 = [a, b, c].iter().map(|x| x.lo().get_exp().map_or(0, |e| 2 * i64::from(-e).max(0))).sum();
    let total = large + small as f64;
    if !(total.is_finite() && total <= f64::from(MATRIX_MAX_EXTRA_BITS)) {
        return None;
    }
    Some(total.ceil() as u32 + 64)
}

fn raise(x: &Real, prec: u32) -> Real {
    x.with_prec(prec)
}

fn seam_matrix_point(a: &Real, b: &Real, c: &Real) -> Result<Option<Real>, HypError> {
    let prec = a.prec();
    let Some(extra) = matrix_guard_bits(a, b, c) else { return Ok(None) };
    let wp = prec + extra;
    let hex = realize(&raise(a, wp), &raise(b, wp), &raise(c, wp))?;
    let g_b = common_perpendicular(&hex.l_z, &hex.l_x)?;
    let g_c = common_perpendicular(&hex.l_x, &hex.l_y)?;
    Ok(Some(geodesic_distance(&g_b, &g_c)?.with_prec(prec)))
}

fn distance_matrix_point(a: &Real, b: &Real, c: &Real) -> Result<Option<Real>, HypError> {
    let prec = a.prec();
    let Some(extra) = matrix_guard_bits(a, b, c) else { return Ok(None) };
    let wp = prec + extra;
    let hex = realize(&raise(a, wp), &raise(b, wp), &raise(c, wp))?;
    let axis = Geodesic::vertical(Real::zero(wp));
    let d = geodesic_distance(&axis, &hex.l_x)?;
    // Same quantity from the explicit endpoints: cosh d = (p + q)/(q - p).
    let direct = (&hex.sum / &hex.s).acosh_clamped();
    let d = d.intersect(&direct).ok_or_else(|| HypError::Realization("inconsistent distance".into()))?;
    Ok(Some(d.with_prec(prec)))
}

fn check_positive(name: &'static str, x: &Real) -> Result<(), HypError> {
    if !x.certainly_positive() {
        return Err(HypError::NonPositive { name, value: format!("{x:?}") });
    }
    Ok(())
}

/// Which way a quantity moves as one boundary length grows.
#[derive(Clone, Copy)]
enum Trend {
    Up,
    Down,
}

fn is_large(x: &Float) -> bool {
    *x > CLAMP
}

/// Evaluates a function that is monotone in each argument at the two
/// extreme corners. Corners beyond [`CLAMP`] use limits that keep the
/// result sound: `None` from `limit` means the side becomes trivial.
fn corner_hull(
    args: [&Real; 3],
    trends: [Trend; 3],
    f: impl Fn(&Real, &Real, &Real) -> Result<Real, HypError>,
) -> Result<Real, HypError> {
    let prec = args[0].prec();
    let pick = |want_low: bool| -> Option<[Real; 3]> {
        let mut out = Vec::with_capacity(3);
        for (x, t) in args.iter().zip(trends) {
            // For the low end of the output take the argument end that
            // lowers the output.
            let use_lo = matches!((t, want_low), (Trend::Up, true) | (Trend::Down, false));
            let end = if use_lo { x.lo() } else { x.hi() };
            if is_large(end) {
                // Lowering an argument that sits at its lower end moves the
                // output in the direction being bounded, so clamping it is
                // sound; any other oversized corner makes that side trivial.
                if use_lo {
                    out.push(Real::point(Float::with_val(prec, CLAMP)));
                    continue;
                }
                return None;
            }
            out.push(Real::point(end.clone()));
        }
        Some([out[0].clone(), out[1].clone(), out[2].clone()])
    };
    let lo = match pick(true) {
        Some([x, y, z]) => f(&x, &y, &z)?.lo().clone(),
        None => Float::with_val(prec, 0),
    };
    let hi = match pick(false) {
        Some([x, y, z]) => f(&x, &y, &z)?.hi().clone(),
        None => Float::with_val(prec, rug::float::Special::Infinity),
    };
    Ok(Real::from_bounds(lo, hi))
}

/// Length of the seam joining boundaries `b` and `c` of the pants with
/// boundary lengths `(a, b, c)`:
/// `cosh s = (cosh(a/2) + cosh(b/2) cosh(c/2)) / (sinh(b/2) sinh(c/2))`.
///
/// The seam grows with `a` and shrinks with `b` and `c`, so interval inputs
/// are handled at the two extreme corners.
pub fn hexagon_seam(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    corner_hull([a, b, c], [Trend::Up, Trend::Down, Trend::Down], seam_closed_point)
}

/// The same seam measured between the two common perpendiculars of an
/// explicit half-plane realization.
pub fn hexagon_seam_matrix(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    corner_hull([a, b, c], [Trend::Up, Trend::Down, Trend::Down], |x, y, z| {
        seam_matrix_point(x, y, z)?.ok_or(HypError::MatrixRouteUnavailable)
    })
}

/// Distance from boundary `a` to the seam `s_bc`, by cutting the hexagon
/// into right-angled pentagons.
pub fn pants_seam_distance_pentagon(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    corner_hull([a, b, c], [Trend::Down, Trend::Up, Trend::Up], distance_pentagon_point)
}

/// Distance from boundary `a` to the seam `s_bc`, measured in the explicit
/// half-plane realization.
pub fn pants_seam_distance_matrix(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    corner_hull([a, b, c], [Trend::Down, Trend::Up, Trend::Up], |x, y, z| {
        distance_matrix_point(x, y, z)?.ok_or(HypError::MatrixRouteUnavailable)
    })
}

/// Distance inside the pants from boundary `a` to the seam `s_bc`.
///
/// Both routes are evaluated and intersected; disjoint enclosures are a
/// hard error. Corners too extreme for the matrix route fall back to the
/// pentagon route alone.
pub fn pants_seam_distance(a: &Real, b: &Real, c: &Real) -> Result<Real, HypError> {
    let pentagon = pants_seam_distance_pentagon(a, b, c)?;
    match pants_seam_distance_matrix(a, b, c) {
        Ok(matrix) => pentagon
            .intersect(&matrix)
            .ok_or_else(|| HypError::Realization(format!("routes disagree: {pentagon:?} vs {matrix:?}"))),
        Err(HypError::MatrixRouteUnavailable) => Ok(pentagon),
        Err(e) => Err(e),
    }
}
