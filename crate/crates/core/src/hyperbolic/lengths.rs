//! Two-sided bounds on the length of `γ_n^i`.

use std::fmt::Write as _;

use rug::float::Special;
use rug::Float;

use super::{hexagon_seam, pants_seam_distance, CurveId, HypError, Method};
use crate::cantor::CantorTree;
use crate::conformal::{core_length, round_annulus_modulus, teichmuller_ring_modulus};
use crate::numerics::{decimal_down, decimal_up, Magnitude, Real};
use crate::seqspec::{LogChannels, SequenceSpec};

/// The collar function `η(x) = asinh(1 / sinh(x/2))`.
///
/// Large arguments underflow towards `[0, tiny]`, which stays sound.
pub fn collar_eta(x: &Real) -> Result<Real, HypError> {
    if !x.certainly_positive() {
        return Err(HypError::NonPositive { name: "x", value: format!("{x:?}") });
    }
    Ok(x.div_pow2(1).sinh().recip().asinh())
}

/// `π² / atanh(q)`. An upper endpoint of `q` at or above 1 sends the lower
/// endpoint of the bound to 0.
pub fn upper_bound_paper(q: &Real) -> Result<Real, HypError> {
    if !q.certainly_positive() || *q.lo() >= 1 {
        return Err(HypError::NonPositive { name: "q and 1 - q", value: format!("{q:?}") });
    }
    let prec = q.prec();
    let lo = Real::point(q.lo().clone()).atanh()?;
    let hi = if *q.hi() >= 1 {
        Real::at_least(Float::with_val(prec, Special::Infinity))
    } else {
        Real::point(q.hi().clone()).atanh()?
    };
    Ok(Real::pi_squared(prec) / Real::from_bounds(lo.lo().clone(), hi.hi().clone()))
}

/// `π² / atanh(q_n)` from the log channels; when `q_n` is only known in log
/// scale, `q <= atanh(q) <= q/(1 - q²)` gives
/// `ln(bound) ∈ [2 ln π + λ - 2q², 2 ln π + λ]`.
pub fn upper_bound_paper_channels(ch: &LogChannels) -> Result<Magnitude, HypError> {
    let prec = ch.q.prec();
    if let Magnitude::Scalar(q) = &ch.q {
        let direct = upper_bound_paper(q)?;
        if direct.is_finite() && !direct.hi().is_zero() {
            return Ok(Magnitude::Scalar(direct));
        }
    }
    let lambda = ch.lambda.to_real_saturating();
    let q_sq = ch.q.to_real_saturating().sqr();
    let base = Real::pi(prec).ln()?.mul_int(2) + lambda;
    let slack = Real::from_bounds(-q_sq.mul_int(2).hi().clone(), Float::with_val(prec, 0));
    Ok(Magnitude::from_log(&base + &slack))
}

/// The collar lower bound for every `γ_n^i` at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub value: Real,
    /// The argument of the logarithm was not certified positive and the
    /// trivial bound 0 is reported.
    pub trivial: bool,
    /// Evaluated from `ln λ_n` because `λ_n` itself is out of range.
    pub log_path: bool,
}

/// `2η(π² / ln((1+q)/(2q)))`, with `ln((1+q)/(2q)) = λ - ln 2 + ln(1+q)`.
///
/// The logarithm is positive for every `q < 1`. When `λ` is only known
/// through `v = ln λ`, write `D = λ - ln 2 + ln(1+q)` and `t = π²/(2D)`:
/// then `η = asinh(1/sinh t)` lies within `t²` of `ln(2/t)`, and
/// `ln D = v + ln(1 - δ)` with `0 <= δ <= ln 2 · e^{-v}`.
pub fn lower_bound_paper(ch: &LogChannels) -> Result<LowerBound, HypError> {
    let prec = ch.q.prec();
    let zero = Real::zero(prec);
    let ln2 = Real::ln2(prec);
    let q_sat = ch.q.to_real_saturating();
    let ln_1p_q = match &ch.q {
        Magnitude::Scalar(q) => q.ln_1p()?,
        Magnitude::Log(_) => Real::from_bounds(Float::with_val(prec, 0), q_sat.hi().clone()),
    };
    if let Magnitude::Log(log_lambda) = &ch.lambda {
        let v = log_lambda.log_value();
        if *v.lo() > 3 {
            let pi = Real::pi(prec);
            let delta_max = (&ln2 * &(-v).exp()).hi().clone();
            let ln_one_minus_delta = Real::from_bounds(-Float::with_val(prec, &delta_max * 2u32), Float::with_val(prec, 0));
            let ln_d = v + &ln_one_minus_delta;
            let ln_two_over_t = Real::from_int(4, prec).ln()? - pi.ln()?.mul_int(2) + ln_d;
            let t_max = (&pi.sqr() * &(-v).exp()).hi().clone();
            let t_sq = Float::with_val_round(prec, &t_max * &t_max, rug::float::Round::Up).0;
            let eta = &ln_two_over_t + &Real::from_bounds(-t_sq.clone(), t_sq);
            return Ok(LowerBound { value: eta.mul_int(2), trivial: false, log_path: true });
        }
    }
    let lambda = ch.lambda.to_real_saturating();
    let arg = &(&lambda - &ln2) + &ln_1p_q;
    if !arg.certainly_positive() {
        return Ok(LowerBound { value: zero, trivial: true, log_path: false });
    }
    let x = Real::pi_squared(prec) / arg;
    let value = collar_eta(&x)?.mul_int(2);
    Ok(LowerBound { value, trivial: false, log_path: false })
}

/// `lower(γ_{n+1}) / (π²/atanh(q_n))`, the quantity whose growth drives
/// the seam estimate.
///
/// Evaluated directly while both bounds are finite, and through
/// `a_n = q_n μ_{n+1}` once `μ_{n+1} > 3`: then
/// `2η = 2(μ_{n+1} + C)` with `C ∈ ln 4 - 2 ln π + [-2δ - t², t²]`,
/// so the ratio is `(2/π²) (atanh(q_n)/q_n) (a_n + q_n C)`. Both routes
/// are intersected when available.
pub fn collar_ratio(spec: &SequenceSpec, n: u64, prec: u32) -> Result<Real, HypError> {
    let ch = spec.eval_log_channels(n, prec)?;
    let next = spec.eval_log_channels(n + 1, prec)?;
    let lower = lower_bound_paper(&next)?;
    let upper = upper_bound_paper_channels(&ch)?;
    let direct = match &upper {
        Magnitude::Scalar(u) if lower.value.is_finite() && u.is_finite() => Some(&lower.value / u),
        _ => None,
    };
    let mu_large = next.mu.as_ref().is_some_and(|m| m.certainly_gt(&Real::from_int(3, prec)));
    let a_n = spec.criterion(n, prec)?.value.and_then(|v| v.as_scalar().cloned());
    let via_identity = match a_n {
        Some(a) if mu_large => {
            let pi_sq = Real::pi_squared(prec);
            let q = ch.q.to_real_saturating();
            let factor = match &ch.q {
                Magnitude::Scalar(q) => q.atanh()? / q,
                Magnitude::Log(_) => {
                    let slack = q.sqr().mul_int(2);
                    Real::from_bounds(Float::with_val(prec, 1), (&Real::one(prec) + &slack).hi().clone())
                }
            };
            let lambda_lo = Real::point(next.lambda.to_real_saturating().lo().clone());
            let delta = Real::ln2(prec) / &lambda_lo;
            let t = &pi_sq / &lambda_lo;
            let t_sq = t.sqr();
            let spread = Real::from_bounds(-(&delta.mul_int(2) + &t_sq).hi().clone(), t_sq.hi().clone());
            let c = &(Real::from_int(4, prec).ln()? - Real::pi(prec).ln()?.mul_int(2)) + &spread;
            Some(&(&factor * &(&a + &(&q * &c))).mul_int(2) / &pi_sq)
        }
        _ => None,
    };
    match (direct, via_identity) {
        (Some(d), Some(v)) => d.intersect(&v).ok_or_else(|| {
            HypError::Realization(format!("collar ratio routes disagree at n = {n}: {d:?} vs {v:?}"))
        }),
        (Some(x), None) | (None, Some(x)) => Ok(x),
        (None, None) => Ok(Real::from_bounds(Float::with_val(prec, 0), Float::with_val(prec, Special::Infinity))),
    }
}

fn check_curve(tree: &CantorTree, curve: CurveId) -> Result<(), HypError> {
    if curve.n == 0 || curve.n > tree.depth() || CurveId::new(curve.n, curve.i).is_none() {
        return Err(HypError::CurveOutOfRange(curve));
    }
    Ok(())
}

/// Ring-based upper bounds for `γ_n^i`: the round annulus centred on
/// `I_n^i` reaching the nearest gap, and the two-slit ring formed by
/// `I_n^i` and the arc (through ∞ for interior intervals) that carries the
/// rest of the set. Empty for degenerate levels.
pub fn annulus_candidates(tree: &CantorTree, curve: CurveId) -> Result<Vec<(Method, Real)>, HypError> {
    check_curve(tree, curve)?;
    let shape = tree.shape(curve.n)?;
    if shape.degenerate {
        return Ok(Vec::new());
    }
    let prec = tree.prec();
    let len = &shape.length;
    let (left, right) = tree.gaps(curve.n, curve.i)?;
    let (gl, gr) = (left.map(|g| g.width), right.map(|g| g.width));
    let nearest = match (&gl, &gr) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a.clone(),
        (None, None) => return Ok(Vec::new()),
    };
    let mut out = Vec::new();
    if nearest.certainly_positive() {
        let r1 = len.div_pow2(1);
        let r2 = &r1 + &nearest;
        let m = round_annulus_modulus(&r1, &r2)?;
        out.push((Method::RoundAnnulus, core_length(&m)?));
    }
    let one = Real::one(prec);
    let t = match (&gl, &gr) {
        (Some(l), Some(r)) => (l * r) / (len * &(&(len + l) + r)),
        (None, Some(g)) | (Some(g), None) => g / &(&(&(&one - len) - g) * len),
        (None, None) => unreachable!(),
    };
    if t.certainly_positive() {
        let m = teichmuller_ring_modulus(&t)?;
        out.push((Method::TwoSlit, core_length(&m)?));
    }
    Ok(out)
}

/// The smaller of the ring-based bounds, or `None` without geometry.
pub fn annulus_upper_bound(tree: &CantorTree, curve: CurveId) -> Result<Option<Real>, HypError> {
    Ok(annulus_candidates(tree, curve)?.into_iter().map(|(_, v)| v).reduce(|a, b| a.min(&b)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperCandidate {
    pub method: Method,
    pub value: Magnitude,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthBounds {
    pub curve: CurveId,
    pub lower: LowerBound,
    /// Enclosure of the minimum over `candidates`.
    pub upper: Option<Magnitude>,
    /// The candidate with the smallest upper endpoint.
    pub upper_method: Option<Method>,
    pub candidates: Vec<UpperCandidate>,
}

impl LengthBounds {
    pub fn lower_method(&self) -> Method {
        Method::PaperCollar
    }

    pub fn candidate(&self, method: Method) -> Option<&Magnitude> {
        self.candidates.iter().find(|c| c.method == method).map(|c| &c.value)
    }

    pub fn is_log_scale(&self) -> bool {
        self.upper.as_ref().is_some_and(Magnitude::is_log_scale)
    }

    /// `[lower.lo, upper.hi]`, unbounded above without an upper bound.
    pub fn length_interval(&self) -> Real {
        let hi = match &self.upper {
            Some(m) => m.to_real_saturating().hi().clone(),
            None => Float::with_val(self.lower.value.prec(), Special::Infinity),
        };
        Real::from_bounds(self.lower.value.lo().clone(), hi)
    }
}

/// Whether `π²/atanh(q_n)` bounds `γ_n^i`: always for the outermost
/// intervals, for every `i` once the sequence is certified monotone
/// decreasing from the start.
fn paper_atanh_applies(spec: &SequenceSpec, curve: CurveId, prec: u32) -> bool {
    curve.is_outermost() || spec.monotone_from(prec) == Some(1)
}

/// Lower and upper bounds for one curve.
pub fn curve_bounds(spec: &SequenceSpec, tree: &CantorTree, curve: CurveId, prec: u32) -> Result<LengthBounds, HypError> {
    check_curve(tree, curve)?;
    let ch = spec.eval_log_channels(u64::from(curve.n), prec)?;
    let lower = lower_bound_paper(&ch)?;
    let mut candidates = Vec::new();
    if paper_atanh_applies(spec, curve, prec) {
        candidates.push(UpperCandidate { method: Method::PaperAtanh, value: upper_bound_paper_channels(&ch)? });
    }
    for (method, value) in annulus_candidates(tree, curve)? {
        candidates.push(UpperCandidate { method, value: Magnitude::Scalar(value) });
    }
    let lower_lo = Real::point(lower.value.lo().clone());
    for c in &candidates {
        if c.value.certainly_lt(&lower_lo) {
            return Err(HypError::Inconsistent {
                curve,
                lower: format!("{:?}", lower.value),
                upper: format!("{:?}", c.value),
                method: c.method,
            });
        }
    }
    let upper = candidates.iter().map(|c| c.value.clone()).reduce(|a, b| a.min(&b));
    let upper_method = candidates
        .iter()
        .reduce(|best, c| if c.value.ln().hi() < best.value.ln().hi() { c } else { best })
        .map(|c| c.method);
    Ok(LengthBounds { curve, lower, upper, upper_method, candidates })
}

/// One index from each class of curves at level `n` that share their
/// bounds: `1` (outermost) and `2^(n-m)` for `m = 1..n-1`, whose neighbours
/// are a level-`n` gap on the left and a level-`m` gap on the right. Every
/// other curve is one of these up to the mirror `x ↦ 1 - x`.
pub fn level_representatives(n: u32) -> Vec<u64> {
    let mut out = vec![1];
    for m in 1..n.min(64) {
        out.push(1u64 << (n - m));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Bounds for every class of curves at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelBounds {
    pub n: u32,
    pub lower: LowerBound,
    pub representatives: Vec<LengthBounds>,
    /// Largest upper bound over the level, if every class has one.
    pub worst_upper: Option<Magnitude>,
}

pub fn level_bounds(spec: &SequenceSpec, tree: &CantorTree, n: u32, prec: u32) -> Result<LevelBounds, HypError> {
    let representatives = level_representatives(n)
        .into_iter()
        .map(|i| curve_bounds(spec, tree, CurveId { n, i }, prec))
        .collect::<Result<Vec<_>, _>>()?;
    let lower = representatives[0].lower.clone();
    let worst_upper = representatives
        .iter()
        .map(|b| b.upper.clone())
        .collect::<Option<Vec<_>>>()
        .and_then(|uppers| {
            uppers.into_iter().reduce(|a, b| match (&a, &b) {
                (Magnitude::Scalar(x), Magnitude::Scalar(y)) => Magnitude::Scalar(x.max(y)),
                _ => Magnitude::from_log(a.ln().max(&b.ln())),
            })
        });
    Ok(LevelBounds { n, lower, representatives, worst_upper })
}

/// The pants `P_n^i` bounded by `γ_n^i`, `γ_{n+1}^{2i-1}` and `γ_{n+1}^{2i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PantsGeometry {
    pub pants: CurveId,
    /// Enclosures of the three boundary lengths `(a, b, c)`.
    pub boundary_lengths: [Real; 3],
    /// Seam joining the two level-`(n+1)` boundaries.
    pub seam_length: Real,
    /// Distance inside the pants from `γ_n^i` to that seam.
    pub boundary_to_seam: Real,
}

pub fn pants_geometry(spec: &SequenceSpec, tree: &CantorTree, pants: CurveId, prec: u32) -> Result<PantsGeometry, HypError> {
    let child = |i: u64| curve_bounds(spec, tree, CurveId { n: pants.n + 1, i }, prec);
    let a = curve_bounds(spec, tree, pants, prec)?.length_interval();
    let b = child(2 * pants.i - 1)?.length_interval();
    let c = child(2 * pants.i)?.length_interval();
    let seam_length = hexagon_seam(&a, &b, &c)?;
    let boundary_to_seam = pants_seam_distance(&a, &b, &c)?;
    Ok(PantsGeometry { pants, boundary_lengths: [a, b, c], seam_length, boundary_to_seam })
}

fn endpoints(x: &Real) -> (String, String) {
    (decimal_down(x.lo()), decimal_up(x.hi()))
}

/// Bounds table with columns
/// `n,i,lower_lo,lower_hi,upper_lo,upper_hi,lower_method,upper_method,log_scale_flag`.
/// When the flag is 1 the upper columns enclose the natural log of the bound.
pub fn bounds_csv(rows: &[LengthBounds]) -> String {
    let mut out = String::from("n,i,lower_lo,lower_hi,upper_lo,upper_hi,lower_method,upper_method,log_scale_flag\n");
    for b in rows {
        let (llo, lhi) = endpoints(&b.lower.value);
        let (ulo, uhi) = match &b.upper {
            Some(Magnitude::Scalar(u)) => endpoints(u),
            Some(m @ Magnitude::Log(_)) => endpoints(&m.ln()),
            None => (String::new(), String::new()),
        };
        let method = b.upper_method.map(|m| m.as_str()).unwrap_or("");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            b.curve.n,
            b.curve.i,
            llo,
            lhi,
            ulo,
            uhi,
            b.lower_method(),
            method,
            u8::from(b.is_log_scale())
        )
        .expect("writing to a String");
    }
    out
}
