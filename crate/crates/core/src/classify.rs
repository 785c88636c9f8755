//! Verdicts on the two countability criteria and the effective levels
//! `n₁`, `n₂`, `N` for a dilatation constant `K`.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cantor::{CantorError, CantorTree};
use crate::hyperbolic::{level_bounds, lower_bound_paper, pants_seam_distance, upper_bound_paper, HypError, LowerBound};
use crate::numerics::{Magnitude, Real};
use crate::seqspec::{CriterionValue, Family, Property, SeqError, SequenceSpec};

/// Minimum number of witnesses inside the horizon before a certificate is
/// accepted.
pub const MIN_WITNESSES: usize = 1;

/// Trailing certified increases a user closed form needs before its
/// criterion trace counts as evidence.
pub const MIN_INCREASING_STEPS: u64 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("K = {0} is not certified >= 1")]
    KBelowOne(String),
    #[error("length {0} is not certified positive")]
    NonPositiveLength(String),
    #[error("a Dehn twist power must be nonzero")]
    ZeroTwists,
    #[error("c = {0} must lie in (0, 1)")]
    InvalidC(String),
    #[error("horizon must be at least {0}")]
    HorizonTooSmall(u64),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Hyperbolic(#[from] HypError),
    #[error(transparent)]
    Cantor(#[from] CantorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Uncountable,
    CountableEvidence,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Uncountable => "Uncountable",
            Verdict::CountableEvidence => "CountableEvidence",
            Verdict::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// Outcome of the bounded-below-subsequence criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct UncountableCheck {
    pub c: Rational,
    /// Indices `n <= horizon` with `q_n > c` certified.
    pub witnesses: Vec<u64>,
    /// `π²/atanh(c)`, bounding `ℓ(γ_n^1)` at every witness.
    pub short_geodesic_bound: Real,
    /// Family property guaranteeing infinitely many witnesses.
    pub certificate: Option<Property>,
    pub certified: bool,
    pub notes: Vec<String>,
}

/// Outcome of the `q_n ln ln(1/q_{n+1}) → ∞` criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct CountableCheck {
    /// `a_n` for `n = 1..=horizon`.
    pub values: Vec<CriterionValue>,
    /// Least `m` with `a_m < a_{m+1} < … < a_horizon` certified.
    pub increasing_from: Option<u64>,
    pub certificate: Option<Property>,
    pub certified: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub spec_digest: String,
    pub precision_bits: u32,
    pub horizon: u64,
    pub verdict: Verdict,
    pub uncountable: UncountableCheck,
    pub countable: CountableCheck,
    pub notes: Vec<String>,
}

/// Hex SHA-256 of the canonical spec JSON and the precision.
pub fn spec_digest(spec: &SequenceSpec, prec: u32) -> String {
    let mut h = Sha256::new();
    h.update(spec.canonical_json().as_bytes());
    h.update(format!("\nprecision_bits={prec}").as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn is_user_form(spec: &SequenceSpec) -> bool {
    match spec.family() {
        Family::UserClosedForm { .. } => true,
        Family::ExplicitWithTail { tail, .. } => is_user_form(tail),
        _ => false,
    }
}

fn constant_subsequence(props: &[Property]) -> Option<(crate::seqspec::IndexPattern, Rational)> {
    props.iter().find_map(|p| match p {
        Property::ConstantOn { indices, value } => Some((*indices, value.clone())),
        _ => None,
    })
}

pub fn check_uncountable(spec: &SequenceSpec, horizon: u64, c: &Rational, prec: u32) -> Result<UncountableCheck, ClassifyError> {
    if *c <= 0 || *c >= 1 {
        return Err(ClassifyError::InvalidC(c.to_string()));
    }
    if horizon < 1 {
        return Err(ClassifyError::HorizonTooSmall(1));
    }
    let c_real = Real::from_rational(c, prec);
    let flags = (1..=horizon)
        .into_par_iter()
        .map(|n| spec.eval_log_channels(n, prec).map(|ch| ch.q.certainly_gt(&c_real)))
        .collect::<Result<Vec<_>, _>>()?;
    let witnesses: Vec<u64> = (1..=horizon).zip(flags).filter(|(_, w)| *w).map(|(n, _)| n).collect();
    let short_geodesic_bound = upper_bound_paper(&c_real)?;
    let mut notes = Vec::new();
    let certificate = spec
        .certified_properties(prec)
        .into_iter()
        .find(|p| matches!(p, Property::ConstantOn { value, .. } if value > c));
    let certified = certificate.is_some() && witnesses.len() >= MIN_WITNESSES;
    if certificate.is_none() && !witnesses.is_empty() {
        notes.push(format!(
            "{} witness(es) within the horizon but no property guarantees infinitely many",
            witnesses.len()
        ));
    }
    Ok(UncountableCheck { c: c.clone(), witnesses, short_geodesic_bound, certificate, certified, notes })
}

fn least_increasing_start(values: &[CriterionValue]) -> Option<u64> {
    let mut start = values.last()?.value.as_ref().map(|_| values.len())?;
    while start >= 2 {
        let (a, b) = (&values[start - 2], &values[start - 1]);
        match (&a.value, &b.value) {
            (Some(x), Some(y)) if x.certainly_lt_mag(y) => start -= 1,
            _ => break,
        }
    }
    (start < values.len()).then(|| values[start - 1].n)
}

pub fn check_countable(spec: &SequenceSpec, horizon: u64, prec: u32) -> Result<CountableCheck, ClassifyError> {
    if horizon < 2 {
        return Err(ClassifyError::HorizonTooSmall(2));
    }
    let values: Vec<CriterionValue> = (1..=horizon)
        .into_par_iter()
        .map(|n| spec.criterion(n, prec).unwrap_or(CriterionValue { n, value: None, closed_form: false }))
        .collect();
    let mut notes = Vec::new();
    let undefined: Vec<u64> = values.iter().filter(|v| v.value.is_none()).map(|v| v.n).collect();
    if !undefined.is_empty() {
        notes.push(format!("a_n undefined at n = {undefined:?}"));
    }
    let negative: Vec<u64> = values.iter().filter(|v| v.is_negative()).map(|v| v.n).collect();
    if !negative.is_empty() {
        notes.push(format!("a_n certified negative at n = {negative:?}"));
    }
    let increasing_from = least_increasing_start(&values);
    let certificate = spec
        .certified_properties(prec)
        .into_iter()
        .find(|p| matches!(p, Property::DivergentCriterion { .. }));
    let certified = if is_user_form(spec) {
        let long_enough = increasing_from.is_some_and(|m| horizon - m >= MIN_INCREASING_STEPS);
        let last_positive = matches!(
            &values.last().and_then(|v| v.value.clone()),
            Some(Magnitude::Log(_))
        ) || values.last().and_then(CriterionValue::as_real).is_some_and(|v| v.certainly_positive());
        if long_enough && last_positive {
            notes.push("closed form supplied by the user: divergence is numerical evidence only".into());
        }
        long_enough && last_positive
    } else {
        certificate.is_some() && increasing_from.is_some()
    };
    Ok(CountableCheck { values, increasing_from, certificate, certified, notes })
}

/// Runs both criteria. A failing `c` is retried with `v/(1+v)` when the
/// family has a constant subsequence of value `v`.
pub fn classify(spec: &SequenceSpec, horizon: u64, c: &Rational, prec: u32) -> Result<ClassificationReport, ClassifyError> {
    if horizon < 2 {
        return Err(ClassifyError::HorizonTooSmall(2));
    }
    let mut notes = Vec::new();
    let mut uncountable = check_uncountable(spec, horizon, c, prec)?;
    if !uncountable.certified {
        if let Some((indices, v)) = constant_subsequence(&spec.certified_properties(prec)) {
            let retry_c: Rational = &v / (Rational::from(1) + &v);
            let retry = check_uncountable(spec, horizon, &retry_c, prec)?;
            if retry.certified {
                notes.push(format!("c = {c} has no certificate; q_n = {v} for {indices}, so c = {retry_c} is used"));
                uncountable = retry;
            }
        }
    }
    let countable = check_countable(spec, horizon, prec)?;
    if uncountable.certified && countable.certified {
        return Err(ClassifyError::InternalInconsistency(
            "both criteria certified for the same sequence".into(),
        ));
    }
    let verdict = if uncountable.certified {
        Verdict::Uncountable
    } else if countable.certified {
        Verdict::CountableEvidence
    } else {
        Verdict::Unknown
    };
    Ok(ClassificationReport {
        spec_digest: spec_digest(spec, prec),
        precision_bits: prec,
        horizon,
        verdict,
        uncountable,
        countable,
        notes,
    })
}

fn check_k(k: &Real) -> Result<(), ClassifyError> {
    if *k.lo() < 1 {
        return Err(ClassifyError::KBelowOne(format!("{k:?}")));
    }
    Ok(())
}

fn check_length(length: &Real) -> Result<(), ClassifyError> {
    if !length.certainly_positive() {
        return Err(ClassifyError::NonPositiveLength(format!("{length:?}")));
    }
    Ok(())
}

/// Image lengths `[ℓ/K, Kℓ]` allowed for a `K`-quasiconformal map.
pub fn wolpert_range(k: &Real, length: &Real) -> Result<(Real, Real), ClassifyError> {
    check_k(k)?;
    check_length(length)?;
    Ok((length / k, length * k))
}

/// A curve of length `source` cannot map to one of length `target` under
/// a `K`-quasiconformal map.
pub fn wolpert_excludes(k: &Real, source: &Real, target: &Real) -> Result<bool, ClassifyError> {
    let (min, max) = wolpert_range(k, source)?;
    Ok(target.certainly_gt(&max) || target.certainly_lt(&min))
}

/// `√(((2|n|-1)ℓ/π)² + 1)`.
pub fn dehn_twist_min_dilatation(twists: i64, length: &Real) -> Result<Real, ClassifyError> {
    if twists == 0 {
        return Err(ClassifyError::ZeroTwists);
    }
    check_length(length)?;
    let prec = length.prec();
    let factor = 2 * i64::try_from(twists.unsigned_abs()).unwrap_or(i64::MAX / 2) - 1;
    let x = (length.mul_int(factor) / Real::pi(prec)).sqr() + Real::one(prec);
    Ok(x.sqrt().expect("argument is at least 1"))
}

/// A full twist about a curve of length `πK²` needs dilatation above `K²`.
pub fn twist_square_exceeds(k: &Real) -> Result<bool, ClassifyError> {
    check_k(k)?;
    let k2 = k.sqr();
    let bound = dehn_twist_min_dilatation(1, &(&Real::pi(k.prec()) * &k2))?;
    Ok(bound.certainly_gt(&k2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    /// `lhs.lo > rhs.hi`.
    Certified,
    /// The enclosures overlap; more precision might decide it.
    Straddles,
    /// `lhs.hi <= rhs.lo`.
    Fails,
    /// A needed bound does not exist at this level.
    Unavailable,
}

/// One strict interval inequality `lhs > rhs` at level `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCertificate {
    pub n: u32,
    /// For the seam-distance inequality this is a lower bound of the ratio,
    /// not an enclosure, so `Fails` there only means it is not certified.
    pub lhs: Option<Real>,
    pub rhs: Real,
    pub status: CertStatus,
}

impl LevelCertificate {
    fn compare(n: u32, lhs: Option<Real>, rhs: Real) -> LevelCertificate {
        let status = match &lhs {
            None => CertStatus::Unavailable,
            Some(l) if l.lo() > rhs.hi() => CertStatus::Certified,
            Some(l) if l.hi() <= rhs.lo() => CertStatus::Fails,
            Some(_) => CertStatus::Straddles,
        };
        LevelCertificate { n, lhs, rhs, status }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub k: Real,
    pub horizon: u32,
    pub n1: Option<u32>,
    pub n2: Option<u32>,
    pub big_n: Option<u32>,
    /// `inf_i d(γ_n^i, s_n^i) / ℓ(γ_n^i) > K` per level.
    pub n1_certificates: Vec<LevelCertificate>,
    /// `lower(ℓ(γ_n^i)) > πK²` per level.
    pub n2_certificates: Vec<LevelCertificate>,
}

fn first_certified(certs: &[LevelCertificate]) -> Option<u32> {
    certs.iter().find(|c| c.status == CertStatus::Certified).map(|c| c.n)
}

fn level_lower(spec: &SequenceSpec, n: u32, prec: u32) -> Result<LowerBound, ClassifyError> {
    Ok(lower_bound_paper(&spec.eval_log_channels(u64::from(n), prec)?)?)
}

fn n2_certificates(spec: &SequenceSpec, k: &Real, horizon: u32, prec: u32) -> Result<Vec<LevelCertificate>, ClassifyError> {
    let rhs = Real::pi(prec) * k.sqr();
    (1..=horizon)
        .into_par_iter()
        .map(|n| Ok(LevelCertificate::compare(n, Some(level_lower(spec, n, prec)?.value), rhs.clone())))
        .collect()
}

/// Least level whose collar lower bound, uniform in `i`, exceeds `πK²`.
pub fn threshold_n2(spec: &SequenceSpec, k: &Real, horizon: u32, prec: u32) -> Result<Option<u32>, ClassifyError> {
    check_k(k)?;
    Ok(first_certified(&n2_certificates(spec, k, horizon, prec)?))
}

/// `min_i lower(d(γ_n^i, s_n^i)) / upper(ℓ(γ_n^i))` over the classes of
/// curves at level `n`, or `None` if some class has no upper bound.
fn seam_ratio(spec: &SequenceSpec, tree: &CantorTree, n: u32, prec: u32) -> Result<Option<Real>, ClassifyError> {
    let level = level_bounds(spec, tree, n, prec)?;
    let child = level_lower(spec, n + 1, prec)?.value;
    if !child.certainly_positive() {
        return Ok(None);
    }
    let child = Real::at_least(child.lo().clone());
    let mut worst: Option<Real> = None;
    for b in &level.representatives {
        let Some(upper) = &b.upper else { return Ok(None) };
        // Only the lower end of the distance is used, and it is attained at
        // the upper end of a.
        let u = Real::point(upper.to_real_saturating().hi().clone());
        let ratio = if u.is_finite() {
            let d = pants_seam_distance(&u, &child, &child)?;
            Real::point(d.lo().clone()) / u
        } else {
            Real::zero(prec)
        };
        worst = Some(match worst {
            Some(w) if w.lo() <= ratio.lo() => w,
            _ => ratio,
        });
    }
    Ok(worst)
}

fn n1_certificates(spec: &SequenceSpec, k: &Real, horizon: u32, prec: u32) -> Result<Vec<LevelCertificate>, ClassifyError> {
    if horizon < 1 {
        return Ok(Vec::new());
    }
    let tree = CantorTree::build(spec, horizon + 1, prec)?;
    (1..=horizon)
        .into_par_iter()
        .map(|n| Ok(LevelCertificate::compare(n, seam_ratio(spec, &tree, n, prec)?, k.clone())))
        .collect()
}

/// Least level at which the seam distance beats `K` times the length of
/// every `γ_n^i`.
pub fn threshold_n1(spec: &SequenceSpec, k: &Real, horizon: u32, prec: u32) -> Result<Option<u32>, ClassifyError> {
    check_k(k)?;
    Ok(first_certified(&n1_certificates(spec, k, horizon, prec)?))
}

/// `N = max(n₁, n₂)` with every per-level certificate.
pub fn effective_level(spec: &SequenceSpec, k: &Real, horizon: u32, prec: u32) -> Result<ThresholdReport, ClassifyError> {
    check_k(k)?;
    let n1_certificates = n1_certificates(spec, k, horizon, prec)?;
    let n2_certificates = n2_certificates(spec, k, horizon, prec)?;
    let n1 = first_certified(&n1_certificates);
    let n2 = first_certified(&n2_certificates);
    let big_n = match (n1, n2) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    Ok(ThresholdReport { k: k.clone(), horizon, n1, n2, big_n, n1_certificates, n2_certificates })
}

/// Orders optional thresholds with "absent" above every level.
pub fn cmp_threshold(a: Option<u32>, b: Option<u32>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn r(text: &str) -> Rational {
        crate::numerics::parse_rational(text).unwrap()
    }

    fn k(text: &str) -> Real {
        Real::parse(text, P).unwrap()
    }

    #[test]
    fn constant_half_is_uncountable() {
        let spec = SequenceSpec::constant(r("1/2"));
        let rep = classify(&spec, 10, &r("1/3"), P).unwrap();
        assert_eq!(rep.verdict, Verdict::Uncountable);
        assert_eq!(rep.uncountable.witnesses, (1..=10).collect::<Vec<_>>());
        assert!(rep.countable.values.iter().all(|v| v.is_negative()));
        let a = rep.countable.values[0].as_real().unwrap();
        assert!((a.mid_f64() + 0.183_256_5).abs() < 1e-6);
    }

    #[test]
    fn half_seeded_example_has_two_witnesses() {
        let spec = SequenceSpec::paper_example(r("1/2"));
        let un = check_uncountable(&spec, 50, &r("1/3"), P).unwrap();
        // q_2 = 1/e > 1/3.
        assert_eq!(un.witnesses, vec![1, 2]);
        assert!(!un.certified);
        let rep = classify(&spec, 50, &r("1/3"), P).unwrap();
        assert_eq!(rep.verdict, Verdict::CountableEvidence);
        assert_eq!(rep.countable.increasing_from, Some(1));
    }

    #[test]
    fn explicit_prefix_with_small_tail_retries_c() {
        let spec = SequenceSpec::parse(
            r#"{"family": "explicit", "values": ["1/2", "1/4"], "tail": {"family": "constant", "q": "1/8"}}"#,
        )
        .unwrap();
        let rep = classify(&spec, 12, &r("1/3"), P).unwrap();
        assert_eq!(rep.verdict, Verdict::Uncountable);
        assert_eq!(rep.uncountable.c, r("1/9"));
        assert_eq!(rep.uncountable.witnesses.len(), 12);
    }

    #[test]
    fn user_form_needs_a_long_increasing_trace() {
        let spec = SequenceSpec::parse(r#"{"family": "user_closed_form", "q": "1/(n+1)"}"#).unwrap();
        let rep = classify(&spec, 20, &r("1/3"), P).unwrap();
        // (1/(n+1)) ln ln(n+2) → 0.
        assert_eq!(rep.verdict, Verdict::Unknown);
        let spec = SequenceSpec::parse(r#"{"family": "user_closed_form", "q": "exp(-exp(n))"}"#).unwrap();
        let rep = classify(&spec, 12, &r("1/3"), P).unwrap();
        // a_n = e^{-e^n}(n+1) → 0 as well.
        assert_eq!(rep.verdict, Verdict::Unknown);
    }

    #[test]
    fn wolpert_and_twist_formulas() {
        let five = k("5");
        let (lo, hi) = wolpert_range(&Real::one(P), &five).unwrap();
        assert!(lo.is_point() && hi.is_point() && lo.contains_f64(5.0) && hi.contains_f64(5.0));
        assert!(wolpert_excludes(&k("2"), &Real::one(P), &k("2.001")).unwrap());
        assert!(!wolpert_excludes(&k("2"), &Real::one(P), &k("2")).unwrap());
        assert!(wolpert_range(&k("0.9"), &five).is_err());
        let pi = Real::pi(P);
        assert!((dehn_twist_min_dilatation(1, &pi).unwrap().mid_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert!((dehn_twist_min_dilatation(-3, &pi).unwrap().mid_f64() - 26f64.sqrt()).abs() < 1e-14);
        assert_eq!(dehn_twist_min_dilatation(0, &pi), Err(ClassifyError::ZeroTwists));
        let tiny = k("1e-30");
        assert!(dehn_twist_min_dilatation(1, &tiny).unwrap().mid_f64() - 1.0 < 1e-40);
        assert!(twist_square_exceeds(&k("10")).unwrap());
    }

    #[test]
    fn half_seeded_thresholds() {
        let spec = SequenceSpec::paper_example(r("1/2"));
        let rep = effective_level(&spec, &k("2"), 8, P).unwrap();
        assert_eq!(rep.n2, Some(4));
        assert_eq!(rep.n1, Some(3));
        assert_eq!(rep.big_n, Some(4));
        assert_eq!(rep.n1_certificates[3].status, CertStatus::Fails);
    }

    #[test]
    fn constant_half_has_no_thresholds() {
        let spec = SequenceSpec::constant(r("1/2"));
        assert_eq!(threshold_n2(&spec, &k("2"), 8, P).unwrap(), None);
        assert_eq!(threshold_n1(&spec, &k("1000000"), 6, P).unwrap(), None);
        assert_eq!(threshold_n1(&spec, &k("1000000"), 1, P).unwrap(), None);
    }

    #[test]
    fn digest_depends_on_precision() {
        let spec = SequenceSpec::constant(r("1/2"));
        assert_eq!(spec_digest(&spec, 128).len(), 64);
        assert_ne!(spec_digest(&spec, 128), spec_digest(&spec, 256));
    }
}
