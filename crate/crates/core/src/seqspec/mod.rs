//! Finitely described sequences `ω = {q_n} ⊂ (0, 1)` and their three
//! evaluation channels `q_n`, `λ_n = ln(1/q_n)` and `μ_n = ln λ_n`.
//!
//! Builtin families supply the channels in closed form, so indices whose
//! `q_n` underflows every float format still have usable logarithms.

mod expr;
mod format;

use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Rational};
use thiserror::Error;

use crate::numerics::{parse_rational, LogScaleValue, Magnitude, NumericsError, Real};

pub use expr::{Expr, ExprError};
pub use format::{PropertyDoc, SpecDoc};

/// Indices checked by [`SequenceSpec::parse`] for families without a
/// range guarantee by construction.
pub const PARSE_CHECK_HORIZON: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("malformed spec document: {0}")]
    Json(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` requires field `{field}`")]
    MissingField { family: String, field: &'static str },
    #[error("field `{field}` is not used by family `{family}`")]
    UnexpectedField { family: String, field: &'static str },
    #[error("tail rule required: an explicit list must declare how the sequence continues")]
    TailRequired,
    #[error("explicit value list is empty")]
    EmptyList,
    #[error("q_{n} = {value} is not certified to lie in (0, 1)")]
    OutOfRange { n: u64, value: String },
    #[error("bad index set `{0}` (expected all, odd or even)")]
    IndexSet(String),
    #[error("declared property fails on the checked prefix: {0}")]
    PropertyViolated(String),
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("q_{0} is representable only in log scale; use the log channels")]
    LogScaleOnly(u64),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The indices `start, start + step, start + 2 step, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexPattern {
    pub start: u64,
    pub step: u64,
}

impl IndexPattern {
    pub const ALL: IndexPattern = IndexPattern { start: 1, step: 1 };
    pub const ODD: IndexPattern = IndexPattern { start: 1, step: 2 };
    pub const EVEN: IndexPattern = IndexPattern { start: 2, step: 2 };

    pub fn contains(&self, n: u64) -> bool {
        n >= self.start && (n - self.start) % self.step == 0
    }

    pub fn shifted(&self, offset: u64) -> IndexPattern {
        IndexPattern { start: self.start + offset, step: self.step }
    }

    fn parse(text: &str) -> Result<IndexPattern, SeqError> {
        match text {
            "all" => Ok(IndexPattern::ALL),
            "odd" => Ok(IndexPattern::ODD),
            "even" => Ok(IndexPattern::EVEN),
            other => Err(SeqError::IndexSet(other.to_string())),
        }
    }
}

impl fmt::Display for IndexPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.start, self.step) {
            (1, 1) => write!(f, "all n"),
            (s, 1) => write!(f, "n >= {s}"),
            (s, k) => write!(f, "n = {s} + {k}m"),
        }
    }
}

/// A structural fact about the whole sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum Property {
    /// `q_{n+1} <= q_n` for every `n >= from`.
    MonotoneDecreasing { from: u64 },
    /// `q_n = value` on every index of the pattern.
    ConstantOn { indices: IndexPattern, value: Rational },
    /// `q_n μ_{n+1}` has a closed form tending to infinity, increasing from `from`.
    DivergentCriterion { from: u64 },
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::MonotoneDecreasing { from } => write!(f, "q_n monotone decreasing from n = {from}"),
            Property::ConstantOn { indices, value } => write!(f, "q_n = {value} for {indices}"),
            Property::DivergentCriterion { from } => {
                write!(f, "q_n ln ln(1/q_(n+1)) increasing to infinity from n = {from}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Constant { q: Rational },
    ExplicitWithTail { values: Vec<Rational>, tail: Box<SequenceSpec> },
    /// `1/2` at odd indices and `(1/2)^n` at even ones.
    AlternatingHalfPower,
    /// `q_{n+1} = exp(-n^{1/q_n})` from a chosen seed.
    PaperExample { q1: Rational },
    UserClosedForm { text: String, expr: Expr },
}

/// A sequence description together with any user-declared properties.
///
/// Declared properties are checked on a prefix but never treated as
/// certificates; only [`SequenceSpec::certified_properties`] feeds the
/// classification.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSpec {
    family: Family,
    declared: Vec<Property>,
}

/// The three channels at one index.
#[derive(Clone, Debug, PartialEq)]
pub struct LogChannels {
    pub n: u64,
    pub q: Magnitude,
    /// `ln(1/q_n)`, positive.
    pub lambda: Magnitude,
    /// `ln ln(1/q_n)`. `None` when `λ_n > 0` is not certified. A scalar
    /// value may be negative (for `q_n > 1/e`).
    pub mu: Option<Magnitude>,
}

impl LogChannels {
    /// Sign of `μ`, when certified.
    pub fn mu_sign(&self) -> Option<Ordering> {
        match self.mu.as_ref()? {
            Magnitude::Log(_) => Some(Ordering::Greater),
            Magnitude::Scalar(m) if m.certainly_positive() => Some(Ordering::Greater),
            Magnitude::Scalar(m) if m.certainly_negative() => Some(Ordering::Less),
            Magnitude::Scalar(m) if m.is_point() && m.lo().is_zero() => Some(Ordering::Equal),
            Magnitude::Scalar(_) => None,
        }
    }

    /// Channels derived from an enclosure of `ln q`.
    fn from_ln_q(n: u64, ln_q: Real, direct_q: Option<Real>) -> LogChannels {
        let lambda = -&ln_q;
        let mu = if lambda.certainly_positive() { lambda.ln().ok() } else { None };
        LogChannels {
            n,
            q: refine(Magnitude::from_log(ln_q), direct_q),
            lambda: Magnitude::Scalar(lambda),
            mu: mu.map(Magnitude::Scalar),
        }
    }
}

fn refine(m: Magnitude, direct: Option<Real>) -> Magnitude {
    match (m, direct) {
        (Magnitude::Scalar(a), Some(b)) => Magnitude::Scalar(a.intersect(&b).unwrap_or(b)),
        (m, _) => m,
    }
}

/// One value of the countability criterion `a_n = q_n μ_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionValue {
    pub n: u64,
    /// `None` when `μ_{n+1}` is undefined. A scalar may be negative.
    pub value: Option<Magnitude>,
    /// Enclosure comes from the family's closed form.
    pub closed_form: bool,
}

impl CriterionValue {
    pub fn is_negative(&self) -> bool {
        matches!(&self.value, Some(Magnitude::Scalar(v)) if v.certainly_negative())
    }

    /// A real enclosure, saturating when only the logarithm is known.
    pub fn as_real(&self) -> Option<Real> {
        self.value.as_ref().map(|m| match m {
            Magnitude::Scalar(v) => v.clone(),
            Magnitude::Log(_) => m.to_real_saturating(),
        })
    }
}

fn parse_unit(text: &str, n: u64) -> Result<Rational, SeqError> {
    let v = parse_rational(text)?;
    if v <= 0 || v >= 1 {
        return Err(SeqError::OutOfRange { n, value: text.to_string() });
    }
    Ok(v)
}

fn check_fields(doc: &SpecDoc, allowed: &[&'static str]) -> Result<(), SeqError> {
    let present: [(&'static str, bool); 4] = [
        ("q", doc.q.is_some()),
        ("q1", doc.q1.is_some()),
        ("values", doc.values.is_some()),
        ("tail", doc.tail.is_some()),
    ];
    for (field, is_present) in present {
        if is_present && !allowed.contains(&field) {
            return Err(SeqError::UnexpectedField { family: doc.family.clone(), field });
        }
    }
    Ok(())
}

fn required<'a, T>(family: &str, field: &'static str, v: &'a Option<T>) -> Result<&'a T, SeqError> {
    v.as_ref().ok_or_else(|| SeqError::MissingField { family: family.to_string(), field })
}

impl SequenceSpec {
    pub fn new(family: Family) -> SequenceSpec {
        SequenceSpec { family, declared: Vec::new() }
    }

    pub fn constant(q: Rational) -> SequenceSpec {
        SequenceSpec::new(Family::Constant { q })
    }

    pub fn paper_example(q1: Rational) -> SequenceSpec {
        SequenceSpec::new(Family::PaperExample { q1 })
    }

    pub fn alternating_half_power() -> SequenceSpec {
        SequenceSpec::new(Family::AlternatingHalfPower)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn declared_properties(&self) -> &[Property] {
        &self.declared
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Constant { .. } => "constant",
            Family::ExplicitWithTail { .. } => "explicit",
            Family::AlternatingHalfPower => "alternating_half_power",
            Family::PaperExample { .. } => "paper_example",
            Family::UserClosedForm { .. } => "user_closed_form",
        }
    }

    /// Parses and range-checks a JSON spec document.
    pub fn parse(text: &str) -> Result<SequenceSpec, SeqError> {
        let doc: SpecDoc = serde_json::from_str(text).map_err(|e| SeqError::Json(e.to_string()))?;
        let spec = SequenceSpec::from_doc(&doc)?;
        spec.validate(PARSE_CHECK_HORIZON, crate::numerics::DEFAULT_PRECISION)?;
        Ok(spec)
    }

    pub fn from_doc(doc: &SpecDoc) -> Result<SequenceSpec, SeqError> {
        let name = doc.family.as_str();
        let family = match name {
            "constant" => {
                check_fields(doc, &["q"])?;
                Family::Constant { q: parse_unit(required(name, "q", &doc.q)?, 1)? }
            }
            "explicit" | "explicit_with_tail" => {
                check_fields(doc, &["values", "tail"])?;
                let texts = required(name, "values", &doc.values)?;
                if texts.is_empty() {
                    return Err(SeqError::EmptyList);
                }
                let tail = doc.tail.as_ref().ok_or(SeqError::TailRequired)?;
                let values = texts
                    .iter()
                    .zip(1..)
                    .map(|(t, n)| parse_unit(t, n))
                    .collect::<Result<Vec<_>, _>>()?;
                Family::ExplicitWithTail { values, tail: Box::new(SequenceSpec::from_doc(tail)?) }
            }
            "alternating_half_power" => {
                check_fields(doc, &[])?;
                Family::AlternatingHalfPower
            }
            "paper_example" => {
                check_fields(doc, &["q1"])?;
                let q1 = match &doc.q1 {
                    Some(t) => parse_unit(t, 1)?,
                    None => Rational::from((1, 2)),
                };
                Family::PaperExample { q1 }
            }
            "user_closed_form" => {
                check_fields(doc, &["q"])?;
                let text = required(name, "q", &doc.q)?.trim().to_string();
                let expr = Expr::parse(&text)?;
                Family::UserClosedForm { text, expr }
            }
            other => return Err(SeqError::UnknownFamily(other.to_string())),
        };
        let declared = doc
            .properties
            .iter()
            .map(|p| match p {
                PropertyDoc::MonotoneDecreasing { from } => {
                    if *from == 0 {
                        return Err(SeqError::ZeroIndex);
                    }
                    Ok(Property::MonotoneDecreasing { from: *from })
                }
                PropertyDoc::ConstantSubsequence { indices, value } => Ok(Property::ConstantOn {
                    indices: IndexPattern::parse(indices)?,
                    value: parse_unit(value, 0)?,
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SequenceSpec { family, declared })
    }

    /// Canonical document: rationals in lowest terms, declared properties kept.
    pub fn to_doc(&self) -> SpecDoc {
        let mut doc = SpecDoc {
            family: self.family_name().to_string(),
            q: None,
            q1: None,
            values: None,
            tail: None,
            properties: Vec::new(),
        };
        match &self.family {
            Family::Constant { q } => doc.q = Some(q.to_string()),
            Family::ExplicitWithTail { values, tail } => {
                doc.values = Some(values.iter().map(|v| v.to_string()).collect());
                doc.tail = Some(Box::new(tail.to_doc()));
            }
            Family::AlternatingHalfPower => {}
            Family::PaperExample { q1 } => doc.q1 = Some(q1.to_string()),
            Family::UserClosedForm { text, .. } => doc.q = Some(text.clone()),
        }
        doc.properties = self
            .declared
            .iter()
            .filter_map(|p| match p {
                Property::MonotoneDecreasing { from } => Some(PropertyDoc::MonotoneDecreasing { from: *from }),
                Property::ConstantOn { indices, value } => Some(PropertyDoc::ConstantSubsequence {
                    indices: match *indices {
                        IndexPattern::ODD => "odd",
                        IndexPattern::EVEN => "even",
                        _ => "all",
                    }
                    .to_string(),
                    value: value.to_string(),
                }),
                Property::DivergentCriterion { .. } => None,
            })
            .collect();
        doc
    }

    /// Compact canonical JSON; the input of the spec digest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("spec documents serialize")
    }

    /// Checks `0 < q_n < 1` for `n <= horizon` and every declared property
    /// on that prefix.
    pub fn validate(&self, horizon: u64, prec: u32) -> Result<(), SeqError> {
        let zero = Real::zero(prec);
        let one = Real::one(prec);
        let mut prev: Option<Magnitude> = None;
        for n in 1..=horizon {
            let ch = self.eval_log_channels(n, prec)?;
            let in_range = match &ch.q {
                Magnitude::Scalar(q) => q.certainly_gt(&zero) && q.certainly_lt(&one),
                Magnitude::Log(v) => v.log_value().certainly_negative(),
            };
            if !in_range {
                return Err(SeqError::OutOfRange { n, value: format!("{:?}", ch.q) });
            }
            for p in &self.declared {
                match p {
                    Property::MonotoneDecreasing { from } if n > *from => {
                        if let Some(before) = &prev {
                            if before.certainly_lt_mag(&ch.q) {
                                return Err(SeqError::PropertyViolated(format!("{p}: q_{n} > q_{}", n - 1)));
                            }
                        }
                    }
                    Property::ConstantOn { indices, value } if indices.contains(n) => {
                        let v = Real::from_rational(value, prec);
                        let ok = match &ch.q {
                            Magnitude::Scalar(q) => q.intersects(&v),
                            Magnitude::Log(_) => false,
                        };
                        if !ok {
                            return Err(SeqError::PropertyViolated(format!("{p}: fails at n = {n}")));
                        }
                    }
                    _ => {}
                }
            }
            prev = Some(ch.q);
        }
        Ok(())
    }

    /// Properties that hold by construction of the family.
    pub fn certified_properties(&self, prec: u32) -> Vec<Property> {
        match &self.family {
            Family::Constant { q } => vec![
                Property::MonotoneDecreasing { from: 1 },
                Property::ConstantOn { indices: IndexPattern::ALL, value: q.clone() },
            ],
            Family::AlternatingHalfPower => {
                vec![Property::ConstantOn { indices: IndexPattern::ODD, value: Rational::from((1, 2)) }]
            }
            Family::PaperExample { q1 } => {
                // For n >= 2, q_n <= 1/e, hence n^{1/q_n} >= 2^e > ln(1/q_n)
                // and q_{n+1} < q_n. Only the first step depends on the seed.
                let inv_e = Real::from_int(-1, prec).exp();
                let from = if inv_e.certainly_le(&Real::from_rational(q1, prec)) { 1 } else { 2 };
                vec![Property::MonotoneDecreasing { from }, Property::DivergentCriterion { from: 1 }]
            }
            Family::ExplicitWithTail { values, tail } => {
                let len = values.len() as u64;
                let mut out = Vec::new();
                for p in tail.certified_properties(prec) {
                    out.push(match p {
                        Property::MonotoneDecreasing { from } => {
                            let mut start = len + from;
                            if from == 1 {
                                start = explicit_monotone_start(values, tail, prec);
                            }
                            Property::MonotoneDecreasing { from: start }
                        }
                        Property::ConstantOn { indices, value } => {
                            Property::ConstantOn { indices: indices.shifted(len), value }
                        }
                        Property::DivergentCriterion { from } => Property::DivergentCriterion { from: from + len },
                    });
                }
                out
            }
            Family::UserClosedForm { .. } => Vec::new(),
        }
    }

    pub fn monotone_from(&self, prec: u32) -> Option<u64> {
        self.certified_properties(prec).into_iter().find_map(|p| match p {
            Property::MonotoneDecreasing { from } => Some(from),
            _ => None,
        })
    }

    /// Enclosure of `q_n`.
    pub fn eval_q(&self, n: u64, prec: u32) -> Result<Real, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match &self.family {
            Family::Constant { q } => Ok(Real::from_rational(q, prec)),
            Family::AlternatingHalfPower => Ok(alternating_q(n, prec)),
            Family::ExplicitWithTail { values, tail } => match values.get((n - 1) as usize) {
                Some(v) => Ok(Real::from_rational(v, prec)),
                None => tail.eval_q(n - values.len() as u64, prec),
            },
            _ => match self.eval_log_channels(n, prec)?.q {
                Magnitude::Scalar(q) => Ok(q),
                Magnitude::Log(_) => Err(SeqError::LogScaleOnly(n)),
            },
        }
    }

    /// All three channels at index `n`.
    pub fn eval_log_channels(&self, n: u64, prec: u32) -> Result<LogChannels, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match &self.family {
            Family::Constant { q } => {
                let q = Real::from_rational(q, prec);
                Ok(LogChannels::from_ln_q(n, q.ln()?, Some(q)))
            }
            Family::AlternatingHalfPower => {
                let q = alternating_q(n, prec);
                let ln_q = if n % 2 == 1 { -Real::ln2(prec) } else { Real::ln2(prec).mul_int(-(n as i64)) };
                Ok(LogChannels::from_ln_q(n, ln_q, Some(q)))
            }
            Family::ExplicitWithTail { values, tail } => match values.get((n - 1) as usize) {
                Some(v) => {
                    let q = Real::from_rational(v, prec);
                    Ok(LogChannels::from_ln_q(n, q.ln()?, Some(q)))
                }
                None => {
                    let mut ch = tail.eval_log_channels(n - values.len() as u64, prec)?;
                    ch.n = n;
                    Ok(ch)
                }
            },
            Family::PaperExample { q1 } => Ok(example_channels(q1, n, prec)),
            Family::UserClosedForm { expr, .. } => user_channels(expr, n, prec),
        }
    }

    /// `a_n = q_n μ_{n+1}`, with the closed form used wherever the family has one.
    pub fn criterion(&self, n: u64, prec: u32) -> Result<CriterionValue, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match &self.family {
            Family::ExplicitWithTail { values, tail } if n > values.len() as u64 => {
                let mut v = tail.criterion(n - values.len() as u64, prec)?;
                v.n = n;
                Ok(v)
            }
            Family::PaperExample { .. } => {
                // q_n μ_{n+1} = q_n (ln n / q_n) = ln n.
                let closed = Real::from_int(n as i64, prec).ln()?;
                let numeric = numeric_criterion(self, n, prec)?;
                let value = match numeric.value {
                    Some(Magnitude::Scalar(v)) => v.intersect(&closed).ok_or_else(|| {
                        SeqError::Numerics(NumericsError::domain("closed-form criterion", v.lo()))
                    })?,
                    _ => closed,
                };
                Ok(CriterionValue { n, value: Some(Magnitude::Scalar(value)), closed_form: true })
            }
            _ => numeric_criterion(self, n, prec),
        }
    }
}

fn explicit_monotone_start(values: &[Rational], tail: &SequenceSpec, prec: u32) -> u64 {
    let len = values.len() as u64;
    let last = Real::from_rational(values.last().expect("non-empty"), prec);
    let joins = match tail.eval_q(1, prec) {
        Ok(t1) => t1.certainly_le(&last),
        Err(_) => tail.eval_log_channels(1, prec).map(|c| c.q.certainly_lt(&last)).unwrap_or(false),
    };
    if !joins {
        return len + 1;
    }
    let mut k = values.len();
    while k > 1 && values[k - 2] >= values[k - 1] {
        k -= 1;
    }
    k as u64
}

fn alternating_q(n: u64, prec: u32) -> Real {
    if n % 2 == 1 {
        Real::parse("1/2", prec).expect("literal")
    } else {
        let exponent = i32::try_from(n).unwrap_or(i32::MAX);
        let lo = Float::with_val(prec, Float::i_exp(1, -exponent));
        Real::point(lo)
    }
}

/// Channel-first evaluation of `q_{n+1} = exp(-n^{1/q_n})`:
/// `ln μ_{n+1} = ln ln n + λ_n` and `λ_{n+1} = exp(μ_{n+1})`.
fn example_channels(q1: &Rational, n: u64, prec: u32) -> LogChannels {
    let q = Real::from_rational(q1, prec);
    let mut ch = LogChannels::from_ln_q(1, q.ln().expect("q1 in (0,1)"), Some(q));
    for k in 1..n {
        let mu_next = if k == 1 {
            Magnitude::Scalar(Real::zero(prec))
        } else {
            let ln_ln_k = Real::from_int(k as i64, prec).ln().and_then(|l| l.ln()).expect("k >= 2");
            let lambda = ch.lambda.to_real_saturating();
            Magnitude::from_log(&ln_ln_k + &lambda)
        };
        let lambda_next = match &mu_next {
            Magnitude::Scalar(m) => Magnitude::from_log(m.clone()),
            Magnitude::Log(_) => Magnitude::Log(LogScaleValue::new(mu_next.to_real_saturating())),
        };
        let q_next = Magnitude::from_log(-lambda_next.to_real_saturating());
        ch = LogChannels { n: k + 1, q: q_next, lambda: lambda_next, mu: Some(mu_next) };
    }
    ch
}

/// `ln(1/q)` as an expression when `q` is written as `exp(-x)` or `1/exp(x)`.
fn neg_ln_form(expr: &Expr) -> Option<Expr> {
    match expr {
        Expr::Exp(a) => Some(match a.as_ref() {
            Expr::Neg(x) => x.as_ref().clone(),
            other => Expr::Neg(Box::new(other.clone())),
        }),
        Expr::Div(num, den) if matches!(num.as_ref(), Expr::Num(v) if *v == 1) => match den.as_ref() {
            Expr::Exp(x) => Some(x.as_ref().clone()),
            _ => None,
        },
        _ => None,
    }
}

fn user_channels(expr: &Expr, n: u64, prec: u32) -> Result<LogChannels, SeqError> {
    let direct = expr.eval(n, prec).ok().filter(|q| q.certainly_positive());
    if let Some(lambda_expr) = neg_ln_form(expr) {
        let lambda = lambda_expr.eval(n, prec)?;
        let ln_lambda = if lambda.certainly_positive() { Some(lambda_expr.eval_ln(n, prec)?) } else { None };
        // λ itself may overflow while ln λ is still representable.
        let lambda_mag = match &ln_lambda {
            Some(l) if !lambda.is_finite() => Magnitude::from_log(l.clone()),
            _ => Magnitude::Scalar(lambda.clone()),
        };
        return Ok(LogChannels {
            n,
            q: refine(Magnitude::from_log(-&lambda), direct),
            lambda: lambda_mag,
            mu: ln_lambda.map(Magnitude::Scalar),
        });
    }
    Ok(LogChannels::from_ln_q(n, expr.eval_ln(n, prec)?, direct))
}

fn numeric_criterion(spec: &SequenceSpec, n: u64, prec: u32) -> Result<CriterionValue, SeqError> {
    let q = spec.eval_log_channels(n, prec)?.q;
    let next = spec.eval_log_channels(n + 1, prec)?;
    let value = next.mu.as_ref().map(|mu| match (&q, mu) {
        (Magnitude::Scalar(a), Magnitude::Scalar(b)) => Magnitude::Scalar(a * b),
        (_, mu) if next.mu_sign() == Some(Ordering::Greater) => Magnitude::from_log(q.ln() + mu.ln()),
        (q, mu) => Magnitude::Scalar(q.to_real_saturating() * mu.to_real_saturating()),
    });
    Ok(CriterionValue { n, value, closed_form: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn close(x: &Real, v: f64, tol: f64) -> bool {
        (x.mid_f64() - v).abs() <= tol && x.width() < 1e-30
    }

    fn half() -> Rational {
        Rational::from((1, 2))
    }

    #[test]
    fn constant_half_channels() {
        let spec = SequenceSpec::constant(half());
        assert_eq!(spec.eval_q(7, 64).unwrap(), Real::parse("0.5", 64).unwrap());
        let ch = spec.eval_log_channels(3, P).unwrap();
        assert!(close(ch.lambda.as_scalar().unwrap(), std::f64::consts::LN_2, 1e-16));
        let mu = ch.mu.as_ref().unwrap().as_scalar().unwrap().clone();
        assert!((mu.mid_f64() - (-0.366_512_920_581_664_3)).abs() < 1e-15);
        assert_eq!(ch.mu_sign(), Some(Ordering::Less));
    }

    #[test]
    fn alternating_values() {
        let spec = SequenceSpec::alternating_half_power();
        assert_eq!(spec.eval_q(4, 64).unwrap(), Real::parse("0.0625", 64).unwrap());
        assert_eq!(spec.eval_q(5, 64).unwrap(), Real::parse("1/2", 64).unwrap());
        let next = spec.eval_log_channels(41, P).unwrap();
        assert_eq!(next.mu_sign(), Some(Ordering::Less));
    }

    #[test]
    fn paper_example_closed_channels() {
        let spec = SequenceSpec::paper_example(half());
        let q2 = spec.eval_q(2, P).unwrap();
        assert!(close(&q2, 0.367_879_441_171_442_33, 1e-16));
        let ch3 = spec.eval_log_channels(3, P).unwrap();
        let mu3 = ch3.mu.unwrap().as_scalar().unwrap().clone();
        assert!((mu3.mid_f64() - std::f64::consts::E * std::f64::consts::LN_2).abs() < 1e-14);
        let ch4 = spec.eval_log_channels(4, P).unwrap();
        assert!(ch4.q.is_log_scale());
        assert!(matches!(spec.eval_q(4, P), Err(SeqError::LogScaleOnly(4))));
        let mu4 = ch4.mu.unwrap().as_scalar().unwrap().mid_f64();
        assert!((mu4 - 792.295).abs() < 1e-2, "{mu4}");
    }

    #[test]
    fn paper_example_criterion_is_ln_n() {
        let spec = SequenceSpec::paper_example(half());
        for n in 1..=12 {
            let a = spec.criterion(n, P).unwrap();
            let v = a.value.unwrap().as_scalar().unwrap().clone();
            assert!(close(&v, (n as f64).ln(), 1e-15));
            assert!(a.closed_form);
        }
    }

    #[test]
    fn parse_errors() {
        let bad = [
            (r#"{"family":"nope"}"#, "unknown family"),
            (r#"{"family":"explicit","values":["1/2","1/4"]}"#, "tail rule required"),
            (r#"{"family":"constant","q":"3/2"}"#, "(0, 1)"),
            (r#"{"family":"constant"}"#, "requires field"),
            (r#"{"family":"constant","q":"1/2","q1":"1/3"}"#, "not used"),
            (r#"{"family":"user_closed_form","q":"1 + n"}"#, "(0, 1)"),
            (r#"{"family":"constant","q":"1/2","bogus":1}"#, "malformed"),
        ];
        for (text, needle) in bad {
            let err = SequenceSpec::parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn declared_properties_are_checked_not_trusted() {
        let ok = r#"{"family":"user_closed_form","q":"1/(n+1)",
                     "properties":[{"kind":"monotone_decreasing","from":1}]}"#;
        let spec = SequenceSpec::parse(ok).unwrap();
        assert_eq!(spec.declared_properties().len(), 1);
        assert!(spec.certified_properties(P).is_empty());
        let bad = r#"{"family":"user_closed_form","q":"n/(n+1)",
                      "properties":[{"kind":"monotone_decreasing","from":1}]}"#;
        assert!(matches!(SequenceSpec::parse(bad), Err(SeqError::PropertyViolated(_))));
    }

    #[test]
    fn explicit_tail_shifts_certificates() {
        let text = r#"{"family":"explicit","values":["1/2","1/4"],"tail":{"family":"constant","q":"1/8"}}"#;
        let spec = SequenceSpec::parse(text).unwrap();
        let props = spec.certified_properties(P);
        assert!(props.contains(&Property::MonotoneDecreasing { from: 1 }));
        assert!(props.contains(&Property::ConstantOn {
            indices: IndexPattern { start: 3, step: 1 },
            value: Rational::from((1, 8))
        }));
        assert_eq!(spec.eval_q(3, 64).unwrap(), Real::parse("0.125", 64).unwrap());
    }

    #[test]
    fn canonical_json_normalizes_literals() {
        let a = SequenceSpec::parse(r#"{"family":"constant","q":"0.5"}"#).unwrap();
        let b = SequenceSpec::parse(r#"{ "q": "2/4", "family": "constant" }"#).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_eq!(SequenceSpec::parse(&a.canonical_json()).unwrap(), a);
    }

    #[test]
    fn user_form_log_channels() {
        let spec = SequenceSpec::parse(r#"{"family":"user_closed_form","q":"exp(-n^2)"}"#).unwrap();
        let ch = spec.eval_log_channels(100_000, P).unwrap();
        assert!(ch.q.is_log_scale());
        let mu = ch.mu.unwrap().as_scalar().unwrap().mid_f64();
        assert!((mu - 2.0 * 100_000f64.ln()).abs() < 1e-12);
    }
}
