use gcantor_core::numerics::Magnitude;
use gcantor_core::seqspec::Property;
use gcantor_core::SequenceSpec;
use rug::ops::Pow;
use rug::{Float, Rational};

const P: u32 = 128;
const ORACLE_BITS: u32 = 1024;

/// `q_{n+1} = exp(-n^{1/q_n})` iterated in plain high-precision floats.
fn naive_recursion(q1: f64, upto: u32) -> Vec<Float> {
    let mut q = vec![Float::with_val(ORACLE_BITS, q1)];
    for n in 1..upto {
        let prev = q.last().unwrap();
        let exponent = Float::with_val(ORACLE_BITS, 1) / prev;
        let power = Float::with_val(ORACLE_BITS, n).pow(&exponent);
        q.push((-power).exp());
    }
    q
}

#[test]
fn closed_form_channels_match_naive_recursion() {
    let spec = SequenceSpec::paper_example(Rational::from((1, 2)));
    let naive = naive_recursion(0.5, 3);
    for (n, q) in (1..=3).zip(&naive) {
        let got = spec.eval_q(n, P).unwrap();
        assert!(got.contains(q), "n = {n}: {got:?} vs {q}");
        assert!(got.rel_width() < 1e-35);
    }
    // λ_4 = 3^{1/q_3} is still representable even though q_4 is not.
    let lambda4 = Float::with_val(ORACLE_BITS, 3).pow(Float::with_val(ORACLE_BITS, 1) / &naive[2]);
    let ch = spec.eval_log_channels(4, P).unwrap();
    assert!(ch.lambda.as_scalar().unwrap().contains(&lambda4));
    assert!(ch.q.is_log_scale());
}

#[test]
fn channels_are_consistent() {
    let specs = [
        SequenceSpec::constant(Rational::from((1, 2))),
        SequenceSpec::alternating_half_power(),
        SequenceSpec::paper_example(Rational::from((1, 2))),
        SequenceSpec::paper_example(Rational::from((1, 5))),
    ];
    for spec in &specs {
        for n in 1..=12 {
            let ch = spec.eval_log_channels(n, P).unwrap();
            if let (Magnitude::Scalar(q), Magnitude::Scalar(l)) = (&ch.q, &ch.lambda) {
                assert!(q.intersects(&(-l).exp()), "{} n = {n}", spec.family_name());
            }
        }
    }
}

#[test]
fn seed_controls_monotone_start() {
    let from = |q1: (i32, i32)| SequenceSpec::paper_example(Rational::from(q1)).monotone_from(P);
    assert_eq!(from((1, 2)), Some(1));
    assert_eq!(from((3, 10)), Some(2));
    // Wherever q is still comparable the certificate is confirmed numerically.
    for seed in [(1, 2), (3, 10), (9, 10)] {
        let spec = SequenceSpec::paper_example(Rational::from(seed));
        let start = spec.monotone_from(P).unwrap();
        for n in start..=4 {
            let (a, b) = (spec.eval_log_channels(n, P).unwrap().q, spec.eval_log_channels(n + 1, P).unwrap().q);
            assert!(b.certainly_lt_mag(&a), "seed {seed:?} n = {n}");
        }
    }
}

#[test]
fn criterion_identity_holds_through_n_50() {
    let spec = SequenceSpec::paper_example(Rational::from((1, 2)));
    for n in 2..=50 {
        let a = spec.criterion(n, P).unwrap().as_real().unwrap();
        let ln_n = Float::with_val(ORACLE_BITS, n).ln();
        assert!(a.contains(&ln_n) && a.width() < 1e-10, "n = {n}");
    }
}

#[test]
fn explicit_tail_is_reindexed() {
    let spec = SequenceSpec::parse(
        r#"{"family": "explicit", "values": ["1/2", "1/4"], "tail": {"family": "alternating_half_power"}}"#,
    )
    .unwrap();
    // Tail index 1 sits at n = 3.
    assert!(spec.eval_q(3, P).unwrap().contains_f64(0.5));
    assert!(spec.eval_q(4, P).unwrap().contains_f64(0.25));
    let odd_tail = spec.certified_properties(P).into_iter().find_map(|p| match p {
        Property::ConstantOn { indices, .. } => Some(indices),
        _ => None,
    });
    let odd_tail = odd_tail.unwrap();
    assert!(odd_tail.contains(3) && odd_tail.contains(5) && !odd_tail.contains(4) && !odd_tail.contains(1));
}

#[test]
fn alternating_values() {
    let spec = SequenceSpec::alternating_half_power();
    for n in 1..=10u64 {
        let q = spec.eval_q(n, P).unwrap();
        let expected = if n % 2 == 1 { 0.5 } else { 0.5f64.powi(n as i32) };
        assert!(q.is_point() && q.contains_f64(expected));
    }
    
}
