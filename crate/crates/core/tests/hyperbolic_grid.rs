use gcantor_core::hyperbolic::{
    curve_bounds, geodesic_distance, hexagon_seam, hexagon_seam_matrix, level_bounds, level_representatives,
    pants_seam_distance, pants_seam_distance_matrix, pants_seam_distance_pentagon, Geodesic, Method,
};
use gcantor_core::{CantorTree, CurveId, Real, SequenceSpec};
use rug::Rational;

const P: u32 = 128;

fn q(text: &str) -> Real {
    Real::parse(text, P).unwrap()
}

fn grid() -> Vec<(Real, Real, Real)> {
    [
        ("1", "1", "1"),
        ("1/10", "2", "3"),
        ("5", "1/2", "1/2"),
        ("3", "3", "1/100"),
        ("7/3", "11/5", "13/7"),
        ("20", "1", "2"),
        ("1/2", "15", "15"),
        ("4", "9", "1"),
        ("3/100", "3/100", "3/100"),
        ("12", "12", "12"),
        ("7/2", "1e-40", "1e-40"),
    ]
    .iter()
    .map(|(a, b, c)| (q(a), q(b), q(c)))
    .collect()
}

fn close(x: &Real, y: &Real, tol: f64) -> bool {
    let diff = x - y;
    diff.lo().to_f64().abs() <= tol && diff.hi().to_f64().abs() <= tol
}

#[test]
fn seam_routes_agree() {
    for (a, b, c) in grid() {
        let closed = hexagon_seam(&a, &b, &c).unwrap();
        let matrix = hexagon_seam_matrix(&a, &b, &c).unwrap();
        assert!(close(&closed, &matrix, 1e-10), "{a:?} {b:?} {c:?}");
    }
}

#[test]
fn distance_routes_agree() {
    for (a, b, c) in grid() {
        let pentagon = pants_seam_distance_pentagon(&a, &b, &c).unwrap();
        let matrix = pants_seam_distance_matrix(&a, &b, &c).unwrap();
        assert!(close(&pentagon, &matrix, 1e-10), "{a:?} {b:?} {c:?}");
    }
}

#[test]
fn symmetric_pants() {
    let a = Real::from_int(2, P).acosh().unwrap().mul_int(2);
    let seam = hexagon_seam(&a, &a, &a).unwrap();
    assert!(close(&seam, &Real::from_int(2, P).acosh().unwrap(), 1e-10));
    let d = pants_seam_distance(&a, &a, &a).unwrap();
    assert!(close(&d, &Real::from_int(3, P).acosh().unwrap(), 1e-10));
}

#[test]
fn symmetric_in_b_and_c() {
    for (a, b, c) in grid() {
        assert!(hexagon_seam(&a, &b, &c).unwrap().intersects(&hexagon_seam(&a, &c, &b).unwrap()));
        assert!(pants_seam_distance(&a, &b, &c).unwrap().intersects(&pants_seam_distance(&a, &c, &b).unwrap()));
    }
}

#[test]
fn monotone_responses() {
    let (b, c) = (q("3/2"), q("5/2"));
    let lengths: Vec<Real> = (1..=12).map(|k| Real::from_rational(&Rational::from((k, 3)), P)).collect();
    for w in lengths.windows(2) {
        // Seam grows with a; the distance from a shrinks with a.
        assert!(hexagon_seam(&w[0], &b, &c).unwrap().certainly_lt(&hexagon_seam(&w[1], &b, &c).unwrap()));
        assert!(pants_seam_distance(&w[1], &b, &c).unwrap().certainly_lt(&pants_seam_distance(&w[0], &b, &c).unwrap()));
        // Both respond the other way to b.
        let a = q("2");
        assert!(hexagon_seam(&a, &w[1], &c).unwrap().certainly_lt(&hexagon_seam(&a, &w[0], &c).unwrap()));
        assert!(pants_seam_distance(&a, &w[0], &c).unwrap().certainly_lt(&pants_seam_distance(&a, &w[1], &c).unwrap()));
    }
}

#[test]
fn interval_inputs_enclose_point_inputs() {
    let a = Real::from_bounds(q("1").lo().clone(), q("6/5").hi().clone());
    let (b, c) = (q("2"), q("3"));
    let wide = pants_seam_distance(&a, &b, &c).unwrap();
    for point in [q("1"), q("11/10"), q("6/5")] {
        assert!(pants_seam_distance(&point, &b, &c).unwrap().is_subset_of(&wide));
    }
}

#[test]
fn distance_is_mobius_invariant() {
    let g1 = Geodesic::finite(q("-3"), q("-1"));
    let g2 = Geodesic::finite(q("1/2"), q("4"));
    let before = geodesic_distance(&g1, &g2).unwrap();
    let maps = [
        [[q("2"), q("1")], [q("1"), q("1")]],
        [[q("1"), q("7")], [q("0"), q("1")]],
        [[q("0"), q("-1")], [q("1"), q("0")]],
    ];
    for m in &maps {
        let after = geodesic_distance(&g1.mobius(m), &g2.mobius(m)).unwrap();
        assert!(after.intersects(&before) && after.width() < 1e-30);
    }
}

#[test]
fn cross_bounds_are_sound_on_builtin_families() {
    let cases = [
        (SequenceSpec::constant(Rational::from((1, 2))), 8),
        (SequenceSpec::paper_example(Rational::from((1, 2))), 4),
        (SequenceSpec::alternating_half_power(), 8),
    ];
    for (spec, depth) in cases {
        let tree = CantorTree::build(&spec, depth, P).unwrap();
        for n in 1..=depth {
            for i in level_representatives(n) {
                let b = curve_bounds(&spec, &tree, CurveId { n, i }, P).unwrap();
                let lo = Real::point(b.lower.value.lo().clone());
                for cand in &b.candidates {
                    assert!(!cand.value.certainly_lt(&lo), "{} {:?}", spec.family_name(), b.curve);
                }
            }
        }
    }
}

#[test]
fn mirrored_curves_share_bounds() {
    let spec = SequenceSpec::alternating_half_power();
    let tree = CantorTree::build(&spec, 5, P).unwrap();
    for i in 1..=32u64 {
        let b = curve_bounds(&spec, &tree, CurveId { n: 5, i }, P).unwrap();
        let m = curve_bounds(&spec, &tree, CurveId { n: 5, i: 33 - i }, P).unwrap();
        assert_eq!(b.upper_method, m.upper_method);
        assert!(b.upper.unwrap().ln().intersects(&m.upper.unwrap().ln()));
    }
}

#[test]
fn upper_absent_without_geometry_or_monotonicity() {
    let spec = SequenceSpec::parse(
        r#"{"family": "explicit", "values": ["1/2", "1/4"], "tail": {"family": "user_closed_form", "q": "exp(-exp(exp(exp(n))))"}}"#,
    )
    .unwrap();
    let tree = CantorTree::build(&spec, 4, P).unwrap();
    assert!(tree.shape(4).unwrap().degenerate);
    let inner = curve_bounds(&spec, &tree, CurveId { n: 4, i: 2 }, P).unwrap();
    assert!(inner.upper.is_none() && inner.lower.value.certainly_positive());
    let outer = curve_bounds(&spec, &tree, CurveId { n: 4, i: 1 }, P).unwrap();
    assert_eq!(outer.upper_method, Some(Method::PaperAtanh));
    assert!(level_bounds(&spec, &tree, 4, P).unwrap().worst_upper.is_none());
}
