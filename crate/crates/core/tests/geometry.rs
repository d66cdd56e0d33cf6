mod common;

use blockspot_core::geometry::{convex_hull, geometric_match, intersection_area, GeometryError, Point, Polygon};
use common::oracles::{brute_hull, monte_carlo_overlap};
use proptest::prelude::*;

fn coords(p: &Polygon) -> Vec<(f64, f64)> {
    p.vertices().iter().map(|v| (v.x, v.y)).collect()
}

fn sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn random_convex() -> impl Strategy<Value = Polygon> {
    prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 3..12)
        .prop_filter_map("collinear", |pts| {
            convex_hull(&pts.iter().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>())
                .ok()
                .filter(|h| h.area() > 1.0)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hull_matches_brute_force_on_grid(pts in prop::collection::vec((0i32..8, 0i32..8), 1..25)) {
        let pts: Vec<(f64, f64)> = pts.into_iter().map(|(x, y)| (x as f64, y as f64)).collect();
        let expected = brute_hull(&pts);
        match convex_hull(&pts.iter().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>()) {
            Ok(h) => prop_assert_eq!(sorted(coords(&h)), expected),
            Err(GeometryError::CollinearInput) => prop_assert!(expected.len() <= 2),
            Err(e) => prop_assert!(false, "unexpected {e:?}"),
        }
    }

    #[test]
    fn hull_contains_inputs_and_is_convex(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..40)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        if let Ok(h) = convex_hull(&pts) {
            prop_assert!(h.is_convex());
            for p in &pts {
                prop_assert!(h.contains(p) || h.distance_outside(p) < 1e-9);
            }
        }
    }

    #[test]
    fn intersection_symmetric_and_bounded(a in random_convex(), b in random_convex()) {
        let ab = intersection_area(&a, &b);
        let ba = intersection_area(&b, &a);
        prop_assert!((ab - ba).abs() <= 1e-9 * a.area().max(b.area()));
        prop_assert!(ab >= 0.0 && ab <= a.area().min(b.area()) + 1e-9);
        prop_assert!((intersection_area(&a, &a) - a.area()).abs() <= 1e-9 * a.area());
    }

    #[test]
    fn match_score_in_unit_interval(a in random_convex(), b in random_convex()) {
        let m = geometric_match(&a, &b, 0.4);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m.score));
        prop_assert_eq!(m.matched, m.score > 0.4);
    }

    #[test]
    fn orientation_does_not_matter(a in random_convex()) {
        let mut rev = a.vertices().to_vec();
        rev.reverse();
        let b = Polygon::new(rev).unwrap();
        prop_assert!((a.area() - b.area()).abs() < 1e-9);
        prop_assert_eq!(sorted(coords(&a)), sorted(coords(&b)));
        prop_assert!(b.is_convex());
    }
}

#[test]
fn intersection_agrees_with_monte_carlo() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for case in 0..20 {
        let poly = |rng: &mut rand_chacha::ChaCha8Rng, cx: f64, cy: f64| loop {
            let pts: Vec<Point> = (0..8)
                .map(|_| Point::new(cx + rng.gen_range(-10.0..10.0), cy + rng.gen_range(-10.0..10.0)))
                .collect();
            if let Ok(h) = convex_hull(&pts) {
                if h.area() > 20.0 {
                    return h;
                }
            }
        };
        let a = poly(&mut rng, 0.0, 0.0);
        let (dx, dy) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let b = poly(&mut rng, dx, dy);
        let exact = intersection_area(&a, &b);
        let mc = monte_carlo_overlap(&coords(&a), &coords(&b), 200_000, case);
        assert!((exact - mc).abs() <= 0.02 * exact.max(1.0), "case {case}: {exact} vs {mc}");
    }
}

#[test]
fn concave_intersection_agrees_with_grid_count() {
    let l = Polygon::from_coords(&[(0.0, 0.0), (4.0, 0.0), (4.0, 1.0), (1.0, 1.0), (1.0, 4.0), (0.0, 4.0)]).unwrap();
    let square = Polygon::rect(0.5, 0.5, 3.5, 3.5).unwrap();
    // even-odd test written independently of the library
    let inside = |poly: &[(f64, f64)], x: f64, y: f64| {
        let mut c = false;
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            if (a.1 > y) != (b.1 > y) && x < a.0 + (y - a.1) * (b.0 - a.0) / (b.1 - a.1) {
                c = !c;
            }
        }
        c
    };
    let (lc, sc) = (coords(&l), coords(&square));
    let n = 1000;
    let mut hits = 0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * 4.0 / n as f64, (j as f64 + 0.5) * 4.0 / n as f64);
            if inside(&lc, x, y) && inside(&sc, x, y) {
                hits += 1;
            }
        }
    }
    let grid = hits as f64 * 16.0 / (n * n) as f64;
    let exact = intersection_area(&l, &square);
    assert!((exact - 2.75).abs() < 1e-9, "{exact}");
    assert!((grid - exact).abs() < 0.01);
}

#[test]
fn validation_errors() {
    assert_eq!(Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0)]), Err(GeometryError::TooFewVertices(2)));
    assert_eq!(
        Polygon::from_coords(&[(0.0, 0.0), (f64::NAN, 0.0), (1.0, 1.0)]),
        Err(GeometryError::NonFinite)
    );
    assert_eq!(Polygon::from_coords(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]), Err(GeometryError::Degenerate));
    assert_eq!(convex_hull(&[]), Err(GeometryError::EmptyInput));
}
