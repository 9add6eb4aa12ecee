use mollifem::geometry::{
    clip_halfplane, convex_hull, intersect_box, minkowski_sum, voronoi, ConvexPolygon, HalfPlane, Point, SquareBox,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit() -> ConvexPolygon<f64> {
    ConvexPolygon::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap()
}

/// Fraction of `n` uniform samples in `[lo, hi]²` accepted by `inside`.
fn monte_carlo(lo: f64, hi: f64, n: usize, seed: u64, inside: impl Fn(Point<f64>) -> bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..n).filter(|_| inside(Point::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi)))).count();
    hits as f64 / n as f64 * (hi - lo) * (hi - lo)
}

fn point_strategy() -> impl Strategy<Value = Point<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn clipped_area_matches_sampling(angle in 0.0f64..std::f64::consts::TAU, off in -0.6f64..0.6) {
        let h = HalfPlane::new(Point::new(angle.cos(), angle.sin()), off + 0.5 * (angle.cos() + angle.sin())).unwrap();
        let clipped = clip_halfplane(&unit(), &h);
        let mc = monte_carlo(0.0, 1.0, 40_000, 7, |p| h.contains(p));
        // binomial standard deviation is at most 0.0025
        prop_assert!((clipped.area() - mc).abs() < 0.0125, "{} {}", clipped.area(), mc);
    }

    #[test]
    fn hull_contains_every_point(pts in prop::collection::vec(point_strategy(), 3..30)) {
        if let Ok(hull) = convex_hull(&pts) {
            for p in &pts {
                prop_assert!(hull.contains(*p, 1e-12));
            }
            for v in hull.vertices() {
                prop_assert!(pts.contains(v));
            }
        }
    }

    #[test]
    fn minkowski_matches_brute_force(pts in prop::collection::vec(point_strategy(), 3..12), hw in 0.01f64..0.5) {
        let Ok(poly) = convex_hull(&pts) else { return Ok(()) };
        let b = SquareBox::new(Point::origin(), hw).unwrap();
        let sum = minkowski_sum(&poly, &b);
        let mut all = Vec::new();
        for v in poly.vertices() {
            for c in b.corners() {
                all.push(*v + c);
            }
        }
        let brute = convex_hull(&all).unwrap();
        prop_assert!((sum.area() - brute.area()).abs() <= 1e-12 * brute.area().max(1.0));
        for v in brute.vertices() {
            prop_assert!(sum.contains(*v, 1e-12));
        }
        // support function of a sum is the sum of support functions
        for k in 0..16 {
            let a = k as f64 * std::f64::consts::TAU / 16.0;
            let d = Point::new(a.cos(), a.sin());
            let hs = sum.vertices().iter().map(|v| v.dot(d)).fold(f64::MIN, f64::max);
            let hp = poly.vertices().iter().map(|v| v.dot(d)).fold(f64::MIN, f64::max);
            prop_assert!((hs - hp - hw * (d.x.abs() + d.y.abs())).abs() < 1e-12);
        }
    }

    #[test]
    fn voronoi_cells_hold_their_nearest_points(seed in 0u64..1000, n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<Point<f64>> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let vd = voronoi(&seeds, &unit()).unwrap();
        let total: f64 = vd.cells.iter().map(|c| c.area()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for _ in 0..200 {
            let p = Point::new(rng.gen(), rng.gen());
            let (best, dbest) = seeds.iter().enumerate().map(|(i, s)| (i, s.dist(p))).fold((0, f64::MAX), |a, b| if b.1 < a.1 { b } else { a });
            // skip samples near a bisector
            let second = seeds.iter().enumerate().filter(|(i, _)| *i != best).map(|(_, s)| s.dist(p)).fold(f64::MAX, f64::min);
            if second - dbest < 1e-9 {
                continue;
            }
            prop_assert!(vd.cells[best].contains(p, 1e-12));
        }
    }
}

#[test]
fn box_intersection_area_by_sampling() {
    let hex = ConvexPolygon::new(
        (0..6).map(|k| {
            let a = k as f64 * std::f64::consts::PI / 3.0;
            Point::new(0.5 * a.cos(), 0.5 * a.sin())
        }).collect(),
    )
    .unwrap();
    let b = SquareBox::new(Point::new(0.3, 0.1), 0.35).unwrap();
    let clipped = intersect_box(&hex, &b);
    let mc = monte_carlo(-0.5, 0.7, 200_000, 3, |p| hex.contains(p, 0.0) && (p.x - 0.3).abs() <= 0.35 && (p.y - 0.1).abs() <= 0.35);
    assert!((clipped.area() - mc).abs() < 4e-3, "{} {mc}", clipped.area());
}

#[test]
fn triangle_plus_box_is_a_pentagon() {
    let tri = ConvexPolygon::new(vec![Point::<f64>::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
    let s = minkowski_sum(&tri, &SquareBox::new(Point::origin(), 0.5).unwrap());
    assert_eq!(s.len(), 5);
    assert!((s.area() - 3.5).abs() < 1e-14);
}
