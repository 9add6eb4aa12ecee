use mollifem::basis::{
    eval_1d, eval_2d, eval_2d_triangulated, local_coefficients_1d, local_coefficients_2d, reproduction_coefficients,
    reproduction_coefficients_2d, CellBasis, Interval,
};
use mollifem::fem::experiments::{square_mesh, StudyOptions};
use mollifem::geometry::{voronoi, ConvexPolygon, Point};
use mollifem::mollifier::{Mollifier1D, MollifierTensor};
use mollifem::poly::{Poly1, Poly2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mollifier(k: usize, width: f64) -> Mollifier1D<f64> {
    match k {
        0 => Mollifier1D::quartic(width),
        d => Mollifier1D::bspline(d, width),
    }
    .unwrap()
}

/// One cell of a random Voronoi diagram of the unit square, with its seed.
fn random_cell(seed: u64) -> (ConvexPolygon<f64>, Point<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<Point<f64>> = (0..12).map(|_| Point::new(rng.gen(), rng.gen())).collect();
    let unit = ConvexPolygon::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
    let vd = voronoi(&seeds, &unit).unwrap();
    let k = rng.gen_range(0..seeds.len());
    (vd.cells[k].clone(), seeds[k])
}

fn near(cell: &ConvexPolygon<f64>, hw: f64, u: f64, v: f64) -> Point<f64> {
    let b = cell.aabb().unwrap().inflate(hw);
    Point::new(b.min.x + u * b.width(), b.min.y + v * b.height())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn divergence_and_triangulation_paths_agree(
        seed in 0u64..10_000, k in 0usize..4, width in 0.05f64..0.6, q in 0usize..4, u in 0.0f64..1.0, v in 0.0f64..1.0,
    ) {
        let (cell, c) = random_cell(seed);
        let m = MollifierTensor::new(mollifier(k, width));
        let cb = CellBasis::new_2d(0, c, 0.3, q);
        let p = near(&cell, m.halfwidth(), u, v);
        let a = eval_2d(&cb, &cell, &m, p);
        let b = eval_2d_triangulated(&cb, &cell, &m, p);
        let scale = a.values.iter().chain(b.values.iter()).fold(1.0f64, |s, x| s.max(x.abs()));
        for i in 0..cb.len() {
            prop_assert!((a.values[i] - b.values[i]).abs() <= 1e-12 * scale);
            for d in 0..2 {
                prop_assert!((a.grads[i][d] - b.grads[i][d]).abs() <= 1e-12 * scale / m.halfwidth());
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences(
        seed in 0u64..10_000, k in 0usize..4, q in 0usize..4, u in 0.0f64..1.0, v in 0.0f64..1.0,
    ) {
        let (cell, c) = random_cell(seed);
        let m = MollifierTensor::new(mollifier(k, 0.3));
        let cb = CellBasis::new_2d(0, c, 0.3, q);
        let p = near(&cell, m.halfwidth(), u, v);
        let h = 1e-6;
        let at = |dx: f64, dy: f64| eval_2d(&cb, &cell, &m, Point::new(p.x + dx, p.y + dy));
        let g = at(0.0, 0.0);
        let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        for i in 0..cb.len() {
            let fd = [(xp.values[i] - xm.values[i]) / (2.0 * h), (yp.values[i] - ym.values[i]) / (2.0 * h)];
            for (f, g) in fd.iter().zip(g.grads[i]) {
                prop_assert!((f - g).abs() <= 1e-6 * (1.0 + g.abs()), "{} {}", f, g);
            }
        }
    }

    #[test]
    fn vanishes_outside_support(seed in 0u64..10_000, k in 0usize..4, t in 0.0f64..std::f64::consts::TAU) {
        let (cell, c) = random_cell(seed);
        let m = MollifierTensor::new(mollifier(k, 0.2));
        let cb = CellBasis::new_2d(0, c, 0.3, 2);
        let b = cell.aabb().unwrap().inflate(m.halfwidth());
        let r = 0.5 * (b.width() + b.height()) + 1e-9;
        let mid = Point::new(0.5 * (b.min.x + b.max.x), 0.5 * (b.min.y + b.max.y));
        let p = mid + Point::new(t.cos(), t.sin()) * r;
        let e = eval_2d(&cb, &cell, &m, p);
        prop_assert!(e.values.iter().all(|v| *v == 0.0));
    }
}

/// Random polynomial of total degree `q`.
fn random_poly(q: usize, rng: &mut ChaCha8Rng) -> Poly2<f64> {
    let mut p = Poly2::new();
    for i in 0..=q {
        for j in 0..=q - i {
            p.add_term((i, j), rng.gen_range(-1.0..1.0));
        }
    }
    p
}

#[test]
fn partition_of_unity_and_reproduction_on_perturbed_meshes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in 0..=2 {
        let mesh = square_mesh::<f64>(5, q, &StudyOptions::default()).unwrap();
        let polys: Vec<Poly2<f64>> = (0..3).map(|_| random_poly(q, &mut rng)).collect();
        let coeffs: Vec<Vec<Vec<f64>>> = polys
            .iter()
            .map(|p| {
                let g = reproduction_coefficients_2d(p, &mesh.mollifier.factor);
                mesh.cells.iter().map(|c| local_coefficients_2d(&g, &c.basis)).collect()
            })
            .collect();
        for _ in 0..60 {
            let x = Point::new(rng.gen(), rng.gen());
            let vals = mesh.basis_at(x);
            let pu: f64 = vals.iter().map(|(_, v)| v.values[0]).sum();
            assert!((pu - 1.0).abs() <= 1e-10, "q={q} partition sum {pu} at {x:?}");
            for (p, cs) in polys.iter().zip(&coeffs) {
                let mut u = 0.0;
                let mut du = [0.0; 2];
                for (c, v) in &vals {
                    for (a, ca) in cs[*c].iter().enumerate() {
                        u += ca * v.values[a];
                        du[0] += ca * v.grads[a][0];
                        du[1] += ca * v.grads[a][1];
                    }
                }
                let g = p.grad(x.x, x.y);
                assert!((u - p.eval(x.x, x.y)).abs() <= 1e-10, "q={q}: {u} vs {}", p.eval(x.x, x.y));
                assert!((du[0] - g[0]).abs() <= 1e-8 && (du[1] - g[1]).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn one_dimensional_reproduction() {
    let cells: Vec<Interval<f64>> = [0.0, 0.15, 0.35, 0.5, 0.65, 0.85, 1.0].windows(2).map(|w| Interval::new(w[0], w[1])).collect();
    let mut padded = vec![Interval::new(-0.3, 0.0)];
    padded.extend(cells.iter().copied());
    padded.push(Interval::new(1.0, 1.3));
    for q in 0..=3 {
        for m in [Mollifier1D::bspline(1, 0.3).unwrap(), Mollifier1D::bspline(3, 0.4).unwrap(), Mollifier1D::quartic(0.25).unwrap()] {
            let target = Poly1::new((0..=q).map(|k| 0.3 + k as f64 * 0.7).collect());
            let g = reproduction_coefficients(&target, &m);
            let bases: Vec<CellBasis<f64>> = padded.iter().enumerate().map(|(i, c)| CellBasis::new_1d(i, c.midpoint(), 0.17, q)).collect();
            for s in 0..=50 {
                let x = s as f64 / 50.0;
                let mut u = 0.0;
                for (cb, c) in bases.iter().zip(&padded) {
                    let v = eval_1d(cb, c, &m, x);
                    u += local_coefficients_1d(&g, cb).iter().zip(&v.values).map(|(a, b)| a * b).sum::<f64>();
                }
                assert!((u - target.eval(x)).abs() <= 1e-10, "q={q} {:?} at {x}: {u}", m.kind());
            }
        }
    }
}
