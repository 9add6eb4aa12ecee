use super::{BasisValue, CellBasis};
use crate::geometry::{intersect_box, minkowski_sum, triangulate, ConvexPolygon, Point, SquareBox};
use crate::mollifier::MollifierTensor;
use crate::poly::Poly1;
use crate::quadrature::{segment_rule, triangle_rule};
use crate::Real;

/// Support of the mollified basis: the cell grown by the mollifier box.
pub fn support<T: Real>(cell: &ConvexPolygon<T>, m: &MollifierTensor<T>) -> ConvexPolygon<T> {
    minkowski_sum(cell, &m.support_box(Point::origin()))
}

/// Mollifier pieces seen from the integration variable `τ = (y - p) / (h_m/2)`:
/// on span `j` of `τ`, `P(-τ)` and `P'(-τ)`.
struct Reflected<T> {
    knots: Vec<T>,
    value: Vec<Poly1<T>>,
    slope: Vec<Poly1<T>>,
}

impl<T: Real> Reflected<T> {
    fn new(m: &MollifierTensor<T>) -> Self {
        let pieces = m.factor.pieces();
        let n = pieces.len();
        let value = (0..n).map(|j| pieces[n - 1 - j].reflect()).collect();
        let slope = (0..n).map(|j| pieces[n - 1 - j].derivative().reflect()).collect();
        Self { knots: m.factor.piece_knots(), value, slope }
    }

    fn spans(&self) -> usize {
        self.value.len()
    }
}

/// Cell ∩ support box in `τ` coordinates, split by mollifier spans.
fn overlap_pieces<T: Real>(
    cell: &ConvexPolygon<T>,
    m: &MollifierTensor<T>,
    p: Point<T>,
    knots: &[T],
) -> Vec<(usize, usize, ConvexPolygon<T>)> {
    let hw = m.halfwidth();
    let (Some(cb), Some(bb)) = (cell.aabb(), Some(m.support_box(p).aabb())) else {
        return Vec::new();
    };
    if !cb.overlaps(&bb) {
        return Vec::new();
    }
    let local = cell.to_local(p, T::one() / hw);
    let unit = SquareBox::new(Point::origin(), T::one()).expect("unit box");
    let omega = intersect_box(&local, &unit);
    if omega.is_empty() {
        return Vec::new();
    }
    let n = knots.len() - 1;
    if n == 1 {
        return vec![(0, 0, omega)];
    }
    let ob = omega.aabb().expect("non-empty");
    let half = T::lit(0.5);
    let mut out = Vec::new();
    for j in 0..n {
        if knots[j + 1] <= ob.min.x || knots[j] >= ob.max.x {
            continue;
        }
        for k in 0..n {
            if knots[k + 1] <= ob.min.y || knots[k] >= ob.max.y {
                continue;
            }
            let c = Point::new((knots[j] + knots[j + 1]) * half, (knots[k] + knots[k + 1]) * half);
            let sub = SquareBox::new(c, (knots[j + 1] - knots[j]) * half).expect("span box");
            let piece = intersect_box(&omega, &sub);
            if !piece.is_empty() {
                out.push((j, k, piece));
            }
        }
    }
    out
}

/// Mollified basis values and gradients at `p`, integrating over
/// `cell ∩ box(p)` by the divergence theorem: the integrand is
/// antidifferentiated in the first coordinate and the remaining line
/// integrals over the polygon edges are done by Gauss rules.
pub fn eval_2d<T: Real>(cb: &CellBasis<T>, cell: &ConvexPolygon<T>, m: &MollifierTensor<T>, p: Point<T>) -> BasisValue<T> {
    let nb = cb.len();
    let mut out = BasisValue::zeros(nb);
    let refl = Reflected::new(m);
    let pieces = overlap_pieces(cell, m, p, &refl.knots);
    if pieces.is_empty() {
        return out;
    }
    let q = cb.degree;
    let hw = m.halfwidth();
    let r = hw * T::lit(2.0) / cb.scale;
    let s = cb.scaled(p);
    let lx = Poly1::linear(s.x, r);
    let ly = Poly1::linear(s.y, r);
    let xpow: Vec<_> = (0..=q).map(|a| lx.powi(a)).collect();
    let ypow: Vec<_> = (0..=q).map(|b| ly.powi(b)).collect();
    let deg = 2 * m.factor.degree() + q + 1;
    let rule = segment_rule::<T>(deg / 2 + 1).expect("segment rule");

    let mut acc = vec![[T::zero(); 3]; nb];
    let mut av = vec![T::zero(); q + 1];
    let mut ad = vec![T::zero(); q + 1];
    let mut bv = vec![T::zero(); q + 1];
    let mut bd = vec![T::zero(); q + 1];
    for (j, k, poly) in &pieces {
        let a_val: Vec<_> = xpow.iter().map(|x| refl.value[*j].mul(x).antiderivative()).collect();
        let a_der: Vec<_> = xpow.iter().map(|x| refl.slope[*j].mul(x).antiderivative()).collect();
        let b_val: Vec<_> = ypow.iter().map(|y| refl.value[*k].mul(y)).collect();
        let b_der: Vec<_> = ypow.iter().map(|y| refl.slope[*k].mul(y)).collect();
        for (v0, v1) in poly.edges() {
            let dy = v1.y - v0.y;
            if dy == T::zero() {
                continue;
            }
            for (t, w) in rule.points.iter().zip(&rule.weights) {
                let x = v0.lerp(v1, t[0]);
                for a in 0..=q {
                    av[a] = a_val[a].eval(x.x);
                    ad[a] = a_der[a].eval(x.x);
                    bv[a] = b_val[a].eval(x.y);
                    bd[a] = b_der[a].eval(x.y);
                }
                let wd = *w * dy;
                for (i, &(a, b)) in cb.exponents().iter().enumerate() {
                    acc[i][0] += wd * av[a] * bv[b];
                    acc[i][1] += wd * ad[a] * bv[b];
                    acc[i][2] += wd * av[a] * bd[b];
                }
            }
        }
    }
    let inv = T::one() / hw;
    for i in 0..nb {
        out.values[i] = acc[i][0];
        out.grads[i] = [acc[i][1] * inv, acc[i][2] * inv];
    }
    out
}

/// Same quantity as [`eval_2d`], by centroid-fan triangulation of the
/// overlap and a triangle rule exact for the integrand.
pub fn eval_2d_triangulated<T: Real>(
    cb: &CellBasis<T>,
    cell: &ConvexPolygon<T>,
    m: &MollifierTensor<T>,
    p: Point<T>,
) -> BasisValue<T> {
    let nb = cb.len();
    let mut out = BasisValue::zeros(nb);
    let refl = Reflected::new(m);
    let pieces = overlap_pieces(cell, m, p, &refl.knots);
    if pieces.is_empty() {
        return out;
    }
    debug_assert!(refl.spans() >= 1);
    let hw = m.halfwidth();
    let r = hw * T::lit(2.0) / cb.scale;
    let s = cb.scaled(p);
    let rule = triangle_rule::<T>(2 * m.factor.degree() + cb.degree).expect("triangle rule");
    let inv = T::one() / hw;
    for (j, k, poly) in &pieces {
        for tri in triangulate(poly) {
            let jac = tri.signed_area() * T::lit(2.0);
            for (rs, w) in rule.points.iter().zip(&rule.weights) {
                let x = tri.map(rs[0], rs[1]);
                let (px, py) = (refl.value[*j].eval(x.x), refl.value[*k].eval(x.y));
                let (dx, dy) = (refl.slope[*j].eval(x.x), refl.slope[*k].eval(x.y));
                let (xi, eta) = (s.x + r * x.x, s.y + r * x.y);
                let wj = *w * jac;
                for (i, &(a, b)) in cb.exponents().iter().enumerate() {
                    let g = xi.powi(a as i32) * eta.powi(b as i32) * wj;
                    out.values[i] += px * py * g;
                    out.grads[i][0] += dx * py * g * inv;
                    out.grads[i][1] += px * dy * g * inv;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::Mollifier1D;

    fn pt(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn hexagon() -> ConvexPolygon<f64> {
        let v = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64 + 0.2;
                pt(0.5 + 0.3 * a.cos(), 0.4 + 0.25 * a.sin())
            })
            .collect();
        ConvexPolygon::new(v).unwrap()
    }

    #[test]
    fn constant_with_box_inside_cell() {
        let m = MollifierTensor::new(Mollifier1D::<f64>::quartic(0.1).unwrap());
        let cell = ConvexPolygon::rectangle(pt(0.0, 0.0), pt(1.0, 1.0)).unwrap();
        let cb = CellBasis::new_2d(0, pt(0.5, 0.5), 0.5, 0);
        let v = eval_2d(&cb, &cell, &m, pt(0.3, 0.6));
        assert!((v.values[0] - 1.0).abs() < 1e-14);
        assert!(v.grads[0][0].abs() < 1e-12 && v.grads[0][1].abs() < 1e-12);
    }

    #[test]
    fn divergence_and_triangulation_agree() {
        let cell = hexagon();
        for m1 in [Mollifier1D::<f64>::quartic(0.3).unwrap(), Mollifier1D::<f64>::bspline(1, 0.25).unwrap(), Mollifier1D::<f64>::bspline(3, 0.4).unwrap()] {
            let m = MollifierTensor::new(m1);
            let cb = CellBasis::new_2d(0, pt(0.52, 0.37), 0.3, 3);
            for p in [pt(0.5, 0.4), pt(0.8, 0.5), pt(0.3, 0.2), pt(0.9, 0.75), pt(0.12, 0.55)] {
                let a = eval_2d(&cb, &cell, &m, p);
                let b = eval_2d_triangulated(&cb, &cell, &m, p);
                let scale = a.values.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                for i in 0..cb.len() {
                    assert!((a.values[i] - b.values[i]).abs() <= 1e-12 * scale, "{i} {:?} {:?}", a.values, b.values);
                    for d in 0..2 {
                        assert!((a.grads[i][d] - b.grads[i][d]).abs() <= 1e-12 * scale / m.halfwidth());
                    }
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let cell = hexagon();
        let m = MollifierTensor::new(Mollifier1D::<f64>::quartic(0.3).unwrap());
        let cb = CellBasis::new_2d(0, pt(0.52, 0.37), 0.3, 2);
        let h = 1e-6;
        for p in [pt(0.5, 0.4), pt(0.79, 0.52), pt(0.33, 0.21)] {
            let g = eval_2d(&cb, &cell, &m, p);
            let fx = |d: f64| eval_2d(&cb, &cell, &m, pt(p.x + d, p.y));
            let fy = |d: f64| eval_2d(&cb, &cell, &m, pt(p.x, p.y + d));
            let (xp, xm, yp, ym) = (fx(h), fx(-h), fy(h), fy(-h));
            for i in 0..cb.len() {
                let dx = (xp.values[i] - xm.values[i]) / (2.0 * h);
                let dy = (yp.values[i] - ym.values[i]) / (2.0 * h);
                assert!((dx - g.grads[i][0]).abs() <= 1e-6 * dx.abs().max(1.0));
                assert!((dy - g.grads[i][1]).abs() <= 1e-6 * dy.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_outside_support() {
        let cell = hexagon();
        let m = MollifierTensor::new(Mollifier1D::<f64>::quartic(0.2).unwrap());
        let cb = CellBasis::new_2d(0, pt(0.5, 0.4), 0.3, 2);
        let sup = support(&cell, &m);
        assert!(sup.contains(pt(0.5, 0.4), 0.0));
        let far = pt(1.5, 0.4);
        assert!(!sup.contains(far, 0.0));
        assert!(eval_2d(&cb, &cell, &m, far).is_zero());
        let sq = ConvexPolygon::rectangle(pt(0.0, 0.0), pt(1.0, 1.0)).unwrap();
        let s = support(&sq, &m);
        assert!((s.area() - 1.44).abs() < 1e-14);
        let cb = CellBasis::new_2d(0, pt(0.5, 0.5), 0.5, 0);
        assert!(eval_2d(&cb, &sq, &m, pt(1.1 - 1e-3, 0.5)).values[0] > 0.0);
        assert!(eval_2d(&cb, &sq, &m, pt(1.1 + 1e-3, 0.5)).is_zero());
    }
}
