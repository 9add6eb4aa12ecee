//! Quadrature rules on intervals and triangles, polygon integration, and
//! quadratic (curved) triangles for boundary-fitted cut-cell integration.

use crate::geometry::{triangulate, ConvexPolygon, Point, SignedDistance, Triangle};
use crate::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("unsupported quadrature size or degree {0}")]
    Unsupported(usize),
    #[error("rule fails exactness self-test for monomial {monomial:?} (error {error:e})")]
    Exactness { monomial: (usize, usize), error: f64 },
}

/// Points and weights on a reference cell: `[-1, 1]` (or `[0, 1]` for
/// segment rules) when `D = 1`, the triangle `(0,0),(1,0),(0,1)` when `D = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T, const D: usize> {
    pub points: Vec<[T; D]>,
    pub weights: Vec<T>,
    pub exactness: usize,
}

pub type IntervalRule<T> = Rule<T, 1>;
pub type TriangleRule<T> = Rule<T, 2>;

impl<T, const D: usize> Rule<T, D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`, exact to degree `2n-1`.
pub fn gauss_interval<T: Real>(n: usize) -> Result<IntervalRule<T>, QuadratureError> {
    if n == 0 || n > 64 {
        return Err(QuadratureError::Unsupported(n));
    }
    let (x, w) = gauss_legendre_f64(n);
    let rule = Rule {
        points: x.into_iter().map(|v| [T::lit(v)]).collect(),
        weights: w.into_iter().map(T::lit).collect(),
        exactness: 2 * n - 1,
    };
    check_interval(&rule, T::lit(2.0), T::lit(-1.0))?;
    Ok(rule)
}

/// Gauss–Legendre rule with `n` points on `[0, 1]`.
pub fn segment_rule<T: Real>(n: usize) -> Result<IntervalRule<T>, QuadratureError> {
    let g = gauss_interval::<T>(n)?;
    let half = T::lit(0.5);
    Ok(Rule {
        points: g.points.iter().map(|p| [(p[0] + T::one()) * half]).collect(),
        weights: g.weights.iter().map(|w| *w * half).collect(),
        exactness: g.exactness,
    })
}

fn mono_tol<T: Real>() -> T {
    T::lit(1e-13).max(T::epsilon() * T::lit(256.0))
}

fn check_interval<T: Real>(rule: &IntervalRule<T>, len: T, lo: T) -> Result<(), QuadratureError> {
    let hi = lo + len;
    for k in 0..=rule.exactness {
        let e = T::from_usize_lossy(k + 1);
        let exact = (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / e;
        let approx = rule.points.iter().zip(&rule.weights).fold(T::zero(), |a, (p, w)| a + *w * p[0].powi(k as i32));
        let err = (approx - exact).abs();
        if err > mono_tol::<T>() * len {
            return Err(QuadratureError::Exactness { monomial: (k, 0), error: err.to_f64_lossy() });
        }
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// `∫_T r^a s^b` over the reference triangle.
pub fn triangle_monomial_integral(a: usize, b: usize) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

fn check_triangle<T: Real>(rule: &TriangleRule<T>) -> Result<(), QuadratureError> {
    for a in 0..=rule.exactness {
        for b in 0..=(rule.exactness - a) {
            let exact = T::lit(triangle_monomial_integral(a, b));
            let approx = rule
                .points
                .iter()
                .zip(&rule.weights)
                .fold(T::zero(), |acc, (p, w)| acc + *w * p[0].powi(a as i32) * p[1].powi(b as i32));
            let err = (approx - exact).abs();
            if err > mono_tol::<T>() {
                return Err(QuadratureError::Exactness { monomial: (a, b), error: err.to_f64_lossy() });
            }
        }
    }
    Ok(())
}

fn symmetric_orbit(out: &mut Vec<([f64; 2], f64)>, a: f64, w: f64) {
    // barycentric (a, a, 1-2a)
    let b = 1.0 - 2.0 * a;
    out.push(([a, a], w));
    out.push(([b, a], w));
    out.push(([a, b], w));
}

/// Points with weights, and the exactness degree.
type Table = (Vec<([f64; 2], f64)>, usize);

fn table_rule(npts: usize) -> Option<Table> {
    let mut v = Vec::new();
    let degree = match npts {
        1 => {
            v.push(([1.0 / 3.0, 1.0 / 3.0], 0.5));
            1
        }
        3 => {
            symmetric_orbit(&mut v, 1.0 / 6.0, 1.0 / 6.0);
            2
        }
        4 => {
            v.push(([1.0 / 3.0, 1.0 / 3.0], -27.0 / 96.0));
            symmetric_orbit(&mut v, 0.2, 25.0 / 96.0);
            3
        }
        6 => {
            symmetric_orbit(&mut v, 0.445_948_490_915_965, 0.5 * 0.223_381_589_678_011);
            symmetric_orbit(&mut v, 0.091_576_213_509_771, 0.5 * 0.109_951_743_655_322);
            4
        }
        7 => {
            let s15 = 15f64.sqrt();
            v.push(([1.0 / 3.0, 1.0 / 3.0], 9.0 / 80.0));
            symmetric_orbit(&mut v, (6.0 - s15) / 21.0, (155.0 - s15) / 2400.0);
            symmetric_orbit(&mut v, (6.0 + s15) / 21.0, (155.0 + s15) / 2400.0);
            5
        }
        _ => return None,
    };
    Some((v, degree))
}

fn collapsed_rule<T: Real>(degree: usize) -> Result<TriangleRule<T>, QuadratureError> {
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre_f64(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let v = 0.5 * (x[j] + 1.0);
            points.push([T::lit(u), T::lit(v * (1.0 - u))]);
            weights.push(T::lit(0.25 * w[i] * w[j] * (1.0 - u)));
        }
    }
    let rule = Rule { points, weights, exactness: degree };
    check_triangle(&rule)?;
    Ok(rule)
}

/// Triangle rule from the published symmetric tables with exactly `npts`
/// points (1, 3, 4, 6 or 7).
pub fn triangle_rule_points<T: Real>(npts: usize) -> Result<TriangleRule<T>, QuadratureError> {
    let (v, degree) = table_rule(npts).ok_or(QuadratureError::Unsupported(npts))?;
    let rule = Rule {
        points: v.iter().map(|(p, _)| [T::lit(p[0]), T::lit(p[1])]).collect(),
        weights: v.iter().map(|(_, w)| T::lit(*w)).collect(),
        exactness: degree,
    };
    check_triangle(&rule)?;
    Ok(rule)
}

/// Smallest available rule exact to `degree`: tables up to degree 5, then
/// a collapsed tensor Gauss rule.
pub fn triangle_rule<T: Real>(degree: usize) -> Result<TriangleRule<T>, QuadratureError> {
    match degree {
        0 | 1 => triangle_rule_points(1),
        2 => triangle_rule_points(3),
        3 => triangle_rule_points(4),
        4 => triangle_rule_points(6),
        5 => triangle_rule_points(7),
        d if d <= 60 => collapsed_rule(d),
        d => Err(QuadratureError::Unsupported(d)),
    }
}

/// Integrates `f` over a convex polygon through its centroid fan.
pub fn integrate_over_polygon<T: Real>(
    f: impl Fn(Point<T>) -> T,
    poly: &ConvexPolygon<T>,
    degree: usize,
) -> Result<T, QuadratureError> {
    let rule = triangle_rule::<T>(degree)?;
    let mut sum = T::zero();
    for tri in triangulate(poly) {
        let jac = tri.signed_area() * T::lit(2.0);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            sum += *w * jac * f(tri.map(p[0], p[1]));
        }
    }
    Ok(sum)
}

/// Six-node triangle: corners `0..3`, then midnodes of edges 0-1, 1-2, 2-0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvedTriangle<T> {
    pub nodes: [Point<T>; 6],
    /// Set when a requested midnode projection was abandoned.
    pub straight_fallback: bool,
}

impl<T: Real> CurvedTriangle<T> {
    pub fn straight(t: &Triangle<T>) -> Self {
        Self {
            nodes: [t.a, t.b, t.c, t.a.midpoint(t.b), t.b.midpoint(t.c), t.c.midpoint(t.a)],
            straight_fallback: false,
        }
    }

    /// Physical point and Jacobian determinant at reference `(r, s)`.
    pub fn map(&self, r: T, s: T) -> (Point<T>, T) {
        let one = T::one();
        let four = T::lit(4.0);
        let two = T::lit(2.0);
        let l0 = one - r - s;
        let (l1, l2) = (r, s);
        let n = [
            l0 * (two * l0 - one),
            l1 * (two * l1 - one),
            l2 * (two * l2 - one),
            four * l0 * l1,
            four * l1 * l2,
            four * l2 * l0,
        ];
        let dr = [-(four * l0 - one), four * l1 - one, T::zero(), four * (l0 - l1), four * l2, -four * l2];
        let ds = [-(four * l0 - one), T::zero(), four * l2 - one, -four * l1, four * l1, four * (l0 - l2)];
        let mut x = Point::origin();
        let mut xr = Point::origin();
        let mut xs = Point::origin();
        for k in 0..6 {
            x += self.nodes[k] * n[k];
            xr += self.nodes[k] * dr[k];
            xs += self.nodes[k] * ds[k];
        }
        (x, xr.cross(xs))
    }

    pub fn area(&self) -> T {
        let rule = triangle_rule::<T>(2).expect("table rule");
        rule.points.iter().zip(&rule.weights).fold(T::zero(), |a, (p, w)| a + *w * self.map(p[0], p[1]).1)
    }

    /// Triangle with the given midnodes replacing the edge midpoints.
    ///
    /// A folded map is kept: integrals through it are still signed integrals
    /// over the region its boundary curve encloses, so they stay consistent
    /// with quadrature along the curved edge.
    pub fn with_midnodes(t: &Triangle<T>, mids: [Option<Point<T>>; 3]) -> Self {
        let mut out = Self::straight(t);
        if mids.iter().all(Option::is_none) {
            return out;
        }
        for (e, m) in mids.iter().enumerate() {
            if let Some(m) = m {
                out.nodes[3 + e] = *m;
            }
        }
        if out.is_folded() {
            log::debug!("curved triangle with corners {:?} folds", [t.a, t.b, t.c]);
        }
        out
    }

    /// Whether the Jacobian changes sign on the reference triangle.
    pub fn is_folded(&self) -> bool {
        !self.jacobian_positive()
    }

    fn jacobian_positive(&self) -> bool {
        let rule = triangle_rule::<T>(8).expect("collapsed rule");
        let corners = [[T::zero(), T::zero()], [T::one(), T::zero()], [T::zero(), T::one()]];
        rule.points.iter().chain(corners.iter()).all(|p| self.map(p[0], p[1]).1 > T::zero())
    }
}

/// Moves the midnodes of the flagged edges (0: a-b, 1: b-c, 2: c-a) onto the
/// zero level set of `sdf`, searching along the edge normal up to half the
/// edge length. Falls back to straight edges, with a warning, when no root
/// is found.
pub fn project_midnodes<T: Real>(tri: &Triangle<T>, sdf: &SignedDistance<T>, edges: [bool; 3]) -> CurvedTriangle<T> {
    let corners = [tri.a, tri.b, tri.c];
    let mut mids = [None; 3];
    for e in 0..3 {
        if !edges[e] {
            continue;
        }
        let (p, q) = (corners[e], corners[(e + 1) % 3]);
        match project_onto_boundary(p, q, sdf) {
            Some(m) => mids[e] = Some(m),
            None => {
                log::warn!("midnode projection failed on edge {:?}-{:?}; keeping a straight edge", p, q);
                return CurvedTriangle { straight_fallback: true, ..CurvedTriangle::straight(tri) };
            }
        }
    }
    CurvedTriangle::with_midnodes(tri, mids)
}

/// Zero of `sdf` closest to the midpoint of `p-q` along the edge normal.
pub fn project_onto_boundary<T: Real>(p: Point<T>, q: Point<T>, sdf: &SignedDistance<T>) -> Option<Point<T>> {
    let m = p.midpoint(q);
    let len = p.dist(q);
    if !(len > T::zero()) {
        return None;
    }
    let d0 = sdf.distance(m);
    if d0.abs() <= T::root_eps() {
        return Some(m);
    }
    let n = (q - p).perp() * (T::one() / len);
    const STEPS: usize = 16;
    let reach = len * T::lit(0.5);
    let mut best: Option<(T, Point<T>)> = None;
    for dir in [T::one(), -T::one()] {
        let mut prev = m;
        for k in 1..=STEPS {
            let t = reach * T::from_usize_lossy(k) / T::from_usize_lossy(STEPS);
            let x = m + n * (dir * t);
            let d = sdf.distance(x);
            if (d >= T::zero()) != (d0 >= T::zero()) {
                let root = sdf.bisect(prev, x);
                let dist = root.dist(m);
                if best.is_none_or(|(bd, _)| dist < bd) {
                    best = Some((dist, root));
                }
                break;
            }
            prev = x;
        }
    }
    best.map(|(_, r)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HalfPlane;

    #[test]
    fn gauss_rules_are_exact() {
        for n in 1..=20 {
            let r = gauss_interval::<f64>(n).unwrap();
            assert_eq!(r.len(), n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
        }
        let r = gauss_interval::<f64>(2).unwrap();
        let odd: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(3)).sum();
        assert!(odd.abs() < 1e-16);
        assert!(gauss_interval::<f64>(0).is_err());
    }

    #[test]
    fn triangle_tables_and_collapsed_rules() {
        for n in [1, 3, 4, 6, 7] {
            let r = triangle_rule_points::<f64>(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 0.5).abs() < 1e-14);
        }
        for d in 0..=20 {
            let r = triangle_rule::<f64>(d).unwrap();
            assert!(r.exactness >= d);
        }
        let r = triangle_rule::<f64>(4).unwrap();
        let v: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(2) * p[1].powi(2)).sum();
        assert!((v - 1.0 / 180.0).abs() < 1e-15);
        assert!(triangle_rule_points::<f64>(5).is_err());
        assert!(triangle_rule::<f32>(9).is_ok());
    }

    #[test]
    fn polygon_integrals() {
        let sq = ConvexPolygon::rectangle(Point::<f64>::new(0.0, 0.0), Point::<f64>::new(1.0, 1.0)).unwrap();
        assert!((integrate_over_polygon(|_| 1.0, &sq, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((integrate_over_polygon(|p| p.x + p.y, &sq, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn straight_boundary_midnode_stays() {
        let sdf = SignedDistance::HalfPlane(HalfPlane::new(Point::<f64>::new(1.0, 0.0), 0.5).unwrap());
        let tri = Triangle::new(Point::<f64>::new(0.0, 0.5), Point::<f64>::new(0.5, 0.0), Point::<f64>::new(0.5, 1.0));
        let c = project_midnodes(&tri, &sdf, [false, true, false]);
        assert!(!c.straight_fallback);
        assert!((c.nodes[4].x - 0.5).abs() < 1e-14 && (c.nodes[4].y - 0.5).abs() < 1e-14);
        assert!((c.area() - tri.signed_area()).abs() < 1e-14);
    }

    #[test]
    fn arc_midnode_lands_on_circle() {
        let sdf = SignedDistance::Circle { center: Point::<f64>::new(0.0, 0.0), radius: 1.0, inside: true };
        let a = Point::<f64>::new(1.0, 0.0);
        let b = Point::<f64>::new(0.5f64.cos(), 0.5f64.sin());
        let tri = Triangle::new(Point::<f64>::new(0.0, 0.0), a, b);
        let c = project_midnodes(&tri, &sdf, [false, true, false]);
        assert!(!c.straight_fallback);
        assert!(sdf.distance(c.nodes[4]).abs() <= 1e-12);
    }

    #[test]
    fn sliver_falls_back() {
        // boundary far from the short edge
        let sdf = SignedDistance::HalfPlane(HalfPlane::new(Point::<f64>::new(1.0, 0.0), 5.0).unwrap());
        let tri = Triangle::new(Point::<f64>::new(0.0, 0.0), Point::<f64>::new(1.0, 0.0), Point::<f64>::new(0.5, 1e-3));
        let c = project_midnodes(&tri, &sdf, [true, false, false]);
        assert!(c.straight_fallback);
        assert_eq!(c.nodes, CurvedTriangle::straight(&tri).nodes);
    }

    #[test]
    fn folded_map_keeps_signed_area() {
        let tri = Triangle::new(Point::<f64>::new(0.0, 0.2), Point::new(-1.0, 0.0), Point::new(1.0, 0.0));
        let c = CurvedTriangle::with_midnodes(&tri, [None, Some(Point::new(0.0, 0.12)), None]);
        assert!(c.is_folded() && !c.straight_fallback);
        // triangle minus the parabolic segment 2/3 * 2 * 0.12
        assert!((c.area() - 0.04).abs() < 1e-14, "{}", c.area());
    }
}
