use super::{Aabb, GeometryError, Point};
use crate::Real;

/// Oriented half-plane `{p : normal · p <= offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane<T> {
    pub normal: Point<T>,
    pub offset: T,
}

impl<T: Real> HalfPlane<T> {
    /// Builds a half-plane, normalising the normal vector.
    pub fn new(normal: Point<T>, offset: T) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if !(n > T::zero()) || !n.is_finite() || !offset.is_finite() {
            return Err(GeometryError::InvalidHalfPlane);
        }
        Ok(Self { normal: normal * (T::one() / n), offset: offset / n })
    }

    /// Points closer to `own` than to `other`.
    pub fn bisector(own: Point<T>, other: Point<T>) -> Result<Self, GeometryError> {
        let d = other - own;
        Self::new(d, d.dot(own.midpoint(other)))
    }

    /// Signed distance to the boundary line, positive outside.
    #[inline]
    pub fn distance(&self, p: Point<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    #[inline]
    pub fn contains(&self, p: Point<T>) -> bool {
        self.distance(p) <= T::zero()
    }
}

/// Axis-aligned square given by centre and half side length.
///
/// This is the support of the tensor-product mollifier; its side is `h_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareBox<T> {
    pub center: Point<T>,
    pub halfwidth: T,
}

impl<T: Real> SquareBox<T> {
    pub fn new(center: Point<T>, halfwidth: T) -> Result<Self, GeometryError> {
        if !(halfwidth > T::zero()) || !center.is_finite() {
            return Err(GeometryError::InvalidBox);
        }
        Ok(Self { center, halfwidth })
    }

    pub fn corners(&self) -> [Point<T>; 4] {
        let (c, w) = (self.center, self.halfwidth);
        [
            Point::new(c.x - w, c.y - w),
            Point::new(c.x + w, c.y - w),
            Point::new(c.x + w, c.y + w),
            Point::new(c.x - w, c.y + w),
        ]
    }

    pub fn half_planes(&self) -> [HalfPlane<T>; 4] {
        let (c, w) = (self.center, self.halfwidth);
        let (o, l) = (T::zero(), T::one());
        [
            HalfPlane { normal: Point::new(l, o), offset: c.x + w },
            HalfPlane { normal: Point::new(-l, o), offset: -(c.x - w) },
            HalfPlane { normal: Point::new(o, l), offset: c.y + w },
            HalfPlane { normal: Point::new(o, -l), offset: -(c.y - w) },
        ]
    }

    pub fn aabb(&self) -> Aabb<T> {
        let c = self.corners();
        Aabb { min: c[0], max: c[2] }
    }

    pub fn to_polygon(&self) -> ConvexPolygon<T> {
        ConvexPolygon { vertices: self.corners().to_vec() }
    }

    pub fn area(&self) -> T {
        let s = self.halfwidth + self.halfwidth;
        s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle<T> {
    pub a: Point<T>,
    pub b: Point<T>,
    pub c: Point<T>,
}

impl<T: Real> Triangle<T> {
    pub fn new(a: Point<T>, b: Point<T>, c: Point<T>) -> Self {
        Self { a, b, c }
    }

    /// Signed area, positive for counter-clockwise orientation.
    pub fn signed_area(&self) -> T {
        (self.b - self.a).cross(self.c - self.a) * T::lit(0.5)
    }

    pub fn centroid(&self) -> Point<T> {
        (self.a + self.b + self.c) * (T::one() / T::lit(3.0))
    }

    /// Maps reference coordinates on `(0,0),(1,0),(0,1)` to the triangle.
    #[inline]
    pub fn map(&self, r: T, s: T) -> Point<T> {
        self.a + (self.b - self.a) * r + (self.c - self.a) * s
    }
}

/// Convex polygon with counter-clockwise vertices; no vertices means empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon<T> {
    vertices: Vec<Point<T>>,
}

impl<T: Real> ConvexPolygon<T> {
    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Validates a vertex loop. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point<T>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate("fewer than three vertices"));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if signed_area(&vertices) < T::zero() {
            vertices.reverse();
        }
        let poly = Self { vertices };
        let l = poly.feature_size();
        let eps = T::geom_eps();
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let c = poly.vertices[(i + 2) % n];
            if a.dist(b) <= eps * l {
                return Err(GeometryError::DuplicateVertex(i));
            }
            if (b - a).cross(c - b) < -eps * l * l {
                return Err(GeometryError::NotConvex(i));
            }
        }
        if !(poly.area() > eps * l * l) {
            return Err(GeometryError::Degenerate("zero area"));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle.
    pub fn rectangle(min: Point<T>, max: Point<T>) -> Result<Self, GeometryError> {
        Self::new(vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)])
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    #[inline]
    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Directed edges `(v_k, v_{k+1})`.
    pub fn edges(&self) -> impl Iterator<Item = (Point<T>, Point<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point<T> {
        let n = self.vertices.len();
        if n == 0 {
            return Point::origin();
        }
        // shift to the first vertex to limit cancellation
        let o = self.vertices[0];
        let mut a2 = T::zero();
        let mut c = Point::origin();
        for i in 1..n.saturating_sub(1) {
            let p = self.vertices[i] - o;
            let q = self.vertices[i + 1] - o;
            let w = p.cross(q);
            a2 += w;
            c += (p + q) * w;
        }
        if a2 == T::zero() {
            let mut s = Point::origin();
            for v in &self.vertices {
                s += *v;
            }
            return s * (T::one() / T::from_usize_lossy(n));
        }
        o + c * (T::one() / (T::lit(3.0) * a2))
    }

    pub fn perimeter(&self) -> T {
        self.edges().fold(T::zero(), |acc, (a, b)| acc + a.dist(b))
    }

    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    pub fn aabb(&self) -> Option<Aabb<T>> {
        Aabb::from_points(&self.vertices)
    }

    /// Bounding-box diagonal, the length scale for relative tolerances.
    pub fn feature_size(&self) -> T {
        self.aabb().map(|b| b.width().hypot(b.height())).unwrap_or_else(T::zero)
    }

    /// Point membership with an absolute tolerance on the edge distance.
    pub fn contains(&self, p: Point<T>, tol: T) -> bool {
        if self.is_empty() {
            return false;
        }
        self.edges().all(|(a, b)| {
            let e = b - a;
            let len = e.norm();
            len == T::zero() || e.cross(p - a) >= -tol * len
        })
    }

    pub fn translate(&self, d: Point<T>) -> Self {
        Self { vertices: self.vertices.iter().map(|v| *v + d).collect() }
    }

    /// Maps every vertex through `p -> (p - origin) * s`.
    pub fn to_local(&self, origin: Point<T>, s: T) -> Self {
        Self { vertices: self.vertices.iter().map(|v| (*v - origin) * s).collect() }
    }

    /// Half-planes whose intersection is the polygon.
    pub fn half_planes(&self) -> Vec<HalfPlane<T>> {
        self.edges()
            .filter_map(|(a, b)| {
                let e = b - a;
                let n = Point::new(e.y, -e.x);
                HalfPlane::new(n, n.dot(a)).ok()
            })
            .collect()
    }
}

pub(crate) fn signed_area<T: Real>(v: &[Point<T>]) -> T {
    let n = v.len();
    if n < 3 {
        return T::zero();
    }
    let o = v[0];
    let mut a = T::zero();
    for i in 1..n - 1 {
        a += (v[i] - o).cross(v[i + 1] - o);
    }
    a * T::lit(0.5)
}

/// Removes near-duplicate and collinear vertices and snaps slivers to empty.
pub(crate) fn cleanup<T: Real>(mut v: Vec<Point<T>>, length_scale: T) -> ConvexPolygon<T> {
    let eps = T::geom_eps();
    let tol = eps * length_scale;
    // consecutive duplicates, including the wrap-around pair
    let mut out: Vec<Point<T>> = Vec::with_capacity(v.len());
    for p in v.drain(..) {
        if out.last().is_none_or(|q| q.dist(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
        out.pop();
    }
    // collinear middle vertices
    let mut changed = true;
    while changed && out.len() >= 3 {
        changed = false;
        let n = out.len();
        for i in 0..n {
            let a = out[(i + n - 1) % n];
            let b = out[i];
            let c = out[(i + 1) % n];
            let cr = (b - a).cross(c - b);
            if cr.abs() <= tol * (c - a).norm() {
                out.remove(i);
                changed = true;
                break;
            }
        }
    }
    if out.len() < 3 || signed_area(&out) <= eps * length_scale * length_scale {
        return ConvexPolygon::empty();
    }
    ConvexPolygon { vertices: out }
}

/// Intersection of a convex polygon with a half-plane.
pub fn clip_halfplane<T: Real>(poly: &ConvexPolygon<T>, h: &HalfPlane<T>) -> ConvexPolygon<T> {
    if poly.is_empty() {
        return ConvexPolygon::empty();
    }
    let l = poly.feature_size();
    let tol = T::geom_eps() * l;
    let d: Vec<T> = poly.vertices.iter().map(|p| h.distance(*p)).collect();
    if d.iter().all(|&x| x <= tol) {
        return poly.clone();
    }
    if d.iter().all(|&x| x > -tol) {
        return ConvexPolygon::empty();
    }
    let n = poly.vertices.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + n - 1) % n;
        let (cur, prev) = (poly.vertices[i], poly.vertices[j]);
        let (dc, dp) = (d[i], d[j]);
        let cur_in = dc <= tol;
        let prev_in = dp <= tol;
        let crossing = |a: Point<T>, da: T, b: Point<T>, db: T| {
            let den = da - db;
            let t = if den == T::zero() { T::zero() } else { (da / den).max(T::zero()).min(T::one()) };
            a.lerp(b, t)
        };
        if cur_in {
            if !prev_in {
                out.push(crossing(prev, dp, cur, dc));
            }
            out.push(cur);
        } else if prev_in {
            out.push(crossing(prev, dp, cur, dc));
        }
    }
    cleanup(out, l)
}

/// Intersection of a convex polygon with the mollifier box.
pub fn intersect_box<T: Real>(poly: &ConvexPolygon<T>, b: &SquareBox<T>) -> ConvexPolygon<T> {
    let Some(pb) = poly.aabb() else {
        return ConvexPolygon::empty();
    };
    let bb = b.aabb();
    if !pb.overlaps(&bb) {
        return ConvexPolygon::empty();
    }
    if bb.contains(pb.min, T::zero()) && bb.contains(pb.max, T::zero()) {
        return poly.clone();
    }
    let mut out = poly.clone();
    for h in b.half_planes() {
        out = clip_halfplane(&out, &h);
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Intersection of two convex polygons.
pub fn intersect_convex<T: Real>(a: &ConvexPolygon<T>, b: &ConvexPolygon<T>) -> ConvexPolygon<T> {
    match (a.aabb(), b.aabb()) {
        (Some(ba), Some(bb)) if ba.overlaps(&bb) => {}
        _ => return ConvexPolygon::empty(),
    }
    let mut out = a.clone();
    for h in b.half_planes() {
        out = clip_halfplane(&out, &h);
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Centroid fan triangulation `(centroid, v_k, v_{k+1})`.
pub fn triangulate<T: Real>(poly: &ConvexPolygon<T>) -> Vec<Triangle<T>> {
    let c = poly.centroid();
    poly.edges().map(|(a, b)| Triangle::new(c, a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn unit_square() -> ConvexPolygon<f64> {
        ConvexPolygon::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap()
    }

    #[test]
    fn clip_bisects_square() {
        let h = HalfPlane::new(p(1.0, 0.0), 0.5).unwrap();
        let c = clip_halfplane(&unit_square(), &h);
        assert!((c.area() - 0.5).abs() < 1e-15);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn clip_noop() {
        let h = HalfPlane::new(p(1.0, 0.0), 2.0).unwrap();
        assert_eq!(clip_halfplane(&unit_square(), &h), unit_square());
    }

    #[test]
    fn clip_corner_triangle() {
        let h = HalfPlane::new(p(1.0, 1.0), 0.5).unwrap();
        let c = clip_halfplane(&unit_square(), &h);
        assert_eq!(c.len(), 3);
        assert!((c.area() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn clip_to_nothing_and_tangent() {
        let h = HalfPlane::new(p(1.0, 0.0), -0.1).unwrap();
        assert!(clip_halfplane(&unit_square(), &h).is_empty());
        // touching along an edge leaves nothing of positive area
        let h = HalfPlane::new(p(1.0, 0.0), 0.0).unwrap();
        assert!(clip_halfplane(&unit_square(), &h).is_empty());
    }

    #[test]
    fn box_containment_and_disjoint() {
        let sq = ConvexPolygon::rectangle(p(0.0, 0.0), p(2.0, 2.0)).unwrap();
        let inside = SquareBox::new(p(1.0, 1.0), 1.0).unwrap();
        assert_eq!(intersect_box(&sq, &inside), sq);
        let far = SquareBox::new(p(5.0, 5.0), 1.0).unwrap();
        assert!(intersect_box(&sq, &far).is_empty());
    }

    #[test]
    fn rejects_invalid_polygons() {
        assert!(ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        let dart = vec![p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.3), p(1.0, 2.0)];
        assert!(matches!(ConvexPolygon::new(dart), Err(GeometryError::NotConvex(_))));
        let cw = vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0)];
        let poly = ConvexPolygon::new(cw).unwrap();
        assert!(poly.area() > 0.0);
        assert!(HalfPlane::new(p(0.0, 0.0), 1.0).is_err());
        assert!(SquareBox::new(p(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn triangulation_of_square() {
        let t = triangulate(&unit_square());
        assert_eq!(t.len(), 4);
        for tri in t {
            assert!((tri.signed_area() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_fan_of_triangle() {
        let tri = ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
        let parts = triangulate(&tri);
        assert_eq!(parts.len(), 3);
        let s: f64 = parts.iter().map(|t| t.signed_area()).sum();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_precision_clip() {
        let sq = ConvexPolygon::<f32>::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let h = HalfPlane::new(Point::new(1.0f32, 0.0), 0.25).unwrap();
        assert!((clip_halfplane(&sq, &h).area() - 0.25).abs() < 1e-6);
    }
}
