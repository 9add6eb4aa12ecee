use super::{convex_hull, ConvexPolygon, HalfPlane, Point};
use crate::Real;

/// Implicit domain description. `distance` is positive inside the domain,
/// zero on its boundary and negative outside.
#[derive(Debug, Clone, PartialEq)]
pub enum SignedDistance<T> {
    HalfPlane(HalfPlane<T>),
    /// Disc (`inside = true`) or its complement, a circular hole.
    Circle { center: Point<T>, radius: T, inside: bool },
    /// Axis-aligned rectangle.
    Rect { min: Point<T>, max: Point<T> },
    /// Region bounded by a closed polyline (vertices in either orientation).
    Polygon(Vec<Point<T>>),
    /// Pointwise minimum of the children.
    Intersection(Vec<SignedDistance<T>>),
    /// Pointwise maximum of the children.
    Union(Vec<SignedDistance<T>>),
    Complement(Box<SignedDistance<T>>),
}

impl<T: Real> SignedDistance<T> {
    pub fn unit_square() -> Self {
        Self::Rect { min: Point::origin(), max: Point::new(T::one(), T::one()) }
    }

    /// Square `[0, side]^2` with a circular hole of `radius` at the origin.
    pub fn plate_with_hole(side: T, radius: T) -> Self {
        Self::Intersection(vec![
            Self::Rect { min: Point::origin(), max: Point::new(side, side) },
            Self::Circle { center: Point::origin(), radius, inside: false },
        ])
    }

    pub fn distance(&self, p: Point<T>) -> T {
        match self {
            Self::HalfPlane(h) => -h.distance(p),
            Self::Circle { center, radius, inside } => {
                let d = *radius - p.dist(*center);
                if *inside {
                    d
                } else {
                    -d
                }
            }
            Self::Rect { min, max } => {
                let dx = (min.x - p.x).max(p.x - max.x);
                let dy = (min.y - p.y).max(p.y - max.y);
                if dx <= T::zero() && dy <= T::zero() {
                    -dx.max(dy)
                } else {
                    -(dx.max(T::zero()).hypot(dy.max(T::zero())))
                }
            }
            Self::Polygon(v) => polygon_distance(v, p),
            Self::Intersection(c) => c.iter().map(|s| s.distance(p)).fold(T::infinity(), T::min),
            Self::Union(c) => c.iter().map(|s| s.distance(p)).fold(T::neg_infinity(), T::max),
            Self::Complement(s) => -s.distance(p),
        }
    }

    /// Root of the distance on the segment `a -> b` by bisection; requires a
    /// sign change between the endpoints.
    pub fn bisect(&self, a: Point<T>, b: Point<T>) -> Point<T> {
        let (mut lo, mut hi) = (a, b);
        let lo_sign = self.distance(a) >= T::zero();
        let tol = T::root_eps();
        for _ in 0..100 {
            let mid = lo.midpoint(hi);
            let d = self.distance(mid);
            if d == T::zero() {
                return mid;
            }
            if (d > T::zero()) == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
            if lo.dist(hi) <= tol {
                break;
            }
        }
        lo.midpoint(hi)
    }
}

fn polygon_distance<T: Real>(v: &[Point<T>], p: Point<T>) -> T {
    let n = v.len();
    let mut best = T::infinity();
    let mut winding = 0i32;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let e = b - a;
        let len2 = e.norm_sq();
        let t = if len2 > T::zero() { ((p - a).dot(e) / len2).max(T::zero()).min(T::one()) } else { T::zero() };
        best = best.min(p.dist(a + e * t));
        if a.y <= p.y {
            if b.y > p.y && e.cross(p - a) > T::zero() {
                winding += 1;
            }
        } else if b.y <= p.y && e.cross(p - a) < T::zero() {
            winding -= 1;
        }
    }
    if winding != 0 {
        best
    } else {
        -best
    }
}

/// Classification of a cell against the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellLabel {
    /// Completely inside the domain.
    Interior,
    /// Straddles the boundary; integrated over its clipped part.
    Cut,
    /// Outside the domain but its basis reaches into it.
    Ghost,
    /// Outside the domain and irrelevant to it.
    Exterior,
}

/// Sign test on the cell vertices (`min phi * max phi < 0` means cut).
pub fn classify_polygon<T: Real>(cell: &ConvexPolygon<T>, sdf: &SignedDistance<T>) -> CellLabel {
    if cell.is_empty() {
        return CellLabel::Exterior;
    }
    let tol = T::root_eps().max(T::geom_eps() * cell.feature_size());
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for v in cell.vertices() {
        let d = sdf.distance(*v);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo >= -tol && hi > tol {
        CellLabel::Interior
    } else if hi <= tol {
        CellLabel::Exterior
    } else {
        CellLabel::Cut
    }
}

/// Cell ∩ domain as the convex hull of the inside vertices and the edge
/// crossings of the zero level set.
pub fn clip_cell_to_domain<T: Real>(cell: &ConvexPolygon<T>, sdf: &SignedDistance<T>) -> ConvexPolygon<T> {
    if cell.is_empty() {
        return ConvexPolygon::empty();
    }
    let tol = T::root_eps().max(T::geom_eps() * cell.feature_size());
    let inside = |q: Point<T>| sdf.distance(q) >= T::zero();
    let mut pts = Vec::new();
    for (a, b) in cell.edges() {
        let mut prev = a;
        let mut was_in = inside(a);
        if sdf.distance(a) >= -tol {
            pts.push(a);
        }
        for k in 1..=EDGE_SAMPLES {
            let q = a.lerp(b, T::from_usize_lossy(k) / T::from_usize_lossy(EDGE_SAMPLES));
            let is_in = inside(q);
            if is_in != was_in {
                pts.push(if is_in { bisect_inside(prev, q, &inside) } else { bisect_inside(q, prev, &inside) });
            }
            if sdf.distance(q) >= -tol {
                pts.push(q);
            }
            prev = q;
            was_in = is_in;
        }
    }
    match convex_hull(&pts) {
        Ok(p) => p,
        Err(_) => ConvexPolygon::empty(),
    }
}

/// Edges are sub-sampled so a boundary entering and leaving one edge is seen.
pub(crate) const EDGE_SAMPLES: usize = 8;

/// Last inside point on `out -> inn` where `inside` flips.
fn bisect_inside<T: Real>(out: Point<T>, inn: Point<T>, inside: &impl Fn(Point<T>) -> bool) -> Point<T> {
    let (mut lo, mut hi) = (out, inn);
    for _ in 0..100 {
        if lo.dist(hi) <= T::root_eps() {
            break;
        }
        let mid = lo.midpoint(hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    #[test]
    fn distances_follow_sign_convention() {
        let plate = SignedDistance::plate_with_hole(1.0, 0.25);
        assert!((plate.distance(p(0.0, 0.0)) + 0.25).abs() < 1e-15);
        let sq = SignedDistance::unit_square();
        assert!((sq.distance(p(0.5, 0.5)) - 0.5).abs() < 1e-15);
        assert!(sq.distance(p(1.0, 0.3)).abs() < 1e-15);
        assert!((sq.distance(p(2.0, 2.0)) + 2f64.sqrt()).abs() < 1e-15);
        let disc = SignedDistance::Circle { center: p(0.0, 0.0), radius: 1.0, inside: true };
        assert!((disc.distance(p(0.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_sdf_matches_rect() {
        let poly = SignedDistance::Polygon(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]);
        let rect = SignedDistance::unit_square();
        for q in [p(0.2, 0.7), p(-0.5, 0.5), p(1.5, 2.0), p(0.5, 0.5)] {
            assert!((poly.distance(q) - rect.distance(q)).abs() < 1e-14);
        }
    }

    #[test]
    fn classification() {
        let disc = SignedDistance::Circle { center: p(0.0, 0.0), radius: 1.0, inside: true };
        let inner = ConvexPolygon::rectangle(p(-0.1, -0.1), p(0.1, 0.1)).unwrap();
        let outer = ConvexPolygon::rectangle(p(2.0, 2.0), p(3.0, 3.0)).unwrap();
        let cut = ConvexPolygon::rectangle(p(0.5, -0.1), p(1.5, 0.1)).unwrap();
        assert_eq!(classify_polygon(&inner, &disc), CellLabel::Interior);
        assert_eq!(classify_polygon(&outer, &disc), CellLabel::Exterior);
        assert_eq!(classify_polygon(&cut, &disc), CellLabel::Cut);
    }

    #[test]
    fn clip_by_straight_boundary() {
        let sq = ConvexPolygon::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
        let half = SignedDistance::HalfPlane(HalfPlane::new(p(1.0, 0.0), 0.5).unwrap());
        let c = clip_cell_to_domain(&sq, &half);
        assert!((c.area() - 0.5).abs() < 1e-11);
        for v in c.vertices() {
            assert!(v.x <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn tangent_vertex_changes_nothing() {
        let sq = ConvexPolygon::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
        let half = SignedDistance::HalfPlane(HalfPlane::new(p(1.0, 1.0), 2.0).unwrap());
        let c = clip_cell_to_domain(&sq, &half);
        assert!((c.area() - 1.0).abs() <= 1e-10);
    }
}
