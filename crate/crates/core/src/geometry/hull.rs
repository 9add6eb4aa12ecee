use super::polygon::cleanup;
use super::{ConvexPolygon, GeometryError, Point, SquareBox};
use crate::Real;

/// Convex hull by gift wrapping, counter-clockwise, collinear points
/// dropped. Of several points collinear with the current vertex the
/// farthest is taken, so nearly straight runs never lose their end points.
pub fn convex_hull<T: Real>(points: &[Point<T>]) -> Result<ConvexPolygon<T>, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut pts: Vec<Point<T>> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate("fewer than three distinct points"));
    }
    let scale = {
        let b = super::Aabb::from_points(&pts).unwrap();
        b.width().hypot(b.height())
    };
    let tol = T::geom_eps() * scale;
    // extreme in a direction unlikely to be normal to an edge
    let dir = Point::new(T::one(), T::lit(std::f64::consts::FRAC_1_PI));
    let start = (0..pts.len())
        .min_by(|&i, &j| pts[i].dot(dir).partial_cmp(&pts[j].dot(dir)).unwrap())
        .expect("non-empty");
    let mut hull = vec![pts[start]];
    let mut cur = start;
    for _ in 0..=pts.len() {
        let o = pts[cur];
        let mut next = if cur == 0 { 1 } else { 0 };
        for (r, &p) in pts.iter().enumerate() {
            if r == cur || r == next {
                continue;
            }
            let d = pts[next] - o;
            let e = p - o;
            let len = d.norm().max(e.norm());
            let cr = d.cross(e);
            if cr < -tol * len || (cr.abs() <= tol * len && d.dot(e) > T::zero() && e.norm_sq() > d.norm_sq()) {
                next = r;
            }
        }
        if next == start {
            break;
        }
        hull.push(pts[next]);
        cur = next;
    }
    let poly = cleanup(hull, scale);
    if poly.is_empty() {
        return Err(GeometryError::Degenerate("collinear points"));
    }
    Ok(poly)
}

/// Minkowski sum of a convex polygon with an origin-centred box: the hull
/// of the box corners placed at every polygon vertex.
pub fn minkowski_sum<T: Real>(poly: &ConvexPolygon<T>, b: &SquareBox<T>) -> ConvexPolygon<T> {
    if poly.is_empty() {
        return ConvexPolygon::empty();
    }
    let w = b.halfwidth;
    let offsets = [Point::new(-w, -w), Point::new(w, -w), Point::new(w, w), Point::new(-w, w)];
    let pts: Vec<Point<T>> = poly.vertices().iter().flat_map(|v| offsets.iter().map(move |o| *v + *o)).collect();
    convex_hull(&pts).expect("sum of a polygon and a box has positive area")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    #[test]
    fn hull_absorbs_interior_point() {
        let pts = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.5, 0.5)];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nearly_vertical_edge_keeps_its_corners() {
        let v = [
            p(0.24999999999999997, 0.0833333333333334),
            p(0.24999999999999994, 0.1666666666666667),
            p(0.16666666666666666, 0.16666666666666674),
            p(0.16666666666666666, 0.08333333333333345),
        ];
        let poly = ConvexPolygon::new(v.to_vec()).unwrap();
        let mut pts = Vec::new();
        for (a, b) in poly.edges() {
            for k in 0..8 {
                pts.push(a.lerp(b, k as f64 / 8.0));
            }
        }
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!((h.area() - poly.area()).abs() < 1e-15);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = [p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0)];
        assert!(matches!(convex_hull(&pts), Err(GeometryError::Degenerate(_))));
    }

    #[test]
    fn square_plus_box() {
        let sq = ConvexPolygon::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
        let b = SquareBox::new(p(0.0, 0.0), 0.5).unwrap();
        let m = minkowski_sum(&sq, &b);
        assert_eq!(m.len(), 4);
        assert!((m.area() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_plus_box_is_pentagon() {
        let t = ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
        let b = SquareBox::new(p(0.0, 0.0), 0.5).unwrap();
        let m = minkowski_sum(&t, &b);
        // area = |T| + (width of T along x)*1 + (height along y)*1 + |B|
        // = 0.5 + 1 + 1 + 1 for the axis-aligned box
        assert!((m.area() - 3.5).abs() < 1e-14, "{}", m.area());
        assert_eq!(m.len(), 5);
    }
}
