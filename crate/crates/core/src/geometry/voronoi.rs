use rayon::prelude::*;

use super::{clip_halfplane, BucketGrid, CellLabel, ConvexPolygon, GeometryError, HalfPlane, Point, SignedDistance};
use crate::Real;

/// Voronoi cells of a seed set restricted to a convex bounding region.
#[derive(Debug, Clone)]
pub struct VoronoiDiagram<T> {
    pub seeds: Vec<Point<T>>,
    pub cells: Vec<ConvexPolygon<T>>,
    pub labels: Vec<CellLabel>,
}

/// Voronoi diagram of `seeds` clipped to `bounds`.
///
/// Each cell is the bounding polygon cut by the bisectors of nearby seeds;
/// candidate seeds are visited in growing rings of a bucket grid until no
/// further seed can reach the current cell.
pub fn voronoi<T: Real>(seeds: &[Point<T>], bounds: &ConvexPolygon<T>) -> Result<VoronoiDiagram<T>, GeometryError> {
    if seeds.is_empty() {
        return Err(GeometryError::Degenerate("no seeds"));
    }
    if seeds.iter().any(|s| !s.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let bb = bounds.aabb().ok_or(GeometryError::Degenerate("empty bounds"))?;
    let all = super::Aabb::from_points(seeds).unwrap().union(&bb);
    let mut grid = BucketGrid::new(all, seeds.len());
    for (i, s) in seeds.iter().enumerate() {
        grid.insert_point(*s, i);
    }
    let dup_tol = T::geom_eps() * all.width().hypot(all.height());
    let cs = grid.cell_size();

    let cells: Result<Vec<_>, GeometryError> = (0..seeds.len())
        .into_par_iter()
        .map(|i| {
            let si = seeds[i];
            let (bi, bj) = grid.locate(si);
            let mut poly = bounds.clone();
            let mut ring = 0usize;
            loop {
                let mut err = None;
                let mut neigh: Vec<usize> = Vec::new();
                let inside = grid.visit_ring(bi, bj, ring, |ids| neigh.extend_from_slice(ids));
                neigh.sort_unstable();
                for j in neigh {
                    if j == i {
                        continue;
                    }
                    let sj = seeds[j];
                    if si.dist(sj) <= dup_tol {
                        err = Some(GeometryError::DuplicateSeed(i.min(j), i.max(j)));
                        break;
                    }
                    if poly.is_empty() {
                        continue;
                    }
                    let h = HalfPlane::bisector(si, sj)?;
                    poly = clip_halfplane(&poly, &h);
                }
                if let Some(e) = err {
                    return Err(e);
                }
                if !inside {
                    break;
                }
                let reach = poly.vertices().iter().fold(T::zero(), |m, v| m.max(v.dist(si)));
                // seeds beyond ring r are at least r*cs away
                if poly.is_empty() || T::from_usize_lossy(ring) * cs > reach + reach {
                    break;
                }
                ring += 1;
            }
            Ok(poly)
        })
        .collect();
    let cells = cells?;
    let labels = vec![CellLabel::Interior; cells.len()];
    Ok(VoronoiDiagram { seeds: seeds.to_vec(), cells, labels })
}

/// Labels every cell by the vertex sign test; ghost labelling is left to
/// the mesh builder.
pub fn classify_cells<T: Real>(mut vd: VoronoiDiagram<T>, sdf: &SignedDistance<T>) -> VoronoiDiagram<T> {
    vd.labels = vd.cells.iter().map(|c| super::classify_polygon(c, sdf)).collect();
    vd
}
