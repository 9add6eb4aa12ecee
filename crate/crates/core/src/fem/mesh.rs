use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::FemError;
use crate::basis::{self, BasisValue, CellBasis};
use crate::geometry::{
    classify_polygon, clip_cell_to_domain, intersect_convex, triangulate, voronoi, Aabb, BucketGrid, CellLabel,
    ConvexPolygon, Point, SignedDistance,
};
use crate::mollifier::{Mollifier1D, MollifierTensor};
use crate::quadrature::{project_onto_boundary, CurvedTriangle};
use crate::Real;

#[derive(Debug, Clone)]
pub struct MeshOptions<T> {
    /// Degree of the local polynomials.
    pub degree: usize,
    pub mollifier: Mollifier1D<T>,
    /// Project boundary midnodes onto the level set (quadratic geometry).
    pub curved: bool,
    /// Monomial scale `h`; defaults to `sqrt(area / n_c)`.
    pub scale: Option<T>,
}

/// Piece of the domain boundary inside one cell, oriented with the domain
/// on its left. `mid` is the chord midpoint, or the projected midnode of a
/// quadratic arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment<T> {
    pub a: Point<T>,
    pub b: Point<T>,
    pub mid: Point<T>,
    pub curved: bool,
}

impl<T: Real> BoundarySegment<T> {
    /// Position and tangent at `t ∈ [0, 1]`.
    pub fn eval(&self, t: T) -> (Point<T>, Point<T>) {
        if !self.curved {
            return (self.a.lerp(self.b, t), self.b - self.a);
        }
        let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
        let na = (one - t) * (one - two * t);
        let nm = four * t * (one - t);
        let nb = t * (two * t - one);
        let da = four * t - T::lit(3.0);
        let dm = four - T::lit(8.0) * t;
        let db = four * t - one;
        (self.a * na + self.mid * nm + self.b * nb, self.a * da + self.mid * dm + self.b * db)
    }

    /// Outward unit normal for a tangent from [`Self::eval`].
    pub fn normal(tangent: Point<T>) -> Point<T> {
        Point::new(tangent.y, -tangent.x) * (T::one() / tangent.norm())
    }
}

#[derive(Debug, Clone)]
pub struct MeshCell<T> {
    /// Generating seed, or the centroid for cells without one.
    pub center: Point<T>,
    pub polygon: ConvexPolygon<T>,
    pub label: CellLabel,
    /// Integration domain (cell ∩ Ω); empty for ghost and exterior cells.
    pub domain: ConvexPolygon<T>,
    pub support: ConvexPolygon<T>,
    pub basis: CellBasis<T>,
    pub boundary: Vec<BoundarySegment<T>>,
}

/// Partition of a padded region into convex cells, classified against a
/// signed distance description of the domain.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub cells: Vec<MeshCell<T>>,
    pub sdf: SignedDistance<T>,
    pub mollifier: MollifierTensor<T>,
    pub degree: usize,
    pub scale: T,
    pub curved: bool,
    pub bounds: ConvexPolygon<T>,
    support_index: BucketGrid<T>,
}

impl<T: Real> Mesh<T> {
    /// Voronoi mesh of `seeds` clipped to `bounds`; seeds double as centres.
    pub fn from_seeds(
        seeds: &[Point<T>],
        bounds: &ConvexPolygon<T>,
        sdf: &SignedDistance<T>,
        opts: &MeshOptions<T>,
    ) -> Result<Self, FemError> {
        let vd = voronoi(seeds, bounds)?;
        Self::from_cells(vd.cells, vd.seeds, bounds, sdf, opts)
    }

    pub fn from_cells(
        polygons: Vec<ConvexPolygon<T>>,
        centers: Vec<Point<T>>,
        bounds: &ConvexPolygon<T>,
        sdf: &SignedDistance<T>,
        opts: &MeshOptions<T>,
    ) -> Result<Self, FemError> {
        if polygons.len() != centers.len() {
            return Err(FemError::InvalidConfig("one centre per cell required".into()));
        }
        let m = MollifierTensor::new(opts.mollifier.clone());
        let pre: Vec<(CellLabel, ConvexPolygon<T>)> =
            polygons.par_iter().map(|poly| domain_part(poly, sdf)).collect();
        let n_domain = pre.iter().filter(|(_, d)| !d.is_empty()).count();
        if n_domain == 0 {
            return Err(FemError::NoActiveCells);
        }
        let area: T = pre.iter().fold(T::zero(), |a, (_, d)| a + if d.is_empty() { T::zero() } else { d.area() });
        let scale = opts.scale.unwrap_or_else(|| (area / T::from_usize_lossy(n_domain)).sqrt());

        // ghost coverage: every box centred in the domain must lie in the bounds
        let box_at_origin = m.support_box(Point::origin());
        for (_, d) in &pre {
            for v in d.vertices() {
                for c in box_at_origin.corners() {
                    let q = *v + c;
                    if !bounds.contains(q, T::geom_eps() * bounds.feature_size()) {
                        return Err(FemError::GhostCoverage { x: v.x.to_f64_lossy(), y: v.y.to_f64_lossy() });
                    }
                }
            }
        }

        let bb = bounds.aabb().ok_or(FemError::NoActiveCells)?;
        let cells: Vec<MeshCell<T>> = polygons
            .into_par_iter()
            .zip(centers.into_par_iter())
            .zip(pre.into_par_iter())
            .enumerate()
            .map(|(i, ((polygon, center), (label, domain)))| {
                let boundary =
                    if domain.is_empty() { Vec::new() } else { boundary_segments(&domain, sdf, opts.curved) };
                MeshCell {
                    center,
                    basis: CellBasis::new_2d(i, center, scale, opts.degree),
                    support: basis::support(&polygon, &m),
                    polygon,
                    label,
                    domain,
                    boundary,
                }
            })
            .collect();
        let mut mesh = Self {
            cells,
            sdf: sdf.clone(),
            mollifier: m,
            degree: opts.degree,
            scale,
            curved: opts.curved,
            bounds: bounds.clone(),
            support_index: BucketGrid::new(bb, 1),
        };
        mesh.finish_labels();
        mesh.check_coverage()?;
        let mut idx = BucketGrid::new(bb, mesh.cells.len());
        for (i, c) in mesh.cells.iter().enumerate() {
            if matches!(c.label, CellLabel::Exterior) {
                continue;
            }
            if let Some(a) = c.support.aabb() {
                idx.insert_aabb(&a, i);
            }
        }
        mesh.support_index = idx;
        Ok(mesh)
    }

    /// Cells without a domain part are ghosts when their support overlaps
    /// some integration domain with positive area.
    fn finish_labels(&mut self) {
        let bb = self.bounds.aabb().expect("bounds");
        let mut index = BucketGrid::new(bb, self.cells.len());
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(a) = c.domain.aabb() {
                index.insert_aabb(&a, i);
            }
        }
        let labels: Vec<CellLabel> = self
            .cells
            .par_iter()
            .map(|c| {
                if !c.domain.is_empty() {
                    return c.label;
                }
                let Some(sb) = c.support.aabb() else {
                    return CellLabel::Exterior;
                };
                let mut seen = Vec::new();
                let (i0, j0) = index.locate(sb.min);
                let (i1, j1) = index.locate(sb.max);
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        seen.extend_from_slice(index.bucket(i, j));
                    }
                }
                seen.sort_unstable();
                seen.dedup();
                let hit = seen.into_iter().any(|k| {
                    let o = intersect_convex(&c.support, &self.cells[k].domain);
                    !o.is_empty()
                });
                if hit {
                    CellLabel::Ghost
                } else {
                    CellLabel::Exterior
                }
            })
            .collect();
        for (c, l) in self.cells.iter_mut().zip(labels) {
            c.label = l;
        }
    }

    /// Samples the domain and checks that every clearly interior point is
    /// covered by an integration domain.
    fn check_coverage(&self) -> Result<(), FemError> {
        let polys: Vec<&ConvexPolygon<T>> = self.cells.iter().map(|c| &c.domain).filter(|d| !d.is_empty()).collect();
        let pts: Vec<Point<T>> = polys.iter().flat_map(|p| p.vertices().iter().copied()).collect();
        let Some(bb) = Aabb::from_points(&pts) else {
            return Err(FemError::NoActiveCells);
        };
        let mut index = BucketGrid::new(bb, polys.len());
        for (i, p) in polys.iter().enumerate() {
            index.insert_aabb(&p.aabb().expect("non-empty"), i);
        }
        let n = 64;
        let margin = self.scale * T::lit(0.25);
        let tol = T::geom_eps() * self.scale;
        for j in 0..n {
            for i in 0..n {
                let fx = (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(n);
                let fy = (T::from_usize_lossy(j) + T::lit(0.5)) / T::from_usize_lossy(n);
                let p = Point::new(bb.min.x + bb.width() * fx, bb.min.y + bb.height() * fy);
                if self.sdf.distance(p) <= margin {
                    continue;
                }
                if !index.query(p).iter().any(|k| polys[*k].contains(p, tol)) {
                    return Err(FemError::Coverage { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
                }
            }
        }
        Ok(())
    }

    pub fn count(&self, label: CellLabel) -> usize {
        self.cells.iter().filter(|c| c.label == label).count()
    }

    /// Cells with an integration domain.
    pub fn domain_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, c)| !c.domain.is_empty()).map(|(i, _)| i)
    }

    pub fn domain_area(&self) -> T {
        self.cells.iter().filter(|c| !c.domain.is_empty()).fold(T::zero(), |a, c| a + c.domain.area())
    }

    /// Cells whose support box may contain `p`, in ascending order.
    pub fn candidates(&self, p: Point<T>) -> &[usize] {
        self.support_index.query(p)
    }

    pub fn eval_basis(&self, cell: usize, p: Point<T>) -> BasisValue<T> {
        let c = &self.cells[cell];
        basis::eval_2d(&c.basis, &c.polygon, &self.mollifier, p)
    }

    /// All cells with a non-zero basis at `p`, with their values.
    pub fn basis_at(&self, p: Point<T>) -> Vec<(usize, BasisValue<T>)> {
        let mut ids = self.candidates(p).to_vec();
        ids.sort_unstable();
        ids.into_iter()
            .filter_map(|i| {
                let v = self.eval_basis(i, p);
                (!v.is_zero()).then_some((i, v))
            })
            .collect()
    }

    /// `|supp ∩ Ω_h| / |supp|` with `Ω_h` the union of integration domains.
    pub fn support_fraction(&self, cell: usize) -> T {
        let s = &self.cells[cell].support;
        let Some(bb) = s.aabb() else {
            return T::zero();
        };
        let mut inside = T::zero();
        for c in &self.cells {
            if c.domain.is_empty() {
                continue;
            }
            if !c.domain.aabb().is_some_and(|a| a.overlaps(&bb)) {
                continue;
            }
            let o = intersect_convex(s, &c.domain);
            if !o.is_empty() {
                inside += o.area();
            }
        }
        (inside / s.area()).min(T::one())
    }

    /// Integration triangles of a cell: the centroid fan of its domain, with
    /// boundary edges curved when the mesh uses quadratic geometry.
    pub fn integration_triangles(&self, cell: usize) -> Vec<CurvedTriangle<T>> {
        let c = &self.cells[cell];
        if c.domain.is_empty() {
            return Vec::new();
        }
        triangulate(&c.domain)
            .into_iter()
            .map(|t| {
                let seg = c.boundary.iter().find(|s| s.curved && s.a == t.b && s.b == t.c);
                match seg {
                    Some(s) => CurvedTriangle::with_midnodes(&t, [None, Some(s.mid), None]),
                    None => CurvedTriangle::straight(&t),
                }
            })
            .collect()
    }

    /// Centres and polygons of the uniformly refined partition: every cell is
    /// split into quadrilaterals through its centroid and edge midpoints.
    pub fn refined_cells(&self) -> (Vec<ConvexPolygon<T>>, Vec<Point<T>>) {
        refine_cells(self.cells.iter().map(|c| &c.polygon))
    }
}

/// Label and integration domain of one cell.
fn domain_part<T: Real>(poly: &ConvexPolygon<T>, sdf: &SignedDistance<T>) -> (CellLabel, ConvexPolygon<T>) {
    let mut label = classify_polygon(poly, sdf);
    // vertex signs miss a boundary that enters and leaves through one edge
    if label != CellLabel::Cut {
        let tol = T::root_eps().max(T::geom_eps() * poly.feature_size());
        let mixed = poly.edges().any(|(a, b)| {
            (1..8).any(|k| {
                let d = sdf.distance(a.lerp(b, T::from_usize_lossy(k) / T::lit(8.0)));
                match label {
                    CellLabel::Interior => d < -tol,
                    _ => d > tol,
                }
            })
        });
        if mixed {
            label = CellLabel::Cut;
        }
    }
    match label {
        CellLabel::Interior => (label, poly.clone()),
        CellLabel::Cut => (label, clip_cell_to_domain(poly, sdf)),
        _ => (CellLabel::Exterior, ConvexPolygon::empty()),
    }
}

/// Domain-polygon edges lying on the zero level set.
fn boundary_segments<T: Real>(domain: &ConvexPolygon<T>, sdf: &SignedDistance<T>, curved: bool) -> Vec<BoundarySegment<T>> {
    let tol = T::lit(1e-9).max(T::geom_eps() * domain.feature_size());
    domain
        .edges()
        .filter_map(|(a, b)| {
            let len = a.dist(b);
            let on = sdf.distance(a).abs() <= tol && sdf.distance(b).abs() <= tol;
            let mid = a.midpoint(b);
            if !on || sdf.distance(mid).abs() > tol.max(len * T::lit(0.25)) {
                return None;
            }
            if curved && sdf.distance(mid).abs() > tol {
                match project_onto_boundary(a, b, sdf) {
                    Some(m) => return Some(BoundarySegment { a, b, mid: m, curved: true }),
                    None => log::warn!("boundary midnode projection failed at {:?}; straight edge kept", mid),
                }
            }
            Some(BoundarySegment { a, b, mid, curved: false })
        })
        .collect()
}

/// Quadrilateral refinement through centroids and edge midpoints.
pub fn refine_cells<'a, T: Real + 'a>(
    polys: impl Iterator<Item = &'a ConvexPolygon<T>>,
) -> (Vec<ConvexPolygon<T>>, Vec<Point<T>>) {
    let mut cells = Vec::new();
    for p in polys {
        if p.is_empty() {
            continue;
        }
        let c = p.centroid();
        let v = p.vertices();
        let n = v.len();
        for k in 0..n {
            let prev = v[(k + n - 1) % n].midpoint(v[k]);
            let next = v[k].midpoint(v[(k + 1) % n]);
            if let Ok(q) = ConvexPolygon::new(vec![c, prev, v[k], next]) {
                cells.push(q);
            }
        }
    }
    let centers = cells.iter().map(|q| q.centroid()).collect();
    (cells, centers)
}

/// `n × n` lattice on the unit square plus `rings` layers of ghost seeds,
/// and the padded square they tile.
pub fn lattice_seeds<T: Real>(n: usize, rings: usize) -> (Vec<Point<T>>, ConvexPolygon<T>) {
    let h = T::one() / T::from_usize_lossy(n);
    let r = rings as i64;
    let mut seeds = Vec::new();
    for j in -r..(n as i64 + r) {
        for i in -r..(n as i64 + r) {
            let x = (T::lit(i as f64) + T::lit(0.5)) * h;
            let y = (T::lit(j as f64) + T::lit(0.5)) * h;
            seeds.push(Point::new(x, y));
        }
    }
    let pad = h * T::from_usize_lossy(rings);
    let bounds = ConvexPolygon::rectangle(Point::new(-pad, -pad), Point::new(T::one() + pad, T::one() + pad))
        .expect("positive padding box");
    (seeds, bounds)
}

/// Perturbs every seed deeper than `min_depth` inside the domain by a
/// uniform offset in `[-amplitude, amplitude]` per coordinate.
pub fn perturb_seeds<T: Real>(
    seeds: &mut [Point<T>],
    sdf: &SignedDistance<T>,
    min_depth: T,
    amplitude: T,
    rng_seed: u64,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let a = amplitude.to_f64_lossy();
    for s in seeds.iter_mut() {
        // draw for every seed so the stream does not depend on the domain
        let dx: f64 = rng.gen_range(-1.0..=1.0) * a;
        let dy: f64 = rng.gen_range(-1.0..=1.0) * a;
        if sdf.distance(*s) > min_depth {
            *s = Point::new(s.x + T::lit(dx), s.y + T::lit(dy));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(q: usize, hm: f64) -> MeshOptions<f64> {
        MeshOptions { degree: q, mollifier: Mollifier1D::quartic(hm).unwrap(), curved: false, scale: None }
    }

    #[test]
    fn lattice_counts() {
        let (seeds, bounds) = lattice_seeds::<f64>(4, 1);
        let mesh = Mesh::from_seeds(&seeds, &bounds, &SignedDistance::unit_square(), &opts(1, 0.5)).unwrap();
        assert_eq!(mesh.count(CellLabel::Interior), 16);
        assert_eq!(mesh.count(CellLabel::Ghost), 20);
        assert!((mesh.domain_area() - 1.0).abs() < 1e-12);
        assert!((mesh.scale - 0.25).abs() < 1e-14);
        let nb: usize = mesh.cells.iter().map(|c| c.boundary.len()).sum();
        assert_eq!(nb, 16);
    }

    #[test]
    fn missing_ghosts_are_reported() {
        let (seeds, _) = lattice_seeds::<f64>(4, 0);
        let bounds = ConvexPolygon::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let r = Mesh::from_seeds(&seeds, &bounds, &SignedDistance::unit_square(), &opts(1, 0.5));
        assert!(matches!(r, Err(FemError::GhostCoverage { .. })));
    }

    #[test]
    fn plate_cells_are_cut_along_the_hole() {
        let (mut seeds, bounds) = lattice_seeds::<f64>(6, 1);
        let sdf = SignedDistance::plate_with_hole(1.0, 0.25);
        perturb_seeds(&mut seeds, &sdf, 1.0 / 6.0, 0.025, 7);
        let mut o = opts(2, 1.0 / 3.0);
        o.curved = true;
        let mesh = Mesh::from_seeds(&seeds, &bounds, &sdf, &o).unwrap();
        assert!(mesh.count(CellLabel::Cut) >= 3);
        for c in &mesh.cells {
            if c.label == CellLabel::Cut {
                let ds: Vec<f64> = c.polygon.vertices().iter().map(|v| sdf.distance(*v)).collect();
                let lo = ds.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(lo < 1e-9 && hi > -1e-9);
            }
            for s in c.boundary.iter().filter(|s| s.curved) {
                assert!(sdf.distance(s.mid).abs() < 1e-10);
            }
        }
        let exact = 1.0 - std::f64::consts::PI * 0.0625 / 4.0;
        let curved_area: f64 = (0..mesh.cells.len())
            .flat_map(|i| mesh.integration_triangles(i))
            .map(|t| t.area())
            .sum();
        assert!((curved_area - exact).abs() < 1e-4, "{curved_area} {exact}");
        assert!((mesh.domain_area() - exact).abs() > (curved_area - exact).abs());
    }

    #[test]
    fn refinement_is_nested() {
        let sq = ConvexPolygon::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let (cells, centers) = refine_cells(std::iter::once(&sq));
        assert_eq!(cells.len(), 4);
        let a: f64 = cells.iter().map(|c| c.area()).sum();
        assert!((a - 1.0).abs() < 1e-15);
        assert!((centers[0].x - 0.25).abs() < 1e-15 || (centers[0].x - 0.75).abs() < 1e-15);
    }
}
