use rayon::prelude::*;

use super::{FemError, Mesh};
use crate::basis::BasisValue;
use crate::geometry::Point;
use crate::quadrature::{segment_rule, triangle_rule, triangle_rule_points, CurvedTriangle, TriangleRule};
use crate::Real;

/// Triangle rule selection: a tabulated point count or an exactness degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleSpec {
    Points(usize),
    Degree(usize),
}

impl RuleSpec {
    pub fn rule<T: Real>(&self) -> Result<TriangleRule<T>, FemError> {
        Ok(match *self {
            Self::Points(n) => triangle_rule_points(n)?,
            Self::Degree(d) => triangle_rule(d)?,
        })
    }
}

/// Quadrature used for the weak form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadConfig {
    pub domain: RuleSpec,
    pub boundary_points: usize,
}

impl QuadConfig {
    /// Three domain / five boundary points for linear bases, six / five for
    /// quadratic ones; other degrees get rules of matching exactness.
    pub fn for_degree(q: usize) -> Self {
        let domain = match q {
            0 => RuleSpec::Points(1),
            1 => RuleSpec::Points(3),
            2 => RuleSpec::Points(6),
            3 => RuleSpec::Points(6),
            _ => RuleSpec::Degree(2 * q),
        };
        Self { domain, boundary_points: 5.max(q + 2) }
    }
}

/// Quadrature points with every non-zero basis function evaluated there.
///
/// Entries of point `i` are `ptr[i]..ptr[i+1]`; entry `e` belongs to cell
/// `cells[e]` and owns `values[e*nb..(e+1)*nb]` and the matching gradients.
#[derive(Debug, Clone, Default)]
pub struct PointSet<T> {
    pub x: Vec<Point<T>>,
    pub w: Vec<T>,
    /// Outward unit normal; zero for domain points.
    pub normal: Vec<Point<T>>,
    /// Cell whose integration domain or boundary produced the point.
    pub owner: Vec<usize>,
    pub ptr: Vec<usize>,
    pub cells: Vec<usize>,
    pub values: Vec<T>,
    pub grads: Vec<[T; 2]>,
    pub nb: usize,
}

impl<T: Real> PointSet<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn entries(&self, i: usize) -> std::ops::Range<usize> {
        self.ptr[i]..self.ptr[i + 1]
    }

    pub fn vals(&self, e: usize) -> &[T] {
        &self.values[e * self.nb..(e + 1) * self.nb]
    }

    pub fn grads_of(&self, e: usize) -> &[[T; 2]] {
        &self.grads[e * self.nb..(e + 1) * self.nb]
    }

    /// Points grouped by owner: `owner_ranges()[k]` spans the points of the
    /// k-th distinct owner in ascending order.
    pub fn owner_ranges(&self) -> Vec<(usize, std::ops::Range<usize>)> {
        let mut out: Vec<(usize, std::ops::Range<usize>)> = Vec::new();
        for (i, &o) in self.owner.iter().enumerate() {
            match out.last_mut() {
                Some((prev, r)) if *prev == o => r.end = i + 1,
                _ => out.push((o, i..i + 1)),
            }
        }
        out
    }

    fn from_raw(raw: Vec<RawPoint<T>>, nb: usize) -> Self {
        let mut s = Self { nb, ptr: vec![0], ..Default::default() };
        for p in raw {
            s.x.push(p.x);
            s.w.push(p.w);
            s.normal.push(p.n);
            s.owner.push(p.owner);
            for (c, v) in p.basis {
                s.cells.push(c);
                s.values.extend_from_slice(&v.values);
                s.grads.extend_from_slice(&v.grads);
            }
            s.ptr.push(s.cells.len());
        }
        s
    }
}

struct RawPoint<T> {
    x: Point<T>,
    w: T,
    n: Point<T>,
    owner: usize,
    basis: Vec<(usize, BasisValue<T>)>,
}

/// Domain and boundary quadrature of a mesh with cached basis values.
#[derive(Debug, Clone)]
pub struct QuadCache<T> {
    pub domain: PointSet<T>,
    pub boundary: PointSet<T>,
    pub config: QuadConfig,
}

impl<T: Real> QuadCache<T> {
    pub fn build(mesh: &Mesh<T>, config: QuadConfig) -> Result<Self, FemError> {
        let rule = config.domain.rule::<T>()?;
        let seg = segment_rule::<T>(config.boundary_points)?;
        let nb = mesh.cells.first().map_or(0, |c| c.basis.len());
        let cells: Vec<usize> = mesh.domain_cells().collect();

        let domain_raw: Vec<RawPoint<T>> = cells
            .par_iter()
            .flat_map_iter(|&k| {
                let tris: Vec<CurvedTriangle<T>> = mesh.integration_triangles(k);
                let mut pts = Vec::with_capacity(tris.len() * rule.len());
                for t in &tris {
                    for (q, w) in rule.points.iter().zip(&rule.weights) {
                        let (x, det) = t.map(q[0], q[1]);
                        pts.push((x, *w * det));
                    }
                }
                pts.into_iter().map(move |(x, w)| RawPoint { x, w, n: Point::origin(), owner: k, basis: Vec::new() })
            })
            .collect();
        let boundary_raw: Vec<RawPoint<T>> = cells
            .par_iter()
            .flat_map_iter(|&k| {
                let mut pts = Vec::new();
                for s in &mesh.cells[k].boundary {
                    for (q, w) in seg.points.iter().zip(&seg.weights) {
                        let (x, t) = s.eval(q[0]);
                        pts.push(RawPoint {
                            x,
                            w: *w * t.norm(),
                            n: crate::fem::BoundarySegment::normal(t),
                            owner: k,
                            basis: Vec::new(),
                        });
                    }
                }
                pts
            })
            .collect();
        let fill = |mut raw: Vec<RawPoint<T>>| {
            raw.par_iter_mut().for_each(|p| p.basis = mesh.basis_at(p.x));
            PointSet::from_raw(raw, nb)
        };
        Ok(Self { domain: fill(domain_raw), boundary: fill(boundary_raw), config })
    }

    /// Cells carrying a non-zero basis function at some domain point, sorted.
    pub fn active_cells(&self) -> Vec<usize> {
        let mut seen: Vec<usize> = self.domain.cells.clone();
        seen.sort_unstable();
        seen.dedup();
        seen
    }
}
