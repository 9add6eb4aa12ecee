//! One-dimensional Poisson problems on interval partitions, integrated
//! exactly between the breakpoints of the basis.

use super::linalg::solve_dense;
use super::{ErrorNorms, ExactSolution, FemError};
use crate::basis::{eval_1d, BasisValue, CellBasis, Interval};
use crate::geometry::Point;
use crate::mollifier::Mollifier1D;
use crate::quadrature::{gauss_interval, IntervalRule};
use crate::Real;

/// Cell sizes of the coarse non-uniform mesh, from the left.
pub const COARSE_CELLS: [f64; 6] = [0.15, 0.2, 0.15, 0.15, 0.2, 0.15];

/// Interval partition of `(0, L)` padded by one ghost cell of width `h_m/2`
/// on each side.
#[derive(Debug, Clone)]
pub struct Mesh1D<T> {
    pub cells: Vec<Interval<T>>,
    pub ghost: Vec<bool>,
    pub bases: Vec<CellBasis<T>>,
    pub mollifier: Mollifier1D<T>,
    pub degree: usize,
    pub domain: Interval<T>,
}

impl<T: Real> Mesh1D<T> {
    pub fn new(widths: &[T], mollifier: Mollifier1D<T>, degree: usize) -> Result<Self, FemError> {
        if widths.is_empty() || widths.iter().any(|w| !(*w > T::zero())) {
            return Err(FemError::InvalidConfig("cell widths must be positive".into()));
        }
        let hw = mollifier.halfwidth();
        let mut cells = vec![Interval::new(-hw, T::zero())];
        let mut x = T::zero();
        for w in widths {
            cells.push(Interval::new(x, x + *w));
            x += *w;
        }
        cells.push(Interval::new(x, x + hw));
        let n = cells.len();
        let ghost = (0..n).map(|i| i == 0 || i == n - 1).collect();
        let scale = x / T::from_usize_lossy(widths.len());
        let bases = cells.iter().enumerate().map(|(i, c)| CellBasis::new_1d(i, c.midpoint(), scale, degree)).collect();
        Ok(Self { cells, ghost, bases, mollifier, degree, domain: Interval::new(T::zero(), x) })
    }

    /// Coarse cells bisected `level` times, B-spline mollifier of degree
    /// `q_m` with width `2 χ max h_c`.
    pub fn bisected(level: usize, degree: usize, q_m: usize, chi: T) -> Result<Self, FemError> {
        let k = 1usize << level;
        let widths: Vec<T> = COARSE_CELLS
            .iter()
            .flat_map(|w| std::iter::repeat_n(T::lit(*w) / T::from_usize_lossy(k), k))
            .collect();
        let hmax = widths.iter().fold(T::zero(), |m, w| m.max(*w));
        let m = Mollifier1D::bspline(q_m, T::lit(2.0) * chi * hmax)?;
        Self::new(&widths, m, degree)
    }

    /// Number of domain cells.
    pub fn n_domain(&self) -> usize {
        self.cells.len() - 2
    }

    pub fn mean_size(&self) -> T {
        self.domain.len() / T::from_usize_lossy(self.n_domain())
    }

    pub fn basis_at(&self, x: T) -> Vec<(usize, BasisValue<T>)> {
        let hw = self.mollifier.halfwidth();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| x > c.a - hw && x < c.b + hw)
            .map(|(i, c)| (i, eval_1d(&self.bases[i], c, &self.mollifier, x)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    /// Sorted abscissae in the domain where some basis function changes
    /// polynomial piece, including the domain ends.
    pub fn breakpoints(&self) -> Vec<T> {
        let bp = self.mollifier.breakpoints();
        let (lo, hi) = (self.domain.a, self.domain.b);
        let mut out = vec![lo, hi];
        for c in &self.cells {
            for e in [c.a, c.b] {
                for b in &bp {
                    let x = e + *b;
                    if x > lo && x < hi {
                        out.push(x);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tol = T::geom_eps() * self.domain.len();
        out.dedup_by(|a, b| (*a - *b).abs() <= tol);
        out
    }

    fn pieces(&self, rule: &IntervalRule<T>) -> Vec<(T, T)> {
        let bps = self.breakpoints();
        let half = T::lit(0.5);
        let mut pts = Vec::new();
        for w in bps.windows(2) {
            let (mid, hl) = ((w[0] + w[1]) * half, (w[1] - w[0]) * half);
            for (q, wq) in rule.points.iter().zip(&rule.weights) {
                pts.push((mid + hl * q[0], *wq * hl));
            }
        }
        pts
    }

    fn rule(&self) -> Result<IntervalRule<T>, FemError> {
        Ok(gauss_interval((self.degree + self.mollifier.degree() + 2).max(10))?)
    }
}

/// Coefficients of a 1D solve, `nb` per cell.
#[derive(Debug, Clone)]
pub struct Solution1D<T> {
    pub coeffs: Vec<T>,
    pub nb: usize,
    pub n_dof: usize,
}

impl<T: Real> Solution1D<T> {
    pub fn eval(&self, mesh: &Mesh1D<T>, x: T) -> (T, T) {
        let mut u = T::zero();
        let mut d = T::zero();
        for (c, v) in mesh.basis_at(x) {
            for k in 0..self.nb {
                u += self.coeffs[c * self.nb + k] * v.values[k];
                d += self.coeffs[c * self.nb + k] * v.grads[k][0];
            }
        }
        (u, d)
    }
}

/// `-u'' = s` with non-symmetric Nitsche conditions at both ends.
pub fn solve_poisson_1d<T: Real>(mesh: &Mesh1D<T>, exact: &ExactSolution<T>) -> Result<Solution1D<T>, FemError> {
    let nb = mesh.degree + 1;
    let n = mesh.cells.len() * nb;
    let mut a = vec![vec![T::zero(); n]; n];
    let mut rhs = vec![T::zero(); n];
    let rule = mesh.rule()?;
    let at = |x: T| Point::new(x, T::zero());
    for (x, w) in mesh.pieces(&rule) {
        let s = exact.source(at(x))[0];
        let ents = mesh.basis_at(x);
        for (ci, vi) in &ents {
            for ka in 0..nb {
                let r = ci * nb + ka;
                rhs[r] += w * s * vi.values[ka];
                for (cj, vj) in &ents {
                    for kb in 0..nb {
                        a[r][cj * nb + kb] += w * vi.grads[ka][0] * vj.grads[kb][0];
                    }
                }
            }
        }
    }
    for (x, nrm) in [(mesh.domain.a, -T::one()), (mesh.domain.b, T::one())] {
        let ub = exact.value(at(x))[0];
        let ents = mesh.basis_at(x);
        for (ci, vi) in &ents {
            for ka in 0..nb {
                let r = ci * nb + ka;
                let dn_i = nrm * vi.grads[ka][0];
                rhs[r] += ub * dn_i;
                for (cj, vj) in &ents {
                    for kb in 0..nb {
                        a[r][cj * nb + kb] += vj.values[kb] * dn_i - nrm * vj.grads[kb][0] * vi.values[ka];
                    }
                }
            }
        }
    }
    let coeffs = solve_dense(&a, &rhs)?;
    Ok(Solution1D { coeffs, nb, n_dof: n })
}

/// L² and H¹-seminorm errors, integrated between breakpoints.
pub fn error_norms_1d<T: Real>(
    mesh: &Mesh1D<T>,
    sol: &Solution1D<T>,
    exact: &ExactSolution<T>,
) -> Result<ErrorNorms<T>, FemError> {
    let rule = mesh.rule()?;
    let (mut l2, mut h1, mut ex) = (T::zero(), T::zero(), T::zero());
    for (x, w) in mesh.pieces(&rule) {
        let (uh, dh) = sol.eval(mesh, x);
        let p = Point::new(x, T::zero());
        let (u, du) = (exact.value(p)[0], exact.grad(p)[0][0]);
        l2 += w * (u - uh) * (u - uh);
        h1 += w * (du - dh) * (du - dh);
        ex += w * du * du;
    }
    Ok(ErrorNorms { l2: l2.sqrt(), h1: h1.sqrt(), energy: h1.sqrt(), energy_exact: ex.sqrt() })
}
