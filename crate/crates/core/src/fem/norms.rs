use rayon::prelude::*;

use super::{ExactSolution, FemError, Mesh, ProblemKind, Solution};
use crate::quadrature::triangle_rule;
use crate::Real;

/// Error norms of a discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms<T> {
    pub l2: T,
    pub h1: T,
    /// `a(e, e)^{1/2}`: the H¹ seminorm for Poisson, strain energy for
    /// elasticity.
    pub energy: T,
    /// `a(u, u)^{1/2}` of the exact solution.
    pub energy_exact: T,
}

impl<T: Real> ErrorNorms<T> {
    pub fn relative_energy(&self) -> T {
        self.energy / self.energy_exact
    }
}

/// Default exactness for norm integration, `2 (q + deg m + 1)`.
pub fn norm_degree<T: Real>(mesh: &Mesh<T>) -> usize {
    2 * (mesh.degree + mesh.mollifier.factor.degree() + 1)
}

/// Integrates the error over the integration triangles of every domain cell
/// with a triangle rule of the given exactness.
pub fn error_norms<T: Real>(
    mesh: &Mesh<T>,
    sol: &Solution<T>,
    exact: &ExactSolution<T>,
    degree: usize,
) -> Result<ErrorNorms<T>, FemError> {
    let rule = triangle_rule::<T>(degree)?;
    let kind = exact.kind();
    let cells: Vec<usize> = mesh.domain_cells().collect();
    let parts: Vec<[T; 4]> = cells
        .par_iter()
        .map(|&k| {
            let mut acc = [T::zero(); 4];
            for t in mesh.integration_triangles(k) {
                for (q, w) in rule.points.iter().zip(&rule.weights) {
                    let (x, det) = t.map(q[0], q[1]);
                    let w = *w * det;
                    let (uh, gh) = sol.eval(mesh, x);
                    let u = exact.value(x);
                    let g = exact.grad(x);
                    let mut e = [[T::zero(); 2]; 2];
                    let mut l2 = T::zero();
                    let mut h1 = T::zero();
                    for c in 0..kind.components() {
                        let d = u[c] - uh[c];
                        l2 += d * d;
                        for k in 0..2 {
                            e[c][k] = g[c][k] - gh[c][k];
                            h1 += e[c][k] * e[c][k];
                        }
                    }
                    let (en, ex) = match &kind {
                        ProblemKind::Poisson => (h1, g[0][0] * g[0][0] + g[0][1] * g[0][1]),
                        ProblemKind::Elasticity(m) => (m.energy_density(&e), m.energy_density(&g)),
                    };
                    acc[0] += w * l2;
                    acc[1] += w * h1;
                    acc[2] += w * en;
                    acc[3] += w * ex;
                }
            }
            acc
        })
        .collect();
    let mut tot = [T::zero(); 4];
    for p in parts {
        for k in 0..4 {
            tot[k] += p[k];
        }
    }
    Ok(ErrorNorms { l2: tot[0].sqrt(), h1: tot[1].sqrt(), energy: tot[2].max(T::zero()).sqrt(), energy_exact: tot[3].sqrt() })
}
