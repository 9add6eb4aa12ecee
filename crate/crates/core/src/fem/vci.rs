//! Variationally consistent integration: per-function gradient
//! corrections that make the discrete integration-by-parts identity exact
//! for polynomial fluxes of degree `q - 1`.

use rayon::prelude::*;

use super::linalg::pivoted_cholesky_solve;
use super::{FemError, Mesh, PointSet, QuadCache};
use crate::basis::CellBasis;
use crate::Real;

/// Correction coefficients of every cell: for basis function `b` and
/// direction `k`, `λ[(b * 2 + k) * n_psi + a]` multiplies `ψ_a`.
#[derive(Debug, Clone)]
pub struct VciCorrection<T> {
    pub n_psi: usize,
    pub lambda: Vec<Vec<T>>,
    psi: Vec<Option<CellBasis<T>>>,
}

impl<T: Real> VciCorrection<T> {
    /// No correction (used for `q = 0` and for plain Galerkin assembly).
    pub fn none(n_cells: usize) -> Self {
        Self { n_psi: 0, lambda: vec![Vec::new(); n_cells], psi: vec![None; n_cells] }
    }

    pub fn is_none(&self) -> bool {
        self.n_psi == 0
    }

    /// Largest correction coefficient.
    pub fn max_abs(&self) -> T {
        self.lambda.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Test-function gradients at the domain points, aligned with
    /// `set.grads`.
    pub fn corrected_grads(&self, set: &PointSet<T>) -> Vec<[T; 2]> {
        if self.is_none() {
            return set.grads.clone();
        }
        let nb = set.nb;
        let mut out = set.grads.clone();
        let per_point: Vec<Vec<[T; 2]>> = (0..set.len())
            .into_par_iter()
            .map(|i| {
                let mut g = Vec::with_capacity(set.entries(i).len() * nb);
                for e in set.entries(i) {
                    let c = set.cells[e];
                    let grads = set.grads_of(e);
                    match (&self.psi[c], self.lambda[c].is_empty()) {
                        (Some(pb), false) => {
                            let psi = pb.monomials(set.x[i]).values;
                            let lam = &self.lambda[c];
                            for (b, gb) in grads.iter().enumerate() {
                                let mut v = *gb;
                                for (k, vk) in v.iter_mut().enumerate() {
                                    let l = &lam[(b * 2 + k) * self.n_psi..(b * 2 + k + 1) * self.n_psi];
                                    *vk += l.iter().zip(&psi).fold(T::zero(), |s, (x, y)| s + *x * *y);
                                }
                                g.push(v);
                            }
                        }
                        _ => g.extend_from_slice(grads),
                    }
                }
                g
            })
            .collect();
        for (i, g) in per_point.into_iter().enumerate() {
            let start = set.ptr[i] * nb;
            out[start..start + g.len()].copy_from_slice(&g);
        }
        out
    }
}

/// Entry lists `(point, entry)` per cell.
fn entries_by_cell<T: Real>(set: &PointSet<T>, n_cells: usize) -> Vec<Vec<(usize, usize)>> {
    let mut by = vec![Vec::new(); n_cells];
    for i in 0..set.len() {
        for e in set.entries(i) {
            by[set.cells[e]].push((i, e));
        }
    }
    by
}

/// Solves the Gram systems of all cells that carry basis functions at the
/// cached points, with `ψ` of degree `q - 1`.
pub fn vci_correct<T: Real>(mesh: &Mesh<T>, cache: &QuadCache<T>) -> Result<VciCorrection<T>, FemError> {
    if mesh.degree == 0 {
        return Ok(VciCorrection::none(mesh.cells.len()));
    }
    vci_correct_degree(mesh, cache, mesh.degree - 1)
}

/// As [`vci_correct`] with an explicit degree for `ψ`.
pub fn vci_correct_degree<T: Real>(
    mesh: &Mesh<T>,
    cache: &QuadCache<T>,
    psi_degree: usize,
) -> Result<VciCorrection<T>, FemError> {
    let n = mesh.cells.len();
    let dom = entries_by_cell(&cache.domain, n);
    let bnd = entries_by_cell(&cache.boundary, n);
    let nb = cache.domain.nb;
    let psi: Vec<Option<CellBasis<T>>> = (0..n)
        .map(|c| {
            (!dom[c].is_empty()).then(|| {
                let cell = &mesh.cells[c];
                CellBasis::new_2d(c, cell.center, mesh.scale, psi_degree)
            })
        })
        .collect();
    let n_psi = psi.iter().flatten().next().map_or(0, |b| b.len());

    let solved: Vec<Result<Vec<T>, FemError>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let Some(pb) = &psi[c] else {
                return Ok(Vec::new());
            };
            let np = n_psi;
            let mut g = vec![T::zero(); np * np];
            let mut r = vec![vec![T::zero(); np]; nb * 2];
            let set = &cache.domain;
            for &(i, e) in &dom[c] {
                let w = set.w[i];
                let m = pb.monomials(set.x[i]);
                for a in 0..np {
                    for b in 0..np {
                        g[a * np + b] += w * m.values[a] * m.values[b];
                    }
                }
                let (vals, grads) = (set.vals(e), set.grads_of(e));
                for f in 0..nb {
                    for k in 0..2 {
                        let row = &mut r[f * 2 + k];
                        for a in 0..np {
                            row[a] -= w * (vals[f] * m.grads[a][k] + grads[f][k] * m.values[a]);
                        }
                    }
                }
            }
            let set = &cache.boundary;
            for &(i, e) in &bnd[c] {
                let w = set.w[i];
                let nrm = [set.normal[i].x, set.normal[i].y];
                let m = pb.monomials(set.x[i]);
                let vals = set.vals(e);
                for f in 0..nb {
                    for k in 0..2 {
                        let row = &mut r[f * 2 + k];
                        for a in 0..np {
                            row[a] += w * vals[f] * m.values[a] * nrm[k];
                        }
                    }
                }
            }
            let (sols, rank) = pivoted_cholesky_solve(&g, np, &r, T::lit(1e-12));
            if rank == 0 {
                return Err(FemError::VciSingular { cell: c });
            }
            if rank < np {
                log::warn!("cell {c}: correction Gram matrix has rank {rank} of {np}; truncated");
            }
            Ok(sols.into_iter().flatten().collect())
        })
        .collect();
    let mut lambda = Vec::with_capacity(n);
    for s in solved {
        lambda.push(s?);
    }
    Ok(VciCorrection { n_psi, lambda, psi })
}

/// Largest integration-by-parts defect
/// `|Σ w ψ_a ∂_k Ñ + Σ w N ∂_k ψ_a - Σ_Γ w N ψ_a n_k|` over all cells,
/// functions, directions and `ψ_a` of degree `< q`.
pub fn consistency_defect<T: Real>(mesh: &Mesh<T>, cache: &QuadCache<T>, corr: &VciCorrection<T>) -> T {
    let n = mesh.cells.len();
    if mesh.degree == 0 {
        return T::zero();
    }
    let grads = corr.corrected_grads(&cache.domain);
    let nb = cache.domain.nb;
    let dom = entries_by_cell(&cache.domain, n);
    let bnd = entries_by_cell(&cache.boundary, n);
    let mut worst = T::zero();
    for c in 0..n {
        if dom[c].is_empty() {
            continue;
        }
        let pb = CellBasis::new_2d(c, mesh.cells[c].center, mesh.scale, mesh.degree - 1);
        let np = pb.len();
        let mut d = vec![T::zero(); nb * 2 * np];
        for &(i, e) in &dom[c] {
            let set = &cache.domain;
            let m = pb.monomials(set.x[i]);
            let vals = set.vals(e);
            for f in 0..nb {
                let gf = grads[e * nb + f];
                for k in 0..2 {
                    for a in 0..np {
                        d[(f * 2 + k) * np + a] += set.w[i] * (m.values[a] * gf[k] + vals[f] * m.grads[a][k]);
                    }
                }
            }
        }
        for &(i, e) in &bnd[c] {
            let set = &cache.boundary;
            let m = pb.monomials(set.x[i]);
            let nrm = [set.normal[i].x, set.normal[i].y];
            let vals = set.vals(e);
            for f in 0..nb {
                for k in 0..2 {
                    for a in 0..np {
                        d[(f * 2 + k) * np + a] -= set.w[i] * vals[f] * m.values[a] * nrm[k];
                    }
                }
            }
        }
        worst = d.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    worst
}
