use rayon::prelude::*;

use super::linalg::{relative_residual, solve_sparse, SparseMatrix};
use super::{FemError, Material, Mesh, Problem, ProblemKind, QuadCache, VciCorrection};
use crate::geometry::Point;
use crate::Real;

/// Numbering of the unknowns: active cells get consecutive slots, and the
/// unknown `(slot, component, a)` sits at `(slot * ncomp + component) * nb + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub slots: Vec<usize>,
    pub slot_of: Vec<Option<usize>>,
    pub nb: usize,
    pub ncomp: usize,
}

impl DofMap {
    pub fn new(active: &[usize], n_cells: usize, nb: usize, ncomp: usize) -> Self {
        let mut slot_of = vec![None; n_cells];
        for (s, c) in active.iter().enumerate() {
            slot_of[*c] = Some(s);
        }
        Self { slots: active.to_vec(), slot_of, nb, ncomp }
    }

    pub fn n_dofs(&self) -> usize {
        self.slots.len() * self.ncomp * self.nb
    }

    #[inline]
    pub fn dof(&self, slot: usize, comp: usize, a: usize) -> usize {
        (slot * self.ncomp + comp) * self.nb + a
    }
}

/// Assembled (generally non-symmetric) system with its diagonal scaling.
#[derive(Debug, Clone)]
pub struct DiscreteSystem<T> {
    pub matrix: SparseMatrix<T>,
    pub rhs: Vec<T>,
    pub dofs: DofMap,
    /// Per-unknown factors `s`; the stored system is `S A S y = S b`.
    pub scaling: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Scale cut basis functions by `(|supp ∩ Ω| / |supp|)^{-1/2}`.
    pub support_scaling: bool,
    /// Cells whose support fraction in the domain is below this carry no
    /// unknowns. Their functions are nearly dependent on the sliver they
    /// reach and make the system numerically singular.
    pub min_support_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { support_scaling: true, min_support_fraction: 0.01 }
    }
}

/// Cell coefficients of a solved system.
#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub dofs: DofMap,
    pub coeffs: Vec<T>,
    /// Relative residual of the solved (scaled) system.
    pub residual: T,
}

impl<T: Real> Solution<T> {
    /// Coefficients of component `comp` of `cell`, if the cell is active.
    pub fn cell_coeffs(&self, cell: usize, comp: usize) -> Option<&[T]> {
        let s = self.dofs.slot_of.get(cell).copied().flatten()?;
        let d = self.dofs.dof(s, comp, 0);
        Some(&self.coeffs[d..d + self.dofs.nb])
    }

    /// Solution components and their gradients at `p`.
    pub fn eval(&self, mesh: &Mesh<T>, p: Point<T>) -> ([T; 2], [[T; 2]; 2]) {
        let mut u = [T::zero(); 2];
        let mut g = [[T::zero(); 2]; 2];
        for (cell, v) in mesh.basis_at(p) {
            for c in 0..self.dofs.ncomp {
                if let Some(a) = self.cell_coeffs(cell, c) {
                    for (k, ak) in a.iter().enumerate() {
                        u[c] += *ak * v.values[k];
                        g[c][0] += *ak * v.grads[k][0];
                        g[c][1] += *ak * v.grads[k][1];
                    }
                }
            }
        }
        (u, g)
    }
}

/// `D B_c(g)`: stress of the displacement `N e_c` with `∇N = g`.
#[inline]
fn stress_of<T: Real>(m: &Material<T>, c: usize, g: [T; 2]) -> [T; 3] {
    let mut grad = [[T::zero(); 2]; 2];
    grad[c] = g;
    m.stress(&grad)
}

/// `ε(N e_d) : s` with `∇N = g`.
#[inline]
fn strain_dot<T: Real>(d: usize, g: [T; 2], s: &[T; 3]) -> T {
    if d == 0 {
        g[0] * s[0] + g[1] * s[2]
    } else {
        g[1] * s[1] + g[0] * s[2]
    }
}

#[inline]
fn traction<T: Real>(s: &[T; 3], n: Point<T>) -> [T; 2] {
    [s[0] * n.x + s[2] * n.y, s[2] * n.x + s[1] * n.y]
}

struct LocalBlock<T> {
    slots: Vec<usize>,
    /// Row-major `(slots.len() * ncomp * nb)^2`.
    mat: Vec<T>,
    rhs: Vec<T>,
}

/// Weak form of `problem` on the cached quadrature: corrected test
/// gradients in the domain terms, non-symmetric Nitsche terms on the
/// Dirichlet boundary, tractions on the Neumann part.
pub fn assemble<T: Real>(
    mesh: &Mesh<T>,
    cache: &QuadCache<T>,
    vci: &VciCorrection<T>,
    problem: &Problem<T>,
    opts: SolveOptions,
) -> Result<DiscreteSystem<T>, FemError> {
    let candidates = cache.active_cells();
    let fractions: Vec<T> = candidates.par_iter().map(|c| mesh.support_fraction(*c)).collect();
    let tau = T::lit(opts.min_support_fraction);
    let (active, fr): (Vec<usize>, Vec<T>) =
        candidates.into_iter().zip(fractions).filter(|(_, f)| *f >= tau).unzip();
    if active.is_empty() {
        return Err(FemError::NoActiveCells);
    }
    let nb = cache.domain.nb;
    let ncomp = problem.kind.components();
    let dofs = DofMap::new(&active, mesh.cells.len(), nb, ncomp);
    let test_grads = vci.corrected_grads(&cache.domain);

    // owners in ascending order with their domain and boundary point ranges
    let dr = cache.domain.owner_ranges();
    let br = cache.boundary.owner_ranges();
    let mut owners: Vec<(usize, std::ops::Range<usize>, std::ops::Range<usize>)> =
        dr.into_iter().map(|(o, r)| (o, r, 0..0)).collect();
    for (o, r) in br {
        match owners.binary_search_by_key(&o, |e| e.0) {
            Ok(k) => owners[k].2 = r,
            Err(k) => owners.insert(k, (o, 0..0, r)),
        }
    }

    let local = |(_, dom, bnd): &(usize, std::ops::Range<usize>, std::ops::Range<usize>)| -> LocalBlock<T> {
        let mut slots: Vec<usize> = dom
            .clone()
            .flat_map(|i| cache.domain.entries(i).map(|e| cache.domain.cells[e]))
            .chain(bnd.clone().flat_map(|i| cache.boundary.entries(i).map(|e| cache.boundary.cells[e])))
            .filter_map(|c| dofs.slot_of[c])
            .collect();
        slots.sort_unstable();
        slots.dedup();
        let bs = ncomp * nb;
        let n = slots.len() * bs;
        let mut mat = vec![T::zero(); n * n];
        let mut rhs = vec![T::zero(); n];
        let loc = |c: usize| dofs.slot_of[c].map(|s| slots.binary_search(&s).unwrap());
        let idx = |l: usize, c: usize, a: usize| l * bs + c * nb + a;

        let set = &cache.domain;
        for i in dom.clone() {
            let (w, x) = (set.w[i], set.x[i]);
            let f = problem.exact.source(x);
            let ents: Vec<(usize, usize)> =
                set.entries(i).filter_map(|e| loc(set.cells[e]).map(|l| (e, l))).collect();
            for &(ei, li) in &ents {
                let vi = set.vals(ei);
                let gi = &test_grads[ei * nb..(ei + 1) * nb];
                for d in 0..ncomp {
                    for a in 0..nb {
                        rhs[idx(li, d, a)] += w * f[d] * vi[a];
                    }
                }
                for &(ej, lj) in &ents {
                    let gj = set.grads_of(ej);
                    match &problem.kind {
                        ProblemKind::Poisson => {
                            for a in 0..nb {
                                let row = idx(li, 0, a) * n;
                                for b in 0..nb {
                                    mat[row + idx(lj, 0, b)] += w * (gi[a][0] * gj[b][0] + gi[a][1] * gj[b][1]);
                                }
                            }
                        }
                        ProblemKind::Elasticity(m) => {
                            for b in 0..nb {
                                for c in 0..2 {
                                    let s = stress_of(m, c, gj[b]);
                                    for a in 0..nb {
                                        for d in 0..2 {
                                            mat[idx(li, d, a) * n + idx(lj, c, b)] += w * strain_dot(d, gi[a], &s);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        let set = &cache.boundary;
        for i in bnd.clone() {
            let (w, x, nrm) = (set.w[i], set.x[i], set.normal[i]);
            let ents: Vec<(usize, usize)> =
                set.entries(i).filter_map(|e| loc(set.cells[e]).map(|l| (e, l))).collect();
            if problem.is_neumann(x) {
                let t = problem.exact.traction(x, nrm);
                for &(ei, li) in &ents {
                    let vi = set.vals(ei);
                    for d in 0..ncomp {
                        for a in 0..nb {
                            rhs[idx(li, d, a)] += w * t[d] * vi[a];
                        }
                    }
                }
                continue;
            }
            let ub = problem.exact.value(x);
            match &problem.kind {
                ProblemKind::Poisson => {
                    for &(ei, li) in &ents {
                        let (vi, gi) = (set.vals(ei), set.grads_of(ei));
                        for a in 0..nb {
                            let dn_i = gi[a][0] * nrm.x + gi[a][1] * nrm.y;
                            rhs[idx(li, 0, a)] += w * ub[0] * dn_i;
                            for &(ej, lj) in &ents {
                                let (vj, gj) = (set.vals(ej), set.grads_of(ej));
                                let row = idx(li, 0, a) * n;
                                for b in 0..nb {
                                    let dn_j = gj[b][0] * nrm.x + gj[b][1] * nrm.y;
                                    mat[row + idx(lj, 0, b)] += w * (vj[b] * dn_i - dn_j * vi[a]);
                                }
                            }
                        }
                    }
                }
                ProblemKind::Elasticity(m) => {
                    // tractions of every basis displacement at this point
                    let tr: Vec<Vec<[[T; 2]; 2]>> = ents
                        .iter()
                        .map(|&(e, _)| {
                            set.grads_of(e)
                                .iter()
                                .map(|g| [traction(&stress_of(m, 0, *g), nrm), traction(&stress_of(m, 1, *g), nrm)])
                                .collect()
                        })
                        .collect();
                    for (pi, &(ei, li)) in ents.iter().enumerate() {
                        let vi = set.vals(ei);
                        for a in 0..nb {
                            for d in 0..2 {
                                let ti = tr[pi][a][d];
                                rhs[idx(li, d, a)] += w * (ub[0] * ti[0] + ub[1] * ti[1]);
                                let row = idx(li, d, a) * n;
                                for (pj, &(ej, lj)) in ents.iter().enumerate() {
                                    let vj = set.vals(ej);
                                    for b in 0..nb {
                                        for c in 0..2 {
                                            let tj = tr[pj][b][c];
                                            mat[row + idx(lj, c, b)] += w * (vj[b] * ti[c] - vi[a] * tj[d]);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        LocalBlock { slots, mat, rhs }
    };

    // pattern: slots sharing an owner cell couple
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); dofs.slots.len()];
    let mut rhs = vec![T::zero(); dofs.n_dofs()];
    const CHUNK: usize = 64;
    for o in &owners {
        let mut s: Vec<usize> = o
            .1
            .clone()
            .flat_map(|i| cache.domain.entries(i).map(|e| cache.domain.cells[e]))
            .chain(o.2.clone().flat_map(|i| cache.boundary.entries(i).map(|e| cache.boundary.cells[e])))
            .filter_map(|c| dofs.slot_of[c])
            .collect();
        s.sort_unstable();
        s.dedup();
        for &a in &s {
            adj[a].extend_from_slice(&s);
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let bs = ncomp * nb;
    let rows: Vec<Vec<usize>> = (0..dofs.n_dofs())
        .map(|r| {
            let slot = r / bs;
            adj[slot].iter().flat_map(|s| (s * bs)..((s + 1) * bs)).collect()
        })
        .collect();
    let mut a = SparseMatrix::from_pattern(rows);
    for chunk in owners.chunks(CHUNK) {
        let blocks: Vec<LocalBlock<T>> = chunk.par_iter().map(local).collect();
        for blk in blocks {
            let n = blk.slots.len() * bs;
            for (li, si) in blk.slots.iter().enumerate() {
                for k in 0..bs {
                    let r = si * bs + k;
                    let lr = li * bs + k;
                    rhs[r] += blk.rhs[lr];
                    for (lj, sj) in blk.slots.iter().enumerate() {
                        let pos = a.position(r, sj * bs).expect("pattern covers local block");
                        let src = &blk.mat[lr * n + lj * bs..lr * n + (lj + 1) * bs];
                        for (dst, v) in a.vals[pos..pos + bs].iter_mut().zip(src) {
                            *dst += *v;
                        }
                    }
                }
            }
        }
    }
    let mut matrix = a;

    let mut scaling = vec![T::one(); dofs.n_dofs()];
    if opts.support_scaling {
        for (s, f) in fr.iter().enumerate() {
            if *f < T::one() - T::lit(1e-12) && *f > T::zero() {
                let v = T::one() / f.sqrt();
                for k in 0..bs {
                    scaling[s * bs + k] = v;
                }
            }
        }
        matrix.scale_symmetric(&scaling);
        for (b, s) in rhs.iter_mut().zip(&scaling) {
            *b *= *s;
        }
    }
    Ok(DiscreteSystem { matrix, rhs, dofs, scaling })
}

/// Solves the scaled system and unscales the coefficients.
pub fn solve_system<T: Real>(sys: &DiscreteSystem<T>) -> Result<Solution<T>, FemError> {
    let y = solve_sparse(&sys.matrix, &sys.rhs)?;
    let residual = relative_residual(&sys.matrix, &y, &sys.rhs);
    let coeffs = y.iter().zip(&sys.scaling).map(|(v, s)| *v * *s).collect();
    Ok(Solution { dofs: sys.dofs.clone(), coeffs, residual })
}
