//! Refinement studies: the 1D ladder, the perturbed square and the plate
//! with a hole, plus the patch tests.

use std::time::Instant;

use super::norms::norm_degree;
use super::one_d::{error_norms_1d, solve_poisson_1d, Mesh1D};
use super::{
    assemble, error_norms, lattice_seeds, perturb_seeds, refine_cells, solve_system, vci_correct, vci_correct_degree, DiscreteSystem,
    ErrorNorms, ExactSolution, FemError, Mesh, MeshOptions, Problem, QuadCache, QuadConfig, Solution, SolveOptions,
    VciCorrection,
};
use crate::basis::{local_coefficients_2d, reproduction_coefficients_2d};
use crate::geometry::{SignedDistance, ConvexPolygon, Point};
use crate::mollifier::{Mollifier1D, MollifierKind};
use crate::poly::Poly2;
use crate::Real;

/// One refinement level of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub n_c: usize,
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
    pub energy: f64,
    pub n_dof: usize,
    pub wall_time_ms: f64,
}

/// Knobs shared by the 2D studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Weak-form quadrature; `None` picks [`QuadConfig::for_degree`].
    pub quad: Option<QuadConfig>,
    pub vci: bool,
    /// Degree of the correction monomials; `None` uses `q - 1`.
    pub vci_degree: Option<usize>,
    pub solve: SolveOptions,
    /// Mollifier of the 2D meshes, of width `2 χ h`.
    pub mollifier: MollifierKind,
    pub chi: f64,
    /// Norm quadrature exactness; `None` uses `2 (q + deg m + 1)`.
    pub norm_degree: Option<usize>,
    pub rng_seed: u64,
    /// Seed perturbation as a fraction of the mollifier half width.
    pub perturbation: f64,
    /// Report zero wall times so outputs are reproducible byte for byte.
    pub deterministic: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            quad: None,
            vci: true,
            vci_degree: None,
            solve: SolveOptions::default(),
            mollifier: MollifierKind::Quartic,
            chi: 1.0,
            norm_degree: None,
            rng_seed: 2021,
            perturbation: 0.15,
            deterministic: false,
        }
    }
}

/// Least-squares slope of `ln f(row)` against `ln h`.
pub fn slope(rows: &[ErrorRow], f: impl Fn(&ErrorRow) -> f64) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.ln(), f(r).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn elapsed_ms(t: Instant, opts: &StudyOptions) -> f64 {
    if opts.deterministic {
        0.0
    } else {
        t.elapsed().as_secs_f64() * 1e3
    }
}

/// `sin(3πx)` on the bisected six-cell mesh, levels `0..=levels`.
pub fn study_1d(degree: usize, q_m: usize, chi: f64, levels: usize, deterministic: bool) -> Result<Vec<ErrorRow>, FemError> {
    let exact = ExactSolution::<f64>::Sin1d;
    (0..=levels)
        .map(|l| {
            let t = Instant::now();
            let mesh = Mesh1D::<f64>::bisected(l, degree, q_m, chi)?;
            let sol = solve_poisson_1d(&mesh, &exact)?;
            let e = error_norms_1d(&mesh, &sol, &exact)?;
            Ok(ErrorRow {
                n_c: mesh.n_domain(),
                h: mesh.mean_size(),
                l2: e.l2,
                h1: e.h1,
                energy: e.energy,
                n_dof: sol.n_dof,
                wall_time_ms: if deterministic { 0.0 } else { t.elapsed().as_secs_f64() * 1e3 },
            })
        })
        .collect()
}

fn mollifier_for<T: Real>(h: T, opts: &StudyOptions) -> Result<Mollifier1D<T>, FemError> {
    if !(opts.chi > 0.0) {
        return Err(FemError::InvalidConfig("mollifier width factor must be positive".into()));
    }
    Ok(Mollifier1D::new(opts.mollifier, T::lit(2.0 * opts.chi) * h)?)
}

fn ghost_rings(opts: &StudyOptions) -> usize {
    (opts.chi.ceil() as usize).max(1)
}

/// Perturbed `n × n` Voronoi mesh of the unit square with enough rings of
/// ghost seeds to cover the mollifier, of width `2 χ / n`.
pub fn square_mesh<T: Real>(n: usize, degree: usize, opts: &StudyOptions) -> Result<Mesh<T>, FemError> {
    if n == 0 {
        return Err(FemError::InvalidConfig("grid size must be positive".into()));
    }
    let h = T::one() / T::from_usize_lossy(n);
    let m = mollifier_for(h, opts)?;
    let hw = m.halfwidth();
    let (mut seeds, bounds) = lattice_seeds::<T>(n, ghost_rings(opts));
    let sdf = SignedDistance::unit_square();
    perturb_seeds(&mut seeds, &sdf, h, T::lit(opts.perturbation) * hw, opts.rng_seed);
    Mesh::from_seeds(&seeds, &bounds, &sdf, &MeshOptions { degree, mollifier: m, curved: false, scale: None })
}

/// Quarter plate `[0,1]²` minus the hole, seeded by a perturbed 6 × 6
/// lattice and refined `level` times through centroids and edge midpoints.
pub fn plate_mesh<T: Real>(level: usize, degree: usize, opts: &StudyOptions) -> Result<Mesh<T>, FemError> {
    let n = 6;
    let h = T::one() / T::from_usize_lossy(n);
    let (mut seeds, bounds) = lattice_seeds::<T>(n, ghost_rings(opts));
    let sdf = SignedDistance::plate_with_hole(T::one(), T::lit(0.25));
    let hw0 = mollifier_for(h, opts)?.halfwidth();
    perturb_seeds(&mut seeds, &sdf, h, T::lit(opts.perturbation) * hw0, opts.rng_seed);
    let vd = crate::geometry::voronoi(&seeds, &bounds)?;
    let (mut polys, mut centers): (Vec<ConvexPolygon<T>>, Vec<Point<T>>) = (vd.cells, vd.seeds);
    for _ in 0..level {
        let (p, c) = refine_cells(polys.iter());
        polys = p;
        centers = c;
    }
    let m = mollifier_for(h / T::from_usize_lossy(1 << level), opts)?;
    let opts = MeshOptions { degree, mollifier: m, curved: degree >= 2, scale: None };
    Mesh::from_cells(polys, centers, &bounds, &sdf, &opts)
}

/// Voronoi mesh of user seeds inside `sdf`, whose bounding box must be
/// `[0,1]²`. Ghost seeds on a lattice of the mean seed spacing pad the box.
pub fn seeded_mesh<T: Real>(
    seeds: &[Point<T>],
    sdf: &SignedDistance<T>,
    degree: usize,
    opts: &StudyOptions,
) -> Result<Mesh<T>, FemError> {
    let inside = seeds.iter().filter(|s| sdf.distance(**s) > T::zero()).count();
    if inside == 0 {
        return Err(FemError::InvalidConfig("no seed lies inside the domain".into()));
    }
    if seeds.iter().any(|s| s.x < T::zero() || s.y < T::zero() || s.x > T::one() || s.y > T::one()) {
        return Err(FemError::InvalidConfig("seeds must lie in the unit square".into()));
    }
    let n = (inside as f64).sqrt().ceil() as usize;
    let h = T::one() / T::from_usize_lossy(n);
    let (lattice, bounds) = lattice_seeds::<T>(n, ghost_rings(opts));
    let mut all = seeds.to_vec();
    all.extend(lattice.into_iter().filter(|p| p.x < T::zero() || p.y < T::zero() || p.x > T::one() || p.y > T::one()));
    let opts = MeshOptions { degree, mollifier: mollifier_for(h, opts)?, curved: false, scale: None };
    Mesh::from_seeds(&all, &bounds, sdf, &opts)
}

/// Quadrature cache, gradient correction and assembled system.
pub type Discretisation<T> = (QuadCache<T>, VciCorrection<T>, DiscreteSystem<T>);

/// Quadrature, correction and assembly of `problem` on `mesh`.
pub fn discretise<T: Real>(
    mesh: &Mesh<T>,
    problem: &Problem<T>,
    opts: &StudyOptions,
) -> Result<Discretisation<T>, FemError> {
    let quad = opts.quad.unwrap_or_else(|| QuadConfig::for_degree(mesh.degree));
    let cache = QuadCache::build(mesh, quad)?;
    let vci = match (opts.vci, opts.vci_degree) {
        (false, _) => VciCorrection::none(mesh.cells.len()),
        (true, Some(d)) => vci_correct_degree(mesh, &cache, d)?,
        (true, None) => vci_correct(mesh, &cache)?,
    };
    let sys = assemble(mesh, &cache, &vci, problem, opts.solve)?;
    Ok((cache, vci, sys))
}

/// Solves `problem` on `mesh` and measures the error.
pub fn solve_and_measure<T: Real>(
    mesh: &Mesh<T>,
    problem: &Problem<T>,
    opts: &StudyOptions,
) -> Result<(Solution<T>, ErrorNorms<T>), FemError> {
    let (_, _, sys) = discretise(mesh, problem, opts)?;
    let sol = solve_system(&sys)?;
    let deg = opts.norm_degree.unwrap_or_else(|| norm_degree(mesh));
    let e = error_norms(mesh, &sol, &problem.exact, deg)?;
    Ok((sol, e))
}

fn row<T: Real>(mesh: &Mesh<T>, sol: &Solution<T>, e: &ErrorNorms<T>, t: Instant, opts: &StudyOptions) -> ErrorRow {
    ErrorRow {
        n_c: mesh.domain_cells().count(),
        h: mesh.scale.to_f64_lossy(),
        l2: e.l2.to_f64_lossy(),
        h1: e.h1.to_f64_lossy(),
        energy: e.energy.to_f64_lossy(),
        n_dof: sol.coeffs.len(),
        wall_time_ms: elapsed_ms(t, opts),
    }
}

/// Patch test on the perturbed `n × n` mesh.
pub fn patch_test<T: Real>(
    n: usize,
    degree: usize,
    field: ExactSolution<T>,
    opts: &StudyOptions,
) -> Result<ErrorNorms<T>, FemError> {
    let mesh = square_mesh::<T>(n, degree, opts)?;
    Ok(solve_and_measure(&mesh, &Problem::dirichlet(field), opts)?.1)
}

/// `sin(πx) sin(πy)` on perturbed `n × n` meshes.
pub fn study_square(degree: usize, ns: &[usize], opts: &StudyOptions) -> Result<Vec<ErrorRow>, FemError> {
    let problem = Problem::dirichlet(ExactSolution::<f64>::Sin2d);
    ns.iter()
        .map(|&n| {
            let t = Instant::now();
            let mesh = square_mesh::<f64>(n, degree, opts)?;
            let (sol, e) = solve_and_measure(&mesh, &problem, opts)?;
            Ok(row(&mesh, &sol, &e, t, opts))
        })
        .collect()
}

/// Plate with a hole on nested refinements `0..=levels`; the energy column
/// is the absolute energy-norm error.
pub fn study_plate(degree: usize, levels: usize, opts: &StudyOptions) -> Result<Vec<ErrorRow>, FemError> {
    let problem = Problem::dirichlet(ExactSolution::<f64>::plate_hole());
    (0..=levels)
        .map(|l| {
            let t = Instant::now();
            let mesh = plate_mesh::<f64>(l, degree, opts)?;
            let (sol, e) = solve_and_measure(&mesh, &problem, opts)?;
            log::info!("plate level {l}: relative energy error {:.3e}", e.relative_energy());
            Ok(row(&mesh, &sol, &e, t, opts))
        })
        .collect()
}

/// Coefficients reproducing the polynomial fields `polys` (one per
/// component) on the active cells of a system, in its scaled unknowns.
pub fn polynomial_unknowns<T: Real>(mesh: &Mesh<T>, sys: &DiscreteSystem<T>, polys: &[Poly2<T>]) -> Vec<T> {
    let d = &sys.dofs;
    let mut x = vec![T::zero(); d.n_dofs()];
    for (c, p) in polys.iter().enumerate().take(d.ncomp) {
        let g = reproduction_coefficients_2d(p, &mesh.mollifier.factor);
        for (s, cell) in d.slots.iter().enumerate() {
            let loc = local_coefficients_2d(&g, &mesh.cells[*cell].basis);
            for (a, v) in loc.into_iter().enumerate() {
                let k = d.dof(s, c, a);
                x[k] = v / sys.scaling[k];
            }
        }
    }
    x
}
