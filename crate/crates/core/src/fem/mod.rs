//! Mesh construction, weak-form assembly with non-symmetric Nitsche
//! boundary terms, variationally consistent integration, solution and
//! error norms.

pub mod assembly;
pub mod experiments;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod one_d;
pub mod problem;
pub mod quadcache;
pub mod vci;

pub use assembly::{assemble, solve_system, DiscreteSystem, DofMap, Solution, SolveOptions};
pub use experiments::{ErrorRow, StudyOptions};
pub use linalg::SparseMatrix;
pub use mesh::{lattice_seeds, perturb_seeds, refine_cells, BoundarySegment, Mesh, MeshCell, MeshOptions};
pub use norms::{error_norms, ErrorNorms};
pub use problem::{ExactSolution, Material, Problem, ProblemKind};
pub use quadcache::{PointSet, QuadCache, QuadConfig, RuleSpec};
pub use vci::{vci_correct, vci_correct_degree, VciCorrection};

use crate::geometry::GeometryError;
use crate::mollifier::MollifierError;
use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mollifier(#[from] MollifierError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("mollifier box around domain point ({x}, {y}) leaves the seeded region; add ghost seeds")]
    GhostCoverage { x: f64, y: f64 },
    #[error("domain point ({x}, {y}) is not covered by any cell")]
    Coverage { x: f64, y: f64 },
    #[error("no cell intersects the domain")]
    NoActiveCells,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is singular to working precision at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("correction Gram matrix of cell {cell} is singular")]
    VciSingular { cell: usize },
    #[error("unknown exact solution '{0}'")]
    UnknownSolution(String),
}
