//! Mollified finite elements on convex polygonal partitions.
//!
//! Every cell of a (clipped) Voronoi partition carries an independent local
//! polynomial. Convolving the cell-wise polynomials with a compactly
//! supported, unit-volume mollifier yields smooth basis functions whose
//! evaluation reduces to box/cell clipping followed by exact polynomial
//! integration. The [`fem`] module assembles Poisson and plane-stress
//! problems with weakly imposed (non-symmetric Nitsche) boundary conditions
//! and variationally consistent integration.
//!
//! All numerics are generic over [`Real`]; the aliases below fix `f64`.

// `!(x > 0)` deliberately rejects NaN; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod mollifier;
pub mod poly;
pub mod quadrature;
mod scalar;

pub use scalar::Real;

pub type Point = geometry::Point<f64>;
pub type Polygon = geometry::ConvexPolygon<f64>;
pub type HalfPlane = geometry::HalfPlane<f64>;
pub type SquareBox = geometry::SquareBox<f64>;
pub type Sdf = geometry::SignedDistance<f64>;
pub type Voronoi = geometry::VoronoiDiagram<f64>;
pub type Mollifier = mollifier::Mollifier1D<f64>;
pub type Mollifier2 = mollifier::MollifierTensor<f64>;
pub type CellBasis = basis::CellBasis<f64>;
pub type Mesh = fem::Mesh<f64>;
pub type Mesh1D = fem::one_d::Mesh1D<f64>;
