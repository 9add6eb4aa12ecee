//! Convex planar geometry: polygons, clipping, hulls, Minkowski sums,
//! Voronoi diagrams and signed distance descriptions of domains.

mod hull;
mod index;
mod point;
mod polygon;
mod sdf;
mod voronoi;

pub use hull::{convex_hull, minkowski_sum};
pub use index::BucketGrid;
pub use point::{Aabb, Point};
pub use polygon::{
    clip_halfplane, intersect_box, intersect_convex, triangulate, ConvexPolygon, HalfPlane, SquareBox, Triangle,
};
pub use sdf::{classify_polygon, clip_cell_to_domain, CellLabel, SignedDistance};
pub use voronoi::{classify_cells, voronoi, VoronoiDiagram};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    Degenerate(&'static str),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("polygon is not convex at vertex {0}")]
    NotConvex(usize),
    #[error("duplicate polygon vertex at {0}")]
    DuplicateVertex(usize),
    #[error("seeds {0} and {1} coincide")]
    DuplicateSeed(usize, usize),
    #[error("half-plane normal must be non-zero")]
    InvalidHalfPlane,
    #[error("box half width must be positive")]
    InvalidBox,
}
