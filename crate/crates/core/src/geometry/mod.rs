//! Planar geometry substrate: polygons, triangulation, visibility, geodesics,
//! offsets and region booleans.

mod geodesic;
mod offset;
mod point;
mod polygon;
pub mod predicates;
mod region;
mod triangulation;
mod visibility;

pub use geodesic::{geodesic_distance, GeodesicIndex, SourceField};
pub use offset::{disk, geodesic_offset, offset_from_field, ARC_STEP_DEG, OFFSET_TOLERANCE};
pub use point::{Point, Segment};
pub use polygon::{signed_area, Loaded, PointLocation, Polygon, PolygonFile};
pub use region::{region_boolean, BooleanOp, Region, RegionLoops};
pub use triangulation::{dual_graph, edge_key, triangulate, DualEdge, DualTree, Edge, TriangulationGraph};
pub use visibility::{segment_visible, visibility_polygon, visibility_ring, visible};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("vertex {0} duplicates its successor")]
    DuplicateVertex(usize),
    #[error("polygon is not simple: edge {first} meets edge {second}")]
    SelfIntersection { first: usize, second: usize },
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("point ({}, {}) lies outside the polygon", .0.x, .0.y)]
    PointOutside(Point),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("cannot parse polygon: {0}")]
    Parse(String),
    #[error("cannot read polygon: {0}")]
    Io(String),
}
