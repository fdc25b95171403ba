//! Planar compact sets (crack polylines and solid polygons) with certified
//! distances and measures.

mod hausdorff;
mod measure;
mod point;
mod scene;

pub use hausdorff::{
    directed_hausdorff, distance_to_set, hausdorff_complementary_distance, hausdorff_distance,
    CertifiedScalar,
};
pub(crate) use hausdorff::dist_raw;
pub use measure::{length_measure, symmetric_difference_area};
pub use point::{
    closest_param, closest_point_on_segment, dist_point_segment, dist_segment_segment,
    point_in_polygon, segments_intersect, signed_area2, Point, GEOM_EPS,
};
pub use scene::{
    build_compact_set, is_closed, polygon_edges, polyline_length, polyline_segments, CompactScene,
    SceneSpec,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("malformed scene: {0}")]
    MalformedSpec(String),
    #[error("vertex ({x}, {y}) lies outside the box of radius {radius}")]
    OutOfBox { x: f64, y: f64, radius: f64 },
    #[error("zero-length segment {segment} in polyline {polyline}")]
    DegenerateSegment { polyline: usize, segment: usize },
    #[error("scene is empty")]
    EmptyScene,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}
