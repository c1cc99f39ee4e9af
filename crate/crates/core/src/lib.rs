//! Memory-budgeted Euclidean hub labeling over grid regions.

pub mod compress;
pub mod error;
pub mod geometry;
pub mod grid_index;
pub mod hub_label;
pub mod index_file;
pub mod map;
pub mod oracle;
pub mod pipeline;
pub mod query;
pub mod report;
pub mod svg;
pub mod visibility;
pub mod workload;

pub use error::{Error, Result};
pub use geometry::Point;
pub use map::{
    extract_obstacles, load_map, parse_movingai_map, parse_polygon_map, ConvexVertex, GridMap,
    PolygonalMap,
};
