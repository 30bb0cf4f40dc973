//! WGS84 geometry: distances, polygon containment, polyline projection and
//! a grid index for exact radius / nearest-neighbour queries.

mod index;
mod point;
mod polygon;
mod polyline;

pub use index::SpatialIndex;
pub use point::{haversine_distance, wrap_lon_delta, BoundingBox, GeoPoint, EARTH_RADIUS_M};
pub use polygon::{point_in_polygon, rectangle_ring, MultiPolygon, Polygon, EDGE_TOLERANCE_DEG};
pub use polyline::{project_to_polyline, project_to_segment, LineHit, LineIndex};
