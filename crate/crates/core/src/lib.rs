//! Constraint-aware siting of EV charging stations from vehicle trip data.
//!
//! Trips are cleaned and reduced to demand points, which are bucketed by
//! local government area (LGA) and clustered with a DBSCAN whose radius and
//! density threshold vary per point with nearby POIs, roads, altitude and
//! fire danger. Each cluster becomes a recommended site, snapped to a POI or
//! road and suppressed if an existing station already serves it.

pub mod cluster;
pub mod config;
pub mod constraints;
mod error;
pub mod evaluate;
pub mod export;
pub mod geo;
pub mod ingest;
pub mod pipeline;
pub mod recommend;
pub mod synth;

pub use cluster::{cluster_all, dbscan_lga, dbscan_with_params, ClusterAssignment, LgaClusterResult};
pub use config::RunConfig;
pub use constraints::{adjust_params, AdjustedParams, ConstraintConfig, LayerIndex, PointContext};
pub use error::{Error, Result};
pub use evaluate::{EvaluateConfig, EvaluationReport};
pub use export::{FeatureKind, OutputFeature};
pub use geo::{haversine_distance, BoundingBox, GeoPoint, MultiPolygon, Polygon};
pub use ingest::{DemandPoint, LgaRecord, PoiRecord, RouteRecord, StationRecord, TripRecord};
pub use recommend::{ChargerKind, RecommendConfig, Recommendation, SnapTarget};
pub use synth::{ScenarioManifest, ScenarioSpec};
