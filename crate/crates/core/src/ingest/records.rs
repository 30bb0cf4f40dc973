use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{BoundingBox, GeoPoint, MultiPolygon};

/// One GPS fix of a trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripFix {
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub location: GeoPoint,
}

/// The fixes of a single driving journey, ordered by timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub trip_id: String,
    pub points: Vec<TripFix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationKind {
    ExistingFast,
    ExistingDestination,
    Approved,
}

impl StationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StationKind::ExistingFast => "existing_fast",
            StationKind::ExistingDestination => "existing_destination",
            StationKind::Approved => "approved",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "existing_fast" => Some(StationKind::ExistingFast),
            "existing_destination" => Some(StationKind::ExistingDestination),
            "approved" => Some(StationKind::Approved),
            _ => None,
        }
    }
}

/// An existing or approved charging station from the current plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub station_id: String,
    pub kind: StationKind,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoiCategory {
    FastFood,
    Fuel,
    Tourism,
}

impl PoiCategory {
    pub const ALL: [PoiCategory; 3] = [PoiCategory::FastFood, PoiCategory::Fuel, PoiCategory::Tourism];

    pub fn as_str(self) -> &'static str {
        match self {
            PoiCategory::FastFood => "fast_food",
            PoiCategory::Fuel => "fuel",
            PoiCategory::Tourism => "tourism",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast_food" => Some(PoiCategory::FastFood),
            "fuel" => Some(PoiCategory::Fuel),
            "tourism" => Some(PoiCategory::Tourism),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub poi_id: String,
    pub category: PoiCategory,
    pub location: GeoPoint,
}

/// Lowest and highest altitude a route vertex may carry, meters.
pub const ALTITUDE_RANGE_M: (f64, f64) = (-100.0, 3000.0);

/// A road polyline with one altitude sample per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub route_id: String,
    pub polyline: Vec<GeoPoint>,
    pub altitudes: Vec<f64>,
}

impl RouteRecord {
    pub fn new(route_id: String, polyline: Vec<GeoPoint>, altitudes: Vec<f64>) -> Result<Self> {
        if polyline.len() < 2 {
            return Err(Error::DegeneratePolyline(polyline.len()));
        }
        if polyline.len() != altitudes.len() {
            return Err(Error::LengthMismatch {
                what: "route altitudes vs vertices",
                left: altitudes.len(),
                right: polyline.len(),
            });
        }
        if let Some(a) =
            altitudes.iter().find(|&&a| !(a.is_finite() && a >= ALTITUDE_RANGE_M.0 && a <= ALTITUDE_RANGE_M.1))
        {
            return Err(Error::InvalidGeometry(format!(
                "altitude {a} outside [{}, {}] m",
                ALTITUDE_RANGE_M.0, ALTITUDE_RANGE_M.1
            )));
        }
        Ok(Self { route_id, polyline, altitudes })
    }
}

/// A local government area boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgaRecord {
    pub lga_name: String,
    pub boundary: MultiPolygon,
}

/// Row-major grid of fire-danger change values.
///
/// Row 0 is the southernmost row and column 0 the westernmost; cells are
/// half-open toward the maximum edge, which is itself inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireRiskGrid {
    bbox: BoundingBox,
    n_rows: usize,
    n_cols: usize,
    cells: Vec<Option<f64>>,
}

impl FireRiskGrid {
    pub fn new(bbox: BoundingBox, n_rows: usize, n_cols: usize, cells: Vec<Option<f64>>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidGeometry("fire grid needs at least one row and column".into()));
        }
        if n_rows * n_cols != cells.len() {
            return Err(Error::LengthMismatch {
                what: "fire grid cells vs n_rows*n_cols",
                left: cells.len(),
                right: n_rows * n_cols,
            });
        }
        if cells.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("fire grid cell is not finite".into()));
        }
        Ok(Self { bbox, n_rows, n_cols, cells })
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    /// (row, col) of the cell containing `p`, or `None` outside the bbox.
    pub fn cell_of(&self, p: GeoPoint) -> Option<(usize, usize)> {
        if !self.bbox.contains(p) {
            return None;
        }
        let h = (self.bbox.max_lat - self.bbox.min_lat) / self.n_rows as f64;
        let w = (self.bbox.max_lon - self.bbox.min_lon) / self.n_cols as f64;
        let idx = |off: f64, size: f64, n: usize| -> usize {
            if size > 0.0 {
                ((off / size).floor() as usize).min(n - 1)
            } else {
                0
            }
        };
        Some((idx(p.lat - self.bbox.min_lat, h, self.n_rows), idx(p.lon - self.bbox.min_lon, w, self.n_cols)))
    }

    pub fn value_at(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.n_cols + col]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandKind {
    Origin,
    Dwell,
    Destination,
}

/// A trip-derived location where charging demand is assumed to arise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandPoint {
    /// Dense 0-based id.
    pub point_id: usize,
    pub location: GeoPoint,
    pub source_trip: String,
    pub timestamp: i64,
    pub kind: DemandKind,
}
