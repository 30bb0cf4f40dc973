use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// A WGS84 position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    /// Validating constructor: finite, `lat ∈ [-90, 90]`, `lon ∈ [-180, 180]`.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if lat.is_finite() && lon.is_finite() && (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
            Ok(Self { lat, lon })
        } else {
            Err(Error::InvalidCoordinate { lat, lon })
        }
    }

    pub fn is_valid(&self) -> bool {
        Self::new(self.lat, self.lon).is_ok()
    }
}

/// Great-circle distance in meters (haversine formula).
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Axis-aligned lat/lon box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self> {
        let finite = [min_lat, min_lon, max_lat, max_lon].iter().all(|v| v.is_finite());
        if !finite || min_lat > max_lat || min_lon > max_lon {
            return Err(Error::InvalidGeometry(format!(
                "bounding box [{min_lat}, {min_lon}, {max_lat}, {max_lon}] is not ordered"
            )));
        }
        Ok(Self { min_lat, min_lon, max_lat, max_lon })
    }

    /// Smallest box covering `points`; `None` when empty.
    pub fn covering<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = Self { min_lat: first.lat, min_lon: first.lon, max_lat: first.lat, max_lon: first.lon };
        for p in it {
            bb.min_lat = bb.min_lat.min(p.lat);
            bb.min_lon = bb.min_lon.min(p.lon);
            bb.max_lat = bb.max_lat.max(p.lat);
            bb.max_lon = bb.max_lon.max(p.lon);
        }
        Some(bb)
    }

    /// Inclusive on every edge.
    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.min_lat && p.lat <= self.max_lat && p.lon >= self.min_lon && p.lon <= self.max_lon
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            min_lat: self.min_lat.min(other.min_lat),
            min_lon: self.min_lon.min(other.min_lon),
            max_lat: self.max_lat.max(other.max_lat),
            max_lon: self.max_lon.max(other.max_lon),
        }
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint { lat: (self.min_lat + self.max_lat) / 2.0, lon: (self.min_lon + self.max_lon) / 2.0 }
    }

    /// Lower bound on the haversine distance from `p` to any point inside the box.
    ///
    /// Uses `hav(d/R) = hav(Δφ) + cos φ1 cos φ2 hav(Δλ)` with each term
    /// minimised independently over the box.
    pub fn min_distance_lower_bound(&self, p: GeoPoint) -> f64 {
        let dlat = if p.lat < self.min_lat {
            self.min_lat - p.lat
        } else if p.lat > self.max_lat {
            p.lat - self.max_lat
        } else {
            0.0
        };
        let dlon = if p.lon >= self.min_lon && p.lon <= self.max_lon {
            0.0
        } else {
            let d1 = wrap_lon_delta(self.min_lon - p.lon).abs();
            let d2 = wrap_lon_delta(self.max_lon - p.lon).abs();
            d1.min(d2)
        };
        let cos_box = self.min_lat.to_radians().cos().min(self.max_lat.to_radians().cos()).max(0.0);
        let h = (dlat.to_radians() / 2.0).sin().powi(2)
            + p.lat.to_radians().cos().max(0.0) * cos_box * (dlon.to_radians() / 2.0).sin().powi(2);
        let d = 2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin();
        // absorb rounding so the bound never exceeds a true distance
        d * (1.0 - 1e-9) - 1e-6
    }
}

/// Wrap a longitude difference into `[-180, 180]`.
pub fn wrap_lon_delta(d: f64) -> f64 {
    let mut d = d % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d < -180.0 {
        d += 360.0;
    }
    d
}
