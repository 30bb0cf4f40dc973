use serde::{Deserialize, Serialize};

use super::point::{BoundingBox, GeoPoint};
use crate::error::{Error, Result};

/// Points closer than this (in degrees, lon/lat plane) to a ring edge are on the boundary.
pub const EDGE_TOLERANCE_DEG: f64 = 1e-12;

/// A polygon with one exterior ring and optional holes; rings are closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    exterior: Vec<GeoPoint>,
    holes: Vec<Vec<GeoPoint>>,
}

impl Polygon {
    pub fn new(exterior: Vec<GeoPoint>, holes: Vec<Vec<GeoPoint>>) -> Result<Self> {
        validate_ring(&exterior, "exterior ring")?;
        for (i, h) in holes.iter().enumerate() {
            validate_ring(h, &format!("hole {i}"))?;
        }
        Ok(Self { exterior, holes })
    }

    pub fn exterior(&self) -> &[GeoPoint] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<GeoPoint>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[GeoPoint]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::covering(&self.exterior).expect("validated ring is non-empty")
    }

    /// Even-odd containment; on any ring edge counts as inside.
    pub fn contains(&self, p: GeoPoint) -> bool {
        if !self.bbox().contains(p) {
            return false;
        }
        if self.rings().any(|r| on_ring_edge(r, p)) {
            return true;
        }
        self.rings().filter(|r| ring_crossings_odd(r, p)).count() % 2 == 1
    }
}

fn validate_ring(ring: &[GeoPoint], what: &str) -> Result<()> {
    if ring.len() < 4 {
        return Err(Error::InvalidGeometry(format!("{what} has {} vertices, need at least 4", ring.len())));
    }
    if ring.first() != ring.last() {
        return Err(Error::InvalidGeometry(format!("{what} is not closed")));
    }
    if let Some(p) = ring.iter().find(|p| !p.is_valid()) {
        return Err(Error::InvalidCoordinate { lat: p.lat, lon: p.lon });
    }
    Ok(())
}

fn on_ring_edge(ring: &[GeoPoint], p: GeoPoint) -> bool {
    ring.windows(2).any(|w| {
        let (ax, ay, bx, by) = (w[0].lon, w[0].lat, w[1].lon, w[1].lat);
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 { 0.0 } else { (((p.lon - ax) * dx + (p.lat - ay) * dy) / len2).clamp(0.0, 1.0) };
        let (cx, cy) = (ax + t * dx - p.lon, ay + t * dy - p.lat);
        (cx * cx + cy * cy).sqrt() <= EDGE_TOLERANCE_DEG
    })
}

/// Horizontal ray toward +lon; half-open rule on vertex latitudes.
fn ring_crossings_odd(ring: &[GeoPoint], p: GeoPoint) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if p.lon < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// One or more polygons; an administrative area may be multi-part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPolygon {
    polygons: Vec<Polygon>,
}

impl MultiPolygon {
    pub fn new(polygons: Vec<Polygon>) -> Result<Self> {
        if polygons.is_empty() {
            return Err(Error::InvalidGeometry("multipolygon has no parts".into()));
        }
        Ok(Self { polygons })
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn bbox(&self) -> BoundingBox {
        self.polygons.iter().map(Polygon::bbox).reduce(|a, b| a.union(&b)).expect("non-empty")
    }
}

impl From<Polygon> for MultiPolygon {
    fn from(p: Polygon) -> Self {
        Self { polygons: vec![p] }
    }
}

/// Ray-casting containment in the lon/lat plane. A point on any ring edge
/// is inside; a point strictly inside a hole is outside.
pub fn point_in_polygon(p: GeoPoint, poly: &MultiPolygon) -> bool {
    poly.polygons.iter().any(|part| part.contains(p))
}

/// Closed axis-aligned rectangle ring, counter-clockwise.
pub fn rectangle_ring(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Vec<GeoPoint> {
    vec![
        GeoPoint { lat: min_lat, lon: min_lon },
        GeoPoint { lat: min_lat, lon: max_lon },
        GeoPoint { lat: max_lat, lon: max_lon },
        GeoPoint { lat: max_lat, lon: min_lon },
        GeoPoint { lat: min_lat, lon: min_lon },
    ]
}
