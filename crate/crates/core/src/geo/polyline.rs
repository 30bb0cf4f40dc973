use super::point::{haversine_distance, wrap_lon_delta, BoundingBox, GeoPoint, EARTH_RADIUS_M};
use crate::error::{Error, Result};

/// Closest point to `p` on segment `a`–`b`, computed in a local
/// equirectangular frame centred on `p`.
pub fn project_to_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> GeoPoint {
    // meters per degree of latitude
    let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
    let kx = k * p.lat.to_radians().cos();
    let (ax, ay) = (wrap_lon_delta(a.lon - p.lon) * kx, (a.lat - p.lat) * k);
    let (bx, by) = (wrap_lon_delta(b.lon - p.lon) * kx, (b.lat - p.lat) * k);
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0) };
    if t == 0.0 {
        return a;
    }
    if t == 1.0 {
        return b;
    }
    let (x, y) = (ax + t * dx, ay + t * dy);
    let lat = (p.lat + y / k).clamp(-90.0, 90.0);
    let lon = if kx > 0.0 { p.lon + x / kx } else { p.lon };
    GeoPoint { lat, lon: wrap_lon(lon) }
}

fn wrap_lon(lon: f64) -> f64 {
    if lon > 180.0 {
        lon - 360.0
    } else if lon < -180.0 {
        lon + 360.0
    } else {
        lon
    }
}

/// Snap `p` onto a polyline: per segment the closest point is found in the
/// local frame, and the segment whose snapped point is nearest (haversine)
/// wins, earliest segment on ties.
pub fn project_to_polyline(p: GeoPoint, polyline: &[GeoPoint]) -> Result<(GeoPoint, f64)> {
    if polyline.len() < 2 {
        return Err(Error::DegeneratePolyline(polyline.len()));
    }
    let (_, q, d) = closest_on_segments(p, polyline).expect("at least one segment");
    Ok((q, d))
}

/// (segment index, snapped point, distance) of the best segment.
fn closest_on_segments(p: GeoPoint, vertices: &[GeoPoint]) -> Option<(usize, GeoPoint, f64)> {
    let mut best: Option<(usize, GeoPoint, f64)> = None;
    for (i, w) in vertices.windows(2).enumerate() {
        let q = project_to_segment(p, w[0], w[1]);
        let d = haversine_distance(p, q);
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((i, q, d));
        }
    }
    best
}

/// Result of a nearest-line query against a [`LineIndex`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineHit {
    /// Position of the line in the slice the index was built from.
    pub line: usize,
    pub segment: usize,
    pub point: GeoPoint,
    pub distance_m: f64,
}

const CHUNK_SEGMENTS: usize = 16;

#[derive(Debug, Clone)]
struct Chunk {
    line: usize,
    first_segment: usize,
    bbox: BoundingBox,
}

/// Many polylines split into short chunks with bounding boxes, so that a
/// nearest-line query only projects onto chunks whose distance lower bound
/// can still beat the current best. Results equal a full scan over every
/// segment of every line (ties to lowest line, then lowest segment).
#[derive(Debug, Clone, Default)]
pub struct LineIndex {
    lines: Vec<Vec<GeoPoint>>,
    chunks: Vec<Chunk>,
}

impl LineIndex {
    pub fn new(lines: Vec<Vec<GeoPoint>>) -> Result<Self> {
        let mut chunks = Vec::new();
        for (li, line) in lines.iter().enumerate() {
            if line.len() < 2 {
                return Err(Error::DegeneratePolyline(line.len()));
            }
            let n_seg = line.len() - 1;
            let mut s = 0;
            while s < n_seg {
                let e = (s + CHUNK_SEGMENTS).min(n_seg);
                let bbox = BoundingBox::covering(&line[s..=e]).expect("non-empty");
                chunks.push(Chunk { line: li, first_segment: s, bbox });
                s = e;
            }
        }
        Ok(Self { lines, chunks })
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[Vec<GeoPoint>] {
        &self.lines
    }

    pub fn nearest(&self, p: GeoPoint) -> Option<LineHit> {
        let mut order: Vec<(f64, usize)> =
            self.chunks.iter().enumerate().map(|(i, c)| (c.bbox.min_distance_lower_bound(p), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best: Option<LineHit> = None;
        for (lb, ci) in order {
            if let Some(b) = best {
                if lb > b.distance_m {
                    break;
                }
            }
            let c = &self.chunks[ci];
            let line = &self.lines[c.line];
            let end = (c.first_segment + CHUNK_SEGMENTS).min(line.len() - 1);
            let Some((seg, q, d)) = closest_on_segments(p, &line[c.first_segment..=end]) else {
                continue;
            };
            let hit = LineHit { line: c.line, segment: c.first_segment + seg, point: q, distance_m: d };
            let better = best.is_none_or(|b| {
                d < b.distance_m || (d == b.distance_m && (hit.line, hit.segment) < (b.line, b.segment))
            });
            if better {
                best = Some(hit);
            }
        }
        best
    }
}
