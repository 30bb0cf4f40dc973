use std::collections::HashMap;

use super::point::{haversine_distance, GeoPoint, EARTH_RADIUS_M};
use crate::error::{Error, Result};

/// Uniform lat/lon grid over a point set.
///
/// Point ids are positions in the slice passed to [`SpatialIndex::build`].
/// Radius queries are exact: the grid only prunes candidates, the final
/// filter is always the haversine distance.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<GeoPoint>,
    cell_deg: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialIndex {
    pub fn build(points: &[GeoPoint], cell_deg: f64) -> Result<Self> {
        if !(cell_deg > 0.0 && cell_deg.is_finite()) {
            return Err(Error::Config(format!("cell size must be positive, got {cell_deg}")));
        }
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (id, p) in points.iter().enumerate() {
            cells.entry(cell_key(*p, cell_deg)).or_default().push(id);
        }
        Ok(Self { points: points.to_vec(), cell_deg, cells })
    }

    /// Index whose cell edge equals `radius_m` expressed in longitude degrees
    /// at the mean latitude of `points`.
    pub fn for_radius(points: &[GeoPoint], radius_m: f64) -> Self {
        let mean_lat =
            if points.is_empty() { 0.0 } else { points.iter().map(|p| p.lat).sum::<f64>() / points.len() as f64 };
        let cos = mean_lat.to_radians().cos().max(0.01);
        let cell = (radius_m / (EARTH_RADIUS_M * cos)).to_degrees().clamp(1e-6, 360.0);
        Self::build(points, cell).expect("clamped cell size is positive")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> GeoPoint {
        self.points[id]
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn cell_size_deg(&self) -> f64 {
        self.cell_deg
    }

    /// Ids with `haversine(p, q) <= radius_m`, ascending.
    pub fn neighbors_within(&self, p: GeoPoint, radius_m: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_candidate(p, radius_m, |id| {
            if haversine_distance(p, self.points[id]) <= radius_m {
                out.push(id);
            }
        });
        out.sort_unstable();
        out
    }

    /// Closest indexed point, ties broken by smallest id.
    pub fn nearest(&self, p: GeoPoint) -> Result<(usize, f64)> {
        if self.points.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let mut radius = (self.cell_deg.to_radians() * EARTH_RADIUS_M).max(1.0);
        loop {
            let mut best: Option<(f64, usize)> = None;
            self.for_each_candidate(p, radius, |id| {
                let d = haversine_distance(p, self.points[id]);
                if d <= radius && best.is_none_or(|(bd, bid)| d < bd || (d == bd && id < bid)) {
                    best = Some((d, id));
                }
            });
            if let Some((d, id)) = best {
                return Ok((id, d));
            }
            radius = if radius >= std::f64::consts::PI * EARTH_RADIUS_M { f64::INFINITY } else { radius * 2.0 };
        }
    }

    fn for_each_candidate(&self, p: GeoPoint, radius_m: f64, mut f: impl FnMut(usize)) {
        if self.points.is_empty() || radius_m.is_nan() || radius_m < 0.0 {
            return;
        }
        let Some((lat_range, lon_ranges)) = query_window(p, radius_m) else {
            for id in 0..self.points.len() {
                f(id);
            }
            return;
        };
        let c = self.cell_deg;
        let (i0, i1) = ((lat_range.0 / c).floor() as i64, (lat_range.1 / c).floor() as i64);
        let col_ranges: Vec<(i64, i64)> =
            lon_ranges.iter().map(|&(lo, hi)| ((lo / c).floor() as i64, (hi / c).floor() as i64)).collect();
        let window_cells: f64 = (i1 - i0 + 1) as f64 * col_ranges.iter().map(|&(a, b)| (b - a + 1) as f64).sum::<f64>();
        if window_cells > self.cells.len() as f64 {
            for (&(i, j), ids) in &self.cells {
                if i >= i0 && i <= i1 && col_ranges.iter().any(|&(a, b)| j >= a && j <= b) {
                    ids.iter().copied().for_each(&mut f);
                }
            }
        } else {
            for i in i0..=i1 {
                for &(a, b) in &col_ranges {
                    for j in a..=b {
                        if let Some(ids) = self.cells.get(&(i, j)) {
                            ids.iter().copied().for_each(&mut f);
                        }
                    }
                }
            }
        }
    }
}

fn cell_key(p: GeoPoint, cell: f64) -> (i64, i64) {
    ((p.lat / cell).floor() as i64, (p.lon / cell).floor() as i64)
}

type Range = (f64, f64);

/// Lat range and up to two lon ranges (split at the antimeridian) that
/// bound the spherical cap of `radius_m` around `p`. `None` means the cap
/// needs a full scan (pole inside the cap, or radius spans the globe).
fn query_window(p: GeoPoint, radius_m: f64) -> Option<(Range, Vec<Range>)> {
    if !radius_m.is_finite() {
        return None;
    }
    let delta = radius_m / EARTH_RADIUS_M;
    if delta >= std::f64::consts::FRAC_PI_2 {
        return None;
    }
    let margin = 1e-9;
    let delta_deg = delta.to_degrees();
    let lat_lo = p.lat - delta_deg - margin;
    let lat_hi = p.lat + delta_deg + margin;
    if lat_lo <= -90.0 || lat_hi >= 90.0 {
        return None;
    }
    let s = delta.sin() / p.lat.to_radians().cos();
    if s >= 1.0 {
        return None;
    }
    let dlon = s.asin().to_degrees() * (1.0 + 1e-9) + margin;
    let (lo, hi) = (p.lon - dlon, p.lon + dlon);
    let lons = if lo < -180.0 {
        vec![(lo + 360.0, 180.0), (-180.0, hi)]
    } else if hi > 180.0 {
        vec![(lo, 180.0), (-180.0, hi - 360.0)]
    } else {
        vec![(lo, hi)]
    };
    Some(((lat_lo, lat_hi), lons))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<GeoPoint> {
        v.iter().map(|&(lat, lon)| GeoPoint { lat, lon }).collect()
    }

    #[test]
    fn empty_index_answers_nothing() {
        let idx = SpatialIndex::build(&[], 0.01).unwrap();
        assert!(idx.neighbors_within(GeoPoint { lat: 0.0, lon: 0.0 }, 1e7).is_empty());
        assert!(matches!(idx.nearest(GeoPoint { lat: 0.0, lon: 0.0 }), Err(Error::EmptyIndex)));
    }

    #[test]
    fn rejects_non_positive_cell() {
        assert!(SpatialIndex::build(&[], 0.0).is_err());
        assert!(SpatialIndex::build(&[], -1.0).is_err());
    }

    #[test]
    fn identical_points_are_all_returned() {
        let p = (-33.9, 151.1);
        let idx = SpatialIndex::build(&pts(&[p, p, p]), 0.01).unwrap();
        assert_eq!(idx.neighbors_within(GeoPoint { lat: p.0, lon: p.1 }, 10.0), vec![0, 1, 2]);
        assert_eq!(idx.neighbors_within(GeoPoint { lat: p.0, lon: p.1 }, 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn zero_radius_returns_only_coincident() {
        let idx = SpatialIndex::build(&pts(&[(0.0, 0.0), (0.0, 0.0001), (0.0, 0.0)]), 0.01).unwrap();
        assert_eq!(idx.neighbors_within(GeoPoint { lat: 0.0, lon: 0.0 }, 0.0), vec![0, 2]);
    }

    #[test]
    fn huge_radius_returns_everything() {
        let idx = SpatialIndex::build(&pts(&[(89.0, 0.0), (-89.0, 179.9), (0.0, -179.9), (10.0, 10.0)]), 0.5).unwrap();
        let half_circumference = std::f64::consts::PI * EARTH_RADIUS_M;
        assert_eq!(idx.neighbors_within(GeoPoint { lat: 0.0, lon: 0.0 }, half_circumference), vec![0, 1, 2, 3]);
    }

    #[test]
    fn antimeridian_neighbors_found() {
        let idx = SpatialIndex::build(&pts(&[(0.0, 179.999), (0.0, -179.999)]), 0.001).unwrap();
        assert_eq!(idx.neighbors_within(GeoPoint { lat: 0.0, lon: 180.0 }, 500.0), vec![0, 1]);
    }

    #[test]
    fn nearest_single_and_exact() {
        let idx = SpatialIndex::build(&pts(&[(-33.0, 151.0)]), 0.01).unwrap();
        assert_eq!(idx.nearest(GeoPoint { lat: 40.0, lon: -70.0 }).unwrap().0, 0);
        let idx = SpatialIndex::build(&pts(&[(-33.0, 151.0), (-33.1, 151.1)]), 0.01).unwrap();
        let (id, d) = idx.nearest(GeoPoint { lat: -33.1, lon: 151.1 }).unwrap();
        assert_eq!((id, d), (1, 0.0));
    }

    #[test]
    fn nearest_ties_break_to_smallest_id() {
        let idx = SpatialIndex::build(&pts(&[(0.0, 0.01), (0.0, -0.01)]), 0.001).unwrap();
        assert_eq!(idx.nearest(GeoPoint { lat: 0.0, lon: 0.0 }).unwrap().0, 0);
    }
}
