use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::records::{DemandKind, DemandPoint, TripFix, TripRecord};
use crate::error::{Error, Result};
use crate::geo::{haversine_distance, GeoPoint};

/// Exact header of the trips CSV.
pub const TRIPS_CSV_HEADER: [&str; 4] = ["trip_id", "timestamp", "lat", "lon"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TripFormat {
    #[default]
    Csv,
    Geojson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalformedRow {
    /// 1-based line number for CSV, feature index for GeoJSON.
    pub row: usize,
    pub reason: String,
}

/// What the trip loader kept and dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadSummary {
    pub total_rows: usize,
    pub malformed: Vec<MalformedRow>,
    /// Trips dropped for having fewer than two valid fixes.
    pub short_trips: usize,
}

impl LoadSummary {
    pub fn malformed_rows(&self) -> usize {
        self.malformed.len()
    }
}

/// Load trips from CSV (`trip_id,timestamp,lat,lon`) or GeoJSON
/// (LineString features with `trip_id` and a parallel `timestamps` array).
///
/// Malformed rows are dropped and reported; more than half malformed is an
/// error. Fixes are grouped by trip id (ascending) and sorted by timestamp;
/// strictly increasing timestamps are only guaranteed after [`clean_trips`].
pub fn load_trips(path: &Path, format: TripFormat) -> Result<(Vec<TripRecord>, LoadSummary)> {
    let (rows, mut summary) = match format {
        TripFormat::Csv => read_csv_rows(path)?,
        TripFormat::Geojson => read_geojson_rows(path)?,
    };
    if summary.malformed_rows() * 2 > summary.total_rows {
        return Err(Error::CorruptInput {
            path: path.to_path_buf(),
            malformed: summary.malformed_rows(),
            total: summary.total_rows,
        });
    }
    let mut grouped: BTreeMap<String, Vec<TripFix>> = BTreeMap::new();
    for (trip_id, fix) in rows {
        grouped.entry(trip_id).or_default().push(fix);
    }
    let mut trips = Vec::with_capacity(grouped.len());
    for (trip_id, mut points) in grouped {
        points.sort_by_key(|f| f.timestamp);
        if points.len() < 2 {
            summary.short_trips += 1;
            continue;
        }
        trips.push(TripRecord { trip_id, points });
    }
    Ok((trips, summary))
}

fn read_csv_rows(path: &Path) -> Result<(Vec<(String, TripFix)>, LoadSummary)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().map(str::trim).ne(TRIPS_CSV_HEADER) {
        return Err(Error::schema(path, "line 1", "header", format!("expected `{}`", TRIPS_CSV_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    let mut summary = LoadSummary::default();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        summary.total_rows += 1;
        let parsed = match rec {
            Ok(r) => parse_csv_row(&r),
            Err(e) => Err(e.to_string()),
        };
        match parsed {
            Ok(row) => rows.push(row),
            Err(reason) => summary.malformed.push(MalformedRow { row: line, reason }),
        }
    }
    Ok((rows, summary))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::schema(path, "line 1", "header", format!("{other:?}")),
    }
}

fn parse_csv_row(r: &csv::StringRecord) -> std::result::Result<(String, TripFix), String> {
    if r.len() != 4 {
        return Err(format!("expected 4 columns, found {}", r.len()));
    }
    let trip_id = r[0].trim();
    if trip_id.is_empty() {
        return Err("empty trip_id".into());
    }
    let timestamp: i64 = r[1].trim().parse().map_err(|_| format!("timestamp `{}` is not an integer", &r[1]))?;
    let lat: f64 = r[2].trim().parse().map_err(|_| format!("lat `{}` is not a number", &r[2]))?;
    let lon: f64 = r[3].trim().parse().map_err(|_| format!("lon `{}` is not a number", &r[3]))?;
    let location = GeoPoint::new(lat, lon).map_err(|e| e.to_string())?;
    Ok((trip_id.to_string(), TripFix { timestamp, location }))
}

fn read_geojson_rows(path: &Path) -> Result<(Vec<(String, TripFix)>, LoadSummary)> {
    let doc = super::layers::read_json(path)?;
    let features = super::layers::features(path, &doc)?;
    let mut rows = Vec::new();
    let mut summary = LoadSummary::default();
    for (fi, f) in features.iter().enumerate() {
        let coords = f
            .pointer("/geometry/coordinates")
            .and_then(Value::as_array)
            .filter(|_| f.pointer("/geometry/type") == Some(&Value::from("LineString")));
        let stamps = f.pointer("/properties/timestamps").and_then(Value::as_array);
        let trip_id = f.pointer("/properties/trip_id").and_then(Value::as_str);
        let (Some(coords), Some(stamps), Some(trip_id)) = (coords, stamps, trip_id) else {
            let n = f.pointer("/geometry/coordinates").and_then(Value::as_array).map_or(1, |c| c.len().max(1));
            summary.total_rows += n;
            for _ in 0..n {
                summary.malformed.push(MalformedRow {
                    row: fi,
                    reason: "feature needs LineString geometry, `trip_id` and `timestamps`".into(),
                });
            }
            continue;
        };
        summary.total_rows += coords.len();
        if coords.len() != stamps.len() {
            for _ in 0..coords.len() {
                summary
                    .malformed
                    .push(MalformedRow { row: fi, reason: "`timestamps` length differs from coordinate count".into() });
            }
            continue;
        }
        for (c, t) in coords.iter().zip(stamps) {
            let fix = super::layers::position(c).map_err(|r| r.to_string()).and_then(|location| {
                t.as_i64()
                    .map(|timestamp| TripFix { timestamp, location })
                    .ok_or_else(|| "timestamp is not an integer".to_string())
            });
            match fix {
                Ok(fix) => rows.push((trip_id.to_string(), fix)),
                Err(reason) => summary.malformed.push(MalformedRow { row: fi, reason }),
            }
        }
    }
    Ok((rows, summary))
}

/// Write trips as CSV with the exact loader header.
pub fn write_trips_csv(path: &Path, trips: &[TripRecord]) -> Result<()> {
    let mut out = String::from("trip_id,timestamp,lat,lon\n");
    for t in trips {
        for f in &t.points {
            out.push_str(&format!("{},{},{},{}\n", t.trip_id, f.timestamp, f.location.lat, f.location.lon));
        }
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Per-rule counts from [`clean_trips`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CleaningSummary {
    pub duplicate_fixes_removed: usize,
    pub speed_violations_removed: usize,
    pub trips_dropped: usize,
}

impl CleaningSummary {
    pub fn is_clean(&self) -> bool {
        *self == Self::default()
    }
}

/// Remove duplicate fixes and fixes implying a speed above `max_speed_mps`
/// from the last kept fix; drop trips left with fewer than two fixes.
pub fn clean_trips(trips: &[TripRecord], max_speed_mps: f64) -> (Vec<TripRecord>, CleaningSummary) {
    let mut summary = CleaningSummary::default();
    let mut out = Vec::with_capacity(trips.len());
    for trip in trips {
        let mut kept: Vec<TripFix> = Vec::with_capacity(trip.points.len());
        for fix in &trip.points {
            let Some(prev) = kept.last() else {
                kept.push(*fix);
                continue;
            };
            if prev.timestamp == fix.timestamp && prev.location == fix.location {
                summary.duplicate_fixes_removed += 1;
                continue;
            }
            let dt = (fix.timestamp - prev.timestamp) as f64;
            let d = haversine_distance(prev.location, fix.location);
            // non-increasing time with any movement is an infinite speed
            let too_fast = if dt > 0.0 { d / dt > max_speed_mps } else { true };
            if too_fast {
                summary.speed_violations_removed += 1;
                continue;
            }
            kept.push(*fix);
        }
        if kept.len() < 2 {
            summary.trips_dropped += 1;
            continue;
        }
        out.push(TripRecord { trip_id: trip.trip_id.clone(), points: kept });
    }
    (out, summary)
}

/// Greedy stay detection: from fix `i`, extend while fixes stay within
/// `radius_m` of fix `i`; the run is a stay if it lasts at least `min_s`.
/// Returns half-open index ranges.
pub fn detect_stays(fixes: &[TripFix], radius_m: f64, min_s: f64) -> Vec<std::ops::Range<usize>> {
    let mut stays = Vec::new();
    let n = fixes.len();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && haversine_distance(fixes[i].location, fixes[j].location) <= radius_m {
            j += 1;
        }
        if (fixes[j - 1].timestamp - fixes[i].timestamp) as f64 >= min_s {
            stays.push(i..j);
            i = j;
        } else {
            i += 1;
        }
    }
    stays
}

fn centroid(fixes: &[TripFix]) -> GeoPoint {
    let n = fixes.len() as f64;
    GeoPoint {
        lat: fixes.iter().map(|f| f.location.lat).sum::<f64>() / n,
        lon: fixes.iter().map(|f| f.location.lon).sum::<f64>() / n,
    }
}

/// Origin, destination and one centroid per stay for every trip; ids are
/// dense in (trip_id, timestamp) order.
pub fn extract_demand_points(trips: &[TripRecord], dwell_radius_m: f64, dwell_min_s: f64) -> Vec<DemandPoint> {
    let mut order: Vec<&TripRecord> = trips.iter().filter(|t| !t.points.is_empty()).collect();
    order.sort_by(|a, b| a.trip_id.cmp(&b.trip_id));
    let mut out = Vec::new();
    for trip in order {
        let fixes = &trip.points;
        let mut local: Vec<(i64, DemandKind, GeoPoint)> = Vec::new();
        let first = fixes[0];
        let last = fixes[fixes.len() - 1];
        local.push((first.timestamp, DemandKind::Origin, first.location));
        for r in detect_stays(fixes, dwell_radius_m, dwell_min_s) {
            local.push((fixes[r.start].timestamp, DemandKind::Dwell, centroid(&fixes[r])));
        }
        local.push((last.timestamp, DemandKind::Destination, last.location));
        local.sort_by_key(|&(t, k, _)| (t, k));
        for (timestamp, kind, location) in local {
            out.push(DemandPoint { point_id: out.len(), location, source_trip: trip.trip_id.clone(), timestamp, kind });
        }
    }
    out
}
