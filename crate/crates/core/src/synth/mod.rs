//! Seeded synthetic scenarios: all six input layers plus a ground-truth
//! manifest of planted hotspots.

mod rng;

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use rng::SplitMix64;

use crate::error::{Error, Result};
use crate::geo::{haversine_distance, rectangle_ring, BoundingBox, GeoPoint, MultiPolygon, Polygon, EARTH_RADIUS_M};
use crate::ingest::{
    write_fire_grid, write_lgas, write_pois, write_routes, write_stations, write_trips_csv, FireRiskGrid, LgaRecord,
    PoiCategory, PoiRecord, RouteRecord, StationKind, StationRecord, TripFix, TripRecord, ALTITUDE_RANGE_M,
};

const M_PER_DEG: f64 = EARTH_RADIUS_M * PI / 180.0;
const START_TIME: i64 = 1_700_000_000;
const DWELL_FIXES: usize = 11;
const DWELL_STEP_S: i64 = 60;
const DWELL_JITTER_M: f64 = 3.0;
const ACCESS_ROAD_HALF_M: f64 = 2_000.0;
const ACCESS_ROAD_STEP_M: f64 = 200.0;
const ARTERIAL_STEP_DEG: f64 = 0.01;

/// `base + amplitude * sin(2π Δlat / λ) * cos(2π Δlon / λ)`, measured from
/// the scenario's south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AltitudeField {
    pub base_m: f64,
    pub amplitude_m: f64,
    pub wavelength_deg: f64,
}

impl Default for AltitudeField {
    fn default() -> Self {
        Self { base_m: 30.0, amplitude_m: 40.0, wavelength_deg: 0.6 }
    }
}

/// Cell values `base + amplitude * (1 + sin(2π Δlat / λ + 2π Δlon / λ)) / 2`;
/// each cell is missing with probability `missing_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FfdiField {
    pub n_rows: usize,
    pub n_cols: usize,
    pub base: f64,
    pub amplitude: f64,
    pub wavelength_deg: f64,
    pub missing_prob: f64,
}

impl Default for FfdiField {
    fn default() -> Self {
        Self { n_rows: 8, n_cols: 8, base: 0.5, amplitude: 3.0, wavelength_deg: 0.7, missing_prob: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub n_lgas: usize,
    /// `[rows, cols]` tiling of `bbox`.
    pub lga_grid: [usize; 2],
    pub bbox: BoundingBox,
    pub n_hotspots_per_lga: usize,
    /// Inclusive `[min, max]`.
    pub points_per_hotspot: [usize; 2],
    pub hotspot_sigma_m: f64,
    pub hotspot_margin_m: f64,
    pub hotspot_min_separation_m: f64,
    pub background_noise_points: usize,
    pub poi_per_hotspot_prob: f64,
    pub extra_pois: usize,
    pub route_spacing: f64,
    pub n_stations: usize,
    pub station_min_hotspot_dist_m: f64,
    pub speed_mps: f64,
    pub fix_interval_s: i64,
    pub altitude_field: AltitudeField,
    pub ffdi_field: FfdiField,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            n_lgas: 4,
            lga_grid: [2, 2],
            bbox: BoundingBox { min_lat: -34.4, min_lon: 150.4, max_lat: -33.4, max_lon: 151.4 },
            n_hotspots_per_lga: 3,
            points_per_hotspot: [40, 40],
            hotspot_sigma_m: 150.0,
            hotspot_margin_m: 2_000.0,
            hotspot_min_separation_m: 5_000.0,
            background_noise_points: 200,
            poi_per_hotspot_prob: 0.5,
            extra_pois: 20,
            route_spacing: 0.1,
            n_stations: 12,
            station_min_hotspot_dist_m: 3_000.0,
            speed_mps: 20.0,
            fix_interval_s: 60,
            altitude_field: AltitudeField::default(),
            ffdi_field: FfdiField::default(),
        }
    }
}

impl ScenarioSpec {
    /// Desk-scale scenario: 4 LGAs and roughly 5000 demand points.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            n_hotspots_per_lga: 10,
            points_per_hotspot: [80, 120],
            background_noise_points: 1_000,
            n_stations: 40,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("scenario spec: {m}")));
        let [rows, cols] = self.lga_grid;
        if rows == 0 || cols == 0 || rows * cols != self.n_lgas {
            return bad("lga_grid rows × cols must equal n_lgas (and be positive)");
        }
        if BoundingBox::new(self.bbox.min_lat, self.bbox.min_lon, self.bbox.max_lat, self.bbox.max_lon).is_err()
            || self.bbox.min_lat >= self.bbox.max_lat
            || self.bbox.min_lon >= self.bbox.max_lon
        {
            return bad("bbox must be a valid, non-empty box");
        }
        if self.points_per_hotspot[0] > self.points_per_hotspot[1] {
            return bad("points_per_hotspot must be [min, max] with min <= max");
        }
        if !(0.0..=1.0).contains(&self.poi_per_hotspot_prob) || !(0.0..=1.0).contains(&self.ffdi_field.missing_prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        let positive =
            [self.route_spacing, self.speed_mps, self.altitude_field.wavelength_deg, self.ffdi_field.wavelength_deg];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.fix_interval_s <= 0 {
            return bad("route_spacing, speed_mps, fix_interval_s and wavelengths must be positive");
        }
        let non_negative = [
            self.hotspot_sigma_m,
            self.hotspot_margin_m,
            self.hotspot_min_separation_m,
            self.station_min_hotspot_dist_m,
        ];
        if non_negative.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("distances must be finite and non-negative");
        }
        if self.ffdi_field.n_rows == 0 || self.ffdi_field.n_cols == 0 {
            return bad("ffdi_field needs at least one row and column");
        }
        Ok(())
    }

    fn altitude(&self, p: GeoPoint) -> f64 {
        let f = &self.altitude_field;
        let a = TAU * (p.lat - self.bbox.min_lat) / f.wavelength_deg;
        let b = TAU * (p.lon - self.bbox.min_lon) / f.wavelength_deg;
        round_to(f.base_m + f.amplitude_m * a.sin() * b.cos(), 100.0).clamp(ALTITUDE_RANGE_M.0, ALTITUDE_RANGE_M.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotTruth {
    pub lga_name: String,
    pub center: GeoPoint,
    pub planted_points: usize,
    pub has_poi: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerCounts {
    pub lgas: usize,
    pub trips: usize,
    pub trip_rows: usize,
    /// Origins, dwells and destinations the trips are built from.
    pub demand_points: usize,
    pub planted_points: usize,
    pub noise_points: usize,
    pub pois: usize,
    pub routes: usize,
    pub stations: usize,
    pub fire_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub seed: u64,
    pub hotspots: Vec<HotspotTruth>,
    pub counts: LayerCounts,
    pub files: Vec<String>,
}

/// A generated scenario held in memory.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub trips: Vec<TripRecord>,
    pub lgas: Vec<LgaRecord>,
    pub pois: Vec<PoiRecord>,
    pub routes: Vec<RouteRecord>,
    pub stations: Vec<StationRecord>,
    pub fire_grid: FireRiskGrid,
    pub manifest: ScenarioManifest,
}

pub const SCENARIO_FILES: [&str; 8] = [
    "trips.csv",
    "lgas.geojson",
    "pois.geojson",
    "routes.geojson",
    "stations.geojson",
    "fire_grid.json",
    "config.json",
    "manifest.json",
];

fn round_to(v: f64, scale: f64) -> f64 {
    (v * scale).round() / scale
}

fn rounded(p: GeoPoint) -> GeoPoint {
    GeoPoint { lat: round_to(p.lat, 1e7), lon: round_to(p.lon, 1e7) }
}

/// Move `p` by (`north_m`, `east_m`) in a local flat frame.
fn offset(p: GeoPoint, north_m: f64, east_m: f64) -> GeoPoint {
    GeoPoint { lat: p.lat + north_m / M_PER_DEG, lon: p.lon + east_m / (M_PER_DEG * p.lat.to_radians().cos()) }
}

fn uniform_in(rng: &mut SplitMix64, b: &BoundingBox) -> GeoPoint {
    GeoPoint { lat: rng.uniform(b.min_lat, b.max_lat), lon: rng.uniform(b.min_lon, b.max_lon) }
}

fn lga_tiles(spec: &ScenarioSpec) -> Vec<(String, BoundingBox)> {
    let [rows, cols] = spec.lga_grid;
    let b = spec.bbox;
    let dlat = (b.max_lat - b.min_lat) / rows as f64;
    let dlon = (b.max_lon - b.min_lon) / cols as f64;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let tile = BoundingBox {
                min_lat: b.min_lat + dlat * r as f64,
                min_lon: b.min_lon + dlon * c as f64,
                max_lat: if r + 1 == rows { b.max_lat } else { b.min_lat + dlat * (r + 1) as f64 },
                max_lon: if c + 1 == cols { b.max_lon } else { b.min_lon + dlon * (c + 1) as f64 },
            };
            out.push((format!("LGA_{:02}", r * cols + c), tile));
        }
    }
    out
}

fn place_hotspots(
    spec: &ScenarioSpec,
    tiles: &[(String, BoundingBox)],
    rng: &mut SplitMix64,
) -> Result<Vec<(String, GeoPoint)>> {
    let mut centers: Vec<(String, GeoPoint)> = Vec::new();
    for (name, tile) in tiles {
        let mid = tile.center();
        let mlat = spec.hotspot_margin_m / M_PER_DEG;
        let mlon = spec.hotspot_margin_m / (M_PER_DEG * mid.lat.to_radians().cos().max(1e-6));
        let inner = BoundingBox {
            min_lat: tile.min_lat + mlat,
            min_lon: tile.min_lon + mlon,
            max_lat: tile.max_lat - mlat,
            max_lon: tile.max_lon - mlon,
        };
        if spec.n_hotspots_per_lga > 0 && (inner.min_lat >= inner.max_lat || inner.min_lon >= inner.max_lon) {
            return Err(Error::Config(format!("scenario spec: LGA {name} is too small for hotspot_margin_m")));
        }
        for _ in 0..spec.n_hotspots_per_lga {
            let mut placed = false;
            for _ in 0..10_000 {
                let c = rounded(uniform_in(rng, &inner));
                if centers.iter().all(|(_, o)| haversine_distance(*o, c) >= spec.hotspot_min_separation_m) {
                    centers.push((name.clone(), c));
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Config(format!(
                    "scenario spec: cannot place {} hotspots in LGA {name} at the requested separation",
                    spec.n_hotspots_per_lga
                )));
            }
        }
    }
    Ok(centers)
}

/// Fixes for a trip visiting `stops`; interior stops are dwells.
fn trip_fixes(spec: &ScenarioSpec, stops: &[GeoPoint], start: i64, rng: &mut SplitMix64) -> Vec<TripFix> {
    let step_m = spec.speed_mps * spec.fix_interval_s as f64;
    let mut t = start;
    let mut fixes = vec![TripFix { timestamp: t, location: stops[0] }];
    for (k, pair) in stops.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if k > 0 {
            for _ in 0..DWELL_FIXES {
                t += DWELL_STEP_S;
                let angle = rng.uniform(0.0, TAU);
                let r = rng.uniform(0.0, DWELL_JITTER_M);
                fixes.push(TripFix { timestamp: t, location: rounded(offset(a, r * angle.sin(), r * angle.cos())) });
            }
        }
        let d = haversine_distance(a, b);
        let n = ((d / step_m).ceil() as usize).max(1);
        let leg_dt = ((d / n as f64) / spec.speed_mps).ceil().max(1.0) as i64;
        for i in 1..=n {
            t += leg_dt;
            let f = i as f64 / n as f64;
            let loc = if i == n {
                b
            } else {
                rounded(GeoPoint { lat: a.lat + (b.lat - a.lat) * f, lon: a.lon + (b.lon - a.lon) * f })
            };
            fixes.push(TripFix { timestamp: t, location: loc });
        }
    }
    if stops.len() == 1 {
        fixes.push(TripFix { timestamp: t + spec.fix_interval_s, location: stops[0] });
    }
    fixes
}

/// Consume stops two per trip; every fourth trip (or a final odd three)
/// takes three stops with a dwell in the middle. A lone stop becomes a
/// parked trip that starts and ends there.
fn chunk_stops(stops: &[GeoPoint]) -> Vec<&[GeoPoint]> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < stops.len() {
        let left = stops.len() - i;
        let take = if left == 3 || (left > 3 && out.len() % 4 == 3) { 3 } else { left.min(2) };
        out.push(&stops[i..i + take]);
        i += take;
    }
    out
}

fn arterial_routes(spec: &ScenarioSpec) -> Vec<Vec<GeoPoint>> {
    let b = spec.bbox;
    let line = |from: f64, to: f64| -> Vec<f64> {
        let n = (((to - from) / ARTERIAL_STEP_DEG).ceil() as usize).max(1);
        (0..=n).map(|i| from + (to - from) * i as f64 / n as f64).collect()
    };
    let levels = |from: f64, to: f64| -> Vec<f64> {
        let n = ((to - from) / spec.route_spacing).floor() as usize;
        (0..=n).map(|i| from + spec.route_spacing * i as f64).filter(|v| *v <= to).collect()
    };
    let mut out = Vec::new();
    for lat in levels(b.min_lat, b.max_lat) {
        out.push(line(b.min_lon, b.max_lon).into_iter().map(|lon| rounded(GeoPoint { lat, lon })).collect());
    }
    for lon in levels(b.min_lon, b.max_lon) {
        out.push(line(b.min_lat, b.max_lat).into_iter().map(|lat| rounded(GeoPoint { lat, lon })).collect());
    }
    out
}

fn access_road(center: GeoPoint, rng: &mut SplitMix64) -> Vec<GeoPoint> {
    let heading = rng.uniform(0.0, PI);
    let steps = (ACCESS_ROAD_HALF_M / ACCESS_ROAD_STEP_M) as i64;
    (-steps..=steps)
        .map(|i| {
            let d = i as f64 * ACCESS_ROAD_STEP_M;
            if i == 0 {
                center
            } else {
                rounded(offset(center, d * heading.cos(), d * heading.sin()))
            }
        })
        .collect()
}

fn fire_grid(spec: &ScenarioSpec, rng: &mut SplitMix64) -> Result<FireRiskGrid> {
    let f = &spec.ffdi_field;
    let b = spec.bbox;
    let dlat = (b.max_lat - b.min_lat) / f.n_rows as f64;
    let dlon = (b.max_lon - b.min_lon) / f.n_cols as f64;
    let mut cells = Vec::with_capacity(f.n_rows * f.n_cols);
    for r in 0..f.n_rows {
        for c in 0..f.n_cols {
            let missing = rng.chance(f.missing_prob);
            let phase = TAU * (dlat * (r as f64 + 0.5) + dlon * (c as f64 + 0.5)) / f.wavelength_deg;
            let v = f.base + f.amplitude * (1.0 + phase.sin()) / 2.0;
            cells.push((!missing).then(|| round_to(v, 100.0)));
        }
    }
    FireRiskGrid::new(b, f.n_rows, f.n_cols, cells)
}

/// Build a scenario in memory.
pub fn build(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let tiles = lga_tiles(spec);
    let lgas = tiles
        .iter()
        .map(|(name, t)| {
            let poly = Polygon::new(rectangle_ring(t.min_lat, t.min_lon, t.max_lat, t.max_lon), Vec::new())?;
            Ok(LgaRecord { lga_name: name.clone(), boundary: MultiPolygon::from(poly) })
        })
        .collect::<Result<Vec<_>>>()?;

    let centers = place_hotspots(spec, &tiles, &mut rng)?;

    let mut hotspots = Vec::with_capacity(centers.len());
    let mut planted = Vec::new();
    let mut pois = Vec::new();
    let mut routes_geom = Vec::new();
    for (lga_name, center) in &centers {
        let [lo, hi] = spec.points_per_hotspot;
        let k = rng.range_inclusive(lo, hi);
        for _ in 0..k {
            let (n, e) = (rng.gaussian(), rng.gaussian());
            planted.push(rounded(offset(*center, n * spec.hotspot_sigma_m, e * spec.hotspot_sigma_m)));
        }
        let has_poi = rng.chance(spec.poi_per_hotspot_prob);
        if has_poi {
            let category = PoiCategory::ALL[rng.below(PoiCategory::ALL.len())];
            let (n, e) = (rng.gaussian() * 30.0, rng.gaussian() * 30.0);
            pois.push((category, rounded(offset(*center, n, e))));
        }
        routes_geom.push(access_road(*center, &mut rng));
        hotspots.push(HotspotTruth { lga_name: lga_name.clone(), center: *center, planted_points: k, has_poi });
    }
    for _ in 0..spec.extra_pois {
        let category = PoiCategory::ALL[rng.below(PoiCategory::ALL.len())];
        pois.push((category, rounded(uniform_in(&mut rng, &spec.bbox))));
    }
    let pois: Vec<PoiRecord> = pois
        .into_iter()
        .enumerate()
        .map(|(i, (category, location))| PoiRecord { poi_id: format!("poi_{:05}", i + 1), category, location })
        .collect();

    let noise: Vec<GeoPoint> =
        (0..spec.background_noise_points).map(|_| rounded(uniform_in(&mut rng, &spec.bbox))).collect();

    rng.shuffle(&mut planted);
    let mut trips = Vec::new();
    let mut demand_points = 0;
    for stops in chunk_stops(&planted).into_iter().chain(chunk_stops(&noise)) {
        demand_points += stops.len().max(2);
        let idx = trips.len();
        let fixes = trip_fixes(spec, stops, START_TIME + idx as i64 * 60, &mut rng);
        trips.push(TripRecord { trip_id: format!("trip_{:06}", idx + 1), points: fixes });
    }

    routes_geom.extend(arterial_routes(spec));
    let routes = routes_geom
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            let alts = line.iter().map(|p| spec.altitude(*p)).collect();
            RouteRecord::new(format!("route_{:04}", i + 1), line, alts)
        })
        .collect::<Result<Vec<_>>>()?;

    let kinds = [StationKind::ExistingFast, StationKind::ExistingDestination, StationKind::Approved];
    let mut stations = Vec::with_capacity(spec.n_stations);
    let mut attempts = 0usize;
    while stations.len() < spec.n_stations {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Config("scenario spec: cannot place stations at station_min_hotspot_dist_m".into()));
        }
        let p = rounded(uniform_in(&mut rng, &spec.bbox));
        if centers.iter().any(|(_, c)| haversine_distance(*c, p) < spec.station_min_hotspot_dist_m) {
            continue;
        }
        stations.push(StationRecord {
            station_id: format!("st_{:04}", stations.len() + 1),
            kind: kinds[stations.len() % kinds.len()],
            location: p,
        });
    }

    let fire_grid = fire_grid(spec, &mut rng)?;

    let counts = LayerCounts {
        lgas: lgas.len(),
        trips: trips.len(),
        trip_rows: trips.iter().map(|t| t.points.len()).sum(),
        demand_points,
        planted_points: planted.len(),
        noise_points: noise.len(),
        pois: pois.len(),
        routes: routes.len(),
        stations: stations.len(),
        fire_cells: fire_grid.cells().len(),
    };
    Ok(Scenario {
        trips,
        lgas,
        pois,
        routes,
        stations,
        fire_grid,
        manifest: ScenarioManifest {
            seed: spec.seed,
            hotspots,
            counts,
            files: SCENARIO_FILES.iter().map(|s| s.to_string()).collect(),
        },
    })
}

impl Scenario {
    /// Write every layer, a run config pointing at them, and the manifest.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        write_trips_csv(&out_dir.join("trips.csv"), &self.trips)?;
        write_lgas(&out_dir.join("lgas.geojson"), &self.lgas)?;
        write_pois(&out_dir.join("pois.geojson"), &self.pois)?;
        write_routes(&out_dir.join("routes.geojson"), &self.routes)?;
        write_stations(&out_dir.join("stations.geojson"), &self.stations)?;
        write_fire_grid(&out_dir.join("fire_grid.json"), &self.fire_grid)?;
        let config = serde_json::json!({
            "layers": {
                "trips": "trips.csv",
                "trips_format": "csv",
                "lgas": "lgas.geojson",
                "pois": "pois.geojson",
                "routes": "routes.geojson",
                "stations": "stations.geojson",
                "fire_grid": "fire_grid.json"
            }
        });
        crate::ingest::layers::write_json(&out_dir.join("config.json"), &config)?;
        let manifest = serde_json::to_value(&self.manifest).expect("manifest serializes");
        crate::ingest::layers::write_json(&out_dir.join("manifest.json"), &manifest)
    }
}

/// Build a scenario from `spec` and write it to `out_dir`.
pub fn generate(spec: &ScenarioSpec, out_dir: &Path) -> Result<ScenarioManifest> {
    let scenario = build(spec)?;
    scenario.write(out_dir)?;
    Ok(scenario.manifest)
}
