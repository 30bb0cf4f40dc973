//! End-to-end orchestration and the command implementations behind the
//! `evsite` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::cluster::{cluster_all, LgaClusterResult};
use crate::config::{load_run_config, LayerPaths, RunConfig};
use crate::constraints::{annotate_context, LayerIndex};
use crate::error::{Error, Result};
use crate::evaluate::{build_report, EvaluationReport};
use crate::export::{count_markers, feature_collection, render_map, station_features, OutputFeature};
use crate::ingest::layers::write_json;
use crate::ingest::{
    assign_lga, clean_trips, extract_demand_points, load_fire_grid, load_lgas, load_output_features, load_pois,
    load_routes, load_stations, load_trips, CleaningSummary, DemandPoint, FireRiskGrid, LgaAssignment, LgaRecord,
    LoadSummary, PoiRecord, RouteRecord, StationRecord, TripRecord,
};
use crate::recommend::{recommend_all, ChargerKind, RecommendOutput};
use crate::synth::{generate, Scenario, ScenarioManifest, ScenarioSpec};

pub const RECOMMENDATIONS_FILE: &str = "recommendations.geojson";
pub const STATIONS_FILE: &str = "stations.geojson";
pub const SUMMARY_FILE: &str = "run_summary.json";
pub const TIMING_FILE: &str = "run_timing.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const EVALUATION_TABLE_FILE: &str = "evaluation.txt";

/// Every input layer, loaded and validated.
#[derive(Debug, Clone)]
pub struct Layers {
    pub trips: Vec<TripRecord>,
    pub trip_load: LoadSummary,
    pub lgas: Vec<LgaRecord>,
    pub pois: Vec<PoiRecord>,
    pub routes: Vec<RouteRecord>,
    pub stations: Vec<StationRecord>,
    pub fire_grid: FireRiskGrid,
}

pub fn load_layers(paths: &LayerPaths) -> Result<Layers> {
    let (trips, trip_load) = load_trips(&paths.trips, paths.trips_format)?;
    Ok(Layers {
        trips,
        trip_load,
        lgas: load_lgas(&paths.lgas)?,
        pois: load_pois(&paths.pois)?,
        routes: load_routes(&paths.routes)?,
        stations: load_stations(&paths.stations)?,
        fire_grid: load_fire_grid(&paths.fire_grid)?,
    })
}

impl Layers {
    /// Layers of an in-memory scenario, as if written and loaded back.
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            trips: s.trips.clone(),
            trip_load: LoadSummary {
                total_rows: s.trips.iter().map(|t| t.points.len()).sum(),
                ..LoadSummary::default()
            },
            lgas: s.lgas.clone(),
            pois: s.pois.clone(),
            routes: s.routes.clone(),
            stations: s.stations.clone(),
            fire_grid: s.fire_grid.clone(),
        }
    }
}

/// Intermediate and final results of one run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub index: LayerIndex,
    pub cleaning: CleaningSummary,
    pub clean_trips: usize,
    pub demand: Vec<DemandPoint>,
    pub assignment: LgaAssignment,
    pub clusters: Vec<LgaClusterResult>,
    pub recommendations: RecommendOutput,
}

pub fn run_pipeline(layers: &Layers, cfg: &RunConfig) -> Result<PipelineOutput> {
    let (trips, cleaning) = clean_trips(&layers.trips, cfg.cleaning.max_speed_mps);
    let demand = extract_demand_points(&trips, cfg.demand.dwell_radius_m, cfg.demand.dwell_min_s);
    let assignment = assign_lga(&demand, &layers.lgas);
    let index = LayerIndex::new(&layers.pois, &layers.routes, Some(&layers.fire_grid))?;
    let contexts = annotate_context(&demand, &index, &cfg.constraints)?;
    let clusters = cluster_all(&assignment.buckets, &demand, &contexts, &cfg.constraints)?;
    let recommendations =
        recommend_all(&clusters, &demand, &index, &layers.stations, &cfg.constraints, &cfg.recommend)?;
    Ok(PipelineOutput { index, cleaning, clean_trips: trips.len(), demand, assignment, clusters, recommendations })
}

/// Run `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerCountsReport {
    pub trip_rows: usize,
    pub malformed_rows: usize,
    pub short_trips: usize,
    pub trips: usize,
    pub lgas: usize,
    pub pois: usize,
    pub routes: usize,
    pub stations: usize,
    pub fire_cells: usize,
}

impl LayerCountsReport {
    fn of(layers: &Layers) -> Self {
        Self {
            trip_rows: layers.trip_load.total_rows,
            malformed_rows: layers.trip_load.malformed_rows(),
            short_trips: layers.trip_load.short_trips,
            trips: layers.trips.len(),
            lgas: layers.lgas.len(),
            pois: layers.pois.len(),
            routes: layers.routes.len(),
            stations: layers.stations.len(),
            fire_cells: layers.fire_grid.cells().len(),
        }
    }
}

/// What `validate` found.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub counts: LayerCountsReport,
    pub malformed: LoadSummary,
    pub cleaning: CleaningSummary,
    pub clean_trips: usize,
    pub demand_points: usize,
}

impl ValidationReport {
    pub fn to_text(&self) -> String {
        let c = &self.counts;
        let mut out = format!(
            "trips: {} rows, {} malformed, {} trips ({} dropped as too short)\n\
             lgas: {}\npois: {}\nroutes: {}\nstations: {}\nfire grid cells: {}\n\
             cleaning: {} duplicate fixes, {} speed violations removed, {} trips dropped\n\
             demand points: {}\n",
            c.trip_rows,
            c.malformed_rows,
            c.trips,
            c.short_trips,
            c.lgas,
            c.pois,
            c.routes,
            c.stations,
            c.fire_cells,
            self.cleaning.duplicate_fixes_removed,
            self.cleaning.speed_violations_removed,
            self.cleaning.trips_dropped,
            self.demand_points,
        );
        for m in &self.malformed.malformed {
            out.push_str(&format!("  malformed row {}: {}\n", m.row, m.reason));
        }
        out
    }
}

pub fn cmd_validate(config_path: &Path) -> Result<ValidationReport> {
    let (_, cfg) = load_run_config(config_path)?;
    let layers = load_layers(&cfg.layers)?;
    let (trips, cleaning) = clean_trips(&layers.trips, cfg.cleaning.max_speed_mps);
    let demand = extract_demand_points(&trips, cfg.demand.dwell_radius_m, cfg.demand.dwell_min_s);
    Ok(ValidationReport {
        counts: LayerCountsReport::of(&layers),
        malformed: layers.trip_load.clone(),
        cleaning,
        clean_trips: trips.len(),
        demand_points: demand.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LgaRunSummary {
    pub lga_name: String,
    pub demand_points: usize,
    pub clusters: usize,
    pub noise_points: usize,
    pub recommendations: usize,
}

/// Contents of `run_summary.json`; wall-clock timing goes to a separate
/// file so this one stays byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub input: LayerCountsReport,
    pub cleaning: CleaningSummary,
    pub demand_points: usize,
    pub unassigned_points: usize,
    pub lgas: Vec<LgaRunSummary>,
    pub recommendations_before_dedup: usize,
    pub recommendations: usize,
    pub recommended_fast: usize,
    pub recommended_destination: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunTiming {
    pub threads: usize,
    pub load_s: f64,
    pub pipeline_s: f64,
    pub write_s: f64,
    pub total_s: f64,
}

fn summarize(cfg: &RunConfig, layers: &Layers, out: &PipelineOutput) -> RunSummary {
    let recs = &out.recommendations.recommendations;
    let lgas = out
        .clusters
        .iter()
        .map(|c| LgaRunSummary {
            lga_name: c.lga_name.clone(),
            demand_points: c.point_ids.len(),
            clusters: c.assignment.cluster_count,
            noise_points: c.assignment.noise_count(),
            recommendations: recs.iter().filter(|r| r.lga_name == c.lga_name).count(),
        })
        .collect();
    RunSummary {
        config: cfg.clone(),
        input: LayerCountsReport::of(layers),
        cleaning: out.cleaning,
        demand_points: out.demand.len(),
        unassigned_points: out.assignment.unassigned.len(),
        lgas,
        recommendations_before_dedup: out.recommendations.before_dedup.len(),
        recommendations: recs.len(),
        recommended_fast: recs.iter().filter(|r| r.charger_kind == ChargerKind::Fast).count(),
        recommended_destination: recs.iter().filter(|r| r.charger_kind == ChargerKind::Destination).count(),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Run the full pipeline and write recommendations, annotated stations,
/// the run summary and timing into `out_dir`.
pub fn cmd_recommend(config_path: &Path, out_dir: &Path, threads: Option<usize>) -> Result<RunSummary> {
    let t0 = Instant::now();
    let (as_written, cfg) = load_run_config(config_path)?;
    let layers = load_layers(&cfg.layers)?;
    let t_load = t0.elapsed().as_secs_f64();
    let (out, workers) = with_threads(threads, || (run_pipeline(&layers, &cfg), rayon::current_num_threads()))?;
    let out = out?;
    let t_pipeline = t0.elapsed().as_secs_f64() - t_load;

    create_dir(out_dir)?;
    let recs: Vec<OutputFeature> =
        out.recommendations.recommendations.iter().map(OutputFeature::from_recommendation).collect();
    let stations = station_features(&layers.stations, &out.index, &layers.lgas, &cfg.constraints);
    write_json(&out_dir.join(RECOMMENDATIONS_FILE), &feature_collection(&recs))?;
    write_json(&out_dir.join(STATIONS_FILE), &feature_collection(&stations))?;
    let summary = summarize(&as_written, &layers, &out);
    write_json(&out_dir.join(SUMMARY_FILE), &to_value(&summary))?;
    let total = t0.elapsed().as_secs_f64();
    let timing = RunTiming {
        threads: workers,
        load_s: t_load,
        pipeline_s: t_pipeline,
        write_s: total - t_load - t_pipeline,
        total_s: total,
    };
    write_json(&out_dir.join(TIMING_FILE), &to_value(&timing))?;
    Ok(summary)
}

/// Recompute the pipeline from the config and write the evaluation report
/// as JSON plus a text table.
pub fn cmd_evaluate(config_path: &Path, out_dir: &Path, threads: Option<usize>) -> Result<EvaluationReport> {
    let (_, cfg) = load_run_config(config_path)?;
    let layers = load_layers(&cfg.layers)?;
    let out = with_threads(threads, || run_pipeline(&layers, &cfg))??;
    let report = build_report(&out.demand, &layers.lgas, &layers.stations, &out.recommendations, &cfg.evaluate);
    create_dir(out_dir)?;
    write_json(&out_dir.join(EVALUATION_FILE), &to_value(&report))?;
    let table = out_dir.join(EVALUATION_TABLE_FILE);
    std::fs::write(&table, report.to_table()).map_err(|e| Error::io(&table, e))?;
    Ok(report)
}

pub fn cmd_synth(spec_path: &Path, out_dir: &Path) -> Result<ScenarioManifest> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let spec: ScenarioSpec =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: spec_path.to_path_buf(), source })?;
    generate(&spec, out_dir)
}

/// Render `recommendations.geojson` and `stations.geojson` from `in_dir`
/// into one HTML file. Returns the number of markers drawn.
pub fn cmd_export_map(in_dir: &Path, out_html: &Path) -> Result<usize> {
    let read = |name: &str| -> Result<Vec<OutputFeature>> {
        let p: PathBuf = in_dir.join(name);
        if !p.is_file() {
            return Err(Error::Io {
                path: p,
                source: std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "not found; run `evsite recommend` to produce it",
                ),
            });
        }
        load_output_features(&p)
    };
    let recs = read(RECOMMENDATIONS_FILE)?;
    let stations = read(STATIONS_FILE)?;
    let html = render_map(&recs, &stations);
    if let Some(parent) = out_html.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::write(out_html, &html).map_err(|e| Error::io(out_html, e))?;
    Ok(count_markers(&html))
}
