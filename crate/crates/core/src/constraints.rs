//! Per-point context (altitude, POI / route proximity, fire danger) and the
//! context-driven adjustment of the clustering radius and density threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, LineIndex, SpatialIndex};
use crate::ingest::{DemandPoint, FireRiskGrid, PoiRecord, RouteRecord};

/// Base clustering parameters plus the threshold-gated multiplicative
/// factors applied per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub base_eps_m: f64,
    pub base_minpts: usize,
    pub poi_near_m: f64,
    pub route_near_m: f64,
    pub eps_factor_poi: f64,
    pub minpts_factor_poi: f64,
    pub minpts_factor_route: f64,
    pub flood_alt_m: f64,
    pub minpts_factor_flood: f64,
    pub ffdi_threshold: f64,
    pub minpts_factor_fire: f64,
    pub eps_min_m: f64,
    pub eps_max_m: f64,
    pub minpts_min: usize,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            base_eps_m: 800.0,
            base_minpts: 10,
            poi_near_m: 200.0,
            route_near_m: 100.0,
            eps_factor_poi: 0.75,
            minpts_factor_poi: 0.6,
            minpts_factor_route: 0.8,
            flood_alt_m: 5.0,
            minpts_factor_flood: 1.5,
            ffdi_threshold: 2.0,
            minpts_factor_fire: 1.5,
            eps_min_m: 100.0,
            eps_max_m: 2000.0,
            minpts_min: 2,
        }
    }
}

impl ConstraintConfig {
    /// Every factor set to 1.0: clustering degenerates to plain DBSCAN.
    pub fn neutral(base_eps_m: f64, base_minpts: usize) -> Self {
        Self {
            base_eps_m,
            base_minpts,
            eps_factor_poi: 1.0,
            minpts_factor_poi: 1.0,
            minpts_factor_route: 1.0,
            minpts_factor_flood: 1.0,
            minpts_factor_fire: 1.0,
            eps_min_m: base_eps_m.min(100.0),
            eps_max_m: base_eps_m.max(2000.0),
            minpts_min: base_minpts.min(2),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("constraints: {msg}")));
        if !(self.base_eps_m > 0.0 && self.base_eps_m.is_finite()) {
            return bad(format!("base_eps_m must be > 0, got {}", self.base_eps_m));
        }
        if self.minpts_min < 2 || self.base_minpts < self.minpts_min {
            return bad(format!(
                "need base_minpts >= minpts_min >= 2, got {} and {}",
                self.base_minpts, self.minpts_min
            ));
        }
        if !(self.eps_min_m <= self.base_eps_m && self.base_eps_m <= self.eps_max_m) {
            return bad(format!(
                "need eps_min_m <= base_eps_m <= eps_max_m, got {} / {} / {}",
                self.eps_min_m, self.base_eps_m, self.eps_max_m
            ));
        }
        let factors = [
            ("eps_factor_poi", self.eps_factor_poi),
            ("minpts_factor_poi", self.minpts_factor_poi),
            ("minpts_factor_route", self.minpts_factor_route),
            ("minpts_factor_flood", self.minpts_factor_flood),
            ("minpts_factor_fire", self.minpts_factor_fire),
        ];
        for (name, f) in factors {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("{name} must be > 0, got {f}"));
            }
        }
        for (name, v) in [
            ("poi_near_m", self.poi_near_m),
            ("route_near_m", self.route_near_m),
            ("flood_alt_m", self.flood_alt_m),
            ("ffdi_threshold", self.ffdi_threshold),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        Ok(())
    }

    pub fn uses_altitude(&self) -> bool {
        self.minpts_factor_flood != 1.0
    }
}

/// Geospatial context of one demand point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointContext {
    /// `None` when no route vertex exists.
    pub altitude_m: Option<f64>,
    /// `f64::INFINITY` when there is no POI.
    pub dist_poi_m: f64,
    /// `f64::INFINITY` when there is no route.
    pub dist_route_m: f64,
    pub ffdi_delta: Option<f64>,
}

impl PointContext {
    /// Far from everything, no altitude or fire data.
    pub fn remote() -> Self {
        Self { altitude_m: None, dist_poi_m: f64::INFINITY, dist_route_m: f64::INFINITY, ffdi_delta: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustedParams {
    pub eps_m: f64,
    pub minpts: usize,
}

/// Slack so products that are integers up to rounding (10 × 1.5 × 0.8)
/// do not get bumped by `ceil`.
const CEIL_SLACK: f64 = 1e-9;

/// Per-point radius and density threshold.
///
/// POI proximity tightens the radius and lowers the threshold, route
/// proximity lowers the threshold, low altitude (flood) and high fire
/// danger raise it. The radius is clamped to `[eps_min_m, eps_max_m]` and
/// the threshold is `max(minpts_min, ceil(product))`.
pub fn adjust_params(ctx: &PointContext, cfg: &ConstraintConfig) -> AdjustedParams {
    let near_poi = ctx.dist_poi_m <= cfg.poi_near_m;
    let near_route = ctx.dist_route_m <= cfg.route_near_m;
    let flood = ctx.altitude_m.is_some_and(|a| a < cfg.flood_alt_m);
    let fire = ctx.ffdi_delta.is_some_and(|f| f >= cfg.ffdi_threshold);

    let eps = cfg.base_eps_m * if near_poi { cfg.eps_factor_poi } else { 1.0 };
    let mut m = cfg.base_minpts as f64;
    if near_poi {
        m *= cfg.minpts_factor_poi;
    }
    if near_route {
        m *= cfg.minpts_factor_route;
    }
    if flood {
        m *= cfg.minpts_factor_flood;
    }
    if fire {
        m *= cfg.minpts_factor_fire;
    }
    AdjustedParams {
        eps_m: eps.clamp(cfg.eps_min_m, cfg.eps_max_m),
        minpts: ((m - CEIL_SLACK).ceil().max(0.0) as usize).max(cfg.minpts_min),
    }
}

/// Value of the fire grid cell containing `p`; `None` outside or for a null cell.
pub fn lookup_ffdi(p: GeoPoint, grid: &FireRiskGrid) -> Option<f64> {
    grid.cell_of(p).and_then(|(r, c)| grid.value_at(r, c))
}

/// Spatial indexes over the POI, route and fire layers, shared by context
/// annotation and recommendation snapping.
///
/// POIs are held sorted by `poi_id` and routes by `route_id`, so nearest
/// ties resolve to the smallest id.
#[derive(Debug, Clone)]
pub struct LayerIndex {
    pois: Vec<PoiRecord>,
    poi_index: SpatialIndex,
    routes: Vec<RouteRecord>,
    lines: LineIndex,
    vertex_index: SpatialIndex,
    vertex_altitudes: Vec<f64>,
    grid: Option<FireRiskGrid>,
}

impl LayerIndex {
    pub fn new(pois: &[PoiRecord], routes: &[RouteRecord], grid: Option<&FireRiskGrid>) -> Result<Self> {
        let mut pois = pois.to_vec();
        pois.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));
        let mut routes = routes.to_vec();
        routes.sort_by(|a, b| a.route_id.cmp(&b.route_id));
        let poi_locs: Vec<GeoPoint> = pois.iter().map(|p| p.location).collect();
        let vertices: Vec<GeoPoint> = routes.iter().flat_map(|r| r.polyline.iter().copied()).collect();
        let vertex_altitudes = routes.iter().flat_map(|r| r.altitudes.iter().copied()).collect();
        Ok(Self {
            poi_index: SpatialIndex::for_radius(&poi_locs, 1000.0),
            pois,
            lines: LineIndex::new(routes.iter().map(|r| r.polyline.clone()).collect())?,
            vertex_index: SpatialIndex::for_radius(&vertices, 1000.0),
            vertex_altitudes,
            routes,
            grid: grid.cloned(),
        })
    }

    pub fn pois(&self) -> &[PoiRecord] {
        &self.pois
    }

    pub fn routes(&self) -> &[RouteRecord] {
        &self.routes
    }

    pub fn nearest_poi(&self, p: GeoPoint) -> Option<(&PoiRecord, f64)> {
        self.poi_index.nearest(p).ok().map(|(i, d)| (&self.pois[i], d))
    }

    /// Nearest route, the snapped point on it, and the distance.
    pub fn nearest_route(&self, p: GeoPoint) -> Option<(&RouteRecord, GeoPoint, f64)> {
        self.lines.nearest(p).map(|h| (&self.routes[h.line], h.point, h.distance_m))
    }

    /// Altitude of the nearest route vertex.
    pub fn altitude(&self, p: GeoPoint) -> Result<f64> {
        self.vertex_index.nearest(p).map(|(i, _)| self.vertex_altitudes[i]).map_err(|_| Error::NoAltitudeSource)
    }

    pub fn ffdi(&self, p: GeoPoint) -> Option<f64> {
        self.grid.as_ref().and_then(|g| lookup_ffdi(p, g))
    }

    pub fn context(&self, p: GeoPoint) -> PointContext {
        PointContext {
            altitude_m: self.altitude(p).ok(),
            dist_poi_m: self.nearest_poi(p).map_or(f64::INFINITY, |(_, d)| d),
            dist_route_m: self.nearest_route(p).map_or(f64::INFINITY, |(_, _, d)| d),
            ffdi_delta: self.ffdi(p),
        }
    }
}

/// Altitude of the route vertex nearest to `p`; ties go to the smallest
/// (route_id, vertex index).
pub fn estimate_altitude(p: GeoPoint, routes: &[RouteRecord]) -> Result<f64> {
    LayerIndex::new(&[], routes, None)?.altitude(p)
}

/// Context for every point, parallel to `points`.
///
/// Fails with [`Error::NoAltitudeSource`] only when there are no routes and
/// the flood rule is active.
pub fn annotate_context(
    points: &[DemandPoint],
    layers: &LayerIndex,
    cfg: &ConstraintConfig,
) -> Result<Vec<PointContext>> {
    if layers.routes().is_empty() && cfg.uses_altitude() && !points.is_empty() {
        return Err(Error::NoAltitudeSource);
    }
    Ok(points.par_iter().map(|p| layers.context(p.location)).collect())
}
