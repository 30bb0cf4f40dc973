//! From clusters to station recommendations: locate, snap to a POI or road,
//! annotate altitude and fire danger, classify, and suppress sites that
//! duplicate the existing plan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::LgaClusterResult;
use crate::constraints::{ConstraintConfig, LayerIndex};
use crate::error::{Error, Result};
use crate::geo::{haversine_distance, GeoPoint, SpatialIndex};
use crate::ingest::{DemandPoint, PoiCategory, StationRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommendConfig {
    pub poi_snap_m: f64,
    pub route_snap_m: f64,
    pub min_sep_m: f64,
    /// Drop recommendations within `min_sep_m` of an existing or approved station.
    pub dedup: bool,
    pub corridor_span_m: f64,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        Self { poi_snap_m: 300.0, route_snap_m: 1000.0, min_sep_m: 500.0, dedup: true, corridor_span_m: 10_000.0 }
    }
}

impl RecommendConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.poi_snap_m > 0.0
            && self.route_snap_m > 0.0
            && self.min_sep_m >= 0.0
            && self.corridor_span_m >= 0.0
            && [self.poi_snap_m, self.route_snap_m, self.min_sep_m, self.corridor_span_m].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config("recommend: snap radii must be > 0, min_sep_m and corridor_span_m >= 0".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargerKind {
    Fast,
    Destination,
}

/// What a recommendation was snapped onto.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SnapTarget {
    Poi { poi_id: String, category: PoiCategory },
    Route { route_id: String },
    Unsnapped,
}

impl std::fmt::Display for SnapTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnapTarget::Poi { poi_id, .. } => write!(f, "poi:{poi_id}"),
            SnapTarget::Route { route_id } => write!(f, "route:{route_id}"),
            SnapTarget::Unsnapped => f.write_str("unsnapped"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub rec_id: String,
    pub location: GeoPoint,
    pub lga_name: String,
    pub charger_kind: ChargerKind,
    pub cluster_size: usize,
    /// Where the cluster itself sits, before snapping.
    pub cluster_location: GeoPoint,
    pub cluster_span_m: f64,
    pub snap_target: SnapTarget,
    pub snap_dist_m: f64,
    pub altitude_m: Option<f64>,
    pub ffdi_delta: Option<f64>,
    pub flood_flag: bool,
    /// `None` when the fire layer has no value here.
    pub fire_flag: Option<bool>,
}

/// Normalised sum of unit vectors; falls back to the medoid when the
/// resultant nearly cancels.
pub fn cluster_location(members: &[GeoPoint]) -> Result<GeoPoint> {
    match members {
        [] => return Err(Error::EmptyCluster),
        [only] => return Ok(*only),
        _ => {}
    }
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for p in members {
        let (phi, lam) = (p.lat.to_radians(), p.lon.to_radians());
        x += phi.cos() * lam.cos();
        y += phi.cos() * lam.sin();
        z += phi.sin();
    }
    let n = members.len() as f64;
    let norm = (x * x + y * y + z * z).sqrt() / n;
    if norm < 1e-9 {
        return Ok(medoid(members));
    }
    Ok(GeoPoint { lat: z.atan2((x * x + y * y).sqrt()).to_degrees(), lon: y.atan2(x).to_degrees() })
}

/// Member minimising the summed haversine distance to all members; first on ties.
pub fn medoid(members: &[GeoPoint]) -> GeoPoint {
    let mut best = (f64::INFINITY, 0);
    for (i, &m) in members.iter().enumerate() {
        let total: f64 = members.iter().map(|&q| haversine_distance(m, q)).sum();
        if total < best.0 {
            best = (total, i);
        }
    }
    members[best.1]
}

/// Largest distance from `center` to any member.
pub fn cluster_span(center: GeoPoint, members: &[GeoPoint]) -> f64 {
    members.iter().map(|&m| haversine_distance(center, m)).fold(0.0, f64::max)
}

/// Nearest POI within `poi_snap_m`, else nearest road point within
/// `route_snap_m`, else the location itself.
pub fn snap(
    location: GeoPoint,
    layers: &LayerIndex,
    poi_snap_m: f64,
    route_snap_m: f64,
) -> (GeoPoint, SnapTarget, f64) {
    if let Some((poi, d)) = layers.nearest_poi(location) {
        if d <= poi_snap_m {
            let target = SnapTarget::Poi { poi_id: poi.poi_id.clone(), category: poi.category };
            return (poi.location, target, d);
        }
    }
    if let Some((route, q, d)) = layers.nearest_route(location) {
        if d <= route_snap_m {
            let target = SnapTarget::Route { route_id: route.route_id.clone() };
            return (q, target, d);
        }
    }
    (location, SnapTarget::Unsnapped, 0.0)
}

/// Fast for a fuel POI or a route-snapped cluster spanning at least the
/// corridor length; destination otherwise.
pub fn classify_charger(target: &SnapTarget, cluster_span_m: f64, corridor_span_m: f64) -> ChargerKind {
    match target {
        SnapTarget::Poi { category: PoiCategory::Fuel, .. } => ChargerKind::Fast,
        SnapTarget::Route { .. } if cluster_span_m >= corridor_span_m => ChargerKind::Fast,
        _ => ChargerKind::Destination,
    }
}

pub fn annotate_risk(mut rec: Recommendation, flood_alt_m: f64, ffdi_threshold: f64) -> Recommendation {
    rec.flood_flag = rec.altitude_m.is_some_and(|a| a < flood_alt_m);
    rec.fire_flag = rec.ffdi_delta.map(|f| f >= ffdi_threshold);
    rec
}

/// Keep recommendations farther than `min_sep_m` from every station,
/// ordered by `rec_id`.
pub fn dedup(recs: &[Recommendation], stations: &[StationRecord], min_sep_m: f64) -> Vec<Recommendation> {
    let locs: Vec<GeoPoint> = stations.iter().map(|s| s.location).collect();
    let index = SpatialIndex::for_radius(&locs, min_sep_m.max(1.0));
    let mut out: Vec<Recommendation> =
        recs.iter().filter(|r| index.neighbors_within(r.location, min_sep_m).is_empty()).cloned().collect();
    out.sort_by(|a, b| a.rec_id.cmp(&b.rec_id));
    out
}

/// Recommendations before and after deduplication, both sorted by `rec_id`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecommendOutput {
    pub before_dedup: Vec<Recommendation>,
    pub recommendations: Vec<Recommendation>,
}

/// One recommendation per cluster (`rec_id = "<lga>-<cluster, 3 digits>"`).
///
/// `points` is indexed by `point_id`. Clusters smaller than `minpts_min`
/// (possible when border points were claimed by an earlier cluster) are
/// skipped.
pub fn recommend_all(
    clusters: &[LgaClusterResult],
    points: &[DemandPoint],
    layers: &LayerIndex,
    stations: &[StationRecord],
    constraints: &ConstraintConfig,
    cfg: &RecommendConfig,
) -> Result<RecommendOutput> {
    let jobs: Vec<(&LgaClusterResult, usize, Vec<GeoPoint>)> = clusters
        .iter()
        .flat_map(|res| {
            res.assignment
                .members()
                .into_iter()
                .enumerate()
                .map(move |(c, m)| (res, c, m.iter().map(|&i| points[res.point_ids[i]].location).collect()))
        })
        .filter(|(_, _, m): &(_, _, Vec<GeoPoint>)| m.len() >= constraints.minpts_min)
        .collect();

    let mut before = jobs
        .par_iter()
        .map(|(res, c, members)| {
            let center = cluster_location(members)?;
            let span = cluster_span(center, members);
            let (location, snap_target, snap_dist_m) = snap(center, layers, cfg.poi_snap_m, cfg.route_snap_m);
            let altitude_m = match layers.altitude(location) {
                Ok(a) => Some(a),
                Err(_) if !constraints.uses_altitude() => None,
                Err(e) => return Err(e),
            };
            let rec = Recommendation {
                rec_id: format!("{}-{:03}", res.lga_name, c),
                location,
                lga_name: res.lga_name.clone(),
                charger_kind: classify_charger(&snap_target, span, cfg.corridor_span_m),
                cluster_size: members.len(),
                cluster_location: center,
                cluster_span_m: span,
                snap_target,
                snap_dist_m,
                altitude_m,
                ffdi_delta: layers.ffdi(location),
                flood_flag: false,
                fire_flag: None,
            };
            Ok(annotate_risk(rec, constraints.flood_alt_m, constraints.ffdi_threshold))
        })
        .collect::<Result<Vec<_>>>()?;
    before.sort_by(|a, b| a.rec_id.cmp(&b.rec_id));
    let recommendations = if cfg.dedup { dedup(&before, stations, cfg.min_sep_m) } else { before.clone() };
    Ok(RecommendOutput { before_dedup: before, recommendations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterAssignment;
    use crate::constraints::AdjustedParams;
    use crate::ingest::{DemandKind, PoiRecord, RouteRecord, StationKind};

    fn gp(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint { lat, lon }
    }

    fn rec_at(id: &str, p: GeoPoint) -> Recommendation {
        Recommendation {
            rec_id: id.into(),
            location: p,
            lga_name: "A".into(),
            charger_kind: ChargerKind::Destination,
            cluster_size: 5,
            cluster_location: p,
            cluster_span_m: 0.0,
            snap_target: SnapTarget::Unsnapped,
            snap_dist_m: 0.0,
            altitude_m: Some(10.0),
            ffdi_delta: None,
            flood_flag: false,
            fire_flag: None,
        }
    }

    fn station(id: &str, p: GeoPoint) -> StationRecord {
        StationRecord { station_id: id.into(), kind: StationKind::ExistingFast, location: p }
    }

    #[test]
    fn single_member_is_its_own_location() {
        let p = gp(-33.123456789, 151.987654321);
        assert_eq!(cluster_location(&[p]).unwrap(), p);
        assert!(matches!(cluster_location(&[]), Err(Error::EmptyCluster)));
    }

    #[test]
    fn same_meridian_midpoint() {
        let c = cluster_location(&[gp(-33.0, 151.0), gp(-34.0, 151.0)]).unwrap();
        assert!((c.lat + 33.5).abs() < 1e-9 && (c.lon - 151.0).abs() < 1e-9, "{c:?}");
    }

    #[test]
    fn antipodal_pair_falls_back_to_medoid() {
        let c = cluster_location(&[gp(0.0, 0.0), gp(0.0, 180.0)]).unwrap();
        assert_eq!(c, gp(0.0, 0.0));
    }

    #[test]
    fn snap_prefers_poi_then_nothing() {
        let p = gp(-33.0, 151.0);
        let poi = PoiRecord { poi_id: "p".into(), category: PoiCategory::Tourism, location: p };
        let layers = LayerIndex::new(&[poi], &[], None).unwrap();
        let (q, t, d) = snap(p, &layers, 300.0, 1000.0);
        assert_eq!((q, d), (p, 0.0));
        assert!(matches!(t, SnapTarget::Poi { .. }));
        let empty = LayerIndex::new(&[], &[], None).unwrap();
        assert_eq!(snap(p, &empty, 300.0, 1000.0), (p, SnapTarget::Unsnapped, 0.0));
    }

    #[test]
    fn classification_rules() {
        let fuel = SnapTarget::Poi { poi_id: "f".into(), category: PoiCategory::Fuel };
        let food = SnapTarget::Poi { poi_id: "f".into(), category: PoiCategory::FastFood };
        let road = SnapTarget::Route { route_id: "r".into() };
        assert_eq!(classify_charger(&fuel, 0.0, 10_000.0), ChargerKind::Fast);
        assert_eq!(classify_charger(&food, 50.0, 10_000.0), ChargerKind::Destination);
        assert_eq!(classify_charger(&road, 12_000.0, 10_000.0), ChargerKind::Fast);
        assert_eq!(classify_charger(&road, 9_000.0, 10_000.0), ChargerKind::Destination);
        assert_eq!(classify_charger(&SnapTarget::Unsnapped, 1e6, 10_000.0), ChargerKind::Destination);
    }

    #[test]
    fn risk_flags() {
        let mut r = rec_at("a", gp(0.0, 0.0));
        r.altitude_m = Some(1.0);
        let r = annotate_risk(r, 5.0, 2.0);
        assert!(r.flood_flag);
        assert_eq!(r.fire_flag, None);
        let mut r2 = rec_at("b", gp(0.0, 0.0));
        r2.ffdi_delta = Some(2.0);
        assert_eq!(annotate_risk(r2, 5.0, 2.0).fire_flag, Some(true));
    }

    #[test]
    fn dedup_removes_coincident_and_keeps_with_zero_sep() {
        let p = gp(-33.0, 151.0);
        let far = gp(-33.1, 151.0);
        let recs = vec![rec_at("b", far), rec_at("a", p)];
        let st = vec![station("s", p)];
        let out = dedup(&recs, &st, 500.0);
        assert_eq!(out.iter().map(|r| r.rec_id.as_str()).collect::<Vec<_>>(), vec!["b"]);
        let near = gp(-33.001, 151.0);
        let out = dedup(&[rec_at("a", near), rec_at("b", far)], &st, 0.0);
        assert_eq!(out.len(), 2);
    }

    fn blob_result(n: usize) -> (LgaClusterResult, Vec<DemandPoint>) {
        let pts: Vec<DemandPoint> = (0..n)
            .map(|i| DemandPoint {
                point_id: i,
                location: gp(-33.0 + 1e-5 * i as f64, 151.0),
                source_trip: "t".into(),
                timestamp: 0,
                kind: DemandKind::Origin,
            })
            .collect();
        let res = LgaClusterResult {
            lga_name: "A".into(),
            point_ids: (0..n).collect(),
            assignment: ClusterAssignment { labels: vec![Some(0); n], cluster_count: 1 },
            per_point_params: vec![AdjustedParams { eps_m: 800.0, minpts: 2 }; n],
        };
        (res, pts)
    }

    #[test]
    fn blob_at_fuel_poi_gives_one_fast_recommendation() {
        let (res, pts) = blob_result(10);
        let poi_loc = gp(-33.0 + 4.5e-5, 151.0);
        let poi = PoiRecord { poi_id: "fuel1".into(), category: PoiCategory::Fuel, location: poi_loc };
        let route = RouteRecord::new("r".into(), vec![gp(-33.0, 150.9), gp(-33.0, 151.1)], vec![20.0, 20.0]).unwrap();
        let layers = LayerIndex::new(&[poi], &[route], None).unwrap();
        let out = recommend_all(&[res], &pts, &layers, &[], &ConstraintConfig::default(), &RecommendConfig::default())
            .unwrap();
        assert_eq!(out.recommendations.len(), 1);
        let r = &out.recommendations[0];
        assert_eq!(r.rec_id, "A-000");
        assert_eq!(r.location, poi_loc);
        assert_eq!(r.charger_kind, ChargerKind::Fast);
        assert_eq!(r.altitude_m, Some(20.0));
    }

    #[test]
    fn blob_next_to_station_is_suppressed() {
        let (res, pts) = blob_result(10);
        let route = RouteRecord::new("r".into(), vec![gp(-33.0, 150.9), gp(-33.0, 151.1)], vec![20.0, 20.0]).unwrap();
        let layers = LayerIndex::new(&[], &[route], None).unwrap();
        let st = vec![station("s", gp(-33.001, 151.0))];
        let out = recommend_all(&[res], &pts, &layers, &st, &ConstraintConfig::default(), &RecommendConfig::default())
            .unwrap();
        assert_eq!(out.before_dedup.len(), 1);
        assert!(out.recommendations.is_empty());
    }
}
