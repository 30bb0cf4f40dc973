mod common;

use common::*;
use evsite_core::constraints::{
    adjust_params, annotate_context, lookup_ffdi, ConstraintConfig, LayerIndex, PointContext,
};
use evsite_core::geo::{project_to_segment, BoundingBox, GeoPoint};
use evsite_core::ingest::{clean_trips, extract_demand_points, FireRiskGrid, RouteRecord};
use evsite_core::synth::{build, ScenarioSpec, SplitMix64};

#[test]
fn worked_example_600_m_and_8() {
    let ctx = PointContext { altitude_m: Some(2.0), dist_poi_m: 50.0, dist_route_m: 10.0, ffdi_delta: Some(0.0) };
    let p = adjust_params(&ctx, &ConstraintConfig::default());
    // 800 * 0.75; ceil(10 * 0.6 * 0.8 * 1.5) = ceil(7.2)
    assert_eq!(p.eps_m, 600.0);
    assert_eq!(p.minpts, 8);
}

/// Row-major index of the cell holding `p`, rows from the south edge.
fn cell_index(g: &FireRiskGrid, p: GeoPoint) -> Option<usize> {
    let b = g.bbox();
    if p.lat < b.min_lat || p.lat > b.max_lat || p.lon < b.min_lon || p.lon > b.max_lon {
        return None;
    }
    let fr = (p.lat - b.min_lat) / (b.max_lat - b.min_lat) * g.n_rows() as f64;
    let fc = (p.lon - b.min_lon) / (b.max_lon - b.min_lon) * g.n_cols() as f64;
    let r = (fr as usize).min(g.n_rows() - 1);
    let c = (fc as usize).min(g.n_cols() - 1);
    Some(r * g.n_cols() + c)
}

#[test]
fn ffdi_lookup_equals_index_arithmetic() {
    let mut rng = SplitMix64::new(31);
    let bbox = BoundingBox::new(-34.0, 150.0, -33.0, 151.0).unwrap();
    let cells: Vec<Option<f64>> = (0..100).map(|i| (i % 7 != 0).then_some(i as f64 / 10.0)).collect();
    let grid = FireRiskGrid::new(bbox, 10, 10, cells.clone()).unwrap();
    for _ in 0..200 {
        let p = gp(rng.uniform(-34.1, -32.9), rng.uniform(149.9, 151.1));
        let want = cell_index(&grid, p).and_then(|i| cells[i]);
        assert_eq!(lookup_ffdi(p, &grid), want, "{p:?}");
    }
    assert_eq!(lookup_ffdi(gp(-33.0, 151.0), &grid), cells[99]);
}

fn vertex_altitude_oracle(p: GeoPoint, routes: &[RouteRecord]) -> f64 {
    let mut sorted: Vec<&RouteRecord> = routes.iter().collect();
    sorted.sort_by(|a, b| a.route_id.cmp(&b.route_id));
    let mut best = (f64::INFINITY, f64::NAN);
    for r in sorted {
        for (v, a) in r.polyline.iter().zip(&r.altitudes) {
            let d = haversine(p, *v);
            if d < best.0 {
                best = (d, *a);
            }
        }
    }
    best.1
}

#[test]
fn context_equals_brute_force_on_scenario() {
    let s = build(&ScenarioSpec { seed: 5, ..ScenarioSpec::default() }).unwrap();
    let (trips, _) = clean_trips(&s.trips, 60.0);
    let demand = extract_demand_points(&trips, 100.0, 600.0);
    assert!(demand.len() <= 2000);
    let index = LayerIndex::new(&s.pois, &s.routes, Some(&s.fire_grid)).unwrap();
    let ctx = annotate_context(&demand, &index, &ConstraintConfig::default()).unwrap();
    for (d, c) in demand.iter().zip(&ctx) {
        let p = d.location;
        let poi = s.pois.iter().map(|q| haversine(p, q.location)).fold(f64::INFINITY, f64::min);
        let route = s
            .routes
            .iter()
            .flat_map(|r| r.polyline.windows(2).map(move |w| haversine(p, project_to_segment(p, w[0], w[1]))))
            .fold(f64::INFINITY, f64::min);
        assert!((c.dist_poi_m - poi).abs() < 1e-6);
        assert!((c.dist_route_m - route).abs() < 1e-6);
        assert_eq!(c.altitude_m, Some(vertex_altitude_oracle(p, &s.routes)));
        assert_eq!(c.ffdi_delta, cell_index(&s.fire_grid, p).and_then(|i| s.fire_grid.cells()[i]));
    }
}

#[test]
fn altitude_equals_linear_nearest_vertex() {
    let s = build(&ScenarioSpec { seed: 6, ..ScenarioSpec::default() }).unwrap();
    let index = LayerIndex::new(&[], &s.routes, None).unwrap();
    let mut rng = SplitMix64::new(32);
    for _ in 0..500 {
        let p = gp(rng.uniform(-34.5, -33.3), rng.uniform(150.3, 151.5));
        assert_eq!(index.altitude(p).unwrap(), vertex_altitude_oracle(p, &s.routes));
    }
}
