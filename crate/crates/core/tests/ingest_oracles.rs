mod common;

use std::path::Path;

use common::*;
use evsite_core::geo::{point_in_polygon, rectangle_ring, GeoPoint, MultiPolygon, Polygon};
use evsite_core::ingest::{
    assign_lga, clean_trips, detect_stays, extract_demand_points, load_fire_grid, load_lgas, load_pois, load_routes,
    load_stations, load_trips, DemandKind, DemandPoint, LgaRecord, TripFix, TripFormat, TripRecord,
};
use evsite_core::synth::{generate, ScenarioSpec, SplitMix64};

fn fixture() -> Vec<TripRecord> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/trips_10x417.csv");
    let (trips, summary) = load_trips(&path, TripFormat::Csv).unwrap();
    assert_eq!(summary.total_rows, 417);
    assert!(summary.malformed.is_empty());
    assert_eq!(summary.short_trips, 0);
    trips
}

#[test]
fn fixture_parses_to_expected_structure() {
    type Fix = (i64, f64, f64);
    // (trip, fixes, first, last)
    let expected: [(&str, usize, Fix, Fix); 10] = [
        ("T01", 12, (1600100000, -33.01, 151.0), (1600100330, -33.0111, 151.00165)),
        ("T02", 25, (1600200000, -33.02, 151.0), (1600200720, -33.0224, 151.0036)),
        ("T03", 38, (1600300000, -33.03, 151.0), (1600301110, -33.0337, 151.00555)),
        ("T04", 41, (1600400000, -33.04, 151.0), (1600401200, -33.044, 151.006)),
        ("T05", 50, (1600500000, -33.05, 151.0), (1600501470, -33.0549, 151.00735)),
        ("T06", 47, (1600600000, -33.06, 151.0), (1600601380, -33.0646, 151.0069)),
        ("T07", 33, (1600700000, -33.07, 151.0), (1600700960, -33.0732, 151.0048)),
        ("T08", 60, (1600800000, -33.08, 151.0), (1600801770, -33.0859, 151.00885)),
        ("T09", 55, (1600900000, -33.09, 151.0), (1600901620, -33.0954, 151.0081)),
        ("T10", 56, (1601000000, -33.1, 151.0), (1601001650, -33.1055, 151.00825)),
    ];
    let trips = fixture();
    assert_eq!(trips.len(), 10);
    for (t, (id, n, first, last)) in trips.iter().zip(expected) {
        assert_eq!(t.trip_id, id);
        assert_eq!(t.points.len(), n);
        let f = t.points[0];
        let l = t.points[n - 1];
        assert_eq!((f.timestamp, f.location.lat, f.location.lon), first);
        assert_eq!((l.timestamp, l.location.lat, l.location.lon), last);
        assert!(t.points.windows(2).all(|w| w[1].timestamp - w[0].timestamp == 30));
    }
}

#[test]
fn random_corruption_is_undone_by_cleaning() {
    let clean = fixture();
    let (again, summary) = clean_trips(&clean, 60.0);
    assert_eq!(again, clean);
    assert!(summary.is_clean());
    for seed in 0..20 {
        let mut rng = SplitMix64::new(seed);
        let mut dirty = clean.clone();
        let (mut dups, mut spikes) = (0, 0);
        for t in &mut dirty {
            let mut fixes: Vec<TripFix> = Vec::new();
            for (i, f) in t.points.iter().enumerate() {
                fixes.push(*f);
                if rng.chance(0.05) {
                    fixes.push(*f);
                    dups += 1;
                } else if i + 1 < t.points.len() && rng.chance(0.05) {
                    // 1° away, half-way in time to the next fix
                    fixes.push(TripFix {
                        timestamp: f.timestamp + 15,
                        location: gp(f.location.lat + 1.0, f.location.lon),
                    });
                    spikes += 1;
                }
            }
            t.points = fixes;
        }
        let (out, summary) = clean_trips(&dirty, 60.0);
        assert_eq!(out, clean, "seed {seed}");
        assert_eq!(summary.duplicate_fixes_removed, dups);
        assert_eq!(summary.speed_violations_removed, spikes);
    }
}

fn offset(p: GeoPoint, north_m: f64, east_m: f64) -> GeoPoint {
    let k = R * std::f64::consts::PI / 180.0;
    gp(p.lat + north_m / k, p.lon + east_m / (k * p.lat.to_radians().cos()))
}

#[test]
fn three_engineered_stays() {
    let stays = [gp(-33.80, 151.00), gp(-33.82, 151.03), gp(-33.85, 151.01)];
    let mut fixes = Vec::new();
    let mut t = 0;
    let mut push = |p: GeoPoint, dt: i64, fixes: &mut Vec<TripFix>| {
        t += dt;
        fixes.push(TripFix { timestamp: t, location: p });
    };
    push(gp(-33.78, 150.98), 0, &mut fixes);
    let mut prev = fixes[0].location;
    for s in stays {
        for k in 1..=4 {
            let f = k as f64 / 5.0;
            push(gp(prev.lat + (s.lat - prev.lat) * f, prev.lon + (s.lon - prev.lon) * f), 60, &mut fixes);
        }
        // symmetric pattern around the stay point: centroid is the point itself
        for (n, e) in [(0.0, 0.0), (20.0, 0.0), (-20.0, 0.0), (0.0, 20.0), (0.0, -20.0), (10.0, 10.0), (-10.0, -10.0)] {
            push(offset(s, n, e), 150, &mut fixes);
        }
        prev = s;
    }
    push(gp(-33.90, 151.05), 600, &mut fixes);
    let trip = TripRecord { trip_id: "E".into(), points: fixes.clone() };
    let times: Vec<i64> = fixes.iter().map(|f| f.timestamp).collect();
    let locs: Vec<GeoPoint> = fixes.iter().map(|f| f.location).collect();
    let brute = brute_stays(&times, &locs, 100.0, 600.0);
    let got: Vec<(usize, usize)> = detect_stays(&fixes, 100.0, 600.0).into_iter().map(|r| (r.start, r.end)).collect();
    assert_eq!(got, brute);
    assert_eq!(got.len(), 3);

    let demand = extract_demand_points(&[trip], 100.0, 600.0);
    assert_eq!(demand.len(), 5);
    let kinds: Vec<DemandKind> = demand.iter().map(|d| d.kind).collect();
    assert_eq!(
        kinds,
        [DemandKind::Origin, DemandKind::Dwell, DemandKind::Dwell, DemandKind::Dwell, DemandKind::Destination]
    );
    for (d, s) in demand[1..4].iter().zip(stays) {
        assert!(haversine(d.location, s) <= 1.0, "{:?} vs {s:?}", d.location);
    }
    assert_eq!(demand.iter().map(|d| d.point_id).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
}

#[test]
fn stay_detection_matches_subsequence_scan() {
    let mut rng = SplitMix64::new(21);
    for _ in 0..200 {
        let n = 2 + rng.below(40);
        let mut t = 0;
        let mut p = gp(-33.0, 151.0);
        let mut times = Vec::new();
        let mut locs = Vec::new();
        for _ in 0..n {
            t += 1 + rng.below(300) as i64;
            let step = if rng.chance(0.6) { 30.0 } else { 400.0 };
            p = gp(p.lat + rng.uniform(-1.0, 1.0) * step / 111_000.0, p.lon + rng.uniform(-1.0, 1.0) * step / 93_000.0);
            times.push(t);
            locs.push(p);
        }
        let fixes: Vec<TripFix> =
            times.iter().zip(&locs).map(|(&timestamp, &location)| TripFix { timestamp, location }).collect();
        let got: Vec<(usize, usize)> =
            detect_stays(&fixes, 100.0, 600.0).into_iter().map(|r| (r.start, r.end)).collect();
        assert_eq!(got, brute_stays(&times, &locs, 100.0, 600.0));
    }
}

#[test]
fn lga_assignment_equals_brute_force_containment() {
    let mut rng = SplitMix64::new(22);
    // 5 LGAs: four quadrant rectangles and a star-shaped one overlapping them
    let mut lgas: Vec<LgaRecord> = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| {
            let ring = rectangle_ring(-34.0 + r, 150.0 + c, -33.0 + r, 151.0 + c);
            LgaRecord { lga_name: format!("Q{i}"), boundary: MultiPolygon::from(Polygon::new(ring, vec![]).unwrap()) }
        })
        .collect();
    let star = star_polygon(&mut rng, gp(-33.0, 151.0), 9, 0.6);
    lgas.push(LgaRecord {
        lga_name: "A_star".into(),
        boundary: MultiPolygon::from(Polygon::new(star, vec![]).unwrap()),
    });
    let points: Vec<DemandPoint> = (0..1000)
        .map(|i| DemandPoint {
            point_id: i,
            location: gp(rng.uniform(-34.3, -31.7), rng.uniform(149.7, 152.3)),
            source_trip: "t".into(),
            timestamp: 0,
            kind: DemandKind::Origin,
        })
        .collect();
    let a = assign_lga(&points, &lgas);
    let mut names: Vec<&LgaRecord> = lgas.iter().collect();
    names.sort_by(|x, y| x.lga_name.cmp(&y.lga_name));
    let mut seen = vec![0; points.len()];
    for p in &points {
        let want = names.iter().find(|l| point_in_polygon(p.location, &l.boundary)).map(|l| l.lga_name.as_str());
        match want {
            Some(name) => assert!(a.buckets[name].contains(&p.point_id)),
            None => assert!(a.unassigned.contains(&p.point_id)),
        }
    }
    for id in a.buckets.values().flatten().chain(&a.unassigned) {
        seen[*id] += 1;
    }
    assert!(seen.iter().all(|&c| c == 1));
    assert_eq!(a.assigned_count() + a.unassigned.len(), points.len());
    assert!(!a.unassigned.is_empty() && !a.buckets["A_star"].is_empty());
}

#[test]
fn synthetic_bundle_counts_match_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::default(), dir.path()).unwrap();
    let d = dir.path();
    let (trips, summary) = load_trips(&d.join("trips.csv"), TripFormat::Csv).unwrap();
    assert_eq!(summary.total_rows, m.counts.trip_rows);
    assert!(summary.malformed.is_empty());
    assert_eq!(trips.len(), m.counts.trips);
    assert_eq!(load_lgas(&d.join("lgas.geojson")).unwrap().len(), m.counts.lgas);
    assert_eq!(load_pois(&d.join("pois.geojson")).unwrap().len(), m.counts.pois);
    assert_eq!(load_routes(&d.join("routes.geojson")).unwrap().len(), m.counts.routes);
    assert_eq!(load_stations(&d.join("stations.geojson")).unwrap().len(), m.counts.stations);
    assert_eq!(load_fire_grid(&d.join("fire_grid.json")).unwrap().cells().len(), m.counts.fire_cells);
    let (clean, s) = clean_trips(&trips, 60.0);
    assert!(s.is_clean());
    assert_eq!(extract_demand_points(&clean, 100.0, 600.0).len(), m.counts.demand_points);
    assert_eq!(m.hotspots.iter().map(|h| h.planted_points).sum::<usize>(), 480);
}
