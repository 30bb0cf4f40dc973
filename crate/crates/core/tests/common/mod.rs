//! Brute-force reference implementations used as test oracles. Each one is
//! written from the definition, without the library's indexes or shortcuts.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use evsite_core::geo::GeoPoint;
use evsite_core::synth::SplitMix64;

pub const R: f64 = 6_371_008.8;

pub fn gp(lat: f64, lon: f64) -> GeoPoint {
    GeoPoint { lat, lon }
}

/// Haversine in its atan2 form.
pub fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * R * h.sqrt().atan2((1.0 - h).max(0.0).sqrt())
}

/// Even–odd rule with a ray cast due north (+lat) from `p`.
pub fn crossings_inside(p: GeoPoint, rings: &[Vec<GeoPoint>]) -> bool {
    let mut inside = false;
    for ring in rings {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.lon > p.lon) != (b.lon > p.lon) {
                let lat_at = a.lat + (p.lon - a.lon) * (b.lat - a.lat) / (b.lon - a.lon);
                if lat_at > p.lat {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Planar distance in degrees from `p` to the nearest ring edge.
pub fn edge_distance_deg(p: GeoPoint, rings: &[Vec<GeoPoint>]) -> f64 {
    let mut best = f64::INFINITY;
    for ring in rings {
        for w in ring.windows(2) {
            let (ax, ay, bx, by) = (w[0].lon, w[0].lat, w[1].lon, w[1].lat);
            let (dx, dy) = (bx - ax, by - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 { 0.0 } else { (((p.lon - ax) * dx + (p.lat - ay) * dy) / len2).clamp(0.0, 1.0) };
            let (qx, qy) = (ax + t * dx, ay + t * dy);
            best = best.min(((p.lon - qx).powi(2) + (p.lat - qy).powi(2)).sqrt());
        }
    }
    best
}

/// Random simple (star-shaped) polygon around `c`, closed.
pub fn star_polygon(rng: &mut SplitMix64, c: GeoPoint, n: usize, max_r_deg: f64) -> Vec<GeoPoint> {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let mut ring: Vec<GeoPoint> = angles
        .iter()
        .map(|a| {
            let r = rng.uniform(0.1 * max_r_deg, max_r_deg);
            gp(c.lat + r * a.sin(), c.lon + r * a.cos())
        })
        .collect();
    ring.push(ring[0]);
    ring
}

pub fn linear_neighbors(points: &[GeoPoint], p: GeoPoint, r: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| haversine(p, points[i]) <= r).collect()
}

pub fn linear_nearest(points: &[GeoPoint], p: GeoPoint) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, q) in points.iter().enumerate() {
        let d = haversine(p, *q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Sample `samples` points along the polyline (linear in lat/lon, spread
/// over segments by length) and return the closest one.
pub fn dense_projection(p: GeoPoint, line: &[GeoPoint], samples: usize) -> (GeoPoint, f64) {
    let lens: Vec<f64> = line.windows(2).map(|w| haversine(w[0], w[1])).collect();
    let total: f64 = lens.iter().sum();
    let mut best = (line[0], haversine(p, line[0]));
    for (w, len) in line.windows(2).zip(&lens) {
        let n = if total > 0.0 { ((samples as f64) * len / total).ceil() as usize } else { 1 }.max(1);
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let q = gp(w[0].lat + (w[1].lat - w[0].lat) * t, w[0].lon + (w[1].lon - w[0].lon) * t);
            let d = haversine(p, q);
            if d < best.1 {
                best = (q, d);
            }
        }
    }
    best
}

/// Greedy stays found by scanning every (start, end) subsequence: from each
/// start, the longest run whose fixes all lie within `radius` of the start.
pub fn brute_stays(times: &[i64], locs: &[GeoPoint], radius: f64, min_s: f64) -> Vec<(usize, usize)> {
    let n = locs.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut end = i + 1;
        for j in (i + 1..=n).rev() {
            if (i..j).all(|k| haversine(locs[i], locs[k]) <= radius) {
                end = j;
                break;
            }
        }
        if (times[end - 1] - times[i]) as f64 >= min_s {
            out.push((i, end));
            i = end;
        } else {
            i += 1;
        }
    }
    out
}

/// Per-point DBSCAN straight from the definition, with O(n²) neighbourhoods
/// and a work queue that may hold duplicates.
pub fn brute_dbscan(points: &[GeoPoint], eps: &[f64], minpts: &[usize]) -> Vec<Option<usize>> {
    let n = points.len();
    let nbrs: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| haversine(points[i], points[j]) <= eps[i]).collect()).collect();
    let core: Vec<bool> = (0..n).map(|i| nbrs[i].len() >= minpts[i]).collect();
    let mut visited = vec![false; n];
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut c = 0;
    for p in 0..n {
        if visited[p] {
            continue;
        }
        visited[p] = true;
        if !core[p] {
            continue;
        }
        label[p] = Some(c);
        let mut queue: VecDeque<usize> = nbrs[p].iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            if !visited[q] {
                visited[q] = true;
                if core[q] {
                    queue.extend(nbrs[q].iter().copied());
                }
            }
            if label[q].is_none() {
                label[q] = Some(c);
            }
        }
        c += 1;
    }
    label
}

/// Textbook DBSCAN with one (eps, minpts): recursive-style expansion over a
/// seed stack.
pub fn textbook_dbscan(points: &[GeoPoint], eps: f64, minpts: usize) -> Vec<Option<usize>> {
    const UNCLASSIFIED: i64 = -2;
    const NOISE: i64 = -1;
    let n = points.len();
    let region = |i: usize| -> Vec<usize> { (0..n).filter(|&j| haversine(points[i], points[j]) <= eps).collect() };
    let mut cls = vec![UNCLASSIFIED; n];
    let mut cluster = 0i64;
    for p in 0..n {
        if cls[p] != UNCLASSIFIED {
            continue;
        }
        let seeds = region(p);
        if seeds.len() < minpts {
            cls[p] = NOISE;
            continue;
        }
        let mut stack = Vec::new();
        for &s in &seeds {
            if cls[s] == UNCLASSIFIED {
                stack.push(s);
            }
            if cls[s] < 0 {
                cls[s] = cluster;
            }
        }
        while let Some(q) = stack.pop() {
            let result = region(q);
            if result.len() >= minpts {
                for &r in &result {
                    if cls[r] == UNCLASSIFIED {
                        stack.push(r);
                    }
                    if cls[r] < 0 {
                        cls[r] = cluster;
                    }
                }
            }
        }
        cluster += 1;
    }
    cls.into_iter().map(|c| (c >= 0).then_some(c as usize)).collect()
}

/// Rename cluster ids in order of first appearance.
pub fn relabel(labels: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            l.map(|c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
        })
        .collect()
}

/// Minimiser of summed squared haversine distance by refining grid search.
pub fn grid_search_center(members: &[GeoPoint]) -> GeoPoint {
    let cost = |c: GeoPoint| members.iter().map(|m| haversine(c, *m).powi(2)).sum::<f64>();
    let n = members.len() as f64;
    let mut best = gp(members.iter().map(|m| m.lat).sum::<f64>() / n, members.iter().map(|m| m.lon).sum::<f64>() / n);
    let mut step = 0.01;
    while step > 1e-8 {
        let mut improved = true;
        while improved {
            improved = false;
            let here = cost(best);
            let mut cand = best;
            let mut cand_cost = here;
            for di in -5..=5 {
                for dj in -5..=5 {
                    let c = gp(best.lat + di as f64 * step, best.lon + dj as f64 * step);
                    let v = cost(c);
                    if v < cand_cost {
                        cand = c;
                        cand_cost = v;
                    }
                }
            }
            if cand_cost < here {
                best = cand;
                improved = true;
            }
        }
        step /= 4.0;
    }
    best
}

pub fn random_points(rng: &mut SplitMix64, n: usize, center: GeoPoint, half_deg: f64) -> Vec<GeoPoint> {
    (0..n)
        .map(|_| gp(center.lat + rng.uniform(-half_deg, half_deg), center.lon + rng.uniform(-half_deg, half_deg)))
        .collect()
}
