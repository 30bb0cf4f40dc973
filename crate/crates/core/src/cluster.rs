//! Per-LGA DBSCAN with per-point radius and density threshold.
//!
//! With parameters varying per point the classic definitions become
//! asymmetric, so they are fixed as follows: `N(p)` is every point within
//! `eps(p)` of `p` (including `p`), and `p` is core iff `|N(p)| >= minpts(p)`.
//! Points are visited in ascending `point_id`. An unvisited core point seeds
//! a new cluster and expands breadth-first over a FIFO queue seeded with
//! `N(p)` in id order; each dequeued unvisited point is visited and, if core,
//! appends its own `N(q)`; every dequeued point not yet in a cluster joins
//! the current one. Cluster ids follow creation order.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{adjust_params, AdjustedParams, ConstraintConfig, PointContext};
use crate::error::{Error, Result};
use crate::geo::{GeoPoint, SpatialIndex};
use crate::ingest::DemandPoint;

/// Per-point labels: `None` is noise, `Some(c)` with `c < cluster_count`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    pub labels: Vec<Option<usize>>,
    pub cluster_count: usize,
}

impl ClusterAssignment {
    /// Member positions (into the label array) of each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(i);
            }
        }
        out
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LgaClusterResult {
    pub lga_name: String,
    /// Point ids of the bucket, ascending; `assignment.labels` and
    /// `per_point_params` are parallel to it.
    pub point_ids: Vec<usize>,
    pub assignment: ClusterAssignment,
    pub per_point_params: Vec<AdjustedParams>,
}

/// DBSCAN over `locations` with one `(eps, minpts)` per point. Visit order is
/// the slice order, so callers pass points sorted by id.
pub fn dbscan_with_params(locations: &[GeoPoint], params: &[AdjustedParams]) -> Result<ClusterAssignment> {
    if locations.len() != params.len() {
        return Err(Error::LengthMismatch { what: "points vs parameters", left: locations.len(), right: params.len() });
    }
    let n = locations.len();
    let max_eps = params.iter().map(|p| p.eps_m).fold(0.0, f64::max);
    let index = SpatialIndex::for_radius(locations, max_eps.max(1.0));
    let neighbors = |i: usize| index.neighbors_within(locations[i], params[i].eps_m);

    let mut visited = vec![false; n];
    let mut labels: Vec<Option<usize>> = vec![None; n];
    // marks points already queued for the cluster being expanded
    let mut queued_for = vec![usize::MAX; n];
    let mut cluster_count = 0;
    let mut queue = VecDeque::new();

    for p in 0..n {
        if visited[p] {
            continue;
        }
        visited[p] = true;
        let seed = neighbors(p);
        if seed.len() < params[p].minpts {
            continue;
        }
        let c = cluster_count;
        cluster_count += 1;
        labels[p] = Some(c);
        queue.clear();
        for q in seed {
            if labels[q].is_none() && queued_for[q] != c {
                queued_for[q] = c;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            if !visited[q] {
                visited[q] = true;
                let nq = neighbors(q);
                if nq.len() >= params[q].minpts {
                    for r in nq {
                        if labels[r].is_none() && queued_for[r] != c {
                            queued_for[r] = c;
                            queue.push_back(r);
                        }
                    }
                }
            }
            if labels[q].is_none() {
                labels[q] = Some(c);
            }
        }
    }
    Ok(ClusterAssignment { labels, cluster_count })
}

/// Cluster one LGA's points with parameters adjusted from their contexts.
/// Labels and params in the result follow ascending `point_id`.
pub fn dbscan_lga(
    lga_name: &str,
    points: &[DemandPoint],
    contexts: &[PointContext],
    cfg: &ConstraintConfig,
) -> Result<LgaClusterResult> {
    if points.len() != contexts.len() {
        return Err(Error::LengthMismatch { what: "points vs contexts", left: points.len(), right: contexts.len() });
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i].point_id);
    let locations: Vec<GeoPoint> = order.iter().map(|&i| points[i].location).collect();
    let params: Vec<AdjustedParams> = order.iter().map(|&i| adjust_params(&contexts[i], cfg)).collect();
    let assignment = dbscan_with_params(&locations, &params)?;
    Ok(LgaClusterResult {
        lga_name: lga_name.to_string(),
        point_ids: order.iter().map(|&i| points[i].point_id).collect(),
        assignment,
        per_point_params: params,
    })
}

/// Cluster every LGA bucket independently (in parallel); results sorted by name.
///
/// `points` and `contexts` are indexed by `point_id`.
pub fn cluster_all(
    buckets: &BTreeMap<String, Vec<usize>>,
    points: &[DemandPoint],
    contexts: &[PointContext],
    cfg: &ConstraintConfig,
) -> Result<Vec<LgaClusterResult>> {
    if points.len() != contexts.len() {
        return Err(Error::LengthMismatch { what: "points vs contexts", left: points.len(), right: contexts.len() });
    }
    let mut results = buckets
        .par_iter()
        .map(|(name, ids)| {
            let pts: Vec<DemandPoint> = ids.iter().map(|&i| points[i].clone()).collect();
            let ctx: Vec<PointContext> = ids.iter().map(|&i| contexts[i]).collect();
            dbscan_lga(name, &pts, &ctx, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.lga_name.cmp(&b.lga_name));
    Ok(results)
}
