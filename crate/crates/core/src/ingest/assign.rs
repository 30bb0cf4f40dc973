use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::records::{DemandPoint, LgaRecord};
use crate::geo::{point_in_polygon, BoundingBox, GeoPoint};

/// Demand points partitioned by LGA.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LgaAssignment {
    /// Every LGA name (possibly with an empty list) → point ids, ascending.
    pub buckets: BTreeMap<String, Vec<usize>>,
    pub unassigned: Vec<usize>,
}

impl LgaAssignment {
    pub fn assigned_count(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }
}

/// For each location, the name of the first LGA (ascending name) containing it.
pub fn locate_in_lgas<'a>(locations: &[GeoPoint], lgas: &'a [LgaRecord]) -> Vec<Option<&'a str>> {
    let mut sorted: Vec<(&LgaRecord, BoundingBox)> = lgas.iter().map(|l| (l, l.boundary.bbox())).collect();
    sorted.sort_by(|a, b| a.0.lga_name.cmp(&b.0.lga_name));
    locations
        .par_iter()
        .map(|&p| {
            sorted
                .iter()
                .find(|(l, bb)| bb.contains(p) && point_in_polygon(p, &l.boundary))
                .map(|(l, _)| l.lga_name.as_str())
        })
        .collect()
}

/// Assign each demand point to the first LGA (by ascending name) whose
/// boundary contains it; the rest go to `unassigned`.
pub fn assign_lga(points: &[DemandPoint], lgas: &[LgaRecord]) -> LgaAssignment {
    let locs: Vec<GeoPoint> = points.iter().map(|p| p.location).collect();
    let hits = locate_in_lgas(&locs, lgas);
    let mut out = LgaAssignment {
        buckets: lgas.iter().map(|l| (l.lga_name.clone(), Vec::new())).collect(),
        unassigned: Vec::new(),
    };
    for (p, hit) in points.iter().zip(hits) {
        match hit {
            Some(name) => out.buckets.get_mut(name).expect("known lga").push(p.point_id),
            None => out.unassigned.push(p.point_id),
        }
    }
    for ids in out.buckets.values_mut() {
        ids.sort_unstable();
    }
    out.unassigned.sort_unstable();
    out
}
