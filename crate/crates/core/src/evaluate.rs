//! Comparison of recommendations against the existing station plan.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, SpatialIndex};
use crate::ingest::{locate_in_lgas, DemandPoint, LgaRecord, StationKind, StationRecord};
use crate::recommend::{ChargerKind, RecommendOutput, Recommendation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub align_m: f64,
    pub coverage_radius_m: f64,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self { align_m: 1000.0, coverage_radius_m: 3000.0 }
    }
}

impl EvaluateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.align_m > 0.0 && self.coverage_radius_m > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("evaluate: align_m and coverage_radius_m must be > 0".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LgaCounts {
    pub existing_fast: usize,
    pub existing_destination: usize,
    pub approved: usize,
    pub recommended_fast: usize,
    pub recommended_destination: usize,
}

impl LgaCounts {
    fn add(&mut self, o: &LgaCounts) {
        self.existing_fast += o.existing_fast;
        self.existing_destination += o.existing_destination;
        self.approved += o.approved;
        self.recommended_fast += o.recommended_fast;
        self.recommended_destination += o.recommended_destination;
    }

    fn count_station(&mut self, kind: StationKind) {
        match kind {
            StationKind::ExistingFast => self.existing_fast += 1,
            StationKind::ExistingDestination => self.existing_destination += 1,
            StationKind::Approved => self.approved += 1,
        }
    }

    fn count_rec(&mut self, kind: ChargerKind) {
        match kind {
            ChargerKind::Fast => self.recommended_fast += 1,
            ChargerKind::Destination => self.recommended_destination += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceStats {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl DistanceStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        Some(Self { min: v[0], median, mean: v.iter().sum::<f64>() / n as f64, max: v[n - 1] })
    }
}

/// Share of recommendations near an existing or approved station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    /// 0.0 when `evaluated == 0`.
    pub rate: f64,
    pub evaluated: usize,
    pub aligned: usize,
}

pub fn alignment_rate(recs: &[Recommendation], stations: &[StationRecord], align_m: f64) -> Alignment {
    let locs: Vec<GeoPoint> = stations.iter().map(|s| s.location).collect();
    let index = SpatialIndex::for_radius(&locs, align_m);
    let aligned = recs.iter().filter(|r| !index.neighbors_within(r.location, align_m).is_empty()).count();
    Alignment {
        rate: if recs.is_empty() { 0.0 } else { aligned as f64 / recs.len() as f64 },
        evaluated: recs.len(),
        aligned,
    }
}

/// Fraction of demand points within `radius_m` of any site.
pub fn coverage(points: &[GeoPoint], sites: &[GeoPoint], radius_m: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::NoDemandPoints);
    }
    let index = SpatialIndex::for_radius(sites, radius_m);
    let covered = points.iter().filter(|&&p| !index.neighbors_within(p, radius_m).is_empty()).count();
    Ok(covered as f64 / points.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_lga_counts: BTreeMap<String, LgaCounts>,
    /// Stations outside every LGA.
    pub unassigned_counts: LgaCounts,
    pub totals: LgaCounts,
    pub alignment_rate: f64,
    /// Recommendations (before deduplication) the alignment rate is over.
    pub alignment_evaluated: usize,
    pub new_area_count: usize,
    pub demand_point_count: usize,
    /// Both coverages are 0 when there are no demand points.
    pub coverage_before: f64,
    pub coverage_after: f64,
    /// Final recommendation to nearest existing/approved station, meters.
    pub nearest_existing_distance_stats: Option<DistanceStats>,
    pub align_m: f64,
    pub coverage_radius_m: f64,
}

pub fn build_report(
    points: &[DemandPoint],
    lgas: &[LgaRecord],
    stations: &[StationRecord],
    output: &RecommendOutput,
    cfg: &EvaluateConfig,
) -> EvaluationReport {
    let mut per_lga: BTreeMap<String, LgaCounts> =
        lgas.iter().map(|l| (l.lga_name.clone(), LgaCounts::default())).collect();
    let mut unassigned = LgaCounts::default();
    let station_locs: Vec<GeoPoint> = stations.iter().map(|s| s.location).collect();
    for (s, lga) in stations.iter().zip(locate_in_lgas(&station_locs, lgas)) {
        match lga.and_then(|n| per_lga.get_mut(n)) {
            Some(c) => c.count_station(s.kind),
            None => unassigned.count_station(s.kind),
        }
    }
    for r in &output.recommendations {
        match per_lga.get_mut(&r.lga_name) {
            Some(c) => c.count_rec(r.charger_kind),
            None => unassigned.count_rec(r.charger_kind),
        }
    }
    let mut totals = unassigned;
    per_lga.values().for_each(|c| totals.add(c));

    let alignment = alignment_rate(&output.before_dedup, stations, cfg.align_m);
    let station_index = SpatialIndex::for_radius(&station_locs, cfg.align_m);
    let nearest: Vec<f64> =
        output.recommendations.iter().filter_map(|r| station_index.nearest(r.location).ok().map(|(_, d)| d)).collect();
    let new_area_count = output
        .recommendations
        .iter()
        .filter(|r| station_index.neighbors_within(r.location, cfg.align_m).is_empty())
        .count();

    let demand: Vec<GeoPoint> = points.iter().map(|p| p.location).collect();
    let mut sites = station_locs.clone();
    sites.extend(output.recommendations.iter().map(|r| r.location));
    let coverage_before = coverage(&demand, &station_locs, cfg.coverage_radius_m).unwrap_or(0.0);
    let coverage_after = coverage(&demand, &sites, cfg.coverage_radius_m).unwrap_or(0.0);

    EvaluationReport {
        per_lga_counts: per_lga,
        unassigned_counts: unassigned,
        totals,
        alignment_rate: alignment.rate,
        alignment_evaluated: alignment.evaluated,
        new_area_count,
        demand_point_count: points.len(),
        coverage_before,
        coverage_after,
        nearest_existing_distance_stats: DistanceStats::of(&nearest),
        align_m: cfg.align_m,
        coverage_radius_m: cfg.coverage_radius_m,
    }
}

impl EvaluationReport {
    /// Aligned plain-text rendering carrying the same values as the JSON form.
    pub fn to_table(&self) -> String {
        let header =
            ["lga", "existing_fast", "existing_destination", "approved", "recommended_fast", "recommended_destination"];
        let mut rows: Vec<[String; 6]> = self.per_lga_counts.iter().map(|(name, c)| row(name, c)).collect();
        rows.push(row("(unassigned)", &self.unassigned_counts));
        rows.push(row("TOTAL", &self.totals));
        let widths: Vec<usize> =
            (0..6).map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0)).collect();
        let mut out = String::new();
        let line = |cells: &[&str], out: &mut String| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(
                    |(i, c)| if i == 0 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) },
                )
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&header, &mut out);
        for r in &rows {
            line(&r.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "alignment_rate           {} (of {} recommendations, align_m {})",
            self.alignment_rate, self.alignment_evaluated, self.align_m
        );
        let _ = writeln!(out, "new_area_count           {}", self.new_area_count);
        let _ = writeln!(out, "demand_point_count       {}", self.demand_point_count);
        let _ =
            writeln!(out, "coverage_before          {} (radius {} m)", self.coverage_before, self.coverage_radius_m);
        let _ = writeln!(out, "coverage_after           {}", self.coverage_after);
        match &self.nearest_existing_distance_stats {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "nearest_existing_m       min {} median {} mean {} max {}",
                    s.min, s.median, s.mean, s.max
                );
            }
            None => {
                let _ = writeln!(out, "nearest_existing_m       n/a");
            }
        }
        out
    }
}

fn row(name: &str, c: &LgaCounts) -> [String; 6] {
    [
        name.to_string(),
        c.existing_fast.to_string(),
        c.existing_destination.to_string(),
        c.approved.to_string(),
        c.recommended_fast.to_string(),
        c.recommended_destination.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{rectangle_ring, Polygon};
    use crate::recommend::SnapTarget;

    fn gp(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint { lat, lon }
    }

    fn rec(id: &str, lga: &str, p: GeoPoint) -> Recommendation {
        Recommendation {
            rec_id: id.into(),
            location: p,
            lga_name: lga.into(),
            charger_kind: ChargerKind::Fast,
            cluster_size: 5,
            cluster_location: p,
            cluster_span_m: 0.0,
            snap_target: SnapTarget::Unsnapped,
            snap_dist_m: 0.0,
            altitude_m: None,
            ffdi_delta: None,
            flood_flag: false,
            fire_flag: None,
        }
    }

    fn st(id: &str, p: GeoPoint) -> StationRecord {
        StationRecord { station_id: id.into(), kind: StationKind::Approved, location: p }
    }

    #[test]
    fn alignment_all_and_none() {
        let p = gp(-33.0, 151.0);
        let a = alignment_rate(&[rec("a", "A", p)], &[st("s", p)], 1000.0);
        assert_eq!(a.rate, 1.0);
        let a = alignment_rate(&[rec("a", "A", p)], &[], 1000.0);
        assert_eq!(a.rate, 0.0);
        let a = alignment_rate(&[], &[st("s", p)], 1000.0);
        assert_eq!((a.rate, a.evaluated), (0.0, 0));
    }

    #[test]
    fn coverage_edges() {
        let pts = vec![gp(-33.0, 151.0), gp(-33.5, 151.5)];
        assert_eq!(coverage(&pts, &pts, 1.0).unwrap(), 1.0);
        assert_eq!(coverage(&pts, &[], 3000.0).unwrap(), 0.0);
        assert!(matches!(coverage(&[], &pts, 1.0), Err(Error::NoDemandPoints)));
    }

    #[test]
    fn report_counts_one_rec() {
        let lga = LgaRecord {
            lga_name: "A".into(),
            boundary: Polygon::new(rectangle_ring(-34.0, 150.0, -32.0, 152.0), vec![]).unwrap().into(),
        };
        let out = RecommendOutput {
            before_dedup: vec![rec("A-0", "A", gp(-33.0, 151.0))],
            recommendations: vec![rec("A-0", "A", gp(-33.0, 151.0))],
        };
        let r = build_report(
            &[],
            std::slice::from_ref(&lga),
            &[st("s", gp(-33.5, 151.0)), st("o", gp(0.0, 0.0))],
            &out,
            &EvaluateConfig::default(),
        );
        assert_eq!(r.per_lga_counts["A"].recommended_fast, 1);
        assert_eq!(r.per_lga_counts["A"].approved, 1);
        assert_eq!(r.unassigned_counts.approved, 1);
        assert_eq!(r.totals.approved, 2);
        assert_eq!(r.new_area_count, 1);
        assert!(r.to_table().contains("TOTAL"));

        let empty = build_report(&[], &[lga], &[], &RecommendOutput::default(), &EvaluateConfig::default());
        assert_eq!(empty.totals, LgaCounts::default());
        assert_eq!(empty.coverage_before, empty.coverage_after);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(DistanceStats::of(&[3.0, 1.0, 2.0]).unwrap().median, 2.0);
        assert_eq!(DistanceStats::of(&[4.0, 1.0, 2.0, 3.0]).unwrap().median, 2.5);
        assert!(DistanceStats::of(&[]).is_none());
    }
}
