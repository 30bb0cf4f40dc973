//! Output GeoJSON features and the standalone HTML map.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::constraints::{ConstraintConfig, LayerIndex};
use crate::geo::{BoundingBox, GeoPoint};
use crate::ingest::{locate_in_lgas, LgaRecord, StationKind, StationRecord};
use crate::recommend::{ChargerKind, Recommendation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    ExistingFast,
    ExistingDestination,
    Approved,
    RecommendedFast,
    RecommendedDestination,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::ExistingFast,
        FeatureKind::ExistingDestination,
        FeatureKind::Approved,
        FeatureKind::RecommendedFast,
        FeatureKind::RecommendedDestination,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::ExistingFast => "existing_fast",
            FeatureKind::ExistingDestination => "existing_destination",
            FeatureKind::Approved => "approved",
            FeatureKind::RecommendedFast => "recommended_fast",
            FeatureKind::RecommendedDestination => "recommended_destination",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn color(self) -> &'static str {
        match self {
            FeatureKind::ExistingFast => "#00008B",
            FeatureKind::ExistingDestination => "#ADD8E6",
            FeatureKind::Approved => "#008000",
            FeatureKind::RecommendedFast => "#FF0000",
            FeatureKind::RecommendedDestination => "#FFA500",
        }
    }

    pub fn is_recommendation(self) -> bool {
        matches!(self, FeatureKind::RecommendedFast | FeatureKind::RecommendedDestination)
    }

    /// Property holding the feature id.
    pub fn id_field(self) -> &'static str {
        if self.is_recommendation() {
            "rec_id"
        } else {
            "station_id"
        }
    }
}

impl From<StationKind> for FeatureKind {
    fn from(k: StationKind) -> Self {
        match k {
            StationKind::ExistingFast => FeatureKind::ExistingFast,
            StationKind::ExistingDestination => FeatureKind::ExistingDestination,
            StationKind::Approved => FeatureKind::Approved,
        }
    }
}

impl From<ChargerKind> for FeatureKind {
    fn from(k: ChargerKind) -> Self {
        match k {
            ChargerKind::Fast => FeatureKind::RecommendedFast,
            ChargerKind::Destination => FeatureKind::RecommendedDestination,
        }
    }
}

/// One marker in `recommendations.geojson` or `stations.geojson`.
///
/// `fire_flag` is `None` where the fire layer has no value, written as
/// `"unknown"`. Cluster and snap fields are only set for recommendations.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFeature {
    pub id: String,
    pub kind: FeatureKind,
    pub location: GeoPoint,
    pub lga_name: Option<String>,
    pub altitude_m: Option<f64>,
    pub ffdi_delta: Option<f64>,
    pub flood_flag: bool,
    pub fire_flag: Option<bool>,
    pub cluster_size: Option<usize>,
    pub snap_target: Option<String>,
    pub snap_dist_m: Option<f64>,
}

impl OutputFeature {
    pub fn color(&self) -> &'static str {
        self.kind.color()
    }

    pub fn from_recommendation(r: &Recommendation) -> Self {
        Self {
            id: r.rec_id.clone(),
            kind: r.charger_kind.into(),
            location: r.location,
            lga_name: Some(r.lga_name.clone()),
            altitude_m: r.altitude_m,
            ffdi_delta: r.ffdi_delta,
            flood_flag: r.flood_flag,
            fire_flag: r.fire_flag,
            cluster_size: Some(r.cluster_size),
            snap_target: Some(r.snap_target.to_string()),
            snap_dist_m: Some(r.snap_dist_m),
        }
    }

    pub fn to_geojson(&self) -> Value {
        let mut p = Map::new();
        p.insert(self.kind.id_field().into(), self.id.clone().into());
        p.insert("kind".into(), self.kind.as_str().into());
        p.insert("color".into(), self.color().into());
        p.insert("lga_name".into(), self.lga_name.clone().into());
        p.insert("cluster_size".into(), self.cluster_size.into());
        p.insert("snap_target".into(), self.snap_target.clone().into());
        p.insert("snap_dist_m".into(), self.snap_dist_m.into());
        p.insert("altitude_m".into(), self.altitude_m.into());
        p.insert("ffdi_delta".into(), self.ffdi_delta.into());
        p.insert("flood_flag".into(), self.flood_flag.into());
        p.insert("fire_flag".into(), self.fire_flag.map_or_else(|| Value::from("unknown"), Value::from));
        json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": [self.location.lon, self.location.lat] },
            "properties": p,
        })
    }
}

/// Stations annotated with LGA, altitude and fire danger, sorted by id.
pub fn station_features(
    stations: &[StationRecord],
    layers: &LayerIndex,
    lgas: &[LgaRecord],
    cfg: &ConstraintConfig,
) -> Vec<OutputFeature> {
    let locs: Vec<GeoPoint> = stations.iter().map(|s| s.location).collect();
    let names = locate_in_lgas(&locs, lgas);
    let mut out: Vec<OutputFeature> = stations
        .iter()
        .zip(names)
        .map(|(s, lga)| {
            let altitude_m = layers.altitude(s.location).ok();
            let ffdi_delta = layers.ffdi(s.location);
            OutputFeature {
                id: s.station_id.clone(),
                kind: s.kind.into(),
                location: s.location,
                lga_name: lga.map(str::to_string),
                altitude_m,
                ffdi_delta,
                flood_flag: altitude_m.is_some_and(|a| a < cfg.flood_alt_m),
                fire_flag: ffdi_delta.map(|f| f >= cfg.ffdi_threshold),
                cluster_size: None,
                snap_target: None,
                snap_dist_m: None,
            }
        })
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

pub fn feature_collection(features: &[OutputFeature]) -> Value {
    json!({
        "type": "FeatureCollection",
        "features": features.iter().map(OutputFeature::to_geojson).collect::<Vec<_>>(),
    })
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// JSON safe to embed inside a `<script>` element.
fn inline_json(v: &Value) -> String {
    serde_json::to_string(v).expect("Value always serializes").replace("</", "<\\/")
}

fn opt_num(v: Option<f64>, unit: &str) -> String {
    v.map_or_else(|| "unknown".to_string(), |x| format!("{x:.1}{unit}"))
}

fn popup_text(f: &OutputFeature) -> String {
    let mut lines = vec![
        format!("{} ({})", f.id, f.kind.as_str()),
        format!("LGA: {}", f.lga_name.as_deref().unwrap_or("none")),
        format!("altitude: {}", opt_num(f.altitude_m, " m")),
        format!("FFDI delta: {}", opt_num(f.ffdi_delta, "")),
        format!("flood risk: {}", f.flood_flag),
        format!("fire risk: {}", f.fire_flag.map_or_else(|| "unknown".to_string(), |b| b.to_string())),
    ];
    if let Some(n) = f.cluster_size {
        lines.push(format!("cluster size: {n}"));
    }
    if let Some(t) = &f.snap_target {
        lines.push(format!("snapped to: {t} ({})", opt_num(f.snap_dist_m, " m")));
    }
    lines.join("\n")
}

const WIDTH: f64 = 960.0;
const PAD: f64 = 20.0;

/// A self-contained HTML page: both collections inline as JSON and one SVG
/// `circle.marker` per feature on a plain lon/lat canvas.
pub fn render_map(recommendations: &[OutputFeature], stations: &[OutputFeature]) -> String {
    let all: Vec<&OutputFeature> = stations.iter().chain(recommendations).collect();
    let bbox = BoundingBox::covering(all.iter().map(|f| &f.location)).unwrap_or(BoundingBox {
        min_lat: -1.0,
        min_lon: -1.0,
        max_lat: 1.0,
        max_lon: 1.0,
    });
    let mid_lat = (bbox.min_lat + bbox.max_lat) / 2.0;
    let aspect = mid_lat.to_radians().cos().max(0.05);
    let span_x = ((bbox.max_lon - bbox.min_lon) * aspect).max(1e-6);
    let span_y = (bbox.max_lat - bbox.min_lat).max(1e-6);
    let scale = (WIDTH - 2.0 * PAD) / span_x.max(span_y);
    let height = span_y * scale + 2.0 * PAD;
    let width = span_x * scale + 2.0 * PAD;
    let project = |p: GeoPoint| (PAD + (p.lon - bbox.min_lon) * aspect * scale, PAD + (bbox.max_lat - p.lat) * scale);

    let mut markers = String::new();
    for (set, feats) in [("stations", stations), ("recommendations", recommendations)] {
        for (i, f) in feats.iter().enumerate() {
            let (x, y) = project(f.location);
            let r = if f.kind.is_recommendation() { 6 } else { 4 };
            let _ = writeln!(
                markers,
                "<circle class=\"marker\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{}\" data-set=\"{set}\" data-index=\"{i}\"><title>{}</title></circle>",
                f.color(),
                escape_html(&popup_text(f))
            );
        }
    }

    let mut legend = String::new();
    for k in FeatureKind::ALL {
        let _ = write!(
            legend,
            "<li><span class=\"swatch\" style=\"background:{}\"></span>{}</li>",
            k.color(),
            k.as_str().replace('_', " ")
        );
    }

    format!(
        r#"<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>EV charging site recommendations</title>
<style>
body {{ font-family: sans-serif; margin: 16px; }}
svg {{ background: #f4f4f0; border: 1px solid #999; }}
.marker {{ stroke: #222; stroke-width: 0.8; cursor: pointer; }}
ul.legend {{ list-style: none; padding: 0; display: flex; gap: 16px; }}
.swatch {{ display: inline-block; width: 12px; height: 12px; border-radius: 6px; margin-right: 4px; border: 1px solid #222; }}
#popup {{ white-space: pre; font-family: monospace; border: 1px solid #999; padding: 8px; min-height: 2em; }}
</style>
</head>
<body>
<h1>EV charging site recommendations</h1>
<ul class="legend">{legend}</ul>
<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">
{markers}</svg>
<div id="popup">Click a marker for details.</div>
<script type="application/json" id="recommendations-data">{recs}</script>
<script type="application/json" id="stations-data">{stations_json}</script>
<script>
(function () {{
  var data = {{
    recommendations: JSON.parse(document.getElementById("recommendations-data").textContent),
    stations: JSON.parse(document.getElementById("stations-data").textContent)
  }};
  var popup = document.getElementById("popup");
  document.querySelectorAll("circle.marker").forEach(function (m) {{
    m.addEventListener("click", function () {{
      var f = data[m.dataset.set].features[Number(m.dataset.index)];
      popup.textContent = Object.keys(f.properties).map(function (k) {{
        return k + ": " + JSON.stringify(f.properties[k]);
      }}).join("\n");
    }});
  }});
}})();
</script>
</body>
</html>
"#,
        recs = inline_json(&feature_collection(recommendations)),
        stations_json = inline_json(&feature_collection(stations)),
    )
}

/// Number of marker elements in a rendered page.
pub fn count_markers(html: &str) -> usize {
    html.matches("<circle class=\"marker\"").count()
}
