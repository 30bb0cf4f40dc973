//! GeoJSON / JSON readers and writers for the static layers.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::records::{FireRiskGrid, LgaRecord, PoiCategory, PoiRecord, RouteRecord, StationKind, StationRecord};
use crate::error::{Error, Result};
use crate::export::{FeatureKind, OutputFeature};
use crate::geo::{BoundingBox, GeoPoint, MultiPolygon, Polygon};

pub(crate) fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

pub(crate) fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("Value always serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn features<'a>(path: &Path, doc: &'a Value) -> Result<&'a Vec<Value>> {
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::schema(path, "document", "type", "expected \"FeatureCollection\""));
    }
    doc.get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema(path, "document", "features", "expected an array"))
}

/// `[lon, lat]` (extra ordinates ignored).
pub(crate) fn position(v: &Value) -> std::result::Result<GeoPoint, String> {
    let arr = v.as_array().ok_or("position is not an array")?;
    if arr.len() < 2 {
        return Err("position needs [lon, lat]".into());
    }
    let lon = arr[0].as_f64().ok_or("longitude is not a number")?;
    let lat = arr[1].as_f64().ok_or("latitude is not a number")?;
    GeoPoint::new(lat, lon).map_err(|e| e.to_string())
}

pub(crate) fn position_value(p: GeoPoint) -> Value {
    json!([p.lon, p.lat])
}

/// Accessors that turn missing / mistyped members into schema errors
/// naming the feature.
struct FeatureCtx<'a> {
    path: &'a Path,
    index: usize,
    feature: &'a Value,
}

impl<'a> FeatureCtx<'a> {
    fn err(&self, field: &str, reason: impl Into<String>) -> Error {
        Error::schema(self.path, format!("feature {}", self.index), field, reason)
    }

    fn prop(&self, key: &str) -> Result<&'a Value> {
        self.feature
            .get("properties")
            .and_then(|p| p.get(key))
            .filter(|v| !v.is_null())
            .ok_or_else(|| self.err(key, "missing property"))
    }

    fn prop_str(&self, key: &str) -> Result<&'a str> {
        self.prop(key)?.as_str().filter(|s| !s.is_empty()).ok_or_else(|| self.err(key, "expected a non-empty string"))
    }

    fn geometry(&self, expected: &[&str]) -> Result<(&'a str, &'a Value)> {
        let g = self
            .feature
            .get("geometry")
            .filter(|g| !g.is_null())
            .ok_or_else(|| self.err("geometry", "missing geometry"))?;
        let ty =
            g.get("type").and_then(Value::as_str).ok_or_else(|| self.err("geometry.type", "missing geometry type"))?;
        if !expected.contains(&ty) {
            return Err(self.err("geometry.type", format!("expected {}, found {ty}", expected.join(" or "))));
        }
        let coords = g.get("coordinates").ok_or_else(|| self.err("geometry.coordinates", "missing coordinates"))?;
        Ok((ty, coords))
    }

    fn point(&self, v: &Value, field: &str) -> Result<GeoPoint> {
        position(v).map_err(|r| self.err(field, r))
    }

    fn line(&self, v: &Value, field: &str) -> Result<Vec<GeoPoint>> {
        v.as_array()
            .ok_or_else(|| self.err(field, "expected an array of positions"))?
            .iter()
            .map(|c| self.point(c, field))
            .collect()
    }

    fn polygon(&self, v: &Value) -> Result<Polygon> {
        let rings = v
            .as_array()
            .filter(|r| !r.is_empty())
            .ok_or_else(|| self.err("geometry.coordinates", "polygon needs at least one ring"))?;
        let mut rings = rings.iter().map(|r| self.line(r, "geometry.coordinates")).collect::<Result<Vec<_>>>()?;
        let exterior = rings.remove(0);
        Polygon::new(exterior, rings).map_err(|e| self.err("geometry.coordinates", e.to_string()))
    }
}

fn each_feature<T>(path: &Path, mut f: impl FnMut(&FeatureCtx) -> Result<T>) -> Result<Vec<T>> {
    let doc = read_json(path)?;
    features(path, &doc)?.iter().enumerate().map(|(index, feature)| f(&FeatureCtx { path, index, feature })).collect()
}

fn check_unique<'a>(path: &Path, ids: impl Iterator<Item = &'a str>, field: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if !seen.insert(id) {
            return Err(Error::schema(path, format!("feature {i}"), field, format!("duplicate value `{id}`")));
        }
    }
    Ok(())
}

fn collection(features: Vec<Value>) -> Value {
    json!({ "type": "FeatureCollection", "features": features })
}

fn feature(geometry: Value, properties: Map<String, Value>) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

/// LGA boundaries: Polygon or MultiPolygon features with `lga_name`.
pub fn load_lgas(path: &Path) -> Result<Vec<LgaRecord>> {
    let lgas = each_feature(path, |f| {
        let lga_name = f.prop_str("lga_name")?.to_string();
        let (ty, coords) = f.geometry(&["Polygon", "MultiPolygon"])?;
        let boundary = if ty == "Polygon" {
            f.polygon(coords)?.into()
        } else {
            let parts = coords
                .as_array()
                .ok_or_else(|| f.err("geometry.coordinates", "expected an array of polygons"))?
                .iter()
                .map(|p| f.polygon(p))
                .collect::<Result<Vec<_>>>()?;
            MultiPolygon::new(parts).map_err(|e| f.err("geometry.coordinates", e.to_string()))?
        };
        Ok(LgaRecord { lga_name, boundary })
    })?;
    check_unique(path, lgas.iter().map(|l| l.lga_name.as_str()), "lga_name")?;
    Ok(lgas)
}

pub fn write_lgas(path: &Path, lgas: &[LgaRecord]) -> Result<()> {
    let ring = |r: &[GeoPoint]| Value::Array(r.iter().copied().map(position_value).collect());
    let poly = |p: &Polygon| Value::Array(p.rings().map(ring).collect());
    let feats = lgas
        .iter()
        .map(|l| {
            let parts = l.boundary.polygons();
            let geometry = if parts.len() == 1 {
                json!({ "type": "Polygon", "coordinates": poly(&parts[0]) })
            } else {
                json!({ "type": "MultiPolygon", "coordinates": parts.iter().map(poly).collect::<Vec<_>>() })
            };
            let mut props = Map::new();
            props.insert("lga_name".into(), l.lga_name.clone().into());
            feature(geometry, props)
        })
        .collect();
    write_json(path, &collection(feats))
}

/// POIs: Point features with `poi_id` and `category` (fast_food, fuel, tourism).
pub fn load_pois(path: &Path) -> Result<Vec<PoiRecord>> {
    let pois = each_feature(path, |f| {
        let poi_id = f.prop_str("poi_id")?.to_string();
        let cat = f.prop_str("category")?;
        let category = PoiCategory::parse(cat).ok_or_else(|| {
            f.err("category", format!("unknown POI category `{cat}` (expected fast_food, fuel or tourism)"))
        })?;
        let (_, c) = f.geometry(&["Point"])?;
        let location = f.point(c, "geometry.coordinates")?;
        Ok(PoiRecord { poi_id, category, location })
    })?;
    check_unique(path, pois.iter().map(|p| p.poi_id.as_str()), "poi_id")?;
    Ok(pois)
}

pub fn write_pois(path: &Path, pois: &[PoiRecord]) -> Result<()> {
    let feats = pois
        .iter()
        .map(|p| {
            let mut props = Map::new();
            props.insert("poi_id".into(), p.poi_id.clone().into());
            props.insert("category".into(), p.category.as_str().into());
            feature(json!({ "type": "Point", "coordinates": position_value(p.location) }), props)
        })
        .collect();
    write_json(path, &collection(feats))
}

/// Routes: LineString features with `route_id` and per-vertex `altitudes`.
pub fn load_routes(path: &Path) -> Result<Vec<RouteRecord>> {
    let routes = each_feature(path, |f| {
        let route_id = f.prop_str("route_id")?.to_string();
        let altitudes = f
            .prop("altitudes")?
            .as_array()
            .ok_or_else(|| f.err("altitudes", "expected an array of numbers"))?
            .iter()
            .map(|a| a.as_f64().ok_or_else(|| f.err("altitudes", "expected an array of numbers")))
            .collect::<Result<Vec<_>>>()?;
        let (_, c) = f.geometry(&["LineString"])?;
        let polyline = f.line(c, "geometry.coordinates")?;
        RouteRecord::new(route_id, polyline, altitudes).map_err(|e| f.err("altitudes", e.to_string()))
    })?;
    check_unique(path, routes.iter().map(|r| r.route_id.as_str()), "route_id")?;
    Ok(routes)
}

pub fn write_routes(path: &Path, routes: &[RouteRecord]) -> Result<()> {
    let feats = routes
        .iter()
        .map(|r| {
            let mut props = Map::new();
            props.insert("route_id".into(), r.route_id.clone().into());
            props.insert("altitudes".into(), json!(r.altitudes));
            let coords: Vec<Value> = r.polyline.iter().copied().map(position_value).collect();
            feature(json!({ "type": "LineString", "coordinates": coords }), props)
        })
        .collect();
    write_json(path, &collection(feats))
}

/// Stations: Point features with `station_id` and `kind`. Extra properties
/// (as written by the recommend command) are ignored.
pub fn load_stations(path: &Path) -> Result<Vec<StationRecord>> {
    let stations = each_feature(path, |f| {
        let station_id = f.prop_str("station_id")?.to_string();
        let k = f.prop_str("kind")?;
        let kind = StationKind::parse(k).ok_or_else(|| {
            f.err(
                "kind",
                format!("unknown station kind `{k}` (expected existing_fast, existing_destination or approved)"),
            )
        })?;
        let (_, c) = f.geometry(&["Point"])?;
        let location = f.point(c, "geometry.coordinates")?;
        Ok(StationRecord { station_id, kind, location })
    })?;
    check_unique(path, stations.iter().map(|s| s.station_id.as_str()), "station_id")?;
    Ok(stations)
}

pub fn write_stations(path: &Path, stations: &[StationRecord]) -> Result<()> {
    let feats = stations
        .iter()
        .map(|s| {
            let mut props = Map::new();
            props.insert("station_id".into(), s.station_id.clone().into());
            props.insert("kind".into(), s.kind.as_str().into());
            feature(json!({ "type": "Point", "coordinates": position_value(s.location) }), props)
        })
        .collect();
    write_json(path, &collection(feats))
}

/// `{"bbox":[min_lon,min_lat,max_lon,max_lat],"n_rows":..,"n_cols":..,"cells":[..]}`.
pub fn load_fire_grid(path: &Path) -> Result<FireRiskGrid> {
    let doc = read_json(path)?;
    let err = |field: &str, reason: &str| Error::schema(path, "document", field, reason);
    let bbox = doc
        .get("bbox")
        .and_then(Value::as_array)
        .filter(|b| b.len() == 4)
        .and_then(|b| b.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| err("bbox", "expected [min_lon, min_lat, max_lon, max_lat]"))?;
    let bbox = BoundingBox::new(bbox[1], bbox[0], bbox[3], bbox[2]).map_err(|e| err("bbox", &e.to_string()))?;
    let dim = |k: &str| {
        doc.get(k).and_then(Value::as_u64).map(|v| v as usize).ok_or_else(|| err(k, "expected a positive integer"))
    };
    let (n_rows, n_cols) = (dim("n_rows")?, dim("n_cols")?);
    let cells = doc
        .get("cells")
        .and_then(Value::as_array)
        .ok_or_else(|| err("cells", "expected an array of numbers or null"))?
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            Value::Null => Ok(None),
            v => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::schema(path, format!("cell {i}"), "cells", "expected a number or null")),
        })
        .collect::<Result<Vec<_>>>()?;
    FireRiskGrid::new(bbox, n_rows, n_cols, cells).map_err(|e| err("cells", &e.to_string()))
}

pub fn write_fire_grid(path: &Path, grid: &FireRiskGrid) -> Result<()> {
    let b = grid.bbox();
    let doc = json!({
        "bbox": [b.min_lon, b.min_lat, b.max_lon, b.max_lat],
        "n_rows": grid.n_rows(),
        "n_cols": grid.n_cols(),
        "cells": grid.cells(),
    });
    write_json(path, &doc)
}

/// Read back `recommendations.geojson` / `stations.geojson` as written by
/// the recommend command, checking that each color matches its kind.
pub fn load_output_features(path: &Path) -> Result<Vec<OutputFeature>> {
    let feats = each_feature(path, |f| {
        let k = f.prop_str("kind")?;
        let kind = FeatureKind::parse(k).ok_or_else(|| f.err("kind", format!("unknown output kind `{k}`")))?;
        let id = f.prop_str(kind.id_field())?.to_string();
        let color = f.prop_str("color")?;
        if color != kind.color() {
            return Err(f.err("color", format!("`{color}` does not match kind {k} ({})", kind.color())));
        }
        let (_, c) = f.geometry(&["Point"])?;
        let location = f.point(c, "geometry.coordinates")?;
        let opt = |key: &str| f.feature.get("properties").and_then(|p| p.get(key)).filter(|v| !v.is_null());
        let opt_f64 = |key: &str| -> Result<Option<f64>> {
            opt(key).map(|v| v.as_f64().ok_or_else(|| f.err(key, "expected a number or null"))).transpose()
        };
        let opt_str = |key: &str| -> Result<Option<String>> {
            opt(key)
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| f.err(key, "expected a string or null")))
                .transpose()
        };
        let flood_flag = f.prop("flood_flag")?.as_bool().ok_or_else(|| f.err("flood_flag", "expected a boolean"))?;
        let fire_flag = match f.prop("fire_flag")? {
            Value::Bool(b) => Some(*b),
            Value::String(s) if s == "unknown" => None,
            _ => return Err(f.err("fire_flag", "expected a boolean or \"unknown\"")),
        };
        let cluster_size = opt("cluster_size")
            .map(|v| v.as_u64().map(|n| n as usize).ok_or_else(|| f.err("cluster_size", "expected a count or null")))
            .transpose()?;
        Ok(OutputFeature {
            id,
            kind,
            location,
            lga_name: opt_str("lga_name")?,
            altitude_m: opt_f64("altitude_m")?,
            ffdi_delta: opt_f64("ffdi_delta")?,
            flood_flag,
            fire_flag,
            cluster_size,
            snap_target: opt_str("snap_target")?,
            snap_dist_m: opt_f64("snap_dist_m")?,
        })
    })?;
    check_unique(path, feats.iter().map(|f| f.id.as_str()), "id")?;
    Ok(feats)
}
