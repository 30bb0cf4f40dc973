//! The JSON run configuration read by the command-line tool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintConfig;
use crate::error::{Error, Result};
use crate::evaluate::EvaluateConfig;
use crate::ingest::TripFormat;
use crate::recommend::RecommendConfig;

/// Layer file locations; relative paths resolve against the config file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerPaths {
    pub trips: PathBuf,
    #[serde(default)]
    pub trips_format: TripFormat,
    pub lgas: PathBuf,
    pub pois: PathBuf,
    pub routes: PathBuf,
    pub stations: PathBuf,
    pub fire_grid: PathBuf,
}

impl LayerPaths {
    fn all(&self) -> [(&'static str, &PathBuf); 6] {
        [
            ("trips", &self.trips),
            ("lgas", &self.lgas),
            ("pois", &self.pois),
            ("routes", &self.routes),
            ("stations", &self.stations),
            ("fire_grid", &self.fire_grid),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleaningConfig {
    pub max_speed_mps: f64,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self { max_speed_mps: 60.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    pub dwell_radius_m: f64,
    pub dwell_min_s: f64,
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self { dwell_radius_m: 100.0, dwell_min_s: 600.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub layers: LayerPaths,
    #[serde(default)]
    pub cleaning: CleaningConfig,
    #[serde(default)]
    pub demand: DemandConfig,
    #[serde(default)]
    pub constraints: ConstraintConfig,
    #[serde(default)]
    pub recommend: RecommendConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
}

impl RunConfig {
    /// Parse and validate a config file. Layer paths are left as written;
    /// see [`RunConfig::resolved`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("cleaning.max_speed_mps", self.cleaning.max_speed_mps)?;
        positive("demand.dwell_radius_m", self.demand.dwell_radius_m)?;
        positive("demand.dwell_min_s", self.demand.dwell_min_s)?;
        self.constraints.validate()?;
        self.recommend.validate()?;
        self.evaluate.validate()
    }

    /// Copy with layer paths joined onto `base`.
    pub fn resolved(&self, base: &Path) -> Self {
        let mut out = self.clone();
        let l = &mut out.layers;
        for p in [&mut l.trips, &mut l.lgas, &mut l.pois, &mut l.routes, &mut l.stations, &mut l.fire_grid] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        out
    }

    /// Error naming the first layer file that does not exist.
    pub fn check_files(&self) -> Result<()> {
        for (name, p) in self.layers.all() {
            if !p.is_file() {
                return Err(Error::Io {
                    path: p.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, format!("{name} layer file not found")),
                });
            }
        }
        Ok(())
    }
}

/// Load `path`, resolve layer paths against its directory and check that
/// every layer file exists. Returns `(as_written, resolved)`.
pub fn load_run_config(path: &Path) -> Result<(RunConfig, RunConfig)> {
    let cfg = RunConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolved = cfg.resolved(base);
    resolved.check_files()?;
    Ok((cfg, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"layers": {"trips": "t.csv", "lgas": "l.geojson", "pois": "p.geojson",
        "routes": "r.geojson", "stations": "s.geojson", "fire_grid": "f.json"}}"#;

    #[test]
    fn defaults_fill_in() {
        let cfg: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.constraints.base_eps_m, 800.0);
        assert_eq!(cfg.demand.dwell_min_s, 600.0);
        assert_eq!(cfg.layers.trips_format, TripFormat::Csv);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        let bad = MINIMAL.replacen("{\"layers\"", "{\"cluster\": {}, \"layers\"", 1);
        assert!(serde_json::from_str::<RunConfig>(&bad).is_err());
        let typo = MINIMAL.replace("\"pois\"", "\"poi\"");
        assert!(serde_json::from_str::<RunConfig>(&typo).is_err());
    }

    #[test]
    fn missing_file_named() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("config.json");
        std::fs::write(&cfg_path, MINIMAL).unwrap();
        let err = load_run_config(&cfg_path).unwrap_err();
        assert!(err.to_string().contains("t.csv"), "{err}");
        assert!(err.is_input_error());
    }

    #[test]
    fn relative_paths_resolve() {
        let cfg: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        let r = cfg.resolved(Path::new("/data/run"));
        assert_eq!(r.layers.pois, PathBuf::from("/data/run/p.geojson"));
    }
}
