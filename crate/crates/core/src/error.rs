use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the siting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate (lat {lat}, lon {lon})")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate polyline: need at least 2 vertices, got {0}")]
    DegeneratePolyline(usize),

    #[error("empty index")]
    EmptyIndex,

    #[error("no altitude source: altitude-dependent rules are enabled but no route vertices exist")]
    NoAltitudeSource,

    #[error("no demand points")]
    NoDemandPoints,

    #[error("empty cluster: cannot locate a cluster with no members")]
    EmptyCluster,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch { what: &'static str, left: usize, right: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: malformed JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {location}: field `{field}`: {reason}", path.display())]
    Schema { path: PathBuf, location: String, field: String, reason: String },

    #[error("{}: corrupt input: {malformed} of {total} rows malformed", path.display())]
    CorruptInput { path: PathBuf, malformed: usize, total: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by user-supplied inputs (files, config), as
    /// opposed to failures inside the pipeline itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidCoordinate { .. }
                | Error::InvalidGeometry(_)
                | Error::Io { .. }
                | Error::Json { .. }
                | Error::Schema { .. }
                | Error::CorruptInput { .. }
                | Error::Config(_)
                | Error::NoAltitudeSource
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn schema(
        path: impl Into<PathBuf>,
        location: impl Into<String>,
        field: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Schema { path: path.into(), location: location.into(), field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
