use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AggregatorState, FsyncPolicy};
use crate::events::DEFAULT_SKEW_ALLOWANCE_MS;
use crate::mfa::{ProcessGraph, DEFAULT_WINDOW_WIDTH_MS};
use crate::sim::cell_graph;

/// Prefix of every environment override.
pub const ENV_PREFIX: &str = "SYNCHROFLOW_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid config {path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("invalid value for {var}: {message}")]
    Env { var: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregatorConfig {
    /// NDJSON ingest socket.
    pub listen: SocketAddr,
    /// HTTP query socket.
    pub http: SocketAddr,
    /// No journal means no durability.
    pub journal: Option<PathBuf>,
    pub fsync: FsyncPolicy,
    pub window_width_ms: u64,
    pub skew_allowance_ms: u64,
    pub graph: ProcessGraph,
}

impl Default for AggregatorConfig {
    fn default() -> Self {
        AggregatorConfig {
            listen: "127.0.0.1:7878".parse().expect("static address"),
            http: "127.0.0.1:8080".parse().expect("static address"),
            journal: None,
            fsync: FsyncPolicy::default(),
            window_width_ms: DEFAULT_WINDOW_WIDTH_MS,
            skew_allowance_ms: DEFAULT_SKEW_ALLOWANCE_MS,
            graph: cell_graph(),
        }
    }
}

impl AggregatorConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Json {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text, path)
    }

    /// Applies `SYNCHROFLOW_LISTEN`, `_HTTP`, `_JOURNAL`, `_FSYNC`,
    /// `_WINDOW_MS` and `_SKEW_MS` from the process environment.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        self.apply_env_from(|k| std::env::var(k).ok())
    }

    pub fn apply_env_from(
        &mut self,
        lookup: impl Fn(&str) -> Option<String>,
    ) -> Result<(), ConfigError> {
        fn parsed<T: std::str::FromStr>(var: &str, raw: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            raw.parse().map_err(|e: T::Err| ConfigError::Env {
                var: var.to_string(),
                message: e.to_string(),
            })
        }
        let get = |suffix: &str| {
            let var = format!("{ENV_PREFIX}{suffix}");
            lookup(&var).map(|v| (var, v))
        };
        if let Some((var, v)) = get("LISTEN") {
            self.listen = parsed(&var, &v)?;
        }
        if let Some((var, v)) = get("HTTP") {
            self.http = parsed(&var, &v)?;
        }
        if let Some((_, v)) = get("JOURNAL") {
            self.journal = (!v.is_empty()).then(|| PathBuf::from(v));
        }
        if let Some((var, v)) = get("FSYNC") {
            self.fsync = parsed(&var, &v)?;
        }
        if let Some((var, v)) = get("WINDOW_MS") {
            self.window_width_ms = parsed(&var, &v)?;
        }
        if let Some((var, v)) = get("SKEW_MS") {
            self.skew_allowance_ms = parsed(&var, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_width_ms == 0 {
            return Err(ConfigError::Invalid(
                "window_width_ms must be positive".into(),
            ));
        }
        if self.graph.process_count() == 0 {
            return Err(ConfigError::Invalid("graph has no processes".into()));
        }
        if self.listen == self.http && self.listen.port() != 0 {
            return Err(ConfigError::Invalid(format!(
                "ingest and HTTP sockets share the address {}",
                self.listen
            )));
        }
        Ok(())
    }

    pub fn new_state(&self) -> Result<AggregatorState, ConfigError> {
        self.validate()?;
        AggregatorState::new(
            self.graph.clone(),
            self.window_width_ms,
            self.skew_allowance_ms,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
