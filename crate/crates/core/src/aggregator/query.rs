use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::AggregatorState;
use crate::mfa::{BarPoint, MfaError};

/// Read-only requests answered from a consistent state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    /// Inclusive window range; defaults to `0..=last window with flows`.
    Sankey {
        lo: Option<u64>,
        hi: Option<u64>,
    },
    Bars {
        area: Vec<String>,
        material: String,
        hi: Option<u64>,
    },
    Balance {
        hi: Option<u64>,
    },
    Metrics,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct QueryError {
    pub code: String,
    pub message: String,
}

impl QueryError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        QueryError {
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn not_found(path: &str) -> Self {
        Self::new("not_found", format!("no endpoint at `{path}`"))
    }

    /// `{"error":{"code":…,"message":…}}`
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: &'a QueryError,
        }
        serde_json::to_string(&Wrapper { error: self }).expect("error serialization is infallible")
    }

    pub fn is_not_found(&self) -> bool {
        self.code == "not_found"
    }
}

impl From<MfaError> for QueryError {
    fn from(e: MfaError) -> Self {
        QueryError::new(e.code(), e.to_string())
    }
}

fn parse_window(params: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>, QueryError> {
    params
        .get(key)
        .map(|v| {
            v.parse::<u64>().map_err(|_| {
                QueryError::new(
                    "invalid_request",
                    format!("`{key}` must be a non-negative integer, got `{v}`"),
                )
            })
        })
        .transpose()
}

impl Query {
    /// Maps an HTTP path and its query parameters to a request.
    ///
    /// `/sankey?lo=&hi=`, `/bars?area=a,b&material=&hi=`, `/balance?hi=`,
    /// `/metrics`, `/snapshot`.
    pub fn from_http(path: &str, params: &BTreeMap<String, String>) -> Result<Query, QueryError> {
        match path.trim_end_matches('/') {
            "/sankey" => Ok(Query::Sankey {
                lo: parse_window(params, "lo")?,
                hi: parse_window(params, "hi")?,
            }),
            "/bars" => {
                let material = params
                    .get("material")
                    .cloned()
                    .ok_or_else(|| QueryError::new("invalid_request", "`material` is required"))?;
                let area = params
                    .get("area")
                    .map(|a| {
                        a.split(',')
                            .filter(|s| !s.is_empty())
                            .map(str::to_string)
                            .collect()
                    })
                    .ok_or_else(|| QueryError::new("invalid_request", "`area` is required"))?;
                Ok(Query::Bars {
                    area,
                    material,
                    hi: parse_window(params, "hi")?,
                })
            }
            "/balance" => Ok(Query::Balance {
                hi: parse_window(params, "hi")?,
            }),
            "/metrics" => Ok(Query::Metrics),
            "/snapshot" => Ok(Query::Snapshot),
            _ => Err(QueryError::not_found(path)),
        }
    }
}

impl AggregatorState {
    fn default_hi(&self) -> u64 {
        self.ledger().max_window().unwrap_or(0)
    }

    /// Answers `q` with the JSON document the mfa layer defines for it.
    pub fn query(&self, q: &Query) -> Result<String, QueryError> {
        match q {
            Query::Sankey { lo, hi } => {
                let hi = hi.unwrap_or_else(|| self.default_hi());
                let doc = self.ledger().sankey_between(lo.unwrap_or(0), hi)?;
                Ok(doc.to_json())
            }
            Query::Bars { area, material, hi } => {
                let area: BTreeSet<String> = area.iter().cloned().collect();
                let hi = hi.unwrap_or_else(|| self.default_hi());
                let series = self.ledger().bar_series(&area, material, hi)?;
                Ok(BarPoint::series_json(&series))
            }
            Query::Balance { hi } => {
                let hi = hi.unwrap_or_else(|| self.default_hi());
                Ok(self.ledger().mass_balance_report(hi).to_json())
            }
            Query::Metrics => Ok(self.metrics_json()),
            Query::Snapshot => Ok(self.snapshot()),
        }
    }
}
