//! Single-writer ingest state: dedup, windowing, cumulative-to-delta
//! conversion and ledger updates, with a write-ahead journal.

mod config;
mod journal;
mod query;
mod state;

use std::fmt;

use serde::Serialize;

pub use config::{AggregatorConfig, ConfigError, ENV_PREFIX};
pub use journal::{
    read_journal, FileJournal, FsyncPolicy, FsyncPolicyError, JournalSink, NoJournal,
};
pub use query::{Query, QueryError};
pub use state::{AggregatorState, Metrics, ReplayReport};

use crate::events::{Violation, WireError};
use crate::Mass;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    Wire(WireError),
    Violations(Vec<Violation>),
    CumulativeDecrease { previous: Mass, reported: Mass },
    Journal(String),
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::Wire(e) => e.code(),
            Rejection::Violations(v) => v.first().map_or("invalid_event", Violation::code),
            Rejection::CumulativeDecrease { .. } => "cumulative_decrease",
            Rejection::Journal(_) => "journal_unavailable",
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Wire(e) => write!(f, "{e}"),
            Rejection::Violations(v) => {
                for (i, violation) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{violation}")?;
                }
                Ok(())
            }
            Rejection::CumulativeDecrease { previous, reported } => {
                write!(f, "cumulative mass fell from {previous} to {reported} kg")
            }
            Rejection::Journal(e) => write!(f, "journal write failed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestOutcome {
    /// `delta` is what reached the ledger, in `window`.
    Applied {
        window: u64,
        late: bool,
        delta: Mass,
    },
    Duplicate,
    Invalid(Rejection),
}

/// Per-line acknowledgment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ack {
    /// `None` when the line was too broken to carry one.
    pub seq: Option<u64>,
    pub outcome: IngestOutcome,
}

#[derive(Serialize)]
struct AckDoc<'a> {
    seq: Option<u64>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
}

impl Ack {
    pub fn new(seq: Option<u64>, outcome: IngestOutcome) -> Self {
        Ack { seq, outcome }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            IngestOutcome::Applied { .. } => "applied",
            IngestOutcome::Duplicate => "duplicate",
            IngestOutcome::Invalid(_) => "invalid",
        }
    }

    pub fn reason(&self) -> Option<&'static str> {
        match &self.outcome {
            IngestOutcome::Invalid(r) => Some(r.code()),
            _ => None,
        }
    }

    /// `{"seq":…,"status":…}` plus `"reason"` on invalid lines; no LF.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&AckDoc {
            seq: self.seq,
            status: self.status(),
            reason: self.reason(),
        })
        .expect("ack serialization is infallible")
    }
}
