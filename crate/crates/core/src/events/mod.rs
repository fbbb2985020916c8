//! Synchromaterial events: the timestamped mass reports robotic nodes send
//! to the aggregator, plus the machinery that makes them consistent across
//! nodes (deduplication, window assignment, watermarks).

mod dedup;
mod validate;
mod window;
mod wire;

pub use dedup::{Acceptance, DedupIndex, SeqRanges};
pub use validate::{validate_event, Violation};
pub use window::{Routing, WindowAssigner, DEFAULT_SKEW_ALLOWANCE_MS};
pub use wire::{WireError, WIRE_VERSION};

use serde::{Deserialize, Serialize};

use crate::mfa::MaterialMass;
use crate::Mass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Cumulative mass of the product assembled so far, at step `n`.
    AssemblyIncrement,
    DisassemblyExtraction,
    SortTransfer,
    UseTransfer,
    IncinerationTransfer,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::AssemblyIncrement => "assembly_increment",
            EventKind::DisassemblyExtraction => "disassembly_extraction",
            EventKind::SortTransfer => "sort_transfer",
            EventKind::UseTransfer => "use_transfer",
            EventKind::IncinerationTransfer => "incineration_transfer",
        }
    }
}

/// One material-mass transfer reported by a robotic node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynchroEvent {
    pub node_id: String,
    /// Per-node counter; (node_id, seq) identifies the event.
    pub seq: u64,
    /// Sender clock, UTC milliseconds.
    pub ts_ms: u64,
    pub kind: EventKind,
    pub from_process: String,
    pub to_process: String,
    pub material: String,
    pub mass_kg: Mass,
    /// Assembly step index; present iff `kind` is `AssemblyIncrement`.
    pub step: Option<u64>,
    pub item_ref: Option<String>,
}

impl SynchroEvent {
    pub fn material_mass(&self) -> MaterialMass {
        MaterialMass::new(self.material.clone(), self.mass_kg)
    }
}
