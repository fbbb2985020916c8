use std::collections::BTreeMap;

use serde::Serialize;

use super::journal::{JournalSink, NoJournal};
use super::{Ack, IngestOutcome, Rejection};
use crate::events::{DedupIndex, EventKind, Routing, SynchroEvent, WindowAssigner};
use crate::mfa::{FlowLedger, MaterialMass, MfaError, ProcessGraph};
use crate::Mass;

/// Counters. Only `accepted` and `late` are derived from the accepted-event
/// sequence and therefore appear in snapshots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub accepted: u64,
    pub corrupt_journal_lines: u64,
    pub cumulative_decreases: u64,
    pub duplicates: u64,
    pub invalid: u64,
    pub journal_failures: u64,
    pub late: u64,
}

/// Outcome of replaying a journal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub lines: u64,
    pub applied: u64,
    pub duplicates: u64,
    pub corrupt: u64,
}

impl ReplayReport {
    /// True when there was at least one line and none of them were usable.
    pub fn all_corrupt(&self) -> bool {
        self.lines > 0 && self.corrupt == self.lines
    }
}

type ProgressKey = (String, String);

#[derive(Debug, Clone)]
pub struct AggregatorState {
    ledger: FlowLedger,
    dedup: DedupIndex,
    windows: WindowAssigner,
    /// (node_id, item_ref) → last cumulative mass per material.
    assembly: BTreeMap<ProgressKey, BTreeMap<String, Mass>>,
    metrics: Metrics,
}

#[derive(Serialize)]
struct ProgressDoc<'a> {
    cumulative_kg: Mass,
    item_ref: &'a str,
    material: &'a str,
    node_id: &'a str,
}

#[derive(Serialize)]
struct SnapshotMetrics {
    accepted: u64,
    late: u64,
}

#[derive(Serialize)]
struct SnapshotDoc<'a> {
    assembly: Vec<ProgressDoc<'a>>,
    dedup: &'a DedupIndex,
    finalized_windows: u64,
    ledger: serde_json::Value,
    metrics: SnapshotMetrics,
    skew_allowance_ms: u64,
    watermark_ms: u64,
}

impl AggregatorState {
    pub fn new(
        graph: ProcessGraph,
        window_width_ms: u64,
        skew_allowance_ms: u64,
    ) -> Result<Self, MfaError> {
        let ledger = FlowLedger::new(graph, window_width_ms)?;
        Ok(AggregatorState {
            ledger,
            dedup: DedupIndex::new(),
            windows: WindowAssigner::new(window_width_ms, skew_allowance_ms),
            assembly: BTreeMap::new(),
            metrics: Metrics::default(),
        })
    }

    /// Fresh state with the same graph and window settings.
    pub fn empty_like(&self) -> Self {
        Self::new(
            self.ledger.graph().clone(),
            self.windows.window_width_ms(),
            self.windows.skew_allowance_ms(),
        )
        .expect("settings already validated")
    }

    pub fn ledger(&self) -> &FlowLedger {
        &self.ledger
    }

    pub fn graph(&self) -> &ProcessGraph {
        self.ledger.graph()
    }

    pub fn windows(&self) -> &WindowAssigner {
        &self.windows
    }

    pub fn dedup(&self) -> &DedupIndex {
        &self.dedup
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn last_cumulative(&self, node_id: &str, item_ref: &str, material: &str) -> Option<Mass> {
        self.assembly
            .get(&(node_id.to_string(), item_ref.to_string()))
            .and_then(|m| m.get(material))
            .copied()
    }

    /// Parses, validates, deduplicates and applies one wire line, writing it
    /// to `journal` before any state changes. Never panics on hostile input.
    pub fn ingest_line(&mut self, line: &[u8], journal: &mut dyn JournalSink) -> Ack {
        let (seq, outcome) = self.process(line, journal);
        match &outcome {
            IngestOutcome::Applied { .. } => {}
            IngestOutcome::Duplicate => self.metrics.duplicates += 1,
            IngestOutcome::Invalid(reason) => {
                self.metrics.invalid += 1;
                match reason {
                    Rejection::CumulativeDecrease { .. } => self.metrics.cumulative_decreases += 1,
                    Rejection::Journal(_) => self.metrics.journal_failures += 1,
                    _ => {}
                }
            }
        }
        Ack::new(seq, outcome)
    }

    /// Applies journal text line by line. Lines that fail to parse or
    /// validate are skipped and counted; duplicates are absorbed.
    pub fn replay(&mut self, journal_text: &str) -> ReplayReport {
        let mut report = ReplayReport::default();
        for line in journal_text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            report.lines += 1;
            match self.process(line.as_bytes(), &mut NoJournal).1 {
                IngestOutcome::Applied { .. } => report.applied += 1,
                IngestOutcome::Duplicate => report.duplicates += 1,
                IngestOutcome::Invalid(_) => {
                    report.corrupt += 1;
                    self.metrics.corrupt_journal_lines += 1;
                }
            }
        }
        report
    }

    fn process(
        &mut self,
        line: &[u8],
        journal: &mut dyn JournalSink,
    ) -> (Option<u64>, IngestOutcome) {
        let event = match SynchroEvent::from_wire_bytes(line) {
            Ok(e) => e,
            Err(e) => {
                return (
                    salvage_seq(line),
                    IngestOutcome::Invalid(Rejection::Wire(e)),
                )
            }
        };
        let seq = Some(event.seq);
        let violations = crate::events::validate_event(&event, self.ledger.graph());
        if !violations.is_empty() {
            return (
                seq,
                IngestOutcome::Invalid(Rejection::Violations(violations)),
            );
        }
        if self.dedup.contains(&event.node_id, event.seq) {
            return (seq, IngestOutcome::Duplicate);
        }

        let delta = if event.kind == EventKind::AssemblyIncrement {
            let previous = self
                .last_cumulative(
                    &event.node_id,
                    event.item_ref.as_deref().unwrap_or(""),
                    &event.material,
                )
                .unwrap_or(Mass::ZERO);
            if event.mass_kg < previous {
                return (
                    seq,
                    IngestOutcome::Invalid(Rejection::CumulativeDecrease {
                        previous,
                        reported: event.mass_kg,
                    }),
                );
            }
            event.mass_kg - previous
        } else {
            event.mass_kg
        };

        let wire = event.to_wire();
        if let Err(e) = journal.append(&wire) {
            return (
                seq,
                IngestOutcome::Invalid(Rejection::Journal(e.to_string())),
            );
        }

        self.dedup.accept(&event.node_id, event.seq);
        if event.kind == EventKind::AssemblyIncrement {
            self.assembly
                .entry((
                    event.node_id.clone(),
                    event.item_ref.clone().unwrap_or_default(),
                ))
                .or_default()
                .insert(event.material.clone(), event.mass_kg);
        }
        let routing = self.windows.route(event.ts_ms);
        if !delta.is_zero() {
            self.ledger
                .apply_flow(
                    &event.from_process,
                    &event.to_process,
                    &MaterialMass::new(event.material.clone(), delta),
                    routing.target_window(),
                )
                .expect("event validated against the ledger graph");
        }
        self.windows.advance_watermark(event.ts_ms);
        self.metrics.accepted += 1;
        if routing.is_late() {
            self.metrics.late += 1;
        }
        (
            seq,
            IngestOutcome::Applied {
                window: routing.target_window(),
                late: matches!(routing, Routing::Late { .. }),
                delta,
            },
        )
    }

    /// Canonical state document: keys sorted, entries in key order. Equal
    /// accepted-event sets give equal bytes.
    pub fn snapshot(&self) -> String {
        let doc = SnapshotDoc {
            assembly: self
                .assembly
                .iter()
                .flat_map(|((node_id, item_ref), per_material)| {
                    per_material
                        .iter()
                        .map(move |(material, cumulative)| ProgressDoc {
                            cumulative_kg: *cumulative,
                            item_ref,
                            material,
                            node_id,
                        })
                })
                .collect(),
            dedup: &self.dedup,
            finalized_windows: self.windows.finalized_count(),
            ledger: self.ledger.canonical_value(),
            metrics: SnapshotMetrics {
                accepted: self.metrics.accepted,
                late: self.metrics.late,
            },
            skew_allowance_ms: self.windows.skew_allowance_ms(),
            watermark_ms: self.windows.watermark_ms(),
        };
        serde_json::to_string(&doc).expect("snapshot serialization is infallible")
    }

    pub fn metrics_json(&self) -> String {
        #[derive(Serialize)]
        struct MetricsDoc<'a> {
            #[serde(flatten)]
            metrics: &'a Metrics,
            finalized_windows: u64,
            ledger_entries: usize,
            watermark_ms: u64,
        }
        serde_json::to_string(&MetricsDoc {
            metrics: &self.metrics,
            finalized_windows: self.windows.finalized_count(),
            ledger_entries: self.ledger.len(),
            watermark_ms: self.windows.watermark_ms(),
        })
        .expect("metrics serialization is infallible")
    }
}

/// Best-effort `seq` for acknowledging a line that failed to decode.
fn salvage_seq(line: &[u8]) -> Option<u64> {
    serde_json::from_slice::<serde_json::Value>(line)
        .ok()?
        .get("seq")?
        .as_u64()
}
