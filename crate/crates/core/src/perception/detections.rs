use super::{BillOfMaterials, BoundingBox, Label};
use crate::events::{EventKind, SynchroEvent};

/// Detections below this confidence still get contact plans but emit no
/// mass events.
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;

/// Who reports the extraction, when, and between which processes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionContext {
    pub node_id: String,
    pub seq_start: u64,
    pub ts_ms: u64,
    pub from: String,
    pub to: String,
    pub min_confidence: f64,
}

impl ExtractionContext {
    pub fn new(node_id: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        ExtractionContext {
            node_id: node_id.into(),
            seq_start: 0,
            ts_ms: 0,
            from: from.into(),
            to: to.into(),
            min_confidence: DEFAULT_MIN_CONFIDENCE,
        }
    }

    fn admits(&self, b: &BoundingBox) -> bool {
        b.confidence.is_none_or(|c| c >= self.min_confidence)
    }
}

/// One `DisassemblyExtraction` event per (box, BOM material) pair, with
/// consecutive sequence numbers from `ctx.seq_start`.
///
/// Fails with the first label that has no BOM entry before emitting anything.
pub fn detections_to_events(
    boxes: &[BoundingBox],
    bom: &BillOfMaterials,
    ctx: &ExtractionContext,
) -> Result<Vec<SynchroEvent>, Label> {
    let admitted: Vec<(usize, &BoundingBox)> = boxes
        .iter()
        .enumerate()
        .filter(|(_, b)| ctx.admits(b))
        .collect();
    if let Some((_, missing)) = admitted.iter().find(|(_, b)| bom.get(b.label).is_none()) {
        return Err(missing.label);
    }
    let mut seq = ctx.seq_start;
    let mut events = Vec::new();
    for (index, b) in admitted {
        for part in bom.get(b.label).unwrap_or_default() {
            events.push(SynchroEvent {
                node_id: ctx.node_id.clone(),
                seq,
                ts_ms: ctx.ts_ms,
                kind: EventKind::DisassemblyExtraction,
                from_process: ctx.from.clone(),
                to_process: ctx.to.clone(),
                material: part.material.clone(),
                mass_kg: part.mass_kg,
                step: None,
                item_ref: Some(format!("{}-{index}", b.label)),
            });
            seq += 1;
        }
    }
    Ok(events)
}
