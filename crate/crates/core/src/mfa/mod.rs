//! Material-flow data model: lifecycle processes, materials, and the
//! windowed flow ledger with its Sankey / bar-chart / balance queries.

mod documents;
mod graph;
mod ledger;

pub use documents::{BalanceReport, BalanceRow, BarPoint, SankeyDocument, SankeyLink, SankeyNode};
pub use graph::{Material, MaterialMass, ProcessGraph, ProcessNode, Stage};
pub use ledger::{FlowKey, FlowLedger, DEFAULT_WINDOW_WIDTH_MS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MfaError {
    #[error("process `{0}` is already registered")]
    DuplicateProcessId(String),
    #[error("material `{0}` is already registered")]
    DuplicateMaterialId(String),
    #[error("invalid identifier `{0}`: must be non-empty and contain no whitespace")]
    InvalidId(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("flow from `{0}` to itself")]
    SelfLoop(String),
    #[error("negative mass {0} kg")]
    NegativeMass(crate::Mass),
    #[error("invalid window range [{lo}, {hi}]")]
    InvalidWindowRange { lo: u64, hi: u64 },
    #[error("area of interest is empty")]
    EmptyArea,
    #[error("window width must be positive")]
    ZeroWindowWidth,
}

impl MfaError {
    /// Stable machine-readable code used in query error responses.
    pub fn code(&self) -> &'static str {
        match self {
            MfaError::DuplicateProcessId(_) => "duplicate_process_id",
            MfaError::DuplicateMaterialId(_) => "duplicate_material_id",
            MfaError::InvalidId(_) => "invalid_id",
            MfaError::UnknownProcess(_) => "unknown_process",
            MfaError::UnknownMaterial(_) => "unknown_material",
            MfaError::SelfLoop(_) => "self_loop",
            MfaError::NegativeMass(_) => "negative_mass",
            MfaError::InvalidWindowRange { .. } => "invalid_window_range",
            MfaError::EmptyArea => "empty_area",
            MfaError::ZeroWindowWidth => "zero_window_width",
        }
    }
}
