//! Synchronized material-flow accounting for robotic assembly and
//! disassembly cells.

pub mod aggregator;
pub mod events;
pub mod mass;
pub mod mfa;
pub mod perception;
pub mod sim;

pub use events::{EventKind, SynchroEvent};
pub use mass::Mass;
pub use mfa::{FlowLedger, MaterialMass, ProcessGraph, ProcessNode, Stage};
