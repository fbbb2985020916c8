//! Seeded discrete-event simulation of a robotic material cell: part
//! manufacturing (RO1), product assembly (RO2), disassembly (RO3) and a
//! sorter, each reporting synchromaterial events through a lossy network.
//!
//! Time is logical; `(seed, config)` fully determine every log.

mod cell;
mod config;
mod network;

pub use cell::{run_scenario, CellSimulator, Emission, ScenarioRun};
pub use config::{cell_graph, NetworkModel, RobotNodeConfig, Role, ScenarioConfig, ScenarioError};
pub use network::{perturb, Delivery};
