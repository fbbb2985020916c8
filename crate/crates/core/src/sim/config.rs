use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{validate_event, EventKind, SynchroEvent, DEFAULT_SKEW_ALLOWANCE_MS};
use crate::mfa::{Material, ProcessGraph, ProcessNode, Stage, DEFAULT_WINDOW_WIDTH_MS};
use crate::perception::{BillOfMaterials, BomError, Label};
use crate::Mass;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid scenario JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Bom(#[from] BomError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// RO1: builds the product's component set from raw material.
    Ro1Manufacture,
    /// RO2: assembles components into the product, one step per component.
    Ro2Assemble,
    /// RO3: takes products out of use, one component per step.
    Ro3Disassemble,
    /// Splits extracted material between recovery and incineration.
    Sorter,
}

impl Role {
    pub fn event_kind(self) -> EventKind {
        match self {
            Role::Ro1Manufacture | Role::Ro2Assemble => EventKind::AssemblyIncrement,
            Role::Ro3Disassemble => EventKind::DisassemblyExtraction,
            Role::Sorter => EventKind::SortTransfer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotNodeConfig {
    pub node_id: String,
    pub role: Role,
    #[serde(default)]
    pub clock_skew_ms: i64,
    pub emit_period_ms: u64,
    pub from: String,
    pub to: String,
    /// Sorter only: where the unrecovered share goes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discard_to: Option<String>,
    /// Sorter only: share of each material sent to `to`. Defaults to 0.7.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_fraction: Option<f64>,
}

pub const DEFAULT_RECOVERY_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkModel {
    #[serde(default)]
    pub reorder_window_ms: u64,
    #[serde(default)]
    pub duplicate_prob: f64,
    #[serde(default)]
    pub loss_prob: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl NetworkModel {
    pub fn ideal() -> Self {
        NetworkModel {
            reorder_window_ms: 0,
            duplicate_prob: 0.0,
            loss_prob: 0.0,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration_ms: u64,
    #[serde(default = "default_window")]
    pub window_width_ms: u64,
    #[serde(default = "default_skew")]
    pub skew_allowance_ms: u64,
    /// How long an assembled product stays in use before RO3 may take it.
    #[serde(default)]
    pub use_lag_ms: u64,
    /// Components of one product, in assembly order.
    pub product: Vec<Label>,
    pub graph: ProcessGraph,
    pub nodes: Vec<RobotNodeConfig>,
    pub network: NetworkModel,
    /// BOM file, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bom_path: Option<PathBuf>,
    /// Inline BOM; takes precedence once `bom_path` has been resolved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bom: Option<serde_json::Value>,
}

fn default_window() -> u64 {
    DEFAULT_WINDOW_WIDTH_MS
}

fn default_skew() -> u64 {
    DEFAULT_SKEW_ALLOWANCE_MS
}

/// Indicative component compositions; real deployments load their own.
const DEFAULT_BOM: &str = r#"{
    "_note": "indicative masses only",
    "motherboard": [
        {"material": "fiberglass", "mass_kg": "0.450"},
        {"material": "copper", "mass_kg": "0.120"},
        {"material": "tin", "mass_kg": "0.015"},
        {"material": "gold", "mass_kg": "0.0004"}
    ],
    "fan": [
        {"material": "plastic", "mass_kg": "0.060"},
        {"material": "copper", "mass_kg": "0.020"},
        {"material": "steel", "mass_kg": "0.010"}
    ],
    "cable": [
        {"material": "copper", "mass_kg": "0.040"},
        {"material": "plastic", "mass_kg": "0.030"}
    ],
    "screw": [
        {"material": "steel", "mass_kg": "0.005"}
    ]
}"#;

/// mining → manufacturing → use → disassembly → incineration, with the
/// materials of the reference BOM.
pub fn cell_graph() -> ProcessGraph {
    let mut graph = ProcessGraph::new();
    for (id, stage, description) in [
        ("mining", Stage::Mining, "raw material extraction"),
        (
            "manufacturing",
            Stage::Manufacturing,
            "component manufacturing and assembly",
        ),
        ("use", Stage::Use, "products in service"),
        (
            "disassembly",
            Stage::Disassembly,
            "end-of-use disassembly cell",
        ),
        (
            "incineration",
            Stage::Incineration,
            "thermal treatment of residues",
        ),
    ] {
        graph
            .register_process(ProcessNode::new(id, stage).with_description(description))
            .expect("static graph");
    }
    for (id, name) in [
        ("copper", "Copper"),
        ("fiberglass", "Fiberglass laminate"),
        ("gold", "Gold"),
        ("plastic", "Plastics"),
        ("steel", "Steel"),
        ("tin", "Tin"),
    ] {
        graph
            .register_material(Material::new(id, name))
            .expect("static graph");
    }
    graph
}

impl ScenarioConfig {
    /// Three robot nodes plus a sorter over ten simulated minutes.
    pub fn default_scenario() -> Self {
        let graph = cell_graph();
        let node = |node_id: &str, role, clock_skew_ms, emit_period_ms, from: &str, to: &str| {
            RobotNodeConfig {
                node_id: node_id.into(),
                role,
                clock_skew_ms,
                emit_period_ms,
                from: from.into(),
                to: to.into(),
                discard_to: None,
                recovery_fraction: None,
            }
        };
        let mut sorter = node(
            "sorter",
            Role::Sorter,
            700,
            20_000,
            "disassembly",
            "manufacturing",
        );
        sorter.discard_to = Some("incineration".into());
        sorter.recovery_fraction = Some(DEFAULT_RECOVERY_FRACTION);
        ScenarioConfig {
            duration_ms: 600_000,
            window_width_ms: DEFAULT_WINDOW_WIDTH_MS,
            skew_allowance_ms: DEFAULT_SKEW_ALLOWANCE_MS,
            use_lag_ms: 60_000,
            product: vec![
                Label::Motherboard,
                Label::Fan,
                Label::Cable,
                Label::Cable,
                Label::Screw,
                Label::Screw,
                Label::Screw,
                Label::Screw,
            ],
            graph,
            nodes: vec![
                node(
                    "ro1",
                    Role::Ro1Manufacture,
                    1_500,
                    6_000,
                    "mining",
                    "manufacturing",
                ),
                node(
                    "ro2",
                    Role::Ro2Assemble,
                    -500,
                    7_500,
                    "manufacturing",
                    "use",
                ),
                node("ro3", Role::Ro3Disassemble, 0, 6_000, "use", "disassembly"),
                sorter,
            ],
            network: NetworkModel {
                reorder_window_ms: 3_000,
                duplicate_prob: 0.1,
                loss_prob: 0.0,
                rng_seed: 42,
            },
            bom_path: None,
            bom: Some(serde_json::from_str(DEFAULT_BOM).expect("static BOM")),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))
    }

    /// Reads a scenario file and inlines its `bom_path`.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(rel) = cfg.bom_path.take() {
            let bom_file = path.parent().unwrap_or(Path::new(".")).join(rel);
            let bom_text = std::fs::read_to_string(&bom_file).map_err(|e| ScenarioError::Io {
                path: bom_file.clone(),
                message: e.to_string(),
            })?;
            let value = serde_json::from_str(&bom_text)
                .map_err(|e| ScenarioError::Json(format!("{}: {e}", bom_file.display())))?;
            cfg.bom = Some(value);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }

    pub fn bill_of_materials(&self) -> Result<BillOfMaterials, ScenarioError> {
        match (&self.bom, &self.bom_path) {
            (Some(value), _) => Ok(BillOfMaterials::from_json(&value.to_string())?),
            (None, Some(path)) => Err(ScenarioError::Invalid(format!(
                "bom_path {} is not resolved; load the scenario from a file",
                path.display()
            ))),
            (None, None) => Err(ScenarioError::Invalid("scenario has no BOM".into())),
        }
    }

    /// Checks the scenario against its own graph and BOM and returns the BOM.
    pub fn validate(&self) -> Result<BillOfMaterials, ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        let bom = self.bill_of_materials()?;
        if self.window_width_ms == 0 {
            return invalid("window_width_ms must be positive".into());
        }
        for label in &self.product {
            if bom.get(*label).is_none() {
                return invalid(format!("product component `{label}` has no BOM entry"));
            }
        }
        for material in bom.materials() {
            if self.graph.material(material).is_none() {
                return invalid(format!(
                    "BOM material `{material}` is not registered in the graph"
                ));
            }
        }
        let net = &self.network;
        if !(0.0..1.0).contains(&net.loss_prob) {
            return invalid(format!("loss_prob {} outside [0, 1)", net.loss_prob));
        }
        if !(0.0..=1.0).contains(&net.duplicate_prob) {
            return invalid(format!(
                "duplicate_prob {} outside [0, 1]",
                net.duplicate_prob
            ));
        }
        let mut ids = BTreeSet::new();
        let material = bom
            .materials()
            .into_iter()
            .next()
            .map(str::to_string)
            .unwrap_or_default();
        for node in &self.nodes {
            if node.node_id.is_empty() || !ids.insert(node.node_id.as_str()) {
                return invalid(format!("node id `{}` is empty or repeated", node.node_id));
            }
            if node.emit_period_ms == 0 {
                return invalid(format!("node `{}` has a zero emit period", node.node_id));
            }
            let mut routes = vec![(node.role.event_kind(), &node.from, &node.to)];
            if node.role == Role::Sorter {
                let Some(discard) = &node.discard_to else {
                    return invalid(format!("sorter `{}` needs discard_to", node.node_id));
                };
                let fraction = node.recovery_fraction.unwrap_or(DEFAULT_RECOVERY_FRACTION);
                if !(0.0..=1.0).contains(&fraction) {
                    return invalid(format!(
                        "sorter `{}` recovery_fraction {fraction} outside [0, 1]",
                        node.node_id
                    ));
                }
                routes.push((EventKind::IncinerationTransfer, &node.from, discard));
            }
            // Every route the node will use must pass event validation.
            for (kind, from, to) in routes {
                let probe = SynchroEvent {
                    node_id: node.node_id.clone(),
                    seq: 0,
                    ts_ms: 0,
                    kind,
                    from_process: from.clone(),
                    to_process: to.clone(),
                    material: material.clone(),
                    mass_kg: Mass::ZERO,
                    step: (kind == EventKind::AssemblyIncrement).then_some(1),
                    item_ref: None,
                };
                let violations = validate_event(&probe, &self.graph);
                if !violations.is_empty() {
                    let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
                    return invalid(format!(
                        "node `{}` route {from} -> {to}: {}",
                        node.node_id,
                        list.join("; ")
                    ));
                }
            }
        }
        Ok(bom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_is_valid() {
        let cfg = ScenarioConfig::default_scenario();
        cfg.validate().unwrap();
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_process() {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.nodes[0].to = "factory".into();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("factory"), "{err}");
    }

    #[test]
    fn rejects_wrong_stage_for_role() {
        let mut cfg = ScenarioConfig::default_scenario();
        // Disassembly robot pointed at a manufacturing flow.
        cfg.nodes[2].from = "mining".into();
        cfg.nodes[2].to = "manufacturing".into();
        assert!(matches!(cfg.validate(), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn rejects_product_without_bom() {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.bom = Some(serde_json::json!({"screw": [{"material": "steel", "mass_kg": "0.005"}]}));
        assert!(cfg
            .validate()
            .unwrap_err()
            .to_string()
            .contains("motherboard"));
    }

    #[test]
    fn rejects_bad_probabilities_and_periods() {
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.network.loss_prob = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.nodes[1].emit_period_ms = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default_scenario();
        cfg.nodes[3].discard_to = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn load_resolves_relative_bom_path() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ScenarioConfig::default_scenario();
        let bom = cfg.bom.take().unwrap();
        cfg.bom_path = Some("parts/bom.json".into());
        std::fs::create_dir(dir.path().join("parts")).unwrap();
        std::fs::write(dir.path().join("parts/bom.json"), bom.to_string()).unwrap();
        std::fs::write(dir.path().join("scenario.json"), cfg.to_json()).unwrap();
        let loaded = ScenarioConfig::load(&dir.path().join("scenario.json")).unwrap();
        loaded.validate().unwrap();
        assert_eq!(loaded.bom, Some(bom));
    }
}
