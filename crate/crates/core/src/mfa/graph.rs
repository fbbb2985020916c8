use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MfaError;
use crate::Mass;

/// Lifecycle stage of a process node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Mining,
    Manufacturing,
    Use,
    Disassembly,
    Sorting,
    Incineration,
    /// Source/sink at the system boundary.
    External,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Mining => "mining",
            Stage::Manufacturing => "manufacturing",
            Stage::Use => "use",
            Stage::Disassembly => "disassembly",
            Stage::Sorting => "sorting",
            Stage::Incineration => "incineration",
            Stage::External => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub id: String,
    #[serde(default)]
    pub display_name: String,
}

impl Material {
    pub fn new(id: impl Into<String>, display_name: impl Into<String>) -> Self {
        Material {
            id: id.into(),
            display_name: display_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessNode {
    pub id: String,
    pub stage: Stage,
    #[serde(default)]
    pub description: String,
}

impl ProcessNode {
    pub fn new(id: impl Into<String>, stage: Stage) -> Self {
        ProcessNode {
            id: id.into(),
            stage,
            description: String::new(),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

/// "Mass and type" of one report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialMass {
    pub material: String,
    pub mass_kg: Mass,
}

impl MaterialMass {
    pub fn new(material: impl Into<String>, mass_kg: Mass) -> Self {
        MaterialMass {
            material: material.into(),
            mass_kg,
        }
    }
}

fn check_id(id: &str) -> Result<(), MfaError> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        Err(MfaError::InvalidId(id.to_string()))
    } else {
        Ok(())
    }
}

/// Registered processes and materials. Iteration is always in id order, so
/// registration order never shows up in any query or serialization.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct ProcessGraph {
    processes: BTreeMap<String, ProcessNode>,
    materials: BTreeMap<String, Material>,
}

impl ProcessGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_process(&mut self, node: ProcessNode) -> Result<(), MfaError> {
        check_id(&node.id)?;
        if self.processes.contains_key(&node.id) {
            return Err(MfaError::DuplicateProcessId(node.id));
        }
        self.processes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn register_material(&mut self, material: Material) -> Result<(), MfaError> {
        check_id(&material.id)?;
        if self.materials.contains_key(&material.id) {
            return Err(MfaError::DuplicateMaterialId(material.id));
        }
        self.materials.insert(material.id.clone(), material);
        Ok(())
    }

    /// Builder-style [`register_process`](Self::register_process).
    pub fn with_process(mut self, node: ProcessNode) -> Result<Self, MfaError> {
        self.register_process(node)?;
        Ok(self)
    }

    pub fn with_material(mut self, material: Material) -> Result<Self, MfaError> {
        self.register_material(material)?;
        Ok(self)
    }

    pub fn process(&self, id: &str) -> Option<&ProcessNode> {
        self.processes.get(id)
    }

    pub fn material(&self, id: &str) -> Option<&Material> {
        self.materials.get(id)
    }

    pub fn require_process(&self, id: &str) -> Result<&ProcessNode, MfaError> {
        self.process(id)
            .ok_or_else(|| MfaError::UnknownProcess(id.to_string()))
    }

    pub fn require_material(&self, id: &str) -> Result<&Material, MfaError> {
        self.material(id)
            .ok_or_else(|| MfaError::UnknownMaterial(id.to_string()))
    }

    pub fn processes(&self) -> impl Iterator<Item = &ProcessNode> {
        self.processes.values()
    }

    pub fn materials(&self) -> impl Iterator<Item = &Material> {
        self.materials.values()
    }

    pub fn process_count(&self) -> usize {
        self.processes.len()
    }

    /// Compact JSON form with processes and materials in id order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    #[serde(default)]
    materials: Vec<Material>,
    processes: Vec<ProcessNode>,
}

impl TryFrom<GraphDocument> for ProcessGraph {
    type Error = MfaError;

    fn try_from(doc: GraphDocument) -> Result<Self, Self::Error> {
        let mut graph = ProcessGraph::new();
        for node in doc.processes {
            graph.register_process(node)?;
        }
        for material in doc.materials {
            graph.register_material(material)?;
        }
        Ok(graph)
    }
}

impl From<ProcessGraph> for GraphDocument {
    fn from(graph: ProcessGraph) -> Self {
        GraphDocument {
            materials: graph.materials.into_values().collect(),
            processes: graph.processes.into_values().collect(),
        }
    }
}
