//! Bill of materials: component class -> constituent material masses.
//!
//! Always loaded from configuration. The JSON form is
//! `{"screw": [{"material": "steel", "mass_kg": "0.005"}], ...}`; keys
//! starting with `_` are treated as comments and skipped.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::Label;
use crate::mfa::MaterialMass;
use crate::Mass;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BomError {
    #[error("invalid BOM JSON: {0}")]
    Json(String),
    #[error("BOM entry `{0}` is not one of cable, screw, fan, motherboard")]
    UnknownLabel(String),
    #[error("BOM entry {label}/{material} has negative mass")]
    NegativeMass { label: Label, material: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BillOfMaterials {
    entries: BTreeMap<Label, Vec<MaterialMass>>,
}

impl BillOfMaterials {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: Label, materials: Vec<MaterialMass>) -> Result<(), BomError> {
        if let Some(bad) = materials.iter().find(|m| m.mass_kg.is_negative()) {
            return Err(BomError::NegativeMass {
                label,
                material: bad.material.clone(),
            });
        }
        self.entries.insert(label, materials);
        Ok(())
    }

    pub fn get(&self, label: Label) -> Option<&[MaterialMass]> {
        self.entries.get(&label).map(Vec::as_slice)
    }

    /// Total mass of one component of class `label`.
    pub fn component_mass(&self, label: Label) -> Option<Mass> {
        self.get(label).map(|ms| ms.iter().map(|m| m.mass_kg).sum())
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.entries.keys().copied()
    }

    pub fn materials(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .flatten()
            .map(|m| m.material.as_str())
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, BomError> {
        let raw: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| BomError::Json(e.to_string()))?;
        let mut bom = BillOfMaterials::new();
        for (key, value) in raw {
            if key.starts_with('_') {
                continue;
            }
            let label: Label = key
                .parse()
                .map_err(|_| BomError::UnknownLabel(key.clone()))?;
            let materials: Vec<MaterialMass> = serde_json::from_value(value)
                .map_err(|e| BomError::Json(format!("entry `{key}`: {e}")))?;
            bom.insert(label, materials)?;
        }
        Ok(bom)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, &Vec<MaterialMass>> =
            self.entries.iter().map(|(l, v)| (l.as_str(), v)).collect();
        serde_json::to_string_pretty(&map).expect("BOM serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_sums() {
        let bom = BillOfMaterials::from_json(
            r#"{
                "_note": "indicative values",
                "screw": [{"material": "steel", "mass_kg": "0.005"}],
                "Cable": [
                    {"material": "copper", "mass_kg": "0.04"},
                    {"material": "plastic", "mass_kg": "0.03"}
                ]
            }"#,
        )
        .unwrap();
        assert_eq!(
            bom.component_mass(Label::Screw),
            Some("0.005".parse().unwrap())
        );
        assert_eq!(
            bom.component_mass(Label::Cable),
            Some("0.07".parse().unwrap())
        );
        assert_eq!(bom.component_mass(Label::Fan), None);
        assert_eq!(
            bom.materials().into_iter().collect::<Vec<_>>(),
            ["copper", "plastic", "steel"]
        );
        let again = BillOfMaterials::from_json(&bom.to_json()).unwrap();
        assert_eq!(again, bom);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            BillOfMaterials::from_json(r#"{"keyboard": []}"#),
            Err(BomError::UnknownLabel(_))
        ));
        assert!(matches!(
            BillOfMaterials::from_json(r#"{"fan": [{"material": "steel", "mass_kg": "-0.1"}]}"#),
            Err(BomError::NegativeMass { .. })
        ));
        assert!(matches!(
            BillOfMaterials::from_json(r#"{"fan": [{"material": "steel", "mass_kg": 0.1}]}"#),
            Err(BomError::Json(_))
        ));
    }
}
