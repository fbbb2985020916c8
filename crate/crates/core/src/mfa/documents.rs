//! JSON documents produced by ledger queries.

use serde::{Deserialize, Serialize};

use super::Stage;
use crate::Mass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyNode {
    pub id: String,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub from: String,
    pub to: String,
    pub material: String,
    pub mass_kg: Mass,
}

/// Nodes are the registered processes in id order; links are sorted by
/// (from, to, material) and never carry zero mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyDocument {
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink>,
}

impl SankeyDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sankey serialization is infallible")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarPoint {
    pub window: u64,
    pub total_kg: Mass,
}

impl BarPoint {
    pub fn series_json(series: &[BarPoint]) -> String {
        serde_json::to_string(series).expect("bar series serialization is infallible")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceRow {
    pub process: String,
    pub material: String,
    pub inflow_kg: Mass,
    pub outflow_kg: Mass,
    pub stock_kg: Mass,
    pub residual_kg: Mass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub window_hi: u64,
    pub rows: Vec<BalanceRow>,
    /// Rows whose residual is not zero.
    pub violations: Vec<BalanceRow>,
}

impl BalanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("balance serialization is infallible")
    }

    pub fn is_balanced(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sankey_wire_shape() {
        let doc = SankeyDocument {
            nodes: vec![SankeyNode {
                id: "use".into(),
                stage: Stage::Use,
            }],
            links: vec![SankeyLink {
                from: "manufacturing".into(),
                to: "use".into(),
                material: "copper".into(),
                mass_kg: "1.5".parse().unwrap(),
            }],
        };
        assert_eq!(
            doc.to_json(),
            r#"{"nodes":[{"id":"use","stage":"use"}],"links":[{"from":"manufacturing","to":"use","material":"copper","mass_kg":"1.500000"}]}"#
        );
    }

    #[test]
    fn bar_series_wire_shape() {
        let series = [BarPoint {
            window: 0,
            total_kg: "-0.25".parse().unwrap(),
        }];
        assert_eq!(
            BarPoint::series_json(&series),
            r#"[{"window":0,"total_kg":"-0.250000"}]"#
        );
    }
}
