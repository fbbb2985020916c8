use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::documents::{
    BalanceReport, BalanceRow, BarPoint, SankeyDocument, SankeyLink, SankeyNode,
};
use super::{MaterialMass, MfaError, ProcessGraph, Stage};
use crate::Mass;

/// One sampling window per minute unless configured otherwise.
pub const DEFAULT_WINDOW_WIDTH_MS: u64 = 60_000;

/// Ledger key. Ordering is (from, to, material, window).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowKey {
    pub from: String,
    pub to: String,
    pub material: String,
    pub window: u64,
}

/// Cumulative mass per (from, to, material, window).
///
/// Masses are exact fixed-point values, so the ledger contents depend only
/// on the multiset of applied flows and never on their order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowLedger {
    graph: ProcessGraph,
    window_width_ms: u64,
    entries: BTreeMap<FlowKey, Mass>,
}

#[derive(Serialize)]
struct LedgerEntryDoc<'a> {
    from: &'a str,
    mass_kg: Mass,
    material: &'a str,
    to: &'a str,
    window: u64,
}

#[derive(Serialize)]
struct LedgerDoc<'a> {
    entries: Vec<LedgerEntryDoc<'a>>,
    window_width_ms: u64,
}

impl FlowLedger {
    pub fn new(graph: ProcessGraph, window_width_ms: u64) -> Result<Self, MfaError> {
        if window_width_ms == 0 {
            return Err(MfaError::ZeroWindowWidth);
        }
        Ok(FlowLedger {
            graph,
            window_width_ms,
            entries: BTreeMap::new(),
        })
    }

    pub fn graph(&self) -> &ProcessGraph {
        &self.graph
    }

    pub fn window_width_ms(&self) -> u64 {
        self.window_width_ms
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FlowKey, Mass)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, from: &str, to: &str, material: &str, window: u64) -> Mass {
        let key = FlowKey {
            from: from.to_string(),
            to: to.to_string(),
            material: material.to_string(),
            window,
        };
        self.entries.get(&key).copied().unwrap_or(Mass::ZERO)
    }

    /// Highest window index with any entry.
    pub fn max_window(&self) -> Option<u64> {
        self.entries.keys().map(|k| k.window).max()
    }

    /// Checks a flow without applying it.
    pub fn check_flow(&self, from: &str, to: &str, mm: &MaterialMass) -> Result<(), MfaError> {
        self.graph.require_process(from)?;
        self.graph.require_process(to)?;
        self.graph.require_material(&mm.material)?;
        if from == to {
            return Err(MfaError::SelfLoop(from.to_string()));
        }
        if mm.mass_kg.is_negative() {
            return Err(MfaError::NegativeMass(mm.mass_kg));
        }
        Ok(())
    }

    /// Adds `mm` to the (from, to, material, window) entry.
    pub fn apply_flow(
        &mut self,
        from: &str,
        to: &str,
        mm: &MaterialMass,
        window: u64,
    ) -> Result<(), MfaError> {
        self.check_flow(from, to, mm)?;
        let key = FlowKey {
            from: from.to_string(),
            to: to.to_string(),
            material: mm.material.clone(),
            window,
        };
        *self.entries.entry(key).or_default() += mm.mass_kg;
        Ok(())
    }

    /// Inflow minus outflow of `material` at `process` through `window` inclusive.
    pub fn stock_at(&self, process: &str, material: &str, window: u64) -> Result<Mass, MfaError> {
        self.graph.require_process(process)?;
        self.graph.require_material(material)?;
        Ok(self
            .entries
            .iter()
            .filter(|(k, _)| k.material == material && k.window <= window)
            .map(|(k, mass)| {
                if k.to == process {
                    *mass
                } else if k.from == process {
                    -*mass
                } else {
                    Mass::ZERO
                }
            })
            .sum())
    }

    /// Per (from, to, material) totals over every window.
    pub fn totals_by_flow(&self) -> BTreeMap<(String, String, String), Mass> {
        let mut totals: BTreeMap<(String, String, String), Mass> = BTreeMap::new();
        for (k, mass) in &self.entries {
            *totals
                .entry((k.from.clone(), k.to.clone(), k.material.clone()))
                .or_default() += *mass;
        }
        totals
    }

    pub fn total_mass(&self) -> Mass {
        self.entries.values().sum()
    }

    pub fn sankey_between(
        &self,
        window_lo: u64,
        window_hi: u64,
    ) -> Result<SankeyDocument, MfaError> {
        if window_lo > window_hi {
            return Err(MfaError::InvalidWindowRange {
                lo: window_lo,
                hi: window_hi,
            });
        }
        let nodes = self
            .graph
            .processes()
            .map(|p| SankeyNode {
                id: p.id.clone(),
                stage: p.stage,
            })
            .collect();
        let mut sums: BTreeMap<(&str, &str, &str), Mass> = BTreeMap::new();
        for (k, mass) in &self.entries {
            if (window_lo..=window_hi).contains(&k.window) {
                *sums.entry((&k.from, &k.to, &k.material)).or_default() += *mass;
            }
        }
        let links = sums
            .into_iter()
            .filter(|(_, mass)| !mass.is_zero())
            .map(|((from, to, material), mass_kg)| SankeyLink {
                from: from.to_string(),
                to: to.to_string(),
                material: material.to_string(),
                mass_kg,
            })
            .collect();
        Ok(SankeyDocument { nodes, links })
    }

    /// Total stock of `material` across `area` for each window 0..=window_hi.
    pub fn bar_series(
        &self,
        area: &BTreeSet<String>,
        material: &str,
        window_hi: u64,
    ) -> Result<Vec<BarPoint>, MfaError> {
        if area.is_empty() {
            return Err(MfaError::EmptyArea);
        }
        for p in area {
            self.graph.require_process(p)?;
        }
        self.graph.require_material(material)?;

        // Net change of the area's stock per window, then a running sum.
        let mut delta: BTreeMap<u64, Mass> = BTreeMap::new();
        for (k, mass) in &self.entries {
            if k.material != material || k.window > window_hi {
                continue;
            }
            let into = area.contains(&k.to);
            let out_of = area.contains(&k.from);
            let change = match (into, out_of) {
                (true, false) => *mass,
                (false, true) => -*mass,
                _ => continue,
            };
            *delta.entry(k.window).or_default() += change;
        }
        let mut running = Mass::ZERO;
        Ok((0..=window_hi)
            .map(|window| {
                running += delta.get(&window).copied().unwrap_or(Mass::ZERO);
                BarPoint {
                    window,
                    total_kg: running,
                }
            })
            .collect())
    }

    /// Inflow/outflow/stock residuals for every non-External process and
    /// material that has flows through `window_hi`.
    ///
    /// Inflow and outflow are summed in one pass; the stock comes from
    /// [`stock_at`](Self::stock_at). Any non-zero residual is an internal bug.
    pub fn mass_balance_report(&self, window_hi: u64) -> BalanceReport {
        let mut flows: BTreeMap<(&str, &str), (Mass, Mass)> = BTreeMap::new();
        for (k, mass) in &self.entries {
            if k.window > window_hi {
                continue;
            }
            flows.entry((&k.to, &k.material)).or_default().0 += *mass;
            flows.entry((&k.from, &k.material)).or_default().1 += *mass;
        }
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        for ((process, material), (inflow, outflow)) in flows {
            let Some(node) = self.graph.process(process) else {
                continue;
            };
            if node.stage == Stage::External {
                continue;
            }
            let stock = self
                .stock_at(process, material, window_hi)
                .unwrap_or(Mass::ZERO);
            let residual = inflow - outflow - stock;
            let row = BalanceRow {
                process: process.to_string(),
                material: material.to_string(),
                inflow_kg: inflow,
                outflow_kg: outflow,
                stock_kg: stock,
                residual_kg: residual,
            };
            if !residual.is_zero() {
                violations.push(row.clone());
            }
            rows.push(row);
        }
        BalanceReport {
            window_hi,
            rows,
            violations,
        }
    }

    /// Compact JSON with entries in key order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.canonical_doc()).expect("ledger serialization is infallible")
    }

    pub(crate) fn canonical_value(&self) -> serde_json::Value {
        serde_json::to_value(self.canonical_doc()).expect("ledger serialization is infallible")
    }

    fn canonical_doc(&self) -> LedgerDoc<'_> {
        LedgerDoc {
            entries: self
                .entries
                .iter()
                .map(|(k, mass)| LedgerEntryDoc {
                    from: &k.from,
                    mass_kg: *mass,
                    material: &k.material,
                    to: &k.to,
                    window: k.window,
                })
                .collect(),
            window_width_ms: self.window_width_ms,
        }
    }
}
