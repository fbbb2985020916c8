use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    Fresh,
    Duplicate,
}

/// Set of `u64` stored as disjoint, non-adjacent inclusive ranges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<(u64, u64)>", from = "Vec<(u64, u64)>")]
pub struct SeqRanges {
    // start -> inclusive end
    ranges: BTreeMap<u64, u64>,
}

impl SeqRanges {
    pub fn contains(&self, seq: u64) -> bool {
        self.ranges
            .range(..=seq)
            .next_back()
            .is_some_and(|(_, &end)| seq <= end)
    }

    /// Returns `false` if `seq` was already present.
    pub fn insert(&mut self, seq: u64) -> bool {
        if self.contains(seq) {
            return false;
        }
        let mut start = seq;
        let mut end = seq;
        if let Some((&s, &e)) = self.ranges.range(..seq).next_back() {
            if e.checked_add(1) == Some(seq) {
                start = s;
                self.ranges.remove(&s);
            }
        }
        if let Some(next) = seq.checked_add(1) {
            if let Some(e) = self.ranges.remove(&next) {
                end = e;
            }
        }
        self.ranges.insert(start, end);
        true
    }

    pub fn range_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.ranges.iter().map(|(&s, &e)| (s, e))
    }
}

impl From<SeqRanges> for Vec<(u64, u64)> {
    fn from(r: SeqRanges) -> Self {
        r.ranges.into_iter().collect()
    }
}

impl From<Vec<(u64, u64)>> for SeqRanges {
    fn from(mut v: Vec<(u64, u64)>) -> Self {
        v.retain(|(s, e)| s <= e);
        v.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(v.len());
        for (s, e) in v {
            match merged.last_mut() {
                Some(last) if s <= last.1.saturating_add(1) => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        SeqRanges {
            ranges: merged.into_iter().collect(),
        }
    }
}

/// Accepted (node_id, seq) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupIndex {
    nodes: BTreeMap<String, SeqRanges>,
}

impl DedupIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, node_id: &str, seq: u64) -> bool {
        self.nodes.get(node_id).is_some_and(|r| r.contains(seq))
    }

    pub fn accept(&mut self, node_id: &str, seq: u64) -> Acceptance {
        let ranges = match self.nodes.get_mut(node_id) {
            Some(r) => r,
            None => self.nodes.entry(node_id.to_string()).or_default(),
        };
        if ranges.insert(seq) {
            Acceptance::Fresh
        } else {
            Acceptance::Duplicate
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, &SeqRanges)> {
        self.nodes.iter().map(|(k, v)| (k.as_str(), v))
    }
}
