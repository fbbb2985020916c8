use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Emission, NetworkModel};

/// One copy of a sent event arriving at the aggregator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub delivered_at_ms: u64,
    /// Index into the sent log.
    pub sent_index: usize,
}

/// Applies loss, duplication and bounded reordering to a sent log.
///
/// Each surviving copy is delayed by a uniform draw from
/// `0..=reorder_window_ms`, so a copy can only overtake events sent at most
/// `reorder_window_ms` after it. Payloads are referenced, never rewritten.
pub fn perturb(net: &NetworkModel, sent: &[Emission]) -> Vec<Delivery> {
    let mut rng = ChaCha8Rng::seed_from_u64(net.rng_seed);
    let mut out = Vec::with_capacity(sent.len());
    for (index, emission) in sent.iter().enumerate() {
        let lost = rng.random::<f64>() < net.loss_prob;
        let duplicated = rng.random::<f64>() < net.duplicate_prob;
        if lost {
            continue;
        }
        let copies = if duplicated { 2 } else { 1 };
        for _ in 0..copies {
            let delay = if net.reorder_window_ms > 0 {
                rng.random_range(0..=net.reorder_window_ms)
            } else {
                0
            };
            out.push(Delivery {
                delivered_at_ms: emission.sent_at_ms + delay,
                sent_index: index,
            });
        }
    }
    // Stable: ties keep send order.
    out.sort_by_key(|d| d.delivered_at_ms);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{EventKind, SynchroEvent};
    use crate::Mass;
    use std::collections::BTreeMap;

    fn sent_log(n: usize) -> Vec<Emission> {
        (0..n)
            .map(|i| Emission {
                sent_at_ms: i as u64 * 700,
                event: SynchroEvent {
                    node_id: format!("n{}", i % 3),
                    seq: i as u64,
                    ts_ms: i as u64 * 700,
                    kind: EventKind::UseTransfer,
                    from_process: "use".into(),
                    to_process: "disassembly".into(),
                    material: "steel".into(),
                    mass_kg: Mass::from_micro_kg(i as i128),
                    step: None,
                    item_ref: None,
                },
            })
            .collect()
    }

    #[test]
    fn ideal_network_is_identity() {
        let sent = sent_log(50);
        let delivered = perturb(&NetworkModel::ideal(), &sent);
        let idx: Vec<usize> = delivered.iter().map(|d| d.sent_index).collect();
        assert_eq!(idx, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn certain_duplication_doubles_everything() {
        let sent = sent_log(40);
        let net = NetworkModel {
            duplicate_prob: 1.0,
            ..NetworkModel::ideal()
        };
        let mut counts = BTreeMap::new();
        for d in perturb(&net, &sent) {
            *counts.entry(d.sent_index).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 40);
        assert!(counts.values().all(|&c| c == 2));
    }

    #[test]
    fn seeded_perturbation_respects_bounds() {
        let sent = sent_log(500);
        let net = NetworkModel {
            reorder_window_ms: 3_000,
            duplicate_prob: 0.2,
            loss_prob: 0.1,
            rng_seed: 17,
        };
        let delivered = perturb(&net, &sent);
        assert_eq!(delivered, perturb(&net, &sent));
        let mut max_overtake = 0;
        for (pos, d) in delivered.iter().enumerate() {
            assert!(d.sent_index < sent.len());
            assert!(d.delivered_at_ms >= sent[d.sent_index].sent_at_ms);
            assert!(d.delivered_at_ms <= sent[d.sent_index].sent_at_ms + 3_000);
            // Anything delivered earlier but sent later overtook `d`.
            for earlier in &delivered[..pos] {
                let a = sent[d.sent_index].sent_at_ms;
                let b = sent[earlier.sent_index].sent_at_ms;
                if b > a {
                    max_overtake = max_overtake.max(b - a);
                }
            }
        }
        assert!(max_overtake <= 3_000);
        assert!(max_overtake > 0, "expected some reordering");
        let distinct: std::collections::BTreeSet<_> =
            delivered.iter().map(|d| d.sent_index).collect();
        assert!(distinct.len() < sent.len(), "expected some loss");
        assert!(delivered.len() > distinct.len(), "expected some duplicates");
    }
}
