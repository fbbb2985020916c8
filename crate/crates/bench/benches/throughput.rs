use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use synchroflow::aggregator::{AggregatorState, NoJournal};
use synchroflow::perception::{derive_contacts, parse_voc, BoundingBox, Label};
use synchroflow::sim::{cell_graph, run_scenario, ScenarioConfig};
use synchroflow::{FlowLedger, Mass, MaterialMass};

const DESKTOP: &str = include_str!("../../core/tests/fixtures/voc/desktop_open_case.xml");

fn ledger_apply(c: &mut Criterion) {
    let mm = MaterialMass::new("copper", Mass::from_micro_kg(1_250));
    let mut g = c.benchmark_group("ledger");
    g.throughput(Throughput::Elements(1_000));
    g.bench_function("apply_flow_1000", |b| {
        b.iter_batched(
            || FlowLedger::new(cell_graph(), 60_000).unwrap(),
            |mut ledger| {
                for w in 0..1_000u64 {
                    ledger
                        .apply_flow("mining", "manufacturing", &mm, w % 50)
                        .unwrap();
                }
                ledger
            },
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn aggregator_ingest(c: &mut Criterion) {
    let scenario = ScenarioConfig::default_scenario();
    let lines: Vec<String> = run_scenario(&scenario)
        .unwrap()
        .delivered_events()
        .map(|e| e.to_wire())
        .collect();
    let mut g = c.benchmark_group("aggregator");
    g.throughput(Throughput::Elements(lines.len() as u64));
    g.bench_function("ingest_default_scenario", |b| {
        b.iter_batched(
            || {
                AggregatorState::new(
                    scenario.graph.clone(),
                    scenario.window_width_ms,
                    scenario.skew_allowance_ms,
                )
                .unwrap()
            },
            |mut state| {
                for line in &lines {
                    black_box(state.ingest_line(line.as_bytes(), &mut NoJournal));
                }
                state
            },
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn perception(c: &mut Criterion) {
    let boxes: Vec<BoundingBox> = (0..1_000i64)
        .map(|i| {
            let label = Label::ALL[i as usize % Label::ALL.len()];
            BoundingBox::new(
                label,
                i % 97,
                i % 89,
                i % 97 + 1 + i % 211,
                i % 89 + 1 + i % 193,
            )
            .unwrap()
        })
        .collect();
    let mut g = c.benchmark_group("perception");
    g.throughput(Throughput::Elements(boxes.len() as u64));
    g.bench_function("derive_contacts_1000", |b| {
        b.iter(|| {
            for bx in &boxes {
                black_box(derive_contacts(black_box(bx)).unwrap());
            }
        })
    });
    g.throughput(Throughput::Bytes(DESKTOP.len() as u64));
    g.bench_function("parse_voc", |b| {
        b.iter(|| parse_voc(black_box(DESKTOP)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, ledger_apply, aggregator_ingest, perception);
criterion_main!(benches);
