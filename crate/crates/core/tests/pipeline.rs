use std::collections::{BTreeMap, BTreeSet};

use synchroflow::aggregator::{AggregatorState, FileJournal, FsyncPolicy, NoJournal, Query};
use synchroflow::perception::{detections_to_events, parse_voc, ExtractionContext};
use synchroflow::sim::{cell_graph, run_scenario, ScenarioConfig};
use synchroflow::{EventKind, Mass, SynchroEvent};

type FlowTotals = BTreeMap<(String, String, String), Mass>;

/// Brute-force expectation: first copy of each (node, seq) counts; assembly
/// reports contribute their largest cumulative per item.
fn expected_totals<'a>(events: impl Iterator<Item = &'a SynchroEvent>) -> FlowTotals {
    let mut seen = BTreeSet::new();
    let mut plain = FlowTotals::new();
    let mut peaks: BTreeMap<(String, String, String, String, String), Mass> = BTreeMap::new();
    for e in events {
        if !seen.insert((e.node_id.clone(), e.seq)) {
            continue;
        }
        let flow = (
            e.from_process.clone(),
            e.to_process.clone(),
            e.material.clone(),
        );
        if e.kind == EventKind::AssemblyIncrement {
            let key = (
                e.node_id.clone(),
                e.item_ref.clone().unwrap_or_default(),
                flow.0,
                flow.1,
                flow.2,
            );
            let peak = peaks.entry(key).or_default();
            *peak = (*peak).max(e.mass_kg);
        } else {
            *plain.entry(flow).or_default() += e.mass_kg;
        }
    }
    for ((_, _, from, to, material), mass) in peaks {
        *plain.entry((from, to, material)).or_default() += mass;
    }
    plain.retain(|_, m| !m.is_zero());
    plain
}

fn ingest_all<'a>(state: &mut AggregatorState, events: impl Iterator<Item = &'a SynchroEvent>) {
    for e in events {
        let ack = state.ingest_line(e.to_wire().as_bytes(), &mut NoJournal);
        assert_ne!(ack.status(), "invalid", "{}", ack.to_json());
    }
}

fn fresh(cfg: &ScenarioConfig) -> AggregatorState {
    AggregatorState::new(
        cfg.graph.clone(),
        cfg.window_width_ms,
        cfg.skew_allowance_ms,
    )
    .unwrap()
}

#[test]
fn default_scenario_conserves_mass() {
    let cfg = ScenarioConfig::default_scenario();
    let run = run_scenario(&cfg).unwrap();
    let mut state = fresh(&cfg);
    ingest_all(&mut state, run.delivered_events());

    let mut ledger_totals = state.ledger().totals_by_flow();
    ledger_totals.retain(|_, m| !m.is_zero());
    assert_eq!(ledger_totals, expected_totals(run.sent_events()));
    let hi = state.ledger().max_window().unwrap();
    assert!(state.ledger().mass_balance_report(hi).is_balanced());
    assert!(state.metrics().duplicates > 0);
    assert_eq!(state.metrics().late, 0);
}

#[test]
fn lossy_network_matches_delivered_minus_duplicates() {
    let mut cfg = ScenarioConfig::default_scenario();
    cfg.network.loss_prob = 0.15;
    cfg.network.rng_seed = 9;
    let run = run_scenario(&cfg).unwrap();
    let mut state = fresh(&cfg);
    ingest_all(&mut state, run.delivered_events());
    let mut ledger_totals = state.ledger().totals_by_flow();
    ledger_totals.retain(|_, m| !m.is_zero());
    assert_eq!(ledger_totals, expected_totals(run.delivered_events()));
    assert_ne!(ledger_totals, expected_totals(run.sent_events()));
}

#[test]
fn file_journal_replay_reproduces_snapshot_and_sankey() {
    let cfg = ScenarioConfig::default_scenario();
    let run = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.ndjson");

    let mut live = fresh(&cfg);
    {
        let mut journal = FileJournal::open(&path, FsyncPolicy::Never).unwrap();
        for e in run.delivered_events() {
            live.ingest_line(e.to_wire().as_bytes(), &mut journal);
        }
        synchroflow::aggregator::JournalSink::flush(&mut journal).unwrap();
    }
    let text = synchroflow::aggregator::read_journal(&path).unwrap();
    assert_eq!(text.lines().count() as u64, live.metrics().accepted);

    let mut replayed = fresh(&cfg);
    let report = replayed.replay(&text);
    assert_eq!(report.corrupt, 0);
    assert_eq!(replayed.snapshot(), live.snapshot());
    let q = Query::Sankey { lo: None, hi: None };
    assert_eq!(replayed.query(&q).unwrap(), live.query(&q).unwrap());
}

#[test]
fn bars_are_flat_after_the_last_event() {
    let cfg = ScenarioConfig::default_scenario();
    let run = run_scenario(&cfg).unwrap();
    let mut state = fresh(&cfg);
    ingest_all(&mut state, run.delivered_events());
    let last = state.ledger().max_window().unwrap();
    let q = Query::Bars {
        area: vec!["use".into(), "disassembly".into()],
        material: "copper".into(),
        hi: Some(last + 5),
    };
    let series: Vec<serde_json::Value> = serde_json::from_str(&state.query(&q).unwrap()).unwrap();
    let tail: BTreeSet<String> = series[last as usize..]
        .iter()
        .map(|p| p["total_kg"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(tail.len(), 1);
}

#[test]
fn detections_feed_the_ledger_with_bom_mass() {
    let cfg = ScenarioConfig::default_scenario();
    let bom = cfg.bill_of_materials().unwrap();
    let xml = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/voc/desktop_open_case.xml"
    ))
    .unwrap();
    let annotation = parse_voc(&xml).unwrap();
    let ctx = ExtractionContext::new("ro3", "use", "disassembly");
    let events = detections_to_events(&annotation.objects, &bom, &ctx).unwrap();

    let mut state = AggregatorState::new(cell_graph(), 60_000, 5_000).unwrap();
    ingest_all(&mut state, events.iter());
    let expected: Mass = annotation
        .objects
        .iter()
        .map(|b| bom.component_mass(b.label).unwrap())
        .sum();
    assert_eq!(state.ledger().total_mass(), expected);
}
