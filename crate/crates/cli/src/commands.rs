use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use synchroflow::aggregator::{AggregatorConfig, AggregatorState, NoJournal, Query};
use synchroflow::perception::{
    derive_contacts, detections_to_events, parse_voc, render_overlay, BillOfMaterials, BoundingBox,
    ContactPlan, ExtractionContext, Label,
};
use synchroflow::sim::{run_scenario, ScenarioConfig};
use synchroflow::Mass;
use synchroflow_server::{ServeError, Server};

use crate::output::{emit_document, runtime, usage, write_file, CliError};
use crate::{ExportArgs, ExportKind, GlobalArgs, GraspArgs};

/// File, then `SYNCHROFLOW_*`, then flags.
fn aggregator_config(g: &GlobalArgs) -> Result<AggregatorConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => AggregatorConfig::load(path).map_err(usage)?,
        None => AggregatorConfig::default(),
    };
    cfg.apply_env().map_err(usage)?;
    if let Some(addr) = g.listen {
        cfg.listen = addr;
    }
    if let Some(addr) = g.http {
        cfg.http = addr;
    }
    if let Some(path) = &g.journal {
        cfg.journal = Some(path.clone());
    }
    if let Some(w) = g.window_ms {
        cfg.window_width_ms = w;
    }
    if let Some(s) = g.skew_ms {
        cfg.skew_allowance_ms = s;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

pub fn serve(g: &GlobalArgs) -> Result<(), CliError> {
    let cfg = aggregator_config(g)?;
    if let Some(parent) = cfg.journal.as_deref().and_then(Path::parent) {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| runtime(format!("{}: {e}", parent.display())))?;
        }
    }
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .try_init();
    let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
    rt.block_on(async {
        let server = Server::start(&cfg).await.map_err(|e| match e {
            ServeError::Config(_) => usage(e),
            _ => runtime(e),
        })?;
        let report = server.replay_report();
        if g.json {
            #[derive(Serialize)]
            struct Listening {
                http: String,
                ingest: String,
                replayed: u64,
            }
            let line = serde_json::to_string(&Listening {
                http: server.http_addr().to_string(),
                ingest: server.ingest_addr().to_string(),
                replayed: report.applied,
            })
            .expect("static shape");
            println!("{line}");
        } else {
            println!(
                "ingest on {}, queries on http://{}, {} journal events replayed",
                server.ingest_addr(),
                server.http_addr(),
                report.applied
            );
        }
        wait_for_signal().await;
        server
            .shutdown()
            .await
            .map_err(|e| runtime(format!("shutdown: {e}")))
    })
}

async fn wait_for_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    delivered: usize,
    duplicate_copies: usize,
    lost: usize,
    mass_by_material_kg: BTreeMap<String, Mass>,
    out_dir: &'a Path,
    sent: usize,
}

pub fn simulate(g: &GlobalArgs, out: &Path) -> Result<(), CliError> {
    let mut scenario = match &g.config {
        Some(path) => ScenarioConfig::load(path).map_err(usage)?,
        None => ScenarioConfig::default_scenario(),
    };
    if let Some(seed) = g.seed {
        scenario.network.rng_seed = seed;
    }
    if let Some(w) = g.window_ms {
        scenario.window_width_ms = w;
    }
    if let Some(s) = g.skew_ms {
        scenario.skew_allowance_ms = s;
    }
    scenario.validate().map_err(usage)?;
    let run = run_scenario(&scenario).map_err(usage)?;
    run.write_logs(out)
        .map_err(|e| runtime(format!("{}: {e}", out.display())))?;

    // What the ledger will hold once every sent event is in.
    let mut state = AggregatorState::new(
        scenario.graph.clone(),
        scenario.window_width_ms,
        scenario.skew_allowance_ms,
    )
    .map_err(usage)?;
    for e in run.sent_events() {
        state.ingest_line(e.to_wire().as_bytes(), &mut NoJournal);
    }
    let mut by_material: BTreeMap<String, Mass> = BTreeMap::new();
    for ((_, _, material), mass) in state.ledger().totals_by_flow() {
        *by_material.entry(material).or_default() += mass;
    }
    let distinct: std::collections::BTreeSet<usize> =
        run.delivered.iter().map(|d| d.sent_index).collect();
    let summary = SimulateSummary {
        delivered: run.delivered.len(),
        duplicate_copies: run.delivered.len() - distinct.len(),
        lost: run.sent.len() - distinct.len(),
        mass_by_material_kg: by_material,
        out_dir: out,
        sent: run.sent.len(),
    };
    if g.json {
        println!("{}", serde_json::to_string(&summary).expect("static shape"));
    } else {
        println!(
            "{} events sent, {} delivered ({} duplicate copies, {} lost) -> {}",
            summary.sent,
            summary.delivered,
            summary.duplicate_copies,
            summary.lost,
            out.display()
        );
        for (material, mass) in &summary.mass_by_material_kg {
            println!("  {material:<12} {mass:>14} kg");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PlanDoc<'a> {
    index: usize,
    #[serde(rename = "box")]
    bbox: &'a BoundingBox,
    #[serde(flatten)]
    plan: &'a ContactPlan,
}

#[derive(Serialize)]
struct GraspSummary {
    boxes: usize,
    counts: BTreeMap<Label, usize>,
    events: usize,
    plans: usize,
}

fn load_bom(path: Option<&Path>) -> Result<BillOfMaterials, CliError> {
    match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            BillOfMaterials::from_json(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
        None => ScenarioConfig::default_scenario()
            .bill_of_materials()
            .map_err(runtime),
    }
}

pub fn grasp(g: &GlobalArgs, args: &GraspArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.min_confidence) {
        return Err(usage(format!(
            "--min-confidence {} outside [0, 1]",
            args.min_confidence
        )));
    }
    let xml = std::fs::read_to_string(&args.voc)
        .map_err(|e| usage(format!("{}: {e}", args.voc.display())))?;
    let annotation = parse_voc(&xml).map_err(|e| usage(format!("{}: {e}", args.voc.display())))?;
    let bom = load_bom(args.bom.as_deref())?;

    let plans: Vec<ContactPlan> = annotation
        .objects
        .iter()
        .map(|b| derive_contacts(b).map_err(|e| usage(format!("{}: {e}", args.voc.display()))))
        .collect::<Result<_, _>>()?;
    let ctx = ExtractionContext {
        seq_start: args.seq_start,
        ts_ms: args.ts_ms,
        min_confidence: args.min_confidence,
        ..ExtractionContext::new(&args.node, &args.from, &args.to)
    };
    let events = detections_to_events(&annotation.objects, &bom, &ctx).map_err(|label| {
        let origin = args
            .bom
            .as_deref()
            .map_or_else(|| "built-in BOM".to_string(), |p| p.display().to_string());
        usage(format!("{origin}: no entry for `{label}`"))
    })?;

    if let Some(path) = &args.plans {
        let docs: Vec<PlanDoc> = annotation
            .objects
            .iter()
            .zip(&plans)
            .enumerate()
            .map(|(index, (bbox, plan))| PlanDoc { index, bbox, plan })
            .collect();
        write_file(
            path,
            &format!("{}\n", serde_json::to_string(&docs).expect("static shape")),
        )?;
    }
    if let Some(path) = &args.svg {
        write_file(path, &render_overlay(&annotation, &plans))?;
    }
    if let Some(path) = &args.events {
        let lines: String = events.iter().map(|e| e.to_wire() + "\n").collect();
        write_file(path, &lines)?;
    }

    let mut counts = BTreeMap::new();
    for b in &annotation.objects {
        *counts.entry(b.label).or_insert(0) += 1;
    }
    let summary = GraspSummary {
        boxes: annotation.objects.len(),
        counts,
        events: events.len(),
        plans: plans.len(),
    };
    if g.json {
        println!("{}", serde_json::to_string(&summary).expect("static shape"));
    } else {
        for label in Label::ALL {
            println!(
                "{label:<12} {}",
                summary.counts.get(&label).copied().unwrap_or(0)
            );
        }
        println!(
            "{} contact plans, {} extraction events",
            summary.plans, summary.events
        );
    }
    Ok(())
}

fn journal_path<'a>(g: &'a GlobalArgs, explicit: Option<&'a Path>) -> Result<&'a Path, CliError> {
    explicit
        .or(g.journal.as_deref())
        .ok_or_else(|| usage("no journal given; pass a path or --journal"))
}

/// Replays the journal, reporting corrupt lines on stderr. Fails only when
/// every line is corrupt.
fn replay_journal(g: &GlobalArgs, path: &Path) -> Result<AggregatorState, CliError> {
    let cfg = aggregator_config(g)?;
    let mut state = cfg.new_state().map_err(usage)?;
    let bytes = std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let report = state.replay(&String::from_utf8_lossy(&bytes));
    if report.corrupt > 0 {
        eprintln!(
            "{}: {} of {} lines corrupt and skipped",
            path.display(),
            report.corrupt,
            report.lines
        );
    }
    if report.all_corrupt() {
        return Err(runtime(format!("{}: no usable lines", path.display())));
    }
    Ok(state)
}

pub fn export(g: &GlobalArgs, args: &ExportArgs) -> Result<(), CliError> {
    let query = match args.kind {
        ExportKind::Sankey => Query::Sankey {
            lo: args.lo,
            hi: args.hi,
        },
        ExportKind::Bars => Query::Bars {
            area: args
                .area
                .as_deref()
                .ok_or_else(|| usage("--kind bars needs --area"))?
                .split(',')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
            material: args
                .material
                .clone()
                .ok_or_else(|| usage("--kind bars needs --material"))?,
            hi: args.hi,
        },
        ExportKind::Balance => Query::Balance { hi: args.hi },
        ExportKind::Snapshot => Query::Snapshot,
    };
    let path: PathBuf = journal_path(g, args.path.as_deref())?.to_path_buf();
    let state = replay_journal(g, &path)?;
    let doc = state.query(&query).map_err(|e| usage(e.to_json()))?;
    emit_document(args.out.as_deref(), &doc)
}

pub fn replay(g: &GlobalArgs, path: Option<&Path>) -> Result<(), CliError> {
    let path = journal_path(g, path)?;
    let state = replay_journal(g, path)?;
    if !g.json {
        let m = state.metrics();
        eprintln!(
            "{}: {} events applied, {} corrupt lines, watermark {} ms",
            path.display(),
            m.accepted,
            m.corrupt_journal_lines,
            state.windows().watermark_ms()
        );
    }
    emit_document(None, &state.snapshot())
}
