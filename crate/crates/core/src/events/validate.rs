use std::fmt;

use super::{EventKind, SynchroEvent};
use crate::mfa::{ProcessGraph, Stage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownProcess(String),
    UnknownMaterial(String),
    NegativeMass,
    SelfLoop,
    KindStageMismatch {
        kind: EventKind,
        from: Stage,
        to: Stage,
    },
    MissingStep,
    UnexpectedStep,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::UnknownProcess(_) => "unknown_process",
            Violation::UnknownMaterial(_) => "unknown_material",
            Violation::NegativeMass => "negative_mass",
            Violation::SelfLoop => "self_loop",
            Violation::KindStageMismatch { .. } => "kind_stage_mismatch",
            Violation::MissingStep => "missing_step",
            Violation::UnexpectedStep => "unexpected_step",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownProcess(id) => write!(f, "unknown process `{id}`"),
            Violation::UnknownMaterial(id) => write!(f, "unknown material `{id}`"),
            Violation::NegativeMass => f.write_str("negative mass"),
            Violation::SelfLoop => f.write_str("from and to are the same process"),
            Violation::KindStageMismatch { kind, from, to } => write!(
                f,
                "kind {} does not fit a {} -> {} flow",
                kind.as_str(),
                from.as_str(),
                to.as_str()
            ),
            Violation::MissingStep => f.write_str("missing step"),
            Violation::UnexpectedStep => f.write_str("step only allowed on assembly_increment"),
        }
    }
}

/// Which stage pairs each event kind may connect.
fn kind_fits(kind: EventKind, from: Stage, to: Stage) -> bool {
    use Stage::*;
    match kind {
        EventKind::AssemblyIncrement => {
            matches!(from, Mining | Manufacturing | External) && matches!(to, Manufacturing | Use)
        }
        EventKind::DisassemblyExtraction => from == Disassembly || to == Disassembly,
        EventKind::SortTransfer => {
            matches!(from, Use | Disassembly | Sorting)
                && matches!(
                    to,
                    Sorting | Disassembly | Manufacturing | Incineration | External
                )
        }
        EventKind::UseTransfer => from == Use || to == Use,
        EventKind::IncinerationTransfer => to == Incineration,
    }
}

/// Collects every rule the event breaks against `graph`; empty means valid.
pub fn validate_event(e: &SynchroEvent, graph: &ProcessGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let from = graph.process(&e.from_process);
    let to = graph.process(&e.to_process);
    if from.is_none() {
        out.push(Violation::UnknownProcess(e.from_process.clone()));
    }
    if to.is_none() && e.to_process != e.from_process {
        out.push(Violation::UnknownProcess(e.to_process.clone()));
    }
    if graph.material(&e.material).is_none() {
        out.push(Violation::UnknownMaterial(e.material.clone()));
    }
    if e.mass_kg.is_negative() {
        out.push(Violation::NegativeMass);
    }
    if e.from_process == e.to_process {
        out.push(Violation::SelfLoop);
    }
    if let (Some(from), Some(to)) = (from, to) {
        if !kind_fits(e.kind, from.stage, to.stage) {
            out.push(Violation::KindStageMismatch {
                kind: e.kind,
                from: from.stage,
                to: to.stage,
            });
        }
    }
    match (e.kind, e.step) {
        (EventKind::AssemblyIncrement, None) => out.push(Violation::MissingStep),
        (EventKind::AssemblyIncrement, Some(_)) | (_, None) => {}
        (_, Some(_)) => out.push(Violation::UnexpectedStep),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfa::{Material, ProcessNode};

    fn graph() -> ProcessGraph {
        let mut g = ProcessGraph::new();
        for (id, stage) in [
            ("mining", Stage::Mining),
            ("manufacturing", Stage::Manufacturing),
            ("use", Stage::Use),
            ("disassembly", Stage::Disassembly),
            ("incineration", Stage::Incineration),
        ] {
            g.register_process(ProcessNode::new(id, stage)).unwrap();
        }
        g.register_material(Material::new("steel", "Steel"))
            .unwrap();
        g
    }

    fn extraction() -> SynchroEvent {
        SynchroEvent {
            node_id: "ro3".into(),
            seq: 1,
            ts_ms: 0,
            kind: EventKind::DisassemblyExtraction,
            from_process: "use".into(),
            to_process: "disassembly".into(),
            material: "steel".into(),
            mass_kg: "0.005".parse().unwrap(),
            step: None,
            item_ref: None,
        }
    }

    #[test]
    fn well_formed_extraction_is_ok() {
        assert!(validate_event(&extraction(), &graph()).is_empty());
        let mut outbound = extraction();
        outbound.from_process = "disassembly".into();
        outbound.to_process = "incineration".into();
        assert!(validate_event(&outbound, &graph()).is_empty());
    }

    #[test]
    fn assembly_requires_step() {
        let mut e = extraction();
        e.kind = EventKind::AssemblyIncrement;
        e.from_process = "manufacturing".into();
        e.to_process = "use".into();
        let v = validate_event(&e, &graph());
        assert_eq!(v, vec![Violation::MissingStep]);
        assert_eq!(v[0].to_string(), "missing step");
        e.step = Some(1);
        assert!(validate_event(&e, &graph()).is_empty());
    }

    #[test]
    fn step_only_on_assembly() {
        let mut e = extraction();
        e.step = Some(4);
        assert_eq!(
            validate_event(&e, &graph()),
            vec![Violation::UnexpectedStep]
        );
    }

    #[test]
    fn unknown_material_reported() {
        let mut e = extraction();
        e.material = "unobtainium".into();
        let v = validate_event(&e, &graph());
        assert_eq!(v, vec![Violation::UnknownMaterial("unobtainium".into())]);
        assert!(v[0].to_string().starts_with("unknown material"));
    }

    #[test]
    fn reports_every_violation_at_once() {
        let mut e = extraction();
        e.from_process = "moon".into();
        e.material = "cheese".into();
        e.mass_kg = "-1".parse().unwrap();
        let codes: Vec<_> = validate_event(&e, &graph())
            .iter()
            .map(Violation::code)
            .collect();
        assert_eq!(
            codes,
            ["unknown_process", "unknown_material", "negative_mass"]
        );
    }

    #[test]
    fn kind_must_match_stages() {
        let mut e = extraction();
        e.kind = EventKind::IncinerationTransfer;
        assert!(matches!(
            validate_event(&e, &graph())[..],
            [Violation::KindStageMismatch { .. }]
        ));
        e.from_process = "use".into();
        e.to_process = "use".into();
        assert!(validate_event(&e, &graph()).contains(&Violation::SelfLoop));
    }
}
