//! Line-oriented JSON encoding of [`SynchroEvent`].
//!
//! One compact object per LF-terminated line:
//!
//! ```text
//! {"v":1,"node_id":"ro3","seq":7,"ts_ms":61000,"kind":"disassembly_extraction","from":"use","to":"disassembly","material":"steel","mass_kg":"0.005000"}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EventKind, SynchroEvent};
use crate::Mass;

pub const WIRE_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("line is not valid UTF-8")]
    NotUtf8,
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("expected a JSON object")]
    NotAnObject,
    #[error("missing schema version `v`")]
    MissingVersion,
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(String),
    #[error("schema violation: {0}")]
    Schema(String),
}

impl WireError {
    pub fn code(&self) -> &'static str {
        match self {
            WireError::NotUtf8 => "not_utf8",
            WireError::MalformedJson(_) => "malformed_json",
            WireError::NotAnObject => "not_an_object",
            WireError::MissingVersion => "missing_version",
            WireError::UnsupportedVersion(_) => "unsupported_version",
            WireError::Schema(_) => "schema",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireV1 {
    v: u64,
    node_id: String,
    seq: u64,
    ts_ms: u64,
    kind: EventKind,
    from: String,
    to: String,
    material: String,
    mass_kg: Mass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    item_ref: Option<String>,
}

impl SynchroEvent {
    /// Encodes the event as one wire line, without the trailing LF.
    pub fn to_wire(&self) -> String {
        let wire = WireV1 {
            v: WIRE_VERSION,
            node_id: self.node_id.clone(),
            seq: self.seq,
            ts_ms: self.ts_ms,
            kind: self.kind,
            from: self.from_process.clone(),
            to: self.to_process.clone(),
            material: self.material.clone(),
            mass_kg: self.mass_kg,
            step: self.step,
            item_ref: self.item_ref.clone(),
        };
        serde_json::to_string(&wire).expect("event serialization is infallible")
    }

    /// Decodes one wire line. A single trailing `\n` or `\r\n` is tolerated.
    pub fn from_wire(line: &str) -> Result<Self, WireError> {
        let line = line
            .strip_suffix('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .unwrap_or(line);
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| WireError::MalformedJson(e.to_string()))?;
        let obj = value.as_object().ok_or(WireError::NotAnObject)?;
        match obj.get("v") {
            None => return Err(WireError::MissingVersion),
            Some(v) if v.as_u64() == Some(WIRE_VERSION) => {}
            Some(v) => return Err(WireError::UnsupportedVersion(v.to_string())),
        }
        let wire: WireV1 =
            serde_json::from_value(value).map_err(|e| WireError::Schema(e.to_string()))?;
        Ok(SynchroEvent {
            node_id: wire.node_id,
            seq: wire.seq,
            ts_ms: wire.ts_ms,
            kind: wire.kind,
            from_process: wire.from,
            to_process: wire.to,
            material: wire.material,
            mass_kg: wire.mass_kg,
            step: wire.step,
            item_ref: wire.item_ref,
        })
    }

    pub fn from_wire_bytes(line: &[u8]) -> Result<Self, WireError> {
        let text = std::str::from_utf8(line).map_err(|_| WireError::NotUtf8)?;
        Self::from_wire(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> SynchroEvent {
        SynchroEvent {
            node_id: "ro2".into(),
            seq: 3,
            ts_ms: 61_000,
            kind: EventKind::AssemblyIncrement,
            from_process: "manufacturing".into(),
            to_process: "use".into(),
            material: "copper".into(),
            mass_kg: "0.4".parse().unwrap(),
            step: Some(2),
            item_ref: Some("pc-1".into()),
        }
    }

    #[test]
    fn encodes_exact_key_order() {
        assert_eq!(
            sample().to_wire(),
            r#"{"v":1,"node_id":"ro2","seq":3,"ts_ms":61000,"kind":"assembly_increment","from":"manufacturing","to":"use","material":"copper","mass_kg":"0.400000","step":2,"item_ref":"pc-1"}"#
        );
        let mut plain = sample();
        plain.step = None;
        plain.item_ref = None;
        assert!(!plain.to_wire().contains("step"));
        assert!(!plain.to_wire().contains('\n'));
    }

    #[test]
    fn decodes_with_trailing_newline() {
        let line = format!("{}\r\n", sample().to_wire());
        assert_eq!(SynchroEvent::from_wire(&line).unwrap(), sample());
    }

    #[test]
    fn accepts_short_decimal() {
        let line = r#"{"v":1,"node_id":"n","seq":1,"ts_ms":0,"kind":"use_transfer","from":"a","to":"b","material":"m","mass_kg":"0.5"}"#;
        assert_eq!(
            SynchroEvent::from_wire(line).unwrap().mass_kg,
            "0.5".parse().unwrap()
        );
    }

    #[test]
    fn rejects_bad_lines() {
        let good = sample().to_wire();
        assert!(matches!(
            SynchroEvent::from_wire("{not json"),
            Err(WireError::MalformedJson(_))
        ));
        assert_eq!(
            SynchroEvent::from_wire("[1,2]"),
            Err(WireError::NotAnObject)
        );
        let no_v = good.replacen(r#""v":1,"#, "", 1);
        assert_eq!(
            SynchroEvent::from_wire(&no_v),
            Err(WireError::MissingVersion)
        );
        let v2 = good.replacen(r#""v":1"#, r#""v":2"#, 1);
        assert!(matches!(
            SynchroEvent::from_wire(&v2),
            Err(WireError::UnsupportedVersion(_))
        ));
        let extra = good.replacen('}', r#","colour":"red"}"#, 1);
        assert!(matches!(
            SynchroEvent::from_wire(&extra),
            Err(WireError::Schema(_))
        ));
        let float_mass = good.replacen(r#""0.400000""#, "0.4", 1);
        assert!(matches!(
            SynchroEvent::from_wire(&float_mass),
            Err(WireError::Schema(_))
        ));
        let too_precise = good.replacen("0.400000", "0.4000001", 1);
        assert!(matches!(
            SynchroEvent::from_wire(&too_precise),
            Err(WireError::Schema(_))
        ));
        let bad_kind = good.replacen("assembly_increment", "teleport", 1);
        assert!(matches!(
            SynchroEvent::from_wire(&bad_kind),
            Err(WireError::Schema(_))
        ));
        assert_eq!(
            SynchroEvent::from_wire_bytes(&[0xff, 0xfe]),
            Err(WireError::NotUtf8)
        );
    }

    fn kind_strategy() -> impl Strategy<Value = EventKind> {
        prop_oneof![
            Just(EventKind::AssemblyIncrement),
            Just(EventKind::DisassemblyExtraction),
            Just(EventKind::SortTransfer),
            Just(EventKind::UseTransfer),
            Just(EventKind::IncinerationTransfer),
        ]
    }

    proptest! {
        #[test]
        fn wire_round_trip(
            node in "[a-z0-9\\-]{1,12}",
            seq in any::<u64>(),
            ts in any::<u64>(),
            kind in kind_strategy(),
            units in -10_000_000_000i128..10_000_000_000i128,
            step in proptest::option::of(any::<u64>()),
            item in proptest::option::of("[ -~]{0,16}"),
        ) {
            let e = SynchroEvent {
                node_id: node,
                seq,
                ts_ms: ts,
                kind,
                from_process: "a".into(),
                to_process: "b".into(),
                material: "m".into(),
                mass_kg: Mass::from_micro_kg(units),
                step,
                item_ref: item,
            };
            let line = e.to_wire();
            prop_assert!(!line.contains('\n'));
            prop_assert_eq!(SynchroEvent::from_wire(&line).unwrap(), e);
        }
    }
}
