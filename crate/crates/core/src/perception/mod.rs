//! Vision-side boundary: Pascal VOC annotations in, end-effector contact
//! plans, SVG overlays and disassembly events out.

mod bom;
mod contacts;
mod detections;
mod overlay;
mod voc;

pub use bom::{BillOfMaterials, BomError};
pub use contacts::{derive_contacts, grip_axis, ContactPlan, GripAxis, HalfPixel, Pixel, Strategy};
pub use detections::{detections_to_events, ExtractionContext, DEFAULT_MIN_CONFIDENCE};
pub use overlay::render_overlay;
pub use voc::{parse_voc, serialize_voc, VocAnnotation, VocError};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The closed set of component classes the detectors are trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Cable,
    Screw,
    Fan,
    Motherboard,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Cable, Label::Screw, Label::Fan, Label::Motherboard];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Cable => "cable",
            Label::Screw => "screw",
            Label::Fan => "fan",
            Label::Motherboard => "motherboard",
        }
    }

    /// Box colour used in overlays.
    pub fn colour(self) -> &'static str {
        match self {
            Label::Motherboard => "blue",
            Label::Fan => "yellow",
            Label::Cable => "red",
            Label::Screw => "green",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label `{0}` (expected cable, screw, fan or motherboard)")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    /// Case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim();
        Label::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(needle))
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("degenerate box ({xmin},{ymin})-({xmax},{ymax}): needs xmin < xmax and ymin < ymax")]
pub struct DegenerateBox {
    pub xmin: i64,
    pub ymin: i64,
    pub xmax: i64,
    pub ymax: i64,
}

/// Labeled axis-aligned box in integer pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub label: Label,
    pub xmin: i64,
    pub ymin: i64,
    pub xmax: i64,
    pub ymax: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl BoundingBox {
    pub fn new(
        label: Label,
        xmin: i64,
        ymin: i64,
        xmax: i64,
        ymax: i64,
    ) -> Result<Self, DegenerateBox> {
        let b = BoundingBox {
            label,
            xmin,
            ymin,
            xmax,
            ymax,
            confidence: None,
        };
        b.check()?;
        Ok(b)
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = Some(confidence);
        self
    }

    pub fn check(&self) -> Result<(), DegenerateBox> {
        if self.xmin < self.xmax && self.ymin < self.ymax {
            Ok(())
        } else {
            Err(DegenerateBox {
                xmin: self.xmin,
                ymin: self.ymin,
                xmax: self.xmax,
                ymax: self.ymax,
            })
        }
    }

    pub fn width(&self) -> i64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> i64 {
        self.ymax - self.ymin
    }

    pub fn contains(&self, p: Pixel) -> bool {
        (self.xmin..=self.xmax).contains(&p.x) && (self.ymin..=self.ymax).contains(&p.y)
    }
}
