//! Contact geometry derived from detection boxes, in the image plane.
//!
//! * cable, fan: two antipodal finger contacts at the midpoints of the two
//!   longer sides, so the gripper closes across the short axis
//! * motherboard: the four box corners, the flat area for a suction cup
//! * screw: the box centre, where the screwdriver bit goes
//!
//! Coordinates are computed exactly in half-pixel units and rounded half-up
//! to whole pixels only at the end.

use serde::{Deserialize, Serialize};

use super::{BoundingBox, DegenerateBox, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    AntipodalGrip,
    SuctionQuad,
    ScrewdriverPoint,
}

impl Strategy {
    pub fn for_label(label: Label) -> Self {
        match label {
            Label::Cable | Label::Fan => Strategy::AntipodalGrip,
            Label::Motherboard => Strategy::SuctionQuad,
            Label::Screw => Strategy::ScrewdriverPoint,
        }
    }
}

/// Integer pixel coordinate, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(i64, i64)", into = "(i64, i64)")]
pub struct Pixel {
    pub x: i64,
    pub y: i64,
}

impl From<(i64, i64)> for Pixel {
    fn from((x, y): (i64, i64)) -> Self {
        Pixel { x, y }
    }
}

impl From<Pixel> for (i64, i64) {
    fn from(p: Pixel) -> Self {
        (p.x, p.y)
    }
}

/// Exact coordinate in half-pixel units (`x2 / 2`, `y2 / 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfPixel {
    pub x2: i64,
    pub y2: i64,
}

impl HalfPixel {
    fn corner(x: i64, y: i64) -> Self {
        HalfPixel {
            x2: 2 * x,
            y2: 2 * y,
        }
    }

    /// Round half-up to whole pixels.
    pub fn round(self) -> Pixel {
        Pixel {
            x: (self.x2 + 1).div_euclid(2),
            y: (self.y2 + 1).div_euclid(2),
        }
    }
}

/// Direction along which the two antipodal fingers close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripAxis {
    /// Fingers on the top and bottom edges.
    Vertical,
    /// Fingers on the left and right edges.
    Horizontal,
}

/// Closing axis for an antipodal grip: across the shorter dimension.
/// Square boxes close vertically.
pub fn grip_axis(b: &BoundingBox) -> GripAxis {
    if b.height() > b.width() {
        GripAxis::Horizontal
    } else {
        GripAxis::Vertical
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactPlan {
    pub strategy: Strategy,
    pub points: Vec<Pixel>,
}

impl ContactPlan {
    /// Exact contact points before rounding.
    pub fn exact_points(b: &BoundingBox) -> Result<(Strategy, Vec<HalfPixel>), DegenerateBox> {
        b.check()?;
        let cx2 = b.xmin + b.xmax;
        let cy2 = b.ymin + b.ymax;
        let strategy = Strategy::for_label(b.label);
        let points = match strategy {
            Strategy::AntipodalGrip => match grip_axis(b) {
                GripAxis::Vertical => vec![
                    HalfPixel {
                        x2: cx2,
                        y2: 2 * b.ymin,
                    },
                    HalfPixel {
                        x2: cx2,
                        y2: 2 * b.ymax,
                    },
                ],
                GripAxis::Horizontal => vec![
                    HalfPixel {
                        x2: 2 * b.xmin,
                        y2: cy2,
                    },
                    HalfPixel {
                        x2: 2 * b.xmax,
                        y2: cy2,
                    },
                ],
            },
            Strategy::SuctionQuad => vec![
                HalfPixel::corner(b.xmin, b.ymin),
                HalfPixel::corner(b.xmax, b.ymin),
                HalfPixel::corner(b.xmax, b.ymax),
                HalfPixel::corner(b.xmin, b.ymax),
            ],
            Strategy::ScrewdriverPoint => vec![HalfPixel { x2: cx2, y2: cy2 }],
        };
        Ok((strategy, points))
    }
}

pub fn derive_contacts(b: &BoundingBox) -> Result<ContactPlan, DegenerateBox> {
    let (strategy, exact) = ContactPlan::exact_points(b)?;
    Ok(ContactPlan {
        strategy,
        points: exact.into_iter().map(HalfPixel::round).collect(),
    })
}
