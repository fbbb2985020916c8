use std::fmt::Write;

use super::voc::escape_xml;
use super::{ContactPlan, Strategy, VocAnnotation};

const DOT_RADIUS: i64 = 3;
const SCREWDRIVER_RADIUS: i64 = 6;

/// SVG 1.1 overlay: class-coloured boxes with red contact markers.
///
/// `plans[i]` belongs to `annotation.objects[i]`. Output is byte-stable for
/// a given input.
pub fn render_overlay(annotation: &VocAnnotation, plans: &[ContactPlan]) -> String {
    let (w, h) = (annotation.width, annotation.height);
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "  <title>{}</title>", escape_xml(&annotation.filename));
    let _ = writeln!(
        svg,
        "  <rect class=\"frame\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    for b in &annotation.objects {
        let _ = writeln!(
            svg,
            "  <rect class=\"box {}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
            b.label,
            b.xmin,
            b.ymin,
            b.width(),
            b.height(),
            b.label.colour()
        );
    }
    for plan in plans {
        for p in &plan.points {
            match plan.strategy {
                Strategy::ScrewdriverPoint => {
                    let _ = writeln!(
                        svg,
                        "  <circle class=\"contact screwdriver\" cx=\"{}\" cy=\"{}\" r=\"{SCREWDRIVER_RADIUS}\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>",
                        p.x, p.y
                    );
                }
                Strategy::AntipodalGrip | Strategy::SuctionQuad => {
                    let _ = writeln!(
                        svg,
                        "  <circle class=\"contact\" cx=\"{}\" cy=\"{}\" r=\"{DOT_RADIUS}\" fill=\"red\"/>",
                        p.x, p.y
                    );
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{derive_contacts, BoundingBox, Label};

    fn annotation(objects: Vec<BoundingBox>) -> VocAnnotation {
        VocAnnotation {
            filename: "pc.jpg".into(),
            width: 64,
            height: 48,
            objects,
        }
    }

    #[test]
    fn one_screw() {
        let a = annotation(vec![BoundingBox::new(Label::Screw, 10, 10, 20, 20).unwrap()]);
        let plans: Vec<_> = a
            .objects
            .iter()
            .map(|b| derive_contacts(b).unwrap())
            .collect();
        let svg = render_overlay(&a, &plans);
        assert_eq!(svg.matches("<rect").count(), 2);
        assert_eq!(svg.matches("stroke=\"green\"").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("cx=\"15\" cy=\"15\""));
        assert!(svg.contains("stroke=\"red\""));
    }

    #[test]
    fn empty_annotation_draws_frame_only() {
        let svg = render_overlay(&annotation(vec![]), &[]);
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains("class=\"frame\""));
        assert!(!svg.contains("<circle"));
    }
}
