//! Pascal VOC annotation files.
//!
//! Supported subset: `annotation/filename`, `size/{width,height}` and
//! `object/{name, bndbox/{xmin,ymin,xmax,ymax}}`, plus an optional
//! non-standard `object/confidence` written by live detectors. Other
//! elements (`folder`, `source`, `pose`, `difficult`, ...) are ignored.

use roxmltree::{Document, Node};
use thiserror::Error;

use super::{BoundingBox, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct VocAnnotation {
    pub filename: String,
    pub width: i64,
    pub height: i64,
    pub objects: Vec<BoundingBox>,
}

/// Parse failures; `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocError {
    #[error("line {line}: malformed XML: {message}")]
    MalformedXml { line: u32, message: String },
    #[error("line {line}: missing <{element}>")]
    MissingElement { line: u32, element: &'static str },
    #[error("line {line}: <{element}> holds `{text}`, expected an integer")]
    InvalidNumber {
        line: u32,
        element: &'static str,
        text: String,
    },
    #[error("line {line}: unknown label `{name}` (expected cable, screw, fan or motherboard)")]
    UnknownLabel { line: u32, name: String },
    #[error("line {line}: degenerate box ({xmin},{ymin})-({xmax},{ymax})")]
    DegenerateBox {
        line: u32,
        xmin: i64,
        ymin: i64,
        xmax: i64,
        ymax: i64,
    },
    #[error("line {line}: box ({xmin},{ymin})-({xmax},{ymax}) exceeds image {width}x{height}")]
    BoxOutOfBounds {
        line: u32,
        xmin: i64,
        ymin: i64,
        xmax: i64,
        ymax: i64,
        width: i64,
        height: i64,
    },
}

impl VocError {
    pub fn line(&self) -> u32 {
        match self {
            VocError::MalformedXml { line, .. }
            | VocError::MissingElement { line, .. }
            | VocError::InvalidNumber { line, .. }
            | VocError::UnknownLabel { line, .. }
            | VocError::DegenerateBox { line, .. }
            | VocError::BoxOutOfBounds { line, .. } => *line,
        }
    }
}

fn line_of(doc: &Document, node: Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn require<'a, 'i>(
    doc: &Document,
    node: Node<'a, 'i>,
    name: &'static str,
) -> Result<Node<'a, 'i>, VocError> {
    child(node, name).ok_or(VocError::MissingElement {
        line: line_of(doc, node),
        element: name,
    })
}

fn text_of<'a>(node: Node<'a, '_>) -> &'a str {
    node.text().unwrap_or("").trim()
}

/// Integer element; integral decimals such as `"12.0"` are accepted.
fn int_of(doc: &Document, parent: Node, name: &'static str) -> Result<i64, VocError> {
    let node = require(doc, parent, name)?;
    let text = text_of(node);
    if let Ok(v) = text.parse::<i64>() {
        return Ok(v);
    }
    match text.parse::<f64>() {
        Ok(f) if f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(VocError::InvalidNumber {
            line: line_of(doc, node),
            element: name,
            text: text.to_string(),
        }),
    }
}

pub fn parse_voc(xml_text: &str) -> Result<VocAnnotation, VocError> {
    let doc = Document::parse(xml_text).map_err(|e| VocError::MalformedXml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if !root.has_tag_name("annotation") {
        return Err(VocError::MissingElement {
            line: line_of(&doc, root),
            element: "annotation",
        });
    }
    let filename = text_of(require(&doc, root, "filename")?).to_string();
    let size = require(&doc, root, "size")?;
    let width = int_of(&doc, size, "width")?;
    let height = int_of(&doc, size, "height")?;

    let mut objects = Vec::new();
    for obj in root.children().filter(|c| c.has_tag_name("object")) {
        let line = line_of(&doc, obj);
        let name_node = require(&doc, obj, "name")?;
        let name = text_of(name_node);
        let label: Label = name.parse().map_err(|_| VocError::UnknownLabel {
            line: line_of(&doc, name_node),
            name: name.to_string(),
        })?;
        let bnd = require(&doc, obj, "bndbox")?;
        let xmin = int_of(&doc, bnd, "xmin")?;
        let ymin = int_of(&doc, bnd, "ymin")?;
        let xmax = int_of(&doc, bnd, "xmax")?;
        let ymax = int_of(&doc, bnd, "ymax")?;
        let confidence = match child(obj, "confidence") {
            None => None,
            Some(node) => Some(
                text_of(node)
                    .parse::<f64>()
                    .ok()
                    .filter(|c| (0.0..=1.0).contains(c))
                    .ok_or_else(|| VocError::InvalidNumber {
                        line: line_of(&doc, node),
                        element: "confidence",
                        text: text_of(node).to_string(),
                    })?,
            ),
        };
        let bbox = BoundingBox {
            label,
            xmin,
            ymin,
            xmax,
            ymax,
            confidence,
        };
        if bbox.check().is_err() {
            return Err(VocError::DegenerateBox {
                line,
                xmin,
                ymin,
                xmax,
                ymax,
            });
        }
        if xmin < 0 || ymin < 0 || xmax > width || ymax > height {
            return Err(VocError::BoxOutOfBounds {
                line,
                xmin,
                ymin,
                xmax,
                ymax,
                width,
                height,
            });
        }
        objects.push(bbox);
    }
    Ok(VocAnnotation {
        filename,
        width,
        height,
        objects,
    })
}

pub(crate) fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Writes the supported subset back out as VOC XML.
pub fn serialize_voc(a: &VocAnnotation) -> String {
    let mut out = String::new();
    out.push_str("<annotation>\n");
    out.push_str(&format!(
        "\t<filename>{}</filename>\n",
        escape_xml(&a.filename)
    ));
    out.push_str("\t<size>\n");
    out.push_str(&format!("\t\t<width>{}</width>\n", a.width));
    out.push_str(&format!("\t\t<height>{}</height>\n", a.height));
    out.push_str("\t</size>\n");
    for b in &a.objects {
        out.push_str("\t<object>\n");
        out.push_str(&format!("\t\t<name>{}</name>\n", b.label));
        out.push_str("\t\t<bndbox>\n");
        out.push_str(&format!("\t\t\t<xmin>{}</xmin>\n", b.xmin));
        out.push_str(&format!("\t\t\t<ymin>{}</ymin>\n", b.ymin));
        out.push_str(&format!("\t\t\t<xmax>{}</xmax>\n", b.xmax));
        out.push_str(&format!("\t\t\t<ymax>{}</ymax>\n", b.ymax));
        out.push_str("\t\t</bndbox>\n");
        if let Some(c) = b.confidence {
            out.push_str(&format!("\t\t<confidence>{c}</confidence>\n"));
        }
        out.push_str("\t</object>\n");
    }
    out.push_str("</annotation>\n");
    out
}
