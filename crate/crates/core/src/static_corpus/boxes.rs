//! Box annotation file, one `<annotation>` per image in the Flickr30k Entities
//! layout:
//!
//! ```xml
//! <annotations>
//!   <annotation>
//!     <filename>girl.jpg</filename>
//!     <object>
//!       <name>1</name>
//!       <class>people</class>
//!       <bndbox><xmin>10</xmin><ymin>20</ymin><xmax>99</xmax><ymax>199</ymax></bndbox>
//!     </object>
//!   </annotation>
//! </annotations>
//! ```
//!
//! Coordinates in the file are inclusive pixel indices; they become half-open
//! boxes (`xmax + 1`) on parse. An object may list several `<name>` entity ids,
//! which yields one box per id. Objects without `<bndbox>` are skipped.

use super::BoundingBox;
use crate::geometry::BoxGeometry;
use crate::xmltree::{self, Element};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoxRecordError {
    #[error("box file is not well-formed XML: {0}")]
    Xml(String),
    #[error("malformed box record for `{image}`: {reason}")]
    Record { image: String, reason: String },
}

pub fn parse_boxes_xml(bytes: &[u8]) -> Result<Vec<BoundingBox>, BoxRecordError> {
    let root = xmltree::parse(bytes).map_err(|e| BoxRecordError::Xml(e.to_string()))?;
    let annotations: Vec<&Element> = match root.name.as_str() {
        "annotation" => vec![&root],
        "annotations" => root.children_named("annotation").collect(),
        other => {
            return Err(BoxRecordError::Xml(format!(
                "unexpected root element <{other}>"
            )))
        }
    };

    let mut out = Vec::new();
    for ann in annotations {
        let image = ann
            .child_text("filename")
            .filter(|f| !f.is_empty())
            .ok_or_else(|| BoxRecordError::Record {
                image: "?".into(),
                reason: "annotation without <filename>".into(),
            })?
            .to_string();
        let record_err = |reason: String| BoxRecordError::Record {
            image: image.clone(),
            reason,
        };
        for obj in ann.children_named("object") {
            let Some(bndbox) = obj.child("bndbox") else {
                continue;
            };
            let coord = |name: &str| -> Result<u32, BoxRecordError> {
                let text = bndbox
                    .child_text(name)
                    .ok_or_else(|| record_err(format!("missing <{name}>")))?;
                text.parse::<u32>()
                    .map_err(|_| record_err(format!("<{name}> `{text}` is not a pixel index")))
            };
            let (xmin, ymin, xmax, ymax) = (coord("xmin")?, coord("ymin")?, coord("xmax")?, coord("ymax")?);
            if xmax <= xmin || ymax <= ymin {
                return Err(record_err(format!(
                    "box ({xmin},{ymin})-({xmax},{ymax}) has max <= min"
                )));
            }
            let geometry = BoxGeometry::new(xmin, ymin, xmax + 1, ymax + 1);
            let class_label = obj.child_text("class").unwrap_or("").to_string();
            let mut names = obj.children_named("name").peekable();
            if names.peek().is_none() {
                return Err(record_err("object without <name>".into()));
            }
            for name in names {
                let id_text = name.text.trim();
                let entity_id = id_text
                    .parse::<u32>()
                    .map_err(|_| record_err(format!("entity id `{id_text}` is not an integer")))?;
                out.push(BoundingBox {
                    image_ref: image.clone(),
                    entity_id,
                    class_label: class_label.clone(),
                    geometry,
                });
            }
        }
    }
    Ok(out)
}

/// Writes boxes grouped per image, images in the given order. Images
/// without boxes still get an (empty) `<annotation>`.
pub fn render_boxes_xml<'a>(images: impl IntoIterator<Item = &'a str>, boxes: &[BoundingBox]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<annotations>\n");
    for image in images {
        out.push_str("  <annotation>\n");
        out.push_str(&format!(
            "    <filename>{}</filename>\n",
            xmltree::escape_text(image)
        ));
        for b in boxes.iter().filter(|b| b.image_ref == image) {
            out.push_str("    <object>\n");
            out.push_str(&format!("      <name>{}</name>\n", b.entity_id));
            if !b.class_label.is_empty() {
                out.push_str(&format!(
                    "      <class>{}</class>\n",
                    xmltree::escape_text(&b.class_label)
                ));
            }
            let g = b.geometry;
            out.push_str(&format!(
                "      <bndbox><xmin>{}</xmin><ymin>{}</ymin><xmax>{}</xmax><ymax>{}</ymax></bndbox>\n",
                g.xmin,
                g.ymin,
                g.xmax - 1,
                g.ymax - 1
            ));
            out.push_str("    </object>\n");
        }
        out.push_str("  </annotation>\n");
    }
    out.push_str("</annotations>\n");
    out
}
