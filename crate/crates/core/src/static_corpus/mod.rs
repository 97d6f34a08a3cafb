//! Picture–caption corpora: bundle unpacking, caption chain markup, box
//! annotation files, and linking mentions to boxes by entity id.

#[cfg(feature = "bundle")]
mod bundle;
mod boxes;
mod caption;
mod link;

#[cfg(feature = "bundle")]
pub use bundle::{open_bundle, write_bundle};
pub use boxes::{parse_boxes_xml, render_boxes_xml, BoxRecordError};
pub use caption::{
    parse_caption_chains, render_caption_chains, CaptionError, CaptionMention, ParsedCaption,
};
pub use link::{link_entities, ChainLinkage, CorpusDocument, EntityChain, Linkage, PhraseSpan};

use crate::geometry::BoxGeometry;
use serde::{Deserialize, Serialize};

/// A box from the source dataset, tied to one entity chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub image_ref: String,
    pub entity_id: u32,
    /// Category from the source dataset; empty when the box file has none.
    #[serde(default)]
    pub class_label: String,
    pub geometry: BoxGeometry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleImage {
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

impl BundleImage {
    pub fn stem(&self) -> &str {
        self.file_name
            .rsplit_once('.')
            .map_or(self.file_name.as_str(), |(stem, _)| stem)
    }
}

/// One line of the sentences file: `<image>#<n>\t<caption>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionLine {
    pub image_ref: String,
    pub caption_index: u32,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusBundle {
    pub name: String,
    /// Sorted by file name.
    pub images: Vec<BundleImage>,
    pub sentences_raw: Vec<CaptionLine>,
    /// Grouped by image in `images` order, file order within an image.
    pub boxes_raw: Vec<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BundleError {
    #[error("{0} not found")]
    MissingPart(&'static str),
    #[error("unreadable archive: {0}")]
    Archive(String),
    #[error("unreadable image `{file}`: {reason}")]
    UnreadableImage { file: String, reason: String },
    #[error("malformed box record for `{image}`: {reason}")]
    MalformedBox { image: String, reason: String },
    #[error("malformed sentence line {line}: {reason}")]
    MalformedSentence { line: usize, reason: String },
    #[error("{context} references image `{image}` which is not in the bundle")]
    UnknownImage { context: String, image: String },
    #[error("caption {line}: {source}")]
    Caption {
        line: usize,
        #[source]
        source: CaptionError,
    },
}

impl From<BoxRecordError> for BundleError {
    fn from(e: BoxRecordError) -> Self {
        match e {
            BoxRecordError::Xml(msg) => BundleError::MalformedBox {
                image: "boxes.xml".into(),
                reason: msg,
            },
            BoxRecordError::Record { image, reason } => BundleError::MalformedBox { image, reason },
        }
    }
}

impl CorpusBundle {
    pub fn image(&self, file_name: &str) -> Option<&BundleImage> {
        self.images.iter().find(|i| i.file_name == file_name)
    }

    /// Checks cross-part references and box bounds, and parses every caption.
    pub fn validate(&self) -> Result<(), BundleError> {
        for b in &self.boxes_raw {
            let img = self.image(&b.image_ref).ok_or_else(|| BundleError::UnknownImage {
                context: format!("box for entity {}", b.entity_id),
                image: b.image_ref.clone(),
            })?;
            b.geometry
                .validate_within(img.width, img.height)
                .map_err(|e| BundleError::MalformedBox {
                    image: b.image_ref.clone(),
                    reason: e.to_string(),
                })?;
        }
        let mut seen = std::collections::HashSet::new();
        for (line, c) in self.sentences_raw.iter().enumerate() {
            if self.image(&c.image_ref).is_none() {
                return Err(BundleError::UnknownImage {
                    context: format!("caption {}", line + 1),
                    image: c.image_ref.clone(),
                });
            }
            if !seen.insert((c.image_ref.as_str(), c.caption_index)) {
                return Err(BundleError::MalformedSentence {
                    line: line + 1,
                    reason: format!("duplicate caption {}#{}", c.image_ref, c.caption_index),
                });
            }
            parse_caption_chains(&c.raw).map_err(|source| BundleError::Caption {
                line: line + 1,
                source,
            })?;
        }
        Ok(())
    }
}

/// Parses the sentences file. Lines are `<image>#<n>\t<caption>` or
/// `<image>\t<caption>`; without `#n`, captions of an image are numbered in
/// file order. Blank lines are skipped.
pub fn parse_sentences(text: &str) -> Result<Vec<CaptionLine>, BundleError> {
    let mut out: Vec<CaptionLine> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('\t')
            .ok_or_else(|| BundleError::MalformedSentence {
                line: n + 1,
                reason: "expected `<image>\\t<caption>`".into(),
            })?;
        let (image_ref, caption_index) = match key.rsplit_once('#') {
            Some((image, idx)) => {
                let idx = idx.parse::<u32>().map_err(|_| BundleError::MalformedSentence {
                    line: n + 1,
                    reason: format!("caption index `{idx}` is not an integer"),
                })?;
                (image.to_string(), idx)
            }
            None => {
                let next = out.iter().filter(|c| c.image_ref == key).count() as u32;
                (key.to_string(), next)
            }
        };
        if image_ref.is_empty() {
            return Err(BundleError::MalformedSentence {
                line: n + 1,
                reason: "empty image reference".into(),
            });
        }
        out.push(CaptionLine {
            image_ref,
            caption_index,
            raw: raw.to_string(),
        });
    }
    Ok(out)
}

pub fn render_sentences(lines: &[CaptionLine]) -> String {
    lines
        .iter()
        .map(|c| format!("{}#{}\t{}\n", c.image_ref, c.caption_index, c.raw))
        .collect()
}
