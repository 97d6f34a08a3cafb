use super::{parse_caption_chains, BoundingBox, BundleError, CorpusBundle};
use crate::geometry::Span;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainLinkage {
    Linked,
    /// Mentioned in the caption, no box in the image.
    PhraseOnly,
    /// Boxed in the image, not mentioned in the caption.
    BoxOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseSpan {
    pub sentence_index: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityChain {
    pub entity_id: u32,
    pub entity_type: String,
    pub phrase_spans: Vec<PhraseSpan>,
    pub boxes: Vec<BoundingBox>,
    pub linkage: ChainLinkage,
}

impl EntityChain {
    fn classify(&mut self) {
        self.linkage = match (self.phrase_spans.is_empty(), self.boxes.is_empty()) {
            (false, false) => ChainLinkage::Linked,
            (false, true) => ChainLinkage::PhraseOnly,
            _ => ChainLinkage::BoxOnly,
        };
    }
}

/// One image–caption pair with its chains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub doc_id: String,
    pub image_ref: String,
    pub image_width: u32,
    pub image_height: u32,
    /// Caption with chain markup removed.
    pub sentence: String,
    /// Ordered by entity id.
    pub chains: Vec<EntityChain>,
    pub source_corpus: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linkage {
    pub documents: Vec<CorpusDocument>,
    /// Boxes of images that have no caption.
    pub orphan_boxes: Vec<BoundingBox>,
}

/// Builds one document per (image, caption) pair, joining caption mentions
/// and image boxes that share an entity id. Every box of an image appears in
/// every document of that image; unmatched sides are kept and flagged.
pub fn link_entities(bundle: &CorpusBundle) -> Result<Linkage, BundleError> {
    let mut documents = Vec::with_capacity(bundle.sentences_raw.len());
    for (line, caption) in bundle.sentences_raw.iter().enumerate() {
        let image = bundle
            .image(&caption.image_ref)
            .ok_or_else(|| BundleError::UnknownImage {
                context: format!("caption {}", line + 1),
                image: caption.image_ref.clone(),
            })?;
        let parsed = parse_caption_chains(&caption.raw).map_err(|source| BundleError::Caption {
            line: line + 1,
            source,
        })?;

        let mut chains: BTreeMap<u32, EntityChain> = BTreeMap::new();
        for m in &parsed.mentions {
            let chain = chains.entry(m.entity_id).or_insert_with(|| EntityChain {
                entity_id: m.entity_id,
                entity_type: m.entity_type.clone(),
                phrase_spans: Vec::new(),
                boxes: Vec::new(),
                linkage: ChainLinkage::PhraseOnly,
            });
            chain.phrase_spans.push(PhraseSpan {
                sentence_index: 0,
                span: m.span,
            });
        }
        for b in bundle.boxes_raw.iter().filter(|b| b.image_ref == image.file_name) {
            let chain = chains.entry(b.entity_id).or_insert_with(|| EntityChain {
                entity_id: b.entity_id,
                entity_type: if b.class_label.is_empty() {
                    "unknown".to_string()
                } else {
                    b.class_label.clone()
                },
                phrase_spans: Vec::new(),
                boxes: Vec::new(),
                linkage: ChainLinkage::BoxOnly,
            });
            let mut b = b.clone();
            if b.class_label.is_empty() {
                b.class_label = chain.entity_type.clone();
            }
            chain.boxes.push(b);
        }
        let chains: Vec<EntityChain> = chains
            .into_values()
            .map(|mut c| {
                c.classify();
                c
            })
            .collect();

        documents.push(CorpusDocument {
            doc_id: format!("{}_{}", image.stem(), caption.caption_index),
            image_ref: image.file_name.clone(),
            image_width: image.width,
            image_height: image.height,
            sentence: parsed.plain,
            chains,
            source_corpus: bundle.name.clone(),
        });
    }

    let orphan_boxes = bundle
        .boxes_raw
        .iter()
        .filter(|b| !bundle.sentences_raw.iter().any(|c| c.image_ref == b.image_ref))
        .cloned()
        .collect();

    Ok(Linkage {
        documents,
        orphan_boxes,
    })
}
