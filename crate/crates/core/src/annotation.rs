//! Text annotation sets, image/object annotations and text-image
//! correlations, with the checks every mutation runs against the lexicon.

use crate::geometry::{char_len, Span};
use crate::lexicon::{Coreness, Frame, Lexicon, Pos};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    #[serde(rename = "FE")]
    Fe,
    #[serde(rename = "GF")]
    Gf,
    #[serde(rename = "PT")]
    Pt,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Fe, Layer::Gf, Layer::Pt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Layer::Fe => "FE",
            Layer::Gf => "GF",
            Layer::Pt => "PT",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FE" => Ok(Layer::Fe),
            "GF" => Ok(Layer::Gf),
            "PT" => Ok(Layer::Pt),
            other => Err(AnnotationError::UnknownLayer(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerLabel {
    pub span: Span,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layers {
    #[serde(rename = "FE")]
    pub fe: Vec<LayerLabel>,
    #[serde(rename = "GF")]
    pub gf: Vec<LayerLabel>,
    #[serde(rename = "PT")]
    pub pt: Vec<LayerLabel>,
}

impl Layers {
    pub fn get(&self, layer: Layer) -> &Vec<LayerLabel> {
        match layer {
            Layer::Fe => &self.fe,
            Layer::Gf => &self.gf,
            Layer::Pt => &self.pt,
        }
    }

    pub fn get_mut(&mut self, layer: Layer) -> &mut Vec<LayerLabel> {
        match layer {
            Layer::Fe => &mut self.fe,
            Layer::Gf => &mut self.gf,
            Layer::Pt => &mut self.pt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiEntry {
    pub fe: String,
    pub ni_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextAnnotationSet {
    pub as_id: u64,
    pub sentence_ref: String,
    pub target: Span,
    pub frame: String,
    /// LU key (`lemma.pos@Frame`) of the target word, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lu: Option<String>,
    pub layers: Layers,
    pub ni_entries: Vec<NiEntry>,
}

impl TextAnnotationSet {
    pub fn fe_is_labeled(&self, fe: &str) -> bool {
        self.layers.fe.iter().any(|l| l.label == fe)
    }
}

/// What an image annotation or correlation points at: an entity chain of a
/// static document or an object track of a video document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ImageTarget {
    Entity(u64),
    Object(u64),
}

impl ImageTarget {
    pub fn id(&self) -> u64 {
        match self {
            ImageTarget::Entity(id) | ImageTarget::Object(id) => *id,
        }
    }
}

impl fmt::Display for ImageTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageTarget::Entity(id) => write!(f, "entity {id}"),
            ImageTarget::Object(id) => write!(f, "object {id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Auto,
    Human,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Auto => "auto",
            Origin::Human => "human",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(Origin::Auto),
            "human" => Some(Origin::Human),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageAnnotation {
    pub ia_id: u64,
    pub target: ImageTarget,
    pub frame: String,
    pub fe: String,
    /// LU key of a noun naming what the object visibly is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_name: Option<String>,
    pub provenance: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correlation {
    pub corr_id: u64,
    pub target: ImageTarget,
    pub sentence_ref: String,
    pub span: Span,
    pub provenance: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("frame element `{fe}` does not belong to frame `{frame}`")]
    FeNotInFrame { fe: String, frame: String },
    #[error("`{label}` is not a valid {layer} label")]
    InvalidLabel { layer: Layer, label: String },
    #[error("{layer} span {span} overlaps an existing label")]
    Overlap { layer: Layer, span: Span },
    #[error("span {span} does not fit a sentence of {len} characters")]
    BadSpan { span: Span, len: usize },
    #[error("no sentence `{0}`")]
    UnknownSentence(String),
    #[error("{0} does not exist in this document")]
    UnknownTarget(ImageTarget),
    #[error("no annotation set {0}")]
    UnknownAnnotationSet(u64),
    #[error("no image annotation {0}")]
    UnknownImageAnnotation(u64),
    #[error("no correlation {0}")]
    UnknownCorrelation(u64),
    #[error("no {layer} label at span {span}")]
    LabelNotFound { layer: Layer, span: Span },
    #[error("unknown layer `{0}`")]
    UnknownLayer(String),
    #[error("`{fe}` is not a core frame element of `{frame}`")]
    NotCoreFe { fe: String, frame: String },
    #[error("`{fe}` is already labeled in the FE layer of annotation set {as_id}")]
    FeAlreadyLabeled { fe: String, as_id: u64 },
    #[error("`{fe}` is marked as null-instantiated in annotation set {as_id}")]
    FeMarkedNi { fe: String, as_id: u64 },
    #[error("`{0}` is not a null instantiation type")]
    UnknownNiType(String),
    #[error("unknown lexical unit `{0}`")]
    UnknownLu(String),
    #[error("lexical unit `{lu}` does not evoke frame `{frame}`")]
    LuNotInFrame { lu: String, frame: String },
    #[error("CV name `{0}` is not a noun")]
    CvNameNotNoun(String),
    #[error("{0} cannot be used in a {1} document")]
    TargetMode(ImageTarget, &'static str),
}

pub(crate) fn frame<'a>(lex: &'a Lexicon, name: &str) -> Result<&'a Frame, AnnotationError> {
    lex.frame_by_name(name)
        .ok_or_else(|| AnnotationError::UnknownFrame(name.to_string()))
}

pub(crate) fn check_span(span: Span, text: &str) -> Result<(), AnnotationError> {
    let len = char_len(text);
    if span.is_empty() || !span.fits(len) {
        return Err(AnnotationError::BadSpan { span, len });
    }
    Ok(())
}

pub(crate) fn check_fe(lex: &Lexicon, frame_name: &str, fe: &str) -> Result<Coreness, AnnotationError> {
    let f = frame(lex, frame_name)?;
    lex.fe_by_name(f.id, fe)
        .map(|fe| fe.coreness)
        .ok_or_else(|| AnnotationError::FeNotInFrame {
            fe: fe.to_string(),
            frame: frame_name.to_string(),
        })
}

/// Resolves `lemma.pos` or `lemma.pos@Frame` to a single canonical key.
pub(crate) fn resolve_lu(lex: &Lexicon, key: &str) -> Result<String, AnnotationError> {
    match lex.lus_by_key(key).as_slice() {
        [lu] => Ok(lex.lu_key(lu)),
        _ => Err(AnnotationError::UnknownLu(key.to_string())),
    }
}

pub(crate) fn check_text_lu(lex: &Lexicon, key: &str, frame_name: &str) -> Result<String, AnnotationError> {
    let f = frame(lex, frame_name)?;
    let lu = lex
        .lus_by_key(key)
        .into_iter()
        .find(|lu| lu.frame_id == f.id)
        .ok_or_else(|| match lex.lus_by_key(key).is_empty() {
            true => AnnotationError::UnknownLu(key.to_string()),
            false => AnnotationError::LuNotInFrame {
                lu: key.to_string(),
                frame: frame_name.to_string(),
            },
        })?;
    Ok(lex.lu_key(lu))
}

pub(crate) fn check_cv_name(lex: &Lexicon, key: &str) -> Result<String, AnnotationError> {
    let canonical = resolve_lu(lex, key)?;
    let lu = lex.lu_by_exact_key(&canonical).expect("resolved key");
    if lu.pos != Pos::N {
        return Err(AnnotationError::CvNameNotNoun(key.to_string()));
    }
    Ok(canonical)
}

pub(crate) fn check_label(
    lex: &Lexicon,
    set: &TextAnnotationSet,
    layer: Layer,
    label: &str,
) -> Result<(), AnnotationError> {
    let ok = match layer {
        Layer::Fe => {
            check_fe(lex, &set.frame, label)?;
            if set.ni_entries.iter().any(|n| n.fe == label) {
                return Err(AnnotationError::FeMarkedNi {
                    fe: label.to_string(),
                    as_id: set.as_id,
                });
            }
            true
        }
        Layer::Gf => lex.gf_values().iter().any(|v| v == label),
        Layer::Pt => lex.pt_values().iter().any(|v| v == label),
    };
    if !ok {
        return Err(AnnotationError::InvalidLabel {
            layer,
            label: label.to_string(),
        });
    }
    Ok(())
}

pub(crate) fn check_ni(lex: &Lexicon, set: &TextAnnotationSet, fe: &str, ni_type: &str) -> Result<(), AnnotationError> {
    if check_fe(lex, &set.frame, fe)? != Coreness::Core {
        return Err(AnnotationError::NotCoreFe {
            fe: fe.to_string(),
            frame: set.frame.clone(),
        });
    }
    if set.fe_is_labeled(fe) {
        return Err(AnnotationError::FeAlreadyLabeled {
            fe: fe.to_string(),
            as_id: set.as_id,
        });
    }
    if !lex.ni_types().iter().any(|t| t == ni_type) {
        return Err(AnnotationError::UnknownNiType(ni_type.to_string()));
    }
    Ok(())
}

/// Full consistency check of one annotation set against its sentence.
pub fn validate_text_set(lex: &Lexicon, set: &TextAnnotationSet, sentence: &str) -> Result<(), AnnotationError> {
    frame(lex, &set.frame)?;
    check_span(set.target, sentence)?;
    if let Some(lu) = &set.lu {
        if check_text_lu(lex, lu, &set.frame)? != *lu {
            return Err(AnnotationError::UnknownLu(lu.clone()));
        }
    }
    for layer in Layer::ALL {
        let labels = set.layers.get(layer);
        for (i, l) in labels.iter().enumerate() {
            check_span(l.span, sentence)?;
            check_label(lex, set, layer, &l.label)?;
            if labels[..i].iter().any(|o| o.span.overlaps(&l.span)) {
                return Err(AnnotationError::Overlap { layer, span: l.span });
            }
        }
    }
    let mut seen = Vec::new();
    for ni in &set.ni_entries {
        if seen.contains(&&ni.fe) {
            return Err(AnnotationError::FeAlreadyLabeled {
                fe: ni.fe.clone(),
                as_id: set.as_id,
            });
        }
        check_ni(lex, set, &ni.fe, &ni.ni_type)?;
        seen.push(&ni.fe);
    }
    Ok(())
}

pub fn validate_image_annotation(lex: &Lexicon, ia: &ImageAnnotation) -> Result<(), AnnotationError> {
    check_fe(lex, &ia.frame, &ia.fe)?;
    if let Some(cv) = &ia.cv_name {
        if check_cv_name(lex, cv)? != *cv {
            return Err(AnnotationError::UnknownLu(cv.clone()));
        }
    }
    Ok(())
}

/// Inserts `label` keeping the layer ordered by span start.
pub(crate) fn insert_label(labels: &mut Vec<LayerLabel>, label: LayerLabel) {
    let at = labels.partition_point(|l| l.span.start < label.span.start);
    labels.insert(at, label);
}
