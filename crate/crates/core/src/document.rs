//! The document aggregate: everything annotated about one image–caption
//! pair or one video, with the mutating operations that keep it valid.

use crate::annotation::{self, *};
use crate::geometry::{BoxGeometry, Span};
use crate::lexicon::Lexicon;
use crate::preannotate::{
    map_cv_class_to_lu, preannotate_sentence, CvClassMapping, PreannotateError, Provenance, TargetCandidate,
};
use crate::static_corpus::{ChainLinkage, CorpusDocument, EntityChain};
use crate::tracking::{InterpolationTracker, ObjectTrack, TrackBook, TrackError, TrackOrigin, VideoBounds};
use crate::video::{Detection, DraftBook, DraftEdit, DraftError, DraftStatus, FrameRate, SentenceDraft, TranscriptWord};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentMode {
    Static,
    Video,
}

impl DocumentMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DocumentMode::Static => "static",
            DocumentMode::Video => "video",
        }
    }
}

impl fmt::Display for DocumentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaInfo {
    /// Image file name or video identifier.
    pub media_ref: String,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<FrameRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<u64>,
}

impl MediaInfo {
    pub fn bounds(&self) -> VideoBounds {
        VideoBounds {
            width: self.width,
            height: self.height,
            frame_count: self.frame_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ms: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_ms: Option<i64>,
}

/// Audit record left behind by a deletion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tombstone {
    pub kind: String,
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub next_as_id: u64,
    pub next_ia_id: u64,
    pub next_corr_id: u64,
    pub next_sentence: u64,
}

impl Default for Counters {
    fn default() -> Self {
        Counters {
            next_as_id: 1,
            next_ia_id: 1,
            next_corr_id: 1,
            next_sentence: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub corpus: String,
    pub mode: DocumentMode,
    pub media: MediaInfo,
    pub sentences: Vec<Sentence>,
    #[serde(default)]
    pub chains: Vec<EntityChain>,
    #[serde(default)]
    pub cv_mappings: Vec<CvClassMapping>,
    #[serde(default)]
    pub detections: Vec<Detection>,
    #[serde(default)]
    pub drafts: DraftBook,
    #[serde(default)]
    pub tracks: TrackBook,
    #[serde(default)]
    pub candidates: Vec<TargetCandidate>,
    pub text_sets: BTreeMap<u64, TextAnnotationSet>,
    pub image_annotations: BTreeMap<u64, ImageAnnotation>,
    pub correlations: BTreeMap<u64, Correlation>,
    #[serde(default)]
    pub tombstones: Vec<Tombstone>,
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Draft(#[from] DraftError),
    #[error(transparent)]
    Preannotate(#[from] PreannotateError),
    #[error("{action} needs a {expected} document")]
    WrongMode {
        expected: DocumentMode,
        action: &'static str,
    },
    #[error("no target candidate at {sentence_ref}:{start}")]
    UnknownCandidate { sentence_ref: String, start: usize },
    #[error("no entity chain {0}")]
    UnknownChain(u64),
    #[error("{path}: {source}")]
    At {
        path: String,
        #[source]
        source: Box<DocumentError>,
    },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

impl DocumentError {
    fn at(path: impl Into<String>, source: impl Into<DocumentError>) -> Self {
        DocumentError::At {
            path: path.into(),
            source: Box::new(source.into()),
        }
    }

    /// The innermost error, with location wrappers removed.
    pub fn root(&self) -> &DocumentError {
        match self {
            DocumentError::At { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use AnnotationError as A;
        match self.root() {
            DocumentError::Annotation(e) => match e {
                A::UnknownFrame(_) => "unknown_frame",
                A::FeNotInFrame { .. } => "fe_not_in_frame",
                A::InvalidLabel { .. } => "invalid_label",
                A::Overlap { .. } => "span_overlap",
                A::BadSpan { .. } => "bad_span",
                A::UnknownSentence(_) => "unknown_sentence",
                A::UnknownTarget(_) => "dangling_reference",
                A::UnknownAnnotationSet(_) => "unknown_annotation_set",
                A::UnknownImageAnnotation(_) => "unknown_image_annotation",
                A::UnknownCorrelation(_) => "unknown_correlation",
                A::LabelNotFound { .. } => "label_not_found",
                A::UnknownLayer(_) => "unknown_layer",
                A::NotCoreFe { .. } => "ni_not_core",
                A::FeAlreadyLabeled { .. } => "ni_fe_labeled",
                A::FeMarkedNi { .. } => "fe_marked_ni",
                A::UnknownNiType(_) => "invalid_ni_type",
                A::UnknownLu(_) => "unknown_lu",
                A::LuNotInFrame { .. } => "lu_not_in_frame",
                A::CvNameNotNoun(_) => "cv_name_not_noun",
                A::TargetMode(..) => "target_mode_mismatch",
            },
            DocumentError::Track(e) => match e {
                TrackError::UnknownObject(_) => "unknown_object",
                TrackError::UnknownDetection(_) => "unknown_detection",
                TrackError::DetectionConsumed(_) => "detection_consumed",
                TrackError::Box(_) => "invalid_box",
                TrackError::FrameOutOfRange { .. } => "frame_out_of_range",
                TrackError::IllegalTransition { .. } => "illegal_transition",
                TrackError::FrameBeforeSegment { .. } => "frame_before_segment",
                TrackError::BeforeLastKeyframe { .. } => "before_last_keyframe",
                TrackError::ResumeOverlap { .. } => "resume_overlap",
                TrackError::IdNotIncreasing { .. } => "id_not_increasing",
                TrackError::Invariant { .. } => "track_invariant",
            },
            DocumentError::Draft(e) => match e {
                DraftError::UnknownDraft(_) => "unknown_draft",
                DraftError::BadIndex { .. } => "bad_word_index",
                DraftError::Finalized(_) => "draft_finalized",
                DraftError::NothingToMerge(_) => "nothing_to_merge",
                DraftError::OrderViolation { .. } => "order_violation",
                DraftError::BadText => "bad_word_text",
                DraftError::Invariant { .. } => "draft_invariant",
            },
            DocumentError::Preannotate(_) => "not_a_candidate",
            DocumentError::WrongMode { .. } => "wrong_mode",
            DocumentError::UnknownCandidate { .. } => "unknown_candidate",
            DocumentError::UnknownChain(_) => "unknown_chain",
            DocumentError::Invalid { .. } => "invalid_document",
            DocumentError::At { .. } => unreachable!("root strips location wrappers"),
        }
    }

    /// Whether the error means "no such thing" rather than "not allowed".
    pub fn is_not_found(&self) -> bool {
        matches!(
            self.code(),
            "unknown_sentence"
                | "unknown_annotation_set"
                | "unknown_image_annotation"
                | "unknown_correlation"
                | "unknown_object"
                | "unknown_detection"
                | "unknown_draft"
                | "unknown_candidate"
                | "unknown_chain"
        )
    }
}

type Result<T, E = DocumentError> = std::result::Result<T, E>;

impl Document {
    pub fn empty(corpus: &str, doc_id: &str, mode: DocumentMode, media: MediaInfo) -> Self {
        Document {
            doc_id: doc_id.to_string(),
            corpus: corpus.to_string(),
            mode,
            media,
            sentences: Vec::new(),
            chains: Vec::new(),
            cv_mappings: Vec::new(),
            detections: Vec::new(),
            drafts: DraftBook::default(),
            tracks: TrackBook::default(),
            candidates: Vec::new(),
            text_sets: BTreeMap::new(),
            image_annotations: BTreeMap::new(),
            correlations: BTreeMap::new(),
            tombstones: Vec::new(),
            counters: Counters::default(),
        }
    }

    /// Builds a static document from a linked image–caption pair. Each
    /// phrase of a chain that also has a box seeds a correlation, and each
    /// distinct box class label gets a CV mapping.
    pub fn from_static(corpus: &str, source: &CorpusDocument, lex: &Lexicon, language: &str) -> Self {
        let media = MediaInfo {
            media_ref: source.image_ref.clone(),
            width: source.image_width,
            height: source.image_height,
            fps: None,
            frame_count: None,
        };
        let mut doc = Document::empty(corpus, &source.doc_id, DocumentMode::Static, media);
        let sentence_ref = doc.add_sentence(source.sentence.clone(), None, None);
        doc.chains = source.chains.clone();
        let mut labels: Vec<&str> = source
            .chains
            .iter()
            .flat_map(|c| c.boxes.iter().map(|b| b.class_label.as_str()))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        doc.cv_mappings = labels
            .into_iter()
            .map(|l| map_cv_class_to_lu(l, lex, language))
            .collect();
        for chain in &source.chains {
            if chain.linkage != ChainLinkage::Linked {
                continue;
            }
            for phrase in &chain.phrase_spans {
                let corr_id = doc.counters.next_corr_id;
                doc.counters.next_corr_id += 1;
                doc.correlations.insert(
                    corr_id,
                    Correlation {
                        corr_id,
                        target: ImageTarget::Entity(chain.entity_id as u64),
                        sentence_ref: sentence_ref.clone(),
                        span: phrase.span,
                        provenance: Origin::Auto,
                    },
                );
            }
        }
        doc
    }

    /// Builds a video document whose drafts come from segmenting `words`.
    pub fn from_video(
        corpus: &str,
        doc_id: &str,
        media: MediaInfo,
        words: &[TranscriptWord],
        detections: Vec<Detection>,
        pause_threshold_ms: i64,
    ) -> Self {
        let mut doc = Document::empty(corpus, doc_id, DocumentMode::Video, media);
        doc.drafts = DraftBook::from_words(words, pause_threshold_ms);
        doc.detections = detections;
        doc
    }

    /// Appends a sentence and returns its id.
    pub fn add_sentence(&mut self, text: String, start_ms: Option<i64>, end_ms: Option<i64>) -> String {
        let id = format!("s{}", self.counters.next_sentence);
        self.counters.next_sentence += 1;
        self.sentences.push(Sentence {
            id: id.clone(),
            text,
            start_ms,
            end_ms,
        });
        id
    }

    pub fn sentence(&self, sentence_ref: &str) -> Result<&Sentence> {
        self.sentences
            .iter()
            .find(|s| s.id == sentence_ref)
            .ok_or_else(|| AnnotationError::UnknownSentence(sentence_ref.to_string()).into())
    }

    fn require(&self, mode: DocumentMode, action: &'static str) -> Result<()> {
        if self.mode != mode {
            return Err(DocumentError::WrongMode { expected: mode, action });
        }
        Ok(())
    }

    pub fn chain(&self, entity_id: u64) -> Option<&EntityChain> {
        self.chains.iter().find(|c| c.entity_id as u64 == entity_id)
    }

    fn check_target(&self, target: ImageTarget) -> Result<()> {
        let exists = match (target, self.mode) {
            (ImageTarget::Entity(id), DocumentMode::Static) => self.chain(id).is_some(),
            (ImageTarget::Object(id), DocumentMode::Video) => self.tracks.tracks.contains_key(&id),
            _ => return Err(AnnotationError::TargetMode(target, self.mode.as_str()).into()),
        };
        if !exists {
            return Err(AnnotationError::UnknownTarget(target).into());
        }
        Ok(())
    }

    // ---- pre-annotation ----

    /// Recomputes target candidates for every sentence. Annotator choices on
    /// the same word survive when their frame is still a candidate. Returns
    /// the number of candidates.
    pub fn preannotate(&mut self, lex: &Lexicon) -> usize {
        let previous = std::mem::take(&mut self.candidates);
        for sentence in &self.sentences {
            for mut cand in preannotate_sentence(&sentence.id, &sentence.text, lex) {
                let human = previous.iter().find(|p| {
                    p.provenance == Provenance::HumanOverride && p.sentence_ref == cand.sentence_ref && p.span == cand.span
                });
                if let Some(chosen) = human.and_then(|p| p.chosen_frame.as_deref()) {
                    let _ = cand.override_choice(chosen);
                }
                self.candidates.push(cand);
            }
        }
        self.candidates.len()
    }

    pub fn override_candidate(&mut self, sentence_ref: &str, start: usize, frame: &str) -> Result<&TargetCandidate> {
        let cand = self
            .candidates
            .iter_mut()
            .find(|c| c.sentence_ref == sentence_ref && c.span.start == start)
            .ok_or_else(|| DocumentError::UnknownCandidate {
                sentence_ref: sentence_ref.to_string(),
                start,
            })?;
        cand.override_choice(frame)?;
        Ok(cand)
    }

    // ---- drafts ----

    /// Applies a draft edit; finalizing a draft appends it as a sentence.
    pub fn edit_draft(&mut self, draft_id: u64, edit: DraftEdit) -> Result<Vec<SentenceDraft>> {
        self.require(DocumentMode::Video, "editing drafts")?;
        let finalize = edit == DraftEdit::Finalize;
        let changed = self.drafts.apply(draft_id, edit)?;
        if finalize {
            let d = &changed[0];
            debug_assert_eq!(d.status, DraftStatus::Finalized);
            self.add_sentence(d.text.clone(), Some(d.start_ms), Some(d.end_ms));
        }
        Ok(changed)
    }

    // ---- tracks ----

    pub fn create_object(&mut self, frame: u64, bbox: BoxGeometry, origin: TrackOrigin) -> Result<&ObjectTrack> {
        self.require(DocumentMode::Video, "creating objects")?;
        let bounds = self.media.bounds();
        Ok(self.tracks.create_object(&bounds, frame, bbox, origin)?)
    }

    pub fn accept_detection(&mut self, detection_id: u64) -> Result<&ObjectTrack> {
        self.require(DocumentMode::Video, "accepting detections")?;
        let bounds = self.media.bounds();
        Ok(self.tracks.accept_detection(&bounds, &mut self.detections, detection_id)?)
    }

    pub fn delete_detection(&mut self, detection_id: u64) -> Result<()> {
        self.require(DocumentMode::Video, "deleting detections")?;
        Ok(TrackBook::delete_detection(&mut self.detections, detection_id)?)
    }

    pub fn set_keyframe(&mut self, object_id: u64, frame: u64, bbox: BoxGeometry) -> Result<&ObjectTrack> {
        self.require(DocumentMode::Video, "setting keyframes")?;
        let bounds = self.media.bounds();
        Ok(self.tracks.set_keyframe(&bounds, object_id, frame, bbox)?)
    }

    pub fn auto_track(&mut self, object_id: u64, until_frame: u64) -> Result<&ObjectTrack> {
        self.require(DocumentMode::Video, "tracking")?;
        let bounds = self.media.bounds();
        Ok(self
            .tracks
            .auto_track(&bounds, object_id, until_frame, &InterpolationTracker)?)
    }

    pub fn pause_object(&mut self, object_id: u64) -> Result<&ObjectTrack> {
        Ok(self.tracks.pause(object_id)?)
    }

    pub fn resume_object(&mut self, object_id: u64, frame: u64, bbox: BoxGeometry) -> Result<&ObjectTrack> {
        let bounds = self.media.bounds();
        Ok(self.tracks.resume(&bounds, object_id, frame, bbox)?)
    }

    pub fn end_object(&mut self, object_id: u64) -> Result<&ObjectTrack> {
        Ok(self.tracks.end(object_id)?)
    }

    /// Deletes a track with its annotations and correlations.
    pub fn delete_object(&mut self, object_id: u64) -> Result<ObjectTrack> {
        let track = self.tracks.delete(object_id)?;
        self.tombstones.push(Tombstone {
            kind: "object".into(),
            id: object_id,
            cause: None,
        });
        self.cascade(ImageTarget::Object(object_id));
        Ok(track)
    }

    /// Deletes an entity chain of a static document, with its annotations
    /// and correlations.
    pub fn delete_chain(&mut self, entity_id: u64) -> Result<EntityChain> {
        self.require(DocumentMode::Static, "deleting entity chains")?;
        let pos = self
            .chains
            .iter()
            .position(|c| c.entity_id as u64 == entity_id)
            .ok_or(DocumentError::UnknownChain(entity_id))?;
        let chain = self.chains.remove(pos);
        self.tombstones.push(Tombstone {
            kind: "entity".into(),
            id: entity_id,
            cause: None,
        });
        self.cascade(ImageTarget::Entity(entity_id));
        Ok(chain)
    }

    fn cascade(&mut self, target: ImageTarget) {
        let cause = Some(target.to_string());
        let ias: Vec<u64> = self
            .image_annotations
            .values()
            .filter(|ia| ia.target == target)
            .map(|ia| ia.ia_id)
            .collect();
        for id in ias {
            self.image_annotations.remove(&id);
            self.tombstones.push(Tombstone {
                kind: "image_annotation".into(),
                id,
                cause: cause.clone(),
            });
        }
        let corrs: Vec<u64> = self
            .correlations
            .values()
            .filter(|c| c.target == target)
            .map(|c| c.corr_id)
            .collect();
        for id in corrs {
            self.correlations.remove(&id);
            self.tombstones.push(Tombstone {
                kind: "correlation".into(),
                id,
                cause: cause.clone(),
            });
        }
    }

    // ---- text annotation ----

    pub fn create_text_as(
        &mut self,
        lex: &Lexicon,
        sentence_ref: &str,
        target: Span,
        frame: &str,
        lu: Option<&str>,
    ) -> Result<&TextAnnotationSet> {
        annotation::frame(lex, frame)?;
        let sentence = self.sentence(sentence_ref)?;
        annotation::check_span(target, &sentence.text)?;
        let lu = lu.map(|k| annotation::check_text_lu(lex, k, frame)).transpose()?;
        let as_id = self.counters.next_as_id;
        self.counters.next_as_id += 1;
        let set = TextAnnotationSet {
            as_id,
            sentence_ref: sentence_ref.to_string(),
            target,
            frame: frame.to_string(),
            lu,
            layers: Layers::default(),
            ni_entries: Vec::new(),
        };
        Ok(self.text_sets.entry(as_id).or_insert(set))
    }

    pub fn text_set(&self, as_id: u64) -> Result<&TextAnnotationSet> {
        self.text_sets
            .get(&as_id)
            .ok_or_else(|| AnnotationError::UnknownAnnotationSet(as_id).into())
    }

    pub fn set_layer_label(
        &mut self,
        lex: &Lexicon,
        as_id: u64,
        layer: Layer,
        span: Span,
        label: &str,
    ) -> Result<&TextAnnotationSet> {
        let set = self.text_set(as_id)?;
        annotation::check_span(span, &self.sentence(&set.sentence_ref)?.text)?;
        annotation::check_label(lex, set, layer, label)?;
        if set.layers.get(layer).iter().any(|l| l.span.overlaps(&span)) {
            return Err(AnnotationError::Overlap { layer, span }.into());
        }
        let set = self.text_sets.get_mut(&as_id).expect("checked above");
        annotation::insert_label(
            set.layers.get_mut(layer),
            LayerLabel {
                span,
                label: label.to_string(),
            },
        );
        Ok(set)
    }

    pub fn remove_layer_label(&mut self, as_id: u64, layer: Layer, span: Span) -> Result<&TextAnnotationSet> {
        let set = self
            .text_sets
            .get_mut(&as_id)
            .ok_or(AnnotationError::UnknownAnnotationSet(as_id))?;
        let labels = set.layers.get_mut(layer);
        let pos = labels
            .iter()
            .position(|l| l.span == span)
            .ok_or(AnnotationError::LabelNotFound { layer, span })?;
        labels.remove(pos);
        Ok(set)
    }

    pub fn mark_ni(&mut self, lex: &Lexicon, as_id: u64, fe: &str, ni_type: &str) -> Result<&TextAnnotationSet> {
        let set = self.text_set(as_id)?;
        annotation::check_ni(lex, set, fe, ni_type)?;
        let set = self.text_sets.get_mut(&as_id).expect("checked above");
        match set.ni_entries.iter_mut().find(|n| n.fe == fe) {
            Some(entry) => entry.ni_type = ni_type.to_string(),
            None => set.ni_entries.push(NiEntry {
                fe: fe.to_string(),
                ni_type: ni_type.to_string(),
            }),
        }
        Ok(set)
    }

    pub fn unmark_ni(&mut self, as_id: u64, fe: &str) -> Result<&TextAnnotationSet> {
        let set = self
            .text_sets
            .get_mut(&as_id)
            .ok_or(AnnotationError::UnknownAnnotationSet(as_id))?;
        set.ni_entries.retain(|n| n.fe != fe);
        Ok(set)
    }

    pub fn delete_text_as(&mut self, as_id: u64) -> Result<TextAnnotationSet> {
        let set = self
            .text_sets
            .remove(&as_id)
            .ok_or(AnnotationError::UnknownAnnotationSet(as_id))?;
        self.tombstones.push(Tombstone {
            kind: "annotation_set".into(),
            id: as_id,
            cause: None,
        });
        Ok(set)
    }

    // ---- image annotation ----

    pub fn annotate_image_target(
        &mut self,
        lex: &Lexicon,
        target: ImageTarget,
        frame: &str,
        fe: &str,
        cv_name: Option<&str>,
        provenance: Origin,
    ) -> Result<&ImageAnnotation> {
        self.check_target(target)?;
        annotation::check_fe(lex, frame, fe)?;
        let cv_name = cv_name.map(|k| annotation::check_cv_name(lex, k)).transpose()?;
        let ia_id = self.counters.next_ia_id;
        self.counters.next_ia_id += 1;
        let ia = ImageAnnotation {
            ia_id,
            target,
            frame: frame.to_string(),
            fe: fe.to_string(),
            cv_name,
            provenance,
        };
        Ok(self.image_annotations.entry(ia_id).or_insert(ia))
    }

    pub fn delete_image_annotation(&mut self, ia_id: u64) -> Result<ImageAnnotation> {
        let ia = self
            .image_annotations
            .remove(&ia_id)
            .ok_or(AnnotationError::UnknownImageAnnotation(ia_id))?;
        self.tombstones.push(Tombstone {
            kind: "image_annotation".into(),
            id: ia_id,
            cause: None,
        });
        Ok(ia)
    }

    pub fn correlate(&mut self, target: ImageTarget, sentence_ref: &str, span: Span) -> Result<&Correlation> {
        self.check_target(target)?;
        annotation::check_span(span, &self.sentence(sentence_ref)?.text)?;
        let corr_id = self.counters.next_corr_id;
        self.counters.next_corr_id += 1;
        let corr = Correlation {
            corr_id,
            target,
            sentence_ref: sentence_ref.to_string(),
            span,
            provenance: Origin::Human,
        };
        Ok(self.correlations.entry(corr_id).or_insert(corr))
    }

    pub fn delete_correlation(&mut self, corr_id: u64) -> Result<Correlation> {
        let corr = self
            .correlations
            .remove(&corr_id)
            .ok_or(AnnotationError::UnknownCorrelation(corr_id))?;
        self.tombstones.push(Tombstone {
            kind: "correlation".into(),
            id: corr_id,
            cause: None,
        });
        Ok(corr)
    }

    // ---- sweep ----

    /// Checks every record of the document against the lexicon and its own
    /// invariants. The error names the offending record.
    pub fn validate(&self, lex: &Lexicon) -> Result<()> {
        let invalid = |path: String, reason: &str| DocumentError::Invalid {
            path,
            reason: reason.to_string(),
        };
        let mut ids = std::collections::HashSet::new();
        for s in &self.sentences {
            if !ids.insert(&s.id) {
                return Err(invalid(format!("sentence {}", s.id), "duplicate id"));
            }
        }
        for chain in &self.chains {
            let path = format!("entity {}", chain.entity_id);
            for p in &chain.phrase_spans {
                let s = self.sentences.get(p.sentence_index).ok_or_else(|| invalid(path.clone(), "phrase in missing sentence"))?;
                annotation::check_span(p.span, &s.text).map_err(|e| DocumentError::at(&path, e))?;
            }
            for b in &chain.boxes {
                b.geometry
                    .validate_within(self.media.width, self.media.height)
                    .map_err(|e| invalid(path.clone(), &e.to_string()))?;
            }
        }
        self.drafts.check().map_err(|e| DocumentError::at("drafts", e))?;
        self.tracks
            .check(&self.media.bounds())
            .map_err(|e| DocumentError::at("objects", e))?;
        for (&id, set) in &self.text_sets {
            let path = format!("annotationSet {id}");
            if set.as_id != id || id >= self.counters.next_as_id {
                return Err(invalid(path, "id mismatch"));
            }
            let sentence = self.sentence(&set.sentence_ref).map_err(|e| DocumentError::at(&path, e))?;
            annotation::validate_text_set(lex, set, &sentence.text).map_err(|e| DocumentError::at(&path, e))?;
        }
        for (&id, ia) in &self.image_annotations {
            let path = format!("objectAnnotation {id}");
            if ia.ia_id != id || id >= self.counters.next_ia_id {
                return Err(invalid(path, "id mismatch"));
            }
            self.check_target(ia.target).map_err(|e| DocumentError::at(&path, e))?;
            annotation::validate_image_annotation(lex, ia).map_err(|e| DocumentError::at(&path, e))?;
        }
        for (&id, c) in &self.correlations {
            let path = format!("correlation {id}");
            if c.corr_id != id || id >= self.counters.next_corr_id {
                return Err(invalid(path, "id mismatch"));
            }
            self.check_target(c.target).map_err(|e| DocumentError::at(&path, e))?;
            let sentence = self.sentence(&c.sentence_ref).map_err(|e| DocumentError::at(&path, e))?;
            annotation::check_span(c.span, &sentence.text).map_err(|e| DocumentError::at(&path, e))?;
        }
        Ok(())
    }
}
