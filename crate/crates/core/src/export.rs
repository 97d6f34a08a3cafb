//! Canonical XML export of a document and its import.
//!
//! Output is deterministic: fixed element and attribute order, two-space
//! indentation, LF line endings, UTF-8. Sentences keep document order;
//! annotation sets, objects, annotations and correlations are sorted by id.
//! `objectRef` names an entity chain in static documents and an object
//! track in video documents.
//!
//! Drafts, detections, pre-annotation candidates and tombstones are working
//! state and are not exported.

use crate::annotation::*;
use crate::document::{Document, DocumentError, DocumentMode, MediaInfo, Sentence};
use crate::geometry::{BoxGeometry, Span};
use crate::lexicon::Lexicon;
use crate::static_corpus::{BoundingBox, ChainLinkage, EntityChain, PhraseSpan};
use crate::tracking::{ObjectTrack, Segment, TrackOrigin, TrackState};
use crate::video::FrameRate;
use crate::xmltree::{self, escape_attr, Element};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

pub const ROOT: &str = "charonCorpusDoc";
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExportError {
    #[error("XML parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid document: {0}")]
    Validation(DocumentError),
}

// ---- writing ----

struct Node {
    name: &'static str,
    attrs: Vec<(&'static str, String)>,
    children: Vec<Node>,
}

impl Node {
    fn new(name: &'static str) -> Self {
        Node {
            name,
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    fn attr(mut self, key: &'static str, value: impl ToString) -> Self {
        self.attrs.push((key, value.to_string()));
        self
    }

    fn opt(self, key: &'static str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.attr(key, v),
            None => self,
        }
    }

    fn child(mut self, node: Node) -> Self {
        self.children.push(node);
        self
    }

    fn render(&self, depth: usize, out: &mut String) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push('<');
        out.push_str(self.name);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {k}=\"{}\"", escape_attr(v));
        }
        if self.children.is_empty() {
            out.push_str("/>\n");
            return;
        }
        out.push_str(">\n");
        for c in &self.children {
            c.render(depth + 1, out);
        }
        for _ in 0..depth {
            out.push_str("  ");
        }
        let _ = writeln!(out, "</{}>", self.name);
    }
}

fn box_attrs(node: Node, g: &BoxGeometry) -> Node {
    node.attr("xmin", g.xmin)
        .attr("ymin", g.ymin)
        .attr("xmax", g.xmax)
        .attr("ymax", g.ymax)
}

fn linkage_str(l: ChainLinkage) -> &'static str {
    match l {
        ChainLinkage::Linked => "linked",
        ChainLinkage::PhraseOnly => "phrase_only",
        ChainLinkage::BoxOnly => "box_only",
    }
}

pub fn export_document(doc: &Document) -> Vec<u8> {
    let m = &doc.media;
    let mut root = Node::new(ROOT)
        .attr("version", SCHEMA_VERSION)
        .attr("id", &doc.doc_id)
        .attr("corpus", &doc.corpus)
        .attr("mode", doc.mode.as_str())
        .attr("media", &m.media_ref)
        .attr("width", m.width)
        .attr("height", m.height)
        .opt("fps", m.fps.map(|f| f.fps()))
        .opt("frameCount", m.frame_count);

    for s in &doc.sentences {
        root = root.child(
            Node::new("sentence")
                .attr("id", &s.id)
                .opt("startMs", s.start_ms)
                .opt("endMs", s.end_ms)
                .attr("text", &s.text),
        );
    }
    for chain in &doc.chains {
        let mut node = Node::new("entity")
            .attr("id", chain.entity_id)
            .attr("type", &chain.entity_type)
            .attr("linkage", linkage_str(chain.linkage));
        for p in &chain.phrase_spans {
            let sref = doc
                .sentences
                .get(p.sentence_index)
                .map_or_else(String::new, |s| s.id.clone());
            node = node.child(
                Node::new("phrase")
                    .attr("sentenceRef", sref)
                    .attr("start", p.span.start)
                    .attr("end", p.span.end),
            );
        }
        for b in &chain.boxes {
            node = node.child(box_attrs(Node::new("box"), &b.geometry).attr("class", &b.class_label));
        }
        root = root.child(node);
    }
    for set in doc.text_sets.values() {
        let mut node = Node::new("annotationSet")
            .attr("id", set.as_id)
            .attr("sentenceRef", &set.sentence_ref)
            .attr("targetStart", set.target.start)
            .attr("targetEnd", set.target.end)
            .attr("frame", &set.frame)
            .opt("lu", set.lu.as_ref());
        for layer in Layer::ALL {
            let mut ln = Node::new("layer").attr("name", layer.as_str());
            for l in set.layers.get(layer) {
                ln = ln.child(
                    Node::new("label")
                        .attr("start", l.span.start)
                        .attr("end", l.span.end)
                        .attr("name", &l.label),
                );
            }
            node = node.child(ln);
        }
        for ni in &set.ni_entries {
            node = node.child(Node::new("ni").attr("fe", &ni.fe).attr("type", &ni.ni_type));
        }
        root = root.child(node);
    }
    for track in doc.tracks.tracks.values() {
        let mut node = Node::new("object")
            .attr("id", track.object_id)
            .attr("origin", track.origin.as_str())
            .attr("state", track.state.as_str())
            .opt("class", track.class_label.as_ref())
            .opt("detection", track.detection_id);
        for seg in &track.segments {
            let mut sn = Node::new("segment")
                .attr("start", seg.start_frame)
                .attr("end", seg.end_frame);
            for (frame, g) in &seg.keyframes {
                sn = sn.child(box_attrs(Node::new("keyframe").attr("frame", frame), g));
            }
            node = node.child(sn);
        }
        root = root.child(node);
    }
    for ia in doc.image_annotations.values() {
        root = root.child(
            Node::new("objectAnnotation")
                .attr("id", ia.ia_id)
                .attr("objectRef", ia.target.id())
                .attr("frame", &ia.frame)
                .attr("fe", &ia.fe)
                .opt("cvLU", ia.cv_name.as_ref())
                .attr("provenance", ia.provenance.as_str()),
        );
    }
    for c in doc.correlations.values() {
        root = root.child(
            Node::new("correlation")
                .attr("id", c.corr_id)
                .attr("objectRef", c.target.id())
                .attr("sentenceRef", &c.sentence_ref)
                .attr("start", c.span.start)
                .attr("end", c.span.end)
                .attr("provenance", c.provenance.as_str()),
        );
    }

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    root.render(0, &mut out);
    out.into_bytes()
}

// ---- reading ----

struct Ctx<'a> {
    el: &'a Element,
    path: String,
}

impl<'a> Ctx<'a> {
    fn err(&self, message: impl Into<String>) -> ExportError {
        ExportError::Schema {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn str(&self, name: &str) -> Result<&'a str, ExportError> {
        self.el
            .attr(name)
            .ok_or_else(|| self.err(format!("missing attribute `{name}`")))
    }

    fn opt_str(&self, name: &str) -> Option<&'a str> {
        self.el.attr(name)
    }

    fn num<T: FromStr>(&self, name: &str) -> Result<T, ExportError> {
        let raw = self.str(name)?;
        raw.parse()
            .map_err(|_| self.err(format!("attribute `{name}` has invalid value `{raw}`")))
    }

    fn opt_num<T: FromStr>(&self, name: &str) -> Result<Option<T>, ExportError> {
        match self.el.attr(name) {
            None => Ok(None),
            Some(_) => self.num(name).map(Some),
        }
    }

    fn sub(&self, el: &'a Element, key: Option<String>) -> Ctx<'a> {
        let path = match key {
            Some(k) => format!("{}/{}[{}]", self.path, el.name, k),
            None => format!("{}/{}", self.path, el.name),
        };
        Ctx { el, path }
    }

    fn only(&self, allowed: &[&str]) -> Result<(), ExportError> {
        for c in &self.el.children {
            if !allowed.contains(&c.name.as_str()) {
                return Err(self.err(format!("unexpected element <{}>", c.name)));
            }
        }
        Ok(())
    }
}

fn read_box(c: &Ctx) -> Result<BoxGeometry, ExportError> {
    Ok(BoxGeometry::new(c.num("xmin")?, c.num("ymin")?, c.num("xmax")?, c.num("ymax")?))
}

fn span(c: &Ctx, start: &str, end: &str) -> Result<Span, ExportError> {
    let (s, e): (usize, usize) = (c.num(start)?, c.num(end)?);
    if s > e {
        return Err(c.err(format!("`{start}` is after `{end}`")));
    }
    Ok(Span::new(s, e))
}

/// Reads an exported document and checks it against the lexicon.
pub fn import_document(xml: &[u8], lex: &Lexicon) -> Result<Document, ExportError> {
    let root = xmltree::parse(xml).map_err(|e| ExportError::Parse(e.to_string()))?;
    let r = Ctx {
        el: &root,
        path: ROOT.to_string(),
    };
    if root.name != ROOT {
        return Err(r.err(format!("root element is <{}>", root.name)));
    }
    if r.str("version")? != SCHEMA_VERSION {
        return Err(r.err(format!("unsupported version `{}`", r.str("version")?)));
    }
    r.only(&["sentence", "entity", "annotationSet", "object", "objectAnnotation", "correlation"])?;
    let mode = match r.str("mode")? {
        "static" => DocumentMode::Static,
        "video" => DocumentMode::Video,
        other => return Err(r.err(format!("unknown mode `{other}`"))),
    };
    let fps = match r.opt_num::<u32>("fps")? {
        Some(f) => Some(FrameRate::new(f).map_err(|e| r.err(e.to_string()))?),
        None => None,
    };
    let media = MediaInfo {
        media_ref: r.str("media")?.to_string(),
        width: r.num("width")?,
        height: r.num("height")?,
        fps,
        frame_count: r.opt_num("frameCount")?,
    };
    let mut doc = Document::empty(r.str("corpus")?, r.str("id")?, mode, media);

    for el in root.children_named("sentence") {
        let c = r.sub(el, el.attr("id").map(|i| format!("id={i}")));
        let id = c.str("id")?.to_string();
        if doc.sentences.iter().any(|s| s.id == id) {
            return Err(c.err("duplicate sentence id"));
        }
        doc.sentences.push(Sentence {
            id,
            text: c.str("text")?.to_string(),
            start_ms: c.opt_num("startMs")?,
            end_ms: c.opt_num("endMs")?,
        });
    }
    let max_sentence = doc
        .sentences
        .iter()
        .filter_map(|s| s.id.strip_prefix('s')?.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    doc.counters.next_sentence = max_sentence.max(doc.sentences.len() as u64) + 1;

    for el in root.children_named("entity") {
        let c = r.sub(el, el.attr("id").map(|i| format!("id={i}")));
        c.only(&["phrase", "box"])?;
        let entity_id: u32 = c.num("id")?;
        let linkage = match c.str("linkage")? {
            "linked" => ChainLinkage::Linked,
            "phrase_only" => ChainLinkage::PhraseOnly,
            "box_only" => ChainLinkage::BoxOnly,
            other => return Err(c.err(format!("unknown linkage `{other}`"))),
        };
        let mut chain = EntityChain {
            entity_id,
            entity_type: c.str("type")?.to_string(),
            phrase_spans: Vec::new(),
            boxes: Vec::new(),
            linkage,
        };
        for p in el.children_named("phrase") {
            let pc = c.sub(p, None);
            let sref = pc.str("sentenceRef")?;
            let sentence_index = doc
                .sentences
                .iter()
                .position(|s| s.id == sref)
                .ok_or_else(|| pc.err(format!("unknown sentence `{sref}`")))?;
            chain.phrase_spans.push(PhraseSpan {
                sentence_index,
                span: span(&pc, "start", "end")?,
            });
        }
        for b in el.children_named("box") {
            let bc = c.sub(b, None);
            chain.boxes.push(BoundingBox {
                image_ref: doc.media.media_ref.clone(),
                entity_id,
                class_label: bc.str("class")?.to_string(),
                geometry: read_box(&bc)?,
            });
        }
        doc.chains.push(chain);
    }

    for el in root.children_named("annotationSet") {
        let c = r.sub(el, el.attr("id").map(|i| format!("id={i}")));
        c.only(&["layer", "ni"])?;
        let as_id: u64 = c.num("id")?;
        let mut layers = Layers::default();
        for l in el.children_named("layer") {
            let lc = c.sub(l, l.attr("name").map(|n| format!("name={n}")));
            lc.only(&["label"])?;
            let layer: Layer = lc.str("name")?.parse().map_err(|e: AnnotationError| lc.err(e.to_string()))?;
            for label in l.children_named("label") {
                let bc = lc.sub(label, None);
                layers.get_mut(layer).push(LayerLabel {
                    span: span(&bc, "start", "end")?,
                    label: bc.str("name")?.to_string(),
                });
            }
        }
        let ni_entries = el
            .children_named("ni")
            .map(|n| {
                let nc = c.sub(n, None);
                Ok(NiEntry {
                    fe: nc.str("fe")?.to_string(),
                    ni_type: nc.str("type")?.to_string(),
                })
            })
            .collect::<Result<Vec<_>, ExportError>>()?;
        let set = TextAnnotationSet {
            as_id,
            sentence_ref: c.str("sentenceRef")?.to_string(),
            target: span(&c, "targetStart", "targetEnd")?,
            frame: c.str("frame")?.to_string(),
            lu: c.opt_str("lu").map(str::to_string),
            layers,
            ni_entries,
        };
        if doc.text_sets.insert(as_id, set).is_some() {
            return Err(c.err("duplicate annotation set id"));
        }
    }

    for el in root.children_named("object") {
        let c = r.sub(el, el.attr("id").map(|i| format!("id={i}")));
        c.only(&["segment"])?;
        let origin = TrackOrigin::parse(c.str("origin")?).ok_or_else(|| c.err("unknown origin"))?;
        let state = TrackState::parse(c.str("state")?).ok_or_else(|| c.err("unknown state"))?;
        let mut segments = Vec::new();
        for s in el.children_named("segment") {
            let sc = c.sub(s, None);
            sc.only(&["keyframe"])?;
            let mut keyframes = BTreeMap::new();
            for k in s.children_named("keyframe") {
                let kc = sc.sub(k, k.attr("frame").map(|f| format!("frame={f}")));
                keyframes.insert(kc.num("frame")?, read_box(&kc)?);
            }
            segments.push(Segment {
                start_frame: sc.num("start")?,
                end_frame: sc.num("end")?,
                keyframes,
            });
        }
        let track = ObjectTrack {
            object_id: c.num("id")?,
            segments,
            state,
            origin,
            class_label: c.opt_str("class").map(str::to_string),
            detection_id: c.opt_num("detection")?,
        };
        doc.tracks.restore(track).map_err(|e| c.err(e.to_string()))?;
    }

    let target = |c: &Ctx| -> Result<ImageTarget, ExportError> {
        let id = c.num("objectRef")?;
        Ok(match mode {
            DocumentMode::Static => ImageTarget::Entity(id),
            DocumentMode::Video => ImageTarget::Object(id),
        })
    };
    let origin = |c: &Ctx| Origin::parse(c.str("provenance")?).ok_or_else(|| c.err("unknown provenance"));

    for el in root.children_named("objectAnnotation") {
        let c = r.sub(el, el.attr("id").map(|i| format!("id={i}")));
        let ia = ImageAnnotation {
            ia_id: c.num("id")?,
            target: target(&c)?,
            frame: c.str("frame")?.to_string(),
            fe: c.str("fe")?.to_string(),
            cv_name: c.opt_str("cvLU").map(str::to_string),
            provenance: origin(&c)?,
        };
        if doc.image_annotations.insert(ia.ia_id, ia).is_some() {
            return Err(c.err("duplicate object annotation id"));
        }
    }
    for el in root.children_named("correlation") {
        let c = r.sub(el, el.attr("id").map(|i| format!("id={i}")));
        let corr = Correlation {
            corr_id: c.num("id")?,
            target: target(&c)?,
            sentence_ref: c.str("sentenceRef")?.to_string(),
            span: span(&c, "start", "end")?,
            provenance: origin(&c)?,
        };
        if doc.correlations.insert(corr.corr_id, corr).is_some() {
            return Err(c.err("duplicate correlation id"));
        }
    }

    let next = |ids: Vec<u64>| ids.into_iter().max().map_or(1, |m| m + 1);
    doc.counters.next_as_id = next(doc.text_sets.keys().copied().collect());
    doc.counters.next_ia_id = next(doc.image_annotations.keys().copied().collect());
    doc.counters.next_corr_id = next(doc.correlations.keys().copied().collect());

    doc.validate(lex).map_err(ExportError::Validation)?;
    Ok(doc)
}
