//! One entry point over the lexicon and the store. The HTTP service and the
//! command line both go through these methods, so the same request leaves
//! the same records behind whichever way it arrives.

use crate::document::{Document, DocumentError, DocumentMode, MediaInfo};
use crate::export::{export_document, import_document, ExportError};
use crate::lexicon::Lexicon;
use crate::static_corpus::{link_entities, BundleError, CorpusBundle};
use crate::store::{valid_corpus_name, PutRequest, RecordKey, RecordKind, Store, StoreError};
use crate::video::{
    ingest_detections, merge_streams, parse_subtitles, parse_transcript, DetectionError, FrameRate, MergeConfig,
    TimecodeError, TranscriptError, DEFAULT_PAUSE_MS,
};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub name: String,
    /// Language tag used when mapping class labels to lexical units.
    pub language: String,
}

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error(transparent)]
    Timecode(#[from] TimecodeError),
    #[error("no corpus `{0}`")]
    UnknownCorpus(String),
    #[error("no document `{doc}` in corpus `{corpus}`")]
    UnknownDocument { corpus: String, doc: String },
    #[error("{0} already exists")]
    AlreadyExists(String),
    #[error("invalid corpus name `{0}`")]
    BadCorpusName(String),
    #[error("stored record {key} is unreadable: {message}")]
    Decode { key: String, message: String },
}

impl WorkspaceError {
    pub fn code(&self) -> &'static str {
        match self {
            WorkspaceError::Store(StoreError::Conflict { .. }) => "revision_conflict",
            WorkspaceError::Store(StoreError::BadCorpusName(_)) | WorkspaceError::BadCorpusName(_) => {
                "bad_corpus_name"
            }
            WorkspaceError::Store(_) => "storage_error",
            WorkspaceError::Document(e) => e.code(),
            WorkspaceError::Export(ExportError::Parse(_)) => "xml_parse_error",
            WorkspaceError::Export(ExportError::Schema { .. }) => "schema_violation",
            WorkspaceError::Export(ExportError::Validation(e)) => e.code(),
            WorkspaceError::Bundle(_) => "bad_bundle",
            WorkspaceError::Transcript(_) => "bad_transcript",
            WorkspaceError::Detection(_) => "bad_detections",
            WorkspaceError::Timecode(_) => "bad_timecode",
            WorkspaceError::UnknownCorpus(_) => "unknown_corpus",
            WorkspaceError::UnknownDocument { .. } => "unknown_document",
            WorkspaceError::AlreadyExists(_) => "already_exists",
            WorkspaceError::Decode { .. } => "storage_error",
        }
    }
}

pub type Result<T, E = WorkspaceError> = std::result::Result<T, E>;

/// Inputs of a video import. Text fields hold file contents.
#[derive(Debug, Clone)]
pub struct VideoImport {
    pub doc_id: String,
    pub media_ref: String,
    pub transcript: String,
    pub subtitles: Option<String>,
    pub detections: Option<String>,
    pub fps: u32,
    pub width: u32,
    pub height: u32,
    pub frame_count: Option<u64>,
    /// Id for the first object created in the document.
    pub first_object_id: Option<u64>,
    pub pause_threshold_ms: i64,
    pub merge: MergeConfig,
}

impl VideoImport {
    pub fn new(doc_id: &str, transcript: String, width: u32, height: u32) -> Self {
        VideoImport {
            doc_id: doc_id.to_string(),
            media_ref: doc_id.to_string(),
            transcript,
            subtitles: None,
            detections: None,
            fps: crate::video::DEFAULT_FPS,
            width,
            height,
            frame_count: None,
            first_object_id: None,
            pause_threshold_ms: DEFAULT_PAUSE_MS,
            merge: MergeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticImportReport {
    pub corpus: String,
    pub documents: Vec<String>,
    pub orphan_boxes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub doc_id: String,
    pub mode: DocumentMode,
    pub revision: u64,
}

pub struct Workspace {
    store: Store,
    lexicon: Arc<Lexicon>,
}

fn decode<T: serde::de::DeserializeOwned>(key: &RecordKey, value: &serde_json::Value) -> Result<T> {
    T::deserialize(value).map_err(|e| WorkspaceError::Decode {
        key: key.to_string(),
        message: e.to_string(),
    })
}

fn encode<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("domain records serialize")
}

impl Workspace {
    pub fn open(data_dir: impl Into<PathBuf>, lexicon: Arc<Lexicon>) -> Result<Self> {
        Ok(Workspace {
            store: Store::open(data_dir)?,
            lexicon,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn lexicon_arc(&self) -> Arc<Lexicon> {
        self.lexicon.clone()
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut Store {
        &mut self.store
    }

    // ---- corpora ----

    pub fn corpora(&self) -> Result<Vec<CorpusMeta>> {
        let mut out = Vec::new();
        let names: Vec<String> = self.store.corpora().map(str::to_string).collect();
        for name in names {
            if let Some(rec) = self.store.get_live(&RecordKey::corpus_meta(&name)) {
                out.push(decode(&rec.key, &rec.payload)?);
            }
        }
        Ok(out)
    }

    pub fn corpus(&self, name: &str) -> Result<CorpusMeta> {
        let key = RecordKey::corpus_meta(name);
        let rec = self
            .store
            .get_live(&key)
            .ok_or_else(|| WorkspaceError::UnknownCorpus(name.to_string()))?;
        decode(&key, &rec.payload)
    }

    pub fn create_corpus(&mut self, name: &str, language: &str) -> Result<CorpusMeta> {
        if !valid_corpus_name(name) {
            return Err(WorkspaceError::BadCorpusName(name.to_string()));
        }
        let key = RecordKey::corpus_meta(name);
        if self.store.get_live(&key).is_some() {
            return Err(WorkspaceError::AlreadyExists(format!("corpus `{name}`")));
        }
        let meta = CorpusMeta {
            name: name.to_string(),
            language: language.to_string(),
        };
        let rev = self.store.revision(&key);
        self.store.put(key, encode(&meta), rev)?;
        Ok(meta)
    }

    /// Corpus record write for a batch, creating the corpus when missing.
    fn ensure_corpus(&self, name: &str, batch: &mut Vec<PutRequest>) -> Result<CorpusMeta> {
        if !valid_corpus_name(name) {
            return Err(WorkspaceError::BadCorpusName(name.to_string()));
        }
        match self.corpus(name) {
            Ok(meta) => Ok(meta),
            Err(WorkspaceError::UnknownCorpus(_)) => {
                let key = RecordKey::corpus_meta(name);
                let meta = CorpusMeta {
                    name: name.to_string(),
                    language: "und".to_string(),
                };
                batch.push(PutRequest {
                    expected_revision: self.store.revision(&key),
                    key,
                    payload: Some(encode(&meta)),
                });
                Ok(meta)
            }
            Err(e) => Err(e),
        }
    }

    fn new_document_write(&self, doc: &Document) -> Result<PutRequest> {
        let key = RecordKey::document(&doc.corpus, &doc.doc_id);
        if self.store.get_live(&key).is_some() {
            return Err(WorkspaceError::AlreadyExists(format!(
                "document `{}` in corpus `{}`",
                doc.doc_id, doc.corpus
            )));
        }
        Ok(PutRequest {
            expected_revision: self.store.revision(&key),
            key,
            payload: Some(encode(doc)),
        })
    }

    // ---- imports ----

    #[cfg(feature = "bundle")]
    pub fn import_static(&mut self, corpus: &str, zip_bytes: &[u8]) -> Result<StaticImportReport> {
        let bundle = crate::static_corpus::open_bundle(corpus, zip_bytes)?;
        self.import_static_bundle(corpus, &bundle)
    }

    /// Imports every image–caption pair of a bundle as one batch.
    pub fn import_static_bundle(&mut self, corpus: &str, bundle: &CorpusBundle) -> Result<StaticImportReport> {
        bundle.validate()?;
        let linkage = link_entities(bundle)?;
        let mut batch = Vec::new();
        let meta = self.ensure_corpus(corpus, &mut batch)?;
        let mut documents = Vec::new();
        for source in &linkage.documents {
            let doc = Document::from_static(corpus, source, &self.lexicon, &meta.language);
            doc.validate(&self.lexicon)?;
            batch.push(self.new_document_write(&doc)?);
            documents.push(doc.doc_id);
        }
        self.store.put_batch(batch)?;
        Ok(StaticImportReport {
            corpus: corpus.to_string(),
            documents,
            orphan_boxes: linkage.orphan_boxes.len(),
        })
    }

    pub fn import_video(&mut self, corpus: &str, input: &VideoImport) -> Result<String> {
        let fps = FrameRate::new(input.fps)?;
        let speech = parse_transcript(&input.transcript)?;
        let subtitles = match &input.subtitles {
            Some(text) => parse_subtitles(text)?,
            None => Vec::new(),
        };
        let words = merge_streams(&speech, &subtitles, &input.merge)?;
        let detections = match &input.detections {
            Some(text) => ingest_detections(text, input.width, input.height)?,
            None => Vec::new(),
        };
        let media = MediaInfo {
            media_ref: input.media_ref.clone(),
            width: input.width,
            height: input.height,
            fps: Some(fps),
            frame_count: input.frame_count,
        };
        let mut doc = Document::from_video(
            corpus,
            &input.doc_id,
            media,
            &words,
            detections,
            input.pause_threshold_ms,
        );
        if let Some(first) = input.first_object_id {
            doc.tracks.seed(first).map_err(DocumentError::from)?;
        }
        doc.validate(&self.lexicon)?;
        let mut batch = Vec::new();
        self.ensure_corpus(corpus, &mut batch)?;
        batch.push(self.new_document_write(&doc)?);
        self.store.put_batch(batch)?;
        Ok(doc.doc_id)
    }

    /// Imports an exported document into `corpus` (overriding the corpus
    /// named in the file).
    pub fn import_xml(&mut self, corpus: &str, xml: &[u8]) -> Result<String> {
        let mut doc = import_document(xml, &self.lexicon)?;
        doc.corpus = corpus.to_string();
        let mut batch = Vec::new();
        self.ensure_corpus(corpus, &mut batch)?;
        batch.push(self.new_document_write(&doc)?);
        self.store.put_batch(batch)?;
        Ok(doc.doc_id)
    }

    // ---- documents ----

    pub fn documents(&self, corpus: &str) -> Result<Vec<DocumentSummary>> {
        self.corpus(corpus)?;
        self.store
            .list(corpus, RecordKind::Document)
            .into_iter()
            .map(|rec| {
                let doc: Document = decode(&rec.key, &rec.payload)?;
                Ok(DocumentSummary {
                    doc_id: doc.doc_id,
                    mode: doc.mode,
                    revision: rec.revision,
                })
            })
            .collect()
    }

    /// A document and its current revision.
    pub fn document(&self, corpus: &str, doc_id: &str) -> Result<(Document, u64)> {
        let key = RecordKey::document(corpus, doc_id);
        let rec = self
            .store
            .get_live(&key)
            .ok_or_else(|| WorkspaceError::UnknownDocument {
                corpus: corpus.to_string(),
                doc: doc_id.to_string(),
            })?;
        Ok((decode(&key, &rec.payload)?, rec.revision))
    }

    /// Runs `op` on a copy of the document and stores the result if the op
    /// succeeds and the document is still valid. With `expected_revision`
    /// set, the write is refused unless it matches the stored revision.
    /// Returns the op's output and the new revision.
    pub fn update<T>(
        &mut self,
        corpus: &str,
        doc_id: &str,
        expected_revision: Option<u64>,
        op: impl FnOnce(&mut Document, &Lexicon) -> Result<T, DocumentError>,
    ) -> Result<(T, u64)> {
        let (mut doc, current) = self.document(corpus, doc_id)?;
        let expected = expected_revision.unwrap_or(current);
        if expected != current {
            return Err(StoreError::Conflict {
                key: RecordKey::document(corpus, doc_id),
                expected,
                current,
            }
            .into());
        }
        let out = op(&mut doc, &self.lexicon)?;
        doc.validate(&self.lexicon)?;
        let rev = self
            .store
            .put(RecordKey::document(corpus, doc_id), encode(&doc), expected)?;
        Ok((out, rev))
    }

    pub fn delete_document(&mut self, corpus: &str, doc_id: &str, expected_revision: Option<u64>) -> Result<u64> {
        let (_, current) = self.document(corpus, doc_id)?;
        Ok(self.store.delete(
            RecordKey::document(corpus, doc_id),
            expected_revision.unwrap_or(current),
        )?)
    }

    pub fn preannotate(&mut self, corpus: &str, doc_id: &str, expected_revision: Option<u64>) -> Result<(usize, u64)> {
        self.update(corpus, doc_id, expected_revision, |doc, lex| Ok(doc.preannotate(lex)))
    }

    pub fn export(&self, corpus: &str, doc_id: &str) -> Result<Vec<u8>> {
        let (doc, _) = self.document(corpus, doc_id)?;
        Ok(export_document(&doc))
    }
}
