//! HTTP routes under `/api/v1`.
//!
//! Document mutations need an `If-Match` header carrying the revision the
//! client last read; every document response carries the current revision
//! in `ETag`. Request and response bodies are JSON except for bundle
//! uploads (ZIP), XML import and export.

use crate::error::ApiError;
use crate::views;
use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use charonette_core::annotation::{ImageTarget, Layer, Origin};
use charonette_core::document::{Document, DocumentError};
use charonette_core::lexicon::Pos;
use charonette_core::tracking::TrackOrigin;
use charonette_core::video::{DraftEdit, MergeConfig, DEFAULT_FPS, DEFAULT_PAUSE_MS};
use charonette_core::workspace::{VideoImport, Workspace};
use charonette_core::{BoxGeometry, Lexicon, Span};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

pub struct AppState {
    workspace: Mutex<Option<Workspace>>,
    token: Option<String>,
    ready: AtomicBool,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    /// State with no workspace yet; `/health` reports 503 until
    /// [`AppState::install`] runs.
    pub fn pending(token: Option<String>) -> SharedState {
        Arc::new(AppState {
            workspace: Mutex::new(None),
            token: token.filter(|t| !t.is_empty()),
            ready: AtomicBool::new(false),
        })
    }

    pub fn new(workspace: Workspace, token: Option<String>) -> SharedState {
        let state = Self::pending(token);
        state.install(workspace);
        state
    }

    pub fn install(&self, workspace: Workspace) {
        *self.workspace.lock().unwrap_or_else(|p| p.into_inner()) = Some(workspace);
        self.ready.store(true, Ordering::SeqCst);
    }

    pub fn is_ready(&self) -> bool {
        self.ready.load(Ordering::SeqCst)
    }

    fn ws(&self) -> Result<WorkspaceGuard<'_>, ApiError> {
        let guard = self.workspace.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "not_ready", "lexicon is still loading"));
        }
        Ok(WorkspaceGuard(guard))
    }

    /// Runs `f` with the workspace; used by tests and the CLI to compare
    /// API-driven state with direct calls.
    pub fn with_workspace<T>(&self, f: impl FnOnce(&mut Workspace) -> T) -> Option<T> {
        let mut guard = self.workspace.lock().unwrap_or_else(|p| p.into_inner());
        guard.as_mut().map(f)
    }
}

struct WorkspaceGuard<'a>(MutexGuard<'a, Option<Workspace>>);

impl std::ops::Deref for WorkspaceGuard<'_> {
    type Target = Workspace;
    fn deref(&self) -> &Workspace {
        self.0.as_ref().expect("checked on creation")
    }
}

impl std::ops::DerefMut for WorkspaceGuard<'_> {
    fn deref_mut(&mut self) -> &mut Workspace {
        self.0.as_mut().expect("checked on creation")
    }
}

/// JSON body whose rejections use the API error format.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(ApiError::bad_request(e.body_text())),
        }
    }
}

pub fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are valid header text")
}

/// Parses `If-Match: "7"` (quotes and a weak prefix are optional).
pub fn if_match(headers: &HeaderMap) -> Result<u64, ApiError> {
    let raw = headers.get(header::IF_MATCH).ok_or_else(|| {
        ApiError::new(
            StatusCode::PRECONDITION_REQUIRED,
            "revision_required",
            "send the document revision in If-Match",
        )
    })?;
    let text = raw.to_str().unwrap_or_default().trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse()
        .map_err(|_| ApiError::bad_request(format!("If-Match `{text}` is not a revision number")).with_field("If-Match"))
}

fn with_rev<T: Serialize>(status: StatusCode, body: T, revision: u64) -> Response {
    let mut res = (status, Json(body)).into_response();
    res.headers_mut().insert(header::ETAG, etag(revision));
    res
}

type Api = Result<Response, ApiError>;

/// Applies a document operation under the caller's revision.
fn mutate<T: Serialize>(
    state: &AppState,
    headers: &HeaderMap,
    corpus: &str,
    doc: &str,
    status: StatusCode,
    op: impl FnOnce(&mut Document, &Lexicon) -> Result<T, DocumentError>,
) -> Api {
    let rev = if_match(headers)?;
    let mut ws = state.ws()?;
    let (out, new_rev) = ws.update(corpus, doc, Some(rev), op)?;
    Ok(with_rev(status, out, new_rev))
}

pub fn router(state: SharedState) -> Router {
    let doc = "/corpora/{corpus}/docs/{doc}";
    let api = Router::new()
        .route("/health", get(health))
        .route("/frames", get(frames))
        .route("/frames/{name}/fes", get(frame_fes))
        .route("/lus", get(lus))
        .route("/corpora", get(list_corpora).post(create_corpus))
        .route("/corpora/{corpus}/import-static", post(import_static))
        .route("/corpora/{corpus}/import-video", post(import_video))
        .route("/corpora/{corpus}/import", post(import_xml))
        .route("/corpora/{corpus}/docs", get(list_documents))
        .route(doc, get(get_document).delete(delete_document))
        .route(&format!("{doc}/export"), get(export))
        .route(&format!("{doc}/preannotate"), post(preannotate))
        .route(&format!("{doc}/candidates"), get(candidates).patch(override_candidate))
        .route(&format!("{doc}/drafts"), get(drafts))
        .route(&format!("{doc}/drafts/{{id}}"), patch(edit_draft))
        .route(&format!("{doc}/drafts/{{id}}/finalize"), post(finalize_draft))
        .route(&format!("{doc}/detections"), get(detections))
        .route(&format!("{doc}/detections/{{id}}"), axum::routing::delete(reject_detection))
        .route(&format!("{doc}/detections/{{id}}/accept"), post(accept_detection))
        .route(&format!("{doc}/objects"), get(objects).post(create_object))
        .route(
            &format!("{doc}/objects/{{id}}"),
            get(object).patch(edit_object).delete(delete_object),
        )
        .route(&format!("{doc}/objects/{{id}}/box"), get(object_box))
        .route(&format!("{doc}/entities/{{id}}"), axum::routing::delete(delete_entity))
        .route(&format!("{doc}/annotations"), get(annotations).post(create_annotation))
        .route(
            &format!("{doc}/annotations/{{id}}"),
            patch(edit_annotation).delete(delete_annotation),
        )
        .route(
            &format!("{doc}/image-annotations/{{id}}"),
            axum::routing::delete(delete_image_annotation),
        )
        .route(&format!("{doc}/correlations"), post(create_correlation))
        .route(
            &format!("{doc}/correlations/{{id}}"),
            axum::routing::delete(delete_correlation),
        )
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state.clone());
    Router::new()
        .route("/health", get(health))
        .with_state(state)
        .nest("/api/v1", api)
}

async fn require_token(State(state): State<SharedState>, req: Request, next: Next) -> Response {
    let open = req.uri().path().ends_with("/health");
    if let (Some(token), false) = (&state.token, open) {
        let given = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
                .into_response();
        }
    }
    next.run(req).await
}

async fn health(State(state): State<SharedState>) -> Response {
    if state.is_ready() {
        Json(serde_json::json!({ "status": "ok" })).into_response()
    } else {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "not_ready", "lexicon is still loading").into_response()
    }
}

// ---- lexicon ----

#[derive(Deserialize)]
struct FrameQuery {
    name: Option<String>,
}

async fn frames(State(state): State<SharedState>, Query(q): Query<FrameQuery>) -> Api {
    let ws = state.ws()?;
    let lex = ws.lexicon();
    match q.name {
        Some(name) => {
            let frame = lex
                .frame_by_name(&name)
                .ok_or_else(|| ApiError::not_found("unknown_frame", format!("no frame `{name}`")))?;
            Ok(Json(views::frame(lex, frame)).into_response())
        }
        None => {
            let all: Vec<_> = lex
                .frames()
                .iter()
                .map(|f| views::FrameSummary {
                    name: f.name.clone(),
                    definition: f.definition.clone(),
                })
                .collect();
            Ok(Json(all).into_response())
        }
    }
}

async fn frame_fes(State(state): State<SharedState>, Path(name): Path<String>) -> Api {
    let ws = state.ws()?;
    let lex = ws.lexicon();
    let frame = lex
        .frame_by_name(&name)
        .ok_or_else(|| ApiError::not_found("unknown_frame", format!("no frame `{name}`")))?;
    Ok(Json(views::fes(lex, frame)).into_response())
}

#[derive(Deserialize)]
struct LuQuery {
    lemma: Option<String>,
    pos: Option<String>,
}

async fn lus(State(state): State<SharedState>, Query(q): Query<LuQuery>) -> Api {
    let lemma = q
        .lemma
        .ok_or_else(|| ApiError::bad_request("query parameter `lemma` is required").with_field("lemma"))?;
    let pos = q
        .pos
        .map(|p| p.parse::<Pos>())
        .transpose()
        .map_err(|e| ApiError::bad_request(e).with_field("pos"))?;
    let ws = state.ws()?;
    let lex = ws.lexicon();
    let found: Vec<_> = lex.lus_by_lemma(&lemma, pos).into_iter().map(|lu| views::lu(lex, lu)).collect();
    Ok(Json(found).into_response())
}

// ---- corpora and imports ----

async fn list_corpora(State(state): State<SharedState>) -> Api {
    let ws = state.ws()?;
    Ok(Json(ws.corpora()?).into_response())
}

#[derive(Deserialize)]
struct NewCorpus {
    name: String,
    #[serde(default = "undetermined")]
    language: String,
}

fn undetermined() -> String {
    "und".into()
}

async fn create_corpus(State(state): State<SharedState>, ApiJson(body): ApiJson<NewCorpus>) -> Api {
    let mut ws = state.ws()?;
    let meta = ws.create_corpus(&body.name, &body.language)?;
    Ok((StatusCode::CREATED, Json(meta)).into_response())
}

async fn import_static(State(state): State<SharedState>, Path(corpus): Path<String>, body: Bytes) -> Api {
    let mut ws = state.ws()?;
    let report = ws.import_static(&corpus, &body)?;
    Ok((StatusCode::CREATED, Json(report)).into_response())
}

/// Video import payload; text fields carry file contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoImportRequest {
    pub doc_id: String,
    #[serde(default)]
    pub media_ref: Option<String>,
    pub transcript: String,
    #[serde(default)]
    pub subtitles: Option<String>,
    #[serde(default)]
    pub detections: Option<String>,
    #[serde(default)]
    pub fps: Option<u32>,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub frame_count: Option<u64>,
    #[serde(default)]
    pub first_object_id: Option<u64>,
    #[serde(default)]
    pub pause_threshold_ms: Option<i64>,
    #[serde(default)]
    pub merge: Option<MergeConfig>,
}

impl VideoImportRequest {
    pub fn into_import(self) -> VideoImport {
        VideoImport {
            media_ref: self.media_ref.unwrap_or_else(|| self.doc_id.clone()),
            doc_id: self.doc_id,
            transcript: self.transcript,
            subtitles: self.subtitles,
            detections: self.detections,
            fps: self.fps.unwrap_or(DEFAULT_FPS),
            width: self.width,
            height: self.height,
            frame_count: self.frame_count,
            first_object_id: self.first_object_id,
            pause_threshold_ms: self.pause_threshold_ms.unwrap_or(DEFAULT_PAUSE_MS),
            merge: self.merge.unwrap_or_default(),
        }
    }
}

#[derive(Serialize)]
struct Imported {
    corpus: String,
    doc_id: String,
}

async fn import_video(
    State(state): State<SharedState>,
    Path(corpus): Path<String>,
    ApiJson(body): ApiJson<VideoImportRequest>,
) -> Api {
    let mut ws = state.ws()?;
    let doc_id = ws.import_video(&corpus, &body.into_import())?;
    let rev = ws.document(&corpus, &doc_id)?.1;
    Ok(with_rev(StatusCode::CREATED, Imported { corpus, doc_id }, rev))
}

async fn import_xml(State(state): State<SharedState>, Path(corpus): Path<String>, body: Bytes) -> Api {
    let mut ws = state.ws()?;
    let doc_id = ws.import_xml(&corpus, &body)?;
    let rev = ws.document(&corpus, &doc_id)?.1;
    Ok(with_rev(StatusCode::CREATED, Imported { corpus, doc_id }, rev))
}

// ---- documents ----

async fn list_documents(State(state): State<SharedState>, Path(corpus): Path<String>) -> Api {
    let ws = state.ws()?;
    Ok(Json(ws.documents(&corpus)?).into_response())
}

async fn get_document(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    Ok(with_rev(StatusCode::OK, document, rev))
}

async fn delete_document(
    State(state): State<SharedState>,
    Path((corpus, doc)): Path<(String, String)>,
    headers: HeaderMap,
) -> Api {
    let rev = if_match(&headers)?;
    let mut ws = state.ws()?;
    let new_rev = ws.delete_document(&corpus, &doc, Some(rev))?;
    let mut res = StatusCode::NO_CONTENT.into_response();
    res.headers_mut().insert(header::ETAG, etag(new_rev));
    Ok(res)
}

async fn export(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let rev = ws.document(&corpus, &doc)?.1;
    let xml = ws.export(&corpus, &doc)?;
    let mut res = xml.into_response();
    let headers = res.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/xml; charset=utf-8"));
    headers.insert(header::ETAG, etag(rev));
    Ok(res)
}

#[derive(Serialize)]
struct Preannotated {
    targets: usize,
    ambiguous: usize,
}

async fn preannotate(
    State(state): State<SharedState>,
    Path((corpus, doc)): Path<(String, String)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, lex| {
        let targets = d.preannotate(lex);
        let ambiguous = d.candidates.iter().filter(|c| c.candidate_frames.len() > 1).count();
        Ok(Preannotated { targets, ambiguous })
    })
}

async fn candidates(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    Ok(with_rev(StatusCode::OK, document.candidates, rev))
}

#[derive(Deserialize)]
struct CandidateOverride {
    sentence_ref: String,
    start: usize,
    frame: String,
}

async fn override_candidate(
    State(state): State<SharedState>,
    Path((corpus, doc)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<CandidateOverride>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| {
        d.override_candidate(&body.sentence_ref, body.start, &body.frame).cloned()
    })
}

// ---- drafts ----

async fn drafts(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    Ok(with_rev(StatusCode::OK, document.drafts.drafts, rev))
}

async fn edit_draft(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
    ApiJson(edit): ApiJson<DraftEdit>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| d.edit_draft(id, edit))
}

async fn finalize_draft(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| {
        d.edit_draft(id, DraftEdit::Finalize)
    })
}

// ---- detections and objects ----

async fn detections(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    Ok(with_rev(StatusCode::OK, document.detections, rev))
}

async fn accept_detection(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::CREATED, |d, _| {
        d.accept_detection(id).cloned()
    })
}

async fn reject_detection(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| {
        d.delete_detection(id)?;
        Ok(d.detections.iter().find(|x| x.id == id).cloned())
    })
}

async fn objects(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    let tracks: Vec<_> = document.tracks.tracks.into_values().collect();
    Ok(with_rev(StatusCode::OK, tracks, rev))
}

async fn object(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    let track = document.tracks.get(id).map_err(DocumentError::from)?;
    Ok(with_rev(StatusCode::OK, track, rev))
}

#[derive(Deserialize)]
struct BoxQuery {
    frame: u64,
}

#[derive(Serialize)]
struct BoxAt {
    object_id: u64,
    frame_index: u64,
    #[serde(rename = "box")]
    bbox: Option<BoxGeometry>,
}

async fn object_box(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    Query(q): Query<BoxQuery>,
) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    let track = document.tracks.get(id).map_err(DocumentError::from)?;
    let body = BoxAt {
        object_id: id,
        frame_index: q.frame,
        bbox: track.box_at_frame(q.frame),
    };
    Ok(with_rev(StatusCode::OK, body, rev))
}

#[derive(Deserialize)]
struct NewObject {
    frame_index: u64,
    #[serde(rename = "box")]
    bbox: BoxGeometry,
}

async fn create_object(
    State(state): State<SharedState>,
    Path((corpus, doc)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<NewObject>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::CREATED, |d, _| {
        d.create_object(body.frame_index, body.bbox, TrackOrigin::Human).cloned()
    })
}

/// Track lifecycle operations on one object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ObjectEdit {
    SetKeyframe {
        frame_index: u64,
        #[serde(rename = "box")]
        bbox: BoxGeometry,
    },
    AutoTrack {
        until_frame: u64,
    },
    Pause,
    Resume {
        frame_index: u64,
        #[serde(rename = "box")]
        bbox: BoxGeometry,
    },
    End,
}

async fn edit_object(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
    ApiJson(edit): ApiJson<ObjectEdit>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| {
        match edit {
            ObjectEdit::SetKeyframe { frame_index, bbox } => d.set_keyframe(id, frame_index, bbox),
            ObjectEdit::AutoTrack { until_frame } => d.auto_track(id, until_frame),
            ObjectEdit::Pause => d.pause_object(id),
            ObjectEdit::Resume { frame_index, bbox } => d.resume_object(id, frame_index, bbox),
            ObjectEdit::End => d.end_object(id),
        }
        .cloned()
    })
}

async fn delete_object(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| d.delete_object(id))
}

async fn delete_entity(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| d.delete_chain(id))
}

// ---- annotations ----

#[derive(Serialize)]
struct AnnotationsView<'a> {
    text_sets: Vec<&'a charonette_core::annotation::TextAnnotationSet>,
    image_annotations: Vec<&'a charonette_core::annotation::ImageAnnotation>,
    correlations: Vec<&'a charonette_core::annotation::Correlation>,
}

async fn annotations(State(state): State<SharedState>, Path((corpus, doc)): Path<(String, String)>) -> Api {
    let ws = state.ws()?;
    let (document, rev) = ws.document(&corpus, &doc)?;
    let view = AnnotationsView {
        text_sets: document.text_sets.values().collect(),
        image_annotations: document.image_annotations.values().collect(),
        correlations: document.correlations.values().collect(),
    };
    Ok(with_rev(StatusCode::OK, view, rev))
}

/// A text annotation set on a target word, or a frame/FE assignment on an
/// entity or object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NewAnnotation {
    Text {
        sentence_ref: String,
        target: Span,
        frame: String,
        #[serde(default)]
        lu: Option<String>,
    },
    Image {
        target: ImageTarget,
        frame: String,
        fe: String,
        #[serde(default)]
        cv_name: Option<String>,
    },
}

async fn create_annotation(
    State(state): State<SharedState>,
    Path((corpus, doc)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<NewAnnotation>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::CREATED, |d, lex| {
        Ok(match body {
            NewAnnotation::Text {
                sentence_ref,
                target,
                frame,
                lu,
            } => serde_json::to_value(d.create_text_as(lex, &sentence_ref, target, &frame, lu.as_deref())?),
            NewAnnotation::Image {
                target,
                frame,
                fe,
                cv_name,
            } => serde_json::to_value(d.annotate_image_target(
                lex,
                target,
                &frame,
                &fe,
                cv_name.as_deref(),
                Origin::Human,
            )?),
        }
        .expect("annotation records serialize"))
    })
}

/// Edits of one text annotation set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AnnotationEdit {
    SetLabel { layer: Layer, span: Span, label: String },
    RemoveLabel { layer: Layer, span: Span },
    MarkNi { fe: String, ni_type: String },
    UnmarkNi { fe: String },
}

async fn edit_annotation(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
    ApiJson(edit): ApiJson<AnnotationEdit>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, lex| {
        match edit {
            AnnotationEdit::SetLabel { layer, span, label } => d.set_layer_label(lex, id, layer, span, &label),
            AnnotationEdit::RemoveLabel { layer, span } => d.remove_layer_label(id, layer, span),
            AnnotationEdit::MarkNi { fe, ni_type } => d.mark_ni(lex, id, &fe, &ni_type),
            AnnotationEdit::UnmarkNi { fe } => d.unmark_ni(id, &fe),
        }
        .cloned()
    })
}

async fn delete_annotation(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| d.delete_text_as(id))
}

async fn delete_image_annotation(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| {
        d.delete_image_annotation(id)
    })
}

#[derive(Deserialize)]
struct NewCorrelation {
    target: ImageTarget,
    sentence_ref: String,
    span: Span,
}

async fn create_correlation(
    State(state): State<SharedState>,
    Path((corpus, doc)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(body): ApiJson<NewCorrelation>,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::CREATED, |d, _| {
        d.correlate(body.target, &body.sentence_ref, body.span).cloned()
    })
}

async fn delete_correlation(
    State(state): State<SharedState>,
    Path((corpus, doc, id)): Path<(String, String, u64)>,
    headers: HeaderMap,
) -> Api {
    mutate(&state, &headers, &corpus, &doc, StatusCode::OK, |d, _| d.delete_correlation(id))
}
