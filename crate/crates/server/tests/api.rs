use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use charonette_core::annotation::{ImageTarget, Layer, Origin};
use charonette_core::store::StoredRecord;
use charonette_core::tracking::TrackOrigin;
use charonette_core::video::DraftEdit;
use charonette_core::workspace::{VideoImport, Workspace};
use charonette_core::{BoxGeometry, Lexicon, Span};
use charonette_server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::sync::Arc;
use tower::ServiceExt;

const BUNDLE: &[u8] = include_bytes!("../../core/fixtures/static_bundle.zip");
const TRANSCRIPT: &str = include_str!("../../core/fixtures/video/transcript.tsv");
const SUBTITLES: &str = include_str!("../../core/fixtures/video/subtitles.tsv");
const DETECTIONS: &str = include_str!("../../core/fixtures/video/detections.tsv");
const DOC: &str = "/api/v1/corpora/fala/docs/bebe";

struct Reply {
    status: StatusCode,
    etag: Option<u64>,
    body: Value,
    raw: Vec<u8>,
}

fn app(dir: &std::path::Path, token: Option<&str>) -> (Router, Arc<AppState>) {
    let ws = Workspace::open(dir, Arc::new(Lexicon::fixture())).unwrap();
    let state = AppState::new(ws, token.map(str::to_string));
    (router(state.clone()), state)
}

async fn send(app: &Router, req: Request<Body>) -> Reply {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let etag = res
        .headers()
        .get(header::ETAG)
        .map(|v| v.to_str().unwrap().trim_matches('"').parse().unwrap());
    let raw = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    let body = serde_json::from_slice(&raw).unwrap_or(Value::Null);
    Reply { status, etag, body, raw }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>, rev: Option<u64>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(r) = rev {
        req = req.header(header::IF_MATCH, format!("\"{r}\""));
    }
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    };
    send(app, req.unwrap()).await
}

async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, None, None).await
}

fn video_request() -> Value {
    json!({
        "doc_id": "bebe",
        "transcript": TRANSCRIPT,
        "subtitles": SUBTITLES,
        "detections": DETECTIONS,
        "width": 640,
        "height": 360,
        "first_object_id": 323
    })
}

fn span_of(text: &str, needle: &str) -> Span {
    let byte = text.find(needle).unwrap();
    let start = text[..byte].chars().count();
    Span::new(start, start + needle.chars().count())
}

/// Sends a mutation with the current revision and returns the reply,
/// tracking the new revision on success.
struct Session {
    app: Router,
    rev: u64,
}

impl Session {
    async fn mutate(&mut self, method: Method, path: &str, body: Option<Value>) -> Reply {
        let r = call(&self.app, method, &format!("{DOC}{path}"), body, Some(self.rev)).await;
        if let (true, Some(rev)) = (r.status.is_success(), r.etag) {
            self.rev = rev;
        }
        r
    }
}

#[tokio::test]
async fn lexicon_queries() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path(), None);
    let r = get(&app, "/api/v1/frames?name=Ingestion").await;
    assert_eq!(r.status, StatusCode::OK);
    let core: Vec<&str> = r.body["fes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|fe| fe["coreness"] == "core")
        .map(|fe| fe["name"].as_str().unwrap())
        .collect();
    assert_eq!(core, ["Ingestor", "Ingestibles"]);
    assert!(r.body["lus"].as_array().unwrap().contains(&json!("beber.v@Ingestion")));

    let fes = get(&app, "/api/v1/frames/Ingestion/fes").await;
    assert_eq!(fes.body, r.body["fes"]);
    assert_eq!(get(&app, "/api/v1/frames/Nope/fes").await.body["code"], "unknown_frame");
    assert!(get(&app, "/api/v1/frames").await.body.as_array().unwrap().len() >= 10);

    let lus = get(&app, "/api/v1/lus?lemma=beber").await;
    assert_eq!(lus.body[0]["key"], "beber.v@Ingestion");
    assert_eq!(lus.body[0]["language"], "pt-BR");
    let missing = get(&app, "/api/v1/lus").await;
    assert_eq!(missing.status, StatusCode::BAD_REQUEST);
    assert_eq!(missing.body["field"], "lemma");
}

#[tokio::test]
async fn health_waits_for_workspace() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::pending(None);
    let app = router(state.clone());
    assert_eq!(get(&app, "/health").await.status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(get(&app, "/api/v1/corpora").await.body["code"], "not_ready");
    state.install(Workspace::open(dir.path(), Arc::new(Lexicon::fixture())).unwrap());
    let r = get(&app, "/health").await;
    assert_eq!((r.status, r.body["status"].as_str()), (StatusCode::OK, Some("ok")));
}

#[tokio::test]
async fn bearer_token() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path(), Some("s3cret"));
    assert_eq!(get(&app, "/api/v1/health").await.status, StatusCode::OK);
    let denied = get(&app, "/api/v1/corpora").await;
    assert_eq!((denied.status, denied.body["code"].as_str()), (StatusCode::UNAUTHORIZED, Some("unauthorized")));
    let req = Request::get("/api/v1/corpora")
        .header(header::AUTHORIZATION, "Bearer s3cret")
        .body(Body::empty())
        .unwrap();
    assert_eq!(send(&app, req).await.status, StatusCode::OK);
}

#[tokio::test]
async fn static_import_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (app, state) = app(dir.path(), None);
    let created = call(&app, Method::POST, "/api/v1/corpora", Some(json!({"name": "flickr", "language": "en"})), None).await;
    assert_eq!(created.status, StatusCode::CREATED);
    let dup = call(&app, Method::POST, "/api/v1/corpora", Some(json!({"name": "flickr"})), None).await;
    assert_eq!((dup.status, dup.body["code"].as_str()), (StatusCode::CONFLICT, Some("already_exists")));

    let req = Request::post("/api/v1/corpora/flickr/import-static")
        .header(header::CONTENT_TYPE, "application/zip")
        .body(Body::from(BUNDLE))
        .unwrap();
    let r = send(&app, req).await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.body["documents"], json!(["girl_0", "drink_0"]));
    let bad = send(&app, Request::post("/api/v1/corpora/x/import-static").body(Body::from("nope")).unwrap()).await;
    assert_eq!((bad.status, bad.body["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_bundle")));

    let docs = get(&app, "/api/v1/corpora/flickr/docs").await;
    assert_eq!(docs.body.as_array().unwrap().len(), 2);
    let doc = get(&app, "/api/v1/corpora/flickr/docs/drink_0").await;
    assert_eq!(doc.etag, Some(1));
    assert_eq!(doc.body["chains"][0]["entity_id"], 7);

    let uri = "/api/v1/corpora/flickr/docs/drink_0/annotations";
    let wrong = json!({"kind": "image", "target": {"kind": "entity", "id": 7}, "frame": "People", "fe": "Ingestor"});
    let missing = call(&app, Method::POST, uri, Some(wrong.clone()), None).await;
    assert_eq!(missing.status, StatusCode::PRECONDITION_REQUIRED);
    let r = call(&app, Method::POST, uri, Some(wrong), Some(1)).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.body["code"], "fe_not_in_frame");

    let good = json!({"kind": "image", "target": {"kind": "entity", "id": 7}, "frame": "Ingestion", "fe": "Ingestor", "cv_name": "man.n"});
    let r = call(&app, Method::POST, uri, Some(good.clone()), Some(1)).await;
    assert_eq!(r.status, StatusCode::CREATED, "{:?}", r.body);
    assert_eq!(r.etag, Some(2));
    assert_eq!(r.body["ia_id"], 1);
    // Replaying the request with the revision it was sent with conflicts.
    let again = call(&app, Method::POST, uri, Some(good), Some(1)).await;
    assert_eq!((again.status, again.body["code"].as_str()), (StatusCode::CONFLICT, Some("revision_conflict")));

    let gone = get(&app, "/api/v1/corpora/flickr/docs/nope").await;
    assert_eq!((gone.status, gone.body["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_document")));
    let r = call(&app, Method::DELETE, "/api/v1/corpora/flickr/docs/drink_0/entities/99", None, Some(2)).await;
    assert_eq!((r.status, r.body["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_chain")));
    let r = call(&app, Method::DELETE, "/api/v1/corpora/flickr/docs/drink_0/entities/7", None, Some(2)).await;
    assert_eq!(r.status, StatusCode::OK);
    let doc = get(&app, "/api/v1/corpora/flickr/docs/drink_0").await;
    assert_eq!(doc.body["image_annotations"], json!({}));

    let malformed = send(
        &app,
        Request::post(uri)
            .header(header::CONTENT_TYPE, "application/json")
            .header(header::IF_MATCH, "3")
            .body(Body::from("{"))
            .unwrap(),
    )
    .await;
    assert_eq!((malformed.status, malformed.body["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));

    let export = get(&app, "/api/v1/corpora/flickr/docs/girl_0/export").await;
    assert_eq!(export.status, StatusCode::OK);
    let direct = state.with_workspace(|ws| ws.export("flickr", "girl_0").unwrap()).unwrap();
    assert_eq!(export.raw, direct);
}

#[tokio::test]
async fn preannotate_sentence_three() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path(), None);
    let r = call(&app, Method::POST, "/api/v1/corpora/fala/import-video", Some(video_request()), None).await;
    assert_eq!(r.status, StatusCode::CREATED, "{:?}", r.body);
    let mut s = Session { app: app.clone(), rev: r.etag.unwrap() };
    let drafts = get(&app, &format!("{DOC}/drafts")).await;
    assert_eq!(drafts.body.as_array().unwrap().len(), 3);
    assert_eq!(s.mutate(Method::POST, "/drafts/1/finalize", None).await.status, StatusCode::OK);
    let r = s.mutate(Method::POST, "/preannotate", None).await;
    assert_eq!(r.body["targets"], 4);
    let c = get(&app, &format!("{DOC}/candidates")).await;
    let chosen: Vec<&str> = c.body.as_array().unwrap().iter().map(|t| t["chosen_frame"].as_str().unwrap()).collect();
    assert_eq!(chosen, ["Desirability", "Locative_relation", "Ingestion", "Change_of_temperature"]);

    let start = c.body[0]["span"]["start"].as_u64().unwrap();
    let bad = s
        .mutate(Method::PATCH, "/candidates", Some(json!({"sentence_ref": "s1", "start": start, "frame": "Ingestion"})))
        .await;
    assert_eq!((bad.status, bad.body["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("not_a_candidate")));

    let split = s.mutate(Method::PATCH, "/drafts/2", Some(json!({"op": "split_at", "index": 2}))).await;
    assert_eq!(split.status, StatusCode::OK);
    assert_eq!(split.body.as_array().unwrap().len(), 2);
    let finalized = s.mutate(Method::PATCH, "/drafts/1", Some(json!({"op": "merge_with_next"}))).await;
    assert_eq!(finalized.body["code"], "draft_finalized");
}

async fn api_replay(app: &Router) -> (Reply, Reply) {
    let r = call(app, Method::POST, "/api/v1/corpora/fala/import-video", Some(video_request()), None).await;
    let mut s = Session { app: app.clone(), rev: r.etag.unwrap() };
    s.mutate(Method::POST, "/drafts/1/finalize", None).await;
    s.mutate(Method::POST, "/drafts/2/finalize", None).await;
    let a = s.mutate(Method::POST, "/detections/1/accept", None).await;
    assert_eq!(a.body["object_id"], 323);
    let b = s.mutate(Method::POST, "/detections/3/accept", None).await;
    assert_eq!(b.body["object_id"], 324);
    s.mutate(Method::DELETE, "/detections/2", None).await;
    let g = s
        .mutate(
            Method::POST,
            "/objects",
            Some(json!({"frame_index": 0, "box": {"xmin": 298, "ymin": 176, "xmax": 344, "ymax": 262}})),
        )
        .await;
    assert_eq!(g.body["object_id"], 325);
    for id in [323, 324, 325] {
        for op in [json!({"op": "auto_track", "until_frame": 62}), json!({"op": "pause"}), json!({"op": "end"})] {
            let r = s.mutate(Method::PATCH, &format!("/objects/{id}"), Some(op)).await;
            assert_eq!(r.status, StatusCode::OK, "{:?}", r.body);
        }
    }
    for (id, fe, cv) in [(323, "Ingestor", "person.n"), (324, "Ingestor", "person.n"), (325, "Ingestibles", "glass.n")] {
        let body = json!({"kind": "image", "target": {"kind": "object", "id": id}, "frame": "Ingestion", "fe": fe, "cv_name": cv});
        let r = s.mutate(Method::POST, "/annotations", Some(body)).await;
        assert_eq!(r.status, StatusCode::CREATED, "{:?}", r.body);
    }
    let doc = get(app, DOC).await.body;
    let s1 = doc["sentences"][0]["text"].as_str().unwrap().to_string();
    let s2 = doc["sentences"][1]["text"].as_str().unwrap().to_string();
    let as1 = s
        .mutate(
            Method::POST,
            "/annotations",
            Some(json!({"kind": "text", "sentence_ref": "s1", "target": span_of(&s1, "bebe"), "frame": "Ingestion", "lu": "beber.v"})),
        )
        .await;
    let as1 = as1.body["as_id"].as_u64().unwrap();
    s.mutate(
        Method::PATCH,
        &format!("/annotations/{as1}"),
        Some(json!({"op": "set_label", "layer": "FE", "span": span_of(&s1, "a gente"), "label": "Ingestor"})),
    )
    .await;
    let as2 = s
        .mutate(
            Method::POST,
            "/annotations",
            Some(json!({"kind": "text", "sentence_ref": "s2", "target": span_of(&s2, "bebe"), "frame": "Ingestion", "lu": "beber.v"})),
        )
        .await;
    let as2 = as2.body["as_id"].as_u64().unwrap();
    for (needle, fe) in [("a gente", "Ingestor"), ("vinho", "Ingestibles")] {
        s.mutate(
            Method::PATCH,
            &format!("/annotations/{as2}"),
            Some(json!({"op": "set_label", "layer": "FE", "span": span_of(&s2, needle), "label": fe})),
        )
        .await;
    }
    let ni = json!({"op": "mark_ni", "fe": "Ingestibles", "ni_type": "INI"});
    let rejected = s.mutate(Method::PATCH, &format!("/annotations/{as2}"), Some(ni.clone())).await;
    let accepted = s.mutate(Method::PATCH, &format!("/annotations/{as1}"), Some(ni)).await;
    for id in [323, 324] {
        let body = json!({"target": {"kind": "object", "id": id}, "sentence_ref": "s1", "span": span_of(&s1, "a gente")});
        assert_eq!(s.mutate(Method::POST, "/correlations", Some(body)).await.status, StatusCode::CREATED);
    }
    (rejected, accepted)
}

/// The same session through direct library calls, one update per request.
fn facade_replay(ws: &mut Workspace) {
    let (c, d) = ("fala", "bebe");
    let mut input = VideoImport::new(d, TRANSCRIPT.into(), 640, 360);
    input.subtitles = Some(SUBTITLES.into());
    input.detections = Some(DETECTIONS.into());
    input.first_object_id = Some(323);
    ws.import_video(c, &input).unwrap();
    ws.update(c, d, None, |doc, _| doc.edit_draft(1, DraftEdit::Finalize)).unwrap();
    ws.update(c, d, None, |doc, _| doc.edit_draft(2, DraftEdit::Finalize)).unwrap();
    ws.update(c, d, None, |doc, _| doc.accept_detection(1).map(|_| ())).unwrap();
    ws.update(c, d, None, |doc, _| doc.accept_detection(3).map(|_| ())).unwrap();
    ws.update(c, d, None, |doc, _| doc.delete_detection(2)).unwrap();
    ws.update(c, d, None, |doc, _| {
        doc.create_object(0, BoxGeometry::new(298, 176, 344, 262), TrackOrigin::Human).map(|_| ())
    })
    .unwrap();
    for id in [323, 324, 325] {
        ws.update(c, d, None, |doc, _| doc.auto_track(id, 62).map(|_| ())).unwrap();
        ws.update(c, d, None, |doc, _| doc.pause_object(id).map(|_| ())).unwrap();
        ws.update(c, d, None, |doc, _| doc.end_object(id).map(|_| ())).unwrap();
    }
    for (id, fe, cv) in [(323, "Ingestor", "person.n"), (324, "Ingestor", "person.n"), (325, "Ingestibles", "glass.n")] {
        ws.update(c, d, None, |doc, lex| {
            doc.annotate_image_target(lex, ImageTarget::Object(id), "Ingestion", fe, Some(cv), Origin::Human)
                .map(|_| ())
        })
        .unwrap();
    }
    let (doc, _) = ws.document(c, d).unwrap();
    let (s1, s2) = (doc.sentences[0].text.clone(), doc.sentences[1].text.clone());
    let (as1, _) = ws
        .update(c, d, None, |doc, lex| {
            Ok(doc.create_text_as(lex, "s1", span_of(&s1, "bebe"), "Ingestion", Some("beber.v"))?.as_id)
        })
        .unwrap();
    ws.update(c, d, None, |doc, lex| {
        doc.set_layer_label(lex, as1, Layer::Fe, span_of(&s1, "a gente"), "Ingestor").map(|_| ())
    })
    .unwrap();
    let (as2, _) = ws
        .update(c, d, None, |doc, lex| {
            Ok(doc.create_text_as(lex, "s2", span_of(&s2, "bebe"), "Ingestion", Some("beber.v"))?.as_id)
        })
        .unwrap();
    for (needle, fe) in [("a gente", "Ingestor"), ("vinho", "Ingestibles")] {
        ws.update(c, d, None, |doc, lex| {
            doc.set_layer_label(lex, as2, Layer::Fe, span_of(&s2, needle), fe).map(|_| ())
        })
        .unwrap();
    }
    assert!(ws.update(c, d, None, |doc, lex| doc.mark_ni(lex, as2, "Ingestibles", "INI").map(|_| ())).is_err());
    ws.update(c, d, None, |doc, lex| doc.mark_ni(lex, as1, "Ingestibles", "INI").map(|_| ())).unwrap();
    for id in [323, 324] {
        ws.update(c, d, None, |doc, _| {
            doc.correlate(ImageTarget::Object(id), "s1", span_of(&s1, "a gente")).map(|_| ())
        })
        .unwrap();
    }
}

#[tokio::test]
async fn api_matches_library_calls() {
    let api_dir = tempfile::tempdir().unwrap();
    let (app, state) = app(api_dir.path(), None);
    let (rejected, accepted) = api_replay(&app).await;
    assert_eq!(rejected.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(rejected.body["code"], "ni_fe_labeled");
    assert_eq!(accepted.status, StatusCode::OK);
    assert_eq!(accepted.body["ni_entries"], json!([{"fe": "Ingestibles", "ni_type": "INI"}]));

    let lib_dir = tempfile::tempdir().unwrap();
    let mut ws = Workspace::open(lib_dir.path(), Arc::new(Lexicon::fixture())).unwrap();
    facade_replay(&mut ws);

    let through_api: Vec<StoredRecord> = state.with_workspace(|w| w.store().all_records().cloned().collect()).unwrap();
    let direct: Vec<StoredRecord> = ws.store().all_records().cloned().collect();
    assert_eq!(through_api, direct);

    let ias = get(&app, &format!("{DOC}/annotations")).await.body["image_annotations"].clone();
    let summary: Vec<(u64, &str, &str)> = ias
        .as_array()
        .unwrap()
        .iter()
        .map(|ia| (ia["target"]["id"].as_u64().unwrap(), ia["fe"].as_str().unwrap(), ia["cv_name"].as_str().unwrap()))
        .collect();
    assert_eq!(
        summary,
        [
            (323, "Ingestor", "person.n@People"),
            (324, "Ingestor", "person.n@People"),
            (325, "Ingestibles", "glass.n@Container")
        ]
    );

    let boxed = get(&app, &format!("{DOC}/objects/324/box?frame=12")).await;
    assert_eq!(boxed.body["box"], json!({"xmin": 380, "ymin": 40, "xmax": 600, "ymax": 360}));
    let before = get(&app, &format!("{DOC}/objects/324/box?frame=11")).await;
    assert_eq!(before.body["box"], Value::Null);
    let nope = get(&app, &format!("{DOC}/objects/999")).await;
    assert_eq!((nope.status, nope.body["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_object")));

    let exported = get(&app, &format!("{DOC}/export")).await;
    assert_eq!(exported.raw, ws.export("fala", "bebe").unwrap());
    let r = call(&app, Method::POST, "/api/v1/corpora/copy/import", None, None).await;
    assert_eq!(r.body["code"], "xml_parse_error");
    let req = Request::post("/api/v1/corpora/copy/import").body(Body::from(exported.raw.clone())).unwrap();
    let r = send(&app, req).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let copy = get(&app, "/api/v1/corpora/copy/docs/bebe/export").await;
    assert_eq!(
        String::from_utf8(copy.raw).unwrap(),
        String::from_utf8(exported.raw).unwrap().replace("corpus=\"fala\"", "corpus=\"copy\"")
    );

    let ended = call(&app, Method::PATCH, &format!("{DOC}/objects/323"), Some(json!({"op": "pause"})), exported.etag).await;
    assert_eq!(ended.body["code"], "illegal_transition");
    let del = call(&app, Method::DELETE, DOC, None, exported.etag).await;
    assert_eq!(del.status, StatusCode::NO_CONTENT);
    assert_eq!(get(&app, DOC).await.status, StatusCode::NOT_FOUND);
}
