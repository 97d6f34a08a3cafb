#![allow(dead_code)]

use charonette_core::annotation::{ImageTarget, Layer, Origin};
use charonette_core::document::DocumentError;
use charonette_core::video::DraftEdit;
use charonette_core::workspace::{VideoImport, Workspace, WorkspaceError};
use charonette_core::{BoxGeometry, Span};

pub const BUNDLE: &[u8] = include_bytes!("../../fixtures/static_bundle.zip");
pub const TRANSCRIPT: &str = include_str!("../../fixtures/video/transcript.tsv");
pub const SUBTITLES: &str = include_str!("../../fixtures/video/subtitles.tsv");
pub const DETECTIONS: &str = include_str!("../../fixtures/video/detections.tsv");

pub const VIDEO_CORPUS: &str = "fala";
pub const VIDEO_DOC: &str = "bebe";

pub fn span_of(text: &str, needle: &str) -> Span {
    let byte = text.find(needle).expect("needle in text");
    let start = text[..byte].chars().count();
    Span::new(start, start + needle.chars().count())
}

pub fn video_import() -> VideoImport {
    let mut input = VideoImport::new(VIDEO_DOC, TRANSCRIPT.to_string(), 640, 360);
    input.subtitles = Some(SUBTITLES.to_string());
    input.detections = Some(DETECTIONS.to_string());
    input.first_object_id = Some(323);
    input
}

/// Outcome of the two NI attempts made during the replay.
pub struct NiOutcome {
    pub rejected: Result<(), String>,
    pub accepted: Result<(), String>,
}

fn as_code(e: WorkspaceError) -> String {
    e.code().to_string()
}

/// Replays the video session: two detected people, one hand-drawn glass,
/// the spoken sentence annotated for Ingestion with its unexpressed
/// Ingestibles, and a second sentence where Ingestibles is expressed.
pub fn replay_video_session(ws: &mut Workspace) -> Result<NiOutcome, WorkspaceError> {
    let (c, d) = (VIDEO_CORPUS, VIDEO_DOC);
    ws.update(c, d, None, |doc, _| doc.edit_draft(1, DraftEdit::Finalize))?;
    ws.update(c, d, None, |doc, _| doc.edit_draft(2, DraftEdit::Finalize))?;

    // Detections sorted: 1 = person@0, 2 = wine glass@0, 3 = person@12.
    let (a, _) = ws.update(c, d, None, |doc, _| Ok(doc.accept_detection(1)?.object_id))?;
    let (b, _) = ws.update(c, d, None, |doc, _| Ok(doc.accept_detection(3)?.object_id))?;
    ws.update(c, d, None, |doc, _| doc.delete_detection(2))?;
    let (g, _) = ws.update(c, d, None, |doc, _| {
        Ok(doc
            .create_object(0, BoxGeometry::new(298, 176, 344, 262), charonette_core::tracking::TrackOrigin::Human)?
            .object_id)
    })?;
    for id in [a, b, g] {
        ws.update(c, d, None, |doc, _| {
            doc.auto_track(id, 62)?;
            doc.pause_object(id)?;
            doc.end_object(id)?;
            Ok(())
        })?;
    }

    for (id, fe, cv) in [(a, "Ingestor", "person.n"), (b, "Ingestor", "person.n"), (g, "Ingestibles", "glass.n")] {
        ws.update(c, d, None, |doc, lex| {
            doc.annotate_image_target(lex, ImageTarget::Object(id), "Ingestion", fe, Some(cv), Origin::Human)?;
            Ok(())
        })?;
    }

    let (doc, _) = ws.document(c, d)?;
    let s1 = doc.sentences[0].text.clone();
    let s2 = doc.sentences[1].text.clone();
    let (as1, _) = ws.update(c, d, None, |doc, lex| {
        let id = doc.create_text_as(lex, "s1", span_of(&s1, "bebe"), "Ingestion", Some("beber.v"))?.as_id;
        doc.set_layer_label(lex, id, Layer::Fe, span_of(&s1, "a gente"), "Ingestor")?;
        Ok(id)
    })?;
    let (as2, _) = ws.update(c, d, None, |doc, lex| {
        let id = doc.create_text_as(lex, "s2", span_of(&s2, "bebe"), "Ingestion", Some("beber.v"))?.as_id;
        doc.set_layer_label(lex, id, Layer::Fe, span_of(&s2, "a gente"), "Ingestor")?;
        doc.set_layer_label(lex, id, Layer::Fe, span_of(&s2, "vinho"), "Ingestibles")?;
        Ok(id)
    })?;
    let rejected = ws
        .update(c, d, None, |doc, lex| doc.mark_ni(lex, as2, "Ingestibles", "INI").map(|_| ()))
        .map(|_| ())
        .map_err(as_code);
    let accepted = ws
        .update(c, d, None, |doc, lex| doc.mark_ni(lex, as1, "Ingestibles", "INI").map(|_| ()))
        .map(|_| ())
        .map_err(as_code);
    for id in [a, b] {
        ws.update(c, d, None, |doc, _| {
            doc.correlate(ImageTarget::Object(id), "s1", span_of(&s1, "a gente"))?;
            Ok::<_, DocumentError>(())
        })?;
    }
    Ok(NiOutcome { rejected, accepted })
}
