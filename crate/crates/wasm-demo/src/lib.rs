//! Browser bindings for three core operations. Every export takes and
//! returns JSON text; failures come back as `{"error": "..."}`.

use charonette_core::preannotate::{preannotate_sentence, TargetCandidate};
use charonette_core::static_corpus::{parse_caption_chains, ParsedCaption};
use charonette_core::tracking::{TrackBook, TrackOrigin, VideoBounds};
use charonette_core::video::frame_to_time;
use charonette_core::{BoxGeometry, Lexicon};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use wasm_bindgen::prelude::wasm_bindgen;

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(Lexicon::fixture)
}

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).expect("demo outputs serialize"),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

pub fn caption(raw: &str) -> Result<ParsedCaption, String> {
    parse_caption_chains(raw).map_err(|e| e.to_string())
}

pub fn targets(sentence: &str) -> Vec<TargetCandidate> {
    preannotate_sentence("s1", sentence, lexicon())
}

#[derive(Debug, Deserialize)]
pub struct Keyframe {
    pub frame: u64,
    #[serde(rename = "box")]
    pub bbox: BoxGeometry,
}

#[derive(Debug, Deserialize)]
pub struct TrackInput {
    pub width: u32,
    pub height: u32,
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct BoxAt {
    pub frame: u64,
    pub time_ms: i64,
    #[serde(rename = "box")]
    pub bbox: Option<BoxGeometry>,
}

/// Builds one track from keyframes (any order) and reads its box at `frame`.
pub fn box_at(input: &TrackInput, frame: u64) -> Result<BoxAt, String> {
    let bounds = VideoBounds {
        width: input.width,
        height: input.height,
        frame_count: None,
    };
    let mut keys: Vec<&Keyframe> = input.keyframes.iter().collect();
    keys.sort_by_key(|k| k.frame);
    let (first, rest) = keys.split_first().ok_or("at least one keyframe is needed")?;
    let mut book = TrackBook::default();
    let id = book
        .create_object(&bounds, first.frame, first.bbox, TrackOrigin::Human)
        .map_err(|e| e.to_string())?
        .object_id;
    for k in rest {
        book.set_keyframe(&bounds, id, k.frame, k.bbox).map_err(|e| e.to_string())?;
    }
    let track = book.get(id).map_err(|e| e.to_string())?;
    let time_ms = frame_to_time(frame as i64).map_err(|e| e.to_string())?;
    Ok(BoxAt {
        frame,
        time_ms,
        bbox: track.box_at_frame(frame),
    })
}

/// Plain sentence and entity mentions of a caption with chain markup.
#[wasm_bindgen]
pub fn parse_caption(raw: &str) -> String {
    respond(caption(raw))
}

/// Frame-evoking targets of a sentence, disambiguated against the bundled
/// lexicon.
#[wasm_bindgen]
pub fn preannotate(sentence: &str) -> String {
    respond(Ok(targets(sentence)))
}

/// `track_json` is `{"width", "height", "keyframes": [{"frame", "box"}]}`.
#[wasm_bindgen]
pub fn box_at_frame(track_json: &str, frame: u32) -> String {
    respond(
        serde_json::from_str::<TrackInput>(track_json)
            .map_err(|e| e.to_string())
            .and_then(|input| box_at(&input, frame.into())),
    )
}
