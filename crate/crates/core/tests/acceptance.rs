//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any check fails.

mod common;

use charonette_core::annotation::Layer;
use charonette_core::document::{Document, DocumentMode, MediaInfo};
use charonette_core::export::{export_document, import_document};
use charonette_core::lexicon::FIXTURE_LEXICON;
use charonette_core::preannotate::preannotate_sentence;
use charonette_core::static_corpus::{link_entities, open_bundle, BoundingBox, BundleImage, CaptionLine, CorpusBundle};
use charonette_core::tracking::{TrackBook, TrackOrigin, VideoBounds};
use charonette_core::video::{frame_to_time, time_to_frame, DraftBook, DraftEdit, TranscriptWord};
use charonette_core::workspace::Workspace;
use charonette_core::{BoxGeometry, Lexicon, Span};
use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::Arc;
use std::time::{Duration, Instant};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn workspace() -> (tempfile::TempDir, Workspace) {
    let dir = tempfile::tempdir().unwrap();
    let ws = Workspace::open(dir.path(), Arc::new(Lexicon::fixture())).unwrap();
    (dir, ws)
}

fn caption_chains() -> Check {
    let bundle = open_bundle("flickr", BUNDLE).map_err(|e| e.to_string())?;
    let linkage = link_entities(&bundle).map_err(|e| e.to_string())?;
    let girl = linkage
        .documents
        .iter()
        .find(|d| d.image_ref == "girl.jpg")
        .ok_or("girl.jpg document missing")?;
    let phrases: Vec<&str> = girl
        .chains
        .iter()
        .map(|c| c.phrase_spans[0].span.slice(&girl.sentence))
        .collect();
    let want = ["A girl", "a ponytail", "her shoes", "a bent knee", "a grassy field"];
    ensure!(phrases == want, "chains {phrases:?}");
    Ok(format!("{} chains", phrases.len()))
}

fn sentence_three() -> Check {
    let lex = Lexicon::fixture();
    let out = preannotate_sentence("s1", "Bom que aqui a gente bebe e vai esquentando, né?", &lex);
    let got: Vec<(&str, &str)> = out
        .iter()
        .map(|t| (t.text.as_str(), t.chosen_frame.as_deref().unwrap_or("-")))
        .collect();
    let want = [
        ("Bom", "Desirability"),
        ("aqui", "Locative_relation"),
        ("bebe", "Ingestion"),
        ("esquentando", "Change_of_temperature"),
    ];
    ensure!(got == want, "targets {got:?}");
    Ok("4 targets".into())
}

fn video_replay() -> Check {
    let (_dir, mut ws) = workspace();
    ws.import_video(VIDEO_CORPUS, &video_import()).map_err(|e| e.to_string())?;
    let ni = replay_video_session(&mut ws).map_err(|e| e.to_string())?;
    let (doc, _) = ws.document(VIDEO_CORPUS, VIDEO_DOC).map_err(|e| e.to_string())?;
    let got: Vec<String> = doc
        .image_annotations
        .values()
        .map(|ia| {
            format!(
                "{}:{}/{}+{}",
                ia.target.id(),
                ia.frame,
                ia.fe,
                ia.cv_name.as_deref().unwrap_or("-")
            )
        })
        .collect();
    let want = [
        "323:Ingestion/Ingestor+person.n@People",
        "324:Ingestion/Ingestor+person.n@People",
        "325:Ingestion/Ingestibles+glass.n@Container",
    ];
    ensure!(got == want, "image annotations {got:?}");
    ensure!(
        ni.rejected == Err("ni_fe_labeled".to_string()),
        "NI on labelled FE gave {:?}",
        ni.rejected
    );
    ensure!(ni.accepted.is_ok(), "NI on unlabelled FE gave {:?}", ni.accepted);
    Ok("objects 323, 324, 325; NI rejected then accepted".into())
}

fn timecodes() -> Check {
    let mut rng = StdRng::seed_from_u64(25);
    let mut prev: Option<(i64, u64)> = None;
    let mut times: Vec<i64> = (0..100_000).map(|_| rng.random_range(0..86_400_000i64)).collect();
    times.sort_unstable();
    for t in times {
        let n = time_to_frame(t).map_err(|e| e.to_string())?;
        let back = frame_to_time(n as i64).map_err(|e| e.to_string())?;
        ensure!(time_to_frame(back) == Ok(n), "frame {n} does not round-trip");
        ensure!(back <= t && t - back < 40, "time {t} maps to frame {n} starting at {back}");
        if let Some((pt, pn)) = prev {
            ensure!(pt > t || pn <= n, "time {t} after {pt} but frame {n} before {pn}");
        }
        prev = Some((t, n));
    }
    Ok("100000 cases".into())
}

fn tracking_oracle() -> Check {
    let bounds = VideoBounds {
        width: 1920,
        height: 1080,
        frame_count: None,
    };
    let mut rng = StdRng::seed_from_u64(1000);
    let boxed = |rng: &mut StdRng| {
        let x0 = rng.random_range(0..1900);
        let y0 = rng.random_range(0..1060);
        BoxGeometry::new(x0, y0, rng.random_range(x0 + 1..=1920), rng.random_range(y0 + 1..=1080))
    };
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k0 = rng.random_range(0..10_000u64);
        let k1 = k0 + rng.random_range(1..500u64);
        let (a, b) = (boxed(&mut rng), boxed(&mut rng));
        let mut book = TrackBook::default();
        let id = book.create_object(&bounds, k0, a, TrackOrigin::Human).map_err(|e| e.to_string())?.object_id;
        book.set_keyframe(&bounds, id, k1, b).map_err(|e| e.to_string())?;
        let track = book.get(id).map_err(|e| e.to_string())?;
        for f in k0..=k1 {
            let got = track.box_at_frame(f).ok_or("no box inside segment")?.coords();
            let t = (f - k0) as f64 / (k1 - k0) as f64;
            for ((g, x0), x1) in got.iter().zip(a.coords()).zip(b.coords()) {
                let want = x0 as f64 + (x1 as f64 - x0 as f64) * t;
                worst = worst.max((*g as f64 - want).abs());
            }
        }
    }
    ensure!(worst <= 1.0, "max deviation {worst}");
    Ok(format!("1000 pairs, max deviation {worst:.2} px"))
}

fn round_trips() -> Check {
    let (_dir, mut ws) = workspace();
    let report = ws.import_static("flickr", BUNDLE).map_err(|e| e.to_string())?;
    ws.import_video(VIDEO_CORPUS, &video_import()).map_err(|e| e.to_string())?;
    let mut docs: Vec<(String, String)> = report.documents.iter().map(|d| ("flickr".to_string(), d.clone())).collect();
    docs.push((VIDEO_CORPUS.into(), VIDEO_DOC.into()));
    let check_all = |ws: &Workspace| -> Result<(), String> {
        for (c, d) in &docs {
            let xml = ws.export(c, d).map_err(|e| e.to_string())?;
            let back = import_document(&xml, ws.lexicon()).map_err(|e| format!("{c}/{d}: {e}"))?;
            ensure!(export_document(&back) == xml, "{c}/{d} is not byte-stable");
        }
        Ok(())
    };
    check_all(&ws)?;
    replay_video_session(&mut ws).map_err(|e| e.to_string())?;
    check_all(&ws)?;

    ensure!(
        Lexicon::from_toml_str(FIXTURE_LEXICON).ok() == Some(Lexicon::fixture()),
        "lexicon load is not deterministic"
    );

    let runs = 300;
    let mut rng = StdRng::seed_from_u64(99);
    for run in 0..runs {
        generative_run(&mut rng).map_err(|e| format!("run {run}: {e}"))?;
    }
    Ok(format!("{} documents, {runs} generative runs", docs.len()))
}

/// One random session over drafts, tracks and a text annotation set,
/// checking every module invariant after each step.
fn generative_run(rng: &mut StdRng) -> Result<(), String> {
    let lex = Lexicon::fixture();
    let mut words = Vec::new();
    let mut t = 0;
    for i in 0..rng.random_range(1..12) {
        let start = t + rng.random_range(0..1500);
        let end = start + rng.random_range(1..600);
        words.push(TranscriptWord::speech(format!("w{i}"), start, end));
        t = end;
    }
    let mut drafts = DraftBook::from_words(&words, 700);
    for _ in 0..20 {
        let id = rng.random_range(1..6);
        let edit = match rng.random_range(0..4) {
            0 => DraftEdit::SplitAt { index: rng.random_range(0..6) },
            1 => DraftEdit::MergeWithNext,
            2 => DraftEdit::Finalize,
            _ => DraftEdit::Retime {
                index: rng.random_range(0..4),
                start_ms: rng.random_range(0..9000),
                end_ms: rng.random_range(0..9000),
            },
        };
        let before = drafts.clone();
        if drafts.apply(id, edit).is_err() {
            ensure!(drafts == before, "failed draft edit changed state");
        }
        drafts.check().map_err(|e| e.to_string())?;
    }

    let bounds = VideoBounds {
        width: 320,
        height: 240,
        frame_count: Some(400),
    };
    let mut book = TrackBook::default();
    for _ in 0..30 {
        let id = rng.random_range(1..4);
        let f = rng.random_range(0..420);
        let x = rng.random_range(0..300);
        let y = rng.random_range(0..220);
        let bbox = BoxGeometry::new(x, y, x + rng.random_range(1..40), y + rng.random_range(1..40));
        let _ = match rng.random_range(0..6) {
            0 => book.create_object(&bounds, f, bbox, TrackOrigin::Human).map(|_| ()),
            1 => book.set_keyframe(&bounds, id, f, bbox).map(|_| ()),
            2 => book.pause(id).map(|_| ()),
            3 => book.resume(&bounds, id, f, bbox).map(|_| ()),
            4 => book.end(id).map(|_| ()),
            _ => book
                .auto_track(&bounds, id, f, &charonette_core::tracking::InterpolationTracker)
                .map(|_| ()),
        };
        book.check(&bounds).map_err(|e| e.to_string())?;
    }

    let media = MediaInfo {
        media_ref: "v".into(),
        width: 320,
        height: 240,
        fps: None,
        frame_count: None,
    };
    let mut doc = Document::empty("c", "d", DocumentMode::Video, media);
    let text = "a gente bebe vinho e vai esquentando";
    doc.add_sentence(text.into(), None, None);
    let set = doc
        .create_text_as(&lex, "s1", Span::new(8, 12), "Ingestion", None)
        .map_err(|e| e.to_string())?
        .as_id;
    for _ in 0..20 {
        let start = rng.random_range(0..36);
        let span = Span::new(start, start + rng.random_range(1..8));
        let fe = ["Ingestor", "Ingestibles", "Place"][rng.random_range(0..3)];
        let _ = match rng.random_range(0..4) {
            0 => doc.set_layer_label(&lex, set, Layer::Fe, span, fe).map(|_| ()),
            1 => doc.remove_layer_label(set, Layer::Fe, span).map(|_| ()),
            2 => doc.mark_ni(&lex, set, fe, "DNI").map(|_| ()),
            _ => doc.unmark_ni(set, fe).map(|_| ()),
        };
        doc.validate(&lex).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn stress_import() -> Check {
    let (_dir, mut ws) = workspace();
    let template = open_bundle("flickr", BUNDLE).map_err(|e| e.to_string())?;
    let jpeg = template.images[0].bytes.clone();
    let (w, h) = (template.images[0].width, template.images[0].height);
    let mut bundle = CorpusBundle {
        name: "synthetic".into(),
        images: Vec::new(),
        sentences_raw: Vec::new(),
        boxes_raw: Vec::new(),
    };
    for i in 0..50u32 {
        let file = format!("img{i:03}.jpg");
        bundle.images.push(BundleImage {
            file_name: file.clone(),
            width: w,
            height: h,
            bytes: jpeg.clone(),
        });
        let base = i * 10;
        bundle.sentences_raw.push(CaptionLine {
            image_ref: file.clone(),
            caption_index: 0,
            raw: format!(
                "[/EN#{}/people A man] drinks from [/EN#{}/other a glass] in [/EN#{}/scene a field] .",
                base + 1,
                base + 2,
                base + 3
            ),
        });
        for (k, class) in [(1, "people"), (2, "other")] {
            bundle.boxes_raw.push(BoundingBox {
                image_ref: file.clone(),
                entity_id: base + k,
                class_label: class.into(),
                geometry: BoxGeometry::new(10 * k, 10, 10 * k + 50, 90),
            });
        }
    }
    let zip = charonette_core::static_corpus::write_bundle(&bundle).map_err(|e| e.to_string())?;
    let report = ws.import_static("synthetic", &zip).map_err(|e| e.to_string())?;
    ensure!(report.documents.len() == 50, "{} documents imported", report.documents.len());
    let mut targets = 0;
    for id in &report.documents {
        targets += ws.preannotate("synthetic", id, None).map_err(|e| e.to_string())?.0;
        let (doc, _) = ws.document("synthetic", id).map_err(|e| e.to_string())?;
        ensure!(doc.correlations.len() == 2, "{id}: {} correlations", doc.correlations.len());
    }
    Ok(format!("50 documents, {targets} targets; dataset-scale counts are not reproducible here"))
}

fn main() {
    let checks: [Criterion; 7] = [
        ("caption entity chains", caption_chains, Some(Duration::from_secs(1))),
        ("sentence pre-annotation", sentence_three, Some(Duration::from_secs(1))),
        ("video session replay", video_replay, None),
        ("frame stamp arithmetic", timecodes, Some(Duration::from_secs(5))),
        ("tracking interpolation oracle", tracking_oracle, None),
        ("round trips and invariants", round_trips, None),
        ("synthetic stress import", stress_import, Some(Duration::from_secs(30))),
    ];
    let mut failed = 0;
    for (name, run, limit) in checks {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if took > limit => Err(format!("took {took:?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({} ms)", took.as_millis()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({} ms)", took.as_millis());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
