use charonette_wasm_demo::{box_at_frame, parse_caption, preannotate};
use serde_json::{json, Value};

fn parsed(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn caption_round() {
    let out = parsed(parse_caption("[/EN#1/people A girl] ties [/EN#3/clothing her shoes] ."));
    assert_eq!(out["plain"], "A girl ties her shoes .");
    assert_eq!(out["mentions"][1]["span"], json!({"start": 12, "end": 21}));
    assert_eq!(out["mentions"][1]["entity_type"], "clothing");
    let err = parsed(parse_caption("[/EN#1/people open"));
    assert!(err["error"].as_str().unwrap().contains("never closed"));
}

#[test]
fn sentence_targets() {
    let out = parsed(preannotate("Bom que aqui a gente bebe e vai esquentando, né?"));
    let frames: Vec<&str> = out
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["chosen_frame"].as_str().unwrap())
        .collect();
    assert_eq!(frames, ["Desirability", "Locative_relation", "Ingestion", "Change_of_temperature"]);
    assert_eq!(parsed(preannotate("")), json!([]));
}

#[test]
fn interpolated_box() {
    let track = json!({
        "width": 640, "height": 360,
        "keyframes": [
            {"frame": 20, "box": {"xmin": 100, "ymin": 40, "xmax": 200, "ymax": 140}},
            {"frame": 0, "box": {"xmin": 0, "ymin": 0, "xmax": 100, "ymax": 100}}
        ]
    })
    .to_string();
    let mid = parsed(box_at_frame(&track, 10));
    assert_eq!(mid["box"], json!({"xmin": 50, "ymin": 20, "xmax": 150, "ymax": 120}));
    assert_eq!(mid["time_ms"], 400);
    assert_eq!(parsed(box_at_frame(&track, 21))["box"], Value::Null);
    let outside = json!({"width": 50, "height": 50, "keyframes": [{"frame": 0, "box": {"xmin": 0, "ymin": 0, "xmax": 60, "ymax": 10}}]});
    assert!(parsed(box_at_frame(&outside.to_string(), 0))["error"].is_string());
    assert!(parsed(box_at_frame("{}", 0))["error"].is_string());
}
