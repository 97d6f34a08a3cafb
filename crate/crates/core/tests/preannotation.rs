//! Disambiguation checked against a brute-force link counter that walks the
//! lexicon's relation list directly.

use charonette_core::lexicon::Lexicon;
use charonette_core::preannotate::{
    identify_targets, preannotate_sentence, Disambiguator, RelationAdjacency, TargetCandidate,
};
use proptest::prelude::*;

/// Independent oracle: raw link counts from the relation list by name.
fn oracle_counts(targets: &[TargetCandidate], lex: &Lexicon) -> Vec<Vec<u64>> {
    let edges: Vec<(String, String)> = lex
        .relations()
        .iter()
        .map(|r| {
            (
                lex.frame(r.parent).unwrap().name.clone(),
                lex.frame(r.child).unwrap().name.clone(),
            )
        })
        .collect();
    targets
        .iter()
        .enumerate()
        .map(|(t, target)| {
            target
                .candidate_frames
                .iter()
                .map(|f| {
                    let mut n = 0;
                    for (u, other) in targets.iter().enumerate() {
                        if u == t {
                            continue;
                        }
                        for g in &other.candidate_frames {
                            for (p, c) in &edges {
                                if (p == f && c == g) || (p == g && c == f) {
                                    n += 1;
                                }
                            }
                        }
                    }
                    n
                })
                .collect()
        })
        .collect()
}

/// Argmax with smallest-name tie-break over (possibly scaled) counts.
fn oracle_choice(target: &TargetCandidate, counts: &[u64]) -> String {
    let mut best: Option<(u64, &String)> = None;
    for (f, &c) in target.candidate_frames.iter().zip(counts) {
        best = match best {
            Some((bc, bf)) if bc > c || (bc == c && bf < f) => Some((bc, bf)),
            _ => Some((c, f)),
        };
    }
    best.unwrap().1.clone()
}

#[test]
fn departing_in_sentence_favours_arriving() {
    let lex = Lexicon::fixture();
    let sentence = "Saí de Lisboa e cheguei em Reykjavik";
    let targets = identify_targets("s", sentence, &lex);
    let words: Vec<_> = targets.iter().map(|t| t.text.as_str()).collect();
    assert_eq!(words, ["Saí", "cheguei"]);
    assert_eq!(targets[1].candidate_frames, ["Arriving", "Sufficiency"]);

    let counts = oracle_counts(&targets, &lex);
    // Departing precedes Arriving; Sufficiency has no edges.
    assert_eq!(counts[1], [1, 0]);

    let out = RelationAdjacency.disambiguate(targets, &lex);
    assert_eq!(out[0].chosen_frame.as_deref(), Some("Departing"));
    assert_eq!(out[0].score, Some(1.0));
    assert_eq!(out[1].chosen_frame.as_deref(), Some("Arriving"));
    assert_eq!(out[1].score, Some(1.0));
}

/// A lexicon where tie-breaking alone would pick the wrong frame.
const LINKED: &str = r#"
[[frames]]
name = "Amounting_to"
[[frames]]
name = "Arriving"
[[frames]]
name = "Departing"

[[relations]]
type = "precedence"
parent = "Departing"
child = "Arriving"

[[lus]]
lemma = "chegar"
pos = "v"
frame = "Amounting_to"
[[lus]]
lemma = "chegar"
pos = "v"
frame = "Arriving"
[[lus]]
lemma = "sair"
pos = "v"
frame = "Departing"

[[wordforms]]
form = "cheguei"
lemma = "chegar"
pos = "v"
[[wordforms]]
form = "saí"
lemma = "sair"
pos = "v"
"#;

#[test]
fn links_override_alphabetical_tie_break() {
    let lex = Lexicon::from_toml_str(LINKED).unwrap();
    let alone = preannotate_sentence("s", "cheguei", &lex);
    assert_eq!(alone[0].chosen_frame.as_deref(), Some("Amounting_to"));
    let with_departure = preannotate_sentence("s", "saí e cheguei", &lex);
    assert_eq!(with_departure[1].chosen_frame.as_deref(), Some("Arriving"));
    assert_eq!(with_departure[1].chosen_lu(), Some("chegar.v@Arriving"));
}

#[test]
fn implementation_counts_match_oracle_on_fixture_sentences() {
    let lex = Lexicon::fixture();
    for sentence in [
        "Bom que aqui a gente bebe e vai esquentando, né?",
        "Então, acabei de chegar em Reykjavik, na Islândia.",
        "saí e cheguei e partiu e pousou",
        "the man drinks here",
    ] {
        let targets = identify_targets("s", sentence, &lex);
        let ours: Vec<Vec<u64>> = RelationAdjacency::link_counts(&targets, &lex)
            .into_iter()
            .map(|v| v.into_iter().map(|c| c as u64).collect())
            .collect();
        assert_eq!(ours, oracle_counts(&targets, &lex), "{sentence}");
    }
}

fn vocabulary() -> Vec<&'static str> {
    vec![
        "saí", "cheguei", "chegar", "partiu", "pousou", "bebe", "bom", "aqui", "esquentando",
        "acabei", "arrived", "landed", "departed", "que", "a", "xyz", "Reykjavik",
    ]
}

proptest! {
    #[test]
    fn choices_are_candidates_and_deterministic(words in prop::collection::vec(prop::sample::select(vocabulary()), 0..10)) {
        let lex = Lexicon::fixture();
        let sentence = words.join(" ");
        let a = preannotate_sentence("s", &sentence, &lex);
        let b = preannotate_sentence("s", &sentence, &lex);
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let len = sentence.chars().count();
        for (i, t) in a.iter().enumerate() {
            let chosen = t.chosen_frame.as_ref().unwrap();
            prop_assert!(t.candidate_frames.contains(chosen));
            let score = t.score.unwrap();
            prop_assert!((0.0..=1.0).contains(&score));
            prop_assert!(t.span.fits(len));
            if i > 0 {
                prop_assert!(a[i - 1].span.end <= t.span.start);
            }
        }
    }

    #[test]
    fn argmax_invariant_under_positive_scaling(
        words in prop::collection::vec(prop::sample::select(vocabulary()), 1..10),
        scale in 1u64..1000,
    ) {
        let lex = Lexicon::fixture();
        let sentence = words.join(" ");
        let targets = identify_targets("s", &sentence, &lex);
        let counts = oracle_counts(&targets, &lex);
        let chosen = RelationAdjacency.disambiguate(targets.clone(), &lex);
        for ((t, c), out) in targets.iter().zip(&counts).zip(&chosen) {
            let scaled: Vec<u64> = c.iter().map(|x| x * scale).collect();
            let expected = oracle_choice(t, &scaled);
            prop_assert_eq!(oracle_choice(t, c), expected.clone());
            prop_assert_eq!(out.chosen_frame.as_deref(), Some(expected.as_str()));
        }
    }
}
