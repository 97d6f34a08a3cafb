//! Automatic pre-annotation: find frame-evoking words in a sentence, pick a
//! frame for each, and map computer-vision class labels to lexical units.
//!
//! Frame choice goes through the [`Disambiguator`] trait. The bundled
//! [`RelationAdjacency`] scorer prefers, for an ambiguous word, the candidate
//! frame with the most one-edge relation links to candidate frames of the
//! other words in the same sentence.

use crate::geometry::Span;
use crate::lexicon::{Lexicon, Pos};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Auto,
    HumanOverride,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCandidate {
    pub sentence_ref: String,
    pub span: Span,
    /// Surface form as it appears in the sentence.
    pub text: String,
    pub lemma: String,
    pub pos: Pos,
    /// Frame names, sorted, without duplicates.
    pub candidate_frames: Vec<String>,
    /// LU key (`lemma.pos@Frame`) evoking each entry of `candidate_frames`.
    pub candidate_lus: Vec<String>,
    pub chosen_frame: Option<String>,
    pub score: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreannotateError {
    #[error("frame `{frame}` is not a candidate for `{target}`")]
    NotACandidate { target: String, frame: String },
}

impl TargetCandidate {
    /// Replaces the automatic choice with an annotator's.
    pub fn override_choice(&mut self, frame: &str) -> Result<(), PreannotateError> {
        if !self.candidate_frames.iter().any(|f| f == frame) {
            return Err(PreannotateError::NotACandidate {
                target: self.text.clone(),
                frame: frame.to_string(),
            });
        }
        self.chosen_frame = Some(frame.to_string());
        self.score = Some(1.0);
        self.provenance = Provenance::HumanOverride;
        Ok(())
    }

    /// LU key of the chosen frame, when one is chosen.
    pub fn chosen_lu(&self) -> Option<&str> {
        let chosen = self.chosen_frame.as_deref()?;
        self.candidate_frames
            .iter()
            .position(|f| f == chosen)
            .map(|i| self.candidate_lus[i].as_str())
    }
}

/// Splits on whitespace and punctuation; returns char spans of word tokens.
pub fn tokenize(sentence: &str) -> Vec<(Span, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut char_idx = 0;
    for (byte_idx, c) in sentence.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some((char_idx, byte_idx));
            }
        } else if let Some((cs, bs)) = start.take() {
            out.push((Span::new(cs, char_idx), &sentence[bs..byte_idx]));
        }
        char_idx += 1;
    }
    if let Some((cs, bs)) = start {
        out.push((Span::new(cs, char_idx), &sentence[bs..]));
    }
    out
}

/// One candidate per token whose wordform resolves to a lemma with at least
/// one LU. `chosen_frame` and `score` are left unset.
pub fn identify_targets(sentence_ref: &str, sentence: &str, lex: &Lexicon) -> Vec<TargetCandidate> {
    let mut out = Vec::new();
    for (span, token) in tokenize(sentence) {
        let mut pairs: Vec<(String, String, String, Pos)> = Vec::new();
        for reading in lex.resolve_wordform(token).iter().filter(|w| w.evoking) {
            for lu in lex.lus_by_lemma(&reading.lemma, Some(reading.pos)) {
                let frame = lex.frame(lu.frame_id).expect("LU frames resolve");
                pairs.push((
                    frame.name.clone(),
                    lex.lu_key(lu),
                    lu.lemma.clone(),
                    lu.pos,
                ));
            }
        }
        if pairs.is_empty() {
            continue;
        }
        pairs.sort();
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (lemma, pos) = (pairs[0].2.clone(), pairs[0].3);
        out.push(TargetCandidate {
            sentence_ref: sentence_ref.to_string(),
            span,
            text: token.to_string(),
            lemma,
            pos,
            candidate_frames: pairs.iter().map(|p| p.0.clone()).collect(),
            candidate_lus: pairs.iter().map(|p| p.1.clone()).collect(),
            chosen_frame: None,
            score: None,
            provenance: Provenance::Auto,
        });
    }
    out
}

/// Chooses a frame for every candidate.
pub trait Disambiguator {
    fn disambiguate(&self, candidates: Vec<TargetCandidate>, lex: &Lexicon) -> Vec<TargetCandidate>;
}

/// Baseline scorer over the frame relation graph.
///
/// For a target with one candidate frame the score is 1. Otherwise each
/// candidate `f` gets a raw count of relation edges (any type, either
/// direction) between `f` and every candidate frame of every other target in
/// the sentence; scores are raw counts divided by the maximum count (all 0
/// when nothing links). The highest score wins, ties going to the
/// lexicographically smallest frame name.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelationAdjacency;

impl RelationAdjacency {
    /// Raw link counts per target, aligned with `candidate_frames`.
    pub fn link_counts(candidates: &[TargetCandidate], lex: &Lexicon) -> Vec<Vec<usize>> {
        let ids: Vec<Vec<_>> = candidates
            .iter()
            .map(|c| {
                c.candidate_frames
                    .iter()
                    .filter_map(|name| lex.frame_by_name(name).map(|f| f.id))
                    .collect()
            })
            .collect();
        ids.iter()
            .enumerate()
            .map(|(t, frames)| {
                frames
                    .iter()
                    .map(|&f| {
                        ids.iter()
                            .enumerate()
                            .filter(|(u, _)| *u != t)
                            .flat_map(|(_, others)| others)
                            .map(|&g| lex.link_count(f, g))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

impl Disambiguator for RelationAdjacency {
    fn disambiguate(&self, mut candidates: Vec<TargetCandidate>, lex: &Lexicon) -> Vec<TargetCandidate> {
        let counts = Self::link_counts(&candidates, lex);
        for (cand, counts) in candidates.iter_mut().zip(counts) {
            if cand.provenance == Provenance::HumanOverride && cand.chosen_frame.is_some() {
                continue;
            }
            if cand.candidate_frames.len() == 1 {
                cand.chosen_frame = Some(cand.candidate_frames[0].clone());
                cand.score = Some(1.0);
                continue;
            }
            let max = counts.iter().copied().max().unwrap_or(0);
            // candidate_frames is sorted, so the first maximum is the
            // lexicographically smallest.
            let best = counts
                .iter()
                .enumerate()
                .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best });
            cand.chosen_frame = Some(cand.candidate_frames[best].clone());
            cand.score = Some(if max == 0 {
                0.0
            } else {
                counts[best] as f64 / max as f64
            });
            if let Some(lu) = lex.lu_by_exact_key(&cand.candidate_lus[best]) {
                cand.lemma = lu.lemma.clone();
                cand.pos = lu.pos;
            }
        }
        candidates
    }
}

/// Identifies targets and disambiguates them with the baseline scorer.
pub fn preannotate_sentence(sentence_ref: &str, sentence: &str, lex: &Lexicon) -> Vec<TargetCandidate> {
    RelationAdjacency.disambiguate(identify_targets(sentence_ref, sentence, lex), lex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingStatus {
    Mapped,
    Unmapped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvClassMapping {
    pub class_label: String,
    /// LU key, present exactly when `status` is `Mapped`.
    pub lu_ref: Option<String>,
    pub status: MappingStatus,
}

/// Maps a detector or dataset class label to a noun LU. The label is
/// lowercased and singularized; exactly one matching noun LU in the
/// requested language maps it, anything else leaves it for the annotator.
pub fn map_cv_class_to_lu(class_label: &str, lex: &Lexicon, language: &str) -> CvClassMapping {
    let lemma = singularize(&class_label.trim().to_lowercase());
    let matches: Vec<_> = lex
        .lus_by_lemma(&lemma, Some(Pos::N))
        .into_iter()
        .filter(|lu| same_language(&lu.language, language))
        .collect();
    let lu_ref = match matches.as_slice() {
        [only] => Some(lex.lu_key(only)),
        _ => None,
    };
    CvClassMapping {
        class_label: class_label.to_string(),
        status: if lu_ref.is_some() {
            MappingStatus::Mapped
        } else {
            MappingStatus::Unmapped
        },
        lu_ref,
    }
}

fn same_language(lu_language: &str, requested: &str) -> bool {
    let primary = |tag: &str| tag.split(['-', '_']).next().unwrap_or("").to_ascii_lowercase();
    let requested = primary(requested);
    requested.is_empty() || requested == "und" || primary(lu_language) == requested
}

/// English plural stripping for dataset class names.
pub fn singularize(word: &str) -> String {
    const IRREGULAR: &[(&str, &str)] = &[
        ("people", "person"),
        ("persons", "person"),
        ("men", "man"),
        ("women", "woman"),
        ("children", "child"),
        ("mice", "mouse"),
        ("teeth", "tooth"),
        ("feet", "foot"),
        ("geese", "goose"),
        ("knives", "knife"),
        ("skis", "ski"),
    ];
    if let Some((_, s)) = IRREGULAR.iter().find(|(p, _)| *p == word) {
        return s.to_string();
    }
    if word.len() > 3 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    for suffix in ["sses", "shes", "ches", "xes", "zes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    if word.len() > 2 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SENTENCE_3: &str = "Bom que aqui a gente bebe e vai esquentando, né?";

    #[test]
    fn tokenizer_splits_punctuation() {
        let toks: Vec<_> = tokenize("vai esquentando, né?").into_iter().map(|t| t.1).collect();
        assert_eq!(toks, ["vai", "esquentando", "né"]);
        let (span, _) = tokenize("a né")[1];
        assert_eq!(span, Span::new(2, 4));
    }

    #[test]
    fn sentence_three_targets() {
        let lex = Lexicon::fixture();
        let targets = identify_targets("s3", SENTENCE_3, &lex);
        let words: Vec<_> = targets.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(words, ["Bom", "aqui", "bebe", "esquentando"]);
        for t in &targets {
            assert_eq!(t.span.slice(SENTENCE_3), t.text);
            assert!(t.chosen_frame.is_none());
        }
    }

    #[test]
    fn no_evoking_words() {
        let lex = Lexicon::fixture();
        assert!(identify_targets("s", "que a e de", &lex).is_empty());
        assert!(identify_targets("s", "", &lex).is_empty());
    }

    #[test]
    fn sentence_one_targets() {
        let lex = Lexicon::fixture();
        let targets = identify_targets("s1", "acabei de chegar em Reykjavik", &lex);
        let words: Vec<_> = targets.iter().map(|t| t.text.as_str()).collect();
        assert!(words.contains(&"acabei") && words.contains(&"chegar"));
    }

    #[test]
    fn single_candidate_scores_one() {
        let lex = Lexicon::fixture();
        let out = preannotate_sentence("s", "a gente bebe", &lex);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].chosen_frame.as_deref(), Some("Ingestion"));
        assert_eq!(out[0].score, Some(1.0));
        assert_eq!(out[0].chosen_lu(), Some("beber.v@Ingestion"));
    }

    #[test]
    fn zero_links_fall_back_to_smallest_name() {
        let lex = Lexicon::fixture();
        let out = preannotate_sentence("s", "chegar", &lex);
        assert_eq!(out[0].candidate_frames, ["Arriving", "Sufficiency"]);
        assert_eq!(out[0].chosen_frame.as_deref(), Some("Arriving"));
        assert_eq!(out[0].score, Some(0.0));
    }

    #[test]
    fn override_must_be_a_candidate() {
        let lex = Lexicon::fixture();
        let mut c = preannotate_sentence("s", "chegar", &lex).remove(0);
        assert!(c.override_choice("Ingestion").is_err());
        c.override_choice("Sufficiency").unwrap();
        assert_eq!(c.provenance, Provenance::HumanOverride);
        let again = RelationAdjacency.disambiguate(vec![c.clone()], &lex);
        assert_eq!(again[0].chosen_frame.as_deref(), Some("Sufficiency"));
    }

    #[test]
    fn cv_class_mapping() {
        let lex = Lexicon::fixture();
        let person = map_cv_class_to_lu("person", &lex, "en");
        assert_eq!(person.status, MappingStatus::Mapped);
        assert_eq!(person.lu_ref.as_deref(), Some("person.n@People"));
        let glass = map_cv_class_to_lu("Glass", &lex, "en");
        assert_eq!(glass.lu_ref.as_deref(), Some("glass.n@Container"));
        assert_eq!(
            map_cv_class_to_lu("people", &lex, "en").lu_ref.as_deref(),
            Some("person.n@People")
        );
        let none = map_cv_class_to_lu("unobtainium", &lex, "en");
        assert_eq!(none.status, MappingStatus::Unmapped);
        assert!(none.lu_ref.is_none());
        assert_eq!(
            map_cv_class_to_lu("person", &lex, "pt-BR").status,
            MappingStatus::Unmapped
        );
    }

    #[test]
    fn ambiguous_cv_class_stays_unmapped() {
        let src = r#"
[[frames]]
name = "A"
[[frames]]
name = "B"
[[lus]]
lemma = "bank"
pos = "n"
frame = "A"
language = "en"
[[lus]]
lemma = "bank"
pos = "n"
frame = "B"
language = "en"
"#;
        let lex = Lexicon::from_toml_str(src).unwrap();
        assert_eq!(
            map_cv_class_to_lu("banks", &lex, "en").status,
            MappingStatus::Unmapped
        );
    }

    #[test]
    fn singular_forms() {
        assert_eq!(singularize("cups"), "cup");
        assert_eq!(singularize("glasses"), "glass");
        assert_eq!(singularize("glass"), "glass");
        assert_eq!(singularize("benches"), "bench");
        assert_eq!(singularize("skies"), "sky");
        assert_eq!(singularize("bus"), "bus");
    }
}
