//! Sentence drafts built from time-stamped words, and the edits annotators
//! apply to them before they become sentences of the corpus.

use super::transcript::TranscriptWord;
use serde::{Deserialize, Serialize};

pub const DEFAULT_PAUSE_MS: i64 = 700;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DraftStatus {
    Auto,
    HumanEdited,
    Finalized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceDraft {
    pub draft_id: u64,
    pub words: Vec<TranscriptWord>,
    /// Space-joined word texts.
    pub text: String,
    pub start_ms: i64,
    pub end_ms: i64,
    pub status: DraftStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DraftError {
    #[error("no draft with id {0}")]
    UnknownDraft(u64),
    #[error("word index {index} is invalid for draft {draft_id} ({len} words)")]
    BadIndex { draft_id: u64, index: usize, len: usize },
    #[error("draft {0} is finalized")]
    Finalized(u64),
    #[error("draft {0} has no following draft to merge with")]
    NothingToMerge(u64),
    #[error("edit would break word order in draft {draft_id}: {reason}")]
    OrderViolation { draft_id: u64, reason: String },
    #[error("word text must be a single non-empty token")]
    BadText,
    #[error("draft {draft_id} violates its invariants: {reason}")]
    Invariant { draft_id: u64, reason: String },
}

impl SentenceDraft {
    fn new(draft_id: u64, words: Vec<TranscriptWord>, status: DraftStatus) -> Self {
        let mut draft = SentenceDraft {
            draft_id,
            words,
            text: String::new(),
            start_ms: 0,
            end_ms: 0,
            status,
        };
        draft.refresh();
        draft
    }

    /// Recomputes the derived text and time range.
    fn refresh(&mut self) {
        self.text = self
            .words
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        self.start_ms = self.words.first().map_or(0, |w| w.start_ms);
        self.end_ms = self.words.last().map_or(0, |w| w.end_ms);
    }

    pub fn check(&self) -> Result<(), DraftError> {
        let fail = |reason: String| {
            Err(DraftError::Invariant {
                draft_id: self.draft_id,
                reason,
            })
        };
        let (Some(first), Some(last)) = (self.words.first(), self.words.last()) else {
            return fail("draft has no words".into());
        };
        for (i, w) in self.words.iter().enumerate() {
            if w.start_ms < 0 || w.start_ms >= w.end_ms {
                return fail(format!("word {i} has invalid times"));
            }
            if i > 0 && self.words[i - 1].end_ms > w.start_ms {
                return fail(format!("word {i} overlaps its predecessor"));
            }
        }
        if self.start_ms != first.start_ms || self.end_ms != last.end_ms {
            return fail("time range does not match its words".into());
        }
        let text = self
            .words
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        if self.text != text {
            return fail("text does not match its words".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DraftEdit {
    /// Moves words `index..` into a new draft right after this one.
    SplitAt { index: usize },
    MergeWithNext,
    Retime {
        index: usize,
        start_ms: i64,
        end_ms: i64,
    },
    SetText { index: usize, text: String },
    Finalize,
}

/// Drafts of one video document, in time order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftBook {
    pub drafts: Vec<SentenceDraft>,
    pub next_id: u64,
}

/// Groups time-ordered words into drafts, starting a new draft after any
/// pause longer than `pause_threshold_ms` and wherever a word overlaps the
/// previous one. Draft ids start at `first_id`.
pub fn segment_sentences(
    words: &[TranscriptWord],
    pause_threshold_ms: i64,
    first_id: u64,
) -> Vec<SentenceDraft> {
    let mut groups: Vec<Vec<TranscriptWord>> = Vec::new();
    for w in words {
        let boundary = match groups.last().and_then(|g| g.last()) {
            None => true,
            Some(prev) => {
                let gap = w.start_ms - prev.end_ms;
                gap > pause_threshold_ms || gap < 0
            }
        };
        if boundary {
            groups.push(Vec::new());
        }
        groups.last_mut().expect("group pushed").push(w.clone());
    }
    groups
        .into_iter()
        .zip(first_id..)
        .map(|(words, id)| SentenceDraft::new(id, words, DraftStatus::Auto))
        .collect()
}

impl DraftBook {
    pub fn from_words(words: &[TranscriptWord], pause_threshold_ms: i64) -> Self {
        let drafts = segment_sentences(words, pause_threshold_ms, 1);
        let next_id = drafts.len() as u64 + 1;
        DraftBook { drafts, next_id }
    }

    pub fn get(&self, draft_id: u64) -> Option<&SentenceDraft> {
        self.drafts.iter().find(|d| d.draft_id == draft_id)
    }

    fn position(&self, draft_id: u64) -> Result<usize, DraftError> {
        self.drafts
            .iter()
            .position(|d| d.draft_id == draft_id)
            .ok_or(DraftError::UnknownDraft(draft_id))
    }

    /// Applies one edit and returns the drafts it produced or changed.
    pub fn apply(&mut self, draft_id: u64, edit: DraftEdit) -> Result<Vec<SentenceDraft>, DraftError> {
        let pos = self.position(draft_id)?;
        if self.drafts[pos].status == DraftStatus::Finalized {
            return Err(DraftError::Finalized(draft_id));
        }
        let bad_index = |index: usize, len: usize| DraftError::BadIndex {
            draft_id,
            index,
            len,
        };

        match edit {
            DraftEdit::SplitAt { index } => {
                let len = self.drafts[pos].words.len();
                if index == 0 || index >= len {
                    return Err(bad_index(index, len));
                }
                let tail = self.drafts[pos].words.split_off(index);
                let draft = &mut self.drafts[pos];
                draft.status = DraftStatus::HumanEdited;
                draft.refresh();
                let new = SentenceDraft::new(self.next_id, tail, DraftStatus::HumanEdited);
                self.next_id += 1;
                self.drafts.insert(pos + 1, new);
                Ok(vec![self.drafts[pos].clone(), self.drafts[pos + 1].clone()])
            }
            DraftEdit::MergeWithNext => {
                let next = self
                    .drafts
                    .get(pos + 1)
                    .ok_or(DraftError::NothingToMerge(draft_id))?;
                if next.status == DraftStatus::Finalized {
                    return Err(DraftError::Finalized(next.draft_id));
                }
                if self.drafts[pos].end_ms > next.start_ms {
                    return Err(DraftError::OrderViolation {
                        draft_id,
                        reason: format!("draft {} starts before this one ends", next.draft_id),
                    });
                }
                let next = self.drafts.remove(pos + 1);
                let draft = &mut self.drafts[pos];
                draft.words.extend(next.words);
                draft.status = DraftStatus::HumanEdited;
                draft.refresh();
                Ok(vec![draft.clone()])
            }
            DraftEdit::Retime {
                index,
                start_ms,
                end_ms,
            } => {
                let draft = &mut self.drafts[pos];
                let len = draft.words.len();
                if index >= len {
                    return Err(bad_index(index, len));
                }
                let violation = |reason: String| DraftError::OrderViolation { draft_id, reason };
                if start_ms < 0 || start_ms >= end_ms {
                    return Err(violation(format!("invalid interval {start_ms}..{end_ms}")));
                }
                if index > 0 && draft.words[index - 1].end_ms > start_ms {
                    return Err(violation(format!(
                        "word {index} would start before word {} ends",
                        index - 1
                    )));
                }
                if index + 1 < len && end_ms > draft.words[index + 1].start_ms {
                    return Err(violation(format!(
                        "word {index} would end after word {} starts",
                        index + 1
                    )));
                }
                let word = &mut draft.words[index];
                word.start_ms = start_ms;
                word.end_ms = end_ms;
                draft.status = DraftStatus::HumanEdited;
                draft.refresh();
                Ok(vec![draft.clone()])
            }
            DraftEdit::SetText { index, text } => {
                let draft = &mut self.drafts[pos];
                let len = draft.words.len();
                if index >= len {
                    return Err(bad_index(index, len));
                }
                let text = text.trim();
                if text.is_empty() || text.contains(char::is_whitespace) {
                    return Err(DraftError::BadText);
                }
                draft.words[index].text = text.to_string();
                draft.status = DraftStatus::HumanEdited;
                draft.refresh();
                Ok(vec![draft.clone()])
            }
            DraftEdit::Finalize => {
                let draft = &mut self.drafts[pos];
                draft.status = DraftStatus::Finalized;
                Ok(vec![draft.clone()])
            }
        }
    }

    pub fn check(&self) -> Result<(), DraftError> {
        let mut ids = std::collections::HashSet::new();
        for d in &self.drafts {
            d.check()?;
            if !ids.insert(d.draft_id) || d.draft_id >= self.next_id.max(1) {
                return Err(DraftError::Invariant {
                    draft_id: d.draft_id,
                    reason: "duplicate or unallocated draft id".into(),
                });
            }
        }
        Ok(())
    }
}
