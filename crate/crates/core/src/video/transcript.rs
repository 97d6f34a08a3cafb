//! Time-stamped words from speech recognition and subtitle OCR.
//!
//! Both arrive as tab-separated text files (UTF-8, `#` starts a comment):
//!
//! ```text
//! # start_ms  end_ms  text
//! 0  350  Bom
//! 350  520  que
//! ```
//!
//! Subtitle files have the same three columns with a whole line of text in
//! the last one.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordSource {
    Speech,
    Subtitle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptWord {
    pub text: String,
    pub start_ms: i64,
    pub end_ms: i64,
    pub source: WordSource,
    /// Subtitle word kept although it overlaps speech it does not duplicate;
    /// left for the annotator to reconcile.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub overlap_flag: bool,
}

impl TranscriptWord {
    pub fn new(text: impl Into<String>, start_ms: i64, end_ms: i64, source: WordSource) -> Self {
        Self {
            text: text.into(),
            start_ms,
            end_ms,
            source,
            overlap_flag: false,
        }
    }

    pub fn speech(text: impl Into<String>, start_ms: i64, end_ms: i64) -> Self {
        Self::new(text, start_ms, end_ms, WordSource::Speech)
    }

    fn overlaps(&self, start_ms: i64, end_ms: i64) -> bool {
        self.start_ms < end_ms && start_ms < self.end_ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtitleLine {
    pub text: String,
    pub start_ms: i64,
    pub end_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranscriptError {
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("{stream} stream is not time-ordered at item {index}")]
    Unordered { stream: &'static str, index: usize },
    #[error("{stream} item {index} has invalid times {start_ms}..{end_ms}")]
    BadInterval {
        stream: &'static str,
        index: usize,
        start_ms: i64,
        end_ms: i64,
    },
    #[error("subtitle `{0}` is too short to give each word a duration")]
    TooShort(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Subtitle lines at or above this Jaccard similarity with the speech
    /// they overlap are dropped as duplicates.
    pub duplicate_jaccard: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            duplicate_jaccard: 0.8,
        }
    }
}

fn tsv_records(text: &str) -> impl Iterator<Item = Result<(u64, csv::StringRecord), TranscriptError>> + '_ {
    let reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .comment(Some(b'#'))
        .quoting(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    reader.into_records().map(|r| {
        let record = r.map_err(|e| TranscriptError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        Ok((line, record))
    })
}

fn parse_ms(field: Option<&str>, line: u64, name: &str) -> Result<i64, TranscriptError> {
    let field = field.ok_or_else(|| TranscriptError::Malformed {
        line,
        reason: format!("missing {name}"),
    })?;
    field.trim().parse::<i64>().map_err(|_| TranscriptError::Malformed {
        line,
        reason: format!("{name} `{field}` is not an integer"),
    })
}

fn parse_timed_lines(text: &str) -> Result<Vec<(String, i64, i64)>, TranscriptError> {
    let mut out = Vec::new();
    for rec in tsv_records(text) {
        let (line, record) = rec?;
        if record.len() != 3 {
            return Err(TranscriptError::Malformed {
                line,
                reason: format!("expected 3 tab-separated fields, found {}", record.len()),
            });
        }
        let start = parse_ms(record.get(0), line, "start_ms")?;
        let end = parse_ms(record.get(1), line, "end_ms")?;
        let body = record[2].trim().to_string();
        if body.is_empty() {
            return Err(TranscriptError::Malformed {
                line,
                reason: "empty text".into(),
            });
        }
        if start < 0 || start >= end {
            return Err(TranscriptError::Malformed {
                line,
                reason: format!("invalid interval {start}..{end}"),
            });
        }
        out.push((body, start, end));
    }
    Ok(out)
}

pub fn parse_transcript(text: &str) -> Result<Vec<TranscriptWord>, TranscriptError> {
    Ok(parse_timed_lines(text)?
        .into_iter()
        .map(|(t, s, e)| TranscriptWord::speech(t, s, e))
        .collect())
}

pub fn parse_subtitles(text: &str) -> Result<Vec<SubtitleLine>, TranscriptError> {
    Ok(parse_timed_lines(text)?
        .into_iter()
        .map(|(text, start_ms, end_ms)| SubtitleLine {
            text,
            start_ms,
            end_ms,
        })
        .collect())
}

pub fn render_transcript(words: &[TranscriptWord]) -> String {
    words
        .iter()
        .map(|w| format!("{}\t{}\t{}\n", w.start_ms, w.end_ms, w.text))
        .collect()
}

pub fn render_subtitles(lines: &[SubtitleLine]) -> String {
    lines
        .iter()
        .map(|l| format!("{}\t{}\t{}\n", l.start_ms, l.end_ms, l.text))
        .collect()
}

/// Lowercased tokens with surrounding punctuation removed.
pub fn normalized_tokens<'a>(texts: impl IntoIterator<Item = &'a str>) -> HashSet<String> {
    texts
        .into_iter()
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn check_stream<T>(
    items: &[T],
    stream: &'static str,
    times: impl Fn(&T) -> (i64, i64),
) -> Result<(), TranscriptError> {
    let mut prev_start = i64::MIN;
    for (index, item) in items.iter().enumerate() {
        let (start_ms, end_ms) = times(item);
        if start_ms < 0 || start_ms >= end_ms {
            return Err(TranscriptError::BadInterval {
                stream,
                index,
                start_ms,
                end_ms,
            });
        }
        if start_ms < prev_start {
            return Err(TranscriptError::Unordered { stream, index });
        }
        prev_start = start_ms;
    }
    Ok(())
}

/// Splits a subtitle line into words whose durations are proportional to
/// their character counts. Word boundaries are
/// `start + floor(duration * chars_before / total_chars)`.
pub fn split_subtitle(line: &SubtitleLine) -> Result<Vec<TranscriptWord>, TranscriptError> {
    let words: Vec<&str> = line.text.split_whitespace().collect();
    let lengths: Vec<i64> = words.iter().map(|w| w.chars().count() as i64).collect();
    let total: i64 = lengths.iter().sum();
    let duration = (line.end_ms - line.start_ms) as i128;
    let mut out = Vec::with_capacity(words.len());
    let mut before = 0i64;
    for (word, len) in words.iter().zip(&lengths) {
        let start = line.start_ms + (duration * before as i128 / total as i128) as i64;
        before += len;
        let end = line.start_ms + (duration * before as i128 / total as i128) as i64;
        if end <= start {
            return Err(TranscriptError::TooShort(line.text.clone()));
        }
        out.push(TranscriptWord::new(*word, start, end, WordSource::Subtitle));
    }
    Ok(out)
}

/// Merges subtitle lines into the speech word stream.
///
/// A subtitle line overlapping speech words whose token set reaches the
/// duplicate threshold is dropped. Other lines are split into words; when
/// they overlap speech they are kept with `overlap_flag` set. Speech words
/// pass through unchanged. Output is ordered by start time, speech first on
/// ties.
pub fn merge_streams(
    speech: &[TranscriptWord],
    subtitles: &[SubtitleLine],
    config: &MergeConfig,
) -> Result<Vec<TranscriptWord>, TranscriptError> {
    check_stream(speech, "speech", |w| (w.start_ms, w.end_ms))?;
    check_stream(subtitles, "subtitle", |l| (l.start_ms, l.end_ms))?;

    let mut out: Vec<TranscriptWord> = speech.to_vec();
    for line in subtitles {
        let overlapped: Vec<&TranscriptWord> = speech
            .iter()
            .filter(|w| w.overlaps(line.start_ms, line.end_ms))
            .collect();
        let flagged = if overlapped.is_empty() {
            false
        } else {
            let line_tokens = normalized_tokens([line.text.as_str()]);
            let speech_tokens = normalized_tokens(overlapped.iter().map(|w| w.text.as_str()));
            if jaccard(&line_tokens, &speech_tokens) >= config.duplicate_jaccard {
                continue;
            }
            true
        };
        out.extend(split_subtitle(line)?.into_iter().map(|mut w| {
            w.overlap_flag = flagged;
            w
        }));
    }
    out.sort_by_key(|w| w.start_ms);
    Ok(out)
}
