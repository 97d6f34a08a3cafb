//! Coreference-chain markup in captions.
//!
//! Captions mark entity mentions with `[/EN#<id>/<type> <phrase>]`, e.g.
//! `[/EN#1/people A girl] is tying [/EN#3/clothing her shoes]`. Markup does
//! not nest. A `[` that does not open `/EN#` and a `]` outside a mention are
//! ordinary text.

use crate::geometry::Span;
use serde::{Deserialize, Serialize};

const OPEN: &str = "[/EN#";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionMention {
    pub entity_id: u32,
    pub entity_type: String,
    /// Position of the phrase in the plain sentence.
    pub span: Span,
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedCaption {
    pub plain: String,
    pub mentions: Vec<CaptionMention>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaptionError {
    #[error("unbalanced chain markup: mention opened at char {0} is never closed")]
    Unbalanced(usize),
    #[error("nested chain markup at char {0}")]
    Nested(usize),
    #[error("entity id `{text}` at char {offset} is not an integer")]
    NonIntegerId { offset: usize, text: String },
    #[error("malformed mention header at char {offset}: {message}")]
    Malformed { offset: usize, message: String },
}

/// Strips chain markup from a caption, returning the plain sentence and the
/// mentions with spans into it.
pub fn parse_caption_chains(raw: &str) -> Result<ParsedCaption, CaptionError> {
    let chars: Vec<char> = raw.chars().collect();
    let open: Vec<char> = OPEN.chars().collect();
    let starts_open = |i: usize| chars[i..].starts_with(&open);

    let mut plain = String::with_capacity(raw.len());
    let mut plain_len = 0usize;
    let mut mentions = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        if !starts_open(i) {
            plain.push(chars[i]);
            plain_len += 1;
            i += 1;
            continue;
        }
        let mention_at = i;
        i += open.len();

        let id_start = i;
        while i < chars.len() && chars[i] != '/' && chars[i] != ']' && !chars[i].is_whitespace() {
            i += 1;
        }
        let id_text: String = chars[id_start..i].iter().collect();
        if i >= chars.len() {
            return Err(CaptionError::Unbalanced(mention_at));
        }
        if chars[i] != '/' {
            return Err(CaptionError::Malformed {
                offset: mention_at,
                message: "expected `/` after the entity id".into(),
            });
        }
        let entity_id = id_text
            .parse::<u32>()
            .map_err(|_| CaptionError::NonIntegerId {
                offset: id_start,
                text: id_text.clone(),
            })?;
        i += 1;

        let type_start = i;
        while i < chars.len() && !chars[i].is_whitespace() && chars[i] != ']' {
            i += 1;
        }
        let entity_type: String = chars[type_start..i].iter().collect();
        if i >= chars.len() {
            return Err(CaptionError::Unbalanced(mention_at));
        }
        if entity_type.is_empty() {
            return Err(CaptionError::Malformed {
                offset: mention_at,
                message: "missing entity type".into(),
            });
        }
        if chars[i] == ']' {
            return Err(CaptionError::Malformed {
                offset: mention_at,
                message: "mention has no phrase".into(),
            });
        }
        i += 1;

        let phrase_start = i;
        loop {
            if i >= chars.len() {
                return Err(CaptionError::Unbalanced(mention_at));
            }
            if starts_open(i) {
                return Err(CaptionError::Nested(i));
            }
            if chars[i] == ']' {
                break;
            }
            i += 1;
        }
        let phrase: String = chars[phrase_start..i].iter().collect();
        if phrase.trim().is_empty() {
            return Err(CaptionError::Malformed {
                offset: mention_at,
                message: "mention has no phrase".into(),
            });
        }
        i += 1;

        let phrase_len = phrase.chars().count();
        mentions.push(CaptionMention {
            entity_id,
            entity_type,
            span: Span::new(plain_len, plain_len + phrase_len),
            phrase: phrase.clone(),
        });
        plain.push_str(&phrase);
        plain_len += phrase_len;
    }

    Ok(ParsedCaption { plain, mentions })
}

/// Inverse of [`parse_caption_chains`] for well-formed input.
pub fn render_caption_chains(parsed: &ParsedCaption) -> String {
    let chars: Vec<char> = parsed.plain.chars().collect();
    let mut mentions: Vec<&CaptionMention> = parsed.mentions.iter().collect();
    mentions.sort_by_key(|m| m.span.start);
    let mut out = String::new();
    let mut pos = 0;
    for m in mentions {
        out.extend(&chars[pos..m.span.start]);
        out.push_str(&format!("{OPEN}{}/{} ", m.entity_id, m.entity_type));
        out.extend(&chars[m.span.start..m.span.end]);
        out.push(']');
        pos = m.span.end;
    }
    out.extend(&chars[pos..]);
    out
}
