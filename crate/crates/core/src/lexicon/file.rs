//! On-disk lexicon format.
//!
//! A lexicon is a single TOML document with five top-level sections, all
//! optional:
//!
//! ```toml
//! [[frames]]
//! name = "Arriving"
//! definition = "A Theme moves in the direction of a Goal."
//! core_fes = ["Theme", "Goal"]
//! noncore_fes = ["Source", "Path"]
//!
//! [[lus]]
//! lemma = "arrive"
//! pos = "v"
//! frame = "Arriving"
//! language = "en"
//!
//! [[relations]]
//! type = "inheritance"
//! parent = "Arriving"
//! child = "Vehicle_landing"
//!
//! [[wordforms]]
//! form = "arrived"
//! lemma = "arrive"
//! pos = "v"
//!
//! [label_vocabularies]
//! gf = ["Ext", "Obj", "Dep"]
//! ```
//!
//! Frames are referenced by name everywhere; names are case-sensitive.
//! Wordforms whose lemma evokes no frame must set `evoking = false`.

use super::{LabelVocabularies, LexiconError, Pos, RelationType};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconFile {
    #[serde(default)]
    pub frames: Vec<FrameDef>,
    #[serde(default)]
    pub lus: Vec<LuDef>,
    #[serde(default)]
    pub relations: Vec<RelationDef>,
    #[serde(default)]
    pub wordforms: Vec<WordformDef>,
    #[serde(default)]
    pub label_vocabularies: VocabularyDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDef {
    pub name: String,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub core_fes: Vec<String>,
    #[serde(default)]
    pub noncore_fes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LuDef {
    pub lemma: String,
    pub pos: Pos,
    pub frame: String,
    #[serde(default = "default_language")]
    pub language: String,
}

fn default_language() -> String {
    "und".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDef {
    #[serde(rename = "type")]
    pub relation_type: RelationType,
    pub parent: String,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordformDef {
    pub form: String,
    pub lemma: String,
    pub pos: Pos,
    #[serde(default = "yes")]
    pub evoking: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyDef {
    pub gf: Option<Vec<String>>,
    pub pt: Option<Vec<String>>,
    pub ni: Option<Vec<String>>,
}

impl VocabularyDef {
    pub(super) fn into_vocabularies(self) -> Result<LabelVocabularies, LexiconError> {
        let defaults = LabelVocabularies::default();
        let check = |name: &str, values: Vec<String>| {
            let mut seen = std::collections::HashSet::new();
            for v in &values {
                if v.trim().is_empty() {
                    return Err(LexiconError::Invalid {
                        what: format!("{name} vocabulary"),
                        message: "labels must be non-empty".into(),
                    });
                }
                if !seen.insert(v) {
                    return Err(LexiconError::Duplicate {
                        kind: "vocabulary label",
                        name: format!("{name}:{v}"),
                    });
                }
            }
            Ok(values)
        };
        Ok(LabelVocabularies {
            gf: check("gf", self.gf.unwrap_or(defaults.gf))?,
            pt: check("pt", self.pt.unwrap_or(defaults.pt))?,
            ni: check("ni", self.ni.unwrap_or(defaults.ni))?,
        })
    }
}

impl LexiconFile {
    pub fn parse(source: &str) -> Result<Self, LexiconError> {
        toml::from_str(source).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|span| line_col(source, span.start))
                .unwrap_or((1, 1));
            LexiconError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }
}

/// 1-based line and column (in chars) of a byte offset.
fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rsplit_once('\n')
        .map_or(before, |(_, tail)| tail)
        .chars()
        .count()
        + 1;
    (line, column)
}
