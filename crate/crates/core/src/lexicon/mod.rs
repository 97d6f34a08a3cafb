//! The frame-semantic lexicon: frames, frame elements, lexical units and the
//! typed relation graph between frames.
//!
//! A [`Lexicon`] is immutable once loaded. Every annotation in the store
//! resolves its frame, FE and LU references against one. Loading goes through
//! [`Lexicon::from_toml_str`] (see [`file`] for the on-disk format), which
//! rejects dangling references, duplicate names and inheritance cycles.

mod file;
mod graph;

pub use file::{FrameDef, LexiconFile, LuDef, RelationDef, VocabularyDef, WordformDef};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

/// The lexicon shipped with the repository. It covers every frame, FE and LU
/// used by the bundled examples and tests.
pub const FIXTURE_LEXICON: &str = include_str!("../../fixtures/lexicon.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LuId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coreness {
    Core,
    Noncore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    V,
    N,
    A,
    Adv,
    Prep,
    Other,
}

impl Pos {
    pub fn as_str(&self) -> &'static str {
        match self {
            Pos::V => "v",
            Pos::N => "n",
            Pos::A => "a",
            Pos::Adv => "adv",
            Pos::Prep => "prep",
            Pos::Other => "other",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "v" => Pos::V,
            "n" => Pos::N,
            "a" => Pos::A,
            "adv" => Pos::Adv,
            "prep" => Pos::Prep,
            "other" => Pos::Other,
            _ => return Err(format!("unknown part of speech `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    Inheritance,
    Precedence,
    Using,
    Subframe,
    PerspectiveOn,
    CausativeOf,
    InchoativeOf,
}

impl RelationType {
    pub const ALL: [RelationType; 7] = [
        RelationType::Inheritance,
        RelationType::Precedence,
        RelationType::Using,
        RelationType::Subframe,
        RelationType::PerspectiveOn,
        RelationType::CausativeOf,
        RelationType::InchoativeOf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationType::Inheritance => "inheritance",
            RelationType::Precedence => "precedence",
            RelationType::Using => "using",
            RelationType::Subframe => "subframe",
            RelationType::PerspectiveOn => "perspective_on",
            RelationType::CausativeOf => "causative_of",
            RelationType::InchoativeOf => "inchoative_of",
        }
    }
}

impl FromStr for RelationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown relation type `{s}`"))
    }
}

/// Which end of a relation edge the queried frame sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The queried frame is the parent; children are returned.
    AsParent,
    /// The queried frame is the child; parents are returned.
    AsChild,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub id: FrameId,
    pub name: String,
    pub definition: String,
    pub core_fes: Vec<FeId>,
    pub noncore_fes: Vec<FeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrameElement {
    pub id: FeId,
    pub name: String,
    pub frame_id: FrameId,
    pub coreness: Coreness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LexicalUnit {
    pub id: LuId,
    pub lemma: String,
    pub pos: Pos,
    pub frame_id: FrameId,
    pub language: String,
}

impl LexicalUnit {
    /// `lemma.pos`, e.g. `arrive.v`.
    pub fn display_name(&self) -> String {
        format!("{}.{}", self.lemma, self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FrameRelation {
    pub relation_type: RelationType,
    pub parent: FrameId,
    pub child: FrameId,
}

/// One reading of a surface form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Wordform {
    pub lemma: String,
    pub pos: Pos,
    pub evoking: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{context} references unknown {kind} `{reference}`")]
    Dangling {
        context: String,
        kind: &'static str,
        reference: String,
    },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("invalid {what}: {message}")]
    Invalid { what: String, message: String },
    #[error("inheritance cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("unknown frame id {0:?}")]
    UnknownFrame(FrameId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelVocabularies {
    pub gf: Vec<String>,
    pub pt: Vec<String>,
    pub ni: Vec<String>,
}

impl Default for LabelVocabularies {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            gf: v(&["Ext", "Obj", "Dep"]),
            pt: v(&["NP", "PP", "VPfin", "VPto", "AJP", "AVP", "Sfin"]),
            ni: v(&["DNI", "CNI", "INI"]),
        }
    }
}

/// A validated, immutable frame-semantic lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    frames: Vec<Frame>,
    fes: Vec<FrameElement>,
    lus: Vec<LexicalUnit>,
    relations: Vec<FrameRelation>,
    wordforms: BTreeMap<String, Vec<Wordform>>,
    vocab: LabelVocabularies,
    frame_index: HashMap<String, FrameId>,
}

impl Lexicon {
    /// Parses and validates a lexicon document.
    pub fn from_toml_str(source: &str) -> Result<Self, LexiconError> {
        let file = LexiconFile::parse(source)?;
        Self::from_file(file)
    }

    pub fn from_bytes(source: &[u8]) -> Result<Self, LexiconError> {
        let text = std::str::from_utf8(source).map_err(|e| {
            let prefix = &source[..e.valid_up_to()];
            let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
            let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
            LexiconError::Parse {
                line,
                column,
                message: "invalid UTF-8".into(),
            }
        })?;
        Self::from_toml_str(text)
    }

    /// The lexicon bundled with the crate.
    pub fn fixture() -> Self {
        Self::from_toml_str(FIXTURE_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_file(file: LexiconFile) -> Result<Self, LexiconError> {
        let mut frames = Vec::with_capacity(file.frames.len());
        let mut fes = Vec::new();
        let mut frame_index = HashMap::new();

        for def in file.frames {
            if def.name.trim().is_empty() {
                return Err(LexiconError::Invalid {
                    what: "frame".into(),
                    message: "frame name must be non-empty".into(),
                });
            }
            let id = FrameId(frames.len() as u32);
            if frame_index.insert(def.name.clone(), id).is_some() {
                return Err(LexiconError::Duplicate {
                    kind: "frame",
                    name: def.name,
                });
            }
            let mut seen = std::collections::HashSet::new();
            let mut alloc = |name: String, coreness: Coreness| {
                if name.trim().is_empty() {
                    return Err(LexiconError::Invalid {
                        what: format!("frame element of {}", def.name),
                        message: "FE name must be non-empty".into(),
                    });
                }
                if !seen.insert(name.clone()) {
                    return Err(LexiconError::Duplicate {
                        kind: "frame element",
                        name: format!("{}.{}", def.name, name),
                    });
                }
                let fe_id = FeId(fes.len() as u32);
                fes.push(FrameElement {
                    id: fe_id,
                    name,
                    frame_id: id,
                    coreness,
                });
                Ok(fe_id)
            };
            let core_fes = def
                .core_fes
                .into_iter()
                .map(|n| alloc(n, Coreness::Core))
                .collect::<Result<Vec<_>, _>>()?;
            let noncore_fes = def
                .noncore_fes
                .into_iter()
                .map(|n| alloc(n, Coreness::Noncore))
                .collect::<Result<Vec<_>, _>>()?;
            frames.push(Frame {
                id,
                name: def.name,
                definition: def.definition,
                core_fes,
                noncore_fes,
            });
        }

        let resolve = |context: String, name: &str| {
            frame_index
                .get(name)
                .copied()
                .ok_or_else(|| LexiconError::Dangling {
                    context,
                    kind: "frame",
                    reference: name.to_string(),
                })
        };

        let mut lus: Vec<LexicalUnit> = Vec::with_capacity(file.lus.len());
        for def in file.lus {
            let context = format!("lexical unit {}.{}", def.lemma, def.pos);
            if def.lemma.is_empty() || def.lemma != def.lemma.to_lowercase() {
                return Err(LexiconError::Invalid {
                    what: context,
                    message: "lemma must be a non-empty lowercase string".into(),
                });
            }
            let frame_id = resolve(context, &def.frame)?;
            if lus
                .iter()
                .any(|lu| lu.lemma == def.lemma && lu.pos == def.pos && lu.frame_id == frame_id)
            {
                return Err(LexiconError::Duplicate {
                    kind: "lexical unit",
                    name: format!("{}.{}@{}", def.lemma, def.pos, def.frame),
                });
            }
            lus.push(LexicalUnit {
                id: LuId(lus.len() as u32),
                lemma: def.lemma,
                pos: def.pos,
                frame_id,
                language: def.language,
            });
        }

        let mut relations = Vec::with_capacity(file.relations.len());
        for def in file.relations {
            let context = format!(
                "{} relation {} -> {}",
                def.relation_type.as_str(),
                def.parent,
                def.child
            );
            let parent = resolve(context.clone(), &def.parent)?;
            let child = resolve(context.clone(), &def.child)?;
            if parent == child {
                return Err(LexiconError::Invalid {
                    what: context,
                    message: "a frame cannot be related to itself".into(),
                });
            }
            let rel = FrameRelation {
                relation_type: def.relation_type,
                parent,
                child,
            };
            if !relations.contains(&rel) {
                relations.push(rel);
            }
        }

        let mut wordforms: BTreeMap<String, Vec<Wordform>> = BTreeMap::new();
        for def in file.wordforms {
            let form = def.form.to_lowercase();
            if form.is_empty() {
                return Err(LexiconError::Invalid {
                    what: "wordform".into(),
                    message: "surface form must be non-empty".into(),
                });
            }
            if def.evoking && !lus.iter().any(|lu| lu.lemma == def.lemma && lu.pos == def.pos) {
                return Err(LexiconError::Dangling {
                    context: format!("wordform `{}`", def.form),
                    kind: "lemma",
                    reference: format!("{}.{}", def.lemma, def.pos),
                });
            }
            let entry = Wordform {
                lemma: def.lemma,
                pos: def.pos,
                evoking: def.evoking,
            };
            let readings = wordforms.entry(form).or_default();
            if !readings.contains(&entry) {
                readings.push(entry);
            }
        }

        let vocab = file.label_vocabularies.into_vocabularies()?;

        let lexicon = Lexicon {
            frames,
            fes,
            lus,
            relations,
            wordforms,
            vocab,
            frame_index,
        };
        graph::check_inheritance_acyclic(&lexicon)?;
        Ok(lexicon)
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_elements(&self) -> &[FrameElement] {
        &self.fes
    }

    pub fn lexical_units(&self) -> &[LexicalUnit] {
        &self.lus
    }

    pub fn relations(&self) -> &[FrameRelation] {
        &self.relations
    }

    pub fn wordforms(&self) -> &BTreeMap<String, Vec<Wordform>> {
        &self.wordforms
    }

    pub fn gf_values(&self) -> &[String] {
        &self.vocab.gf
    }

    pub fn pt_values(&self) -> &[String] {
        &self.vocab.pt
    }

    pub fn ni_types(&self) -> &[String] {
        &self.vocab.ni
    }

    pub fn frame(&self, id: FrameId) -> Option<&Frame> {
        self.frames.get(id.0 as usize)
    }

    pub fn fe(&self, id: FeId) -> Option<&FrameElement> {
        self.fes.get(id.0 as usize)
    }

    pub fn lu(&self, id: LuId) -> Option<&LexicalUnit> {
        self.lus.get(id.0 as usize)
    }

    pub fn frame_by_name(&self, name: &str) -> Option<&Frame> {
        self.frame_index.get(name).and_then(|id| self.frame(*id))
    }

    /// Core FEs in declaration order, then non-core FEs.
    pub fn fes_of_frame(&self, id: FrameId) -> Result<Vec<&FrameElement>, LexiconError> {
        let frame = self.frame(id).ok_or(LexiconError::UnknownFrame(id))?;
        Ok(frame
            .core_fes
            .iter()
            .chain(&frame.noncore_fes)
            .map(|fe| &self.fes[fe.0 as usize])
            .collect())
    }

    pub fn fe_by_name(&self, frame: FrameId, name: &str) -> Option<&FrameElement> {
        let frame = self.frame(frame)?;
        frame
            .core_fes
            .iter()
            .chain(&frame.noncore_fes)
            .map(|fe| &self.fes[fe.0 as usize])
            .find(|fe| fe.name == name)
    }

    /// All LUs with the given lemma (and part of speech, when given), ordered
    /// by evoked frame name and then part of speech.
    pub fn lus_by_lemma(&self, lemma: &str, pos: Option<Pos>) -> Vec<&LexicalUnit> {
        let mut found: Vec<&LexicalUnit> = self
            .lus
            .iter()
            .filter(|lu| lu.lemma == lemma && pos.is_none_or(|p| lu.pos == p))
            .collect();
        found.sort_by(|a, b| {
            self.frames[a.frame_id.0 as usize]
                .name
                .cmp(&self.frames[b.frame_id.0 as usize].name)
                .then(a.pos.cmp(&b.pos))
                .then(a.id.cmp(&b.id))
        });
        found
    }

    /// Frames one edge away from `id` along relations of `relation_type`,
    /// sorted by name.
    pub fn related_frames(
        &self,
        id: FrameId,
        relation_type: RelationType,
        direction: Direction,
    ) -> Result<Vec<&Frame>, LexiconError> {
        self.frame(id).ok_or(LexiconError::UnknownFrame(id))?;
        let mut out: Vec<&Frame> = self
            .relations
            .iter()
            .filter(|r| r.relation_type == relation_type)
            .filter_map(|r| match direction {
                Direction::AsParent if r.parent == id => Some(r.child),
                Direction::AsChild if r.child == id => Some(r.parent),
                _ => None,
            })
            .map(|f| &self.frames[f.0 as usize])
            .collect();
        out.sort_by(|a, b| a.name.cmp(&b.name));
        out.dedup_by_key(|f| f.id);
        Ok(out)
    }

    /// Number of relation edges of any type joining `a` and `b`, in either
    /// direction.
    pub fn link_count(&self, a: FrameId, b: FrameId) -> usize {
        self.relations
            .iter()
            .filter(|r| (r.parent == a && r.child == b) || (r.parent == b && r.child == a))
            .count()
    }

    /// Readings of a surface form (case-insensitive).
    pub fn resolve_wordform(&self, form: &str) -> &[Wordform] {
        self.wordforms
            .get(&form.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Parses `lemma.pos` or `lemma.pos@Frame` and returns the matching LUs.
    pub fn lus_by_key(&self, key: &str) -> Vec<&LexicalUnit> {
        let (display, frame) = match key.split_once('@') {
            Some((d, f)) => (d, Some(f)),
            None => (key, None),
        };
        let Some((lemma, pos)) = display.rsplit_once('.') else {
            return Vec::new();
        };
        let Ok(pos) = pos.parse::<Pos>() else {
            return Vec::new();
        };
        self.lus_by_lemma(lemma, Some(pos))
            .into_iter()
            .filter(|lu| frame.is_none_or(|f| self.frames[lu.frame_id.0 as usize].name == f))
            .collect()
    }

    /// Stable textual key of an LU: `lemma.pos@Frame`.
    pub fn lu_key(&self, lu: &LexicalUnit) -> String {
        format!(
            "{}.{}@{}",
            lu.lemma,
            lu.pos,
            self.frames[lu.frame_id.0 as usize].name
        )
    }

    pub fn lu_by_exact_key(&self, key: &str) -> Option<&LexicalUnit> {
        if !key.contains('@') {
            return None;
        }
        let mut found = self.lus_by_key(key);
        (found.len() == 1).then(|| found.remove(0))
    }

    /// Frames in an order where every inheritance parent precedes its
    /// children.
    pub fn inheritance_order(&self) -> Vec<FrameId> {
        graph::topological_order(self, RelationType::Inheritance)
            .expect("inheritance acyclicity is checked at load time")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Lexicon {
        Lexicon::fixture()
    }

    #[test]
    fn fixture_has_expected_frames() {
        let lex = fixture();
        for name in [
            "Arriving",
            "Departing",
            "Vehicle_landing",
            "Ingestion",
            "People",
            "Container",
            "Desirability",
            "Locative_relation",
            "Change_of_temperature",
            "People_by_leisure_activity",
        ] {
            assert!(lex.frame_by_name(name).is_some(), "missing {name}");
        }
    }

    #[test]
    fn frame_by_name_lookups() {
        let lex = fixture();
        let arriving = lex.frame_by_name("Arriving").unwrap();
        let names: Vec<_> = arriving
            .core_fes
            .iter()
            .map(|id| lex.fe(*id).unwrap().name.as_str())
            .collect();
        assert!(names.contains(&"Theme") && names.contains(&"Goal"));
        assert!(lex.frame_by_name("").is_none());
        assert!(lex.frame_by_name("arriving").is_none());
    }

    #[test]
    fn ingestion_fes_core_first() {
        let lex = fixture();
        let ingestion = lex.frame_by_name("Ingestion").unwrap();
        let fes = lex.fes_of_frame(ingestion.id).unwrap();
        let names: Vec<_> = fes.iter().map(|fe| fe.name.as_str()).collect();
        assert_eq!(&names[..2], &["Ingestor", "Ingestibles"]);
        assert!(fes[..2].iter().all(|fe| fe.coreness == Coreness::Core));
        assert!(fes[2..].iter().all(|fe| fe.coreness == Coreness::Noncore));
        assert!(matches!(
            lex.fes_of_frame(FrameId(9999)),
            Err(LexiconError::UnknownFrame(_))
        ));
    }

    #[test]
    fn frame_without_fes() {
        let lex = Lexicon::from_toml_str("[[frames]]\nname = \"Empty\"\n").unwrap();
        let id = lex.frame_by_name("Empty").unwrap().id;
        assert!(lex.fes_of_frame(id).unwrap().is_empty());
    }

    #[test]
    fn lus_by_lemma_examples() {
        let lex = fixture();
        let arrive = lex.lus_by_lemma("arrive", Some(Pos::V));
        assert_eq!(arrive.len(), 1);
        assert_eq!(arrive[0].display_name(), "arrive.v");
        assert_eq!(lex.frame(arrive[0].frame_id).unwrap().name, "Arriving");

        let person = lex.lus_by_lemma("person", Some(Pos::N));
        assert_eq!(person.len(), 1);
        assert_eq!(lex.frame(person[0].frame_id).unwrap().name, "People");

        assert!(lex.lus_by_lemma("zzz", None).is_empty());
    }

    #[test]
    fn related_frames_examples() {
        let lex = fixture();
        let arriving = lex.frame_by_name("Arriving").unwrap().id;
        let names = |v: Vec<&Frame>| v.into_iter().map(|f| f.name.clone()).collect::<Vec<_>>();
        assert_eq!(
            names(
                lex.related_frames(arriving, RelationType::Inheritance, Direction::AsParent)
                    .unwrap()
            ),
            ["Vehicle_landing"]
        );
        assert_eq!(
            names(
                lex.related_frames(arriving, RelationType::Precedence, Direction::AsChild)
                    .unwrap()
            ),
            ["Departing"]
        );
        assert!(lex
            .related_frames(arriving, RelationType::Using, Direction::AsParent)
            .unwrap()
            .is_empty());
        assert!(lex
            .related_frames(FrameId(404), RelationType::Using, Direction::AsParent)
            .is_err());
    }

    #[test]
    fn empty_lexicon_is_valid() {
        let lex = Lexicon::from_toml_str("frames = []\nlus = []\n").unwrap();
        assert!(lex.frames().is_empty());
        assert!(lex.lexical_units().is_empty());
        assert_eq!(lex.gf_values(), ["Ext", "Obj", "Dep"]);
        assert_eq!(lex.ni_types(), ["DNI", "CNI", "INI"]);
    }

    #[test]
    fn dangling_lu_frame() {
        let src = r#"
[[frames]]
name = "Arriving"

[[lus]]
lemma = "arrive"
pos = "v"
frame = "Nowhere"
"#;
        match Lexicon::from_toml_str(src) {
            Err(LexiconError::Dangling { reference, .. }) => assert_eq!(reference, "Nowhere"),
            other => panic!("expected dangling error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_fe_across_core_and_noncore() {
        let src = r#"
[[frames]]
name = "F"
core_fes = ["A"]
noncore_fes = ["A"]
"#;
        assert!(matches!(
            Lexicon::from_toml_str(src),
            Err(LexiconError::Duplicate { .. })
        ));
    }

    #[test]
    fn inheritance_cycle_is_reported() {
        let src = r#"
[[frames]]
name = "A"
[[frames]]
name = "B"
[[frames]]
name = "C"

[[relations]]
type = "inheritance"
parent = "A"
child = "B"
[[relations]]
type = "inheritance"
parent = "B"
child = "C"
[[relations]]
type = "inheritance"
parent = "C"
child = "A"
"#;
        match Lexicon::from_toml_str(src) {
            Err(LexiconError::Cycle(cycle)) => {
                assert_eq!(cycle.first(), cycle.last());
                assert_eq!(cycle.len(), 4);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn precedence_cycles_are_allowed() {
        let src = r#"
[[frames]]
name = "A"
[[frames]]
name = "B"
[[relations]]
type = "precedence"
parent = "A"
child = "B"
[[relations]]
type = "precedence"
parent = "B"
child = "A"
"#;
        assert!(Lexicon::from_toml_str(src).is_ok());
    }

    #[test]
    fn self_relation_rejected() {
        let src = "[[frames]]\nname = \"A\"\n[[relations]]\ntype = \"using\"\nparent = \"A\"\nchild = \"A\"\n";
        assert!(matches!(
            Lexicon::from_toml_str(src),
            Err(LexiconError::Invalid { .. })
        ));
    }

    #[test]
    fn parse_error_has_position() {
        let src = "[[frames]]\nname = \"A\"\ncore_fes = [\n";
        match Lexicon::from_toml_str(src) {
            Err(LexiconError::Parse { line, .. }) => assert!(line >= 3, "line {line}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wordform_must_resolve_unless_non_evoking() {
        let base = "[[frames]]\nname = \"A\"\n[[lus]]\nlemma = \"go\"\npos = \"v\"\nframe = \"A\"\n";
        let bad = format!("{base}[[wordforms]]\nform = \"went\"\nlemma = \"goo\"\npos = \"v\"\n");
        assert!(matches!(
            Lexicon::from_toml_str(&bad),
            Err(LexiconError::Dangling { kind: "lemma", .. })
        ));
        let flagged = format!(
            "{base}[[wordforms]]\nform = \"the\"\nlemma = \"the\"\npos = \"other\"\nevoking = false\n"
        );
        assert!(Lexicon::from_toml_str(&flagged).is_ok());
    }

    #[test]
    fn lu_keys_round_trip() {
        let lex = fixture();
        for lu in lex.lexical_units() {
            let key = lex.lu_key(lu);
            assert_eq!(lex.lu_by_exact_key(&key).map(|l| l.id), Some(lu.id));
        }
        assert_eq!(lex.lus_by_key("glass.n").len(), 1);
    }
}
