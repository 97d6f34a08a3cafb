//! Read-only JSON views of the lexicon.

use charonette_core::lexicon::{Coreness, Direction, Frame, LexicalUnit, RelationType};
use charonette_core::Lexicon;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FeView {
    pub name: String,
    pub coreness: Coreness,
}

#[derive(Debug, Serialize)]
pub struct RelationView {
    #[serde(rename = "type")]
    pub relation_type: RelationType,
    pub direction: Direction,
    pub frame: String,
}

#[derive(Debug, Serialize)]
pub struct FrameView {
    pub name: String,
    pub definition: String,
    pub fes: Vec<FeView>,
    pub lus: Vec<String>,
    pub relations: Vec<RelationView>,
}

#[derive(Debug, Serialize)]
pub struct FrameSummary {
    pub name: String,
    pub definition: String,
}

#[derive(Debug, Serialize)]
pub struct LuView {
    pub key: String,
    pub lemma: String,
    pub pos: String,
    pub frame: String,
    pub language: String,
}

pub fn fes(lex: &Lexicon, frame: &Frame) -> Vec<FeView> {
    lex.fes_of_frame(frame.id)
        .unwrap_or_default()
        .into_iter()
        .map(|fe| FeView {
            name: fe.name.clone(),
            coreness: fe.coreness,
        })
        .collect()
}

pub fn frame(lex: &Lexicon, frame: &Frame) -> FrameView {
    let lus = lex
        .lexical_units()
        .iter()
        .filter(|lu| lu.frame_id == frame.id)
        .map(|lu| lex.lu_key(lu))
        .collect();
    let mut relations = Vec::new();
    for relation_type in RelationType::ALL {
        for direction in [Direction::AsParent, Direction::AsChild] {
            for other in lex.related_frames(frame.id, relation_type, direction).unwrap_or_default() {
                relations.push(RelationView {
                    relation_type,
                    direction,
                    frame: other.name.clone(),
                });
            }
        }
    }
    FrameView {
        name: frame.name.clone(),
        definition: frame.definition.clone(),
        fes: fes(lex, frame),
        lus,
        relations,
    }
}

pub fn lu(lex: &Lexicon, lu: &LexicalUnit) -> LuView {
    LuView {
        key: lex.lu_key(lu),
        lemma: lu.lemma.clone(),
        pos: lu.pos.to_string(),
        frame: lex.frame(lu.frame_id).map(|f| f.name.clone()).unwrap_or_default(),
        language: lu.language.clone(),
    }
}
