//! Core library for frame-semantic annotation of multimodal corpora.

pub mod annotation;
pub mod document;
pub mod export;
pub mod geometry;
pub mod lexicon;
pub mod preannotate;
pub mod static_corpus;
pub mod store;
pub mod tracking;
pub mod video;
pub mod workspace;
mod xmltree;

pub use geometry::{BoxGeometry, Span};
pub use lexicon::Lexicon;
