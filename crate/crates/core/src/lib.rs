//! Generation, balancing and splitting of compositional spatio-temporal
//! question-answer corpora over symbolic video scene graphs, plus an
//! evaluation harness for model predictions.

pub mod augment;
pub mod balance;
pub mod error;
pub mod generator;
pub mod graph;
pub mod metrics;
pub mod ontology;
pub mod program;
pub mod splits;
pub mod synth;
pub mod templates;
pub mod util;

pub use error::{Error, Result};
pub use graph::{ActionSpan, Frame, ObjectInstance, VideoGraph, Violation};
pub use ontology::Ontology;
