use std::path::PathBuf;

use crate::graph::Violation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {origin}: {source}")]
    Parse {
        origin: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("schema error in {origin}: {message}")]
    Schema { origin: String, message: String },

    #[error("unknown {kind} name {name:?} in {origin}")]
    Vocabulary {
        origin: String,
        kind: &'static str,
        name: String,
    },

    #[error("ontology is inconsistent: {0}")]
    Ontology(String),

    #[error("graph {video_id} failed validation: {}", summarize(.violations))]
    Validation {
        video_id: String,
        violations: Vec<Violation>,
    },

    #[error("infeasible synthesis parameters: {0}")]
    InfeasibleParams(String),

    #[error("template registry: {0}")]
    Registry(String),

    #[error("program parse error: {0}")]
    Program(String),

    #[error("graph has {frames} frames; the oracle accepts at most {limit}")]
    OracleSizeGuard { frames: usize, limit: usize },

    #[error("config: {0}")]
    Config(String),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("{} ({})", v.rule, v.element))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(origin: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Parse {
            origin: origin.into(),
            source,
        }
    }
}
