//! Scene-graph data model, ingestion and structural validation.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::Ontology;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoGraph {
    pub video_id: String,
    pub duration: f64,
    pub frames: Vec<Frame>,
    pub actions: Vec<ActionSpan>,
    #[serde(default)]
    pub sparse_spatial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub timestamp: f64,
    pub objects: Vec<ObjectInstance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    #[serde(rename = "class")]
    pub class: String,
    /// Normalized `[x, y, w, h]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<[f64; 4]>,
    #[serde(default)]
    pub relationships: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpan {
    #[serde(rename = "class")]
    pub class: String,
    pub start: f64,
    pub end: f64,
}

impl ActionSpan {
    pub fn new(class: impl Into<String>, start: f64, end: f64) -> Self {
        ActionSpan {
            class: class.into(),
            start,
            end,
        }
    }

    /// Whether a frame at `timestamp` falls inside the span (inclusive).
    pub fn covers(&self, timestamp: f64) -> bool {
        self.start <= timestamp && timestamp <= self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.start
            .total_cmp(&other.start)
            .then(self.end.total_cmp(&other.end))
            .then_with(|| self.class.cmp(&other.class))
    }
}

impl ObjectInstance {
    pub fn new<I, S>(class: impl Into<String>, relationships: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ObjectInstance {
            class: class.into(),
            bbox: None,
            relationships: relationships.into_iter().map(Into::into).collect(),
        }
    }
}

impl Frame {
    pub fn object(&self, class: &str) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.class == class)
    }
}

impl VideoGraph {
    pub fn new(video_id: impl Into<String>, duration: f64) -> Self {
        VideoGraph {
            video_id: video_id.into(),
            duration,
            frames: Vec::new(),
            actions: Vec::new(),
            sparse_spatial: false,
        }
    }

    /// Indices of the frames a span covers.
    pub fn frames_covered(&self, span: &ActionSpan) -> Vec<usize> {
        (0..self.frames.len())
            .filter(|&i| span.covers(self.frames[i].timestamp))
            .collect()
    }

    /// Distinct object classes annotated anywhere in the video.
    pub fn object_classes(&self) -> BTreeSet<&str> {
        self.frames
            .iter()
            .flat_map(|f| f.objects.iter().map(|o| o.class.as_str()))
            .collect()
    }

    /// Distinct action classes occurring in the video.
    pub fn action_classes(&self) -> BTreeSet<&str> {
        self.actions.iter().map(|a| a.class.as_str()).collect()
    }

    pub fn instance_count(&self) -> usize {
        self.frames.iter().map(|f| f.objects.len()).sum()
    }

    /// Put frames, instances and actions into the canonical order used for
    /// serialization.
    pub fn normalize_order(&mut self) {
        self.frames
            .sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        for f in &mut self.frames {
            f.objects.sort_by(|a, b| a.class.cmp(&b.class));
        }
        self.actions.sort_by(ActionSpan::canonical_cmp);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub element: String,
}

impl Violation {
    fn new(rule: &str, element: impl Into<String>) -> Self {
        Violation {
            rule: rule.to_string(),
            element: element.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.element)
    }
}

/// Structural invariants of a graph. Vocabulary membership is checked
/// separately by [`vocabulary_violations`].
pub fn validate(graph: &VideoGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if !graph.duration.is_finite() || graph.duration < 0.0 {
        out.push(Violation::new(
            "duration-invalid",
            format!("{}", graph.duration),
        ));
    }
    for (i, frame) in graph.frames.iter().enumerate() {
        let ts = frame.timestamp;
        if !(0.0..=graph.duration).contains(&ts) {
            out.push(Violation::new(
                "timestamp-out-of-range",
                format!("frame {i} at {ts}"),
            ));
        }
        if i > 0 && graph.frames[i - 1].timestamp >= ts {
            out.push(Violation::new(
                "frames-unsorted",
                format!("frame {i} at {ts}"),
            ));
        }
        let mut seen = BTreeSet::new();
        for obj in &frame.objects {
            if !seen.insert(obj.class.as_str()) {
                out.push(Violation::new(
                    "duplicate-object",
                    format!("{} in frame {i}", obj.class),
                ));
            }
            if let Some([x, y, w, h]) = obj.bbox {
                let unit = |v: f64| (0.0..=1.0).contains(&v);
                if !(unit(x) && unit(y) && unit(w) && unit(h) && w > 0.0 && h > 0.0) {
                    out.push(Violation::new(
                        "bbox-out-of-range",
                        format!("{} in frame {i}", obj.class),
                    ));
                }
            }
        }
    }
    for a in &graph.actions {
        if !(a.start < a.end) {
            out.push(Violation::new(
                "interval-reversed",
                format!("{} [{}, {}]", a.class, a.start, a.end),
            ));
        }
        if a.start < 0.0 || a.end > graph.duration {
            out.push(Violation::new(
                "action-out-of-range",
                format!("{} [{}, {}]", a.class, a.start, a.end),
            ));
        }
    }
    out
}

/// Names that are not canonical members of the ontology.
pub fn vocabulary_violations(graph: &VideoGraph, ontology: &Ontology) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, frame) in graph.frames.iter().enumerate() {
        for obj in &frame.objects {
            if !ontology.objects.contains(&obj.class) {
                out.push(Violation::new(
                    "unknown-object",
                    format!("{} in frame {i}", obj.class),
                ));
            }
            for r in &obj.relationships {
                if !ontology.relationships.contains_key(r) {
                    out.push(Violation::new(
                        "unknown-relationship",
                        format!("{r} in frame {i}"),
                    ));
                }
            }
        }
    }
    for a in &graph.actions {
        if !ontology.actions.contains_key(&a.class) {
            out.push(Violation::new("unknown-action", a.class.clone()));
        }
    }
    out
}

/// Parse one scene-graph document, canonicalize names through the merge
/// map, fold duplicate instances and spans, and validate.
pub fn ingest(text: &str, origin: &str, ontology: &Ontology) -> Result<VideoGraph> {
    let raw: VideoGraph = serde_json::from_str(text).map_err(|e| classify(origin, e))?;
    let mut graph = canonicalize(raw, ontology).map_err(|(kind, name)| Error::Vocabulary {
        origin: origin.to_string(),
        kind,
        name,
    })?;
    graph.normalize_order();
    let violations = validate(&graph);
    if !violations.is_empty() {
        return Err(Error::Validation {
            video_id: graph.video_id,
            violations,
        });
    }
    Ok(graph)
}

fn classify(origin: &str, e: serde_json::Error) -> Error {
    match e.classify() {
        serde_json::error::Category::Data => Error::Schema {
            origin: origin.to_string(),
            message: e.to_string(),
        },
        _ => Error::parse(origin, e),
    }
}

fn canonicalize(
    mut graph: VideoGraph,
    ontology: &Ontology,
) -> std::result::Result<VideoGraph, (&'static str, String)> {
    for frame in &mut graph.frames {
        let mut merged: Vec<ObjectInstance> = Vec::with_capacity(frame.objects.len());
        for mut obj in std::mem::take(&mut frame.objects) {
            obj.class = ontology.canonical(&obj.class).to_string();
            if !ontology.objects.contains(&obj.class) {
                return Err(("object", obj.class));
            }
            let mut rels = BTreeSet::new();
            for r in &obj.relationships {
                let c = ontology.canonical(r);
                if !ontology.relationships.contains_key(c) {
                    return Err(("relationship", c.to_string()));
                }
                rels.insert(c.to_string());
            }
            obj.relationships = rels;
            match merged.iter_mut().find(|m| m.class == obj.class) {
                Some(existing) => {
                    existing.relationships.extend(obj.relationships);
                    if existing.bbox.is_none() {
                        existing.bbox = obj.bbox;
                    }
                }
                None => merged.push(obj),
            }
        }
        frame.objects = merged;
    }
    for a in &mut graph.actions {
        a.class = ontology.canonical(&a.class).to_string();
        if !ontology.actions.contains_key(&a.class) {
            return Err(("action", a.class.clone()));
        }
    }
    graph.actions = merge_overlapping_spans(std::mem::take(&mut graph.actions));
    Ok(graph)
}

/// Fold overlapping spans of the same class into one. Synonym merging can
/// turn two distinct raw actions into duplicates of one canonical action.
fn merge_overlapping_spans(mut spans: Vec<ActionSpan>) -> Vec<ActionSpan> {
    spans.sort_by(|a, b| a.class.cmp(&b.class).then(a.canonical_cmp(b)));
    let mut out: Vec<ActionSpan> = Vec::with_capacity(spans.len());
    for s in spans {
        if let Some(last) = out.last_mut() {
            // reversed spans are left for validation to report
            if last.class == s.class
                && s.start <= last.end
                && last.start < last.end
                && s.start < s.end
            {
                last.end = last.end.max(s.end);
                continue;
            }
        }
        out.push(s);
    }
    out.sort_by(ActionSpan::canonical_cmp);
    out
}

/// Scene-graph documents under `path`: a directory of `.json` files, a
/// single `.json` document, or a `.jsonl` file with one graph per line.
/// Returned as `(origin, text)` in a stable order.
pub fn read_documents(path: &Path) -> Result<Vec<(String, String)>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        return files
            .par_iter()
            .map(|p| {
                std::fs::read_to_string(p)
                    .map(|t| (p.display().to_string(), t))
                    .map_err(|e| Error::io(p, e))
            })
            .collect();
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|x| x == "jsonl") {
        Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (format!("{}:{}", path.display(), i + 1), l.to_string()))
            .collect())
    } else {
        Ok(vec![(path.display().to_string(), text)])
    }
}

/// Load and validate every graph under `path`, failing on the first bad
/// document. Graphs are returned sorted by video id.
pub fn load_corpus(path: &Path, ontology: &Ontology) -> Result<Vec<VideoGraph>> {
    let docs = read_documents(path)?;
    let mut graphs = docs
        .par_iter()
        .map(|(origin, text)| ingest(text, origin, ontology))
        .collect::<Result<Vec<_>>>()?;
    graphs.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    Ok(graphs)
}

/// One graph per line, sorted input order preserved.
pub fn write_corpus_jsonl(graphs: &[VideoGraph]) -> String {
    let mut out = String::new();
    for g in graphs {
        out.push_str(&g.to_json());
        out.push('\n');
    }
    out
}
