//! Seeded synthetic scene graphs, used in place of real video annotations
//! for tests, demos and desk-scale corpora.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ActionSpan, Frame, ObjectInstance, VideoGraph};
use crate::ontology::{Ontology, RelationshipCategory};
use crate::util::rng_for;

/// Default object → (relationship, weight) table. Objects missing from the
/// table fall back to `GENERIC`.
const COOCCURRENCE: &[(&str, &[(&str, u32)])] = &[
    (
        "bag",
        &[
            ("holding", 3),
            ("carrying", 2),
            ("touching", 2),
            ("not contacting", 4),
        ],
    ),
    (
        "bed",
        &[
            ("sitting on", 3),
            ("lying on", 3),
            ("touching", 2),
            ("not contacting", 3),
        ],
    ),
    (
        "blanket",
        &[
            ("holding", 2),
            ("covered by", 3),
            ("touching", 2),
            ("not contacting", 3),
        ],
    ),
    (
        "book",
        &[("holding", 4), ("touching", 2), ("not contacting", 2)],
    ),
    (
        "bottle",
        &[
            ("holding", 4),
            ("drinking from", 1),
            ("touching", 2),
            ("not contacting", 3),
        ],
    ),
    (
        "broom",
        &[("holding", 3), ("carrying", 1), ("not contacting", 3)],
    ),
    (
        "chair",
        &[("sitting on", 4), ("leaning on", 1), ("not contacting", 3)],
    ),
    (
        "clothes",
        &[("holding", 2), ("touching", 1), ("not contacting", 3)],
    ),
    (
        "dish",
        &[
            ("holding", 3),
            ("wiping", 1),
            ("touching", 2),
            ("not contacting", 3),
        ],
    ),
    ("door", &[("touching", 2), ("not contacting", 4)]),
    (
        "doorknob",
        &[("twisting", 1), ("touching", 2), ("not contacting", 3)],
    ),
    ("doorway", &[("not contacting", 5)]),
    (
        "floor",
        &[("sitting on", 1), ("touching", 2), ("not contacting", 2)],
    ),
    (
        "food",
        &[("eating", 2), ("holding", 2), ("not contacting", 3)],
    ),
    (
        "laptop",
        &[("touching", 3), ("holding", 1), ("not contacting", 3)],
    ),
    ("light", &[("touching", 1), ("not contacting", 4)]),
    (
        "paper",
        &[("holding", 3), ("carrying", 1), ("not contacting", 2)],
    ),
    (
        "phone",
        &[("holding", 4), ("touching", 2), ("not contacting", 2)],
    ),
    ("picture", &[("touching", 1), ("not contacting", 4)]),
    (
        "pillow",
        &[
            ("holding", 2),
            ("touching", 2),
            ("leaning on", 1),
            ("not contacting", 2),
        ],
    ),
    (
        "table",
        &[("touching", 2), ("leaning on", 1), ("not contacting", 4)],
    ),
    ("television", &[("not contacting", 5)]),
    ("window", &[("touching", 1), ("not contacting", 4)]),
];

const GENERIC: &[(&str, u32)] = &[("touching", 2), ("holding", 1), ("not contacting", 3)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub frames: usize,
    pub objects_per_frame: usize,
    pub actions: usize,
    /// Video length in seconds.
    pub duration: f64,
    /// Probability that an instance carries a spatial relationship.
    pub spatial_rate: f64,
    /// Probability that an instance carries an attention relationship.
    pub attention_rate: f64,
    /// Probability of a uniformly random contact relationship, which is what
    /// produces rare object-relationship pairs.
    pub noise_rate: f64,
    /// Overrides the built-in co-occurrence table when non-empty.
    pub cooccurrence: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            frames: 8,
            objects_per_frame: 3,
            actions: 4,
            duration: 30.0,
            spatial_rate: 0.8,
            attention_rate: 0.15,
            noise_rate: 0.02,
            cooccurrence: BTreeMap::new(),
        }
    }
}

impl SynthParams {
    fn check(&self, ontology: &Ontology) -> Result<()> {
        let bad = |m: &str| Err(Error::InfeasibleParams(m.to_string()));
        if ontology.objects.is_empty() {
            return bad("ontology has no object classes");
        }
        if self.actions > 0 && ontology.actions.is_empty() {
            return bad("actions requested but ontology has no action classes");
        }
        if self.actions > 0 && self.frames == 0 {
            return bad("actions must cover a frame, but zero frames were requested");
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad("duration must be positive");
        }
        for (name, rate) in [
            ("spatial_rate", self.spatial_rate),
            ("attention_rate", self.attention_rate),
            ("noise_rate", self.noise_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InfeasibleParams(format!(
                    "{name} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn weights_for(&self, object: &str) -> Vec<(String, u32)> {
        if !self.cooccurrence.is_empty() {
            return self
                .cooccurrence
                .get(object)
                .map(|m| m.iter().map(|(k, v)| (k.clone(), *v)).collect())
                .unwrap_or_default();
        }
        let table = COOCCURRENCE
            .iter()
            .find(|(o, _)| *o == object)
            .map(|(_, t)| *t)
            .unwrap_or(GENERIC);
        table.iter().map(|(r, w)| (r.to_string(), *w)).collect()
    }
}

/// Spatial convention for above/beneath, fixed per object class so corpus
/// statistics have a clear majority.
fn vertical_convention(object: &str) -> &'static str {
    if object.len() % 2 == 0 {
        "above"
    } else {
        "beneath"
    }
}

/// One synthetic video graph. Deterministic in `(seed, video_id, params)`.
pub fn synth_graph(
    seed: u64,
    video_id: &str,
    params: &SynthParams,
    ontology: &Ontology,
) -> Result<VideoGraph> {
    params.check(ontology)?;
    let mut rng = rng_for(seed, "synth", video_id);
    let duration = params.duration;
    let mut graph = VideoGraph::new(video_id, duration);

    let slot = duration / params.frames.max(1) as f64;
    let timestamps: Vec<f64> = (0..params.frames)
        .map(|i| {
            let jitter = rng.random_range(-0.3..0.3) * slot;
            round_ms((i as f64 + 0.5) * slot + jitter)
        })
        .collect();

    graph.actions = synth_actions(&mut rng, params, ontology, &timestamps, duration);

    let action_objects: BTreeSet<String> = graph
        .actions
        .iter()
        .filter_map(|a| ontology.actions[&a.class].object.clone())
        .collect();
    let all_objects: Vec<&String> = ontology.objects.iter().collect();
    let extra = params.objects_per_frame + 2;
    let mut pool: BTreeSet<String> = action_objects.clone();
    for o in all_objects.choose_multiple(&mut rng, extra.min(all_objects.len())) {
        pool.insert((*o).clone());
    }
    let pool: Vec<String> = pool.into_iter().collect();

    for &ts in &timestamps {
        let mut present: BTreeSet<String> = graph
            .actions
            .iter()
            .filter(|a| a.covers(ts))
            .filter_map(|a| ontology.actions[&a.class].object.clone())
            .collect();
        let mut others: Vec<&String> = pool.iter().filter(|o| !present.contains(*o)).collect();
        others.shuffle(&mut rng);
        for o in others {
            if present.len() >= params.objects_per_frame {
                break;
            }
            present.insert(o.clone());
        }
        let objects = present
            .into_iter()
            .map(|class| synth_instance(&mut rng, params, ontology, class))
            .collect();
        graph.frames.push(Frame {
            timestamp: ts,
            objects,
        });
    }
    graph.normalize_order();
    Ok(graph)
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

fn synth_instance(
    rng: &mut ChaCha8Rng,
    params: &SynthParams,
    ontology: &Ontology,
    class: String,
) -> ObjectInstance {
    let mut rels = BTreeSet::new();
    let weights = params.weights_for(&class);
    let want = if rng.random_bool(0.4) { 2 } else { 1 };
    if let Ok(picked) = weights.choose_multiple_weighted(&mut *rng, want, |(_, w)| *w as f64) {
        rels.extend(picked.map(|(r, _)| r.clone()));
    }
    if rng.random_bool(params.noise_rate) {
        let contact: Vec<&String> = ontology
            .relationships
            .iter()
            .filter(|(_, c)| **c == RelationshipCategory::Contact)
            .map(|(n, _)| n)
            .collect();
        if let Some(r) = contact.choose(&mut *rng) {
            rels.insert((*r).clone());
        }
    }
    if rng.random_bool(params.spatial_rate) {
        let r = if rng.random_bool(0.5) {
            let conv = vertical_convention(&class);
            if rng.random_bool(0.03) {
                if conv == "above" {
                    "beneath"
                } else {
                    "above"
                }
            } else {
                conv
            }
        } else {
            ["in front of", "behind", "on the side of"][rng.random_range(0..3)]
        };
        rels.insert(r.to_string());
    }
    if rng.random_bool(params.attention_rate) {
        let attention: Vec<&str> = ontology.attention_relationships().collect();
        if let Some(r) = attention.choose(&mut *rng) {
            rels.insert(r.to_string());
        }
    }
    rels.retain(|r| ontology.relationships.contains_key(r));
    ObjectInstance {
        class,
        bbox: None,
        relationships: rels,
    }
}

fn synth_actions(
    rng: &mut ChaCha8Rng,
    params: &SynthParams,
    ontology: &Ontology,
    timestamps: &[f64],
    duration: f64,
) -> Vec<ActionSpan> {
    let classes: Vec<&String> = ontology.actions.keys().collect();
    let mut out: Vec<ActionSpan> = Vec::new();
    while out.len() < params.actions {
        let anchor = timestamps[rng.random_range(0..timestamps.len())];
        let class = classes[rng.random_range(0..classes.len())];
        let action = &ontology.actions[class];
        let len = rng.random_range(2.0..20.0);
        let span = anchored_span(rng, anchor, len, duration);

        // take/hold families: sometimes emit an overlapping take → hold pair,
        // sometimes a lone hold with no take in front of it.
        let family = action.object.as_deref().and_then(|obj| {
            let take = ontology.action_for("take", obj)?;
            let hold = ontology.action_for("hold", obj)?;
            Some((take.name.clone(), hold.name.clone()))
        });
        match family {
            Some((take, hold)) if out.len() + 2 <= params.actions && rng.random_bool(0.5) => {
                let take_len = rng.random_range(1.0..6.0);
                let take_span = anchored_span(rng, anchor, take_len, duration);
                // hold starts strictly inside the take, far enough from its
                // start that sequencing can trim the take
                let lo = take_span.start + 0.6;
                if lo < take_span.end {
                    let hold_start = round_ms(rng.random_range(lo..take_span.end));
                    let hold_end = round_ms((hold_start + len).min(duration));
                    if hold_end > hold_start
                        && timestamps.iter().any(|&t| hold_start <= t && t <= hold_end)
                    {
                        out.push(ActionSpan::new(take, take_span.start, take_span.end));
                        out.push(ActionSpan::new(hold, hold_start, hold_end));
                        continue;
                    }
                }
                out.push(ActionSpan::new(class.clone(), span.start, span.end));
            }
            _ => out.push(ActionSpan::new(class.clone(), span.start, span.end)),
        }
    }
    out.sort_by(ActionSpan::canonical_cmp);
    dedup_overlaps(out, ontology)
}

/// A span of roughly `len` seconds inside `[0, duration]` that contains `anchor`.
fn anchored_span(rng: &mut ChaCha8Rng, anchor: f64, len: f64, duration: f64) -> ActionSpan {
    let before = len * rng.random_range(0.0..1.0);
    let start = round_ms((anchor - before).max(0.0));
    let end = round_ms(
        (start + len)
            .min(duration)
            .max(anchor + 0.001)
            .min(duration),
    );
    let start = if start >= end {
        round_ms((end - 0.01).max(0.0))
    } else {
        start
    };
    ActionSpan::new(String::new(), start, end)
}

/// Drop later spans that overlap an earlier span of the same class (so
/// ingestion would not fold them) or that start within half a second of a
/// span over the same object (which sequencing could not separate).
fn dedup_overlaps(spans: Vec<ActionSpan>, ontology: &Ontology) -> Vec<ActionSpan> {
    let object = |s: &ActionSpan| ontology.actions[&s.class].object.clone();
    let mut out: Vec<ActionSpan> = Vec::with_capacity(spans.len());
    for s in spans {
        let clash = out.iter().any(|o| {
            (o.class == s.class && s.start <= o.end && o.start <= s.end)
                || (object(o).is_some()
                    && object(o) == object(&s)
                    && (s.start - o.start).abs() < 0.5)
        });
        if !clash {
            out.push(s);
        }
    }
    out
}

/// `count` graphs with ids `"{prefix}{i:05}"`, generated in parallel.
pub fn synth_corpus(
    seed: u64,
    count: usize,
    prefix: &str,
    params: &SynthParams,
    ontology: &Ontology,
) -> Result<Vec<VideoGraph>> {
    (0..count)
        .into_par_iter()
        .map(|i| synth_graph(seed, &format!("{prefix}{i:05}"), params, ontology))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate;

    #[test]
    fn same_seed_same_bytes() {
        let o = Ontology::desk();
        let p = SynthParams::default();
        let a = synth_graph(1, "v", &p, &o).unwrap().to_json();
        let b = synth_graph(1, "v", &p, &o).unwrap().to_json();
        assert_eq!(a, b);
        let c = synth_graph(2, "v", &p, &o).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn small_params_validate() {
        let o = Ontology::desk();
        let p = SynthParams {
            frames: 5,
            actions: 3,
            ..SynthParams::default()
        };
        let g = synth_graph(3, "v", &p, &o).unwrap();
        assert_eq!(validate(&g), vec![]);
        assert_eq!(g.frames.len(), 5);
    }

    #[test]
    fn every_action_covers_a_frame_over_many_seeds() {
        let o = Ontology::desk();
        let p = SynthParams::default();
        for seed in 0..1000 {
            let g = synth_graph(seed, "v", &p, &o).unwrap();
            assert!(validate(&g).is_empty(), "seed {seed}: {:?}", validate(&g));
            for a in &g.actions {
                assert!(
                    g.frames.iter().any(|f| a.covers(f.timestamp)),
                    "seed {seed}: {a:?} covers no frame"
                );
            }
        }
    }

    #[test]
    fn zero_object_classes_is_infeasible() {
        let mut o = Ontology::desk();
        o.objects.clear();
        assert!(matches!(
            synth_graph(1, "v", &SynthParams::default(), &o),
            Err(Error::InfeasibleParams(_))
        ));
    }
}
