//! Cleanup passes that turn raw annotations into entailment-closed,
//! temporally consistent graphs.
//!
//! [`augment_corpus`] runs the passes in a fixed order: merge, interval
//! adjustment, entailments, spatial consistency repair, propagation,
//! entailments again, attention stripping, sparsity flagging. Running it on
//! its own output changes nothing.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{ActionSpan, ObjectInstance, VideoGraph};
use crate::ontology::{Antecedent, Ontology, RelationshipCategory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Gap in seconds left between sequenced actions.
    pub epsilon: f64,
    /// Minimum share of instances with a spatial relationship.
    pub sparsity_threshold: f64,
    /// Above/beneath majority share needed to keep a class's annotations.
    pub spatial_consistency: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            epsilon: 0.1,
            sparsity_threshold: 0.60,
            spatial_consistency: 0.95,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentReport {
    pub video_id: String,
    pub entailments_added: usize,
    pub synonyms_merged: usize,
    pub intervals_adjusted: usize,
    pub intervals_inserted: usize,
    /// Rule-matched pairs left overlapping because trimming would empty the
    /// earlier span.
    pub degenerate_pairs: Vec<(String, String)>,
    pub attention_stripped: usize,
    pub spatial_flips: usize,
    pub spatial_removed: usize,
    pub instances_propagated: usize,
    pub sparse_flagged: bool,
}

/// Canonicalize names through the merge map and fold instances that became
/// duplicates. Returns the number of renamed names.
pub fn merge_synonyms(graph: &mut VideoGraph, ontology: &Ontology) -> usize {
    let mut renamed = 0;
    let mut canon = |name: &mut String| {
        let c = ontology.canonical(name);
        if c != name {
            *name = c.to_string();
            renamed += 1;
        }
    };
    for frame in &mut graph.frames {
        for obj in &mut frame.objects {
            canon(&mut obj.class);
            let rels: Vec<String> = obj.relationships.iter().cloned().collect();
            obj.relationships.clear();
            for mut r in rels {
                canon(&mut r);
                obj.relationships.insert(r);
            }
        }
        let mut folded: Vec<ObjectInstance> = Vec::with_capacity(frame.objects.len());
        for obj in std::mem::take(&mut frame.objects) {
            match folded.iter_mut().find(|o| o.class == obj.class) {
                Some(o) => o.relationships.extend(obj.relationships),
                None => folded.push(obj),
            }
        }
        frame.objects = folded;
    }
    for a in &mut graph.actions {
        canon(&mut a.class);
    }
    graph.normalize_order();
    renamed
}

/// Close every instance's relationship set under the ontology's rules.
/// Action antecedents apply to instances of the action's object in frames
/// the action covers. Returns the number of relationships added.
pub fn apply_entailments(graph: &mut VideoGraph, ontology: &Ontology) -> usize {
    let mut rel_rules: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut action_rules: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &ontology.entailments {
        let (table, key) = match &e.antecedent {
            Antecedent::Relationship(r) => (&mut rel_rules, r.as_str()),
            Antecedent::Action(a) => (&mut action_rules, a.as_str()),
        };
        table
            .entry(key)
            .or_default()
            .extend(e.consequents.iter().map(String::as_str));
    }

    let mut added = 0;
    for a in &graph.actions {
        let Some(consequents) = action_rules.get(a.class.as_str()) else {
            continue;
        };
        let Some(object) = ontology
            .actions
            .get(&a.class)
            .and_then(|c| c.object.as_ref())
        else {
            continue;
        };
        for frame in graph.frames.iter_mut().filter(|f| a.covers(f.timestamp)) {
            if let Some(inst) = frame.objects.iter_mut().find(|o| &o.class == object) {
                for c in consequents {
                    if inst.relationships.insert(c.to_string()) {
                        added += 1;
                    }
                }
            }
        }
    }
    for frame in &mut graph.frames {
        for inst in &mut frame.objects {
            loop {
                let new: Vec<String> = inst
                    .relationships
                    .iter()
                    .filter_map(|r| rel_rules.get(r.as_str()))
                    .flatten()
                    .filter(|c| !inst.relationships.contains(**c))
                    .map(|c| c.to_string())
                    .collect();
                if new.is_empty() {
                    break;
                }
                for c in new {
                    if inst.relationships.insert(c) {
                        added += 1;
                    }
                }
            }
        }
    }
    added
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct IntervalOutcome {
    pub adjusted: usize,
    pub inserted: usize,
    pub degenerate: Vec<(String, String)>,
}

/// Trim earlier-family spans so they end `epsilon` before the matched
/// later-family span over the same object starts, and insert a short
/// earlier-family span in front of later-family spans that have none when
/// the rule asks for it.
///
/// A pair matches a rule when both spans concern the same object, the
/// earlier-family span starts first, and it has not ended by the time the
/// later one starts.
pub fn adjust_action_intervals(
    graph: &mut VideoGraph,
    ontology: &Ontology,
    epsilon: f64,
) -> IntervalOutcome {
    let mut outcome = IntervalOutcome::default();
    let family = |span: &ActionSpan| -> Option<(String, String)> {
        let class = ontology.actions.get(&span.class)?;
        Some((class.verb.clone(), class.object.clone()?))
    };

    let mut inserted = Vec::new();
    for rule in ontology.sequence_rules.iter().filter(|r| r.infer_missing) {
        for later in &graph.actions {
            let Some((verb, object)) = family(later) else {
                continue;
            };
            if verb != rule.later || later.start < 2.0 * epsilon {
                continue;
            }
            let preceded = graph.actions.iter().chain(&inserted).any(|e: &ActionSpan| {
                family(e) == Some((rule.earlier.clone(), object.clone())) && e.start < later.start
            });
            if preceded {
                continue;
            }
            if let Some(earlier) = ontology.action_for(&rule.earlier, &object) {
                inserted.push(ActionSpan::new(
                    earlier.name.clone(),
                    later.start - 2.0 * epsilon,
                    later.start - epsilon,
                ));
            }
        }
    }
    outcome.inserted = inserted.len();
    graph.actions.extend(inserted);

    let families: Vec<Option<(String, String)>> = graph.actions.iter().map(family).collect();
    let mut new_ends: Vec<f64> = graph.actions.iter().map(|a| a.end).collect();
    for (i, e) in graph.actions.iter().enumerate() {
        let Some((e_verb, e_obj)) = &families[i] else {
            continue;
        };
        let mut cut: Option<f64> = None;
        let mut degenerate = None;
        for (j, l) in graph.actions.iter().enumerate() {
            let Some((l_verb, l_obj)) = &families[j] else {
                continue;
            };
            let ruled = ontology
                .sequence_rules
                .iter()
                .any(|r| &r.earlier == e_verb && &r.later == l_verb);
            if !ruled || l_obj != e_obj || !(e.start < l.start && l.start <= e.end) {
                continue;
            }
            if l.start - epsilon <= e.start {
                degenerate = Some((e.class.clone(), l.class.clone()));
            }
            cut = Some(cut.map_or(l.start, |c: f64| c.min(l.start)));
        }
        if let Some(pair) = degenerate {
            outcome.degenerate.push(pair);
        } else if let Some(c) = cut {
            new_ends[i] = c - epsilon;
            outcome.adjusted += 1;
        }
    }
    for (a, end) in graph.actions.iter_mut().zip(new_ends) {
        a.end = end;
    }
    graph.normalize_order();
    outcome
}

/// Rule-matched pairs that still overlap, as `(earlier, later)` class names.
pub fn overlapping_rule_pairs(graph: &VideoGraph, ontology: &Ontology) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for e in &graph.actions {
        for l in &graph.actions {
            let (Some(ec), Some(lc)) = (
                ontology.actions.get(&e.class),
                ontology.actions.get(&l.class),
            ) else {
                continue;
            };
            let ruled = ontology
                .sequence_rules
                .iter()
                .any(|r| r.earlier == ec.verb && r.later == lc.verb);
            if ruled
                && ec.object.is_some()
                && ec.object == lc.object
                && e.start < l.start
                && l.start <= e.end
            {
                out.push((e.class.clone(), l.class.clone()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpatialOutcome {
    pub flips: BTreeMap<String, usize>,
    pub removed: BTreeMap<String, usize>,
}

/// Per object class, count above/beneath annotations across the corpus.
/// Classes whose majority direction exceeds `consistency` have the minority
/// flipped; the rest lose both relationships.
pub fn repair_spatial_consistency(corpus: &mut [VideoGraph], consistency: f64) -> SpatialOutcome {
    let counts = corpus
        .par_iter()
        .map(|g| {
            let mut c: BTreeMap<String, (usize, usize)> = BTreeMap::new();
            for inst in g.frames.iter().flat_map(|f| &f.objects) {
                let e = c.entry(inst.class.clone()).or_default();
                e.0 += inst.relationships.contains("above") as usize;
                e.1 += inst.relationships.contains("beneath") as usize;
            }
            c
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, (x, y)) in b {
                let e = a.entry(k).or_default();
                e.0 += x;
                e.1 += y;
            }
            a
        });

    // class → Some(majority) to flip toward, None to remove both
    let mut decisions: BTreeMap<String, Option<&'static str>> = BTreeMap::new();
    for (class, (above, beneath)) in counts {
        if above == 0 || beneath == 0 {
            continue;
        }
        let share = above.max(beneath) as f64 / (above + beneath) as f64;
        let decision = if share > consistency {
            Some(if above >= beneath { "above" } else { "beneath" })
        } else {
            None
        };
        decisions.insert(class, decision);
    }

    let per_video: Vec<SpatialOutcome> = corpus
        .par_iter_mut()
        .map(|g| {
            let mut out = SpatialOutcome::default();
            for inst in g.frames.iter_mut().flat_map(|f| &mut f.objects) {
                let Some(decision) = decisions.get(&inst.class) else {
                    continue;
                };
                match decision {
                    Some(majority) => {
                        let minority = if *majority == "above" {
                            "beneath"
                        } else {
                            "above"
                        };
                        if inst.relationships.remove(minority) {
                            inst.relationships.insert(majority.to_string());
                            *out.flips.entry(g.video_id.clone()).or_default() += 1;
                        }
                    }
                    None => {
                        let n = inst.relationships.remove("above") as usize
                            + inst.relationships.remove("beneath") as usize;
                        if n > 0 {
                            *out.removed.entry(g.video_id.clone()).or_default() += n;
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut total = SpatialOutcome::default();
    for o in per_video {
        total.flips.extend(o.flips);
        total.removed.extend(o.removed);
    }
    total
}

/// Copy object instances seen in some frame of an action span into the
/// span's frames that lack them, keeping only contact relationships taken
/// from the nearest annotated frame. Repeats until nothing changes.
pub fn propagate_annotations(graph: &mut VideoGraph, ontology: &Ontology) -> usize {
    let mut copied = 0;
    loop {
        let mut additions: Vec<(usize, ObjectInstance)> = Vec::new();
        for span in &graph.actions {
            let covered = graph.frames_covered(span);
            let classes: BTreeSet<&str> = covered
                .iter()
                .flat_map(|&i| graph.frames[i].objects.iter().map(|o| o.class.as_str()))
                .collect();
            for class in classes {
                for &i in &covered {
                    if graph.frames[i].object(class).is_some()
                        || additions.iter().any(|(f, o)| *f == i && o.class == class)
                    {
                        continue;
                    }
                    let source = covered
                        .iter()
                        .filter_map(|&j| graph.frames[j].object(class).map(|o| (j, o)))
                        .min_by(|(a, _), (b, _)| {
                            let da = (graph.frames[*a].timestamp - graph.frames[i].timestamp).abs();
                            let db = (graph.frames[*b].timestamp - graph.frames[i].timestamp).abs();
                            da.total_cmp(&db).then(a.cmp(b))
                        })
                        .map(|(_, o)| o)
                        .expect("class observed in a covered frame");
                    let relationships = source
                        .relationships
                        .iter()
                        .filter(|r| ontology.category(r) == Some(RelationshipCategory::Contact))
                        .cloned()
                        .collect();
                    additions.push((
                        i,
                        ObjectInstance {
                            class: class.to_string(),
                            bbox: None,
                            relationships,
                        },
                    ));
                }
            }
        }
        if additions.is_empty() {
            break;
        }
        copied += additions.len();
        for (i, inst) in additions {
            graph.frames[i].objects.push(inst);
        }
        graph.normalize_order();
    }
    copied
}

/// Remove attention relationships. Returns the number removed.
pub fn strip_attention(graph: &mut VideoGraph, ontology: &Ontology) -> usize {
    let attention: BTreeSet<&str> = ontology.attention_relationships().collect();
    let mut removed = 0;
    for inst in graph.frames.iter_mut().flat_map(|f| &mut f.objects) {
        let before = inst.relationships.len();
        inst.relationships
            .retain(|r| !attention.contains(r.as_str()));
        removed += before - inst.relationships.len();
    }
    removed
}

/// Set `sparse_spatial` when fewer than `threshold` of the instances carry a
/// spatial relationship. A graph with no instances counts as sparse.
pub fn flag_sparsity(graph: &mut VideoGraph, ontology: &Ontology, threshold: f64) -> bool {
    let total = graph.instance_count();
    let with_spatial = graph
        .frames
        .iter()
        .flat_map(|f| &f.objects)
        .filter(|o| o.relationships.iter().any(|r| ontology.is_spatial(r)))
        .count();
    graph.sparse_spatial = total == 0 || (with_spatial as f64) < threshold * total as f64;
    graph.sparse_spatial
}

/// The full pass sequence over a corpus.
pub fn augment_corpus(
    corpus: &mut [VideoGraph],
    ontology: &Ontology,
    config: &AugmentConfig,
) -> Vec<AugmentReport> {
    let mut reports: Vec<AugmentReport> = corpus
        .par_iter_mut()
        .map(|g| {
            let mut r = AugmentReport {
                video_id: g.video_id.clone(),
                ..AugmentReport::default()
            };
            r.synonyms_merged = merge_synonyms(g, ontology);
            let iv = adjust_action_intervals(g, ontology, config.epsilon);
            r.intervals_adjusted = iv.adjusted;
            r.intervals_inserted = iv.inserted;
            r.degenerate_pairs = iv.degenerate;
            r.entailments_added = apply_entailments(g, ontology);
            r
        })
        .collect();

    let spatial = repair_spatial_consistency(corpus, config.spatial_consistency);

    corpus
        .par_iter_mut()
        .zip(reports.par_iter_mut())
        .for_each(|(g, r)| {
            r.spatial_flips = spatial.flips.get(&g.video_id).copied().unwrap_or(0);
            r.spatial_removed = spatial.removed.get(&g.video_id).copied().unwrap_or(0);
            r.instances_propagated = propagate_annotations(g, ontology);
            r.entailments_added += apply_entailments(g, ontology);
            r.attention_stripped = strip_attention(g, ontology);
            r.sparse_flagged = flag_sparsity(g, ontology, config.sparsity_threshold);
        });
    reports
}
