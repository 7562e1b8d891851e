//! Candidate enumeration, quality filtering and corpus generation.
//!
//! Generation runs in two phases: corpus statistics are gathered over the
//! augmented graphs first and then frozen, after which every video is
//! processed independently (in parallel) against them.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::VideoGraph;
use crate::ontology::{Ontology, RelationshipCategory};
use crate::program::{evaluate, Attr, EvalResult, Item, Step, Value};
use crate::templates::{
    AnswerType, Concept, Draft, IndirectRef, QuestionRecord, Registry, Rejected, SlotKind,
    Template, TimeWord, Which, ANCHOR,
};
use crate::util::{hex_sha256, rng_for};

/// Pairs seen in fewer videos than this are not asked about.
pub const RARE_PAIR_MIN: usize = 10;
/// Minimum gap, in seconds, between durations that a question compares.
pub const DURATION_MARGIN: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    pub seed: u64,
    /// Candidates kept per video after seeded subsampling.
    pub cap: usize,
    /// Absent actions asked about per video in existence questions.
    pub decoys: usize,
    pub localize: bool,
    pub indirect: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            seed: 0,
            cap: 10_000,
            decoys: 5,
            localize: true,
            indirect: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Grammar,
    ConfusingRelationship,
    SimilarObjects,
    AnswerInQuestion,
    UnrealisticDecoy,
    DurationMargin,
    Blacklist,
    RarePair,
    SingleGlobalAnswer,
    MultipleAnswers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub qid: String,
    pub video_id: String,
    pub template_id: String,
    pub reason: Reason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// object → relationship → number of videos in which the pair occurs.
    pub pair_counts: BTreeMap<String, BTreeMap<String, usize>>,
    /// relationship → every object it occurs with anywhere in the corpus.
    pub relationship_objects: BTreeMap<String, BTreeSet<String>>,
    /// Relationships that only ever occur with one object.
    pub single_answer_relationships: BTreeSet<String>,
}

impl CorpusStats {
    pub fn collect(corpus: &[VideoGraph]) -> CorpusStats {
        let per_video: Vec<BTreeSet<(String, String)>> = corpus
            .par_iter()
            .map(|g| {
                g.frames
                    .iter()
                    .flat_map(|f| f.objects.iter())
                    .flat_map(|o| {
                        o.relationships
                            .iter()
                            .map(move |r| (o.class.clone(), r.clone()))
                    })
                    .collect()
            })
            .collect();
        let mut stats = CorpusStats::default();
        for pairs in per_video {
            for (o, r) in pairs {
                *stats
                    .pair_counts
                    .entry(o.clone())
                    .or_default()
                    .entry(r.clone())
                    .or_default() += 1;
                stats.relationship_objects.entry(r).or_default().insert(o);
            }
        }
        stats.single_answer_relationships = stats
            .relationship_objects
            .iter()
            .filter(|(_, objs)| objs.len() == 1)
            .map(|(r, _)| r.clone())
            .collect();
        stats
    }

    pub fn pair_count(&self, object: &str, relationship: &str) -> usize {
        self.pair_counts
            .get(object)
            .and_then(|m| m.get(relationship))
            .copied()
            .unwrap_or(0)
    }
}

/// Vocabulary that candidates draw from. Existence and choice questions may
/// name things the video lacks (that is how "no" answers and second options
/// arise); everything else is bound to what the video contains.
struct Pools {
    objects: Vec<String>,
    relationships: Vec<String>,
    all_objects: Vec<String>,
    all_relationships: Vec<String>,
    actions: Vec<String>,
    decoys: Vec<String>,
}

fn askable(ontology: &Ontology, graph: &VideoGraph, r: &str) -> bool {
    match ontology.category(r) {
        Some(RelationshipCategory::Spatial) => !graph.sparse_spatial,
        Some(RelationshipCategory::Attention) | None => false,
        _ => true,
    }
}

fn pools(graph: &VideoGraph, ontology: &Ontology, cfg: &GenerateConfig) -> Pools {
    let objects: Vec<String> = graph
        .object_classes()
        .into_iter()
        .map(String::from)
        .collect();
    let relationships: BTreeSet<String> = graph
        .frames
        .iter()
        .flat_map(|f| f.objects.iter().flat_map(|o| o.relationships.iter()))
        .filter(|r| askable(ontology, graph, r))
        .cloned()
        .collect();
    let all_relationships = ontology
        .relationships
        .keys()
        .filter(|r| askable(ontology, graph, r))
        .cloned()
        .collect();
    let actions: Vec<String> = graph
        .action_classes()
        .into_iter()
        .map(String::from)
        .collect();
    let present: Vec<_> = actions
        .iter()
        .filter_map(|a| ontology.actions.get(a))
        .collect();
    let related: Vec<String> = ontology
        .actions
        .values()
        .filter(|a| !actions.contains(&a.name))
        .filter(|a| present.iter().any(|p| shares_verb_or_object(p, a)))
        .map(|a| a.name.clone())
        .collect();
    let mut rng = rng_for(cfg.seed, "decoys", &graph.video_id);
    let mut decoys: Vec<String> = related
        .choose_multiple(&mut rng, cfg.decoys)
        .cloned()
        .collect();
    decoys.sort();
    Pools {
        objects,
        relationships: relationships.into_iter().collect(),
        all_objects: ontology.objects.iter().cloned().collect(),
        all_relationships,
        actions,
        decoys,
    }
}

fn shares_verb_or_object(
    a: &crate::ontology::ActionClass,
    b: &crate::ontology::ActionClass,
) -> bool {
    a.verb == b.verb || (a.object.is_some() && a.object == b.object)
}

/// Candidates for `graph`: kind-correct bindings of every template, each
/// optionally localized by a before/after/while phrase. When the space is
/// larger than `cfg.cap` the budget is water-filled across templates (so
/// templates with few bindings keep all of theirs) and each template's share
/// is a seeded sample. Each kept candidate is followed by one indirect
/// reference variant, drawn from those that resolve, when any exist.
pub fn enumerate_candidates(
    graph: &VideoGraph,
    registry: &Registry,
    ontology: &Ontology,
    cfg: &GenerateConfig,
) -> Vec<Draft> {
    // Nothing annotated: not even "no" answers can be trusted.
    if graph.frames.is_empty() && graph.actions.is_empty() {
        return Vec::new();
    }
    let p = pools(graph, ontology, cfg);
    let mut localizations = vec![None];
    if cfg.localize {
        for a in &p.actions {
            for w in [TimeWord::Before, TimeWord::After, TimeWord::While] {
                localizations.push(Some((w, a.as_str())));
            }
        }
    }
    let mut rng = rng_for(cfg.seed, "order", &graph.video_id);
    let spaces: Vec<(&Template, Vec<BTreeMap<String, String>>, usize)> = registry
        .templates
        .iter()
        .map(|t| {
            let b = bindings_for(t, &p, &mut rng);
            let variants = if t.allows_localization {
                localizations.len()
            } else {
                1
            };
            (t, b, variants)
        })
        .collect();
    let sizes: Vec<usize> = spaces.iter().map(|(_, b, v)| b.len() * v).collect();
    let quotas = water_fill(&sizes, cfg.cap);
    let refs = cfg.indirect.then(|| Resolver::new(graph, ontology, &p));
    let mut drafts = Vec::new();
    for ((t, bindings, variants), (size, quota)) in
        spaces.into_iter().zip(sizes.into_iter().zip(quotas))
    {
        let picks: Vec<usize> = if quota >= size {
            (0..size).collect()
        } else {
            let mut rng = rng_for(cfg.seed, "cap", &format!("{}/{}", graph.video_id, t.id));
            let mut v = sample(&mut rng, size, quota).into_vec();
            v.sort_unstable();
            v
        };
        for i in picks {
            let direct = Draft::new(t, &graph.video_id, bindings[i / variants].clone());
            let draft = match localizations[i % variants] {
                None => direct,
                Some((w, a)) => match direct.localize(t, w, a, graph) {
                    Ok(d) => d,
                    Err(_) => continue,
                },
            };
            let variant = refs.as_ref().and_then(|r| {
                let all = with_references(t, &draft, r, graph, ontology);
                let mut rng = rng_for(cfg.seed, "reference", &draft.qid());
                all.choose(&mut rng).cloned()
            });
            drafts.push(draft);
            drafts.extend(variant);
        }
    }
    drafts
}

/// Splits `budget` over groups of the given sizes: every group gets an equal
/// share, capped at its size, with leftovers handed to the groups that can
/// still take more. Earlier groups take the remainder of an uneven split.
pub fn water_fill(sizes: &[usize], budget: usize) -> Vec<usize> {
    let mut quota = vec![0; sizes.len()];
    let mut left = budget.min(sizes.iter().sum());
    while left > 0 {
        let open: Vec<usize> = (0..sizes.len()).filter(|&i| quota[i] < sizes[i]).collect();
        let share = left / open.len();
        if share == 0 {
            for &i in open.iter().take(left) {
                quota[i] += 1;
            }
            break;
        }
        for &i in &open {
            let add = share.min(sizes[i] - quota[i]);
            quota[i] += add;
            left -= add;
        }
    }
    quota
}

fn bindings_for(
    t: &Template,
    p: &Pools,
    rng: &mut impl rand::Rng,
) -> Vec<BTreeMap<String, String>> {
    let mut out: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    let pairs_unordered = t
        .slots
        .iter()
        .filter(|s| s.kind == SlotKind::Object)
        .count()
        == 2;
    // An absent object still leaves a binary question answerable unless the
    // question also needs an action's timing; an absent relationship only
    // keeps existence questions answerable.
    let wide_objects =
        t.answer_type() == AnswerType::Binary && t.slots.iter().all(|s| s.kind != SlotKind::Action);
    let wide_relationships = t.reasoning.iter().any(|r| r == "exists");
    for slot in &t.slots {
        let pool: Vec<String> = match slot.kind {
            SlotKind::Object if wide_objects => p.all_objects.clone(),
            SlotKind::Object => p.objects.clone(),
            SlotKind::Relationship if wide_relationships => p.all_relationships.clone(),
            SlotKind::Relationship => p.relationships.clone(),
            SlotKind::Action if t.id == "actExists" => {
                p.actions.iter().chain(&p.decoys).cloned().collect()
            }
            SlotKind::Action => p.actions.clone(),
        };
        let mut next = Vec::new();
        for b in &out {
            for v in &pool {
                if b.values().any(|x| x == v) {
                    continue;
                }
                // Object pairs are unordered: keep one order per pair.
                if pairs_unordered && slot.name == "obj2" && b.get("obj1").is_some_and(|o1| o1 > v)
                {
                    continue;
                }
                let mut nb = b.clone();
                nb.insert(slot.name.clone(), v.clone());
                next.push(nb);
            }
        }
        out = next;
    }
    // Which option is printed first is decided by a coin, not by name order.
    if pairs_unordered && !t.options.is_empty() {
        for b in &mut out {
            if rng.random_bool(0.5) {
                let (o1, o2) = (b["obj1"].clone(), b["obj2"].clone());
                b.insert("obj1".into(), o2);
                b.insert("obj2".into(), o1);
            }
        }
    }
    out
}

/// References that resolve uniquely in one video, indexed by the concept
/// they resolve to.
struct Resolver {
    by_object: BTreeMap<String, Vec<IndirectRef>>,
    by_relationship: BTreeMap<String, Vec<IndirectRef>>,
    by_action: BTreeMap<String, Vec<IndirectRef>>,
}

impl Resolver {
    fn new(graph: &VideoGraph, ontology: &Ontology, p: &Pools) -> Resolver {
        let mut r = Resolver {
            by_object: BTreeMap::new(),
            by_relationship: BTreeMap::new(),
            by_action: BTreeMap::new(),
        };
        let mut candidates = Vec::new();
        for rel in &p.relationships {
            if ontology.confusing.contains(rel) {
                continue;
            }
            for which in [Which::Any, Which::First, Which::Last] {
                candidates.push(IndirectRef::Object {
                    relationship: rel.clone(),
                    which,
                });
            }
        }
        for obj in &p.objects {
            candidates.push(IndirectRef::Relationship {
                object: obj.clone(),
            });
        }
        for which in [Which::First, Which::Last, Which::Longest, Which::Shortest] {
            candidates.push(IndirectRef::Action { which });
        }
        for c in candidates {
            if let EvalResult::Answer(Value::Item(item)) =
                evaluate(&c.sub_program(), graph, ontology)
            {
                let (map, name) = match item {
                    Item::Object(n) => (&mut r.by_object, n),
                    Item::Relationship(n) => (&mut r.by_relationship, n),
                    Item::Action(n) => (&mut r.by_action, n),
                    Item::Frame(_) => continue,
                };
                map.entry(name).or_default().push(c);
            }
        }
        r
    }

    fn resolving_to(&self, kind: SlotKind, name: &str) -> &[IndirectRef] {
        let map = match kind {
            SlotKind::Object => &self.by_object,
            SlotKind::Relationship => &self.by_relationship,
            SlotKind::Action => &self.by_action,
        };
        map.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn with_references(
    t: &Template,
    d: &Draft,
    refs: &Resolver,
    graph: &VideoGraph,
    ontology: &Ontology,
) -> Vec<Draft> {
    let mut targets: Vec<(String, SlotKind, String)> = t
        .slots
        .iter()
        .filter(|s| !t.options.contains(&s.name))
        .map(|s| (s.name.clone(), s.kind, d.bindings[&s.name].clone()))
        .collect();
    if let Some((_, anchor)) = &d.localization {
        targets.push((ANCHOR.to_string(), SlotKind::Action, anchor.clone()));
    }
    let mut out = Vec::new();
    for (slot, kind, name) in targets {
        for r in refs.resolving_to(kind, &name) {
            if let Ok(nd) = d.refer(t, &slot, r, graph, ontology) {
                out.push(nd);
            }
        }
    }
    out
}

/// The first failing quality check, in the fixed order of [`Reason`].
pub fn quality_filter(
    record: &QuestionRecord,
    graph: &VideoGraph,
    stats: &CorpusStats,
    ontology: &Ontology,
) -> Result<(), Reason> {
    let concepts: Vec<Concept> = record.concepts().into_iter().map(|(_, c)| c).collect();
    let objects: BTreeSet<&str> = concepts
        .iter()
        .filter_map(|c| match c {
            Concept::Object(n) => Some(n.as_str()),
            _ => None,
        })
        .collect();
    let relationships: BTreeSet<&str> = concepts
        .iter()
        .filter_map(|c| match c {
            Concept::Relationship(n) => Some(n.as_str()),
            _ => None,
        })
        .collect();
    let actions: BTreeSet<&str> = concepts
        .iter()
        .filter_map(|c| match c {
            Concept::Action(n) => Some(n.as_str()),
            _ => None,
        })
        .collect();
    let answer_is_object =
        record.answer_type == AnswerType::Open && ontology.objects.contains(&record.answer);

    if !grammatical(&record.text) {
        return Err(Reason::Grammar);
    }
    if relationships.iter().any(|r| {
        ontology.confusing.contains(*r)
            || ontology.category(r) == Some(RelationshipCategory::Attention)
    }) {
        return Err(Reason::ConfusingRelationship);
    }
    let mut mentioned: BTreeSet<&str> = objects.clone();
    if answer_is_object {
        mentioned.insert(record.answer.as_str());
    }
    if ontology
        .similar_pairs
        .iter()
        .any(|(a, b)| mentioned.contains(a.as_str()) && mentioned.contains(b.as_str()))
    {
        return Err(Reason::SimilarObjects);
    }
    if record.answer_type == AnswerType::Open && contains_phrase(&record.text, &record.answer) {
        return Err(Reason::AnswerInQuestion);
    }
    if !realistic(graph, ontology, &actions) {
        return Err(Reason::UnrealisticDecoy);
    }
    if !duration_margins_hold(&record.program, graph, ontology) {
        return Err(Reason::DurationMargin);
    }
    let mut pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for r in &relationships {
        for o in &objects {
            pairs.insert((o, r));
        }
        if answer_is_object {
            pairs.insert((record.answer.as_str(), r));
        }
    }
    if pairs
        .iter()
        .any(|(o, r)| ontology.blacklist.contains(&(o.to_string(), r.to_string())))
    {
        return Err(Reason::Blacklist);
    }
    if pairs
        .iter()
        .any(|(o, r)| stats.pair_count(o, r) < RARE_PAIR_MIN)
    {
        return Err(Reason::RarePair);
    }
    if answer_is_object
        && relationships
            .iter()
            .any(|r| stats.single_answer_relationships.contains(*r))
    {
        return Err(Reason::SingleGlobalAnswer);
    }
    Ok(())
}

/// Surface checks: capitalized, one trailing question mark, every hole
/// filled, no doubled spaces, and a/an agreeing with the next word.
fn grammatical(text: &str) -> bool {
    if !text.starts_with(|c: char| c.is_ascii_uppercase()) || !text.ends_with('?') {
        return false;
    }
    if text.matches('?').count() != 1
        || text.contains(['{', '}', '$'])
        || text.contains("  ")
        || text != text.trim()
    {
        return false;
    }
    let words: Vec<&str> = text.split_whitespace().collect();
    for w in words.windows(2) {
        let next = w[1].trim_matches(|c: char| !c.is_alphanumeric());
        let vowel = next.starts_with(['a', 'e', 'i', 'o', 'u']);
        let exception = [
            "one",
            "uniform",
            "university",
            "user",
            "utensil",
            "hour",
            "honest",
        ]
        .contains(&next);
        match w[0] {
            "a" if vowel != exception => return false,
            "an" if vowel == exception => return false,
            _ => {}
        }
    }
    true
}

pub(crate) fn contains_phrase(text: &str, phrase: &str) -> bool {
    let text = text.to_lowercase();
    let phrase = phrase.to_lowercase();
    text.match_indices(&phrase).any(|(i, _)| {
        let before = text[..i].chars().last();
        let after = text[i + phrase.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

/// An action asked about must occur in the video or share its verb or
/// object with one that does.
fn realistic(graph: &VideoGraph, ontology: &Ontology, actions: &BTreeSet<&str>) -> bool {
    let present = graph.action_classes();
    actions.iter().all(|a| {
        if present.contains(a) {
            return true;
        }
        let Some(class) = ontology.actions.get(*a) else {
            return false;
        };
        present
            .iter()
            .filter_map(|p| ontology.actions.get(*p))
            .any(|p| shares_verb_or_object(p, class))
    })
}

/// Every duration comparison in the program separates its operands by more
/// than [`DURATION_MARGIN`]; every duration superlative's winner is at least
/// that far from each other candidate.
fn duration_margins_hold(program: &Step, graph: &VideoGraph, ontology: &Ontology) -> bool {
    let duration = |s: &Step| -> Option<f64> {
        let q = Step::Query {
            input: Box::new(s.clone()),
            attr: Attr::Duration,
        };
        match evaluate(&q, graph, ontology) {
            EvalResult::Answer(Value::Scalar(x)) => Some(x),
            _ => None,
        }
    };
    let mut ok = true;
    program.walk(&mut |s| match s {
        Step::Comparative {
            a,
            b,
            attr: Attr::Duration,
            ..
        } => match (duration(a), duration(b)) {
            (Some(x), Some(y)) => ok &= (x - y).abs() > DURATION_MARGIN,
            _ => ok = false,
        },
        Step::Superlative {
            items,
            attr: Attr::Duration,
            ..
        } => match (
            evaluate(items, graph, ontology),
            evaluate(s, graph, ontology),
        ) {
            (
                EvalResult::Answer(Value::Items(all)),
                EvalResult::Answer(Value::Item(Item::Action(win))),
            ) => {
                let w = duration(&Step::Action(win.clone()));
                for other in all {
                    if let Item::Action(n) = other {
                        if n != win {
                            match (w, duration(&Step::Action(n))) {
                                (Some(x), Some(y)) => ok &= (x - y).abs() >= DURATION_MARGIN,
                                _ => ok = false,
                            }
                        }
                    }
                }
            }
            _ => ok = false,
        },
        _ => {}
    });
    ok
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_hash: String,
    pub videos: usize,
    pub candidates: usize,
    pub undefined: usize,
    pub questions: usize,
    pub per_template: BTreeMap<String, usize>,
    pub per_structure: BTreeMap<String, usize>,
    pub per_reasoning: BTreeMap<String, usize>,
    pub rejections: BTreeMap<String, usize>,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub records: Vec<QuestionRecord>,
    pub rejections: Vec<Rejection>,
    pub manifest: Manifest,
}

struct VideoOutput {
    records: Vec<QuestionRecord>,
    rejections: Vec<Rejection>,
    candidates: usize,
    undefined: usize,
}

pub fn config_hash(cfg: &impl Serialize) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    hex_sha256(text.as_bytes())[..16].to_string()
}

/// The unbalanced question corpus for an augmented set of graphs.
pub fn generate_corpus(
    corpus: &[VideoGraph],
    registry: &Registry,
    ontology: &Ontology,
    cfg: &GenerateConfig,
) -> Generated {
    let stats = CorpusStats::collect(corpus);
    let outputs: Vec<VideoOutput> = corpus
        .par_iter()
        .map(|g| generate_video(g, registry, ontology, cfg, &stats))
        .collect();

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let (mut candidates, mut undefined) = (0, 0);
    for o in outputs {
        records.extend(o.records);
        rejections.extend(o.rejections);
        candidates += o.candidates;
        undefined += o.undefined;
    }
    let mut manifest = Manifest {
        seed: cfg.seed,
        config_hash: config_hash(cfg),
        videos: corpus.len(),
        candidates,
        undefined,
        questions: records.len(),
        per_template: BTreeMap::new(),
        per_structure: BTreeMap::new(),
        per_reasoning: BTreeMap::new(),
        rejections: BTreeMap::new(),
        stats,
    };
    for r in &records {
        *manifest
            .per_template
            .entry(r.template_id.clone())
            .or_default() += 1;
        *manifest
            .per_structure
            .entry(r.structure.name().to_string())
            .or_default() += 1;
        for t in &r.reasoning {
            *manifest.per_reasoning.entry(t.clone()).or_default() += 1;
        }
    }
    for r in &rejections {
        let key = serde_json::to_value(r.reason).expect("reason serializes");
        *manifest
            .rejections
            .entry(key.as_str().unwrap_or_default().to_string())
            .or_default() += 1;
    }
    Generated {
        records,
        rejections,
        manifest,
    }
}

fn generate_video(
    graph: &VideoGraph,
    registry: &Registry,
    ontology: &Ontology,
    cfg: &GenerateConfig,
    stats: &CorpusStats,
) -> VideoOutput {
    let drafts = enumerate_candidates(graph, registry, ontology, cfg);
    let mut out = VideoOutput {
        records: Vec::new(),
        rejections: Vec::new(),
        candidates: drafts.len(),
        undefined: 0,
    };
    let mut seen = BTreeSet::new();
    for d in drafts {
        let qid = d.qid();
        if !seen.insert(qid.clone()) {
            continue;
        }
        let reject = |reason| Rejection {
            qid: qid.clone(),
            video_id: graph.video_id.clone(),
            template_id: d.template_id.clone(),
            reason,
        };
        match d.realize(registry, graph, ontology, cfg.seed) {
            Ok(rec) => match quality_filter(&rec, graph, stats, ontology) {
                Ok(()) => out.records.push(rec),
                Err(reason) => out.rejections.push(reject(reason)),
            },
            Err(Rejected::Ambiguous(_)) => out.rejections.push(reject(Reason::MultipleAnswers)),
            Err(_) => out.undefined += 1,
        }
    }
    out
}

/// One JSON document per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for i in items {
        out.push_str(&serde_json::to_string(i).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> crate::Result<Vec<T>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| crate::Error::parse(format!("{origin}:{}", i + 1), e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_checks() {
        assert!(grammatical("Did they contact a bottle?"));
        assert!(!grammatical("did they contact a bottle?"));
        assert!(!grammatical("Did they contact a apple?"));
        assert!(!grammatical("Did they contact {obj}?"));
        assert!(!grammatical("Did they contact an bottle?"));
    }

    #[test]
    fn phrase_match_respects_word_edges() {
        assert!(contains_phrase(
            "What were they twisting while twisting a blanket?",
            "blanket"
        ));
        assert!(!contains_phrase(
            "What did they hold after taking a doorknob?",
            "door"
        ));
    }

    #[test]
    fn water_fill_respects_sizes() {
        assert_eq!(water_fill(&[2, 100, 100], 50), vec![2, 24, 24]);
        assert_eq!(water_fill(&[5, 5], 50), vec![5, 5]);
        assert_eq!(water_fill(&[10, 10, 10], 10), vec![4, 3, 3]);
    }
}
