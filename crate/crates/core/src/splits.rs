//! Generalization splits: novel compositions, indirect references and more
//! compositional steps, all on top of a fixed train/test video partition.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::generator::contains_phrase;
use crate::program::{Attr, Direction, Role, Step};
use crate::templates::{AnswerType, QuestionRecord, RefKind, TimeWord};
use crate::util::stable_hash;

/// Share of videos in the training partition (7,787 of 9,601 graphs).
pub const TRAIN_FRACTION: f64 = 7787.0 / 9601.0;
pub const DEFAULT_M: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitKind {
    NovelComposition,
    IndirectReference,
    MoreSteps,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::NovelComposition => "novel-composition",
            SplitKind::IndirectReference => "indirect-reference",
            SplitKind::MoreSteps => "more-steps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Last,
}

/// A concept pair that only ever appears at test time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "category", rename_all = "kebab-case")]
pub enum HeldOutPair {
    Sequencing {
        time: TimeWord,
        action: String,
    },
    Superlative {
        extremum: Order,
        relationship: String,
    },
    Duration {
        action: String,
    },
    ObjRel {
        object: String,
        relationship: String,
    },
}

impl HeldOutPair {
    pub fn label(&self) -> String {
        match self {
            HeldOutPair::Sequencing { time, action } => format!("{}-{action}", time.word()),
            HeldOutPair::Superlative {
                extremum,
                relationship,
            } => {
                let e = match extremum {
                    Order::First => "first",
                    Order::Last => "last",
                };
                format!("{e}-{relationship}")
            }
            HeldOutPair::Duration { action } => format!("length-{action}"),
            HeldOutPair::ObjRel {
                object,
                relationship,
            } => format!("{object}-{relationship}"),
        }
    }
}

/// The stock held-out lists, keyed to the bundled ontology.
pub fn default_heldout() -> Vec<HeldOutPair> {
    let actions = [
        "standing up",
        "walking through a doorway",
        "playing with a phone",
        "opening a laptop",
        "grasping a doorknob",
        "throwing a broom somewhere",
    ];
    let firsts = [
        "behind",
        "in",
        "leaning on",
        "carrying",
        "on the side of",
        "holding",
    ];
    let obj_rel = [
        ("table", "wiping"),
        ("dish", "wiping"),
        ("table", "beneath"),
        ("dish", "beneath"),
        ("food", "in front of"),
        ("paper", "carrying"),
        ("chair", "leaning on"),
    ];
    let mut out: Vec<HeldOutPair> = actions
        .iter()
        .map(|a| HeldOutPair::Sequencing {
            time: TimeWord::Before,
            action: a.to_string(),
        })
        .collect();
    out.extend(firsts.iter().map(|r| HeldOutPair::Superlative {
        extremum: Order::First,
        relationship: r.to_string(),
    }));
    out.extend(actions.iter().map(|a| HeldOutPair::Duration {
        action: a.to_string(),
    }));
    out.extend(obj_rel.iter().map(|(o, r)| HeldOutPair::ObjRel {
        object: o.to_string(),
        relationship: r.to_string(),
    }));
    out
}

fn default_heldout_pairs() -> Vec<HeldOutPair> {
    default_heldout()
}
fn default_m() -> usize {
    DEFAULT_M
}
fn default_fraction() -> f64 {
    TRAIN_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub kind: SplitKind,
    #[serde(default = "default_heldout_pairs")]
    pub heldout_pairs: Vec<HeldOutPair>,
    #[serde(default = "default_m")]
    pub m: usize,
    /// Explicit video assignments. Videos missing here fall back to a
    /// stable hash against `train_fraction`.
    #[serde(default)]
    pub base_video_split: BTreeMap<String, Side>,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
}

impl SplitSpec {
    pub fn new(kind: SplitKind) -> SplitSpec {
        SplitSpec {
            kind,
            heldout_pairs: default_heldout(),
            m: DEFAULT_M,
            base_video_split: BTreeMap::new(),
            train_fraction: TRAIN_FRACTION,
        }
    }

    pub fn side(&self, video_id: &str) -> Side {
        match self.base_video_split.get(video_id) {
            Some(s) => *s,
            None => hashed_side(video_id, self.train_fraction),
        }
    }
}

pub fn hashed_side(video_id: &str, train_fraction: f64) -> Side {
    let h = stable_hash(&["video-split", video_id]) % 1_000_000;
    if (h as f64) < train_fraction * 1_000_000.0 {
        Side::Train
    } else {
        Side::Test
    }
}

/// Assign every video to a side.
pub fn base_video_split<'a>(
    videos: impl IntoIterator<Item = &'a str>,
    train_fraction: f64,
) -> BTreeMap<String, Side> {
    videos
        .into_iter()
        .map(|v| (v.to_string(), hashed_side(v, train_fraction)))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// qid → rule that kept it out of both sides.
    pub exclusions: BTreeMap<String, String>,
    pub flagged: Vec<String>,
}

impl SplitResult {
    fn push(&mut self, side: Side, qid: &str) {
        match side {
            Side::Train => self.train.push(qid.to_string()),
            Side::Test => self.test.push(qid.to_string()),
        }
    }

    fn finish(mut self) -> SplitResult {
        self.train.sort();
        self.test.sort();
        if self.train.is_empty() {
            self.flagged.push("empty-train".into());
        }
        if self.test.is_empty() {
            self.flagged.push("empty-test".into());
        }
        self
    }

    pub fn exclusions_jsonl(&self) -> String {
        let mut out = String::new();
        for (qid, rule) in &self.exclusions {
            out.push_str(&serde_json::json!({ "qid": qid, "rule": rule }).to_string());
            out.push('\n');
        }
        out
    }
}

/// The name a step stands for when it is a concept leaf or a resolved
/// reference.
fn named(step: &Step) -> Option<&str> {
    match step {
        Step::Object(n) | Step::Relationship(n) | Step::Action(n) => Some(n),
        Step::Compose {
            resolves: Some(n), ..
        } => Some(n),
        Step::Compose {
            role: Role::Template,
            body,
            ..
        } => named(body),
        _ => None,
    }
}

fn named_opt(step: &Option<Box<Step>>) -> Option<&str> {
    step.as_deref().and_then(named)
}

/// Everything a program composes, in the shape of held-out pairs.
#[derive(Debug, Default)]
struct Compositions {
    sequencing: BTreeSet<(TimeWord, String)>,
    superlative: BTreeSet<(Order, String)>,
    duration: BTreeSet<String>,
    obj_rel: BTreeSet<(String, String)>,
}

/// `value` is what `step` is known to evaluate to: the resolved name of a
/// reference, or the answer at the root of an open question.
fn scan(step: &Step, value: Option<&str>, out: &mut Compositions) {
    match step {
        Step::GetFrames { anchor, direction } => {
            if let Step::StartOf(a) | Step::EndOf(a) = anchor.as_ref() {
                if let Some(n) = named(a) {
                    let w = match direction {
                        Direction::Before => TimeWord::Before,
                        Direction::After => TimeWord::After,
                    };
                    out.sequencing.insert((w, n.to_string()));
                }
            }
        }
        Step::ActionFrames(a) => {
            if let Some(n) = named(a) {
                out.sequencing.insert((TimeWord::While, n.to_string()));
            }
        }
        Step::Iterate {
            items,
            relationship,
            objects,
            limit: Some(1),
        } => {
            if let Some(r) = named_opt(relationship) {
                let order = match items.as_ref() {
                    Step::Sort {
                        descending: true, ..
                    } => Order::Last,
                    _ => Order::First,
                };
                out.superlative.insert((order, r.to_string()));
                for o in objects.iter().filter_map(named) {
                    out.obj_rel.insert((o.to_string(), r.to_string()));
                }
            }
        }
        Step::Iterate {
            relationship,
            objects,
            ..
        } => {
            if let Some(r) = named_opt(relationship) {
                for o in objects.iter().filter_map(named) {
                    out.obj_rel.insert((o.to_string(), r.to_string()));
                }
            }
        }
        Step::ObjectRelation {
            object,
            relationship,
            ..
        } => {
            if let (Some(o), Some(r)) = (named(object), named(relationship)) {
                out.obj_rel.insert((o.to_string(), r.to_string()));
            }
        }
        Step::Exists { items, item } => {
            if let Some(x) = named(item) {
                for (o, r) in site(items, x) {
                    out.obj_rel.insert((o, r));
                }
            }
        }
        Step::ChooseOne { items, a, b } => {
            for x in [a, b].into_iter().filter_map(|s| named(s)) {
                for (o, r) in site(items, x) {
                    out.obj_rel.insert((o, r));
                }
            }
        }
        Step::Query { input, attr } => {
            if let (Some(v), Attr::Object | Attr::Relationship) = (value, attr) {
                for (o, r) in site(input, v) {
                    out.obj_rel.insert((o, r));
                }
            }
            if *attr == Attr::Duration {
                if let Some(n) = named(input) {
                    out.duration.insert(n.to_string());
                }
            }
        }
        Step::Comparative {
            a,
            b,
            attr: Attr::Duration,
            ..
        } => {
            for n in [a, b].into_iter().filter_map(|s| named(s)) {
                out.duration.insert(n.to_string());
            }
        }
        Step::Superlative {
            attr: Attr::Duration,
            ..
        } => {
            if let Some(v) = value {
                out.duration.insert(v.to_string());
            }
        }
        _ => {}
    }
    match step {
        Step::Compose {
            role,
            body,
            resolves,
            ..
        } => {
            let inner = match role {
                Role::Template => value,
                Role::Temporal => None,
                _ => resolves.as_deref(),
            };
            scan(body, inner, out);
        }
        other => {
            for c in other.children() {
                scan(c, None, out);
            }
        }
    }
}

/// Object-relationship pairs formed by placing `x` into a set-producing
/// step: an object among the objects of a relationship, or a relationship
/// among those held with an object.
fn site(items: &Step, x: &str) -> Vec<(String, String)> {
    match items {
        Step::ObjectsIn {
            relationship: Some(r),
            ..
        } => named(r)
            .map(|r| vec![(x.to_string(), r.to_string())])
            .unwrap_or_default(),
        Step::RelationshipsIn {
            object: Some(o), ..
        } => named(o)
            .map(|o| vec![(o.to_string(), x.to_string())])
            .unwrap_or_default(),
        _ => vec![],
    }
}

/// Held-out pairs found by walking the program, including inside indirect
/// references and through an open question's answer.
pub fn ast_pairs<'a>(record: &QuestionRecord, heldout: &'a [HeldOutPair]) -> Vec<&'a HeldOutPair> {
    let mut c = Compositions::default();
    let root = (record.answer_type == AnswerType::Open).then_some(record.answer.as_str());
    scan(&record.program, root, &mut c);
    heldout
        .iter()
        .filter(|p| match p {
            HeldOutPair::Sequencing { time, action } => {
                c.sequencing.contains(&(*time, action.clone()))
            }
            HeldOutPair::Superlative {
                extremum,
                relationship,
            } => c.superlative.contains(&(*extremum, relationship.clone())),
            HeldOutPair::Duration { action } => c.duration.contains(action),
            HeldOutPair::ObjRel {
                object,
                relationship,
            } => c.obj_rel.contains(&(object.clone(), relationship.clone())),
        })
        .collect()
}

const DURATION_WORDS: [&str; 6] = [
    "longer",
    "longest",
    "more time",
    "less time",
    "least time",
    "amount of time",
];

/// Held-out pairs visible in the question text. Coarser than the program
/// scan and blind to references, so it errs toward matching.
pub fn text_pairs<'a>(record: &QuestionRecord, heldout: &'a [HeldOutPair]) -> Vec<&'a HeldOutPair> {
    let t = record.text.as_str();
    heldout
        .iter()
        .filter(|p| match p {
            HeldOutPair::Sequencing { time, action } => {
                contains_phrase(t, &format!("{} {action}", time.word()))
            }
            HeldOutPair::Superlative {
                extremum,
                relationship,
            } => {
                let w = match extremum {
                    Order::First => "first",
                    Order::Last => "last",
                };
                contains_phrase(t, relationship) && contains_phrase(t, w)
            }
            HeldOutPair::Duration { action } => {
                contains_phrase(t, action) && DURATION_WORDS.iter().any(|w| contains_phrase(t, w))
            }
            HeldOutPair::ObjRel {
                object,
                relationship,
            } => contains_phrase(t, object) && contains_phrase(t, relationship),
        })
        .collect()
}

/// Union of the program and text scans.
pub fn heldout_in<'a>(record: &QuestionRecord, heldout: &'a [HeldOutPair]) -> Vec<&'a HeldOutPair> {
    let mut out = ast_pairs(record, heldout);
    for p in text_pairs(record, heldout) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Train keeps questions on training videos free of every held-out pair;
/// test keeps questions on test videos that contain at least one.
pub fn build_novel_composition(corpus: &[QuestionRecord], spec: &SplitSpec) -> SplitResult {
    let mut res = SplitResult::default();
    if spec.heldout_pairs.is_empty() {
        res.flagged.push("no-heldout-pairs".into());
    }
    for r in corpus {
        let side = spec.side(&r.video_id);
        let hit = !heldout_in(r, &spec.heldout_pairs).is_empty();
        match (side, hit) {
            (Side::Train, false) | (Side::Test, true) => res.push(side, &r.qid),
            (Side::Train, true) => {
                res.exclusions
                    .insert(r.qid.clone(), "heldout-pair-in-train".into());
            }
            (Side::Test, false) => {
                res.exclusions
                    .insert(r.qid.clone(), "no-heldout-pair".into());
            }
        }
    }
    res.finish()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndirectPairing {
    /// direct qid → reference kind → indirect qids.
    pub pairs: BTreeMap<String, BTreeMap<RefKind, Vec<String>>>,
    /// Indirect questions whose direct counterpart did not survive, with the
    /// missing qid.
    pub dangling: Vec<(String, String)>,
}

impl IndirectPairing {
    pub fn direct_of(&self) -> BTreeMap<&str, &str> {
        let mut out = BTreeMap::new();
        for (d, kinds) in &self.pairs {
            for qs in kinds.values() {
                for q in qs {
                    out.insert(q.as_str(), d.as_str());
                }
            }
        }
        out
    }
}

pub fn build_indirect_pairing(corpus: &[QuestionRecord]) -> IndirectPairing {
    let present: BTreeSet<&str> = corpus.iter().map(|r| r.qid.as_str()).collect();
    let mut out = IndirectPairing::default();
    for r in corpus {
        let Some(direct) = &r.direct_counterpart else {
            continue;
        };
        if !present.contains(direct.as_str()) {
            out.dangling.push((r.qid.clone(), direct.clone()));
            continue;
        }
        let kind = r.indirect_kind().unwrap_or(RefKind::Object);
        out.pairs
            .entry(direct.clone())
            .or_default()
            .entry(kind)
            .or_default()
            .push(r.qid.clone());
    }
    for kinds in out.pairs.values_mut() {
        for qs in kinds.values_mut() {
            qs.sort();
        }
    }
    out.dangling.sort();
    out
}

/// Train takes every question on training videos; test keeps the paired
/// direct and indirect questions on test videos.
pub fn build_indirect_split(corpus: &[QuestionRecord], spec: &SplitSpec) -> SplitResult {
    let pairing = build_indirect_pairing(corpus);
    let direct_of = pairing.direct_of();
    let dangling: BTreeSet<&str> = pairing.dangling.iter().map(|(q, _)| q.as_str()).collect();
    let mut res = SplitResult::default();
    for r in corpus {
        let q = r.qid.as_str();
        match spec.side(&r.video_id) {
            Side::Train => res.push(Side::Train, q),
            Side::Test if direct_of.contains_key(q) || pairing.pairs.contains_key(q) => {
                res.push(Side::Test, q)
            }
            Side::Test if dangling.contains(q) => {
                res.exclusions
                    .insert(r.qid.clone(), "dangling-counterpart".into());
            }
            Side::Test => {
                res.exclusions.insert(r.qid.clone(), "unpaired".into());
            }
        }
    }
    res.finish()
}

/// Train keeps questions of at most `m` steps, test those of more.
pub fn build_steps_split(corpus: &[QuestionRecord], m: usize, spec: &SplitSpec) -> SplitResult {
    let mut res = SplitResult::default();
    if m == 0 {
        res.flagged.push("m-below-one".into());
    }
    for r in corpus {
        match (spec.side(&r.video_id), r.steps <= m) {
            (Side::Train, true) => res.push(Side::Train, &r.qid),
            (Side::Test, false) => res.push(Side::Test, &r.qid),
            (Side::Train, false) => {
                res.exclusions
                    .insert(r.qid.clone(), "too-many-steps-for-train".into());
            }
            (Side::Test, true) => {
                res.exclusions
                    .insert(r.qid.clone(), "too-few-steps-for-test".into());
            }
        }
    }
    res.finish()
}

pub fn build_split(corpus: &[QuestionRecord], spec: &SplitSpec) -> SplitResult {
    match spec.kind {
        SplitKind::NovelComposition => build_novel_composition(corpus, spec),
        SplitKind::IndirectReference => build_indirect_split(corpus, spec),
        SplitKind::MoreSteps => build_steps_split(corpus, spec.m, spec),
    }
}
