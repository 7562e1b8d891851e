//! Building one question: bindings, an optional localization phrase and an
//! optional indirect reference, realized into text, program and answer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::inflect;
use super::record::{Localization, QuestionRecord, RefKind};
use super::{Registry, SlotKind, Template};
use crate::graph::VideoGraph;
use crate::ontology::{Ontology, RelationshipCategory};
use crate::program::{evaluate, Attr, Direction, EvalResult, Extremum, Item, Role, Step, Value};
use crate::util::stable_hash;

/// Pseudo-slot naming the anchor of the localization phrase.
pub const ANCHOR: &str = "@anchor";

const TEMPORAL_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeWord {
    Before,
    After,
    While,
}

impl TimeWord {
    pub fn word(self) -> &'static str {
        match self {
            TimeWord::Before => "before",
            TimeWord::After => "after",
            TimeWord::While => "while",
        }
    }
}

/// Which member of a set a reference picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Any,
    First,
    Last,
    Longest,
    Shortest,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IndirectRef {
    /// "the object they were holding first"
    Object { relationship: String, which: Which },
    /// "doing what they did to the table to"
    Relationship { object: String },
    /// "doing the longest action"
    Action { which: Which },
}

impl IndirectRef {
    pub fn target(&self) -> SlotKind {
        match self {
            IndirectRef::Object { .. } => SlotKind::Object,
            IndirectRef::Relationship { .. } => SlotKind::Relationship,
            IndirectRef::Action { .. } => SlotKind::Action,
        }
    }

    pub fn added_steps(&self) -> usize {
        match self {
            IndirectRef::Object { .. } | IndirectRef::Relationship { .. } => 2,
            IndirectRef::Action { .. } => 1,
        }
    }

    /// Whether the reference is well formed at all.
    pub fn valid(&self) -> bool {
        match self {
            IndirectRef::Object { which, .. } => {
                matches!(which, Which::Any | Which::First | Which::Last)
            }
            IndirectRef::Relationship { .. } => true,
            IndirectRef::Action { which } => !matches!(which, Which::Any),
        }
    }

    pub fn sub_program(&self) -> Step {
        let b = Box::new;
        match self {
            IndirectRef::Object {
                relationship,
                which,
            } => {
                let frames = match which {
                    Which::Last => Step::Sort {
                        items: b(Step::Frames),
                        attr: Attr::Start,
                        descending: true,
                    },
                    _ => Step::Frames,
                };
                let frames = match which {
                    Which::Any => frames,
                    _ => Step::Iterate {
                        items: b(frames),
                        relationship: Some(b(Step::Relationship(relationship.clone()))),
                        objects: vec![],
                        limit: Some(1),
                    },
                };
                Step::Query {
                    input: b(Step::ObjectsIn {
                        frames: b(frames),
                        relationship: Some(b(Step::Relationship(relationship.clone()))),
                    }),
                    attr: Attr::Object,
                }
            }
            IndirectRef::Relationship { object } => Step::Query {
                input: b(Step::RelationshipsIn {
                    frames: b(Step::Frames),
                    object: Some(b(Step::Object(object.clone()))),
                    specific: true,
                }),
                attr: Attr::Relationship,
            },
            IndirectRef::Action { which } => {
                let (attr, extremum) = match which {
                    Which::First => (Attr::Start, Extremum::Least),
                    Which::Last => (Attr::End, Extremum::Most),
                    Which::Shortest => (Attr::Duration, Extremum::Least),
                    _ => (Attr::Duration, Extremum::Most),
                };
                Step::Superlative {
                    items: b(Step::Actions),
                    attr,
                    extremum,
                }
            }
        }
    }

    /// Replacement text. `base` asks for a bare verb phrase where the frame
    /// wants one (actions only).
    pub fn phrase(&self, base: bool, ontology: &Ontology) -> String {
        match self {
            IndirectRef::Object {
                relationship,
                which,
            } => {
                let spatial =
                    ontology.category(relationship) == Some(RelationshipCategory::Spatial);
                match which {
                    Which::Any if !spatial => {
                        format!("the object they {}", inflect::past(relationship))
                    }
                    Which::First => format!("the object they were {relationship} first"),
                    Which::Last => format!("the object they were {relationship} last"),
                    _ => format!("the object they were {relationship}"),
                }
            }
            IndirectRef::Relationship { object } => {
                format!("doing what they did to the {object} to")
            }
            IndirectRef::Action { which } => {
                let adj = match which {
                    Which::First => "first",
                    Which::Last => "last",
                    Which::Shortest => "shortest",
                    _ => "longest",
                };
                format!("{} the {adj} action", if base { "do" } else { "doing" })
            }
        }
    }
}

/// Why a draft produced no question.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejected {
    Undefined(String),
    /// Several candidate answers; the question would be unanswerable.
    Ambiguous(usize),
    /// A precondition of the construction failed.
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Draft {
    pub template_id: String,
    pub video_id: String,
    pub bindings: BTreeMap<String, String>,
    pub localization: Option<(TimeWord, String)>,
    /// Target slot (or [`ANCHOR`]) and the reference replacing it.
    pub reference: Option<(String, IndirectRef)>,
}

impl Draft {
    pub fn new(template: &Template, video_id: &str, bindings: BTreeMap<String, String>) -> Draft {
        Draft {
            template_id: template.id.clone(),
            video_id: video_id.to_string(),
            bindings,
            localization: None,
            reference: None,
        }
    }

    pub fn qid(&self) -> String {
        let key = serde_json::to_string(self).expect("draft serializes");
        format!(
            "{}-{:016x}",
            self.video_id,
            stable_hash(&["question", &key])
        )
    }

    pub fn without_reference(&self) -> Draft {
        Draft {
            reference: None,
            ..self.clone()
        }
    }

    pub fn without_localization(&self) -> Draft {
        Draft {
            localization: None,
            ..self.clone()
        }
    }

    /// The full program, wrapped as a template composition.
    pub fn program(&self, template: &Template) -> crate::Result<Step> {
        let mut body = template.skeleton(&self.bindings)?;
        if let Some((word, anchor)) = &self.localization {
            let mut first = true;
            replace(&mut body, &mut |s| {
                if *s != Step::Frames {
                    return None;
                }
                let a = Box::new(Step::Action(anchor.clone()));
                let frames = match word {
                    TimeWord::Before => Step::GetFrames {
                        anchor: Box::new(Step::StartOf(a)),
                        direction: Direction::Before,
                    },
                    TimeWord::After => Step::GetFrames {
                        anchor: Box::new(Step::EndOf(a)),
                        direction: Direction::After,
                    },
                    TimeWord::While => Step::ActionFrames(a),
                };
                let steps = if std::mem::take(&mut first) {
                    TEMPORAL_STEPS
                } else {
                    0
                };
                Some(Step::Compose {
                    role: Role::Temporal,
                    steps,
                    body: Box::new(frames),
                    resolves: None,
                })
            });
        }
        if let Some((slot, r)) = &self.reference {
            let (target, role) = if slot == ANCHOR {
                let (_, anchor) = self.localization.as_ref().ok_or_else(|| {
                    crate::Error::Registry(format!(
                        "{}: anchor reference without localization",
                        template.id
                    ))
                })?;
                (Step::Action(anchor.clone()), Role::Action)
            } else {
                let s = template.slot(slot).ok_or_else(|| {
                    crate::Error::Registry(format!("{}: no slot {slot}", template.id))
                })?;
                let name = self.bindings[slot].clone();
                match s.kind {
                    SlotKind::Object => (Step::Object(name), Role::Object),
                    SlotKind::Relationship => (Step::Relationship(name), Role::Relationship),
                    SlotKind::Action => (Step::Action(name), Role::Action),
                }
            };
            let resolves = match &target {
                Step::Object(n) | Step::Relationship(n) | Step::Action(n) => n.clone(),
                _ => unreachable!(),
            };
            let sub = r.sub_program();
            let mut first = true;
            replace(&mut body, &mut |s| {
                if *s != target {
                    return None;
                }
                let steps = if std::mem::take(&mut first) {
                    r.added_steps()
                } else {
                    0
                };
                Some(Step::Compose {
                    role,
                    steps,
                    body: Box::new(sub.clone()),
                    resolves: Some(resolves.clone()),
                })
            });
        }
        Ok(Step::Compose {
            role: Role::Template,
            steps: template.steps,
            body: Box::new(body),
            resolves: None,
        })
    }

    /// Question text. The frame is picked by a seeded hash of the qid.
    pub fn text(
        &self,
        template: &Template,
        registry: &Registry,
        ontology: &Ontology,
        seed: u64,
    ) -> String {
        let qid = self.qid();
        let pick =
            stable_hash(&["frame", &seed.to_string(), &qid]) as usize % template.frames.len();
        let frame = &template.frames[pick];
        let mut out = String::new();
        let mut rest = frame.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let close = open
                + rest[open..]
                    .find('}')
                    .expect("registry frames are balanced");
            let hole = &rest[open + 1..close];
            let (slot, form) = hole.split_once(':').unwrap_or((hole, ""));
            out.push_str(&self.render_slot(template, registry, ontology, slot, form));
            rest = &rest[close + 1..];
        }
        out.push_str(rest);
        if let Some((word, anchor)) = &self.localization {
            let anchor_text = match &self.reference {
                Some((s, r)) if s == ANCHOR => r.phrase(false, ontology),
                _ => anchor.clone(),
            };
            let stem = out.trim_end_matches('?').to_string();
            out = format!("{stem} {} {anchor_text}?", word.word());
        }
        out
    }

    fn render_slot(
        &self,
        template: &Template,
        registry: &Registry,
        ontology: &Ontology,
        slot: &str,
        form: &str,
    ) -> String {
        if let Some((s, r)) = &self.reference {
            if s == slot {
                return r.phrase(form == "base", ontology);
            }
        }
        let name = self.bindings.get(slot).cloned().unwrap_or_default();
        match template.slot(slot).map(|s| s.kind) {
            Some(SlotKind::Object) => match form {
                "the" => format!("the {name}"),
                _ => inflect::with_article(&name, &registry.mass_nouns),
            },
            Some(SlotKind::Action) if form == "base" => ontology
                .actions
                .get(&name)
                .map(|a| a.base.clone())
                .unwrap_or(name),
            _ => name,
        }
    }

    /// Evaluates the draft on `graph` and builds the record.
    pub fn realize(
        &self,
        registry: &Registry,
        graph: &VideoGraph,
        ontology: &Ontology,
        seed: u64,
    ) -> Result<QuestionRecord, Rejected> {
        let template = registry
            .get(&self.template_id)
            .ok_or_else(|| Rejected::Invalid(format!("unknown template {}", self.template_id)))?;
        let program = self
            .program(template)
            .map_err(|e| Rejected::Invalid(e.to_string()))?;
        let answer = answer_of(&evaluate(&program, graph, ontology))?;
        let localization = match &self.localization {
            None => Localization::None,
            Some(_) => {
                let plain = self
                    .without_localization()
                    .without_reference()
                    .program(template)
                    .map_err(|e| Rejected::Invalid(e.to_string()))?;
                match evaluate(&plain, graph, ontology) {
                    EvalResult::Answer(v) if v == answer => Localization::AnswerUnchanged,
                    _ => Localization::AnswerChanged,
                }
            }
        };
        let steps = crate::program::count_steps(&program);
        Ok(QuestionRecord {
            qid: self.qid(),
            video_id: self.video_id.clone(),
            text: self.text(template, registry, ontology, seed),
            answer: answer.render(),
            program,
            template_id: template.id.clone(),
            structure: template.structure,
            semantic: template.semantic,
            reasoning: template.reasoning.clone(),
            answer_type: template.answer_type(),
            steps,
            localization,
            direct_counterpart: self
                .reference
                .as_ref()
                .map(|_| self.without_reference().qid()),
        })
    }

    /// Adds a localization phrase. The anchor must occur in the video.
    pub fn localize(
        &self,
        template: &Template,
        word: TimeWord,
        anchor: &str,
        graph: &VideoGraph,
    ) -> Result<Draft, Rejected> {
        if !template.allows_localization {
            return Err(Rejected::Invalid(format!(
                "{} cannot be localized",
                template.id
            )));
        }
        if self.localization.is_some() {
            return Err(Rejected::Invalid("already localized".into()));
        }
        if !graph.actions.iter().any(|a| a.class == anchor) {
            return Err(Rejected::Invalid(format!(
                "anchor {anchor:?} does not occur"
            )));
        }
        Ok(Draft {
            localization: Some((word, anchor.to_string())),
            ..self.clone()
        })
    }

    /// Replaces the concept in `slot` (or the localization anchor) by `r`,
    /// provided the reference picks out exactly that concept in `graph`.
    pub fn refer(
        &self,
        template: &Template,
        slot: &str,
        r: &IndirectRef,
        graph: &VideoGraph,
        ontology: &Ontology,
    ) -> Result<Draft, Rejected> {
        let invalid = |m: &str| Err(Rejected::Invalid(m.to_string()));
        if self.reference.is_some() {
            return invalid("already has a reference");
        }
        if !r.valid() {
            return invalid("malformed reference");
        }
        let (kind, name) = if slot == ANCHOR {
            match &self.localization {
                Some((_, a)) => (SlotKind::Action, a.clone()),
                None => return invalid("no anchor to refer to"),
            }
        } else {
            match (template.slot(slot), self.bindings.get(slot)) {
                (Some(s), Some(n)) => (s.kind, n.clone()),
                _ => return invalid("unknown slot"),
            }
        };
        if kind != r.target() {
            return invalid("reference kind does not match the slot");
        }
        if template.options.iter().any(|o| o == slot) {
            return invalid("answer options are always named directly");
        }
        // References must not restate something the question already says.
        let bound = |k: SlotKind| {
            template
                .slots
                .iter()
                .filter(move |s| s.kind == k)
                .filter_map(|s| self.bindings.get(&s.name))
        };
        match r {
            IndirectRef::Object { relationship, .. }
                if bound(SlotKind::Relationship).any(|x| x == relationship) =>
            {
                return invalid("reference repeats the question's relationship");
            }
            IndirectRef::Relationship { object }
                if bound(SlotKind::Object).any(|x| x == object) =>
            {
                return invalid("reference repeats one of the question's objects");
            }
            _ => {}
        }
        let expected = match kind {
            SlotKind::Object => Item::Object(name.clone()),
            SlotKind::Relationship => Item::Relationship(name.clone()),
            SlotKind::Action => Item::Action(name.clone()),
        };
        match evaluate(&r.sub_program(), graph, ontology) {
            EvalResult::Answer(Value::Item(i)) if i == expected => {}
            _ => return invalid("resolution-mismatch"),
        }
        Ok(Draft {
            reference: Some((slot.to_string(), r.clone())),
            ..self.clone()
        })
    }

    pub fn ref_kind(&self) -> Option<RefKind> {
        self.reference.as_ref().map(|(slot, r)| match r {
            _ if slot == ANCHOR => RefKind::Temporal,
            IndirectRef::Object { .. } => RefKind::Object,
            IndirectRef::Relationship { .. } => RefKind::Relationship,
            IndirectRef::Action { .. } => RefKind::Action,
        })
    }
}

fn answer_of(result: &EvalResult) -> Result<Value, Rejected> {
    match result {
        EvalResult::Answer(v) => Ok(v.clone()),
        EvalResult::Undefined(why) => Err(Rejected::Undefined(why.clone())),
        EvalResult::Ambiguous(c) => Err(Rejected::Ambiguous(c.len())),
    }
}

/// Pre-order replacement; replaced subtrees are not revisited.
fn replace(step: &mut Step, f: &mut impl FnMut(&Step) -> Option<Step>) {
    if let Some(new) = f(step) {
        *step = new;
        return;
    }
    for c in step.children_mut() {
        replace(c, f);
    }
}
