use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Semantic, Structure, TimeWord};
use crate::program::{count_steps, sexpr, Direction, Role, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerType {
    Binary,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Localization {
    None,
    AnswerChanged,
    AnswerUnchanged,
}

/// What an indirect reference stands in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefKind {
    Object,
    Relationship,
    Action,
    /// An action reference used as the anchor of a localization phrase.
    Temporal,
}

impl RefKind {
    pub const ALL: [RefKind; 4] = [
        RefKind::Object,
        RefKind::Relationship,
        RefKind::Action,
        RefKind::Temporal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RefKind::Object => "object",
            RefKind::Relationship => "relationship",
            RefKind::Action => "action",
            RefKind::Temporal => "temporal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub qid: String,
    pub video_id: String,
    pub text: String,
    pub answer: String,
    #[serde(serialize_with = "program_out", deserialize_with = "program_in")]
    pub program: Step,
    pub template_id: String,
    pub structure: Structure,
    pub semantic: Semantic,
    pub reasoning: Vec<String>,
    pub answer_type: AnswerType,
    pub steps: usize,
    pub localization: Localization,
    pub direct_counterpart: Option<String>,
}

fn program_out<S: Serializer>(step: &Step, s: S) -> Result<S::Ok, S::Error> {
    sexpr::to_json(step).serialize(s)
}

fn program_in<'de, D: Deserializer<'de>>(d: D) -> Result<Step, D::Error> {
    let json = serde_json::Value::deserialize(d)?;
    sexpr::parse(&json).map_err(serde::de::Error::custom)
}

/// Where a concept occurs in a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptRole {
    /// Named directly by the template.
    Direct,
    /// The concept an indirect reference resolves to.
    Resolved,
    /// Used inside an indirect reference's sub-program.
    InsideRef,
    /// The anchor of a localization phrase.
    Anchor,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Object(String),
    Relationship(String),
    Action(String),
}

impl Concept {
    pub fn name(&self) -> &str {
        match self {
            Concept::Object(n) | Concept::Relationship(n) | Concept::Action(n) => n,
        }
    }
}

impl QuestionRecord {
    pub fn recount_steps(&self) -> usize {
        count_steps(&self.program)
    }

    /// Every concept the program mentions, with where it occurs.
    pub fn concepts(&self) -> Vec<(ConceptRole, Concept)> {
        let mut out = Vec::new();
        collect(&self.program, ConceptRole::Direct, &mut out);
        out
    }

    /// The balancing unit below the reasoning type: the template plus the
    /// concepts it was instantiated with. Localization anchors and how a
    /// concept is referred to do not matter.
    pub fn content_key(&self) -> String {
        let mut parts = vec![self.template_id.clone()];
        for (role, c) in self.concepts() {
            if matches!(role, ConceptRole::Direct | ConceptRole::Resolved)
                && !parts[1..].contains(&c.name().to_string())
            {
                parts.push(c.name().to_string());
            }
        }
        parts.join("|")
    }

    /// The localization phrase, if any: time word and the anchor concept
    /// (the resolved name when the anchor is itself a reference).
    pub fn temporal_phrase(&self) -> Option<(TimeWord, String)> {
        let mut found = None;
        self.program.walk(&mut |s| {
            if found.is_some() {
                return;
            }
            if let Step::Compose {
                role: Role::Temporal,
                body,
                ..
            } = s
            {
                let (word, anchor) = match body.as_ref() {
                    Step::GetFrames { anchor, direction } => {
                        let w = match direction {
                            Direction::Before => TimeWord::Before,
                            Direction::After => TimeWord::After,
                        };
                        match anchor.as_ref() {
                            Step::StartOf(a) | Step::EndOf(a) => (w, a.as_ref()),
                            other => (w, other),
                        }
                    }
                    Step::ActionFrames(a) => (TimeWord::While, a.as_ref()),
                    _ => return,
                };
                let name = match anchor {
                    Step::Action(n) => n.clone(),
                    Step::Compose {
                        resolves: Some(n), ..
                    } => n.clone(),
                    _ => return,
                };
                found = Some((word, name));
            }
        });
        found
    }

    /// The kind of indirect reference this question uses, if any.
    pub fn indirect_kind(&self) -> Option<RefKind> {
        fn go(s: &Step, in_temporal: bool) -> Option<RefKind> {
            match s {
                Step::Compose { role, body, .. } => match role {
                    Role::Object => Some(RefKind::Object),
                    Role::Relationship => Some(RefKind::Relationship),
                    Role::Action if in_temporal => Some(RefKind::Temporal),
                    Role::Action => Some(RefKind::Action),
                    Role::Temporal => go(body, true),
                    Role::Template => go(body, in_temporal),
                },
                other => other
                    .children()
                    .into_iter()
                    .find_map(|c| go(c, in_temporal)),
            }
        }
        go(&self.program, false)
    }
}

fn collect(step: &Step, role: ConceptRole, out: &mut Vec<(ConceptRole, Concept)>) {
    match step {
        Step::Object(n) => out.push((role, Concept::Object(n.clone()))),
        Step::Relationship(n) => out.push((role, Concept::Relationship(n.clone()))),
        Step::Action(n) => out.push((role, Concept::Action(n.clone()))),
        Step::Compose {
            role: r,
            body,
            resolves,
            ..
        } => match r {
            Role::Template => collect(body, role, out),
            Role::Temporal => collect(body, ConceptRole::Anchor, out),
            Role::Object | Role::Relationship | Role::Action => {
                if let Some(name) = resolves {
                    let c = match r {
                        Role::Object => Concept::Object(name.clone()),
                        Role::Relationship => Concept::Relationship(name.clone()),
                        _ => Concept::Action(name.clone()),
                    };
                    // A reference used as an anchor keeps the anchor role.
                    let outer = if role == ConceptRole::Anchor {
                        role
                    } else {
                        ConceptRole::Resolved
                    };
                    out.push((outer, c));
                }
                collect(body, ConceptRole::InsideRef, out);
            }
        },
        other => {
            for c in other.children() {
                collect(c, role, out);
            }
        }
    }
}
