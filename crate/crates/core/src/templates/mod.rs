//! Question templates: registry, realization into text, temporal
//! localization and indirect references.
//!
//! A template pairs a program skeleton (with `$slot` holes) with a few
//! natural-language frames. Frames use `{slot}` holes; objects take an
//! article by default, `{slot:the}` forces "the", `{slot:base}` asks for an
//! action's base form. Relationships and actions otherwise render as their
//! gerund names.

mod draft;
pub mod inflect;
mod record;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::graph::VideoGraph;
use crate::ontology::Ontology;
use crate::program::{sexpr, typecheck, Kind, Step};

pub use draft::{Draft, IndirectRef, Rejected, TimeWord, Which, ANCHOR};
pub use record::{AnswerType, Concept, ConceptRole, Localization, QuestionRecord, RefKind};

/// Steps per template as printed in the template table. The registry is
/// checked against this on load.
pub const TEMPLATE_STEPS: &[(&str, usize)] = &[
    ("objExists", 1),
    ("objRelExists", 1),
    ("relExists", 1),
    ("actExists", 1),
    ("andObjRelExists", 3),
    ("xorObjRelExists", 3),
    ("objWhatGeneral", 1),
    ("objWhat", 2),
    ("objWhatChoose", 3),
    ("actWhatAfterAll", 1),
    ("actWhatBefore", 1),
    ("objFirst", 2),
    ("objFirstChoose", 3),
    ("objFirstVerify", 3),
    ("actFirst", 1),
    ("objLast", 2),
    ("objLastChoose", 3),
    ("objLastVerify", 3),
    ("actLast", 1),
    ("actLengthLongerCompare", 5),
    ("actLengthShorterCompare", 5),
    ("actLengthLongerVerify", 5),
    ("actLengthShorterVerify", 5),
    ("actLongest", 1),
    ("actShortest", 1),
    ("actTime", 5),
    ("relTime", 5),
    ("objTime", 5),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Query,
    Compare,
    Choose,
    Verify,
    Logic,
}

impl Structure {
    pub const ALL: [Structure; 5] = [
        Structure::Query,
        Structure::Compare,
        Structure::Choose,
        Structure::Verify,
        Structure::Logic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Query => "query",
            Structure::Compare => "compare",
            Structure::Choose => "choose",
            Structure::Verify => "verify",
            Structure::Logic => "logic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantic {
    Object,
    Relationship,
    Action,
}

impl Semantic {
    pub fn name(self) -> &'static str {
        match self {
            Semantic::Object => "object",
            Semantic::Relationship => "relationship",
            Semantic::Action => "action",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Object,
    Relationship,
    Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub structure: Structure,
    pub semantic: Semantic,
    pub reasoning: Vec<String>,
    pub steps: usize,
    /// Whether a before/after/while phrase may restrict the frames.
    #[serde(rename = "localize")]
    pub allows_localization: bool,
    pub slots: Vec<Slot>,
    /// Slots offered to the reader as the two possible answers.
    #[serde(default)]
    pub options: Vec<String>,
    pub frames: Vec<String>,
    pub program: Json,
}

impl Template {
    pub fn answer_type(&self) -> AnswerType {
        match self.structure {
            Structure::Query => AnswerType::Open,
            _ => AnswerType::Binary,
        }
    }

    pub fn slot(&self, name: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.name == name)
    }

    /// Fills the skeleton with direct leaves for `bindings`.
    pub fn skeleton(&self, bindings: &BTreeMap<String, String>) -> Result<Step> {
        let mut leaves = BTreeMap::new();
        for slot in &self.slots {
            let name = bindings.get(&slot.name).ok_or_else(|| {
                Error::Registry(format!("{}: slot {} unbound", self.id, slot.name))
            })?;
            let leaf = match slot.kind {
                SlotKind::Object => Step::Object(name.clone()),
                SlotKind::Relationship => Step::Relationship(name.clone()),
                SlotKind::Action => Step::Action(name.clone()),
            };
            leaves.insert(slot.name.clone(), leaf);
        }
        sexpr::parse_with_slots(&self.program, &leaves)
    }

    fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Registry(format!("{}: {msg}", self.id)));
        match TEMPLATE_STEPS.iter().find(|(id, _)| *id == self.id) {
            Some((_, steps)) if *steps == self.steps => {}
            Some((_, steps)) => {
                return fail(format!("declares {} steps, table says {steps}", self.steps))
            }
            None => return fail("not in the template table".into()),
        }
        if self.frames.is_empty() {
            return fail("no question frames".into());
        }
        let program_text = self.program.to_string();
        for slot in &self.slots {
            if !self
                .frames
                .iter()
                .all(|f| f.contains(&format!("{{{}", slot.name)))
            {
                return fail(format!("slot {} missing from a frame", slot.name));
            }
            if !program_text.contains(&format!("\"${}\"", slot.name)) {
                return fail(format!("slot {} missing from the program", slot.name));
            }
        }
        for o in &self.options {
            if self.slot(o).is_none() {
                return fail(format!("option {o} is not a slot"));
            }
        }
        // Typecheck with placeholder names.
        let names: BTreeMap<String, String> = self
            .slots
            .iter()
            .map(|s| (s.name.clone(), format!("<{}>", s.name)))
            .collect();
        let program = self.skeleton(&names)?;
        let errors = typecheck(&program);
        if let Some(e) = errors.first() {
            return fail(format!("program does not typecheck: {e:?}"));
        }
        let kind = program
            .kind()
            .map_err(|_| Error::Registry(self.id.clone()))?;
        let ok = match self.answer_type() {
            AnswerType::Open => matches!(kind, Kind::Item(_)),
            AnswerType::Binary => {
                kind == Kind::Text || (!self.options.is_empty() && matches!(kind, Kind::Item(_)))
            }
        };
        if !ok {
            return fail(format!(
                "program yields {kind:?}, which does not fit a {:?} question",
                self.structure
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Registry {
    pub mass_nouns: BTreeSet<String>,
    pub templates: Vec<Template>,
}

impl Registry {
    /// The bundled registry.
    pub fn desk() -> Registry {
        Registry::from_json_str(
            include_str!("../../data/templates.json"),
            "bundled templates",
        )
        .expect("bundled template registry is valid")
    }

    pub fn load(path: &Path) -> Result<Registry> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Registry::from_json_str(&text, &path.display().to_string())
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Registry> {
        let reg: Registry = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        reg.check()?;
        Ok(reg)
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.templates {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::Registry(format!("duplicate template {}", t.id)));
            }
            t.check()?;
        }
        if self.templates.len() < TEMPLATE_STEPS.len() {
            let missing: Vec<&str> = TEMPLATE_STEPS
                .iter()
                .map(|(id, _)| *id)
                .filter(|id| !seen.contains(id))
                .collect();
            return Err(Error::Registry(format!(
                "missing templates: {}",
                missing.join(", ")
            )));
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }
}

/// One question from a template and its slot bindings.
pub fn instantiate(
    registry: &Registry,
    template_id: &str,
    bindings: BTreeMap<String, String>,
    graph: &VideoGraph,
    ontology: &Ontology,
    seed: u64,
) -> std::result::Result<QuestionRecord, Rejected> {
    let t = registry
        .get(template_id)
        .ok_or_else(|| Rejected::Invalid(format!("unknown template {template_id}")))?;
    Draft::new(t, &graph.video_id, bindings).realize(registry, graph, ontology, seed)
}

/// The same question with `slot` replaced by an indirect reference.
pub fn add_indirect(
    registry: &Registry,
    draft: &Draft,
    slot: &str,
    reference: &IndirectRef,
    graph: &VideoGraph,
    ontology: &Ontology,
    seed: u64,
) -> std::result::Result<QuestionRecord, Rejected> {
    let t = registry
        .get(&draft.template_id)
        .ok_or_else(|| Rejected::Invalid(format!("unknown template {}", draft.template_id)))?;
    draft
        .refer(t, slot, reference, graph, ontology)?
        .realize(registry, graph, ontology, seed)
}

/// The same question restricted to the frames before, after or during
/// `anchor`.
pub fn add_temporal_localization(
    registry: &Registry,
    draft: &Draft,
    word: TimeWord,
    anchor: &str,
    graph: &VideoGraph,
    ontology: &Ontology,
    seed: u64,
) -> std::result::Result<QuestionRecord, Rejected> {
    let t = registry
        .get(&draft.template_id)
        .ok_or_else(|| Rejected::Invalid(format!("unknown template {}", draft.template_id)))?;
    draft
        .localize(t, word, anchor, graph)?
        .realize(registry, graph, ontology, seed)
}
