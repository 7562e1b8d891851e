//! Vocabulary of objects, relationships and actions, plus the rule tables
//! (entailments, synonym merges, blacklists, sequencing heuristics) that the
//! augmentation and generation passes read.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DESK_ONTOLOGY: &str = include_str!("../data/ontology.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationshipCategory {
    Spatial,
    Contact,
    Verb,
    Attention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionClass {
    /// Canonical gerund phrase, e.g. "putting a phone somewhere".
    pub name: String,
    /// Base-form phrase, e.g. "put a phone somewhere".
    pub base: String,
    /// Verb family used by sequencing rules and decoy realism checks.
    pub verb: String,
    pub object: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum Antecedent {
    Relationship(String),
    Action(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entailment {
    pub antecedent: Antecedent,
    pub consequents: Vec<String>,
}

/// `earlier`-family actions must end before `later`-family actions over the
/// same object start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRule {
    pub earlier: String,
    pub later: String,
    /// Insert a short `earlier` span when a `later` span has no predecessor.
    #[serde(default)]
    pub infer_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    pub objects: BTreeSet<String>,
    pub relationships: BTreeMap<String, RelationshipCategory>,
    pub actions: BTreeMap<String, ActionClass>,
    pub entailments: Vec<Entailment>,
    pub merge: BTreeMap<String, String>,
    pub blacklist: BTreeSet<(String, String)>,
    pub confusing: BTreeSet<String>,
    pub similar_pairs: Vec<(String, String)>,
    pub sequence_rules: Vec<SequenceRule>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OntologyFile {
    objects: Vec<String>,
    relationships: BTreeMap<RelationshipCategory, Vec<String>>,
    actions: Vec<ActionClass>,
    #[serde(default)]
    entailments: Vec<EntailmentFile>,
    #[serde(default)]
    merge: BTreeMap<String, String>,
    #[serde(default)]
    blacklist: Vec<(String, String)>,
    #[serde(default)]
    confusing: Vec<String>,
    #[serde(default)]
    similar_pairs: Vec<(String, String)>,
    #[serde(default)]
    sequence_rules: Vec<SequenceRule>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntailmentFile {
    #[serde(rename = "if")]
    antecedent: Antecedent,
    #[serde(rename = "then")]
    consequents: Vec<String>,
}

impl Ontology {
    /// The bundled desk-scale ontology.
    pub fn desk() -> Ontology {
        Ontology::from_json_str(DESK_ONTOLOGY, "bundled ontology")
            .expect("bundled ontology is valid")
    }

    pub fn load(path: &Path) -> Result<Ontology> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ontology::from_json_str(&text, &path.display().to_string())
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Ontology> {
        let file: OntologyFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        let mut relationships = BTreeMap::new();
        for (category, names) in file.relationships {
            for name in names {
                if let Some(prev) = relationships.insert(name.clone(), category) {
                    return Err(Error::Ontology(format!(
                        "relationship {name:?} listed as both {prev:?} and {category:?}"
                    )));
                }
            }
        }
        let mut actions = BTreeMap::new();
        for action in file.actions {
            if actions
                .insert(action.name.clone(), action.clone())
                .is_some()
            {
                return Err(Error::Ontology(format!(
                    "duplicate action {:?}",
                    action.name
                )));
            }
        }
        let ontology = Ontology {
            objects: file.objects.into_iter().collect(),
            relationships,
            actions,
            entailments: file
                .entailments
                .into_iter()
                .map(|e| Entailment {
                    antecedent: e.antecedent,
                    consequents: e.consequents,
                })
                .collect(),
            merge: file.merge,
            blacklist: file.blacklist.into_iter().collect(),
            confusing: file.confusing.into_iter().collect(),
            similar_pairs: file.similar_pairs,
            sequence_rules: file.sequence_rules,
        };
        ontology.check()?;
        Ok(ontology)
    }

    pub fn to_json_string(&self) -> String {
        let mut relationships: BTreeMap<RelationshipCategory, Vec<String>> = BTreeMap::new();
        for (name, category) in &self.relationships {
            relationships
                .entry(*category)
                .or_default()
                .push(name.clone());
        }
        let file = OntologyFile {
            objects: self.objects.iter().cloned().collect(),
            relationships,
            actions: self.actions.values().cloned().collect(),
            entailments: self
                .entailments
                .iter()
                .map(|e| EntailmentFile {
                    antecedent: e.antecedent.clone(),
                    consequents: e.consequents.clone(),
                })
                .collect(),
            merge: self.merge.clone(),
            blacklist: self.blacklist.iter().cloned().collect(),
            confusing: self.confusing.iter().cloned().collect(),
            similar_pairs: self.similar_pairs.clone(),
            sequence_rules: self.sequence_rules.clone(),
        };
        serde_json::to_string_pretty(&file).expect("ontology serializes")
    }

    fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Ontology(msg));
        for e in &self.entailments {
            match &e.antecedent {
                Antecedent::Relationship(r) if !self.relationships.contains_key(r) => {
                    return fail(format!("entailment antecedent {r:?} is not a relationship"));
                }
                Antecedent::Action(a) if !self.actions.contains_key(a) => {
                    return fail(format!("entailment antecedent {a:?} is not an action"));
                }
                _ => {}
            }
            for c in &e.consequents {
                match self.relationships.get(c) {
                    None => {
                        return fail(format!("entailment consequent {c:?} is not a relationship"))
                    }
                    Some(RelationshipCategory::Attention) => {
                        return fail(format!(
                            "entailment consequent {c:?} is an attention relationship"
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        for (raw, canonical) in &self.merge {
            if self.is_canonical(raw) {
                return fail(format!("merge key {raw:?} is itself a canonical name"));
            }
            if !self.is_canonical(canonical) {
                return fail(format!(
                    "merge target {canonical:?} is not in the vocabulary"
                ));
            }
        }
        for action in self.actions.values() {
            if let Some(obj) = &action.object {
                if !self.objects.contains(obj) {
                    return fail(format!(
                        "action {:?} refers to unknown object {obj:?}",
                        action.name
                    ));
                }
            }
        }
        for (obj, rel) in &self.blacklist {
            if !self.objects.contains(obj) || !self.relationships.contains_key(rel) {
                return fail(format!(
                    "blacklist pair ({obj:?}, {rel:?}) is not in the vocabulary"
                ));
            }
        }
        for (a, b) in &self.similar_pairs {
            if !self.objects.contains(a) || !self.objects.contains(b) {
                return fail(format!(
                    "similar pair ({a:?}, {b:?}) is not in the vocabulary"
                ));
            }
        }
        Ok(())
    }

    fn is_canonical(&self, name: &str) -> bool {
        self.objects.contains(name)
            || self.relationships.contains_key(name)
            || self.actions.contains_key(name)
    }

    /// Apply the merge map. Unknown names pass through unchanged.
    pub fn canonical<'a>(&'a self, name: &'a str) -> &'a str {
        self.merge.get(name).map(String::as_str).unwrap_or(name)
    }

    pub fn category(&self, relationship: &str) -> Option<RelationshipCategory> {
        self.relationships.get(relationship).copied()
    }

    pub fn is_spatial(&self, relationship: &str) -> bool {
        self.category(relationship) == Some(RelationshipCategory::Spatial)
    }

    pub fn is_contact(&self, relationship: &str) -> bool {
        self.category(relationship) == Some(RelationshipCategory::Contact)
    }

    pub fn attention_relationships(&self) -> impl Iterator<Item = &str> {
        self.relationships
            .iter()
            .filter(|(_, c)| **c == RelationshipCategory::Attention)
            .map(|(n, _)| n.as_str())
    }

    /// Action class for a (verb family, object) pair, if the vocabulary has one.
    pub fn action_for(&self, verb: &str, object: &str) -> Option<&ActionClass> {
        self.actions
            .values()
            .find(|a| a.verb == verb && a.object.as_deref() == Some(object))
    }

    pub fn is_similar_pair(&self, a: &str, b: &str) -> bool {
        self.similar_pairs
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_ontology_loads_and_round_trips() {
        let o = Ontology::desk();
        assert!(o.objects.contains("bottle"));
        assert_eq!(o.category("holding"), Some(RelationshipCategory::Contact));
        assert_eq!(
            o.category("looking at"),
            Some(RelationshipCategory::Attention)
        );
        let again = Ontology::from_json_str(&o.to_json_string(), "round trip").unwrap();
        assert_eq!(o, again);
    }

    #[test]
    fn merge_map_sends_sandwich_to_food() {
        let o = Ontology::desk();
        assert_eq!(o.canonical("sandwich"), "food");
        assert_eq!(o.canonical("bottle"), "bottle");
    }

    #[test]
    fn consequent_outside_vocabulary_is_rejected() {
        let text = r#"{"objects":["a"],"relationships":{"contact":["holding"]},"actions":[],
            "entailments":[{"if":{"kind":"relationship","name":"holding"},"then":["gripping"]}]}"#;
        assert!(matches!(
            Ontology::from_json_str(text, "t"),
            Err(Error::Ontology(_))
        ));
    }

    #[test]
    fn relationship_in_two_categories_is_rejected() {
        let text =
            r#"{"objects":[],"relationships":{"contact":["x"],"spatial":["x"]},"actions":[]}"#;
        assert!(Ontology::from_json_str(text, "t").is_err());
    }

    #[test]
    fn merge_chain_is_rejected() {
        let text = r#"{"objects":["food","sandwich"],"relationships":{},"actions":[],
            "merge":{"sandwich":"food"}}"#;
        assert!(Ontology::from_json_str(text, "t").is_err());
    }
}
