//! JSON S-expression form of programs: `["query", ["objectsIn", ["frames"],
//! ["relationship", "holding"]], "object"]`.
//!
//! Template skeletons may put `"$name"` strings anywhere a step is
//! expected; [`parse_with_slots`] fills them from a binding map.

use std::collections::BTreeMap;

use serde_json::{json, Value as Json};

use super::{Attr, Direction, Extremum, Labels, More, Role, Step};
use crate::error::{Error, Result};

pub fn to_json(step: &Step) -> Json {
    use Step as S;
    let b = |s: &Step| to_json(s);
    let opt = |s: &Option<Box<Step>>| s.as_deref().map(to_json).unwrap_or(Json::Null);
    match step {
        S::Object(n) => json!(["object", n]),
        S::Relationship(n) => json!(["relationship", n]),
        S::Action(n) => json!(["action", n]),
        S::Bool(v) => json!(["bool", v]),
        S::Frames => json!(["frames"]),
        S::Actions => json!(["actions"]),
        S::ObjectsIn {
            frames,
            relationship,
        } => json!(["objectsIn", b(frames), opt(relationship)]),
        S::RelationshipsIn {
            frames,
            object,
            specific,
        } => {
            json!(["relationshipsIn", b(frames), opt(object), specific])
        }
        S::ActionsIn { frames, exclude } => json!(["actionsIn", b(frames), opt(exclude)]),
        S::StartOf(a) => json!(["startOf", b(a)]),
        S::EndOf(a) => json!(["endOf", b(a)]),
        S::ActionFrames(a) => json!(["actionFrames", b(a)]),
        S::Query { input, attr } => json!(["query", b(input), attr_name(*attr)]),
        S::GetFrames { anchor, direction } => json!([
            "getFrames",
            b(anchor),
            match direction {
                Direction::Before => "before",
                Direction::After => "after",
            }
        ]),
        S::Exists { items, item } => json!(["exists", b(items), b(item)]),
        S::ObjectRelation {
            frame,
            object,
            relationship,
        } => {
            json!(["objectRelation", b(frame), b(object), b(relationship)])
        }
        S::ChooseOne { items, a, b: bb } => json!(["chooseOne", b(items), b(a), b(bb)]),
        S::Iterate {
            items,
            relationship,
            objects,
            limit,
        } => json!([
            "iterate",
            b(items),
            opt(relationship),
            objects.iter().map(to_json).collect::<Vec<_>>(),
            limit
        ]),
        S::Verify { input, labels } => json!([
            "verify",
            b(input),
            match labels {
                Labels::YesNo => "yesno",
                Labels::BeforeAfter => "beforeafter",
            }
        ]),
        S::And(xs) => {
            let mut v = vec![json!("and")];
            v.extend(xs.iter().map(to_json));
            Json::Array(v)
        }
        S::Xor(x, y) => json!(["xor", b(x), b(y)]),
        S::Equals(x, y) => json!(["equals", b(x), b(y)]),
        S::Difference(x, y) => json!(["difference", b(x), b(y)]),
        S::Overlap(x, y) => json!(["overlap", b(x), b(y)]),
        S::ContainedIn(x, y) => json!(["containedIn", b(x), b(y)]),
        S::Comparative {
            a,
            b: bb,
            attr,
            more,
        } => json!([
            "comparative",
            b(a),
            b(bb),
            attr_name(*attr),
            match more {
                More::More => "more",
                More::Less => "less",
            }
        ]),
        S::Superlative {
            items,
            attr,
            extremum,
        } => json!([
            "superlative",
            b(items),
            attr_name(*attr),
            match extremum {
                Extremum::Most => "most",
                Extremum::Least => "least",
            }
        ]),
        S::Sort {
            items,
            attr,
            descending,
        } => {
            json!([
                "sort",
                b(items),
                attr_name(*attr),
                if *descending { "desc" } else { "asc" }
            ])
        }
        S::Compose {
            role,
            steps,
            body,
            resolves,
        } => {
            json!(["compose", role, steps, b(body), resolves])
        }
    }
}

fn attr_name(a: Attr) -> &'static str {
    match a {
        Attr::Object => "object",
        Attr::Relationship => "relationship",
        Attr::Action => "action",
        Attr::Start => "start",
        Attr::End => "end",
        Attr::Duration => "duration",
        Attr::Time => "time",
    }
}

pub fn parse(json: &Json) -> Result<Step> {
    parse_with_slots(json, &BTreeMap::new())
}

pub fn parse_str(text: &str) -> Result<Step> {
    let json: Json = serde_json::from_str(text).map_err(|e| Error::Program(e.to_string()))?;
    parse(&json)
}

pub fn parse_with_slots(json: &Json, slots: &BTreeMap<String, Step>) -> Result<Step> {
    Parser { slots }.step(json)
}

struct Parser<'a> {
    slots: &'a BTreeMap<String, Step>,
}

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Program(msg.into()))
}

impl Parser<'_> {
    fn step(&self, json: &Json) -> Result<Step> {
        if let Some(s) = json.as_str() {
            return match s.strip_prefix('$') {
                Some(slot) => self
                    .slots
                    .get(slot)
                    .cloned()
                    .ok_or_else(|| Error::Program(format!("unbound slot ${slot}"))),
                None => err(format!("expected a step, found string {s:?}")),
            };
        }
        let Some(arr) = json.as_array() else {
            return err(format!("expected a step array, found {json}"));
        };
        let Some(op) = arr.first().and_then(Json::as_str) else {
            return err("step array must start with an operator name");
        };
        let args = &arr[1..];
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                err(format!("{op} takes {n} arguments, found {}", args.len()))
            }
        };
        let b = |i: usize| -> Result<Box<Step>> { Ok(Box::new(self.step(&args[i])?)) };
        let opt = |i: usize| -> Result<Option<Box<Step>>> {
            if args[i].is_null() {
                Ok(None)
            } else {
                Ok(Some(b(i)?))
            }
        };
        let word = |i: usize| -> Result<&str> {
            args[i]
                .as_str()
                .ok_or_else(|| Error::Program(format!("{op}: argument {i} must be a string")))
        };
        let attr = |i: usize| -> Result<Attr> {
            Ok(match word(i)? {
                "object" => Attr::Object,
                "relationship" => Attr::Relationship,
                "action" => Attr::Action,
                "start" => Attr::Start,
                "end" => Attr::End,
                "duration" => Attr::Duration,
                "time" => Attr::Time,
                other => return err(format!("unknown attribute {other:?}")),
            })
        };
        use Step as S;
        Ok(match op {
            "object" | "relationship" | "action" => {
                arity(1)?;
                let n = word(0)?.to_string();
                match op {
                    "object" => S::Object(n),
                    "relationship" => S::Relationship(n),
                    _ => S::Action(n),
                }
            }
            "bool" => {
                arity(1)?;
                S::Bool(
                    args[0]
                        .as_bool()
                        .ok_or_else(|| Error::Program("bool needs true/false".into()))?,
                )
            }
            "frames" => {
                arity(0)?;
                S::Frames
            }
            "actions" => {
                arity(0)?;
                S::Actions
            }
            "objectsIn" => {
                arity(2)?;
                S::ObjectsIn {
                    frames: b(0)?,
                    relationship: opt(1)?,
                }
            }
            "relationshipsIn" => {
                arity(3)?;
                S::RelationshipsIn {
                    frames: b(0)?,
                    object: opt(1)?,
                    specific: args[2]
                        .as_bool()
                        .ok_or_else(|| Error::Program("relationshipsIn flag".into()))?,
                }
            }
            "actionsIn" => {
                arity(2)?;
                S::ActionsIn {
                    frames: b(0)?,
                    exclude: opt(1)?,
                }
            }
            "startOf" | "endOf" | "actionFrames" => {
                arity(1)?;
                let a = b(0)?;
                match op {
                    "startOf" => S::StartOf(a),
                    "endOf" => S::EndOf(a),
                    _ => S::ActionFrames(a),
                }
            }
            "query" => {
                arity(2)?;
                S::Query {
                    input: b(0)?,
                    attr: attr(1)?,
                }
            }
            "getFrames" => {
                arity(2)?;
                let direction = match word(1)? {
                    "before" => Direction::Before,
                    "after" => Direction::After,
                    other => return err(format!("unknown direction {other:?}")),
                };
                S::GetFrames {
                    anchor: b(0)?,
                    direction,
                }
            }
            "exists" => {
                arity(2)?;
                S::Exists {
                    items: b(0)?,
                    item: b(1)?,
                }
            }
            "objectRelation" => {
                arity(3)?;
                S::ObjectRelation {
                    frame: b(0)?,
                    object: b(1)?,
                    relationship: b(2)?,
                }
            }
            "chooseOne" => {
                arity(3)?;
                S::ChooseOne {
                    items: b(0)?,
                    a: b(1)?,
                    b: b(2)?,
                }
            }
            "iterate" => {
                arity(4)?;
                let Some(objs) = args[2].as_array() else {
                    return err("iterate: objects must be an array");
                };
                let limit = match &args[3] {
                    Json::Null => None,
                    v => Some(
                        v.as_u64()
                            .ok_or_else(|| Error::Program("iterate: bad limit".into()))?
                            as usize,
                    ),
                };
                S::Iterate {
                    items: b(0)?,
                    relationship: opt(1)?,
                    objects: objs.iter().map(|o| self.step(o)).collect::<Result<_>>()?,
                    limit,
                }
            }
            "verify" => {
                arity(2)?;
                let labels = match word(1)? {
                    "yesno" => Labels::YesNo,
                    "beforeafter" => Labels::BeforeAfter,
                    other => return err(format!("unknown labels {other:?}")),
                };
                S::Verify {
                    input: b(0)?,
                    labels,
                }
            }
            "and" => S::And(args.iter().map(|a| self.step(a)).collect::<Result<_>>()?),
            "xor" | "equals" | "difference" | "overlap" | "containedIn" => {
                arity(2)?;
                let (x, y) = (b(0)?, b(1)?);
                match op {
                    "xor" => S::Xor(x, y),
                    "equals" => S::Equals(x, y),
                    "difference" => S::Difference(x, y),
                    "overlap" => S::Overlap(x, y),
                    _ => S::ContainedIn(x, y),
                }
            }
            "comparative" => {
                arity(4)?;
                let more = match word(3)? {
                    "more" => More::More,
                    "less" => More::Less,
                    other => return err(format!("unknown comparison {other:?}")),
                };
                S::Comparative {
                    a: b(0)?,
                    b: b(1)?,
                    attr: attr(2)?,
                    more,
                }
            }
            "superlative" => {
                arity(3)?;
                let extremum = match word(2)? {
                    "most" => Extremum::Most,
                    "least" => Extremum::Least,
                    other => return err(format!("unknown extremum {other:?}")),
                };
                S::Superlative {
                    items: b(0)?,
                    attr: attr(1)?,
                    extremum,
                }
            }
            "sort" => {
                arity(3)?;
                let descending = match word(2)? {
                    "asc" => false,
                    "desc" => true,
                    other => return err(format!("unknown sort order {other:?}")),
                };
                S::Sort {
                    items: b(0)?,
                    attr: attr(1)?,
                    descending,
                }
            }
            "compose" => {
                arity(4)?;
                let role: Role = serde_json::from_value(args[0].clone())
                    .map_err(|e| Error::Program(format!("compose role: {e}")))?;
                let steps = args[1]
                    .as_u64()
                    .ok_or_else(|| Error::Program("compose: steps must be an integer".into()))?
                    as usize;
                let resolves = match &args[3] {
                    Json::Null => None,
                    Json::String(s) => Some(s.clone()),
                    _ => return err("compose: resolves must be a string or null"),
                };
                S::Compose {
                    role,
                    steps,
                    body: b(2)?,
                    resolves,
                }
            }
            other => return err(format!("unknown step {other:?}")),
        })
    }
}
