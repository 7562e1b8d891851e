//! Typed reasoning-step programs evaluated against a scene graph.
//!
//! A program is a tree of [`Step`]s. The sixteen reasoning steps (query,
//! getFrames, exists, objectRelation, chooseOne, iterate, verify, and, xor,
//! equals, comparative, superlative, difference, overlap, containedIn, sort)
//! sit on top of a handful of leaves and graph sources. [`Step::Compose`]
//! marks a sub-program contributed by a template, an indirect reference or a
//! temporal localization phrase; it only matters for step counting and
//! analysis.

mod eval;
mod oracle;
pub mod sexpr;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::evaluate;
pub use oracle::{brute_force_oracle, ORACLE_FRAME_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attr {
    Object,
    Relationship,
    Action,
    Start,
    End,
    Duration,
    /// Interval order: comparative only.
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Before,
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum More {
    More,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremum {
    Most,
    Least,
}

/// How `verify` renders a boolean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Labels {
    YesNo,
    BeforeAfter,
}

/// What contributed a composed sub-program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Template,
    Object,
    Relationship,
    Action,
    Temporal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Object(String),
    Relationship(String),
    Action(String),
    Bool(bool),
    /// Every annotated frame, in time order.
    Frames,
    /// Every action class occurring in the video.
    Actions,
    /// Objects the person has `relationship` with in any of `frames`; any
    /// interaction when `relationship` is absent.
    ObjectsIn {
        frames: Box<Step>,
        relationship: Option<Box<Step>>,
    },
    /// Relationships held in any of `frames`, optionally restricted to one
    /// object. `specific` keeps only interaction relationships that no other
    /// present relationship entails.
    RelationshipsIn {
        frames: Box<Step>,
        object: Option<Box<Step>>,
        specific: bool,
    },
    /// Action classes with a span covering at least one of `frames`.
    ActionsIn {
        frames: Box<Step>,
        exclude: Option<Box<Step>>,
    },
    /// First frame at or after the action's start.
    StartOf(Box<Step>),
    /// Last frame at or before the action's end.
    EndOf(Box<Step>),
    /// Frames covered by the action.
    ActionFrames(Box<Step>),

    Query {
        input: Box<Step>,
        attr: Attr,
    },
    GetFrames {
        anchor: Box<Step>,
        direction: Direction,
    },
    Exists {
        items: Box<Step>,
        item: Box<Step>,
    },
    ObjectRelation {
        frame: Box<Step>,
        object: Box<Step>,
        relationship: Box<Step>,
    },
    ChooseOne {
        items: Box<Step>,
        a: Box<Step>,
        b: Box<Step>,
    },
    /// The first `limit` frames of `items` (in the given order) in which the
    /// person has `relationship` (any interaction if absent) with one of
    /// `objects` (any object if empty).
    Iterate {
        items: Box<Step>,
        relationship: Option<Box<Step>>,
        objects: Vec<Step>,
        limit: Option<usize>,
    },
    Verify {
        input: Box<Step>,
        labels: Labels,
    },
    And(Vec<Step>),
    Xor(Box<Step>, Box<Step>),
    Equals(Box<Step>, Box<Step>),
    Comparative {
        a: Box<Step>,
        b: Box<Step>,
        attr: Attr,
        more: More,
    },
    Superlative {
        items: Box<Step>,
        attr: Attr,
        extremum: Extremum,
    },
    Difference(Box<Step>, Box<Step>),
    Overlap(Box<Step>, Box<Step>),
    ContainedIn(Box<Step>, Box<Step>),
    Sort {
        items: Box<Step>,
        attr: Attr,
        descending: bool,
    },
    Compose {
        role: Role,
        steps: usize,
        body: Box<Step>,
        /// Name of the concept an indirect reference stands for.
        resolves: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Item {
    Object(String),
    Relationship(String),
    Action(String),
    Frame(usize),
}

impl Item {
    pub fn kind(&self) -> ItemKind {
        match self {
            Item::Object(_) => ItemKind::Object,
            Item::Relationship(_) => ItemKind::Relationship,
            Item::Action(_) => ItemKind::Action,
            Item::Frame(_) => ItemKind::Frame,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Item::Object(n) | Item::Relationship(n) | Item::Action(n) => n.clone(),
            Item::Frame(i) => format!("frame {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Item(Item),
    /// Ordered and duplicate-free.
    Items(Vec<Item>),
    Bool(bool),
    Scalar(f64),
    Text(String),
}

impl Value {
    /// Answer text for a program's root value.
    pub fn render(&self) -> String {
        match self {
            Value::Item(i) => i.name(),
            Value::Items(v) => v.iter().map(Item::name).collect::<Vec<_>>().join(", "),
            Value::Bool(true) => "yes".into(),
            Value::Bool(false) => "no".into(),
            Value::Scalar(x) => format!("{x}"),
            Value::Text(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalResult {
    Answer(Value),
    Undefined(String),
    /// At least two distinct candidates satisfied a step that needed one.
    Ambiguous(Vec<Value>),
}

impl EvalResult {
    pub fn answer(&self) -> Option<&Value> {
        match self {
            EvalResult::Answer(v) => Some(v),
            _ => None,
        }
    }

    /// Outcome equality that ignores the wording of Undefined reasons and
    /// the order of Ambiguous candidates, and compares scalars to 1e-9.
    pub fn same_outcome(&self, other: &EvalResult) -> bool {
        match (self, other) {
            (EvalResult::Answer(Value::Scalar(a)), EvalResult::Answer(Value::Scalar(b))) => {
                (a - b).abs() <= 1e-9
            }
            (EvalResult::Answer(a), EvalResult::Answer(b)) => a == b,
            (EvalResult::Undefined(_), EvalResult::Undefined(_)) => true,
            (EvalResult::Ambiguous(a), EvalResult::Ambiguous(b)) => {
                let key = |v: &Vec<Value>| {
                    let mut k: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                    k.sort();
                    k
                };
                key(a) == key(b)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ItemKind {
    Object,
    Relationship,
    Action,
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Item(ItemKind),
    Items(ItemKind),
    Bool,
    Scalar,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    /// Child indices from the root down to the offending step.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?}", self.message, self.path)
    }
}

/// A template-instantiated program.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub template_id: String,
    pub root: Step,
}

impl Program {
    pub fn step_count(&self) -> usize {
        count_steps(&self.root)
    }
}

/// Sum of the declared steps of every composed sub-program.
pub fn count_steps(step: &Step) -> usize {
    let own = match step {
        Step::Compose { steps, .. } => *steps,
        _ => 0,
    };
    own + step.children().into_iter().map(count_steps).sum::<usize>()
}

impl Step {
    pub fn object(name: &str) -> Step {
        Step::Object(name.to_string())
    }
    pub fn relationship(name: &str) -> Step {
        Step::Relationship(name.to_string())
    }
    pub fn action(name: &str) -> Step {
        Step::Action(name.to_string())
    }

    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Step> {
        use Step::*;
        match self {
            Object(_) | Relationship(_) | Action(_) | Bool(_) | Frames | Actions => vec![],
            ObjectsIn {
                frames,
                relationship,
            } => {
                let mut v = vec![frames.as_ref()];
                v.extend(relationship.as_deref());
                v
            }
            RelationshipsIn { frames, object, .. } => {
                let mut v = vec![frames.as_ref()];
                v.extend(object.as_deref());
                v
            }
            ActionsIn { frames, exclude } => {
                let mut v = vec![frames.as_ref()];
                v.extend(exclude.as_deref());
                v
            }
            StartOf(a) | EndOf(a) | ActionFrames(a) => vec![a],
            Query { input, .. } => vec![input],
            GetFrames { anchor, .. } => vec![anchor],
            Exists { items, item } => vec![items, item],
            ObjectRelation {
                frame,
                object,
                relationship,
            } => vec![frame, object, relationship],
            ChooseOne { items, a, b } => vec![items, a, b],
            Iterate {
                items,
                relationship,
                objects,
                ..
            } => {
                let mut v = vec![items.as_ref()];
                v.extend(relationship.as_deref());
                v.extend(objects.iter());
                v
            }
            Verify { input, .. } => vec![input],
            And(xs) => xs.iter().collect(),
            Xor(a, b) | Equals(a, b) | Difference(a, b) | Overlap(a, b) | ContainedIn(a, b) => {
                vec![a, b]
            }
            Comparative { a, b, .. } => vec![a, b],
            Superlative { items, .. } | Sort { items, .. } => vec![items],
            Compose { body, .. } => vec![body],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Step> {
        use Step::*;
        match self {
            Object(_) | Relationship(_) | Action(_) | Bool(_) | Frames | Actions => vec![],
            ObjectsIn {
                frames,
                relationship,
            } => {
                let mut v = vec![frames.as_mut()];
                v.extend(relationship.as_deref_mut());
                v
            }
            RelationshipsIn { frames, object, .. } => {
                let mut v = vec![frames.as_mut()];
                v.extend(object.as_deref_mut());
                v
            }
            ActionsIn { frames, exclude } => {
                let mut v = vec![frames.as_mut()];
                v.extend(exclude.as_deref_mut());
                v
            }
            StartOf(a) | EndOf(a) | ActionFrames(a) => vec![a],
            Query { input, .. } => vec![input],
            GetFrames { anchor, .. } => vec![anchor],
            Exists { items, item } => vec![items, item],
            ObjectRelation {
                frame,
                object,
                relationship,
            } => vec![frame, object, relationship],
            ChooseOne { items, a, b } => vec![items, a, b],
            Iterate {
                items,
                relationship,
                objects,
                ..
            } => {
                let mut v = vec![items.as_mut()];
                v.extend(relationship.as_deref_mut());
                v.extend(objects.iter_mut());
                v
            }
            Verify { input, .. } => vec![input],
            And(xs) => xs.iter_mut().collect(),
            Xor(a, b) | Equals(a, b) | Difference(a, b) | Overlap(a, b) | ContainedIn(a, b) => {
                vec![a, b]
            }
            Comparative { a, b, .. } => vec![a, b],
            Superlative { items, .. } | Sort { items, .. } => vec![items],
            Compose { body, .. } => vec![body],
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Step)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Static kind of the step's value, or the errors that prevent one.
    pub fn kind(&self) -> Result<Kind, Vec<TypeError>> {
        let errors = typecheck(self);
        if errors.is_empty() {
            Ok(infer(self, &mut Vec::new(), &mut Vec::new()).expect("typechecked"))
        } else {
            Err(errors)
        }
    }

    /// Name of the step's constructor, as used in the S-expression form.
    pub fn op(&self) -> &'static str {
        use Step::*;
        match self {
            Object(_) => "object",
            Relationship(_) => "relationship",
            Action(_) => "action",
            Bool(_) => "bool",
            Frames => "frames",
            Actions => "actions",
            ObjectsIn { .. } => "objectsIn",
            RelationshipsIn { .. } => "relationshipsIn",
            ActionsIn { .. } => "actionsIn",
            StartOf(_) => "startOf",
            EndOf(_) => "endOf",
            ActionFrames(_) => "actionFrames",
            Query { .. } => "query",
            GetFrames { .. } => "getFrames",
            Exists { .. } => "exists",
            ObjectRelation { .. } => "objectRelation",
            ChooseOne { .. } => "chooseOne",
            Iterate { .. } => "iterate",
            Verify { .. } => "verify",
            And(_) => "and",
            Xor(..) => "xor",
            Equals(..) => "equals",
            Comparative { .. } => "comparative",
            Superlative { .. } => "superlative",
            Difference(..) => "difference",
            Overlap(..) => "overlap",
            ContainedIn(..) => "containedIn",
            Sort { .. } => "sort",
            Compose { .. } => "compose",
        }
    }
}

/// Every place a child's kind does not fit its parent's signature.
pub fn typecheck(step: &Step) -> Vec<TypeError> {
    let mut errors = Vec::new();
    infer(step, &mut Vec::new(), &mut errors);
    errors
}

fn infer(step: &Step, path: &mut Vec<usize>, errors: &mut Vec<TypeError>) -> Option<Kind> {
    use ItemKind as I;
    use Kind::*;
    use Step as S;

    let kids: Vec<Option<Kind>> = step
        .children()
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            path.push(i);
            let k = infer(c, path, errors);
            path.pop();
            k
        })
        .collect();
    if kids.iter().any(Option::is_none) {
        return None;
    }
    let kids: Vec<Kind> = kids.into_iter().map(Option::unwrap).collect();
    let mut fail = |child: usize, msg: String| {
        let mut p = path.clone();
        p.push(child);
        errors.push(TypeError {
            path: p,
            message: format!("kind-mismatch: {msg}"),
        });
        None
    };
    let want = |k: Kind, expected: Kind| k == expected;

    macro_rules! expect {
        ($i:expr, $k:expr) => {
            if !want(kids[$i], $k) {
                return fail(
                    $i,
                    format!("{} expected {:?}, found {:?}", step.op(), $k, kids[$i]),
                );
            }
        };
    }

    match step {
        S::Object(_) => Some(Item(I::Object)),
        S::Relationship(_) => Some(Item(I::Relationship)),
        S::Action(_) => Some(Item(I::Action)),
        S::Bool(_) => Some(Bool),
        S::Frames => Some(Items(I::Frame)),
        S::Actions => Some(Items(I::Action)),
        S::ObjectsIn { .. } => {
            expect!(0, Items(I::Frame));
            if kids.len() > 1 {
                expect!(1, Item(I::Relationship));
            }
            Some(Items(I::Object))
        }
        S::RelationshipsIn { .. } => {
            expect!(0, Items(I::Frame));
            if kids.len() > 1 {
                expect!(1, Item(I::Object));
            }
            Some(Items(I::Relationship))
        }
        S::ActionsIn { .. } => {
            expect!(0, Items(I::Frame));
            if kids.len() > 1 {
                expect!(1, Item(I::Action));
            }
            Some(Items(I::Action))
        }
        S::StartOf(_) | S::EndOf(_) => {
            expect!(0, Item(I::Action));
            Some(Item(I::Frame))
        }
        S::ActionFrames(_) => {
            expect!(0, Item(I::Action));
            Some(Items(I::Frame))
        }
        S::Query { attr, .. } => {
            let ik = match kids[0] {
                Item(k) | Items(k) => k,
                other => return fail(0, format!("query expected items, found {other:?}")),
            };
            match attr_result(*attr, ik) {
                Some(k) => Some(k),
                None => fail(
                    0,
                    format!("query attribute {attr:?} does not apply to {ik:?}"),
                ),
            }
        }
        S::GetFrames { .. } => {
            expect!(0, Item(I::Frame));
            Some(Items(I::Frame))
        }
        S::Exists { .. } => match kids[0] {
            Items(k) => {
                expect!(1, Item(k));
                Some(Bool)
            }
            other => fail(0, format!("exists expected items, found {other:?}")),
        },
        S::ObjectRelation { .. } => {
            expect!(0, Item(I::Frame));
            expect!(1, Item(I::Object));
            expect!(2, Item(I::Relationship));
            Some(Bool)
        }
        S::ChooseOne { .. } => match kids[0] {
            Items(k) => {
                expect!(1, Item(k));
                expect!(2, Item(k));
                Some(Item(k))
            }
            other => fail(0, format!("chooseOne expected items, found {other:?}")),
        },
        S::Iterate { relationship, .. } => {
            expect!(0, Items(I::Frame));
            let first_obj = 1 + relationship.is_some() as usize;
            if relationship.is_some() {
                expect!(1, Item(I::Relationship));
            }
            for i in first_obj..kids.len() {
                expect!(i, Item(I::Object));
            }
            Some(Items(I::Frame))
        }
        S::Verify { .. } => {
            expect!(0, Bool);
            Some(Text)
        }
        S::And(_) => {
            for i in 0..kids.len() {
                expect!(i, Bool);
            }
            Some(Bool)
        }
        S::Xor(..) => {
            expect!(0, Bool);
            expect!(1, Bool);
            Some(Bool)
        }
        S::Equals(..) => {
            if kids[0] != kids[1] {
                return fail(
                    1,
                    format!("equals operands differ: {:?} vs {:?}", kids[0], kids[1]),
                );
            }
            Some(Bool)
        }
        S::Comparative { attr, .. } => {
            if kids[0] != kids[1] {
                return fail(
                    1,
                    format!(
                        "comparative operands differ: {:?} vs {:?}",
                        kids[0], kids[1]
                    ),
                );
            }
            let ok = match (kids[0], attr) {
                (Item(I::Action), Attr::Start | Attr::End | Attr::Duration | Attr::Time) => true,
                (Item(I::Frame) | Items(I::Frame), Attr::Start | Attr::End | Attr::Time) => true,
                _ => false,
            };
            if !ok {
                return fail(
                    0,
                    format!("comparative by {attr:?} does not apply to {:?}", kids[0]),
                );
            }
            Some(kids[0])
        }
        S::Superlative { attr, .. } => match kids[0] {
            Items(k @ (I::Action | I::Frame))
                if matches!(attr, Attr::Start | Attr::End | Attr::Duration) =>
            {
                Some(Item(k))
            }
            other => fail(
                0,
                format!("superlative by {attr:?} does not apply to {other:?}"),
            ),
        },
        S::Difference(..) => {
            expect!(0, Scalar);
            expect!(1, Scalar);
            Some(Scalar)
        }
        S::Overlap(..) | S::ContainedIn(..) => match kids[0] {
            Items(k) => {
                expect!(1, Items(k));
                Some(Bool)
            }
            other => fail(0, format!("{} expected items, found {other:?}", step.op())),
        },
        S::Sort { attr, .. } => match kids[0] {
            Items(k) if sortable(*attr, k) => Some(Items(k)),
            other => fail(0, format!("sort by {attr:?} does not apply to {other:?}")),
        },
        S::Compose { .. } => Some(kids[0]),
    }
}

fn attr_result(attr: Attr, kind: ItemKind) -> Option<Kind> {
    match (attr, kind) {
        (Attr::Object, ItemKind::Object)
        | (Attr::Relationship, ItemKind::Relationship)
        | (Attr::Action, ItemKind::Action) => Some(Kind::Item(kind)),
        (Attr::Start | Attr::End | Attr::Duration, ItemKind::Action | ItemKind::Frame) => {
            Some(Kind::Scalar)
        }
        _ => None,
    }
}

fn sortable(attr: Attr, kind: ItemKind) -> bool {
    match attr {
        Attr::Object => kind == ItemKind::Object,
        Attr::Relationship => kind == ItemKind::Relationship,
        Attr::Action => kind == ItemKind::Action,
        Attr::Start | Attr::End | Attr::Duration => {
            matches!(kind, ItemKind::Action | ItemKind::Frame)
        }
        Attr::Time => false,
    }
}

impl fmt::Display for Step {
    /// Indented tree dump, one step per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(s: &Step, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let pad = "  ".repeat(depth);
            let label = match s {
                Step::Object(n) | Step::Relationship(n) | Step::Action(n) => {
                    format!("{} {n:?}", s.op())
                }
                Step::Bool(b) => format!("bool {b}"),
                Step::RelationshipsIn { specific: true, .. } => "relationshipsIn specific".into(),
                Step::Query { attr, .. } => format!("query {attr:?}"),
                Step::GetFrames { direction, .. } => format!("getFrames {direction:?}"),
                Step::Iterate { limit, .. } => match limit {
                    Some(n) => format!("iterate limit={n}"),
                    None => "iterate".into(),
                },
                Step::Verify { labels, .. } => format!("verify {labels:?}"),
                Step::Comparative { attr, more, .. } => format!("comparative {attr:?} {more:?}"),
                Step::Superlative { attr, extremum, .. } => {
                    format!("superlative {attr:?} {extremum:?}")
                }
                Step::Sort {
                    attr, descending, ..
                } => {
                    format!("sort {attr:?} {}", if *descending { "desc" } else { "asc" })
                }
                Step::Compose {
                    role,
                    steps,
                    resolves,
                    ..
                } => match resolves {
                    Some(r) => format!("compose {role:?} steps={steps} resolves={r:?}"),
                    None => format!("compose {role:?} steps={steps}"),
                },
                _ => s.op().to_string(),
            };
            writeln!(f, "{pad}{label}")?;
            for c in s.children() {
                go(c, depth + 1, f)?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: Step) -> Box<Step> {
        Box::new(s)
    }

    #[test]
    fn verify_exists_typechecks() {
        let p = Step::Verify {
            input: b(Step::Exists {
                items: b(Step::ObjectsIn {
                    frames: b(Step::Frames),
                    relationship: None,
                }),
                item: b(Step::object("bottle")),
            }),
            labels: Labels::YesNo,
        };
        assert_eq!(typecheck(&p), vec![]);
        assert_eq!(p.kind().unwrap(), Kind::Text);
    }

    #[test]
    fn and_of_item_and_bool_fails_at_child_zero() {
        let p = Step::And(vec![Step::object("bottle"), Step::Bool(true)]);
        let errs = typecheck(&p);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, vec![0]);
        assert!(errs[0].message.starts_with("kind-mismatch"));
    }

    #[test]
    fn difference_of_scalar_and_bool_fails() {
        let scalar = Step::Query {
            input: b(Step::action("standing up")),
            attr: Attr::Duration,
        };
        let p = Step::Difference(b(scalar), b(Step::Bool(false)));
        let errs = typecheck(&p);
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.starts_with("kind-mismatch"));
    }

    #[test]
    fn steps_add_across_compositions() {
        let inner = Step::Compose {
            role: Role::Object,
            steps: 2,
            body: b(Step::object("x")),
            resolves: Some("x".into()),
        };
        let root = Step::Compose {
            role: Role::Template,
            steps: 1,
            body: b(Step::Verify {
                input: b(Step::Exists {
                    items: b(Step::ObjectsIn {
                        frames: b(Step::Frames),
                        relationship: None,
                    }),
                    item: b(inner),
                }),
                labels: Labels::YesNo,
            }),
            resolves: None,
        };
        assert_eq!(count_steps(&root), 3);
    }
}
