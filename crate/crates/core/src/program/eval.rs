//! The interpreter.
//!
//! Conventions shared with the oracle: sources return items sorted (names
//! lexicographically, frames by index); `sort` and `iterate` keep their own
//! order; children evaluate left to right and the first failure wins; ties
//! in `superlative`/`comparative` go to the earliest start, then the
//! smallest name or frame index.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::{Attr, Direction, EvalResult, Extremum, Item, Labels, More, Step, Value};
use crate::graph::{ActionSpan, ObjectInstance, VideoGraph};
use crate::ontology::{Antecedent, Ontology, RelationshipCategory};

type Flow<T> = Result<T, EvalResult>;

pub fn evaluate(step: &Step, graph: &VideoGraph, ontology: &Ontology) -> EvalResult {
    let cx = Cx { graph, ontology };
    match cx.eval(step) {
        Ok(v) => EvalResult::Answer(v),
        Err(e) => e,
    }
}

struct Cx<'a> {
    graph: &'a VideoGraph,
    ontology: &'a Ontology,
}

fn undefined<T>(why: impl Into<String>) -> Flow<T> {
    Err(EvalResult::Undefined(why.into()))
}

impl<'a> Cx<'a> {
    fn interaction(&self, rel: &str) -> bool {
        matches!(
            self.ontology.category(rel),
            Some(RelationshipCategory::Contact | RelationshipCategory::Verb)
        ) && !self.ontology.confusing.contains(rel)
    }

    fn has(&self, inst: &ObjectInstance, rel: Option<&str>) -> bool {
        match rel {
            Some(r) => inst.relationships.contains(r),
            None => inst.relationships.iter().any(|r| self.interaction(r)),
        }
    }

    fn spans(&self, class: &str) -> Vec<&'a ActionSpan> {
        self.graph
            .actions
            .iter()
            .filter(|a| a.class == class)
            .collect()
    }

    fn single_span(&self, class: &str) -> Flow<&'a ActionSpan> {
        match self.spans(class).as_slice() {
            [] => undefined(format!("action {class:?} does not occur")),
            [one] => Ok(one),
            _ => undefined(format!("action {class:?} occurs more than once")),
        }
    }

    fn eval(&self, step: &Step) -> Flow<Value> {
        use Step as S;
        match step {
            S::Object(n) => Ok(Value::Item(Item::Object(n.clone()))),
            S::Relationship(n) => Ok(Value::Item(Item::Relationship(n.clone()))),
            S::Action(n) => Ok(Value::Item(Item::Action(n.clone()))),
            S::Bool(b) => Ok(Value::Bool(*b)),
            S::Frames => Ok(Value::Items(
                (0..self.graph.frames.len()).map(Item::Frame).collect(),
            )),
            S::Actions => {
                let names: BTreeSet<&str> = self
                    .graph
                    .actions
                    .iter()
                    .map(|a| a.class.as_str())
                    .collect();
                Ok(Value::Items(
                    names.into_iter().map(|n| Item::Action(n.into())).collect(),
                ))
            }
            S::ObjectsIn {
                frames,
                relationship,
            } => {
                let frames = self.frames(frames)?;
                let rel = self.opt_name(relationship.as_deref())?;
                let mut found = BTreeSet::new();
                for &i in &frames {
                    for inst in &self.graph.frames[i].objects {
                        if self.has(inst, rel.as_deref()) {
                            found.insert(inst.class.clone());
                        }
                    }
                }
                Ok(Value::Items(found.into_iter().map(Item::Object).collect()))
            }
            S::RelationshipsIn {
                frames,
                object,
                specific,
            } => {
                let frames = self.frames(frames)?;
                let obj = self.opt_name(object.as_deref())?;
                let mut found = BTreeSet::new();
                for &i in &frames {
                    for inst in &self.graph.frames[i].objects {
                        if obj.as_ref().is_some_and(|o| *o != inst.class) {
                            continue;
                        }
                        for r in &inst.relationships {
                            if !*specific || (self.interaction(r) && !self.implied_within(r, inst))
                            {
                                found.insert(r.clone());
                            }
                        }
                    }
                }
                Ok(Value::Items(
                    found.into_iter().map(Item::Relationship).collect(),
                ))
            }
            S::ActionsIn { frames, exclude } => {
                let frames = self.frames(frames)?;
                let exclude = self.opt_name(exclude.as_deref())?;
                let mut found = BTreeSet::new();
                for a in &self.graph.actions {
                    if exclude.as_deref() == Some(a.class.as_str()) {
                        continue;
                    }
                    if frames
                        .iter()
                        .any(|&i| a.covers(self.graph.frames[i].timestamp))
                    {
                        found.insert(a.class.clone());
                    }
                }
                Ok(Value::Items(found.into_iter().map(Item::Action).collect()))
            }
            S::StartOf(a) => {
                let span = self.single_span(&self.name(a)?)?;
                match self
                    .graph
                    .frames
                    .iter()
                    .position(|f| f.timestamp >= span.start)
                {
                    Some(i) => Ok(Value::Item(Item::Frame(i))),
                    None => undefined("no frame at or after the action starts"),
                }
            }
            S::EndOf(a) => {
                let span = self.single_span(&self.name(a)?)?;
                match self
                    .graph
                    .frames
                    .iter()
                    .rposition(|f| f.timestamp <= span.end)
                {
                    Some(i) => Ok(Value::Item(Item::Frame(i))),
                    None => undefined("no frame at or before the action ends"),
                }
            }
            S::ActionFrames(a) => {
                let class = self.name(a)?;
                let spans = self.spans(&class);
                if spans.is_empty() {
                    return undefined(format!("action {class:?} does not occur"));
                }
                let covered = (0..self.graph.frames.len())
                    .filter(|&i| {
                        spans
                            .iter()
                            .any(|s| s.covers(self.graph.frames[i].timestamp))
                    })
                    .map(Item::Frame)
                    .collect();
                Ok(Value::Items(covered))
            }
            S::Query { input, attr } => match self.eval(input)? {
                Value::Item(item) => self.attr(&item, *attr),
                Value::Items(items) => match items.len() {
                    0 => undefined("nothing satisfies the query"),
                    1 => self.attr(&items[0], *attr),
                    _ => Err(EvalResult::Ambiguous(
                        items.into_iter().map(Value::Item).collect(),
                    )),
                },
                other => panic!("query over {other:?}"),
            },
            S::GetFrames { anchor, direction } => {
                let i = self.frame(anchor)?;
                let range: Vec<usize> = match direction {
                    Direction::Before => (0..i).collect(),
                    Direction::After => (i + 1..self.graph.frames.len()).collect(),
                };
                Ok(Value::Items(range.into_iter().map(Item::Frame).collect()))
            }
            S::Exists { items, item } => {
                let items = self.items(items)?;
                let item = self.item(item)?;
                Ok(Value::Bool(items.contains(&item)))
            }
            S::ObjectRelation {
                frame,
                object,
                relationship,
            } => {
                let i = self.frame(frame)?;
                let o = self.name(object)?;
                let r = self.name(relationship)?;
                let holds = self.graph.frames[i]
                    .object(&o)
                    .is_some_and(|inst| inst.relationships.contains(&r));
                Ok(Value::Bool(holds))
            }
            S::ChooseOne { items, a, b } => {
                let items = self.items(items)?;
                let a = self.item(a)?;
                let b = self.item(b)?;
                match (items.contains(&a), items.contains(&b)) {
                    (true, true) if a != b => {
                        Err(EvalResult::Ambiguous(vec![Value::Item(a), Value::Item(b)]))
                    }
                    (true, _) => Ok(Value::Item(a)),
                    (false, true) => Ok(Value::Item(b)),
                    (false, false) => undefined("neither option is present"),
                }
            }
            S::Iterate {
                items,
                relationship,
                objects,
                limit,
            } => {
                let frames = self.frames(items)?;
                let rel = self.opt_name(relationship.as_deref())?;
                let mut wanted = BTreeSet::new();
                for o in objects {
                    wanted.insert(self.name(o)?);
                }
                let mut out = Vec::new();
                for i in frames {
                    if limit.is_some_and(|n| out.len() >= n) {
                        break;
                    }
                    let hit = self.graph.frames[i].objects.iter().any(|inst| {
                        (wanted.is_empty() || wanted.contains(&inst.class))
                            && self.has(inst, rel.as_deref())
                    });
                    if hit {
                        out.push(Item::Frame(i));
                    }
                }
                Ok(Value::Items(out))
            }
            S::Verify { input, labels } => {
                let b = self.bool(input)?;
                let text = match (labels, b) {
                    (Labels::YesNo, true) => "yes",
                    (Labels::YesNo, false) => "no",
                    (Labels::BeforeAfter, true) => "before",
                    (Labels::BeforeAfter, false) => "after",
                };
                Ok(Value::Text(text.into()))
            }
            S::And(xs) => {
                let mut all = true;
                for x in xs {
                    all &= self.bool(x)?;
                }
                Ok(Value::Bool(all))
            }
            S::Xor(a, b) => {
                let a = self.bool(a)?;
                let b = self.bool(b)?;
                Ok(Value::Bool(a != b))
            }
            S::Equals(a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                Ok(Value::Bool(values_equal(&a, &b)))
            }
            S::Comparative { a, b, attr, more } => {
                let va = self.eval(a)?;
                let vb = self.eval(b)?;
                let a_wins = if *attr == Attr::Time {
                    let (sa, ea) = self.interval(&va)?;
                    let (sb, eb) = self.interval(&vb)?;
                    let a_first = if ea < sb {
                        true
                    } else if sa > eb {
                        false
                    } else {
                        return undefined("intervals overlap");
                    };
                    a_first == (*more == More::Less)
                } else {
                    let xa = self.scalar_of(&va, *attr)?;
                    let xb = self.scalar_of(&vb, *attr)?;
                    match xa.total_cmp(&xb) {
                        Ordering::Greater => *more == More::More,
                        Ordering::Less => *more == More::Less,
                        Ordering::Equal => self.tie_key(&va)? <= self.tie_key(&vb)?,
                    }
                };
                Ok(if a_wins { va } else { vb })
            }
            S::Superlative {
                items,
                attr,
                extremum,
            } => {
                let items = self.items(items)?;
                let mut best: Option<(f64, (f64, String), Item)> = None;
                for it in items {
                    let x = self.attr_scalar(&it, *attr)?;
                    let tk = self.item_tie_key(&it)?;
                    let better = match &best {
                        None => true,
                        Some((bx, btk, _)) => match x.total_cmp(bx) {
                            Ordering::Greater => *extremum == Extremum::Most,
                            Ordering::Less => *extremum == Extremum::Least,
                            Ordering::Equal => tie_less(&tk, btk),
                        },
                    };
                    if better {
                        best = Some((x, tk, it));
                    }
                }
                match best {
                    Some((_, _, it)) => Ok(Value::Item(it)),
                    None => undefined("superlative over nothing"),
                }
            }
            S::Difference(a, b) => {
                let a = self.scalar(a)?;
                let b = self.scalar(b)?;
                Ok(Value::Scalar(a - b))
            }
            S::Overlap(a, b) => {
                let a = self.items(a)?;
                let b = self.items(b)?;
                Ok(Value::Bool(a.iter().any(|x| b.contains(x))))
            }
            S::ContainedIn(a, b) => {
                let a = self.items(a)?;
                let b = self.items(b)?;
                Ok(Value::Bool(a.iter().all(|x| b.contains(x))))
            }
            S::Sort {
                items,
                attr,
                descending,
            } => {
                let items = self.items(items)?;
                let mut keyed = Vec::with_capacity(items.len());
                for it in items {
                    let key = self.sort_key(&it, *attr)?;
                    let tk = self.item_tie_key(&it)?;
                    keyed.push((key, tk, it));
                }
                // ascending by key; among equal keys the superlative winner
                // goes last
                keyed.sort_by(|x, y| {
                    x.0.cmp_key(&y.0).then_with(|| {
                        if tie_less(&x.1, &y.1) {
                            Ordering::Greater
                        } else if tie_less(&y.1, &x.1) {
                            Ordering::Less
                        } else {
                            Ordering::Equal
                        }
                    })
                });
                let mut out: Vec<Item> = keyed.into_iter().map(|(_, _, it)| it).collect();
                if *descending {
                    out.reverse();
                }
                Ok(Value::Items(out))
            }
            S::Compose { body, .. } => self.eval(body),
        }
    }

    fn implied_within(&self, rel: &str, inst: &ObjectInstance) -> bool {
        self.ontology
            .entailments
            .iter()
            .any(|e| match &e.antecedent {
                Antecedent::Relationship(src) => {
                    src != rel
                        && inst.relationships.contains(src)
                        && e.consequents.iter().any(|c| c == rel)
                }
                Antecedent::Action(_) => false,
            })
    }

    fn name(&self, step: &Step) -> Flow<String> {
        Ok(self.item(step)?.name())
    }

    fn opt_name(&self, step: Option<&Step>) -> Flow<Option<String>> {
        step.map(|s| self.name(s)).transpose()
    }

    fn item(&self, step: &Step) -> Flow<Item> {
        match self.eval(step)? {
            Value::Item(i) => Ok(i),
            other => panic!("expected an item, got {other:?}"),
        }
    }

    fn items(&self, step: &Step) -> Flow<Vec<Item>> {
        match self.eval(step)? {
            Value::Items(v) => Ok(v),
            other => panic!("expected items, got {other:?}"),
        }
    }

    fn frame(&self, step: &Step) -> Flow<usize> {
        match self.item(step)? {
            Item::Frame(i) => Ok(i),
            other => panic!("expected a frame, got {other:?}"),
        }
    }

    fn frames(&self, step: &Step) -> Flow<Vec<usize>> {
        Ok(self
            .items(step)?
            .into_iter()
            .map(|i| match i {
                Item::Frame(i) => i,
                other => panic!("expected frames, got {other:?}"),
            })
            .collect())
    }

    fn bool(&self, step: &Step) -> Flow<bool> {
        match self.eval(step)? {
            Value::Bool(b) => Ok(b),
            other => panic!("expected a boolean, got {other:?}"),
        }
    }

    fn scalar(&self, step: &Step) -> Flow<f64> {
        match self.eval(step)? {
            Value::Scalar(x) => Ok(x),
            other => panic!("expected a scalar, got {other:?}"),
        }
    }

    fn attr(&self, item: &Item, attr: Attr) -> Flow<Value> {
        match attr {
            Attr::Object | Attr::Relationship | Attr::Action => Ok(Value::Item(item.clone())),
            _ => Ok(Value::Scalar(self.attr_scalar(item, attr)?)),
        }
    }

    /// Start, end or duration of an action class (aggregated over its spans)
    /// or a frame.
    fn attr_scalar(&self, item: &Item, attr: Attr) -> Flow<f64> {
        match item {
            Item::Frame(i) => {
                let ts = self.graph.frames[*i].timestamp;
                Ok(if attr == Attr::Duration { 0.0 } else { ts })
            }
            Item::Action(c) => {
                let spans = self.spans(c);
                if spans.is_empty() {
                    return undefined(format!("action {c:?} does not occur"));
                }
                Ok(match attr {
                    Attr::Start => spans.iter().map(|s| s.start).fold(f64::INFINITY, f64::min),
                    Attr::End => spans
                        .iter()
                        .map(|s| s.end)
                        .fold(f64::NEG_INFINITY, f64::max),
                    Attr::Duration => spans.iter().map(|s| s.length()).sum(),
                    other => panic!("no scalar {other:?} for actions"),
                })
            }
            other => panic!("no scalar attribute for {other:?}"),
        }
    }

    fn scalar_of(&self, v: &Value, attr: Attr) -> Flow<f64> {
        match v {
            Value::Item(i) => self.attr_scalar(i, attr),
            Value::Items(_) => {
                let (s, e) = self.interval(v)?;
                Ok(if attr == Attr::End { e } else { s })
            }
            other => panic!("no scalar for {other:?}"),
        }
    }

    /// Time interval of a single-span action, a frame, or a set of frames.
    fn interval(&self, v: &Value) -> Flow<(f64, f64)> {
        match v {
            Value::Item(Item::Action(c)) => {
                let s = self.single_span(c)?;
                Ok((s.start, s.end))
            }
            Value::Item(Item::Frame(i)) => {
                let ts = self.graph.frames[*i].timestamp;
                Ok((ts, ts))
            }
            Value::Items(items) => {
                if items.is_empty() {
                    return undefined("no frames to place in time");
                }
                let ts: Vec<f64> = items
                    .iter()
                    .map(|i| match i {
                        Item::Frame(i) => self.graph.frames[*i].timestamp,
                        other => panic!("interval of {other:?}"),
                    })
                    .collect();
                let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((lo, hi))
            }
            other => panic!("interval of {other:?}"),
        }
    }

    fn item_tie_key(&self, item: &Item) -> Flow<(f64, String)> {
        match item {
            Item::Frame(i) => Ok((self.graph.frames[*i].timestamp, format!("{i:020}"))),
            Item::Action(c) => Ok((self.attr_scalar(item, Attr::Start)?, c.clone())),
            other => Ok((0.0, other.name())),
        }
    }

    fn tie_key(&self, v: &Value) -> Flow<(f64, String)> {
        match v {
            Value::Item(i) => self.item_tie_key(i),
            Value::Items(_) => Ok((self.interval(v)?.0, String::new())),
            other => panic!("tie key of {other:?}"),
        }
    }

    fn sort_key(&self, item: &Item, attr: Attr) -> Flow<SortKey> {
        Ok(match attr {
            Attr::Object | Attr::Relationship | Attr::Action => SortKey::Name(item.name()),
            _ => SortKey::Num(self.attr_scalar(item, attr)?),
        })
    }
}

fn tie_less(a: &(f64, String), b: &(f64, String)) -> bool {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)) == Ordering::Less
}

enum SortKey {
    Num(f64),
    Name(String),
}

impl SortKey {
    fn cmp_key(&self, other: &SortKey) -> Ordering {
        match (self, other) {
            (SortKey::Num(a), SortKey::Num(b)) => a.total_cmp(b),
            (SortKey::Name(a), SortKey::Name(b)) => a.cmp(b),
            _ => Ordering::Equal,
        }
    }
}

/// Item lists compare as sets.
pub(super) fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Items(x), Value::Items(y)) => x.len() == y.len() && x.iter().all(|i| y.contains(i)),
        _ => a == b,
    }
}
