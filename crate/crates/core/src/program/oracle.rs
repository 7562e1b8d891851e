//! Reference evaluator used to cross-check the interpreter.
//!
//! The graph is flattened into a table of `(frame, object, relationship)`
//! tuples and a table of action spans, and every step is answered by a full
//! scan of those tables. Nothing is indexed and nothing short-circuits, so
//! it is slow, and only accepts small graphs.

use std::cmp::Ordering;

use super::{Attr, Direction, EvalResult, Extremum, Item, Labels, More, Step, Value};
use crate::error::{Error, Result};
use crate::graph::VideoGraph;
use crate::ontology::{Antecedent, Ontology, RelationshipCategory};

pub const ORACLE_FRAME_LIMIT: usize = 50;

struct Tuple {
    frame: usize,
    object: String,
    relationship: Option<String>,
}

struct Span {
    class: String,
    start: f64,
    end: f64,
}

struct Tables<'a> {
    times: Vec<f64>,
    tuples: Vec<Tuple>,
    spans: Vec<Span>,
    ontology: &'a Ontology,
}

type R<T> = std::result::Result<T, EvalResult>;

pub fn brute_force_oracle(
    step: &Step,
    graph: &VideoGraph,
    ontology: &Ontology,
) -> Result<EvalResult> {
    if graph.frames.len() > ORACLE_FRAME_LIMIT {
        return Err(Error::OracleSizeGuard {
            frames: graph.frames.len(),
            limit: ORACLE_FRAME_LIMIT,
        });
    }
    let mut tuples = Vec::new();
    for (f, frame) in graph.frames.iter().enumerate() {
        for inst in &frame.objects {
            tuples.push(Tuple {
                frame: f,
                object: inst.class.clone(),
                relationship: None,
            });
            for r in &inst.relationships {
                tuples.push(Tuple {
                    frame: f,
                    object: inst.class.clone(),
                    relationship: Some(r.clone()),
                });
            }
        }
    }
    let t = Tables {
        times: graph.frames.iter().map(|f| f.timestamp).collect(),
        tuples,
        spans: graph
            .actions
            .iter()
            .map(|a| Span {
                class: a.class.clone(),
                start: a.start,
                end: a.end,
            })
            .collect(),
        ontology,
    };
    Ok(match t.run(step) {
        Ok(v) => EvalResult::Answer(v),
        Err(e) => e,
    })
}

fn undef<T>(why: &str) -> R<T> {
    Err(EvalResult::Undefined(why.to_string()))
}

fn sorted_names(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v.dedup();
    v
}

impl Tables<'_> {
    fn is_interaction(&self, rel: &str) -> bool {
        let cat = self.ontology.relationships.get(rel);
        let informative = !self.ontology.confusing.iter().any(|c| c == rel);
        informative
            && (cat == Some(&RelationshipCategory::Contact)
                || cat == Some(&RelationshipCategory::Verb))
    }

    fn matches(&self, t: &Tuple, rel: &Option<String>) -> bool {
        match (&t.relationship, rel) {
            (Some(r), Some(want)) => r == want,
            (Some(r), None) => self.is_interaction(r),
            (None, _) => false,
        }
    }

    fn occurrences(&self, class: &str) -> Vec<&Span> {
        let mut v = Vec::new();
        for s in &self.spans {
            if s.class == class {
                v.push(s);
            }
        }
        v
    }

    fn only_occurrence(&self, class: &str) -> R<&Span> {
        let occ = self.occurrences(class);
        if occ.is_empty() {
            return undef("absent action");
        }
        if occ.len() > 1 {
            return undef("repeated action");
        }
        Ok(occ[0])
    }

    fn run(&self, step: &Step) -> R<Value> {
        use Step as S;
        Ok(match step {
            S::Object(n) => Value::Item(Item::Object(n.clone())),
            S::Relationship(n) => Value::Item(Item::Relationship(n.clone())),
            S::Action(n) => Value::Item(Item::Action(n.clone())),
            S::Bool(b) => Value::Bool(*b),
            S::Frames => Value::Items(
                self.times
                    .iter()
                    .enumerate()
                    .map(|(i, _)| Item::Frame(i))
                    .collect(),
            ),
            S::Actions => Value::Items(
                sorted_names(self.spans.iter().map(|s| s.class.clone()).collect())
                    .into_iter()
                    .map(Item::Action)
                    .collect(),
            ),
            S::ObjectsIn {
                frames,
                relationship,
            } => {
                let fs = self.frame_list(frames)?;
                let rel = self.maybe_name(relationship.as_deref())?;
                let mut names = Vec::new();
                for t in &self.tuples {
                    if fs.contains(&t.frame) && self.matches(t, &rel) {
                        names.push(t.object.clone());
                    }
                }
                Value::Items(sorted_names(names).into_iter().map(Item::Object).collect())
            }
            S::RelationshipsIn {
                frames,
                object,
                specific,
            } => {
                let fs = self.frame_list(frames)?;
                let obj = self.maybe_name(object.as_deref())?;
                let mut names = Vec::new();
                for t in &self.tuples {
                    let Some(r) = &t.relationship else { continue };
                    if !fs.contains(&t.frame) || obj.as_ref().is_some_and(|o| o != &t.object) {
                        continue;
                    }
                    if *specific && (!self.is_interaction(r) || self.entailed_by_sibling(t, r)) {
                        continue;
                    }
                    names.push(r.clone());
                }
                Value::Items(
                    sorted_names(names)
                        .into_iter()
                        .map(Item::Relationship)
                        .collect(),
                )
            }
            S::ActionsIn { frames, exclude } => {
                let fs = self.frame_list(frames)?;
                let ex = self.maybe_name(exclude.as_deref())?;
                let mut names = Vec::new();
                for s in &self.spans {
                    for &f in &fs {
                        let ts = self.times[f];
                        if s.start <= ts && ts <= s.end && ex.as_ref() != Some(&s.class) {
                            names.push(s.class.clone());
                        }
                    }
                }
                Value::Items(sorted_names(names).into_iter().map(Item::Action).collect())
            }
            S::StartOf(a) => {
                let span = self.only_occurrence(&self.name_of(a)?)?;
                let mut hits: Vec<usize> = Vec::new();
                for (i, ts) in self.times.iter().enumerate() {
                    if *ts >= span.start {
                        hits.push(i);
                    }
                }
                match hits.iter().min() {
                    Some(&i) => Value::Item(Item::Frame(i)),
                    None => return undef("nothing after start"),
                }
            }
            S::EndOf(a) => {
                let span = self.only_occurrence(&self.name_of(a)?)?;
                let mut hits: Vec<usize> = Vec::new();
                for (i, ts) in self.times.iter().enumerate() {
                    if *ts <= span.end {
                        hits.push(i);
                    }
                }
                match hits.iter().max() {
                    Some(&i) => Value::Item(Item::Frame(i)),
                    None => return undef("nothing before end"),
                }
            }
            S::ActionFrames(a) => {
                let class = self.name_of(a)?;
                let occ = self.occurrences(&class);
                if occ.is_empty() {
                    return undef("absent action");
                }
                let mut fs = Vec::new();
                for (i, ts) in self.times.iter().enumerate() {
                    let mut inside = false;
                    for s in &occ {
                        inside |= s.start <= *ts && *ts <= s.end;
                    }
                    if inside {
                        fs.push(Item::Frame(i));
                    }
                }
                Value::Items(fs)
            }
            S::Query { input, attr } => {
                let v = self.run(input)?;
                let single = match v {
                    Value::Item(i) => i,
                    Value::Items(list) => {
                        if list.len() > 1 {
                            return Err(EvalResult::Ambiguous(
                                list.into_iter().map(Value::Item).collect(),
                            ));
                        }
                        match list.into_iter().next() {
                            Some(i) => i,
                            None => return undef("empty query"),
                        }
                    }
                    _ => unreachable!("typechecked"),
                };
                match attr {
                    Attr::Object | Attr::Relationship | Attr::Action => Value::Item(single),
                    _ => Value::Scalar(self.measure(&single, *attr)?),
                }
            }
            S::GetFrames { anchor, direction } => {
                let Value::Item(Item::Frame(k)) = self.run(anchor)? else {
                    unreachable!()
                };
                let mut fs = Vec::new();
                for i in 0..self.times.len() {
                    let keep = match direction {
                        Direction::Before => i < k,
                        Direction::After => i > k,
                    };
                    if keep {
                        fs.push(Item::Frame(i));
                    }
                }
                Value::Items(fs)
            }
            S::Exists { items, item } => {
                let list = self.list(items)?;
                let x = self.single(item)?;
                let mut found = false;
                for i in &list {
                    found |= *i == x;
                }
                Value::Bool(found)
            }
            S::ObjectRelation {
                frame,
                object,
                relationship,
            } => {
                let Item::Frame(f) = self.single(frame)? else {
                    unreachable!()
                };
                let o = self.name_of(object)?;
                let r = self.name_of(relationship)?;
                let mut found = false;
                for t in &self.tuples {
                    found |= t.frame == f
                        && t.object == o
                        && t.relationship.as_deref() == Some(r.as_str());
                }
                Value::Bool(found)
            }
            S::ChooseOne { items, a, b } => {
                let list = self.list(items)?;
                let a = self.single(a)?;
                let b = self.single(b)?;
                let present: Vec<&Item> =
                    [&a, &b].into_iter().filter(|x| list.contains(x)).collect();
                match present.as_slice() {
                    [] => return undef("neither"),
                    [one] => Value::Item((*one).clone()),
                    [x, y] if x == y => Value::Item((*x).clone()),
                    _ => return Err(EvalResult::Ambiguous(vec![Value::Item(a), Value::Item(b)])),
                }
            }
            S::Iterate {
                items,
                relationship,
                objects,
                limit,
            } => {
                let fs = self.frame_list(items)?;
                let rel = self.maybe_name(relationship.as_deref())?;
                let mut wanted = Vec::new();
                for o in objects {
                    wanted.push(self.name_of(o)?);
                }
                let mut passing = Vec::new();
                for f in fs {
                    let mut ok = false;
                    for t in &self.tuples {
                        if t.frame == f
                            && (wanted.is_empty() || wanted.contains(&t.object))
                            && self.matches(t, &rel)
                        {
                            ok = true;
                        }
                    }
                    if ok {
                        passing.push(Item::Frame(f));
                    }
                }
                if let Some(n) = limit {
                    passing.truncate(*n);
                }
                Value::Items(passing)
            }
            S::Verify { input, labels } => {
                let Value::Bool(b) = self.run(input)? else {
                    unreachable!()
                };
                Value::Text(
                    match labels {
                        Labels::YesNo => ["no", "yes"][b as usize],
                        Labels::BeforeAfter => ["after", "before"][b as usize],
                    }
                    .to_string(),
                )
            }
            S::And(xs) => {
                let mut vals = Vec::new();
                for x in xs {
                    let Value::Bool(b) = self.run(x)? else {
                        unreachable!()
                    };
                    vals.push(b);
                }
                Value::Bool(!vals.contains(&false))
            }
            S::Xor(a, b) => {
                let Value::Bool(a) = self.run(a)? else {
                    unreachable!()
                };
                let Value::Bool(b) = self.run(b)? else {
                    unreachable!()
                };
                Value::Bool((a as u8 + b as u8) == 1)
            }
            S::Equals(a, b) => {
                let a = self.run(a)?;
                let b = self.run(b)?;
                Value::Bool(match (&a, &b) {
                    (Value::Items(x), Value::Items(y)) => {
                        let mut x: Vec<String> = x.iter().map(|i| format!("{i:?}")).collect();
                        let mut y: Vec<String> = y.iter().map(|i| format!("{i:?}")).collect();
                        x.sort();
                        y.sort();
                        x == y
                    }
                    _ => a == b,
                })
            }
            S::Comparative { a, b, attr, more } => {
                let va = self.run(a)?;
                let vb = self.run(b)?;
                if *attr == Attr::Time {
                    let (sa, ea) = self.span_of(&va)?;
                    let (sb, eb) = self.span_of(&vb)?;
                    let a_before = ea < sb;
                    let a_after = sa > eb;
                    if !a_before && !a_after {
                        return undef("overlap");
                    }
                    let pick_a = match more {
                        More::Less => a_before,
                        More::More => a_after,
                    };
                    if pick_a {
                        va
                    } else {
                        vb
                    }
                } else {
                    let xa = self.measure_value(&va, *attr)?;
                    let xb = self.measure_value(&vb, *attr)?;
                    let pick_a = if xa == xb {
                        let ka = self.tiebreak_value(&va)?;
                        let kb = self.tiebreak_value(&vb)?;
                        !(tb_cmp(&kb, &ka) == Ordering::Less)
                    } else {
                        (xa > xb) == (*more == More::More)
                    };
                    if pick_a {
                        va
                    } else {
                        vb
                    }
                }
            }
            S::Superlative {
                items,
                attr,
                extremum,
            } => {
                let list = self.list(items)?;
                if list.is_empty() {
                    return undef("empty superlative");
                }
                let mut scored = Vec::new();
                for it in list {
                    let x = self.measure(&it, *attr)?;
                    let k = self.tiebreak(&it)?;
                    scored.push((x, k, it));
                }
                scored.sort_by(|p, q| {
                    let primary = match extremum {
                        Extremum::Most => q.0.partial_cmp(&p.0).unwrap(),
                        Extremum::Least => p.0.partial_cmp(&q.0).unwrap(),
                    };
                    primary.then_with(|| tb_cmp(&p.1, &q.1))
                });
                Value::Item(scored.swap_remove(0).2)
            }
            S::Difference(a, b) => {
                let Value::Scalar(a) = self.run(a)? else {
                    unreachable!()
                };
                let Value::Scalar(b) = self.run(b)? else {
                    unreachable!()
                };
                Value::Scalar(a - b)
            }
            S::Overlap(a, b) => {
                let a = self.list(a)?;
                let b = self.list(b)?;
                let mut any = false;
                for x in &a {
                    for y in &b {
                        any |= x == y;
                    }
                }
                Value::Bool(any)
            }
            S::ContainedIn(a, b) => {
                let a = self.list(a)?;
                let b = self.list(b)?;
                let mut missing = 0;
                for x in &a {
                    if !b.iter().any(|y| y == x) {
                        missing += 1;
                    }
                }
                Value::Bool(missing == 0)
            }
            S::Sort {
                items,
                attr,
                descending,
            } => {
                let list = self.list(items)?;
                let mut scored = Vec::new();
                for it in list {
                    let k = self.tiebreak(&it)?;
                    let key = match attr {
                        Attr::Object | Attr::Relationship | Attr::Action => (0.0, it.name()),
                        _ => (self.measure(&it, *attr)?, String::new()),
                    };
                    scored.push((key, k, it));
                }
                scored.sort_by(|p, q| {
                    p.0 .0
                        .partial_cmp(&q.0 .0)
                        .unwrap()
                        .then_with(|| p.0 .1.cmp(&q.0 .1))
                        .then_with(|| tb_cmp(&q.1, &p.1))
                });
                if *descending {
                    scored.reverse();
                }
                Value::Items(scored.into_iter().map(|s| s.2).collect())
            }
            S::Compose { body, .. } => self.run(body)?,
        })
    }

    fn entailed_by_sibling(&self, t: &Tuple, rel: &str) -> bool {
        for other in &self.tuples {
            let Some(src) = &other.relationship else {
                continue;
            };
            if other.frame != t.frame || other.object != t.object || src == rel {
                continue;
            }
            for e in &self.ontology.entailments {
                if e.antecedent == Antecedent::Relationship(src.clone())
                    && e.consequents.iter().any(|c| c == rel)
                {
                    return true;
                }
            }
        }
        false
    }

    fn single(&self, step: &Step) -> R<Item> {
        match self.run(step)? {
            Value::Item(i) => Ok(i),
            _ => unreachable!("typechecked"),
        }
    }

    fn list(&self, step: &Step) -> R<Vec<Item>> {
        match self.run(step)? {
            Value::Items(v) => Ok(v),
            _ => unreachable!("typechecked"),
        }
    }

    fn name_of(&self, step: &Step) -> R<String> {
        Ok(self.single(step)?.name())
    }

    fn maybe_name(&self, step: Option<&Step>) -> R<Option<String>> {
        match step {
            Some(s) => Ok(Some(self.name_of(s)?)),
            None => Ok(None),
        }
    }

    fn frame_list(&self, step: &Step) -> R<Vec<usize>> {
        let mut out = Vec::new();
        for i in self.list(step)? {
            let Item::Frame(f) = i else { unreachable!() };
            out.push(f);
        }
        Ok(out)
    }

    fn measure(&self, item: &Item, attr: Attr) -> R<f64> {
        match item {
            Item::Frame(f) => Ok(match attr {
                Attr::Duration => 0.0,
                _ => self.times[*f],
            }),
            Item::Action(c) => {
                let occ = self.occurrences(c);
                if occ.is_empty() {
                    return undef("absent action");
                }
                let mut starts: Vec<f64> = occ.iter().map(|s| s.start).collect();
                let mut ends: Vec<f64> = occ.iter().map(|s| s.end).collect();
                starts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ends.sort_by(|a, b| b.partial_cmp(a).unwrap());
                Ok(match attr {
                    Attr::Start => starts[0],
                    Attr::End => ends[0],
                    _ => {
                        let mut total = 0.0;
                        for s in &occ {
                            total += s.end - s.start;
                        }
                        total
                    }
                })
            }
            _ => unreachable!("typechecked"),
        }
    }

    fn measure_value(&self, v: &Value, attr: Attr) -> R<f64> {
        match v {
            Value::Item(i) => self.measure(i, attr),
            Value::Items(_) => {
                let (s, e) = self.span_of(v)?;
                Ok(if attr == Attr::End { e } else { s })
            }
            _ => unreachable!(),
        }
    }

    fn span_of(&self, v: &Value) -> R<(f64, f64)> {
        match v {
            Value::Item(Item::Action(c)) => {
                let s = self.only_occurrence(c)?;
                Ok((s.start, s.end))
            }
            Value::Item(Item::Frame(f)) => Ok((self.times[*f], self.times[*f])),
            Value::Items(list) => {
                let mut ts: Vec<f64> = Vec::new();
                for i in list {
                    let Item::Frame(f) = i else { unreachable!() };
                    ts.push(self.times[*f]);
                }
                ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                match (ts.first(), ts.last()) {
                    (Some(a), Some(b)) => Ok((*a, *b)),
                    _ => undef("no frames"),
                }
            }
            _ => unreachable!(),
        }
    }

    fn tiebreak(&self, item: &Item) -> R<(f64, String)> {
        Ok(match item {
            Item::Frame(f) => (self.times[*f], format!("{f:020}")),
            Item::Action(c) => (self.measure(item, Attr::Start)?, c.clone()),
            _ => (0.0, item.name()),
        })
    }

    fn tiebreak_value(&self, v: &Value) -> R<(f64, String)> {
        match v {
            Value::Item(i) => self.tiebreak(i),
            Value::Items(_) => Ok((self.span_of(v)?.0, String::new())),
            _ => unreachable!(),
        }
    }
}

fn tb_cmp(a: &(f64, String), b: &(f64, String)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1))
}
