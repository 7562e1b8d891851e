mod common;

use common::{b, Pool, ProgramGen};
use compqa::program::{
    brute_force_oracle, evaluate, typecheck, Attr, Direction, EvalResult, Extremum, Item, More,
    Step, Value,
};
use compqa::synth::{synth_graph, SynthParams};
use compqa::{ActionSpan, Frame, ObjectInstance, Ontology, VideoGraph};
use proptest::prelude::*;

fn frame(ts: f64, objs: &[(&str, &[&str])]) -> Frame {
    Frame {
        timestamp: ts,
        objects: objs
            .iter()
            .map(|(c, r)| ObjectInstance::new(*c, r.iter().copied()))
            .collect(),
    }
}

fn both(step: &Step, g: &VideoGraph, o: &Ontology) -> EvalResult {
    let fast = evaluate(step, g, o);
    let slow = brute_force_oracle(step, g, o).unwrap();
    assert!(
        fast.same_outcome(&slow),
        "{step}\nfast {fast:?}\nslow {slow:?}"
    );
    fast
}

fn objects_in(frames: Step, rel: Option<&str>) -> Step {
    Step::ObjectsIn {
        frames: b(frames),
        relationship: rel.map(|r| b(Step::relationship(r))),
    }
}

/// Phone put away at 4-6 s; bottle held in the later frames.
fn kitchen() -> VideoGraph {
    let mut g = VideoGraph::new("k", 12.0);
    g.frames = vec![
        frame(
            1.0,
            &[
                ("phone", &["holding", "touching"]),
                ("table", &["in front of"]),
            ],
        ),
        frame(5.0, &[("phone", &["touching"])]),
        frame(
            8.0,
            &[
                ("bottle", &["holding", "touching"]),
                ("table", &["in front of"]),
            ],
        ),
        frame(10.0, &[("bottle", &["holding"])]),
    ];
    g.actions = vec![
        ActionSpan::new("holding a phone", 0.0, 4.0),
        ActionSpan::new("putting a phone somewhere", 4.0, 6.0),
        ActionSpan::new("holding a bottle", 7.5, 11.0),
    ];
    g
}

#[test]
fn exists_bottle_is_true() {
    let o = Ontology::desk();
    let p = Step::Exists {
        items: b(objects_in(Step::Frames, None)),
        item: b(Step::object("bottle")),
    };
    assert_eq!(
        both(&p, &kitchen(), &o),
        EvalResult::Answer(Value::Bool(true))
    );
}

#[test]
fn xor_of_two_trues_is_false() {
    let o = Ontology::desk();
    let p = Step::Xor(b(Step::Bool(true)), b(Step::Bool(true)));
    assert_eq!(
        both(&p, &kitchen(), &o),
        EvalResult::Answer(Value::Bool(false))
    );
}

#[test]
fn longest_span_wins_superlative() {
    let o = Ontology::desk();
    let mut g = VideoGraph::new("d", 12.0);
    g.frames = vec![frame(1.0, &[]), frame(3.0, &[]), frame(8.0, &[])];
    g.actions = vec![
        ActionSpan::new("standing up", 0.0, 10.0),
        ActionSpan::new("sitting down", 2.0, 4.0),
    ];
    let p = Step::Superlative {
        items: b(Step::Actions),
        attr: Attr::Duration,
        extremum: Extremum::Most,
    };
    assert_eq!(
        both(&p, &g, &o),
        EvalResult::Answer(Value::Item(Item::Action("standing up".into())))
    );
}

#[test]
fn held_after_putting_phone_away() {
    let o = Ontology::desk();
    let g = kitchen();
    let p = Step::Query {
        input: b(objects_in(
            Step::GetFrames {
                anchor: b(Step::EndOf(b(Step::action("putting a phone somewhere")))),
                direction: Direction::After,
            },
            Some("holding"),
        )),
        attr: Attr::Object,
    };
    // Expected answer by a direct scan of frames after the span end.
    let end = g.actions[1].end;
    let mut held: Vec<&str> = g
        .frames
        .iter()
        .filter(|f| f.timestamp > end)
        .flat_map(|f| f.objects.iter())
        .filter(|i| i.relationships.contains("holding"))
        .map(|i| i.class.as_str())
        .collect();
    held.dedup();
    assert_eq!(held, vec!["bottle"]);
    assert_eq!(
        both(&p, &g, &o),
        EvalResult::Answer(Value::Item(Item::Object("bottle".into())))
    );
}

#[test]
fn two_held_objects_are_ambiguous() {
    let o = Ontology::desk();
    let mut g = kitchen();
    g.frames[3]
        .objects
        .push(ObjectInstance::new("cup", ["holding"]));
    let p = Step::Query {
        input: b(objects_in(
            Step::GetFrames {
                anchor: b(Step::EndOf(b(Step::action("putting a phone somewhere")))),
                direction: Direction::After,
            },
            Some("holding"),
        )),
        attr: Attr::Object,
    };
    match both(&p, &g, &o) {
        EvalResult::Ambiguous(c) => assert_eq!(c.len(), 2),
        other => panic!("expected ambiguity, got {other:?}"),
    }
}

#[test]
fn empty_graph_has_nothing() {
    let o = Ontology::desk();
    let g = VideoGraph::new("empty", 5.0);
    let p = Step::Exists {
        items: b(objects_in(Step::Frames, None)),
        item: b(Step::object("bottle")),
    };
    assert_eq!(both(&p, &g, &o), EvalResult::Answer(Value::Bool(false)));
}

#[test]
fn oracle_refuses_long_videos() {
    let o = Ontology::desk();
    let mut g = VideoGraph::new("long", 100.0);
    g.frames = (0..51).map(|i| frame(i as f64, &[])).collect();
    assert!(brute_force_oracle(&Step::Frames, &g, &o).is_err());
}

fn synth(seed: u64) -> VideoGraph {
    let o = Ontology::desk();
    synth_graph(seed, &format!("v{seed}"), &SynthParams::default(), &o).unwrap()
}

#[test]
fn fuzzed_programs_agree_with_oracle() {
    let o = Ontology::desk();
    let mut checked = 0;
    let mut answered = 0;
    for seed in 0..1200u64 {
        let g = synth(seed % 40);
        let pool = Pool::new(&g, &o);
        let mut gen = ProgramGen::new(seed, &pool);
        let p = gen.root(1 + (seed % 4) as usize);
        assert!(
            typecheck(&p).is_empty(),
            "generator produced ill-typed\n{p}"
        );
        let fast = evaluate(&p, &g, &o);
        let slow = brute_force_oracle(&p, &g, &o).unwrap();
        assert!(
            fast.same_outcome(&slow),
            "seed {seed}\n{p}\nfast {fast:?}\nslow {slow:?}"
        );
        checked += 1;
        answered += fast.answer().is_some() as usize;
    }
    assert_eq!(checked, 1200);
    assert!(answered > 300, "too few defined answers: {answered}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sorted_last_is_superlative_most(seed in 0u64..500, attr in prop_oneof![Just(Attr::Start), Just(Attr::End), Just(Attr::Duration)]) {
        let o = Ontology::desk();
        let g = synth(seed);
        let sorted = evaluate(&Step::Sort { items: b(Step::Actions), attr, descending: false }, &g, &o);
        let top = evaluate(&Step::Superlative { items: b(Step::Actions), attr, extremum: Extremum::Most }, &g, &o);
        match (sorted, top) {
            (EvalResult::Answer(Value::Items(v)), EvalResult::Answer(Value::Item(t))) => {
                prop_assert_eq!(v.last(), Some(&t));
            }
            (EvalResult::Answer(Value::Items(v)), EvalResult::Undefined(_)) => prop_assert!(v.is_empty()),
            (s, t) => prop_assert!(false, "unexpected {:?} / {:?}", s, t),
        }
    }

    #[test]
    fn contained_in_self_and_no_overlap_with_empty(seed in 0u64..500) {
        let o = Ontology::desk();
        let g = synth(seed);
        let a = objects_in(Step::Frames, None);
        let empty = objects_in(Step::ActionFrames(b(Step::action("no such action"))), None);
        let c = evaluate(&Step::ContainedIn(b(a.clone()), b(a.clone())), &g, &o);
        prop_assert_eq!(c, EvalResult::Answer(Value::Bool(true)));
        let ov = evaluate(&Step::Overlap(b(a), b(empty)), &g, &o);
        prop_assert!(ov == EvalResult::Answer(Value::Bool(false)) || matches!(ov, EvalResult::Undefined(_)));
    }

    #[test]
    fn two_way_superlative_matches_comparative(seed in 0u64..500) {
        let o = Ontology::desk();
        let g = synth(seed);
        let names: Vec<String> = g.action_classes().into_iter().map(String::from).collect();
        prop_assume!(names.len() >= 2);
        let (x, y) = (names[0].clone(), names[1].clone());
        let cmp = Step::Comparative {
            a: b(Step::Action(x.clone())),
            b: b(Step::Action(y.clone())),
            attr: Attr::Duration,
            more: More::More,
        };
        let sup = Step::Superlative {
            items: b(Step::ActionsIn {
                frames: b(Step::Frames),
                exclude: None,
            }),
            attr: Attr::Duration,
            extremum: Extremum::Most,
        };
        let c = evaluate(&cmp, &g, &o);
        if names.len() == 2 && g.actions.iter().all(|s| !g.frames_covered(s).is_empty()) {
            prop_assert!(c.same_outcome(&evaluate(&sup, &g, &o)));
        }
    }
}
