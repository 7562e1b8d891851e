use std::collections::BTreeMap;

use compqa::metrics::*;
use compqa::templates::{
    instantiate, AnswerType, Draft, IndirectRef, QuestionRecord, Registry, Semantic, Structure, Which,
};
use compqa::{Frame, ObjectInstance, Ontology, VideoGraph};
use proptest::prelude::*;

fn bind(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn video() -> VideoGraph {
    let mut g = VideoGraph::new("v1", 30.0);
    g.frames = vec![
        Frame {
            timestamp: 2.0,
            objects: vec![ObjectInstance::new("phone", ["holding"])],
        },
        Frame {
            timestamp: 12.0,
            objects: vec![ObjectInstance::new("paper", ["carrying"])],
        },
    ];
    g
}

fn base() -> QuestionRecord {
    let (reg, o, g) = (Registry::desk(), Ontology::desk(), video());
    instantiate(&reg, "objExists", bind(&[("obj", "phone")]), &g, &o, 0).unwrap()
}

struct Shape {
    template: &'static str,
    structure: Structure,
    semantic: Semantic,
    reasoning: &'static [&'static str],
    binary: bool,
    steps: usize,
}

const SHAPES: [Shape; 5] = [
    Shape {
        template: "a",
        structure: Structure::Verify,
        semantic: Semantic::Object,
        reasoning: &["exists"],
        binary: true,
        steps: 1,
    },
    Shape {
        template: "b",
        structure: Structure::Query,
        semantic: Semantic::Object,
        reasoning: &["obj-rel"],
        binary: false,
        steps: 2,
    },
    Shape {
        template: "c",
        structure: Structure::Compare,
        semantic: Semantic::Action,
        reasoning: &["sequencing", "duration-comparison"],
        binary: true,
        steps: 5,
    },
    Shape {
        template: "d",
        structure: Structure::Choose,
        semantic: Semantic::Relationship,
        reasoning: &["obj-rel", "superlative"],
        binary: true,
        steps: 3,
    },
    Shape {
        template: "e",
        structure: Structure::Logic,
        semantic: Semantic::Object,
        reasoning: &["exists", "conjunction"],
        binary: true,
        steps: 4,
    },
];

/// `per` records of each shape, answers cycling through `answers`.
fn corpus(per: usize, answers: &[&str]) -> Vec<QuestionRecord> {
    let b = base();
    let mut out = Vec::new();
    for s in &SHAPES {
        for i in 0..per {
            out.push(QuestionRecord {
                qid: format!("{}{i:03}", s.template),
                video_id: format!("v{i}"),
                answer: answers[i % answers.len()].to_string(),
                template_id: s.template.into(),
                structure: s.structure,
                semantic: s.semantic,
                reasoning: s.reasoning.iter().map(|r| r.to_string()).collect(),
                answer_type: if s.binary { AnswerType::Binary } else { AnswerType::Open },
                steps: s.steps,
                direct_counterpart: None,
                ..b.clone()
            });
        }
    }
    out
}

fn truth(c: &[QuestionRecord]) -> Predictions {
    c.iter().map(|r| (r.qid.clone(), r.answer.clone())).collect()
}

/// Independent tally of the categories a set of correct flags implies.
fn expected(c: &[QuestionRecord], right: impl Fn(&QuestionRecord) -> bool) -> BTreeMap<String, (usize, usize)> {
    let mut out: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in c {
        let kind = if r.answer_type == AnswerType::Binary { "binary" } else { "open" };
        let mut keys = vec![
            "overall".to_string(),
            format!("structure/{}", r.structure.name()),
            format!("semantic/{}", r.semantic.name()),
        ];
        for t in &r.reasoning {
            keys.push(format!("reasoning/{t}/{kind}"));
            keys.push(format!("reasoning/{t}/all"));
        }
        for k in keys {
            let e = out.entry(k).or_default();
            e.0 += right(r) as usize;
            e.1 += 1;
        }
    }
    out
}

#[test]
fn perfect_predictions_score_one() {
    let o = Ontology::desk();
    let c = corpus(10, &["yes", "no"]);
    let rep = score(&c, &truth(&c), &o, ScoreConfig::default());
    assert!(rep.categories.values().all(|cell| cell.accuracy == 1.0));
    assert_eq!(rep.overall(), Some(1.0));
    assert_eq!(rep.missing, 0);
}

#[test]
fn engineered_sixty_percent_is_recovered() {
    let o = Ontology::desk();
    let c = corpus(10, &["yes", "no", "phone", "paper", "table"]);
    // Flip a known 40% of every shape: indices 6..10.
    let wrong = |r: &QuestionRecord| r.qid[1..].parse::<usize>().unwrap() >= 6;
    let mut p = truth(&c);
    for r in c.iter().filter(|r| wrong(r)) {
        p.insert(r.qid.clone(), "__wrong".into());
    }
    let rep = score(&c, &p, &o, ScoreConfig::default());
    let want = expected(&c, |r| !wrong(r));
    assert_eq!(rep.categories.len(), want.len());
    for (k, (ok, n)) in want {
        let cell = rep.categories[&k];
        assert_eq!((cell.correct, cell.total), (ok, n), "{k}");
        assert_eq!(cell.accuracy, 0.6, "{k}");
    }
}

#[test]
fn uneven_flips_match_an_independent_tally() {
    let o = Ontology::desk();
    let c = corpus(13, &["yes", "no", "phone"]);
    let right = |r: &QuestionRecord| (r.qid.len() * 7 + r.qid.as_bytes()[0] as usize + r.qid.as_bytes()[3] as usize) % 3 != 0;
    let p: Predictions = c
        .iter()
        .map(|r| (r.qid.clone(), if right(r) { r.answer.clone() } else { "x".into() }))
        .collect();
    let rep = score(&c, &p, &o, ScoreConfig::default());
    for (k, (ok, n)) in expected(&c, right) {
        assert_eq!(rep.categories[&k].correct, ok, "{k}");
        assert_eq!(rep.categories[&k].total, n, "{k}");
    }
}

#[test]
fn answers_are_normalized() {
    let o = Ontology::desk();
    assert_eq!(normalize("  Phone ", &o), "phone");
    assert_eq!(normalize("Cellphone", &o), "phone");
    assert_eq!(normalize("eating   something", &o), "eating some food");
    let c = corpus(1, &["phone"]);
    let p: Predictions = c.iter().map(|r| (r.qid.clone(), "CELLPHONE".to_string())).collect();
    assert_eq!(score(&c, &p, &o, ScoreConfig::default()).overall(), Some(1.0));
}

#[test]
fn unknown_and_missing_predictions() {
    let o = Ontology::desk();
    let c = corpus(2, &["yes"]);
    let mut p = truth(&c);
    p.remove("a000");
    p.insert("zzz".into(), "yes".into());
    let rep = score(&c, &p, &o, ScoreConfig::default());
    assert_eq!(rep.missing, 1);
    assert_eq!(rep.unknown, vec!["zzz"]);
    assert_eq!(rep.overall(), Some(0.9));
}

#[test]
fn most_likely_examples() {
    let o = Ontology::desk();
    let c = corpus(4, &["a", "a", "a", "b"]);
    let ml = most_likely_baseline(&c, &o);
    assert_eq!(ml["structure/query"], 0.75);
    let c = corpus(6, &["yes", "no"]);
    let ml = most_likely_baseline(&c, &o);
    assert_eq!(ml["structure/verify"], 0.5);
    assert_eq!(ml["content/a|phone"], 0.5);
    assert!(most_likely_baseline(&[], &o).is_empty());
}

fn linear(counts: &[(usize, usize, usize)]) -> Vec<QuestionRecord> {
    let b = base();
    let mut out = Vec::new();
    for &(steps, correct, total) in counts {
        for i in 0..total {
            out.push(QuestionRecord {
                qid: format!("s{steps}-{i}"),
                answer: if i < correct { "yes".into() } else { "no".into() },
                steps,
                ..b.clone()
            });
        }
    }
    out
}

fn all_yes(c: &[QuestionRecord]) -> Predictions {
    c.iter().map(|r| (r.qid.clone(), "yes".to_string())).collect()
}

#[test]
fn two_point_decay() {
    let o = Ontology::desk();
    let c = linear(&[(1, 9, 10), (5, 5, 10)]);
    let f = steps_regression(&c, &all_yes(&c), &o, true);
    assert!((f.slope.unwrap() + 0.1).abs() < 1e-12);
}

#[test]
fn constructed_linear_decay_is_recovered() {
    let o = Ontology::desk();
    // accuracy = 0.9 - 0.1 * steps, with uneven counts per step.
    let c = linear(&[(1, 8, 10), (2, 14, 20), (3, 6, 10), (4, 10, 20), (5, 20, 50), (6, 3, 10)]);
    for weighted in [true, false] {
        let f = steps_regression(&c, &all_yes(&c), &o, weighted);
        assert!((f.slope.unwrap() + 0.1).abs() < 1e-9, "{:?}", f.slope);
        assert!((f.intercept.unwrap() - 0.9).abs() < 1e-9);
        assert!((f.r2.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(f.table.len(), 6);
    }
}

#[test]
fn flat_accuracy_and_single_step() {
    let o = Ontology::desk();
    let c = linear(&[(1, 5, 10), (3, 10, 20)]);
    let f = steps_regression(&c, &all_yes(&c), &o, true);
    assert_eq!((f.slope, f.r2), (Some(0.0), Some(0.0)));
    let c = linear(&[(2, 5, 10)]);
    assert_eq!(steps_regression(&c, &all_yes(&c), &o, true).slope, None);
}

fn indirect_pair() -> (QuestionRecord, QuestionRecord) {
    let (reg, o, g) = (Registry::desk(), Ontology::desk(), video());
    let t = reg.get("objExists").unwrap();
    let d = Draft::new(t, "v1", bind(&[("obj", "paper")]));
    let direct = d.realize(&reg, &g, &o, 0).unwrap();
    let r = IndirectRef::Object {
        relationship: "carrying".into(),
        which: Which::Any,
    };
    let indirect = d.refer(t, "obj", &r, &g, &o).unwrap().realize(&reg, &g, &o, 0).unwrap();
    (direct, indirect)
}

#[test]
fn precision_is_null_when_every_direct_counterpart_is_wrong() {
    let o = Ontology::desk();
    let (direct, indirect) = indirect_pair();
    let c = vec![direct.clone(), indirect.clone()];
    let mut p = truth(&c);
    p.insert(direct.qid.clone(), "no".into());
    let rep = score(&c, &p, &o, ScoreConfig::default());
    let s = &rep.indirect["object"];
    assert_eq!(s.recall, Some(1.0));
    assert_eq!(s.precision, None);
    let json = serde_json::to_value(&rep).unwrap();
    assert!(json["indirect"]["object"]["precision"].is_null());
    assert!(rep.to_csv().contains("indirect/object/precision,,0,N/A"));

    let rep = score(&c, &truth(&c), &o, ScoreConfig::default());
    assert_eq!(rep.indirect["object"].precision, Some(1.0));
}

#[test]
fn prediction_file_order_does_not_matter() {
    let o = Ontology::desk();
    let c = corpus(5, &["yes", "no", "phone"]);
    let mut lines: Vec<String> = c
        .iter()
        .enumerate()
        .map(|(i, r)| serde_json::json!({"qid": r.qid, "answer": if i % 3 == 0 { "no" } else { "yes" }}).to_string())
        .collect();
    let a = read_predictions(&lines.join("\n"), "a").unwrap();
    lines.reverse();
    let b = read_predictions(&lines.join("\n"), "b").unwrap();
    assert_eq!(score(&c, &a, &o, ScoreConfig::default()), score(&c, &b, &o, ScoreConfig::default()));
    assert!(read_predictions("{\"qid\": 1}", "bad").is_err());
}

proptest! {
    #[test]
    fn report_invariants(flags in proptest::collection::vec(any::<bool>(), 50)) {
        let o = Ontology::desk();
        let c = corpus(10, &["yes", "no", "phone"]);
        let p: Predictions = c
            .iter()
            .zip(&flags)
            .map(|(r, ok)| (r.qid.clone(), if *ok { r.answer.clone() } else { "x".into() }))
            .collect();
        let rep = score(&c, &p, &o, ScoreConfig::default());
        for cell in rep.categories.values() {
            prop_assert!((0.0..=1.0).contains(&cell.accuracy));
        }
        // Overall is the count-weighted mean of the structures.
        let (mut ok, mut n) = (0, 0);
        for s in Structure::ALL {
            if let Some(cell) = rep.categories.get(&format!("structure/{}", s.name())) {
                ok += cell.correct;
                n += cell.total;
            }
        }
        prop_assert_eq!(rep.categories["overall"].correct, ok);
        prop_assert_eq!(rep.categories["overall"].total, n);
        for (k, cell) in &rep.categories {
            if let Some(t) = k.strip_suffix("/all") {
                let part = |s: &str| rep.categories.get(&format!("{t}/{s}")).map(|c| c.total).unwrap_or(0);
                prop_assert_eq!(part("binary") + part("open"), cell.total);
            }
        }
    }
}
