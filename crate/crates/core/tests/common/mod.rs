#![allow(dead_code)]

use compqa::program::{Attr, Direction, Extremum, ItemKind, Kind, Labels, More, Step};
use compqa::{Ontology, VideoGraph};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn b(s: Step) -> Box<Step> {
    Box::new(s)
}

/// Names drawn for leaves: mostly things present in the graph, plus a few
/// vocabulary entries that are not.
pub struct Pool {
    objects: Vec<String>,
    relationships: Vec<String>,
    actions: Vec<String>,
}

impl Pool {
    pub fn new(graph: &VideoGraph, ontology: &Ontology) -> Pool {
        let mut objects: Vec<String> = graph
            .object_classes()
            .into_iter()
            .map(String::from)
            .collect();
        let mut relationships: Vec<String> = graph
            .frames
            .iter()
            .flat_map(|f| {
                f.objects
                    .iter()
                    .flat_map(|o| o.relationships.iter().cloned())
            })
            .collect();
        relationships.sort();
        relationships.dedup();
        let mut actions: Vec<String> = graph
            .action_classes()
            .into_iter()
            .map(String::from)
            .collect();
        objects.extend(ontology.objects.iter().take(2).cloned());
        relationships.extend(ontology.relationships.keys().take(2).cloned());
        actions.extend(ontology.actions.keys().take(2).cloned());
        Pool {
            objects,
            relationships,
            actions,
        }
    }
}

/// Builds random well-typed programs.
pub struct ProgramGen<'a> {
    pub rng: ChaCha8Rng,
    pool: &'a Pool,
}

impl<'a> ProgramGen<'a> {
    pub fn new(seed: u64, pool: &'a Pool) -> Self {
        ProgramGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool,
        }
    }

    fn pick(&mut self, v: &[String]) -> String {
        v.choose(&mut self.rng)
            .cloned()
            .unwrap_or_else(|| "nothing".into())
    }

    fn leaf(&mut self, k: ItemKind) -> Step {
        match k {
            ItemKind::Object => Step::Object(self.pick(&self.pool.objects.clone())),
            ItemKind::Relationship => {
                Step::Relationship(self.pick(&self.pool.relationships.clone()))
            }
            ItemKind::Action => Step::Action(self.pick(&self.pool.actions.clone())),
            ItemKind::Frame => {
                Step::StartOf(b(Step::Action(self.pick(&self.pool.actions.clone()))))
            }
        }
    }

    fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    fn opt(&mut self, k: ItemKind, depth: usize) -> Option<Box<Step>> {
        if self.coin() {
            Some(b(self.gen(Kind::Item(k), depth)))
        } else {
            None
        }
    }

    fn time_attr(&mut self, duration: bool) -> Attr {
        let n = if duration { 3 } else { 2 };
        [Attr::Start, Attr::End, Attr::Duration][self.rng.random_range(0..n)]
    }

    pub fn root(&mut self, depth: usize) -> Step {
        let kinds = [
            Kind::Text,
            Kind::Bool,
            Kind::Scalar,
            Kind::Item(ItemKind::Object),
            Kind::Item(ItemKind::Action),
            Kind::Item(ItemKind::Relationship),
            Kind::Items(ItemKind::Object),
            Kind::Items(ItemKind::Frame),
            Kind::Items(ItemKind::Action),
        ];
        let k = *kinds.choose(&mut self.rng).unwrap();
        self.gen(k, depth)
    }

    pub fn gen(&mut self, kind: Kind, depth: usize) -> Step {
        let d = depth.saturating_sub(1);
        let shallow = depth == 0;
        match kind {
            Kind::Item(ik) if shallow => self.leaf(ik),
            Kind::Items(ItemKind::Frame) if shallow => Step::Frames,
            Kind::Items(ItemKind::Action) if shallow => Step::Actions,
            Kind::Items(ItemKind::Object) if shallow => Step::ObjectsIn {
                frames: b(Step::Frames),
                relationship: None,
            },
            Kind::Items(ItemKind::Relationship) if shallow => Step::RelationshipsIn {
                frames: b(Step::Frames),
                object: None,
                specific: false,
            },
            Kind::Bool if shallow => Step::Bool(self.coin()),
            Kind::Scalar if shallow => Step::Query {
                input: b(self.leaf(ItemKind::Action)),
                attr: Attr::Duration,
            },
            Kind::Text => Step::Verify {
                input: b(self.gen(Kind::Bool, depth)),
                labels: if self.coin() {
                    Labels::YesNo
                } else {
                    Labels::BeforeAfter
                },
            },

            Kind::Items(ItemKind::Frame) => match self.rng.random_range(0..6) {
                0 => Step::Frames,
                1 => Step::GetFrames {
                    anchor: b(self.gen(Kind::Item(ItemKind::Frame), d)),
                    direction: if self.coin() {
                        Direction::Before
                    } else {
                        Direction::After
                    },
                },
                2 => Step::ActionFrames(b(self.gen(Kind::Item(ItemKind::Action), d))),
                3 => {
                    let n = self.rng.random_range(0..3);
                    let objects = (0..n)
                        .map(|_| self.gen(Kind::Item(ItemKind::Object), d))
                        .collect();
                    Step::Iterate {
                        items: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                        relationship: self.opt(ItemKind::Relationship, d),
                        objects,
                        limit: if self.coin() {
                            Some(self.rng.random_range(1..4))
                        } else {
                            None
                        },
                    }
                }
                4 => Step::Sort {
                    items: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                    attr: self.time_attr(false),
                    descending: self.coin(),
                },
                _ => Step::Comparative {
                    a: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                    b: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                    attr: [Attr::Start, Attr::End, Attr::Time][self.rng.random_range(0..3)],
                    more: if self.coin() { More::More } else { More::Less },
                },
            },
            Kind::Items(ItemKind::Action) => match self.rng.random_range(0..3) {
                0 => Step::Actions,
                1 => Step::ActionsIn {
                    frames: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                    exclude: self.opt(ItemKind::Action, d),
                },
                _ => Step::Sort {
                    items: b(self.gen(Kind::Items(ItemKind::Action), d)),
                    attr: if self.coin() {
                        Attr::Action
                    } else {
                        self.time_attr(true)
                    },
                    descending: self.coin(),
                },
            },
            Kind::Items(ItemKind::Object) => {
                let frames = b(self.gen(Kind::Items(ItemKind::Frame), d));
                let inner = Step::ObjectsIn {
                    frames,
                    relationship: self.opt(ItemKind::Relationship, d),
                };
                if self.rng.random_bool(0.2) {
                    Step::Sort {
                        items: b(inner),
                        attr: Attr::Object,
                        descending: self.coin(),
                    }
                } else {
                    inner
                }
            }
            Kind::Items(ItemKind::Relationship) => Step::RelationshipsIn {
                frames: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                object: self.opt(ItemKind::Object, d),
                specific: self.coin(),
            },

            Kind::Item(ItemKind::Frame) => match self.rng.random_range(0..4) {
                0 => Step::StartOf(b(self.gen(Kind::Item(ItemKind::Action), d))),
                1 => Step::EndOf(b(self.gen(Kind::Item(ItemKind::Action), d))),
                2 => Step::Superlative {
                    items: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                    attr: self.time_attr(true),
                    extremum: if self.coin() {
                        Extremum::Most
                    } else {
                        Extremum::Least
                    },
                },
                _ => Step::ChooseOne {
                    items: b(self.gen(Kind::Items(ItemKind::Frame), d)),
                    a: b(self.gen(Kind::Item(ItemKind::Frame), d)),
                    b: b(self.gen(Kind::Item(ItemKind::Frame), d)),
                },
            },
            Kind::Item(ItemKind::Action) => match self.rng.random_range(0..5) {
                0 => self.leaf(ItemKind::Action),
                1 => Step::Query {
                    input: b(self.gen(Kind::Items(ItemKind::Action), d)),
                    attr: Attr::Action,
                },
                2 => Step::Superlative {
                    items: b(self.gen(Kind::Items(ItemKind::Action), d)),
                    attr: self.time_attr(true),
                    extremum: if self.coin() {
                        Extremum::Most
                    } else {
                        Extremum::Least
                    },
                },
                3 => Step::Comparative {
                    a: b(self.gen(Kind::Item(ItemKind::Action), d)),
                    b: b(self.gen(Kind::Item(ItemKind::Action), d)),
                    attr: [Attr::Start, Attr::End, Attr::Duration, Attr::Time]
                        [self.rng.random_range(0..4)],
                    more: if self.coin() { More::More } else { More::Less },
                },
                _ => Step::ChooseOne {
                    items: b(self.gen(Kind::Items(ItemKind::Action), d)),
                    a: b(self.leaf(ItemKind::Action)),
                    b: b(self.leaf(ItemKind::Action)),
                },
            },
            Kind::Item(ItemKind::Object) => match self.rng.random_range(0..3) {
                0 => self.leaf(ItemKind::Object),
                1 => Step::Query {
                    input: b(self.gen(Kind::Items(ItemKind::Object), d)),
                    attr: Attr::Object,
                },
                _ => Step::ChooseOne {
                    items: b(self.gen(Kind::Items(ItemKind::Object), d)),
                    a: b(self.leaf(ItemKind::Object)),
                    b: b(self.leaf(ItemKind::Object)),
                },
            },
            Kind::Item(ItemKind::Relationship) => match self.rng.random_range(0..2) {
                0 => self.leaf(ItemKind::Relationship),
                _ => Step::Query {
                    input: b(self.gen(Kind::Items(ItemKind::Relationship), d)),
                    attr: Attr::Relationship,
                },
            },

            Kind::Bool => match self.rng.random_range(0..8) {
                0 => Step::Bool(self.coin()),
                1 => {
                    let k = self.any_items_kind();
                    Step::Exists {
                        items: b(self.gen(Kind::Items(k), d)),
                        item: b(self.gen(Kind::Item(k), d)),
                    }
                }
                2 => Step::ObjectRelation {
                    frame: b(self.gen(Kind::Item(ItemKind::Frame), d)),
                    object: b(self.gen(Kind::Item(ItemKind::Object), d)),
                    relationship: b(self.gen(Kind::Item(ItemKind::Relationship), d)),
                },
                3 => {
                    let n = self.rng.random_range(2..4);
                    Step::And((0..n).map(|_| self.gen(Kind::Bool, d)).collect())
                }
                4 => Step::Xor(b(self.gen(Kind::Bool, d)), b(self.gen(Kind::Bool, d))),
                5 => {
                    let k = if self.coin() {
                        Kind::Item(self.any_items_kind())
                    } else {
                        Kind::Items(self.any_items_kind())
                    };
                    Step::Equals(b(self.gen(k, d)), b(self.gen(k, d)))
                }
                6 => {
                    let k = self.any_items_kind();
                    Step::Overlap(
                        b(self.gen(Kind::Items(k), d)),
                        b(self.gen(Kind::Items(k), d)),
                    )
                }
                _ => {
                    let k = self.any_items_kind();
                    Step::ContainedIn(
                        b(self.gen(Kind::Items(k), d)),
                        b(self.gen(Kind::Items(k), d)),
                    )
                }
            },
            Kind::Scalar => match self.rng.random_range(0..3) {
                0 => Step::Difference(b(self.gen(Kind::Scalar, d)), b(self.gen(Kind::Scalar, d))),
                1 => Step::Query {
                    input: b(self.gen(Kind::Item(ItemKind::Action), d)),
                    attr: self.time_attr(true),
                },
                _ => Step::Query {
                    input: b(self.gen(Kind::Item(ItemKind::Frame), d)),
                    attr: self.time_attr(true),
                },
            },
        }
    }

    fn any_items_kind(&mut self) -> ItemKind {
        [
            ItemKind::Object,
            ItemKind::Relationship,
            ItemKind::Action,
            ItemKind::Frame,
        ][self.rng.random_range(0..4)]
    }
}
