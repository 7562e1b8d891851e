//! Rejection-sampling balancer: answer-distribution smoothing followed by
//! structural rebalancing. Both passes only delete.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::generator::water_fill;
use crate::templates::{AnswerType, Localization, QuestionRecord, Structure};
use crate::util::{rng_for, stable_hash};

/// Rounds of answer smoothing before giving up on a fixed point.
const MAX_ROUNDS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BalanceConfig {
    pub seed: u64,
    /// Initial head proportion, how much it drops per retry, and its floor.
    pub b_start: f64,
    pub b_step: f64,
    pub b_floor: f64,
    pub head_share: f64,
    pub mass_cap: f64,
    pub tail_ignore: f64,
    /// Equalize answer-changed and answer-unchanged localized questions.
    pub localization: bool,
    pub targets: BTreeMap<Structure, f64>,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            seed: 0,
            b_start: 0.70,
            b_step: 0.05,
            b_floor: 0.10,
            head_share: 0.20,
            mass_cap: 0.30,
            tail_ignore: 0.05,
            localization: true,
            targets: [
                (Structure::Query, 0.50),
                (Structure::Compare, 0.15),
                (Structure::Choose, 0.15),
                (Structure::Verify, 0.15),
                (Structure::Logic, 0.05),
            ]
            .into_iter()
            .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Answer,
    Localization,
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    ReasoningType,
    ContentCategory,
}

/// A balancing unit: a reasoning type (split by answer family) or a content
/// category.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CategoryKey {
    pub level: Level,
    pub parts: Vec<String>,
}

impl CategoryKey {
    pub fn name(&self) -> String {
        self.parts.join("-")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deletion {
    pub qid: String,
    pub stage: Stage,
    pub category: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BalancePlan {
    pub deletions: Vec<Deletion>,
    /// Deletions per category name.
    pub ledger: BTreeMap<String, usize>,
    /// Open categories that still fail the head-mass condition, and absent
    /// or infeasible structures.
    pub flagged: BTreeSet<String>,
    pub structure_counts_before: BTreeMap<String, usize>,
    pub structure_counts_after: BTreeMap<String, usize>,
}

impl BalancePlan {
    fn merge(&mut self, other: BalancePlan) {
        for d in other.deletions {
            *self.ledger.entry(d.category.clone()).or_default() += 1;
            self.deletions.push(d);
        }
        self.flagged.extend(other.flagged);
    }
}

/// Answers of one category ordered by decreasing count (ties by name).
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerDistribution {
    pub order: Vec<(String, usize)>,
}

impl AnswerDistribution {
    pub fn from_answers<'a>(answers: impl IntoIterator<Item = &'a str>) -> AnswerDistribution {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for a in answers {
            *counts.entry(a).or_default() += 1;
        }
        let mut order: Vec<(String, usize)> = counts
            .into_iter()
            .map(|(a, n)| (a.to_string(), n))
            .collect();
        order.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        AnswerDistribution { order }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.order.iter().map(|(_, n)| *n).collect()
    }
}

/// Whether the most frequent `ceil(head_share * answers)` answers hold at
/// most `mass_cap` of all questions.
pub fn check_condition(counts: &[usize], head_share: f64, mass_cap: f64) -> bool {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return true;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let head = (head_share * counts.len() as f64 - 1e-9).ceil() as usize;
    let mass: usize = sorted[..head.min(sorted.len())].iter().sum();
    mass as f64 <= mass_cap * total as f64 + 1e-9
}

/// Target counts for one open category under the head/tail procedure.
/// `counts` must be in decreasing order; the result keeps that order.
/// Returns the new counts and whether the condition now holds.
pub fn smooth_open_counts(counts: &[usize], cfg: &BalanceConfig) -> (Vec<usize>, bool) {
    let mut c = counts.to_vec();
    let pass = |c: &[usize]| check_condition(c, cfg.head_share, cfg.mass_cap);
    if pass(&c) {
        return (c, true);
    }
    // Least frequent answers that together hold at most `tail_ignore` of
    // the mass take no part in the head/tail ratio.
    let total: usize = c.iter().sum();
    let mut k = c.len();
    let mut ignored = 0;
    while k > 0 && ((ignored + c[k - 1]) as f64) <= cfg.tail_ignore * total as f64 {
        ignored += c[k - 1];
        k -= 1;
    }
    let mut b = cfg.b_start;
    loop {
        for i in 0..k.saturating_sub(1) {
            loop {
                let head: usize = c[..=i].iter().sum();
                let tail: usize = c[i + 1..k].iter().sum();
                if head as f64 <= b * (head + tail) as f64 + 1e-9 {
                    break;
                }
                let top = c[0];
                if top <= c[i + 1] {
                    break;
                }
                // Last of the tied maxima, so the order never flips.
                let j = c[..=i]
                    .iter()
                    .rposition(|&n| n == top)
                    .expect("head is non-empty");
                c[j] -= 1;
            }
            if pass(&c) {
                return (c, true);
            }
        }
        if b - cfg.b_step < cfg.b_floor - 1e-9 {
            let ok = pass(&c);
            return (c, ok);
        }
        b -= cfg.b_step;
    }
}

/// Target counts for a two-answer category: both down to the smaller.
pub fn smooth_binary_counts(counts: &[usize]) -> Vec<usize> {
    let m = counts.iter().copied().min().unwrap_or(0);
    counts.iter().map(|_| m).collect()
}

fn answer_family(r: &QuestionRecord) -> &'static str {
    match (r.answer_type, r.answer.as_str()) {
        (AnswerType::Open, _) => "open",
        (_, "yes" | "no") => "yesno",
        (_, "before" | "after") => "beforeafter",
        _ => "options",
    }
}

struct Work<'a> {
    records: &'a [QuestionRecord],
    alive: Vec<bool>,
    content: Vec<String>,
    cfg: &'a BalanceConfig,
    plan: BalancePlan,
}

impl<'a> Work<'a> {
    fn new(records: &'a [QuestionRecord], cfg: &'a BalanceConfig) -> Work<'a> {
        Work {
            records,
            alive: vec![true; records.len()],
            content: records.iter().map(QuestionRecord::content_key).collect(),
            cfg,
            plan: BalancePlan::default(),
        }
    }

    fn delete(&mut self, idx: &[usize], stage: Stage, category: &str) {
        for &i in idx {
            debug_assert!(self.alive[i]);
            self.alive[i] = false;
            self.plan.deletions.push(Deletion {
                qid: self.records[i].qid.clone(),
                stage,
                category: category.to_string(),
            });
            *self.plan.ledger.entry(category.to_string()).or_default() += 1;
        }
    }

    /// Uniform sample of `n` members of `pool`, which is sorted by qid first
    /// so the choice does not depend on input order.
    fn pick(&self, pool: &[usize], n: usize, stage: Stage, category: &str) -> Vec<usize> {
        let mut pool = pool.to_vec();
        pool.sort_by(|&a, &b| self.records[a].qid.cmp(&self.records[b].qid));
        let n = n.min(pool.len());
        let key = format!("{stage:?}/{category}");
        let mut rng = rng_for(self.cfg.seed, "balance", &key);
        let mut chosen: Vec<usize> = sample(&mut rng, pool.len(), n)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        chosen.sort_unstable();
        chosen
    }

    fn by_answer(&self, members: &[usize]) -> BTreeMap<String, Vec<usize>> {
        let mut m: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for &i in members.iter().filter(|&&i| self.alive[i]) {
            m.entry(self.records[i].answer.clone()).or_default().push(i);
        }
        m
    }

    /// Brings one category's answers down to `targets` (answer → count).
    fn trim(
        &mut self,
        members: &[usize],
        targets: &BTreeMap<String, usize>,
        stage: Stage,
        category: &str,
    ) {
        self.trim_as(members, targets, stage, category, category);
    }

    /// As [`Work::trim`], sampling under `key` but logging under `category`.
    fn trim_as(
        &mut self,
        members: &[usize],
        targets: &BTreeMap<String, usize>,
        stage: Stage,
        key: &str,
        category: &str,
    ) {
        for (answer, idx) in self.by_answer(members) {
            let keep = targets.get(&answer).copied().unwrap_or(0);
            if idx.len() > keep {
                let cat = format!("{key}/{answer}");
                let gone = self.pick(&idx, idx.len() - keep, stage, &cat);
                self.delete(&gone, stage, category);
            }
        }
    }

    /// Equalizes a binary category, or smooths an open one. Categories left
    /// with a single answer are deleted outright.
    fn smooth(&mut self, members: &[usize], open: bool, category: &str) {
        let groups = self.by_answer(members);
        if groups.is_empty() {
            return;
        }
        if groups.len() == 1 {
            let all: Vec<usize> = groups.into_values().flatten().collect();
            if open || all.len() > 1 {
                self.delete(&all, Stage::Answer, category);
            }
            return;
        }
        let dist = AnswerDistribution {
            order: {
                let mut o: Vec<(String, usize)> =
                    groups.iter().map(|(a, v)| (a.clone(), v.len())).collect();
                o.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
                o
            },
        };
        let new = if open {
            smooth_open_counts(&dist.counts(), self.cfg).0
        } else {
            smooth_binary_counts(&dist.counts())
        };
        let targets = dist.order.iter().map(|(a, _)| a.clone()).zip(new).collect();
        self.trim(members, &targets, Stage::Answer, category);
    }

    fn live(&self, members: &[usize]) -> Vec<usize> {
        members.iter().copied().filter(|&i| self.alive[i]).collect()
    }

    fn reasoning_groups(&self) -> BTreeMap<CategoryKey, Vec<usize>> {
        let mut m: BTreeMap<CategoryKey, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            for t in &r.reasoning {
                let key = CategoryKey {
                    level: Level::ReasoningType,
                    parts: vec![t.clone(), answer_family(r).to_string()],
                };
                m.entry(key).or_default().push(i);
            }
        }
        m
    }

    fn content_groups(&self) -> BTreeMap<CategoryKey, Vec<usize>> {
        let mut m: BTreeMap<CategoryKey, Vec<usize>> = BTreeMap::new();
        for (i, k) in self.content.iter().enumerate() {
            let key = CategoryKey {
                level: Level::ContentCategory,
                parts: k.split('|').map(String::from).collect(),
            };
            m.entry(key).or_default().push(i);
        }
        m
    }

    fn is_open(&self, members: &[usize]) -> bool {
        members
            .first()
            .is_some_and(|&i| self.records[i].answer_type == AnswerType::Open)
    }

    fn answer_round(&mut self) {
        let reasons = self.reasoning_groups();
        let contents = self.content_groups();
        // Content categories under each reasoning type, via their template.
        let mut under: BTreeMap<&str, Vec<&CategoryKey>> = BTreeMap::new();
        for (key, members) in &contents {
            for t in &self.records[members[0]].reasoning {
                under.entry(t.as_str()).or_default().push(key);
            }
        }
        let types: BTreeSet<&str> = reasons.keys().map(|k| k.parts[0].as_str()).collect();
        for t in types {
            for (key, members) in reasons.iter().filter(|(k, _)| k.parts[0] == t) {
                // Option answers only make sense within one content category.
                if key.parts[1] == "options" {
                    continue;
                }
                let open = key.parts[1] == "open";
                self.smooth(members, open, &key.name());
            }
            for key in under.get(t).into_iter().flatten() {
                let members = &contents[*key];
                self.smooth(members, self.is_open(members), &key.name());
            }
        }
    }

    fn localization_round(&mut self) {
        for (key, members) in self.content_groups() {
            let live = self.live(&members);
            let changed: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&i| self.records[i].localization == Localization::AnswerChanged)
                .collect();
            let unchanged: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&i| self.records[i].localization == Localization::AnswerUnchanged)
                .collect();
            let (big, small) = if changed.len() > unchanged.len() {
                (changed, unchanged)
            } else {
                (unchanged, changed)
            };
            // A category whose localized questions all fall on one side has
            // nothing to balance against.
            if small.is_empty() || big.len() <= small.len() + 1 {
                continue;
            }
            // Cut the larger side answer by answer, in proportion, so the
            // answer balance is disturbed as little as possible.
            let dist = AnswerDistribution::from_answers(
                big.iter().map(|&i| self.records[i].answer.as_str()),
            );
            let kept = proportional(&dist.counts(), small.len());
            let targets = dist
                .order
                .iter()
                .map(|(a, _)| a.clone())
                .zip(kept)
                .collect();
            let name = format!("{}/localization", key.name());
            self.trim_as(&big, &targets, Stage::Localization, &name, &key.name());
        }
    }

    fn content_sweep(&mut self) {
        for (key, members) in self.content_groups() {
            self.smooth(&members, self.is_open(&members), &key.name());
        }
    }

    fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    fn structure_counts(&self) -> BTreeMap<Structure, usize> {
        let mut m = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            if self.alive[i] {
                *m.entry(r.structure).or_default() += 1;
            }
        }
        m
    }

    /// Open categories, at both levels, that fail the head-mass condition.
    fn audit(&self) -> BTreeSet<String> {
        let mut flagged = BTreeSet::new();
        let groups = self
            .reasoning_groups()
            .into_iter()
            .chain(self.content_groups());
        for (key, members) in groups {
            let live = self.live(&members);
            if live.is_empty() || !self.is_open(&live) {
                continue;
            }
            let dist = AnswerDistribution::from_answers(
                live.iter().map(|&i| self.records[i].answer.as_str()),
            );
            if !check_condition(&dist.counts(), self.cfg.head_share, self.cfg.mass_cap) {
                flagged.insert(key.name());
            }
        }
        flagged
    }

    fn structural_round(&mut self) -> bool {
        let counts = self.structure_counts();
        let present: Vec<(Structure, usize, f64)> = Structure::ALL
            .iter()
            .filter_map(|s| {
                let p = self.cfg.targets.get(s).copied().unwrap_or(0.0);
                counts
                    .get(s)
                    .filter(|&&c| c > 0 && p > 0.0)
                    .map(|&c| (*s, c, p))
            })
            .collect();
        for s in Structure::ALL {
            if self.cfg.targets.get(&s).copied().unwrap_or(0.0) > 0.0 && !counts.contains_key(&s) {
                self.plan.flagged.insert(format!("structure-{}", s.name()));
            }
        }
        if present.is_empty() {
            return false;
        }
        let p_sum: f64 = present.iter().map(|(_, _, p)| p).sum();
        let total = present
            .iter()
            .map(|(_, c, p)| *c as f64 / (p / p_sum))
            .fold(f64::INFINITY, f64::min);
        let mut changed = false;
        for (s, c, p) in present {
            let share = p / p_sum;
            let target = if s == Structure::Query {
                ((share * total) - 1e-9).ceil() as usize
            } else {
                ((share * total) + 1e-9).floor() as usize
            }
            .min(c);
            if target < c {
                changed = true;
                self.shrink_structure(s, target);
            }
        }
        changed
    }

    fn shrink_structure(&mut self, s: Structure, target: usize) {
        // template → content category → live members
        let mut tree: BTreeMap<String, BTreeMap<String, Vec<usize>>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            if self.alive[i] && r.structure == s {
                tree.entry(r.template_id.clone())
                    .or_default()
                    .entry(self.content[i].clone())
                    .or_default()
                    .push(i);
            }
        }
        let t_sizes: Vec<usize> = tree
            .values()
            .map(|cs| cs.values().map(Vec::len).sum())
            .collect();
        let t_quota = water_fill(&t_sizes, target);
        for (cats, t_keep) in tree.into_values().zip(t_quota) {
            // Seeded order, so leftover quota does not always favour the
            // alphabetically first concepts.
            let mut cats: Vec<(String, Vec<usize>)> = cats.into_iter().collect();
            cats.sort_by_cached_key(|(c, _)| stable_hash(&[&self.cfg.seed.to_string(), "structural", c]));
            let binary = cats
                .first()
                .is_some_and(|(_, m)| self.records[m[0]].answer_type == AnswerType::Binary);
            let sizes: Vec<usize> = cats.iter().map(|(_, m)| m.len()).collect();
            let c_quota = category_quotas(&sizes, t_keep, binary);
            for ((content, members), keep) in cats.into_iter().zip(c_quota) {
                if keep >= members.len() {
                    continue;
                }
                let dist = AnswerDistribution::from_answers(
                    members.iter().map(|&i| self.records[i].answer.as_str()),
                );
                let mut kept = proportional(&dist.counts(), keep);
                if kept.len() > 1 && kept[1] == 0 && kept[0] > 1 {
                    kept[0] -= 1;
                    kept[1] = 1;
                }
                let targets = dist
                    .order
                    .iter()
                    .map(|(a, _)| a.clone())
                    .zip(kept)
                    .collect();
                let name = content.replace('|', "-");
                self.trim(&members, &targets, Stage::Structural, &name);
            }
        }
    }

    /// Deletes every content category that has been reduced to one answer.
    fn drop_single_answer(&mut self, stage: Stage) -> bool {
        let mut any = false;
        for (key, members) in self.content_groups() {
            let groups = self.by_answer(&members);
            if groups.len() != 1 {
                continue;
            }
            let all: Vec<usize> = groups.into_values().flatten().collect();
            // A lone binary question is already within the one-answer gap.
            if all.len() > 1 || self.is_open(&all) {
                self.delete(&all, stage, &key.name());
                any = true;
            }
        }
        any
    }

    fn survivors(&self) -> Vec<QuestionRecord> {
        self.records
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(r, _)| r.clone())
            .collect()
    }
}

/// Split a template's quota over its content categories. Binary
/// categories are filled in answer pairs so they stay equal, then any
/// shortfall is made up one question per category (a gap of one). An open
/// category is never cut to a single question.
fn category_quotas(sizes: &[usize], budget: usize, binary: bool) -> Vec<usize> {
    let mut q: Vec<usize> = if binary {
        let pairs: Vec<usize> = sizes.iter().map(|n| n / 2).collect();
        water_fill(&pairs, budget / 2).into_iter().map(|p| p * 2).collect()
    } else {
        water_fill(sizes, budget)
            .into_iter()
            .zip(sizes)
            .map(|(q, &n)| if q == 1 && n > 1 { 0 } else { q })
            .collect()
    };
    let mut left = budget.saturating_sub(q.iter().sum());
    loop {
        let before = left;
        for (qi, &n) in q.iter_mut().zip(sizes) {
            if left == 0 {
                break;
            }
            let room = *qi < n && (binary || *qi >= 2);
            if room {
                *qi += 1;
                left -= 1;
            }
        }
        // Binary categories take one extra question at most.
        if binary || left == 0 || left == before {
            break;
        }
    }
    q
}

/// Largest-remainder apportionment of `keep` over `counts`, never giving a
/// part more than it has.
pub fn proportional(counts: &[usize], keep: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let keep = keep.min(total);
    let mut out: Vec<usize> = counts.iter().map(|&c| c * keep / total).collect();
    let mut rest: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| ((c * keep) % total, i))
        .collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = keep - out.iter().sum::<usize>();
    for (_, i) in rest {
        if left == 0 {
            break;
        }
        if out[i] < counts[i] {
            out[i] += 1;
            left -= 1;
        }
    }
    out
}

fn named_counts(m: BTreeMap<Structure, usize>) -> BTreeMap<String, usize> {
    m.into_iter()
        .map(|(s, n)| (s.name().to_string(), n))
        .collect()
}

/// Answer-distribution smoothing with the localization sub-balance.
/// Rounds repeat until nothing more is deleted.
pub fn balance_answers(
    records: &[QuestionRecord],
    cfg: &BalanceConfig,
) -> (Vec<QuestionRecord>, BalancePlan) {
    let mut w = Work::new(records, cfg);
    w.plan.structure_counts_before = named_counts(w.structure_counts());
    answer_rounds(&mut w);
    w.plan.flagged.extend(w.audit());
    w.plan.structure_counts_after = named_counts(w.structure_counts());
    (w.survivors(), w.plan)
}

fn answer_rounds(w: &mut Work<'_>) {
    for _ in 0..MAX_ROUNDS {
        let before = w.alive_count();
        w.answer_round();
        if w.cfg.localization {
            w.localization_round();
        }
        w.content_sweep();
        if w.alive_count() == before {
            break;
        }
    }
}

/// Structural rebalancing toward the target shares. Quotas are split
/// evenly over templates, then content categories, then proportionally
/// over answers.
pub fn balance_structures(
    records: &[QuestionRecord],
    cfg: &BalanceConfig,
) -> (Vec<QuestionRecord>, BalancePlan) {
    let mut w = Work::new(records, cfg);
    w.plan.structure_counts_before = named_counts(w.structure_counts());
    structural_rounds(&mut w);
    w.plan.flagged.extend(w.audit());
    w.plan.structure_counts_after = named_counts(w.structure_counts());
    (w.survivors(), w.plan)
}

fn structural_rounds(w: &mut Work<'_>) {
    for _ in 0..MAX_ROUNDS {
        let changed = w.structural_round();
        let dropped = w.drop_single_answer(Stage::Structural);
        if !changed && !dropped {
            break;
        }
    }
}

/// Both passes. The plan covers every deletion from the input.
pub fn balance(
    records: &[QuestionRecord],
    cfg: &BalanceConfig,
) -> (Vec<QuestionRecord>, BalancePlan) {
    let (mid, mut plan) = balance_answers(records, cfg);
    let (out, second) = balance_structures(&mid, cfg);
    plan.flagged.clear();
    let after = second.structure_counts_after.clone();
    plan.merge(second);
    plan.structure_counts_after = after;
    (out, plan)
}

/// Gap between the most and least frequent answer of every binary content
/// category (a category with one answer reports its full size).
pub fn binary_gaps(records: &[QuestionRecord]) -> BTreeMap<String, usize> {
    let mut cats: BTreeMap<String, BTreeMap<&str, usize>> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.answer_type == AnswerType::Binary)
    {
        *cats
            .entry(r.content_key())
            .or_default()
            .entry(&r.answer)
            .or_default() += 1;
    }
    cats.into_iter()
        .map(|(k, m)| {
            let hi = m.values().max().copied().unwrap_or(0);
            let lo = if m.len() < 2 {
                0
            } else {
                m.values().min().copied().unwrap_or(0)
            };
            (k, hi - lo)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_examples() {
        assert!(!check_condition(&[64, 20, 10, 6], 0.2, 0.3));
        assert!(check_condition(&[25, 25, 25, 25], 0.2, 0.3));
        assert!(check_condition(&[14, 14, 9, 9, 9, 9, 9, 9, 9, 9], 0.2, 0.3));
    }

    #[test]
    fn uniform_is_untouched() {
        let cfg = BalanceConfig::default();
        assert_eq!(
            smooth_open_counts(&[25, 25, 25, 25], &cfg),
            (vec![25, 25, 25, 25], true)
        );
    }

    #[test]
    fn proportional_sums_exactly() {
        assert_eq!(proportional(&[5, 5], 7), vec![4, 3]);
        assert_eq!(proportional(&[6, 3, 1], 5), vec![3, 2, 0]);
        assert_eq!(proportional(&[2, 2], 10), vec![2, 2]);
    }
}
