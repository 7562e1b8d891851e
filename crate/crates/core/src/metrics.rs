//! Scoring model predictions against a generated corpus.
//!
//! Categories are flat strings grouped by prefix: `overall`,
//! `structure/<s>`, `semantic/<s>`, `reasoning/<r>/{binary,open,all}` and,
//! for baselines only, `content/<key>`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::splits::build_indirect_pairing;
use crate::templates::{AnswerType, QuestionRecord};
use crate::{Error, Ontology, Result};

pub type Predictions = BTreeMap<String, String>;

#[derive(Debug, Deserialize)]
struct PredictionLine {
    qid: String,
    answer: String,
}

/// Read `{qid, answer}` lines. A repeated qid keeps its last answer.
pub fn read_predictions(text: &str, origin: &str) -> Result<Predictions> {
    let mut out = Predictions::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let p: PredictionLine = serde_json::from_str(line).map_err(|e| Error::parse(origin, e))?;
        out.insert(p.qid, p.answer);
    }
    Ok(out)
}

/// Lowercase, trim, collapse whitespace and map through the ontology's
/// synonym merges.
pub fn normalize(answer: &str, ontology: &Ontology) -> String {
    let s = answer
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    ontology.canonical(&s).to_string()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Cell {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += ok as usize;
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

/// Report categories a record belongs to.
pub fn categories(r: &QuestionRecord) -> Vec<String> {
    let kind = match r.answer_type {
        AnswerType::Binary => "binary",
        AnswerType::Open => "open",
    };
    let mut out = vec![
        "overall".to_string(),
        format!("structure/{}", r.structure.name()),
        format!("semantic/{}", r.semantic.name()),
    ];
    for t in &r.reasoning {
        out.push(format!("reasoning/{t}/{kind}"));
        out.push(format!("reasoning/{t}/all"));
    }
    out
}

/// Accuracy of always guessing each category's most frequent answer. Ties
/// go to the alphabetically first answer; the value is the same either way.
pub fn most_likely_baseline(
    corpus: &[QuestionRecord],
    ontology: &Ontology,
) -> BTreeMap<String, f64> {
    let mut answers: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for r in corpus {
        let a = normalize(&r.answer, ontology);
        let mut cats = categories(r);
        cats.push(format!("content/{}", r.content_key()));
        for c in cats {
            *answers.entry(c).or_default().entry(a.clone()).or_default() += 1;
        }
    }
    answers
        .into_iter()
        .map(|(c, counts)| {
            let total: usize = counts.values().sum();
            let top = counts.values().copied().max().unwrap_or(0);
            (c, top as f64 / total as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndirectScore {
    /// Accuracy over every indirect question of this kind.
    pub recall: Option<f64>,
    pub recall_n: usize,
    /// Accuracy over the indirect questions whose direct counterpart was
    /// answered correctly. Null when there are none.
    pub precision: Option<f64>,
    pub precision_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub steps: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub weighted: bool,
    /// Null when fewer than two step counts are present.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub table: Vec<StepRow>,
}

/// Least squares of per-step accuracy on step count. Weighted fits use
/// question counts as weights.
pub fn fit_steps(table: Vec<StepRow>, weighted: bool) -> Regression {
    let w = |r: &StepRow| if weighted { r.total as f64 } else { 1.0 };
    let pts: Vec<(f64, f64, f64)> = table
        .iter()
        .filter(|r| r.total > 0)
        .map(|r| (r.steps as f64, r.accuracy, w(r)))
        .collect();
    let mut fit = Regression {
        weighted,
        slope: None,
        intercept: None,
        r2: None,
        table,
    };
    if pts.len() < 2 {
        return fit;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    fit.slope = Some(slope);
    fit.intercept = Some(intercept);
    fit.r2 = Some(if syy > 0.0 { 1.0 - res / syy } else { 0.0 });
    fit
}

pub fn steps_regression(
    corpus: &[QuestionRecord],
    predictions: &Predictions,
    ontology: &Ontology,
    weighted: bool,
) -> Regression {
    let mut by_steps: BTreeMap<usize, Cell> = BTreeMap::new();
    for r in corpus {
        by_steps
            .entry(r.steps)
            .or_default()
            .add(is_correct(r, predictions, ontology));
    }
    let table = by_steps
        .into_iter()
        .map(|(steps, c)| StepRow {
            steps,
            correct: c.correct,
            total: c.total,
            accuracy: c.accuracy,
        })
        .collect();
    fit_steps(table, weighted)
}

fn is_correct(r: &QuestionRecord, predictions: &Predictions, ontology: &Ontology) -> bool {
    predictions
        .get(&r.qid)
        .is_some_and(|p| normalize(p, ontology) == normalize(&r.answer, ontology))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub categories: BTreeMap<String, Cell>,
    pub most_likely: BTreeMap<String, f64>,
    pub indirect: BTreeMap<String, IndirectScore>,
    pub regression: Regression,
    /// Corpus questions without a prediction; scored as wrong.
    pub missing: usize,
    /// Predicted qids absent from the corpus; ignored.
    pub unknown: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub weighted_regression: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            weighted_regression: true,
        }
    }
}

pub fn score(
    corpus: &[QuestionRecord],
    predictions: &Predictions,
    ontology: &Ontology,
    cfg: ScoreConfig,
) -> EvalReport {
    let mut cats: BTreeMap<String, Cell> = BTreeMap::new();
    let mut correct: BTreeMap<&str, bool> = BTreeMap::new();
    for r in corpus {
        let ok = is_correct(r, predictions, ontology);
        correct.insert(&r.qid, ok);
        for c in categories(r) {
            cats.entry(c).or_default().add(ok);
        }
    }
    let missing = corpus
        .iter()
        .filter(|r| !predictions.contains_key(&r.qid))
        .count();
    let unknown = predictions
        .keys()
        .filter(|q| !correct.contains_key(q.as_str()))
        .cloned()
        .collect();

    let direct_of = build_indirect_pairing(corpus)
        .direct_of()
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect::<BTreeMap<_, _>>();
    let mut recall: BTreeMap<String, Cell> = BTreeMap::new();
    let mut precision: BTreeMap<String, Cell> = BTreeMap::new();
    for r in corpus {
        let Some(kind) = r.indirect_kind() else {
            continue;
        };
        let ok = correct[r.qid.as_str()];
        recall.entry(kind.name().to_string()).or_default().add(ok);
        let p = precision.entry(kind.name().to_string()).or_default();
        if direct_of.get(&r.qid).is_some_and(|d| correct[d.as_str()]) {
            p.add(ok);
        }
    }
    let indirect = recall
        .into_iter()
        .map(|(k, rc)| {
            let pc = precision[&k];
            let score = IndirectScore {
                recall: Some(rc.accuracy),
                recall_n: rc.total,
                precision: (pc.total > 0).then_some(pc.accuracy),
                precision_n: pc.total,
            };
            (k, score)
        })
        .collect();

    EvalReport {
        categories: cats,
        most_likely: most_likely_baseline(corpus, ontology),
        indirect,
        regression: steps_regression(corpus, predictions, ontology, cfg.weighted_regression),
        missing,
        unknown,
    }
}

impl EvalReport {
    /// One row per report category, then one per indirect kind.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,correct,total,accuracy,most_likely\n");
        for (c, cell) in &self.categories {
            let ml = self
                .most_likely
                .get(c)
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{c},{},{},{:.6},{ml}\n",
                cell.correct, cell.total, cell.accuracy
            ));
        }
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "N/A".into());
        for (k, s) in &self.indirect {
            out.push_str(&format!(
                "indirect/{k}/recall,,{},{},\n",
                s.recall_n,
                fmt(s.recall)
            ));
            out.push_str(&format!(
                "indirect/{k}/precision,,{},{},\n",
                s.precision_n,
                fmt(s.precision)
            ));
        }
        out
    }

    pub fn overall(&self) -> Option<f64> {
        self.categories.get("overall").map(|c| c.accuracy)
    }
}
