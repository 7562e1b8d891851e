//! `compqa`: run the corpus pipeline stage by stage. Stages talk only
//! through files; each output gets a `<file>.manifest.json` sidecar with the
//! seed, the config hash and content hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use compqa::augment::{augment_corpus, overlapping_rule_pairs, AugmentConfig};
use compqa::balance::{balance, BalanceConfig};
use compqa::generator::{config_hash, from_jsonl, generate_corpus, to_jsonl, GenerateConfig};
use compqa::graph::{load_corpus, write_corpus_jsonl};
use compqa::metrics::{read_predictions, score, ScoreConfig};
use compqa::splits::{build_split, SplitKind, SplitSpec};
use compqa::synth::{synth_corpus, SynthParams};
use compqa::templates::{QuestionRecord, Registry};
use compqa::util::hex_sha256;
use compqa::{Ontology, VideoGraph};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct SynthSection {
    count: Option<usize>,
    prefix: Option<String>,
    params: SynthParams,
}

/// The whole pipeline configuration. Every section is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct PipelineConfig {
    seed: Option<u64>,
    ontology: Option<PathBuf>,
    templates: Option<PathBuf>,
    synth: SynthSection,
    augment: AugmentConfig,
    generate: GenerateConfig,
    balance: BalanceConfig,
    split: Option<SplitSpec>,
}

#[derive(Parser)]
#[command(name = "compqa", version, about = "Compositional question corpus pipeline")]
struct Cli {
    /// Pipeline configuration (JSON). Flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stage; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: COMPQA_WORKERS, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Exit with status 3 when a stage flags an infeasibility.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    NovelComposition,
    IndirectReference,
    MoreSteps,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic scene-graph corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Validate and canonicalize scene graphs (directory, .json or .jsonl).
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the augmentation passes.
    Augment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the unbalanced question corpus.
    Generate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Candidates kept per video.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Balance answer distributions and question structures.
    Balance {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build train/test splits into a directory.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
        /// Step threshold of the more-steps split.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Print category histograms of a question file.
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Score predictions against a question file.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Restrict scoring to the qids listed in this file.
        #[arg(long)]
        subset: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Fit the steps regression without count weights.
        #[arg(long)]
        unweighted: bool,
    },
}

/// A problem with the invocation rather than the data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(flags) if cli.strict && !flags.is_empty() => {
            eprintln!("strict: {} flag(s): {}", flags.len(), flags.join(", "));
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn workers(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("COMPQA_WORKERS") {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Usage(format!("COMPQA_WORKERS must be a number, got {v:?}")).into()),
        Err(_) => Ok(None),
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg: PipelineConfig = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", p.display())))?
        }
        None => PipelineConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(s) = cfg.seed {
        cfg.generate.seed = s;
        cfg.balance.seed = s;
    }
    Ok(cfg)
}

fn ontology(cfg: &PipelineConfig) -> Result<Ontology> {
    Ok(match &cfg.ontology {
        Some(p) => Ontology::load(p)?,
        None => Ontology::desk(),
    })
}

fn registry(cfg: &PipelineConfig) -> Result<Registry> {
    Ok(match &cfg.templates {
        Some(p) => Registry::load(p)?,
        None => Registry::desk(),
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_questions(path: &Path) -> Result<Vec<QuestionRecord>> {
    Ok(from_jsonl(&read(path)?, &path.display().to_string())?)
}

fn read_graphs(path: &Path, o: &Ontology) -> Result<Vec<VideoGraph>> {
    Ok(load_corpus(path, o)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Write `text` to `path` and its manifest sidecar.
fn emit(path: &Path, text: &str, stage: &str, seed: u64, hash: &str, inputs: &[&str], extra: serde_json::Value) -> Result<()> {
    write(path, text)?;
    let manifest = serde_json::json!({
        "stage": stage,
        "seed": seed,
        "config_hash": hash,
        "inputs_sha256": inputs.iter().map(|t| hex_sha256(t.as_bytes())).collect::<Vec<_>>(),
        "output_sha256": hex_sha256(text.as_bytes()),
        "details": extra,
    });
    let mut side = path.as_os_str().to_owned();
    side.push(".manifest.json");
    write(Path::new(&side), &(serde_json::to_string_pretty(&manifest)? + "\n"))
}

fn run(cli: &Cli) -> Result<Vec<String>> {
    let cfg = load_config(cli)?;
    if let Some(n) = workers(cli.workers)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("starting worker pool")?;
    }
    let seed = cfg.seed.unwrap_or(0);
    let mut flags = Vec::new();
    match &cli.command {
        Command::Synth { out, count, prefix } => {
            let o = ontology(&cfg)?;
            let n = count.or(cfg.synth.count).unwrap_or(100);
            let prefix = prefix.clone().or(cfg.synth.prefix.clone()).unwrap_or_else(|| "s".into());
            let graphs = synth_corpus(seed, n, &prefix, &cfg.synth.params, &o)?;
            let hash = config_hash(&(&cfg.synth.params, n, &prefix));
            emit(out, &write_corpus_jsonl(&graphs), "synth", seed, &hash, &[], serde_json::json!({"videos": n}))?;
            eprintln!("synth: {n} graphs -> {}", out.display());
        }
        Command::Ingest { input, out } => {
            let o = ontology(&cfg)?;
            let graphs = read_graphs(input, &o)?;
            let text = write_corpus_jsonl(&graphs);
            emit(out, &text, "ingest", seed, &config_hash(&o.to_json_string()), &[], serde_json::json!({"videos": graphs.len()}))?;
            eprintln!("ingest: {} graphs -> {}", graphs.len(), out.display());
        }
        Command::Augment { input, out } => {
            let o = ontology(&cfg)?;
            let src = read(input)?;
            let mut graphs = read_graphs(input, &o)?;
            let reports = augment_corpus(&mut graphs, &o, &cfg.augment);
            for g in &graphs {
                for (a, b) in overlapping_rule_pairs(g, &o) {
                    flags.push(format!("overlap {}: {a} / {b}", g.video_id));
                }
            }
            let totals = serde_json::json!({
                "videos": graphs.len(),
                "entailments_added": reports.iter().map(|r| r.entailments_added).sum::<usize>(),
                "intervals_adjusted": reports.iter().map(|r| r.intervals_adjusted).sum::<usize>(),
                "sparse_videos": reports.iter().filter(|r| r.sparse_flagged).count(),
                "degenerate_pairs": reports.iter().map(|r| r.degenerate_pairs.len()).sum::<usize>(),
            });
            emit(out, &write_corpus_jsonl(&graphs), "augment", seed, &config_hash(&cfg.augment), &[&src], totals)?;
            eprintln!("augment: {} graphs -> {}", graphs.len(), out.display());
        }
        Command::Generate { input, out, cap } => {
            let (o, reg) = (ontology(&cfg)?, registry(&cfg)?);
            let src = read(input)?;
            let graphs = read_graphs(input, &o)?;
            let mut gc = cfg.generate.clone();
            if let Some(c) = cap {
                gc.cap = *c;
            }
            let g = generate_corpus(&graphs, &reg, &o, &gc);
            let details = serde_json::json!({
                "questions": g.manifest.questions,
                "candidates": g.manifest.candidates,
                "undefined": g.manifest.undefined,
                "per_structure": g.manifest.per_structure,
                "per_template": g.manifest.per_template,
                "per_reasoning": g.manifest.per_reasoning,
                "rejections": g.manifest.rejections,
            });
            emit(out, &to_jsonl(&g.records), "generate", gc.seed, &g.manifest.config_hash, &[&src], details)?;
            write(&sibling(out, "rejections.jsonl"), &to_jsonl(&g.rejections))?;
            eprintln!("generate: {} questions -> {}", g.records.len(), out.display());
        }
        Command::Balance { input, out } => {
            let src = read(input)?;
            let records = read_questions(input)?;
            let (kept, plan) = balance(&records, &cfg.balance);
            flags.extend(plan.flagged.iter().cloned());
            let details = serde_json::json!({
                "input": records.len(),
                "kept": kept.len(),
                "structure_counts_before": plan.structure_counts_before,
                "structure_counts_after": plan.structure_counts_after,
                "flagged": plan.flagged,
            });
            emit(out, &to_jsonl(&kept), "balance", cfg.balance.seed, &config_hash(&cfg.balance), &[&src], details)?;
            write(&sibling(out, "balance_plan.json"), &(serde_json::to_string_pretty(&plan)? + "\n"))?;
            eprintln!("balance: {} -> {} questions -> {}", records.len(), kept.len(), out.display());
        }
        Command::Split { input, out_dir, kind, m } => {
            let src = read(input)?;
            let records = read_questions(input)?;
            let kinds: &[SplitKind] = match kind {
                KindArg::NovelComposition => &[SplitKind::NovelComposition],
                KindArg::IndirectReference => &[SplitKind::IndirectReference],
                KindArg::MoreSteps => &[SplitKind::MoreSteps],
                KindArg::All => &[SplitKind::NovelComposition, SplitKind::IndirectReference, SplitKind::MoreSteps],
            };
            for k in kinds {
                let mut spec = cfg.split.clone().unwrap_or_else(|| SplitSpec::new(*k));
                spec.kind = *k;
                if let Some(m) = m {
                    spec.m = *m;
                }
                if spec.m == 0 {
                    return Err(Usage("m must be at least 1".into()).into());
                }
                let res = build_split(&records, &spec);
                flags.extend(res.flagged.iter().map(|f| format!("{}: {f}", k.name())));
                let dir = out_dir.join(k.name());
                let lines = |v: &[String]| v.iter().map(|q| format!("{q}\n")).collect::<String>();
                let details = serde_json::json!({
                    "train": res.train.len(),
                    "test": res.test.len(),
                    "excluded": res.exclusions.len(),
                    "flagged": res.flagged,
                });
                let hash = config_hash(&spec);
                emit(&dir.join("train.txt"), &lines(&res.train), "split", seed, &hash, &[&src], details)?;
                write(&dir.join("test.txt"), &lines(&res.test))?;
                write(&dir.join("exclusions.jsonl"), &res.exclusions_jsonl())?;
                eprintln!("split {}: {} train / {} test", k.name(), res.train.len(), res.test.len());
            }
        }
        Command::Stats { input, json } => {
            let records = read_questions(input)?;
            let s = stats(&records);
            if *json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                print_stats(&s);
            }
        }
        Command::Evaluate {
            corpus,
            predictions,
            subset,
            out,
            csv,
            unweighted,
        } => {
            let o = ontology(&cfg)?;
            let mut records = read_questions(corpus)?;
            if let Some(p) = subset {
                let keep: std::collections::BTreeSet<String> = read(p)?.lines().map(|l| l.trim().to_string()).collect();
                records.retain(|r| keep.contains(&r.qid));
            }
            let preds = read_predictions(&read(predictions)?, &predictions.display().to_string())?;
            if !records.iter().any(|r| preds.contains_key(&r.qid)) {
                anyhow::bail!("no prediction matches a corpus question");
            }
            let rep = score(
                &records,
                &preds,
                &o,
                ScoreConfig {
                    weighted_regression: !unweighted,
                },
            );
            for q in &rep.unknown {
                eprintln!("warning: prediction for unknown qid {q} skipped");
            }
            write(out, &(serde_json::to_string_pretty(&rep)? + "\n"))?;
            if let Some(c) = csv {
                write(c, &rep.to_csv())?;
            }
            println!("overall accuracy {:.4}", rep.overall().unwrap_or(0.0));
        }
    }
    Ok(flags)
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.with_file_name(name)
}

#[derive(Serialize)]
struct Stats {
    questions: usize,
    videos: usize,
    per_structure: BTreeMap<String, usize>,
    structure_share: BTreeMap<String, f64>,
    per_template: BTreeMap<String, usize>,
    per_reasoning: BTreeMap<String, usize>,
    per_answer_type: BTreeMap<String, usize>,
    per_steps: BTreeMap<usize, usize>,
}

fn stats(records: &[QuestionRecord]) -> Stats {
    let mut s = Stats {
        questions: records.len(),
        videos: records.iter().map(|r| r.video_id.as_str()).collect::<std::collections::BTreeSet<_>>().len(),
        per_structure: BTreeMap::new(),
        structure_share: BTreeMap::new(),
        per_template: BTreeMap::new(),
        per_reasoning: BTreeMap::new(),
        per_answer_type: BTreeMap::new(),
        per_steps: BTreeMap::new(),
    };
    for r in records {
        *s.per_structure.entry(r.structure.name().into()).or_default() += 1;
        *s.per_template.entry(r.template_id.clone()).or_default() += 1;
        for t in &r.reasoning {
            *s.per_reasoning.entry(t.clone()).or_default() += 1;
        }
        let kind = serde_json::to_value(r.answer_type).expect("enum serializes");
        *s.per_answer_type.entry(kind.as_str().unwrap_or_default().to_string()).or_default() += 1;
        *s.per_steps.entry(r.steps).or_default() += 1;
    }
    for (k, v) in &s.per_structure {
        s.structure_share.insert(k.clone(), *v as f64 / records.len().max(1) as f64);
    }
    s
}

fn print_stats(s: &Stats) {
    println!("questions {}", s.questions);
    println!("videos {}", s.videos);
    let sections: [(&str, Vec<(String, usize)>); 4] = [
        ("structure", s.per_structure.iter().map(|(k, v)| (k.clone(), *v)).collect()),
        ("reasoning", s.per_reasoning.iter().map(|(k, v)| (k.clone(), *v)).collect()),
        ("answer type", s.per_answer_type.iter().map(|(k, v)| (k.clone(), *v)).collect()),
        ("template", s.per_template.iter().map(|(k, v)| (k.clone(), *v)).collect()),
    ];
    for (title, rows) in sections {
        println!();
        println!("{title}:");
        for (k, v) in rows {
            println!("  {k:<28} {v:>8} {:>7.2}%", 100.0 * v as f64 / s.questions.max(1) as f64);
        }
    }
    println!();
    println!("steps:");
    for (k, v) in &s.per_steps {
        println!("  {k:<28} {v:>8}");
    }
    println!();
    println!("query share {:.4}", s.structure_share.get("query").copied().unwrap_or(0.0));
}
