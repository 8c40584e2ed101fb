use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sybilbelief::eval::build_cell;
use sybilbelief::experiment::{
    build_benign, label_plan, ranking_cell, run_comparison, run_experiment, score, sybil_spec, sybilbelief_beliefs,
    with_jobs, DetectorKind, ExperimentConfig, MetricKind,
};
use sybilbelief::{auc, classify, confusion, io, parse_config, ScoreVector};

#[derive(Parser)]
#[command(name = "sybilbelief", version, about = "Semi-supervised Sybil detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one scenario cell with its labels.
    Synth(SynthArgs),
    /// Run one detector on a scenario and label file.
    Detect(DetectArgs),
    /// Score dumped predictions or rankings against a scenario.
    Eval(EvalArgs),
    /// Accepted-Sybil sweep over Sybil region sizes.
    Sweep(RunArgs),
    /// AUC comparison of several detectors over attack-edge counts.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides run.out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides run.jobs).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Trials per cell (overrides run.trials).
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Detectors to compare; defaults to every detector the labels allow.
    #[arg(long, value_delimiter = ',')]
    detectors: Option<Vec<DetectorKind>>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    attack_edges: usize,
    /// Sybil region size; ignored for duplicated regions.
    #[arg(long)]
    sybil_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    common: Common,
    /// Scenario path prefix as written by `synth`.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Detector (overrides detector.kind).
    #[arg(long)]
    detector: Option<DetectorKind>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: PathBuf,
    /// Labeled nodes, left out of the metrics.
    #[arg(long)]
    labels: PathBuf,
    /// Classification output (`node B|S`).
    #[arg(long, conflicts_with = "scores", required_unless_present = "scores")]
    predictions: Option<PathBuf>,
    /// Ranking output.
    #[arg(long)]
    scores: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(a) => synth(a),
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
    }
}

fn load_config(common: &Common, trials: Option<usize>) -> Result<ExperimentConfig> {
    let path = common.config.as_deref().context("--config is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(s) = common.seed {
        config.run.seed = s;
    }
    if let Some(o) = &common.out {
        config.run.out = Some(o.clone());
    }
    if let Some(j) = common.jobs {
        config.run.jobs = j;
    }
    if let Some(t) = trials {
        config.run.trials = t;
    }
    config.validate()?;
    if let Some(dir) = &config.run.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(config)
}

/// Writes `text` to `dir/name`, or to stdout when no directory is set.
fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match dir {
        Some(d) => {
            let path = d.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sweep(a: RunArgs) -> Result<()> {
    let mut config = load_config(&a.common, a.trials)?;
    config.metric = MetricKind::Classification;
    config.validate()?;
    let csv = run_experiment(&config)?;
    if let Some(dir) = &config.run.out {
        fs::write(dir.join("config.txt"), config.to_text())?;
    }
    emit(config.run.out.as_deref(), "sweep.csv", &csv)
}

fn compare(a: CompareArgs) -> Result<()> {
    let mut config = load_config(&a.run.common, a.run.trials)?;
    config.metric = MetricKind::Auc;
    let kinds = match a.detectors {
        Some(k) => k,
        None => DetectorKind::ALL
            .into_iter()
            .filter(|&k| config.validate_detector(k).is_ok())
            .collect(),
    };
    if kinds.is_empty() {
        bail!("no detector can run with the configured labels");
    }
    let csv = run_comparison(&config, &kinds)?;
    if let Some(dir) = &config.run.out {
        fs::write(dir.join("config.txt"), config.to_text())?;
    }
    emit(config.run.out.as_deref(), "compare.csv", &csv)
}

fn synth(a: SynthArgs) -> Result<()> {
    let config = load_config(&a.common, None)?;
    let dir = config.run.out.clone().context("--out is required")?;
    let benign = build_benign(&config)?;
    let prefix = dir.join("scenario");
    let (scenario, labels, detector_seed) = if config.metric == MetricKind::Auc {
        let cell = ranking_cell(&config, &benign, a.attack_edges, a.trial)?;
        let noisy = &cell.noisy;
        io::write_file(&dir.join("noisy_labels.txt"), |w| io::write_labels(noisy, w))?;
        (cell.scenario, cell.clean, cell.seeds.detector)
    } else {
        let size = a.sybil_size.context("--sybil-size is required for the classification metric")?;
        let plan = label_plan(&config, &benign, config.detector);
        let cell = build_cell(
            &benign.graph,
            a.attack_edges,
            &sybil_spec(&config),
            size,
            &plan,
            a.trial,
            config.run.seed,
        )?;
        (cell.scenario, cell.labels, cell.seeds.detector)
    };
    io::save_scenario(&scenario, &prefix)?;
    io::write_file(&dir.join("labels.txt"), |w| io::write_labels(&labels, w))?;
    fs::write(dir.join("detector_seed.txt"), format!("{detector_seed}\n"))?;
    println!(
        "wrote {} nodes, {} edges, {} attack edges, {} labels to {}",
        scenario.node_count(),
        scenario.graph().edge_count(),
        scenario.attack_edges().len(),
        labels.len(),
        dir.display()
    );
    Ok(())
}

fn detect(a: DetectArgs) -> Result<()> {
    let mut config = load_config(&a.common, None)?;
    if let Some(k) = a.detector {
        config.detector = k;
    }
    let kind = config.detector;
    let dir = config.run.out.clone().context("--out is required")?;
    let scenario = io::load_scenario(&a.scenario)?;
    let labels = io::read_labels(io::open(&a.labels)?)?;
    let seed = a.common.seed.unwrap_or(0);
    let graph = scenario.graph();
    with_jobs(config.run.jobs, || {
        if kind.classifies() {
            let beliefs = sybilbelief_beliefs(&config, kind, graph, &labels, seed)?;
            io::write_file(&dir.join("beliefs.txt"), |w| io::write_beliefs(&beliefs, w))?;
            io::write_file(&dir.join("predictions.txt"), |w| {
                io::write_predictions(&classify(&beliefs), w)
            })?;
            let scores = ScoreVector::from_beliefs(&beliefs);
            io::write_file(&dir.join("scores.txt"), |w| io::write_scores(&scores, w))
        } else {
            let scores = score(&config, kind, graph, &labels, seed)?;
            io::write_file(&dir.join("scores.txt"), |w| io::write_scores(&scores, w))
        }
    })
    .with_context(|| format!("running {kind}"))?;
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let scenario = io::load_scenario(&a.scenario)?;
    let exclude = io::read_labels(io::open(&a.labels)?)?.nodes();
    let csv = if let Some(p) = &a.predictions {
        let predicted = io::read_regions(io::open(p)?)?;
        let c = confusion(&predicted, &scenario, &exclude)?;
        format!(
            "false_negatives,false_positives\n{},{}\n",
            c.false_negatives, c.false_positives
        )
    } else {
        let p = a.scores.as_deref().expect("clap enforces one input");
        let scores = io::read_scores(io::open(p)?)?;
        format!("provenance,auc\n{},{:.6}\n", scores.provenance, auc(&scores, &scenario, &exclude)?)
    };
    if let Some(d) = &a.common.out {
        fs::create_dir_all(d)?;
    }
    emit(a.common.out.as_deref(), "eval.csv", &csv)
}
