use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use refattn_core::checks::{check_necessity, check_sufficiency, NecessityOptions};
use refattn_core::{generate_many, preset_config, rollout_tensor, RolloutMode, Sample, Split, TaskConfig, TaskId};
use refattn_harness::heatmap::write_heatmap;
use refattn_harness::{
    dump_paths, evaluate, read_dataset, read_dump, read_predictions, render, write_dataset, write_predictions,
    write_scripted_dumps, EvalOptions, EvalReport, Prediction, ReportFormat, ScriptKind,
};

#[derive(Parser)]
#[command(name = "refattn", version, about = "Algorithmic tasks with reference attention masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset of generated samples.
    Generate(GenerateArgs),
    /// Score predictions and attention dumps against a dataset.
    Evaluate(EvaluateArgs),
    /// Render an evaluation report as tables.
    Report(ReportArgs),
    /// Export the rollout of one sample as a CSV grid and an SVG heatmap.
    Heatmap(HeatmapArgs),
    /// Run the randomized mask sufficiency and necessity checks.
    Selftest(SelftestArgs),
    /// Write scripted attention dumps (and optionally perfect predictions).
    Script(ScriptArgs),
}

/// `all` or one value.
fn parse_tasks(s: &str) -> Result<Vec<TaskId>> {
    if s == "all" {
        return Ok(TaskId::ALL.to_vec());
    }
    Ok(vec![s.parse()?])
}

fn parse_splits(s: &str) -> Result<Vec<Split>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Split::ALL.to_vec());
    }
    Ok(vec![s.parse()?])
}

#[derive(Args)]
struct GenerateArgs {
    /// Task name, or `all`.
    #[arg(long, default_value = "all")]
    task: String,
    /// ID, OOD or `all`.
    #[arg(long, default_value = "all")]
    split: String,
    /// Samples per task and split.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON task config replacing the presets.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    preds: PathBuf,
    /// Directory of attention dumps; attention statistics are skipped when absent.
    #[arg(long)]
    dumps: Option<PathBuf>,
    /// `residual` or `raw`.
    #[arg(long, default_value = "residual")]
    rollout: RolloutMode,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Report JSON destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the tables to standard error in this format.
    #[arg(long)]
    format: Option<ReportFormat>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON written by `evaluate`.
    #[arg(long)]
    report: PathBuf,
    /// `text` or `csv`.
    #[arg(long, default_value = "text")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    dumps: PathBuf,
    /// Seed of the sample to draw.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    task: Option<TaskId>,
    #[arg(long)]
    split: Option<Split>,
    #[arg(long, default_value = "residual")]
    rollout: RolloutMode,
    /// Output path prefix; `.csv` and `.svg` are appended.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value = "all")]
    task: String,
    #[arg(long, default_value = "all")]
    split: String,
    /// Pairs for sufficiency and triples for necessity, per task and split.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Search budget per necessity triple.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum share of necessity triples with a witness.
    #[arg(long, default_value_t = 0.9)]
    min_rate: f64,
}

#[derive(Args)]
struct ScriptArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Directory to write dumps into (created if missing).
    #[arg(long)]
    dumps: PathBuf,
    /// `oracle` or `uniform`.
    #[arg(long, default_value = "oracle")]
    kind: ScriptKind,
    /// Also write perfect predictions here.
    #[arg(long)]
    preds: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let configs: Vec<TaskConfig> = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg: TaskConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
            vec![cfg]
        }
        None => {
            let mut v = Vec::new();
            for task in parse_tasks(&a.task)? {
                for split in parse_splits(&a.split)? {
                    v.push(preset_config(task, split));
                }
            }
            v
        }
    };
    let mut samples: Vec<Sample> = Vec::new();
    for cfg in &configs {
        samples.extend(generate_many(cfg, a.n, a.seed)?);
    }
    match &a.out {
        Some(p) => write_dataset(p, &samples)?,
        None => emit(None, &refattn_harness::dataset::to_jsonl(&samples)?)?,
    }
    log::info!("wrote {} samples", samples.len());
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let samples = read_dataset(&a.dataset)?;
    let preds = read_predictions(&a.preds)?;
    let opts = EvalOptions { rollout: a.rollout, alpha: a.alpha };
    let report = evaluate(&samples, &preds, a.dumps.as_deref(), &opts)?;
    emit(a.out.as_deref(), &report.to_json())?;
    if let Some(format) = a.format {
        eprint!("{}", render(&report, format));
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report = EvalReport::from_json(&text)?;
    emit(a.out.as_deref(), &render(&report, a.format))
}

fn cmd_heatmap(a: HeatmapArgs) -> Result<()> {
    let samples = read_dataset(&a.dataset)?;
    let matches: Vec<&Sample> = samples
        .iter()
        .filter(|s| s.seed == a.seed)
        .filter(|s| a.task.is_none_or(|t| s.task == t))
        .filter(|s| a.split.is_none_or(|sp| s.split == sp))
        .collect();
    let sample = match matches.as_slice() {
        [one] => *one,
        [] => bail!("no sample with seed {} matches", a.seed),
        _ => bail!("{} samples match seed {}; narrow with --task/--split", matches.len(), a.seed),
    };
    let (header_path, _) = dump_paths(&a.dumps, &sample.key());
    let (header, tensor) = read_dump(&header_path)?;
    let r = rollout_tensor(&tensor, a.rollout)?;
    let (csv, svg) = write_heatmap(sample, &r, header.prefix_len, &a.out)?;
    eprintln!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn cmd_selftest(a: SelftestArgs) -> Result<()> {
    let mut failed = 0;
    for task in parse_tasks(&a.task)? {
        for split in parse_splits(&a.split)? {
            let cfg = preset_config(task, split);
            let suff = check_sufficiency(&cfg, a.n, a.seed);
            let ok = suff.pairs == a.n && suff.violations.is_empty();
            failed += usize::from(!ok);
            println!(
                "{} sufficiency {task} {split}: {} pairs, {} violations",
                if ok { "PASS" } else { "FAIL" },
                suff.pairs,
                suff.violations.len()
            );
            let opts = NecessityOptions { triples: a.n, trials: a.trials, skip_structural: true };
            let nec = check_necessity(&cfg, opts, a.seed);
            let ok = nec.rate() >= a.min_rate;
            failed += usize::from(!ok);
            println!(
                "{} necessity {task} {split}: {}/{} witnessed ({:.1}%)",
                if ok { "PASS" } else { "FAIL" },
                nec.witnessed,
                nec.triples,
                100.0 * nec.rate()
            );
        }
    }
    if failed > 0 {
        bail!("{failed} checks failed");
    }
    Ok(())
}

fn cmd_script(a: ScriptArgs) -> Result<()> {
    let samples = read_dataset(&a.dataset)?;
    fs::create_dir_all(&a.dumps).with_context(|| format!("creating {}", a.dumps.display()))?;
    write_scripted_dumps(&samples, &a.dumps, a.kind)?;
    if let Some(p) = &a.preds {
        let preds: Vec<Prediction> = samples.iter().map(Prediction::perfect).collect();
        write_predictions(p, &preds)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::Selftest(a) => cmd_selftest(a),
        Command::Script(a) => cmd_script(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
