use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use greenroute::pipeline::{self, PipelineConfig};

/// Traffic-aware energy-efficient routing pipeline.
#[derive(Parser)]
#[command(name = "greenroute", version, about)]
struct Cli {
    /// Text config file (`key = value` lines); flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Topology file (simple line format or SNDlib native).
    #[arg(long, global = true)]
    topology: Option<PathBuf>,

    /// Snapshot directory.
    #[arg(long, global = true)]
    snapshots: Option<PathBuf>,

    /// Output directory for models and reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Traffic volume grid in percent, e.g. `10,20,30`.
    #[arg(long, global = true)]
    volumes: Option<String>,

    /// Principal component count: `auto` (cross-validated) or an integer.
    #[arg(long, global = true)]
    k: Option<String>,

    /// Component grid for cross-validation, e.g. `1,2,4,8,16`.
    #[arg(long, global = true)]
    k_grid: Option<String>,

    /// Cross-validation fold count.
    #[arg(long, global = true)]
    folds: Option<usize>,

    /// Refine step size in percent.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Refine termination threshold on the energy-saving change.
    #[arg(long, global = true)]
    beta: Option<f64>,

    /// Accuracy tolerance band in percent.
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Candidate paths per flow.
    #[arg(long = "paths-k", global = true)]
    paths_k: Option<usize>,

    /// Brute-force grid step in percent.
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Seed for fold shuffling and synthetic data.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Latent dimension of synthetic snapshots.
    #[arg(long = "latent-dim", global = true)]
    latent_dim: Option<usize>,

    /// Number of synthetic snapshots.
    #[arg(long, global = true)]
    count: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic snapshots into the snapshot directory.
    Synth,
    /// Label every snapshot at every volume with brute-force-optimal
    /// (umin, umax) parameters; writes features.csv and labels.csv.
    Label,
    /// Cross-validate the component count and fit the four predictors.
    Train,
    /// Run cross-validation only and write cv_report.csv.
    Cv,
    /// Evaluate saved models on test snapshots against the oracle.
    Evaluate,
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path).map_err(|e| e.to_string())?,
        None => PipelineConfig::default(),
    };
    let mut set = |key: &str, value: Option<String>| -> Result<(), String> {
        if let Some(v) = value {
            cfg.apply(key, &v)?;
        }
        Ok(())
    };
    set("topology", cli.topology.as_ref().map(|p| p.display().to_string()))?;
    set("snapshots", cli.snapshots.as_ref().map(|p| p.display().to_string()))?;
    set("out", cli.out.as_ref().map(|p| p.display().to_string()))?;
    set("volumes", cli.volumes.clone())?;
    set("k", cli.k.clone())?;
    set("k_grid", cli.k_grid.clone())?;
    set("folds", cli.folds.map(|v| v.to_string()))?;
    set("alpha", cli.alpha.map(|v| v.to_string()))?;
    set("beta", cli.beta.map(|v| v.to_string()))?;
    set("epsilon", cli.epsilon.map(|v| v.to_string()))?;
    set("paths_k", cli.paths_k.map(|v| v.to_string()))?;
    set("step", cli.step.map(|v| v.to_string()))?;
    set("seed", cli.seed.map(|v| v.to_string()))?;
    set("latent_dim", cli.latent_dim.map(|v| v.to_string()))?;
    set("count", cli.count.map(|v| v.to_string()))?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), String> {
    let cfg = build_config(cli)?;
    match cli.command {
        Command::Synth => {
            let written = pipeline::cmd_synth(&cfg).map_err(|e| e.to_string())?;
            println!("wrote {} snapshots to {}", written.len(), cfg.snapshots.display());
        }
        Command::Label => {
            let rows = pipeline::cmd_label(&cfg).map_err(|e| e.to_string())?;
            println!(
                "labeled {} snapshot/volume cells -> {}",
                rows.len(),
                cfg.out.join("labels.csv").display()
            );
        }
        Command::Train => {
            let out = pipeline::cmd_train(&cfg).map_err(|e| e.to_string())?;
            println!("fitted 4 models at k = {}", out.k);
            for path in &out.model_paths {
                println!("  {}", path.display());
            }
            if let Some(cv) = &out.cv {
                println!(
                    "cross-validation chose k = {} over {} grid points",
                    cv.chosen_k,
                    cv.rows.len()
                );
            }
        }
        Command::Cv => {
            let report = pipeline::cmd_cv(&cfg).map_err(|e| e.to_string())?;
            println!("k,size_reduction,mean_accuracy,variance_retained");
            for row in &report.rows {
                println!(
                    "{},{:.4},{:.4},{:.4}",
                    row.k, row.size_reduction, row.mean_accuracy, row.variance_retained
                );
            }
            println!("chosen k = {}", report.chosen_k);
        }
        Command::Evaluate => {
            let report = pipeline::cmd_evaluate(&cfg).map_err(|e| e.to_string())?;
            println!(
                "evaluated {} cells -> {}",
                report.rows.len(),
                cfg.out.join("run_report.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
