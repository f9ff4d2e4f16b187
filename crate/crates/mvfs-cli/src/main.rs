//! `mvfs` — batch front end for joint missing-view imputation and
//! unsupervised multi-view feature selection.
//!
//! Subcommands: `gen-synthetic` (fixture generator), `mask` (incomplete-view
//! simulation), `select` (run the solver), `evaluate` (cluster the selected
//! features against labels), `sweep` (parameter grids). Every command is
//! deterministic given its config and seed: rerunning writes byte-identical
//! files.
//!
//! Exit codes: 0 success, 2 input error, 3 solver stopped at max_iter
//! without converging (results still written), 4 numerical failure.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mvfs", version, about = "Joint missing-view imputation and unsupervised feature selection for incomplete multi-view data", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-cluster synthetic multi-view dataset.
    GenSynthetic(GenSyntheticArgs),
    /// Draw an incomplete-view mask for a complete dataset.
    Mask(MaskArgs),
    /// Run the feature-selection solver from a run config.
    Select(SelectArgs),
    /// Cluster selected features against labels and report ACC/NMI.
    Evaluate(EvaluateArgs),
    /// Run a grid of (alpha, lambda, fraction, ratio) cells.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenSyntheticArgs {
    /// Output directory for the CSVs and manifest.
    #[arg(long)]
    out: std::path::PathBuf,
    /// Sample count.
    #[arg(long, default_value_t = 60)]
    n: usize,
    /// Planted cluster count.
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    /// Per-view feature layout, e.g. `5+15,5+10` for two views with 5
    /// informative features each and 15/10 noise features.
    #[arg(long, default_value = "5+15,5+10")]
    views: String,
    /// Standard deviation of the planted cluster centers.
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    /// Within-cluster noise on informative features.
    #[arg(long, default_value_t = 1.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MaskArgs {
    /// Dataset manifest (the dataset must be complete).
    #[arg(long)]
    manifest: std::path::PathBuf,
    /// Fraction of samples to remove per view, in [0, 0.9].
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for mask.csv and mask.json.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Run config JSON (see README for the schema).
    #[arg(long)]
    config: std::path::PathBuf,
    /// Override the config's ablation: full, no_imputation, no_sample_weights.
    #[arg(long)]
    ablation: Option<String>,
    /// Also write the completed (imputed) views as CSV.
    #[arg(long)]
    write_imputed: bool,
    /// Also dump each view's final similarity matrix and Laplacian as CSV.
    #[arg(long)]
    dump_graph: bool,
    #[command(flatten)]
    solver: SolverOverrides,
}

/// Per-field overrides of the run config's solver section. Defaults when
/// neither the flag nor the config sets a value: alpha 1, lambda 1,
/// gamma 1, k 5, eps 1e-8, max-iter 100, tol 1e-5, select-fraction 0.4,
/// standardize true, sylvester-tol 1e-10, sylvester-max-iter 500, ridge
/// auto-scaled.
#[derive(Args)]
struct SolverOverrides {
    /// View weight (broadcast to all views).
    #[arg(long)]
    alpha: Option<f64>,
    /// Row-sparsity weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Robust-loss scale.
    #[arg(long)]
    gamma: Option<f64>,
    /// Neighbor count of the similarity graph.
    #[arg(long)]
    k: Option<usize>,
    /// Reweighting smoother.
    #[arg(long)]
    eps: Option<f64>,
    /// Outer iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative objective-change stopping threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Fraction of features to keep per view.
    #[arg(long)]
    select_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Standardize features before solving (true/false).
    #[arg(long)]
    standardize: Option<bool>,
    /// Relative residual tolerance of the inner missing-block solver.
    #[arg(long)]
    sylvester_tol: Option<f64>,
    /// Iteration cap of the inner missing-block solver.
    #[arg(long)]
    sylvester_max_iter: Option<usize>,
    /// Fixed ridge added to the missing-block operator.
    #[arg(long)]
    ridge: Option<f64>,
}

impl SolverOverrides {
    fn apply(&self, config: &mut mvfs::solver::SolverConfig) {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(value) = self.$field { $target = value; })*
            };
        }
        set! {
            alpha => config.alpha,
            lambda => config.lambda,
            gamma => config.gamma,
            k => config.k,
            eps => config.eps,
            max_iter => config.max_iter,
            tol => config.tol,
            select_fraction => config.select_fraction,
            seed => config.seed,
            standardize => config.standardize,
            sylvester_tol => config.sylvester.tol,
            sylvester_max_iter => config.sylvester.max_iter,
        }
        if self.ridge.is_some() {
            config.sylvester.ridge = self.ridge;
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labeled dataset manifest.
    #[arg(long)]
    manifest: std::path::PathBuf,
    /// result.json produced by `select`.
    #[arg(long)]
    result: std::path::PathBuf,
    /// Selection fractions to score, comma separated.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5")]
    fractions: String,
    /// Cluster count; defaults to the number of distinct labels.
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long, default_value_t = 30)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for metrics.json.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config JSON (see README for the schema).
    #[arg(long)]
    config: std::path::PathBuf,
    /// Worker pool size.
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenSynthetic(args) => commands::gen_synthetic(
            &args.out,
            args.n,
            args.clusters,
            &args.views,
            args.separation,
            args.noise_std,
            args.seed,
        ),
        Command::Mask(args) => commands::mask(&args.manifest, args.ratio, args.seed, &args.out),
        Command::Select(args) => commands::select(
            &args.config,
            args.ablation.as_deref(),
            args.write_imputed,
            args.dump_graph,
            |solver| args.solver.apply(solver),
        ),
        Command::Evaluate(args) => commands::evaluate(
            &args.manifest,
            &args.result,
            &args.fractions,
            args.clusters,
            args.restarts,
            args.seed,
            &args.out,
        ),
        Command::Sweep(args) => commands::sweep(&args.config, args.jobs),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            if err.is_input() {
                ExitCode::from(2)
            } else {
                ExitCode::from(4)
            }
        }
    }
}
