//! Implementations of the five subcommands. Each returns the process exit
//! code on success; input and numerical errors bubble up as `mvfs::Error`
//! and are mapped to exit codes 2 and 4 in `main`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use mvfs::data::{apply_mask, load_dataset, write_dataset, write_matrix_csv, MultiViewDataset};
use mvfs::eval::evaluate_at_fraction;
use mvfs::seeding::stream_seed;
use mvfs::solver::{run, run_with_state, Ablation, SelectionResult, SolverConfig};
use mvfs::synth::{generate, SyntheticSpec, SyntheticView};
use mvfs::{Error, Result};

use crate::config::{read_json, resolve, write_json_pretty, RunConfigFile, SweepConfigFile};

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse a per-view layout such as `5+15,5+10`.
fn parse_views(spec: &str) -> Result<Vec<SyntheticView>> {
    spec.split(',')
        .map(|part| {
            let (informative, noise) = part
                .split_once('+')
                .ok_or_else(|| Error::InvalidParameter(format!(
                    "view spec {part:?} is not of the form informative+noise"
                )))?;
            let parse = |s: &str| {
                s.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse {s:?} as a feature count"))
                })
            };
            Ok(SyntheticView {
                informative: parse(informative)?,
                noise: parse(noise)?,
            })
        })
        .collect()
}

pub fn gen_synthetic(
    out: &Path,
    n: usize,
    clusters: usize,
    views: &str,
    separation: f64,
    noise_std: f64,
    seed: u64,
) -> Result<u8> {
    if !(separation > 0.0) || !(noise_std > 0.0) {
        return Err(Error::InvalidParameter(
            "separation and noise-std must be positive".into(),
        ));
    }
    let spec = SyntheticSpec {
        n,
        clusters,
        views: parse_views(views)?,
        separation,
        noise_std,
        seed,
    };
    let dataset = generate(&spec)?;
    create_dir(out)?;
    let manifest = write_dataset(out, &dataset)?;
    write_json_pretty(&out.join("synthetic_spec.json"), &spec)?;
    eprintln!(
        "wrote {} samples x {} views to {}",
        dataset.n_samples(),
        dataset.n_views(),
        manifest.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct MaskProvenance<'a> {
    ratio: f64,
    seed: u64,
    n: usize,
    views: Vec<String>,
    missing: &'a [Vec<usize>],
}

pub fn mask(manifest: &Path, ratio: f64, seed: u64, out: &Path) -> Result<u8> {
    let dataset = load_dataset(manifest)?;
    let (_, spec) = apply_mask(&dataset, ratio, seed)?;
    if ratio == 0.0 {
        eprintln!("warning: ratio 0 produces an empty mask");
    }
    create_dir(out)?;
    let mut csv = String::new();
    for (v, rows) in spec.missing.iter().enumerate() {
        for &i in rows {
            csv.push_str(&format!("{v},{i}\n"));
        }
    }
    write_text(&out.join("mask.csv"), &csv)?;
    write_json_pretty(
        &out.join("mask.json"),
        &MaskProvenance {
            ratio,
            seed,
            n: dataset.n_samples(),
            views: dataset.names().to_vec(),
            missing: &spec.missing,
        },
    )?;
    Ok(0)
}

pub fn select(
    config_path: &Path,
    ablation_override: Option<&str>,
    write_imputed: bool,
    dump_graph: bool,
    apply_overrides: impl FnOnce(&mut SolverConfig),
) -> Result<u8> {
    let mut cfg: RunConfigFile = read_json(config_path)?;
    if let Some(name) = ablation_override {
        cfg.solver.ablation = name.parse::<Ablation>()?;
    }
    apply_overrides(&mut cfg.solver);
    let out = resolve(config_path, &cfg.output_dir);
    let dataset = load_dataset(&resolve(config_path, &cfg.manifest))?;
    let (working, mask_spec) = match cfg.mask {
        Some(settings) => {
            let (masked, spec) = apply_mask(&dataset, settings.ratio, settings.seed)?;
            (masked, Some(spec))
        }
        None => (dataset, None),
    };

    let start = Instant::now();
    let (mut result, state) = run_with_state(&working, &cfg.solver)?;
    result.mask = mask_spec;
    eprintln!(
        "solver: {} iterations in {:.2?}, converged = {}",
        result.iterations,
        start.elapsed(),
        result.converged
    );

    create_dir(&out)?;
    write_json_pretty(&out.join("resolved_config.json"), &cfg)?;
    write_json_pretty(&out.join("result.json"), &result)?;
    let mut trace = String::from("iteration,objective\n");
    for (i, value) in result.objective_trace.iter().enumerate() {
        trace.push_str(&format!("{},{}\n", i + 1, value));
    }
    write_text(&out.join("trace.csv"), &trace)?;
    if write_imputed {
        for (v, view) in result.completed_views.iter().enumerate() {
            let name = &result.views[v].name;
            write_matrix_csv(&out.join(format!("imputed_{name}.csv")), view, None)?;
        }
    }
    if dump_graph {
        for (v, view_state) in state.views.iter().enumerate() {
            let name = &result.views[v].name;
            write_matrix_csv(&out.join(format!("similarity_{name}.csv")), &view_state.graph.s, None)?;
            write_matrix_csv(&out.join(format!("laplacian_{name}.csv")), &view_state.laplacian.l, None)?;
        }
    }
    if let Some(eval) = &cfg.evaluation {
        let c = match eval.clusters {
            Some(c) => c,
            None => distinct_labels(&working)?,
        };
        let fraction = cfg.solver.select_fraction;
        let outcome =
            evaluate_at_fraction(&working, &result, fraction, c, eval.restarts, eval.seed)?;
        eprintln!("evaluation: ACC {:.4} NMI {:.4}", outcome.acc, outcome.nmi);
        write_json_pretty(
            &out.join("metrics.json"),
            &MetricsFile {
                manifest: cfg.manifest.clone(),
                clusters: c,
                restarts: eval.restarts,
                seed: eval.seed,
                solver_config: &cfg.solver,
                records: vec![MetricsRecord {
                    selected_fraction: fraction,
                    acc: outcome.acc,
                    nmi: outcome.nmi,
                    c,
                    restarts: eval.restarts,
                    seed: eval.seed,
                }],
            },
        )?;
    }

    if result.converged {
        Ok(0)
    } else {
        eprintln!(
            "warning: stopped at max_iter = {} without reaching tol = {}",
            cfg.solver.max_iter, cfg.solver.tol
        );
        Ok(3)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsRecord {
    selected_fraction: f64,
    acc: f64,
    nmi: f64,
    c: usize,
    restarts: usize,
    seed: u64,
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    manifest: String,
    clusters: usize,
    restarts: usize,
    seed: u64,
    solver_config: &'a SolverConfig,
    records: Vec<MetricsRecord>,
}

fn distinct_labels(dataset: &MultiViewDataset) -> Result<usize> {
    let labels = dataset.labels().ok_or(Error::MissingLabels)?;
    Ok(labels.iter().collect::<BTreeSet<_>>().len())
}

fn parse_fractions(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse fraction {part:?}")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    manifest: &Path,
    result_path: &Path,
    fractions: &str,
    clusters: Option<usize>,
    restarts: usize,
    seed: u64,
    out: &Path,
) -> Result<u8> {
    let dataset = load_dataset(manifest)?;
    let result: SelectionResult = read_json(result_path)?;
    let fractions = parse_fractions(fractions)?;
    if fractions.is_empty() {
        return Err(Error::InvalidParameter("no fractions requested".into()));
    }
    let c = match clusters {
        Some(c) => c,
        None => distinct_labels(&dataset)?,
    };
    let mut records = Vec::with_capacity(fractions.len());
    for &fraction in &fractions {
        let outcome = evaluate_at_fraction(&dataset, &result, fraction, c, restarts, seed)?;
        records.push(MetricsRecord {
            selected_fraction: fraction,
            acc: outcome.acc,
            nmi: outcome.nmi,
            c,
            restarts,
            seed,
        });
        eprintln!(
            "fraction {fraction}: ACC {:.4} NMI {:.4}",
            outcome.acc, outcome.nmi
        );
    }
    create_dir(out)?;
    write_json_pretty(
        &out.join("metrics.json"),
        &MetricsFile {
            manifest: manifest.display().to_string(),
            clusters: c,
            restarts,
            seed,
            solver_config: &result.config,
            records,
        },
    )?;
    Ok(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepCell {
    cell: usize,
    alpha: f64,
    lambda: f64,
    fraction: f64,
    ratio: f64,
    mask_seed: u64,
    status: String,
    #[serde(default)]
    error: Option<String>,
    #[serde(default)]
    acc: Option<f64>,
    #[serde(default)]
    nmi: Option<f64>,
    #[serde(default)]
    iterations: Option<usize>,
    #[serde(default)]
    converged: Option<bool>,
    #[serde(default)]
    objective_final: Option<f64>,
}

pub fn sweep(config_path: &Path, jobs: usize) -> Result<u8> {
    let cfg: SweepConfigFile = read_json(config_path)?;
    for (name, list) in [
        ("alphas", &cfg.alphas),
        ("lambdas", &cfg.lambdas),
        ("fractions", &cfg.fractions),
        ("ratios", &cfg.ratios),
    ] {
        if list.is_empty() {
            return Err(Error::InvalidParameter(format!("sweep list {name} is empty")));
        }
    }
    if jobs == 0 {
        return Err(Error::InvalidParameter("jobs must be at least 1".into()));
    }
    let out = resolve(config_path, &cfg.output_dir);
    let cells_dir = out.join("cells");
    create_dir(&cells_dir)?;
    write_json_pretty(&out.join("sweep_config.json"), &cfg)?;

    let dataset = load_dataset(&resolve(config_path, &cfg.manifest))?;
    let c = match cfg.evaluation.clusters {
        Some(c) => c,
        None => distinct_labels(&dataset)?,
    };
    if cfg.ratios.iter().any(|&r| r > 0.0) && !dataset.is_complete() {
        return Err(Error::InvalidParameter(
            "sweep ratios require a complete dataset to mask".into(),
        ));
    }

    // Grid order: alpha-major, then lambda, fraction, ratio. Same-ratio
    // cells share one mask draw so results stay comparable across cells.
    struct CellSpec {
        idx: usize,
        alpha: f64,
        lambda: f64,
        fraction: f64,
        ratio: f64,
        ratio_idx: usize,
    }
    let mut specs = Vec::new();
    let mut idx = 0;
    for &alpha in &cfg.alphas {
        for &lambda in &cfg.lambdas {
            for &fraction in &cfg.fractions {
                for (ratio_idx, &ratio) in cfg.ratios.iter().enumerate() {
                    specs.push(CellSpec {
                        idx,
                        alpha,
                        lambda,
                        fraction,
                        ratio,
                        ratio_idx,
                    });
                    idx += 1;
                }
            }
        }
    }

    let cell_path = |idx: usize| cells_dir.join(format!("cell_{idx:05}.json"));
    let compute = |spec: &CellSpec| -> SweepCell {
        let mask_seed = stream_seed(cfg.seed, &format!("mask/ratio{}", spec.ratio_idx));
        let mut record = SweepCell {
            cell: spec.idx,
            alpha: spec.alpha,
            lambda: spec.lambda,
            fraction: spec.fraction,
            ratio: spec.ratio,
            mask_seed,
            status: "ok".into(),
            error: None,
            acc: None,
            nmi: None,
            iterations: None,
            converged: None,
            objective_final: None,
        };
        let attempt = || -> Result<(SelectionResult, f64, f64)> {
            let solver_config = SolverConfig {
                alpha: spec.alpha,
                lambda: spec.lambda,
                select_fraction: spec.fraction,
                seed: cfg.seed,
                ..cfg.solver.clone()
            };
            let working = if spec.ratio > 0.0 {
                apply_mask(&dataset, spec.ratio, mask_seed)?.0
            } else {
                dataset.clone()
            };
            let result = run(&working, &solver_config)?;
            let outcome = evaluate_at_fraction(
                &working,
                &result,
                spec.fraction,
                c,
                cfg.evaluation.restarts,
                cfg.evaluation.seed,
            )?;
            Ok((result, outcome.acc, outcome.nmi))
        };
        match attempt() {
            Ok((result, acc, nmi)) => {
                record.acc = Some(acc);
                record.nmi = Some(nmi);
                record.iterations = Some(result.iterations);
                record.converged = Some(result.converged);
                record.objective_final = result.objective_trace.last().copied();
            }
            Err(err) => {
                record.status = "failed".into();
                record.error = Some(err.to_string());
            }
        }
        record
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<()>> = pool.install(|| {
        use rayon::prelude::*;
        specs
            .par_iter()
            .map(|spec| {
                let path = cell_path(spec.idx);
                if path.exists() {
                    // completion marker: reuse if readable, else recompute
                    if read_json::<SweepCell>(&path).is_ok() {
                        return Ok(());
                    }
                }
                let record = compute(spec);
                let mut line = serde_json::to_string(&record).expect("serializable");
                line.push('\n');
                write_text(&path, &line)
            })
            .collect()
    });
    for result in results {
        result?;
    }

    // assemble the JSON-lines output in grid order
    let mut jsonl = String::new();
    let mut failed = 0usize;
    for spec in &specs {
        let text = fs::read_to_string(cell_path(spec.idx)).map_err(|source| Error::Io {
            path: cell_path(spec.idx),
            source,
        })?;
        if text.contains("\"failed\"") {
            failed += 1;
        }
        jsonl.push_str(&text);
    }
    write_text(&out.join("sweep.jsonl"), &jsonl)?;
    eprintln!(
        "sweep complete: {} cells, {failed} failed, results in {}",
        specs.len(),
        out.join("sweep.jsonl").display()
    );
    Ok(0)
}
