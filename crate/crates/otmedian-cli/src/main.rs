//! `otmedian`: Wasserstein distances, barycenters and medians from the
//! command line, plus the seeded contamination sweep and the MNIST
//! centroid comparison.
//!
//! Exit codes: 0 success, 1 invalid arguments or input values, 2 solver
//! non-convergence, 3 I/O or parse failure. The machine-readable summary
//! goes to standard output as one JSON object; progress goes to standard
//! error; files are written only to `--out`.

mod docs;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use otmedian::barycenter::{
    bary_1d, bary_gaussian, bary_grid, BarycenterRule, GaussianBarycenterConfig,
    GridBarycenterConfig,
};
use otmedian::distances::{max_ground_cost, sinkhorn_distance, w2_1d, w2_gaussian, SinkhornConfig};
use otmedian::experiments::{run_contamination, run_mnist};
use otmedian::io::{emit_image_grid_svg, load_contamination_config, write_sweep_csv};
use otmedian::measures::GridMeasure;
use otmedian::median::{
    median_1d, median_gaussian, median_grid, GridMedianConfig, IrlsConfig, MedianResult,
};
use otmedian::{Error, Result};

/// Default entropic regularization for the grid family, relative to the
/// maximal ground cost of the inputs.
const GRID_EPS_REL: f64 = 2e-3;

const FLAG_SUMMARY: &str = "\
Flags across the subcommands: --family, --input, --config, --out, --seed, --threads,\n\
--epsilon, --max-iter, --tol, --rule. Each subcommand's --help lists the ones it takes;\n\
OTMEDIAN_THREADS is the environment fallback for --threads.";

#[derive(Debug, Parser)]
#[command(
    name = "otmedian",
    version,
    about = "Wasserstein distances, barycenters and medians",
    after_help = FLAG_SUMMARY
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 2-Wasserstein distance between exactly two measures.
    Distance(SolveArgs),
    /// Weighted 2-Wasserstein barycenter of the input measures.
    Barycenter(SolveArgs),
    /// Wasserstein median of the input measures, by IRLS.
    Median(SolveArgs),
    /// Seeded contamination sweep; one CSV row per (k, n, replicate) cell.
    Sweep(SweepArgs),
    /// Mean, barycenter and median centroids of MNIST-format digits.
    Mnist(MnistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    /// 1-D measures encoded by quantile functions.
    Univariate,
    /// Centered Gaussians encoded by covariance matrices.
    Gaussian,
    /// Discrete measures on a regular grid.
    Grid,
}

impl FamilyArg {
    fn name(self) -> &'static str {
        match self {
            FamilyArg::Univariate => "univariate",
            FamilyArg::Gaussian => "gaussian",
            FamilyArg::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Ruschendorf,
    Alvarez,
}

impl From<RuleArg> for BarycenterRule {
    fn from(rule: RuleArg) -> Self {
        match rule {
            RuleArg::Ruschendorf => BarycenterRule::Ruschendorf,
            RuleArg::Alvarez => BarycenterRule::AlvarezEsteban,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Measure family of the inputs.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Input measures: JSON {"measures": [...], "weights": [...]?}.
    #[arg(long)]
    input: PathBuf,
    /// Write the result here as JSON (a measure document for
    /// barycenter/median, the summary for distance).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to OTMEDIAN_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Entropic regularization for the grid family, in squared coordinate
    /// units. Default: 2e-3 times the maximal ground cost of the inputs.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Iteration cap of the loop the subcommand itself runs (the IRLS
    /// outer loop for median, the fixed-point/Sinkhorn loop otherwise).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Convergence tolerance of that same loop.
    #[arg(long)]
    tol: Option<f64>,
    /// Gaussian barycenter fixed-point update rule.
    #[arg(long, value_enum, default_value_t = RuleArg::Alvarez)]
    rule: RuleArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep configuration: JSON with family, contamination_counts,
    /// sample_sizes, total, replicates, seed, epsilon.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the histogram-family epsilon in the config.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Worker threads; falls back to OTMEDIAN_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct MnistArgs {
    /// IDX image file (magic 2051).
    #[arg(long)]
    input: PathBuf,
    /// IDX label file (magic 2049).
    #[arg(long)]
    labels: PathBuf,
    /// Images per digit class.
    #[arg(long, default_value_t = 20)]
    per_digit: usize,
    /// Write an SVG grid of the per-digit centroids here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to OTMEDIAN_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) => 1,
        Error::Convergence { .. } => 2,
        Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 3,
    }
}

fn dispatch(command: Command) -> Result<Value> {
    match command {
        Command::Distance(args) => {
            init_threads(args.threads)?;
            cmd_distance(&args)
        }
        Command::Barycenter(args) => {
            init_threads(args.threads)?;
            cmd_barycenter(&args)
        }
        Command::Median(args) => {
            init_threads(args.threads)?;
            cmd_median(&args)
        }
        Command::Sweep(args) => {
            init_threads(args.threads)?;
            cmd_sweep(&args)
        }
        Command::Mnist(args) => {
            init_threads(args.threads)?;
            cmd_mnist(&args)
        }
    }
}

/// Resolves the worker count from the flag, then OTMEDIAN_THREADS.
/// `None` leaves the pool at its default size.
fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => Some(n),
        (None, Some(s)) if !s.trim().is_empty() => {
            Some(s.trim().parse::<usize>().map_err(|_| {
                Error::invalid(format!(
                    "OTMEDIAN_THREADS: expected a positive integer, got {s:?}"
                ))
            })?)
        }
        _ => None,
    };
    if n == Some(0) {
        return Err(Error::invalid("threads: must be at least 1"));
    }
    Ok(n)
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let env = std::env::var("OTMEDIAN_THREADS").ok();
    if let Some(n) = resolve_threads(flag, env.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(format!("threads: {e}")))?;
    }
    Ok(())
}

fn pair<'a, T>(ms: &'a [T], path: &Path) -> Result<(&'a T, &'a T)> {
    if ms.len() != 2 {
        return Err(Error::invalid(format!(
            "{}: distance takes exactly two measures, got {}",
            path.display(),
            ms.len()
        )));
    }
    Ok((&ms[0], &ms[1]))
}

fn grid_epsilon(flag: Option<f64>, a: &GridMeasure, b: &GridMeasure) -> Result<f64> {
    match flag {
        Some(eps) => Ok(eps),
        None => Ok(GRID_EPS_REL * max_ground_cost(a, b)?),
    }
}

fn cmd_distance(args: &SolveArgs) -> Result<Value> {
    let summary = match args.family {
        FamilyArg::Univariate => {
            let (ms, _) = docs::load_univariate(&args.input)?;
            let (a, b) = pair(&ms, &args.input)?;
            json!({
                "command": "distance",
                "family": args.family.name(),
                "distance": w2_1d(a, b)?,
            })
        }
        FamilyArg::Gaussian => {
            let (ms, _) = docs::load_gaussian(&args.input)?;
            let (a, b) = pair(&ms, &args.input)?;
            json!({
                "command": "distance",
                "family": args.family.name(),
                "distance": w2_gaussian(a, b)?,
            })
        }
        FamilyArg::Grid => {
            let (ms, _) = docs::load_grid(&args.input)?;
            let (a, b) = pair(&ms, &args.input)?;
            let mut cfg = SinkhornConfig::new(grid_epsilon(args.epsilon, a, b)?);
            if let Some(m) = args.max_iter {
                cfg.max_iter = m;
            }
            if let Some(t) = args.tol {
                cfg.tol = t;
            }
            json!({
                "command": "distance",
                "family": args.family.name(),
                "epsilon": cfg.epsilon,
                "distance": sinkhorn_distance(a, b, &cfg)?,
            })
        }
    };
    if let Some(out) = &args.out {
        docs::write_json(out, &summary)?;
    }
    Ok(summary)
}

fn cmd_barycenter(args: &SolveArgs) -> Result<Value> {
    let (measure, n) = match args.family {
        FamilyArg::Univariate => {
            let (ms, w) = docs::load_univariate(&args.input)?;
            (docs::univariate_value(&bary_1d(&w, &ms)?), ms.len())
        }
        FamilyArg::Gaussian => {
            let (ms, w) = docs::load_gaussian(&args.input)?;
            let mut cfg = GaussianBarycenterConfig {
                rule: args.rule.into(),
                ..GaussianBarycenterConfig::default()
            };
            if let Some(m) = args.max_iter {
                cfg.max_iter = m;
            }
            if let Some(t) = args.tol {
                cfg.tol = t;
            }
            (docs::gaussian_value(&bary_gaussian(&w, &ms, &cfg)?), ms.len())
        }
        FamilyArg::Grid => {
            let (ms, w) = docs::load_grid(&args.input)?;
            let mut cfg = GridBarycenterConfig::new(grid_epsilon(args.epsilon, &ms[0], &ms[0])?);
            if let Some(m) = args.max_iter {
                cfg.max_iter = m;
            }
            if let Some(t) = args.tol {
                cfg.tol = t;
            }
            (docs::grid_value(&bary_grid(&w, &ms, &cfg)?), ms.len())
        }
    };
    eprintln!("otmedian: barycenter of {n} {} measures", args.family.name());
    if let Some(out) = &args.out {
        docs::write_measure_doc(out, &measure)?;
    }
    Ok(json!({
        "command": "barycenter",
        "family": args.family.name(),
        "inputs": n,
        "centroid": measure,
    }))
}

fn median_summary<M>(
    family: FamilyArg,
    result: &MedianResult<M>,
    measure: Value,
    inputs: usize,
) -> Value {
    json!({
        "command": "median",
        "family": family.name(),
        "inputs": inputs,
        "termination": result.termination.to_string(),
        "iterations": result.objective_trace.len().saturating_sub(1),
        "objective": result.objective_trace,
        "weights_final": result.weights_final,
        "centroid": measure,
    })
}

fn cmd_median(args: &SolveArgs) -> Result<Value> {
    let mut irls = IrlsConfig::default();
    if let Some(m) = args.max_iter {
        irls.max_outer = m;
    }
    if let Some(t) = args.tol {
        irls.discrepancy_tol = t;
    }
    let summary = match args.family {
        FamilyArg::Univariate => {
            let (ms, w) = docs::load_univariate(&args.input)?;
            let r = median_1d(&ms, &w, &irls)?;
            median_summary(args.family, &r, docs::univariate_value(&r.centroid), ms.len())
        }
        FamilyArg::Gaussian => {
            let (ms, w) = docs::load_gaussian(&args.input)?;
            let bary = GaussianBarycenterConfig {
                rule: args.rule.into(),
                ..GaussianBarycenterConfig::default()
            };
            let r = median_gaussian(&ms, &w, &irls, &bary)?;
            median_summary(args.family, &r, docs::gaussian_value(&r.centroid), ms.len())
        }
        FamilyArg::Grid => {
            let (ms, w) = docs::load_grid(&args.input)?;
            let cfg = GridMedianConfig::new(grid_epsilon(args.epsilon, &ms[0], &ms[0])?);
            let r = median_grid(&ms, &w, &irls, &cfg)?;
            median_summary(args.family, &r, docs::grid_value(&r.centroid), ms.len())
        }
    };
    eprintln!(
        "otmedian: median terminated as {} after {} outer iterations",
        summary["termination"].as_str().unwrap_or("?"),
        summary["iterations"]
    );
    if let Some(out) = &args.out {
        docs::write_measure_doc(out, &summary["centroid"])?;
    }
    Ok(summary)
}

fn cmd_sweep(args: &SweepArgs) -> Result<Value> {
    let mut cfg =
        load_contamination_config(&args.config).map_err(|e| docs::with_path(e, &args.config))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = args.epsilon {
        cfg.epsilon = Some(eps);
    }
    let cells = cfg.contamination_counts.len() * cfg.sample_sizes.len() * cfg.replicates;
    eprintln!(
        "otmedian: sweep family={} seed={} cells={cells}",
        cfg.family, cfg.seed
    );
    let start = Instant::now();
    let result = run_contamination(&cfg)?;
    write_sweep_csv(&result, &args.out).map_err(|e| docs::with_path(e, &args.out))?;
    let flagged = result.rows.iter().filter(|r| r.flagged).count();
    eprintln!(
        "otmedian: sweep finished in {:.1}s ({flagged} flagged rows)",
        start.elapsed().as_secs_f64()
    );
    Ok(json!({
        "command": "sweep",
        "family": cfg.family,
        "seed": cfg.seed,
        "rows": result.rows.len(),
        "flagged": flagged,
        "out": args.out.display().to_string(),
    }))
}

/// Mass threshold below which a bin does not count as support.
const SUPPORT_THRESHOLD: f64 = 1e-4;

fn cmd_mnist(args: &MnistArgs) -> Result<Value> {
    for path in [&args.input, &args.labels] {
        std::fs::metadata(path).map_err(|e| docs::with_path(Error::Io(e), path))?;
    }
    eprintln!(
        "otmedian: mnist per_digit={} images={}",
        args.per_digit,
        args.input.display()
    );
    let start = Instant::now();
    let digits = run_mnist(&args.input, &args.labels, args.per_digit)?;
    let rows: Vec<Value> = digits
        .iter()
        .map(|d| {
            json!({
                "digit": d.digit,
                "support_mean": d.centroids.mean.cells_above(SUPPORT_THRESHOLD),
                "support_barycenter": d.centroids.barycenter.cells_above(SUPPORT_THRESHOLD),
                "support_median": d.centroids.median.centroid.cells_above(SUPPORT_THRESHOLD),
                "median_termination": d.centroids.median.termination.to_string(),
            })
        })
        .collect();
    if let Some(out) = &args.out {
        let entries: Vec<(String, GridMeasure)> = digits
            .iter()
            .flat_map(|d| {
                [
                    (format!("{} mean", d.digit), d.centroids.mean.clone()),
                    (
                        format!("{} barycenter", d.digit),
                        d.centroids.barycenter.clone(),
                    ),
                    (
                        format!("{} median", d.digit),
                        d.centroids.median.centroid.clone(),
                    ),
                ]
            })
            .collect();
        emit_image_grid_svg(&entries, 3, out).map_err(|e| docs::with_path(e, out))?;
    }
    eprintln!(
        "otmedian: mnist finished in {:.1}s",
        start.elapsed().as_secs_f64()
    );
    Ok(json!({
        "command": "mnist",
        "per_digit": args.per_digit,
        "support_threshold": SUPPORT_THRESHOLD,
        "digits": rows,
    }))
}
