//! Contamination-robustness benchmark harness: seeded samplers, the
//! barycenter-vs-median error sweep, and the per-digit centroid comparison
//! on image data.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::{
    bary_1d, bary_gaussian, bary_grid, GaussianBarycenterConfig, GridBarycenterConfig,
};
use crate::distances::{exact_lp_w2, max_ground_cost, w2_1d, w2_gaussian};
use crate::io::{read_idx_images, read_idx_labels};
use crate::measures::{GridMeasure, QuantileFunction, SimplexWeights, SpdMatrix};
use crate::median::{
    irls_median_with_start, median_1d, median_gaussian, median_grid, GridAdapter,
    GridMedianConfig, Initializer, IrlsConfig, MedianResult, SpaceAdapter, Termination,
};
use crate::{Error, Result};

/// Measure family of a contamination sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    UnivariateGamma,
    Gaussian,
    HistogramBeta,
}

impl Family {
    fn stream_tag(self) -> u64 {
        match self {
            Family::UnivariateGamma => 1,
            Family::Gaussian => 2,
            Family::HistogramBeta => 3,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::UnivariateGamma => "univariate_gamma",
            Family::Gaussian => "gaussian",
            Family::HistogramBeta => "histogram_beta",
        };
        f.write_str(name)
    }
}

fn default_total() -> usize {
    100
}

fn default_replicates() -> usize {
    50
}

/// Configuration of a contamination sweep; JSON documents mirror the field
/// names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContaminationConfig {
    pub family: Family,
    /// Number of measures per dataset.
    #[serde(default = "default_total")]
    pub total: usize,
    /// Contamination counts, each in [0, total).
    pub contamination_counts: Vec<usize>,
    /// Draws per empirical measure.
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Entropic regularization for the histogram family; defaults to
    /// 2e-3 times the maximal ground cost of the bin grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl ContaminationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total < 2 {
            return Err(Error::invalid(format!(
                "sweep: need at least two measures per dataset, got total = {}",
                self.total
            )));
        }
        if self.contamination_counts.is_empty() {
            return Err(Error::invalid("sweep: no contamination counts"));
        }
        for &k in &self.contamination_counts {
            if k >= self.total {
                return Err(Error::invalid(format!(
                    "sweep: contamination count {k} must be below total = {}",
                    self.total
                )));
            }
        }
        if has_duplicates(&self.contamination_counts) {
            return Err(Error::invalid("sweep: duplicate contamination counts"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::invalid("sweep: no sample sizes"));
        }
        let min_n = if self.family == Family::Gaussian { 2 } else { 1 };
        for &n in &self.sample_sizes {
            if n < min_n {
                return Err(Error::invalid(format!(
                    "sweep: sample size {n} is below the family minimum {min_n}"
                )));
            }
        }
        if has_duplicates(&self.sample_sizes) {
            return Err(Error::invalid("sweep: duplicate sample sizes"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("sweep: need at least one replicate"));
        }
        if let Some(eps) = self.epsilon {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::invalid(format!(
                    "sweep: epsilon must be positive finite, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

fn has_duplicates(values: &[usize]) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// One sweep cell outcome. Flagged rows mark solver non-convergence and
/// carry NaN errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub sample_size: usize,
    pub replicate: usize,
    pub error_median: f64,
    pub error_barycenter: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub family: Family,
    pub rows: Vec<SweepRow>,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One independent, reproducible stream per (family, k, n, replicate) cell,
/// so results are identical under any parallel schedule.
fn cell_rng(seed: u64, family: Family, k: usize, n: usize, replicate: usize) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for v in [family.stream_tag(), k as u64, n as u64, replicate as u64] {
        h = splitmix64(h ^ v);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Draws n Gamma(shape, scale) variates with the Marsaglia-Tsang squeeze
/// (and the U^(1/shape) boost for shape < 1).
pub fn sample_gamma(shape: f64, scale: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !shape.is_finite() || shape <= 0.0 || !scale.is_finite() || scale <= 0.0 {
        return Err(Error::invalid(format!(
            "gamma sampler: shape and scale must be positive finite, got ({shape}, {scale})"
        )));
    }
    Ok((0..n).map(|_| gamma_one(shape, rng) * scale).collect())
}

fn gamma_one(shape: f64, rng: &mut impl Rng) -> f64 {
    if shape < 1.0 {
        let boost = rng.random::<f64>().powf(1.0 / shape);
        return gamma_one(shape + 1.0, rng) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.random::<f64>();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Draws n Beta(alpha, beta) variates as X/(X+Y) over two Gamma draws.
pub fn sample_beta(alpha: f64, beta: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !alpha.is_finite() || alpha <= 0.0 || !beta.is_finite() || beta <= 0.0 {
        return Err(Error::invalid(format!(
            "beta sampler: parameters must be positive finite, got ({alpha}, {beta})"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        loop {
            let x = gamma_one(alpha, rng);
            let y = gamma_one(beta, rng);
            if x + y > 0.0 {
                out.push(x / (x + y));
                break;
            }
        }
    }
    Ok(out)
}

/// Centered maximum-likelihood covariance (divide by n) of n draws from a
/// zero-mean Gaussian with the given covariance. A numerically degenerate
/// sample matrix is retried once with fresh draws.
pub fn sample_gaussian_cov(sigma: &SpdMatrix, n: usize, rng: &mut impl Rng) -> Result<SpdMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "covariance sampler: need at least 2 draws, got {n}"
        )));
    }
    let d = sigma.dim();
    let chol = sigma
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::invalid("covariance sampler: covariance is not positive definite"))?;
    let l = chol.l();
    let mut last_err = None;
    for _ in 0..2 {
        let draws: Vec<DVector<f64>> = (0..n)
            .map(|_| &l * DVector::from_fn(d, |_, _| rng.sample(StandardNormal)))
            .collect();
        let mean = draws.iter().fold(DVector::zeros(d), |acc, x| acc + x) / n as f64;
        let mut s = DMatrix::zeros(d, d);
        for x in &draws {
            let c = x - &mean;
            s += &c * c.transpose();
        }
        s /= n as f64;
        let s = (&s + s.transpose()) * 0.5;
        match SpdMatrix::new(s) {
            Ok(m) => return Ok(m),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("two attempts were made"))
}

const HISTOGRAM_BINS: usize = 20;
const GRID_EPS_REL: f64 = 2e-3;

/// Gamma(1, 1) quantile function (an Exp(1) law) at the working grid.
fn gamma_signal_quantiles(k: usize) -> Result<QuantileFunction> {
    QuantileFunction::from_fn(k, |t| -(1.0 - t).ln())
}

fn gaussian_signal() -> SpdMatrix {
    SpdMatrix::identity(2)
}

fn gaussian_contamination() -> SpdMatrix {
    SpdMatrix::from_rows(&[vec![1.0, 0.75], vec![0.75, 1.0]]).expect("fixed SPD matrix")
}

fn binom(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Beta(2, 5) CDF. With integer parameters the regularized incomplete beta
/// reduces to a binomial tail: I_x(2, 5) = sum_{j=2}^{6} C(6,j) x^j (1-x)^(6-j).
fn beta25_cdf(x: f64) -> f64 {
    let mut acc = 0.0;
    for j in 2..=6u32 {
        acc += binom(6, j) * x.powi(j as i32) * (1.0 - x).powi(6 - j as i32);
    }
    acc
}

/// Beta(2, 5) binned at the working resolution.
fn beta_signal_histogram(bins: usize) -> Result<GridMeasure> {
    let mut mass = Vec::with_capacity(bins);
    for i in 0..bins {
        let lo = i as f64 / bins as f64;
        let hi = (i + 1) as f64 / bins as f64;
        mass.push((beta25_cdf(hi) - beta25_cdf(lo)).max(0.0));
    }
    let centers = (0..bins).map(|i| (i as f64 + 0.5) / bins as f64).collect();
    GridMeasure::new(vec![bins], vec![centers], mass)
}

fn require_converged<M>(result: &MedianResult<M>, what: &'static str, cfg: &IrlsConfig) -> Result<()> {
    match result.termination {
        Termination::MaxIterations => Err(Error::Convergence {
            what,
            iterations: cfg.max_outer,
            residual: f64::NAN,
            tolerance: cfg.discrepancy_tol,
        }),
        _ => Ok(()),
    }
}

/// Runs the full sweep. Every (k, sample_size, replicate) cell draws from
/// its own stream, so the row set does not depend on the parallel schedule;
/// rows come back in canonical (k, sample_size, replicate) order.
pub fn run_contamination(cfg: &ContaminationConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &k in &cfg.contamination_counts {
        for &n in &cfg.sample_sizes {
            for replicate in 0..cfg.replicates {
                cells.push((k, n, replicate));
            }
        }
    }
    let mut rows = cells
        .par_iter()
        .map(|&(k, n, replicate)| run_cell(cfg, k, n, replicate))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.k, r.sample_size, r.replicate));
    Ok(SweepResult {
        family: cfg.family,
        rows,
    })
}

fn run_cell(cfg: &ContaminationConfig, k: usize, n: usize, replicate: usize) -> Result<SweepRow> {
    let mut rng = cell_rng(cfg.seed, cfg.family, k, n, replicate);
    let outcome = match cfg.family {
        Family::UnivariateGamma => cell_univariate(cfg.total, k, n, &mut rng),
        Family::Gaussian => cell_gaussian(cfg.total, k, n, &mut rng),
        Family::HistogramBeta => cell_histogram(cfg, k, n, &mut rng),
    };
    match outcome {
        Ok((error_median, error_barycenter)) => Ok(SweepRow {
            k,
            sample_size: n,
            replicate,
            error_median,
            error_barycenter,
            flagged: false,
        }),
        Err(Error::Convergence { .. }) => Ok(SweepRow {
            k,
            sample_size: n,
            replicate,
            error_median: f64::NAN,
            error_barycenter: f64::NAN,
            flagged: true,
        }),
        Err(e) => Err(e),
    }
}

fn cell_univariate(
    total: usize,
    k: usize,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let grid = QuantileFunction::DEFAULT_GRID;
    let mut inputs = Vec::with_capacity(total);
    for i in 0..total {
        let (shape, scale) = if i < total - k { (1.0, 1.0) } else { (7.5, 0.75) };
        let draws = sample_gamma(shape, scale, n, rng)?;
        inputs.push(QuantileFunction::from_sample(&draws, grid)?);
    }
    let weights = SimplexWeights::uniform(total)?;
    let signal = gamma_signal_quantiles(grid)?;
    let bary = bary_1d(&weights, &inputs)?;
    let irls = IrlsConfig {
        max_outer: 300,
        ..IrlsConfig::default()
    };
    let med = median_1d(&inputs, &weights, &irls)?;
    require_converged(&med, "univariate median", &irls)?;
    Ok((w2_1d(&med.centroid, &signal)?, w2_1d(&bary, &signal)?))
}

fn cell_gaussian(total: usize, k: usize, n: usize, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let signal = gaussian_signal();
    let contamination = gaussian_contamination();
    let mut inputs = Vec::with_capacity(total);
    for i in 0..total {
        let source = if i < total - k { &signal } else { &contamination };
        inputs.push(sample_gaussian_cov(source, n, rng)?);
    }
    let weights = SimplexWeights::uniform(total)?;
    let bary_cfg = GaussianBarycenterConfig::default();
    let bary = bary_gaussian(&weights, &inputs, &bary_cfg)?;
    let irls = IrlsConfig {
        max_outer: 300,
        ..IrlsConfig::default()
    };
    let med = median_gaussian(&inputs, &weights, &irls, &bary_cfg)?;
    require_converged(&med, "gaussian median", &irls)?;
    Ok((
        w2_gaussian(&med.centroid, &signal)?,
        w2_gaussian(&bary, &signal)?,
    ))
}

fn cell_histogram(
    cfg: &ContaminationConfig,
    k: usize,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let signal = beta_signal_histogram(HISTOGRAM_BINS)?;
    let mut inputs = Vec::with_capacity(cfg.total);
    for i in 0..cfg.total {
        let (alpha, beta) = if i < cfg.total - k { (2.0, 5.0) } else { (5.0, 1.0) };
        let draws = sample_beta(alpha, beta, n, rng)?;
        inputs.push(GridMeasure::histogram_from_sample(&draws, HISTOGRAM_BINS)?);
    }
    let eps = match cfg.epsilon {
        Some(e) => e,
        None => GRID_EPS_REL * max_ground_cost(&signal, &signal)?,
    };
    let weights = SimplexWeights::uniform(cfg.total)?;
    let bary = bary_grid(&weights, &inputs, &GridBarycenterConfig::new(eps))?;
    // Errors below are measured with the exact solver, so the looser outer
    // tolerance only bounds how precisely the median itself is located.
    let irls = IrlsConfig {
        max_outer: 60,
        discrepancy_tol: 3.0e-5,
        ..IrlsConfig::default()
    };
    let mut grid_cfg = GridMedianConfig::new(eps);
    // At the sharp barycenter epsilon the marginal iteration crawls near
    // its fixed point on empirical histograms (rates within 1e-4 of one),
    // so the reweighting metric runs at a mildly larger epsilon where it
    // contracts comfortably. The weights only need relative distances,
    // and the errors reported below come from the exact solver.
    grid_cfg.sinkhorn.epsilon = 3.0 * eps;
    grid_cfg.sinkhorn.tol = 1e-6;
    grid_cfg.sinkhorn.max_iter = 30_000;
    let med = median_grid(&inputs, &weights, &irls, &grid_cfg)?;
    require_converged(&med, "histogram median", &irls)?;
    Ok((
        exact_lp_w2(&med.centroid, &signal)?,
        exact_lp_w2(&bary, &signal)?,
    ))
}

/// Mean, barycenter and median of one class of same-grid images.
#[derive(Debug, Clone)]
pub struct CentroidTriple {
    pub mean: GridMeasure,
    pub barycenter: GridMeasure,
    pub median: MedianResult<GridMeasure>,
}

/// Computes the centroid triple of a set of images on a common grid.
/// `epsilon` defaults to one squared cell spacing.
pub fn centroid_triple(images: &[GridMeasure], epsilon: Option<f64>) -> Result<CentroidTriple> {
    if images.is_empty() {
        return Err(Error::invalid("centroids: no images"));
    }
    for (i, m) in images.iter().enumerate().skip(1) {
        if !m.same_grid(&images[0]) {
            return Err(Error::invalid(format!(
                "centroids: image {i} is on a different grid"
            )));
        }
    }
    let n = images.len();
    let mut mean_mass = vec![0.0; images[0].mass().len()];
    for m in images {
        for (acc, &v) in mean_mass.iter_mut().zip(m.mass()) {
            *acc += v;
        }
    }
    for v in &mut mean_mass {
        *v /= n as f64;
    }
    let mean = GridMeasure::new(
        images[0].shape().to_vec(),
        images[0].coordinates().to_vec(),
        mean_mass,
    )?;

    // One squared cell spacing keeps the barycenter sharp and its
    // iteration fast at any image size; `epsilon` overrides it. The
    // reweighting distances run 4x blurrier: at the sharp epsilon the
    // marginal iteration crawls on far-apart images, and the weights only
    // need relative values.
    let eps = match epsilon {
        Some(e) => e,
        None => {
            let spacing = images[0]
                .coordinates()
                .iter()
                .filter(|axis| axis.len() > 1)
                .map(|axis| axis[1] - axis[0])
                .fold(0.0_f64, f64::max);
            if spacing > 0.0 {
                spacing * spacing
            } else {
                1.0
            }
        }
    };
    let weights = SimplexWeights::uniform(n)?;
    let mut grid_cfg = GridMedianConfig::new(eps);
    // Image-scale budgets. Library-default precision costs minutes per
    // solve at 28x28; the centroid comparison only needs the solvers near
    // their fixed points, and the warm starts inside the median loop keep
    // polishing across outer iterations.
    grid_cfg.sinkhorn.epsilon = 4.0 * eps;
    grid_cfg.sinkhorn.tol = 1e-4;
    grid_cfg.barycenter.tol = 3e-5;
    grid_cfg.barycenter.max_iter = 6_000;
    // One adapter serves both centroids, so the barycenter solve seeds the
    // warm state that the median's first reweighted solve resumes from.
    let adapter = GridAdapter::new(grid_cfg);
    let barycenter = adapter.barycenter(&weights, images, None)?;
    let irls = IrlsConfig {
        max_outer: 8,
        discrepancy_tol: 1.0e-4,
        initializer: Initializer::Given,
        ..IrlsConfig::default()
    };
    let median = irls_median_with_start(&adapter, images, &weights, &irls, &barycenter)?;
    Ok(CentroidTriple {
        mean,
        barycenter,
        median,
    })
}

/// Centroid triple of one digit class.
#[derive(Debug, Clone)]
pub struct DigitCentroids {
    pub digit: u8,
    pub centroids: CentroidTriple,
}

/// Reads MNIST-format IDX files and computes the centroid triple of the
/// first `per_digit` images of every digit.
pub fn run_mnist(
    images_path: &Path,
    labels_path: &Path,
    per_digit: usize,
) -> Result<Vec<DigitCentroids>> {
    if per_digit == 0 {
        return Err(Error::invalid("mnist: per_digit must be positive"));
    }
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(Error::invalid(format!(
            "mnist: {} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    let mut grouped: Vec<Vec<GridMeasure>> = vec![Vec::new(); 10];
    for (img, &label) in images.iter().zip(&labels) {
        if label > 9 {
            return Err(Error::invalid(format!(
                "mnist: label {label} outside 0..=9"
            )));
        }
        let bucket = &mut grouped[label as usize];
        if bucket.len() >= per_digit {
            continue;
        }
        let rows: Vec<Vec<f64>> = img
            .iter()
            .map(|r| r.iter().map(|&b| b as f64).collect())
            .collect();
        bucket.push(GridMeasure::normalize_image(&rows)?);
        if grouped.iter().all(|g| g.len() >= per_digit) {
            break;
        }
    }
    for (digit, bucket) in grouped.iter().enumerate() {
        if bucket.len() < per_digit {
            return Err(Error::invalid(format!(
                "mnist: found only {} images of digit {digit}, need {per_digit}",
                bucket.len()
            )));
        }
    }
    grouped
        .into_iter()
        .enumerate()
        .map(|(digit, bucket)| {
            Ok(DigitCentroids {
                digit: digit as u8,
                centroids: centroid_triple(&bucket, None)?,
            })
        })
        .collect()
}
