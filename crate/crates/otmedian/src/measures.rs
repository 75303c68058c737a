//! Validated encodings for the three measure families.
//!
//! One-dimensional measures are stored as quantile functions sampled on the
//! mid-quantile grid t_j = (j - 1/2)/K, centered Gaussians as SPD covariance
//! matrices, and discrete measures as mass vectors on regular 1-D or 2-D
//! grids. Constructors reject anything outside the family invariants so the
//! solvers never have to re-check.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Tolerance on "sums to one" for simplex weights.
const SIMPLEX_SUM_TOL: f64 = 1e-12;
/// Tolerance on "sums to one" for grid masses.
const GRID_SUM_TOL: f64 = 1e-10;
/// Relative symmetry tolerance for covariance inputs.
const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues below this fraction of the largest one are an SPD violation.
pub(crate) const SPD_EIGEN_FLOOR: f64 = 1e-12;

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    for (idx, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "{what}: entry {idx} is not finite ({v})"
            )));
        }
    }
    Ok(())
}

/// Strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("weights: empty"));
        }
        ensure_finite(&values, "weights")?;
        if let Some((idx, &v)) = values.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::invalid(format!(
                "weights: entry {idx} must be strictly positive, got {v}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights: sum to {sum}, expected 1 within {SIMPLEX_SUM_TOL:e}"
            )));
        }
        Ok(SimplexWeights(values))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("weights: need at least one entry"));
        }
        Ok(SimplexWeights(vec![1.0 / n as f64; n]))
    }

    /// Normalizes raw positive weights onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("weights: empty"));
        }
        ensure_finite(raw, "weights")?;
        if raw.iter().any(|&v| v <= 0.0) {
            return Err(Error::invalid("weights: entries must be strictly positive"));
        }
        let sum: f64 = raw.iter().sum();
        Ok(SimplexWeights(raw.iter().map(|v| v / sum).collect()))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the empty vector is rejected at construction
    }
}

/// One-dimensional measure encoded by its quantile function on the grid
/// t_j = (j - 1/2)/K. Values are non-decreasing; K >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    values: Vec<f64>,
}

impl QuantileFunction {
    /// Working resolution used by the benchmark harness.
    pub const DEFAULT_GRID: usize = 1000;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "quantile function: need K >= 2 grid points, got {}",
                values.len()
            )));
        }
        ensure_finite(&values, "quantile function")?;
        for j in 1..values.len() {
            if values[j] < values[j - 1] {
                return Err(Error::invalid(format!(
                    "quantile function: decreases between grid points {} and {} ({} -> {})",
                    j - 1,
                    j,
                    values[j - 1],
                    values[j]
                )));
            }
        }
        Ok(QuantileFunction { values })
    }

    /// Dirac mass at `c`.
    pub fn constant(c: f64, k: usize) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid(format!("quantile function: non-finite atom {c}")));
        }
        Self::new(vec![c; k.max(2)])
    }

    /// Evaluates `q` at every mid-quantile point t_j. `q` must be
    /// non-decreasing on (0, 1).
    pub fn from_fn(k: usize, q: impl Fn(f64) -> f64) -> Result<Self> {
        let values = Self::mid_grid(k).map(q).collect();
        Self::new(values)
    }

    /// Empirical quantile function: Hazen plotting positions p_i = (i-1/2)/n
    /// with linear interpolation between order statistics and constant
    /// extrapolation beyond the extreme ones.
    pub fn from_sample(sample: &[f64], k: usize) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::invalid("quantile function: empty sample"));
        }
        ensure_finite(sample, "sample")?;
        let mut sorted = sample.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let n = sorted.len() as f64;
        let values = Self::mid_grid(k)
            .map(|t| {
                // position r solves (r - 1/2)/n = t
                let r = t * n + 0.5;
                if r <= 1.0 {
                    sorted[0]
                } else if r >= n {
                    sorted[sorted.len() - 1]
                } else {
                    let lo = r.floor() as usize; // 1-based order statistic index
                    let frac = r - lo as f64;
                    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
                }
            })
            .collect();
        Self::new(values)
    }

    /// The mid-quantile grid t_j = (j - 1/2)/K for j = 1..=K.
    pub fn mid_grid(k: usize) -> impl Iterator<Item = f64> {
        (1..=k).map(move |j| (j as f64 - 0.5) / k as f64)
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Symmetric positive definite covariance of a centered Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "covariance: expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        ensure_finite(m.as_slice(), "covariance")?;
        let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::invalid(format!(
                        "covariance: asymmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        let sym = (m.transpose() + &m) * 0.5;
        let eigen = sym.clone().symmetric_eigen();
        let max_eig = eigen.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
        let min_eig = eigen.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if !(min_eig > SPD_EIGEN_FLOOR * max_eig && max_eig > 0.0) {
            return Err(Error::invalid(format!(
                "covariance: not positive definite (eigenvalues in [{min_eig:.3e}, {max_eig:.3e}])"
            )));
        }
        Ok(SpdMatrix { m: sym })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("covariance: ragged rows"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::new(m)
    }

    pub fn identity(d: usize) -> Self {
        SpdMatrix {
            m: DMatrix::identity(d, d),
        }
    }

    pub fn scaled_identity(d: usize, c: f64) -> Result<Self> {
        Self::new(DMatrix::identity(d, d) * c)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }
}

/// Discrete measure on a regular grid: non-negative mass summing to one,
/// one strictly increasing uniformly spaced coordinate axis per dimension
/// (1-D or 2-D), mass stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    shape: Vec<usize>,
    coordinates: Vec<Vec<f64>>,
    mass: Vec<f64>,
}

impl GridMeasure {
    pub fn new(shape: Vec<usize>, coordinates: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(Error::invalid(format!(
                "grid measure: supported ranks are 1 and 2, got {}",
                shape.len()
            )));
        }
        if shape.iter().any(|&s| s == 0) {
            return Err(Error::invalid("grid measure: zero-length axis"));
        }
        if coordinates.len() != shape.len() {
            return Err(Error::invalid("grid measure: one coordinate axis per dimension"));
        }
        for (axis, coords) in coordinates.iter().enumerate() {
            if coords.len() != shape[axis] {
                return Err(Error::invalid(format!(
                    "grid measure: axis {axis} has {} coordinates for {} bins",
                    coords.len(),
                    shape[axis]
                )));
            }
            ensure_finite(coords, "grid coordinates")?;
            if coords.len() > 1 {
                let step = coords[1] - coords[0];
                if step <= 0.0 {
                    return Err(Error::invalid(format!(
                        "grid measure: axis {axis} is not strictly increasing"
                    )));
                }
                for w in coords.windows(2) {
                    let d = w[1] - w[0];
                    if d <= 0.0 || (d - step).abs() > 1e-9 * step {
                        return Err(Error::invalid(format!(
                            "grid measure: axis {axis} is not uniformly spaced"
                        )));
                    }
                }
            }
        }
        let cells: usize = shape.iter().product();
        if mass.len() != cells {
            return Err(Error::invalid(format!(
                "grid measure: {} mass entries for {} cells",
                mass.len(),
                cells
            )));
        }
        ensure_finite(&mass, "grid mass")?;
        if let Some((idx, &v)) = mass.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::invalid(format!(
                "grid measure: negative mass {v} at cell {idx}"
            )));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > GRID_SUM_TOL {
            return Err(Error::invalid(format!(
                "grid measure: mass sums to {sum}, expected 1 within {GRID_SUM_TOL:e}"
            )));
        }
        Ok(GridMeasure {
            shape,
            coordinates,
            mass,
        })
    }

    /// Histogram of a sample from [0, 1] on `bins` equal-width bins with
    /// centers (i + 1/2)/bins. The last bin is closed at 1.
    pub fn histogram_from_sample(sample: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("histogram: need at least one bin"));
        }
        if sample.is_empty() {
            return Err(Error::invalid("histogram: empty sample"));
        }
        ensure_finite(sample, "sample")?;
        let mut counts = vec![0.0; bins];
        for &v in sample {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "histogram: sample value {v} outside [0, 1]"
                )));
            }
            let idx = ((v * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1.0;
        }
        let n = sample.len() as f64;
        for c in counts.iter_mut() {
            *c /= n;
        }
        let centers = (0..bins).map(|i| (i as f64 + 0.5) / bins as f64).collect();
        Self::new(vec![bins], vec![centers], counts)
    }

    /// L1-normalizes a non-negative image into a grid measure on pixel
    /// coordinates (unit spacing).
    pub fn normalize_image(pixels: &[Vec<f64>]) -> Result<Self> {
        let h = pixels.len();
        if h == 0 {
            return Err(Error::invalid("image: empty"));
        }
        let w = pixels[0].len();
        if w == 0 || pixels.iter().any(|r| r.len() != w) {
            return Err(Error::invalid("image: ragged or empty rows"));
        }
        let mut mass = Vec::with_capacity(h * w);
        for row in pixels {
            ensure_finite(row, "image")?;
            for &p in row {
                if p < 0.0 {
                    return Err(Error::invalid(format!("image: negative intensity {p}")));
                }
                mass.push(p);
            }
        }
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("image: all intensities are zero"));
        }
        for m in mass.iter_mut() {
            *m /= total;
        }
        let rows = (0..h).map(|i| i as f64).collect();
        let cols = (0..w).map(|j| j as f64).collect();
        Self::new(vec![h, w], vec![rows, cols], mass)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn coordinates(&self) -> &[Vec<f64>] {
        &self.coordinates
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Number of cells with strictly positive mass.
    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|&&m| m > 0.0).count()
    }

    /// Cells with mass above `threshold`; the sparsity statistic of the
    /// benchmark harness.
    pub fn cells_above(&self, threshold: f64) -> usize {
        self.mass.iter().filter(|&&m| m > threshold).count()
    }

    pub fn same_grid(&self, other: &GridMeasure) -> bool {
        self.shape == other.shape
            && self
                .coordinates
                .iter()
                .zip(&other.coordinates)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0)))
    }
}

/// Discrete quantile function of a 1-D grid measure, evaluated at the
/// mid-quantile points. Steps sit exactly at the cumulative masses, so for
/// masses that are multiples of 1/K the encoding is exact.
pub fn grid_to_quantiles(m: &GridMeasure, k: usize) -> Result<QuantileFunction> {
    if m.rank() != 1 {
        return Err(Error::invalid("quantile encoding: measure must be one-dimensional"));
    }
    let coords = &m.coordinates()[0];
    let mass = m.mass();
    let mut values = Vec::with_capacity(k);
    let mut bin = 0;
    let mut cdf = mass[0];
    for t in QuantileFunction::mid_grid(k) {
        while cdf < t && bin + 1 < mass.len() {
            bin += 1;
            cdf += mass[bin];
        }
        values.push(coords[bin]);
    }
    QuantileFunction::new(values)
}
