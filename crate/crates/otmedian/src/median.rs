//! Wasserstein median by iteratively reweighted least squares (IRLS).
//!
//! Each outer step reweights the inputs by pi_n / d(nu, mu_n), hands the
//! normalized weights to the family's barycenter solver, and repeats. The
//! objective F(nu) = sum_n pi_n d(nu, mu_n) is non-increasing along the
//! iterates. The loop stops when successive iterates are close under a
//! cheap discrepancy, when the iterate lands on an input (the functional
//! is not differentiable there, so the reweighting degenerates), or at the
//! iteration cap.

use std::cell::RefCell;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::barycenter::{
    bary_1d, bary_gaussian_init, bary_grid_warm, GaussianBarycenterConfig, GridBarycenterConfig,
    GridBaryState,
};
use crate::distances::{entropic_cost_warm, w2_1d, w2_gaussian, SinkhornConfig, SinkhornState};
use crate::measures::{GridMeasure, QuantileFunction, SimplexWeights, SpdMatrix};
use crate::{Error, Result};

/// The pieces of a measure family the IRLS loop needs.
pub trait SpaceAdapter {
    type M: Clone;

    /// The 2-Wasserstein distance (or the family's stand-in for it).
    fn distance(&self, a: &Self::M, b: &Self::M) -> Result<f64>;

    /// Weighted barycenter; `init` is a warm-start hint solvers may ignore.
    fn barycenter(
        &self,
        weights: &SimplexWeights,
        inputs: &[Self::M],
        init: Option<&Self::M>,
    ) -> Result<Self::M>;

    /// Cheap dissimilarity between consecutive iterates, used only for
    /// stopping.
    fn discrepancy(&self, a: &Self::M, b: &Self::M) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Consecutive iterates were within `discrepancy_tol`.
    Converged,
    /// The iterate landed on one of the inputs.
    CoincidedWithInput,
    /// The outer loop hit `max_outer`.
    MaxIterations,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::Converged => "converged",
            Termination::CoincidedWithInput => "coincided_with_input",
            Termination::MaxIterations => "max_iterations",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    /// Start from the uniform-weight barycenter of the inputs.
    UniformBarycenter,
    /// Start from a caller-supplied measure (see `irls_median_with_start`).
    Given,
}

#[derive(Debug, Clone)]
pub struct IrlsConfig {
    pub max_outer: usize,
    /// Absolute threshold on the adapter discrepancy between consecutive
    /// iterates.
    pub discrepancy_tol: f64,
    /// Coincidence threshold, relative to the mean pairwise input distance.
    pub coincidence_tol: f64,
    pub initializer: Initializer,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        IrlsConfig {
            max_outer: 100,
            discrepancy_tol: 1e-8,
            coincidence_tol: 1e-12,
            initializer: Initializer::UniformBarycenter,
        }
    }
}

impl IrlsConfig {
    fn validate(&self) -> Result<()> {
        if self.max_outer == 0 {
            return Err(Error::invalid("irls: max_outer must be at least 1"));
        }
        if !(self.discrepancy_tol.is_finite() && self.discrepancy_tol > 0.0) {
            return Err(Error::invalid("irls: discrepancy_tol must be positive"));
        }
        if !(self.coincidence_tol.is_finite() && self.coincidence_tol > 0.0) {
            return Err(Error::invalid("irls: coincidence_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MedianResult<M> {
    pub centroid: M,
    /// F(nu) per outer iterate, starting at the initializer.
    pub objective_trace: Vec<f64>,
    /// The last normalized reweighting (the input weights if the loop
    /// returned before the first reweighting).
    pub weights_final: Vec<f64>,
    pub termination: Termination,
}

/// Mean pairwise input distance, the scale the coincidence threshold is
/// relative to. Quadratic pair enumeration is capped: past 16 inputs a
/// strided subsample of about 3N pairs estimates the same scale.
fn pairwise_scale<A: SpaceAdapter>(adapter: &A, inputs: &[A::M]) -> Result<f64> {
    let n = inputs.len();
    let mut sum = 0.0;
    let mut count = 0usize;
    if n <= 16 {
        for i in 0..n {
            for j in i + 1..n {
                sum += adapter.distance(&inputs[i], &inputs[j])?;
                count += 1;
            }
        }
    } else {
        let mut strides = [1, n / 3, (2 * n) / 3];
        strides.sort_unstable();
        strides[0] = strides[0].max(1);
        for w in 0..strides.len() {
            let s = strides[w];
            if s == 0 || s >= n || (w > 0 && strides[w - 1] == s) {
                continue;
            }
            for i in 0..n {
                let j = (i + s) % n;
                sum += adapter.distance(&inputs[i], &inputs[j])?;
                count += 1;
            }
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// IRLS Wasserstein median, initialized per `cfg.initializer` (which must
/// not be `Given` here; use `irls_median_with_start` to supply a start).
pub fn irls_median<A: SpaceAdapter>(
    adapter: &A,
    inputs: &[A::M],
    pis: &SimplexWeights,
    cfg: &IrlsConfig,
) -> Result<MedianResult<A::M>> {
    if cfg.initializer == Initializer::Given {
        return Err(Error::invalid(
            "irls: initializer=given requires irls_median_with_start",
        ));
    }
    run_irls(adapter, inputs, pis, cfg, None)
}

/// IRLS Wasserstein median started from a caller-supplied measure.
pub fn irls_median_with_start<A: SpaceAdapter>(
    adapter: &A,
    inputs: &[A::M],
    pis: &SimplexWeights,
    cfg: &IrlsConfig,
    start: &A::M,
) -> Result<MedianResult<A::M>> {
    run_irls(adapter, inputs, pis, cfg, Some(start))
}

fn run_irls<A: SpaceAdapter>(
    adapter: &A,
    inputs: &[A::M],
    pis: &SimplexWeights,
    cfg: &IrlsConfig,
    start: Option<&A::M>,
) -> Result<MedianResult<A::M>> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(Error::invalid("irls: no input measures"));
    }
    if pis.len() != inputs.len() {
        return Err(Error::invalid(format!(
            "irls: {} weights for {} inputs",
            pis.len(),
            inputs.len()
        )));
    }
    if inputs.len() == 1 {
        // The median of one measure is itself; skip the solvers entirely so
        // the result is bit-exact.
        return Ok(MedianResult {
            centroid: inputs[0].clone(),
            objective_trace: vec![0.0],
            weights_final: vec![1.0],
            termination: Termination::CoincidedWithInput,
        });
    }
    let mut identical = true;
    for m in &inputs[1..] {
        if adapter.discrepancy(&inputs[0], m)? != 0.0 {
            identical = false;
            break;
        }
    }
    if identical {
        // All inputs are the same measure, which is therefore the median.
        // Returning it directly keeps the result exact; the family metrics
        // evaluate distance-to-self only up to solver noise.
        return Ok(MedianResult {
            centroid: inputs[0].clone(),
            objective_trace: vec![0.0],
            weights_final: pis.values().to_vec(),
            termination: Termination::CoincidedWithInput,
        });
    }

    let scale = pairwise_scale(adapter, inputs)?;
    let coincide_at = cfg.coincidence_tol * scale;
    // The discrepancy threshold is relative to the same input scale, which
    // keeps the whole loop positively homogeneous (scaling every input by
    // c scales the returned centroid by c, exactly).
    let stop_at = cfg.discrepancy_tol * scale;

    let mut nu = match start {
        Some(m) => m.clone(),
        None => {
            let uniform = SimplexWeights::uniform(inputs.len())?;
            adapter.barycenter(&uniform, inputs, None)?
        }
    };
    let mut dist: Vec<f64> = inputs
        .iter()
        .map(|m| adapter.distance(&nu, m))
        .collect::<Result<_>>()?;
    let objective = |d: &[f64]| -> f64 {
        d.iter().zip(pis.values()).map(|(di, pi)| di * pi).sum()
    };
    let mut trace = vec![objective(&dist)];
    let mut weights_final = pis.values().to_vec();

    if dist.iter().any(|&d| d <= coincide_at) {
        return Ok(MedianResult {
            centroid: nu,
            objective_trace: trace,
            weights_final,
            termination: Termination::CoincidedWithInput,
        });
    }

    let descent_slack = 1e-9 * trace[0].max(1.0);
    for _ in 0..cfg.max_outer {
        let raw: Vec<f64> = dist
            .iter()
            .zip(pis.values())
            .map(|(&d, &pi)| pi / d)
            .collect();
        let weights = SimplexWeights::normalized(&raw)?;

        let next = adapter.barycenter(&weights, inputs, Some(&nu))?;
        let next_dist: Vec<f64> = inputs
            .iter()
            .map(|m| adapter.distance(&next, m))
            .collect::<Result<_>>()?;
        let f_next = objective(&next_dist);
        if f_next > *trace.last().unwrap() + descent_slack {
            // An exact inner solve can never increase the objective; a rise
            // means the step is below the solvers' noise floor, so the
            // current iterate is as converged as it gets. The step is
            // discarded to keep the reported trace a true descent record.
            return Ok(MedianResult {
                centroid: nu,
                objective_trace: trace,
                weights_final,
                termination: Termination::Converged,
            });
        }
        weights_final = weights.values().to_vec();
        dist = next_dist;
        trace.push(f_next);

        if dist.iter().any(|&d| d <= coincide_at) {
            return Ok(MedianResult {
                centroid: next,
                objective_trace: trace,
                weights_final,
                termination: Termination::CoincidedWithInput,
            });
        }
        let moved = adapter.discrepancy(&nu, &next)?;
        nu = next;
        if moved <= stop_at {
            return Ok(MedianResult {
                centroid: nu,
                objective_trace: trace,
                weights_final,
                termination: Termination::Converged,
            });
        }
    }
    Ok(MedianResult {
        centroid: nu,
        objective_trace: trace,
        weights_final,
        termination: Termination::MaxIterations,
    })
}

/// 1-D family: quantile distance, pointwise barycenter, L2 discrepancy on
/// quantile vectors.
pub struct QuantileAdapter;

impl SpaceAdapter for QuantileAdapter {
    type M = QuantileFunction;

    fn distance(&self, a: &QuantileFunction, b: &QuantileFunction) -> Result<f64> {
        w2_1d(a, b)
    }

    fn barycenter(
        &self,
        weights: &SimplexWeights,
        inputs: &[QuantileFunction],
        _init: Option<&QuantileFunction>,
    ) -> Result<QuantileFunction> {
        bary_1d(weights, inputs)
    }

    fn discrepancy(&self, a: &QuantileFunction, b: &QuantileFunction) -> Result<f64> {
        if a.grid_size() != b.grid_size() {
            return Err(Error::invalid("discrepancy: quantile grids differ"));
        }
        Ok(a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt())
    }
}

/// Centered Gaussian family: Bures-Wasserstein distance, fixed-point
/// barycenter warm-started from the current iterate, Frobenius
/// discrepancy.
pub struct GaussianAdapter {
    pub bary_cfg: GaussianBarycenterConfig,
}

impl SpaceAdapter for GaussianAdapter {
    type M = SpdMatrix;

    fn distance(&self, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
        w2_gaussian(a, b)
    }

    fn barycenter(
        &self,
        weights: &SimplexWeights,
        inputs: &[SpdMatrix],
        init: Option<&SpdMatrix>,
    ) -> Result<SpdMatrix> {
        bary_gaussian_init(weights, inputs, &self.bary_cfg, init)
    }

    fn discrepancy(&self, a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
        if a.dim() != b.dim() {
            return Err(Error::invalid("discrepancy: matrix dimensions differ"));
        }
        Ok((a.matrix() - b.matrix()).norm())
    }
}

#[derive(Debug, Clone)]
pub struct GridMedianConfig {
    pub sinkhorn: SinkhornConfig,
    pub barycenter: GridBarycenterConfig,
}

impl GridMedianConfig {
    /// One epsilon (in squared coordinate units) drives both the distance
    /// and the barycenter solver.
    pub fn new(epsilon: f64) -> Self {
        GridMedianConfig {
            sinkhorn: SinkhornConfig::new(epsilon),
            barycenter: GridBarycenterConfig::new(epsilon),
        }
    }
}

/// Grid family: debiased entropic distance, debiased iterative Bregman
/// barycenter, L2 discrepancy on mass vectors. Self-transport costs are
/// memoized because the debiased distance reuses them heavily (the inputs
/// keep theirs across all outer iterations, and the iterate shares its own
/// across the N distances of one iteration). Sinkhorn potentials and the
/// barycenter potentials are carried across outer iterations as warm
/// starts: the iterate moves a little per step, so each solve resumes near
/// its solution instead of re-running the epsilon schedule from scratch.
pub struct GridAdapter {
    cfg: GridMedianConfig,
    self_costs: RefCell<HashMap<u64, f64>>,
    /// Cross-problem potentials keyed by the second argument (the IRLS
    /// loop always passes the fixed input there).
    cross_states: RefCell<HashMap<u64, SinkhornState>>,
    /// Single slot for the self-problem of the evolving iterate.
    self_state: RefCell<SinkhornState>,
    bary_state: RefCell<GridBaryState>,
}

impl GridAdapter {
    pub fn new(cfg: GridMedianConfig) -> Self {
        GridAdapter {
            cfg,
            self_costs: RefCell::new(HashMap::new()),
            cross_states: RefCell::new(HashMap::new()),
            self_state: RefCell::new(SinkhornState::default()),
            bary_state: RefCell::new(GridBaryState::default()),
        }
    }

    fn content_key(m: &GridMeasure) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        m.shape().hash(&mut h);
        for v in m.mass() {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }

    fn self_cost(&self, m: &GridMeasure) -> Result<f64> {
        let key = Self::content_key(m);
        if let Some(&c) = self.self_costs.borrow().get(&key) {
            return Ok(c);
        }
        let c = entropic_cost_warm(m, m, &self.cfg.sinkhorn, &mut self.self_state.borrow_mut())?;
        self.self_costs.borrow_mut().insert(key, c);
        Ok(c)
    }
}

impl SpaceAdapter for GridAdapter {
    type M = GridMeasure;

    fn distance(&self, a: &GridMeasure, b: &GridMeasure) -> Result<f64> {
        let cross = {
            let mut states = self.cross_states.borrow_mut();
            let state = states.entry(Self::content_key(b)).or_default();
            entropic_cost_warm(a, b, &self.cfg.sinkhorn, state)?
        };
        let val = cross - 0.5 * (self.self_cost(a)? + self.self_cost(b)?);
        Ok(val.max(0.0).sqrt())
    }

    fn barycenter(
        &self,
        weights: &SimplexWeights,
        inputs: &[GridMeasure],
        _init: Option<&GridMeasure>,
    ) -> Result<GridMeasure> {
        bary_grid_warm(weights, inputs, &self.cfg.barycenter, &mut self.bary_state.borrow_mut())
    }

    fn discrepancy(&self, a: &GridMeasure, b: &GridMeasure) -> Result<f64> {
        if !a.same_grid(b) {
            return Err(Error::invalid("discrepancy: grids differ"));
        }
        Ok(a.mass()
            .iter()
            .zip(b.mass())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt())
    }
}

pub fn median_1d(
    qs: &[QuantileFunction],
    pis: &SimplexWeights,
    cfg: &IrlsConfig,
) -> Result<MedianResult<QuantileFunction>> {
    irls_median(&QuantileAdapter, qs, pis, cfg)
}

pub fn median_gaussian(
    sigmas: &[SpdMatrix],
    pis: &SimplexWeights,
    cfg: &IrlsConfig,
    bary_cfg: &GaussianBarycenterConfig,
) -> Result<MedianResult<SpdMatrix>> {
    let adapter = GaussianAdapter {
        bary_cfg: bary_cfg.clone(),
    };
    irls_median(&adapter, sigmas, pis, cfg)
}

pub fn median_grid(
    ms: &[GridMeasure],
    pis: &SimplexWeights,
    cfg: &IrlsConfig,
    grid_cfg: &GridMedianConfig,
) -> Result<MedianResult<GridMeasure>> {
    let adapter = GridAdapter::new(grid_cfg.clone());
    irls_median(&adapter, ms, pis, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::max_ground_cost;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(vals: &[f64]) -> QuantileFunction {
        QuantileFunction::new(vals.to_vec()).unwrap()
    }

    fn assert_descent(trace: &[f64]) {
        let slack = 1e-9 * trace[0].max(1.0);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + slack, "objective rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_input_is_its_own_median() {
        let input = q(&[0.0, 1.0, 2.0]);
        let r = median_1d(
            &[input.clone()],
            &SimplexWeights::uniform(1).unwrap(),
            &IrlsConfig::default(),
        )
        .unwrap();
        assert_eq!(r.centroid.values(), input.values());
        assert_eq!(r.termination, Termination::CoincidedWithInput);
        assert_eq!(r.weights_final, vec![1.0]);
    }

    #[test]
    fn identical_inputs_coincide_immediately() {
        let input = q(&[1.0, 2.0, 4.0]);
        let r = median_1d(
            &[input.clone(), input.clone(), input.clone()],
            &SimplexWeights::uniform(3).unwrap(),
            &IrlsConfig::default(),
        )
        .unwrap();
        assert_eq!(r.centroid.values(), input.values());
        assert_eq!(r.termination, Termination::CoincidedWithInput);
        assert_eq!(r.objective_trace, vec![0.0]);
    }

    #[test]
    fn dirac_inputs_reduce_to_the_scalar_median() {
        let inputs = [
            QuantileFunction::constant(0.0, 8).unwrap(),
            QuantileFunction::constant(0.0, 8).unwrap(),
            QuantileFunction::constant(1.0, 8).unwrap(),
        ];
        let r = median_1d(
            &inputs,
            &SimplexWeights::uniform(3).unwrap(),
            &IrlsConfig::default(),
        )
        .unwrap();
        assert_ne!(r.termination, Termination::MaxIterations);
        for &v in r.centroid.values() {
            assert!(v.abs() <= 1e-6, "median missed the scalar median: {v}");
        }
        assert_descent(&r.objective_trace);
    }

    #[test]
    fn two_point_objective_hits_the_weighted_floor() {
        // For two inputs the minimum of pi_1 d(nu, mu_1) + pi_2 d(nu, mu_2)
        // over the geodesic is min(pi_1, pi_2) * d(mu_1, mu_2).
        let a = q(&[0.0, 0.0, 0.0, 0.0]);
        let b = q(&[1.0, 1.5, 2.0, 2.5]);
        let w2 = w2_1d(&a, &b).unwrap();
        for (p1, p2) in [(0.5, 0.5), (0.25, 0.75), (0.1, 0.9)] {
            let pis = SimplexWeights::new(vec![p1, p2]).unwrap();
            let r = median_1d(&[a.clone(), b.clone()], &pis, &IrlsConfig::default()).unwrap();
            let f_star = p1.min(p2) * w2;
            let f_end = *r.objective_trace.last().unwrap();
            assert!(
                (f_end - f_star).abs() <= 1e-6,
                "weights ({p1},{p2}): F = {f_end}, floor = {f_star}"
            );
            assert_descent(&r.objective_trace);
        }
    }

    #[test]
    fn weights_stay_normalized() {
        let inputs = [q(&[0.0, 1.0]), q(&[2.0, 3.0]), q(&[-1.0, 5.0])];
        let r = median_1d(
            &inputs,
            &SimplexWeights::new(vec![0.2, 0.5, 0.3]).unwrap(),
            &IrlsConfig::default(),
        )
        .unwrap();
        let sum: f64 = r.weights_final.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(r.weights_final.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn scale_equivariance_in_1d() {
        let inputs = [q(&[0.0, 1.0, 3.0]), q(&[1.0, 2.0, 2.5]), q(&[-2.0, 0.0, 1.0])];
        let pis = SimplexWeights::new(vec![0.4, 0.35, 0.25]).unwrap();
        let cfg = IrlsConfig::default();
        let base = median_1d(&inputs, &pis, &cfg).unwrap();
        let scaled_inputs: Vec<QuantileFunction> = inputs
            .iter()
            .map(|qf| q(&qf.values().iter().map(|v| 2.0 * v).collect::<Vec<_>>()))
            .collect();
        let scaled = median_1d(&scaled_inputs, &pis, &cfg).unwrap();
        for (x, y) in base.centroid.values().iter().zip(scaled.centroid.values()) {
            // Doubling is a pure exponent shift, so the whole solve scales
            // bit-exactly.
            assert_eq!(2.0 * x, *y, "scaling by 2 moved the centroid");
        }
    }

    #[test]
    fn permutation_invariance_in_1d() {
        let inputs = [q(&[0.0, 1.0, 3.0]), q(&[1.0, 2.0, 2.5]), q(&[-2.0, 0.0, 1.0])];
        let pis = [0.5, 0.2, 0.3];
        let cfg = IrlsConfig::default();
        let a = median_1d(&inputs, &SimplexWeights::new(pis.to_vec()).unwrap(), &cfg).unwrap();
        let perm = [2usize, 0, 1];
        let inputs_p: Vec<QuantileFunction> = perm.iter().map(|&i| inputs[i].clone()).collect();
        let pis_p: Vec<f64> = perm.iter().map(|&i| pis[i]).collect();
        let b = median_1d(&inputs_p, &SimplexWeights::new(pis_p).unwrap(), &cfg).unwrap();
        for (x, y) in a.centroid.values().iter().zip(b.centroid.values()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn descent_on_random_1d_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..20 {
            let n = rng.random_range(2..6);
            let inputs: Vec<QuantileFunction> = (0..n)
                .map(|_| {
                    let start = rng.random::<f64>() * 4.0 - 2.0;
                    let mut v = start;
                    q(&(0..12)
                        .map(|_| {
                            v += rng.random::<f64>();
                            v
                        })
                        .collect::<Vec<_>>())
                })
                .collect();
            let r = median_1d(
                &inputs,
                &SimplexWeights::uniform(n).unwrap(),
                &IrlsConfig::default(),
            )
            .unwrap();
            assert_descent(&r.objective_trace);
        }
    }

    #[test]
    fn gaussian_identical_inputs_return_that_input() {
        let s = SpdMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let r = median_gaussian(
            &[s.clone(), s.clone(), s.clone()],
            &SimplexWeights::uniform(3).unwrap(),
            &IrlsConfig::default(),
            &GaussianBarycenterConfig::default(),
        )
        .unwrap();
        assert_eq!(r.termination, Termination::CoincidedWithInput);
        assert!((r.centroid.matrix() - s.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn gaussian_scalar_median_reduction() {
        // {I, I, 9I} at equal weights: on the commuting scale the problem is
        // the weighted median of {1, 1, 3}, so the median is I.
        let inputs = [
            SpdMatrix::identity(2),
            SpdMatrix::identity(2),
            SpdMatrix::scaled_identity(2, 9.0).unwrap(),
        ];
        let r = median_gaussian(
            &inputs,
            &SimplexWeights::uniform(3).unwrap(),
            &IrlsConfig::default(),
            &GaussianBarycenterConfig::default(),
        )
        .unwrap();
        let err = (r.centroid.matrix() - DMatrix::identity(2, 2)).norm();
        assert!(err <= 1e-6, "centroid missed I by {err}");
        assert_descent(&r.objective_trace);
    }

    #[test]
    fn gaussian_two_point_objective() {
        let inputs = [SpdMatrix::identity(2), SpdMatrix::scaled_identity(2, 9.0).unwrap()];
        let w2 = w2_gaussian(&inputs[0], &inputs[1]).unwrap();
        assert!((w2 - 2.0 * 2.0_f64.sqrt()).abs() <= 1e-12);
        let r = median_gaussian(
            &inputs,
            &SimplexWeights::uniform(2).unwrap(),
            &IrlsConfig::default(),
            &GaussianBarycenterConfig::default(),
        )
        .unwrap();
        let f_end = *r.objective_trace.last().unwrap();
        assert!(
            (f_end - 0.5 * w2).abs() <= 1e-6,
            "two-point objective {f_end} vs floor {}",
            0.5 * w2
        );
    }

    #[test]
    fn gaussian_descent_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let inputs: Vec<SpdMatrix> = (0..3)
                .map(|_| {
                    let a = DMatrix::from_fn(2, 2, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                    SpdMatrix::new(&a * a.transpose() + DMatrix::identity(2, 2) * 0.25).unwrap()
                })
                .collect();
            let r = median_gaussian(
                &inputs,
                &SimplexWeights::uniform(3).unwrap(),
                &IrlsConfig {
                    // IRLS is linearly convergent; an interior minimizer can
                    // need a few hundred outer steps at this tolerance.
                    max_outer: 500,
                    ..Default::default()
                },
                &GaussianBarycenterConfig::default(),
            )
            .unwrap();
            assert_descent(&r.objective_trace);
            assert_ne!(r.termination, Termination::MaxIterations);
        }
    }

    #[test]
    fn grid_identical_inputs_return_that_input() {
        let m = GridMeasure::histogram_from_sample(&[0.1, 0.4, 0.45, 0.8], 8).unwrap();
        let eps = 1e-2 * max_ground_cost(&m, &m).unwrap();
        let r = median_grid(
            &[m.clone(), m.clone(), m.clone()],
            &SimplexWeights::uniform(3).unwrap(),
            &IrlsConfig::default(),
            &GridMedianConfig::new(eps),
        )
        .unwrap();
        let l1: f64 = r
            .centroid
            .mass()
            .iter()
            .zip(m.mass())
            .map(|(x, y)| (x - y).abs())
            .sum();
        assert!(l1 <= 1e-5, "median of identical grids drifted by L1 {l1}");
        assert_ne!(r.termination, Termination::MaxIterations);
    }

    #[test]
    fn grid_median_descends_on_random_histograms() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let bins = 12;
        let coords: Vec<f64> = (0..bins).map(|i| i as f64 / (bins - 1) as f64).collect();
        let inputs: Vec<GridMeasure> = (0..4)
            .map(|_| {
                let raw: Vec<f64> = (0..bins).map(|_| rng.random::<f64>() + 0.05).collect();
                let s: f64 = raw.iter().sum();
                GridMeasure::new(
                    vec![bins],
                    vec![coords.clone()],
                    raw.iter().map(|v| v / s).collect(),
                )
                .unwrap()
            })
            .collect();
        let r = median_grid(
            &inputs,
            &SimplexWeights::uniform(4).unwrap(),
            &IrlsConfig {
                discrepancy_tol: 1e-6,
                ..Default::default()
            },
            &GridMedianConfig::new(2e-3),
        )
        .unwrap();
        assert_descent(&r.objective_trace);
        assert_ne!(r.termination, Termination::MaxIterations);
    }

    #[test]
    fn given_initializer_requires_the_with_start_entry() {
        let inputs = [q(&[0.0, 1.0]), q(&[2.0, 3.0])];
        let cfg = IrlsConfig {
            initializer: Initializer::Given,
            ..Default::default()
        };
        let err = median_1d(&inputs, &SimplexWeights::uniform(2).unwrap(), &cfg);
        assert!(err.is_err());
        let start = q(&[5.0, 6.0]);
        let r = irls_median_with_start(
            &QuantileAdapter,
            &inputs,
            &SimplexWeights::uniform(2).unwrap(),
            &cfg,
            &start,
        )
        .unwrap();
        assert_descent(&r.objective_trace);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let err = irls_median(
            &QuantileAdapter,
            &[],
            &SimplexWeights::uniform(1).unwrap(),
            &IrlsConfig::default(),
        );
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
