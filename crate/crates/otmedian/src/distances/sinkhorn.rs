//! Log-domain Sinkhorn iterations for entropic optimal transport between
//! grid measures. Potentials carry the log-masses folded in, so zero-mass
//! bins stay finite; an epsilon-scaling warm start keeps small target
//! epsilons reachable.

use super::kernel::LogKernel;
use crate::measures::GridMeasure;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SinkhornConfig {
    /// Entropic regularization strength, in squared coordinate units.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Stop when the L-infinity marginal violation drops below this.
    pub tol: f64,
    /// Subtract half of both self-terms (Sinkhorn divergence). Keeps the
    /// self-distance at exactly zero, which the median weights rely on.
    pub debiased: bool,
}

impl SinkhornConfig {
    pub fn new(epsilon: f64) -> Self {
        SinkhornConfig {
            epsilon,
            max_iter: 10_000,
            tol: 1e-7,
            debiased: true,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "sinkhorn: epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("sinkhorn: tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("sinkhorn: max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Entropic approximation of W2. Returns sqrt of the clamped regularized
/// cost; with `cfg.debiased`, sqrt of the Sinkhorn divergence.
pub fn sinkhorn_distance(a: &GridMeasure, b: &GridMeasure, cfg: &SinkhornConfig) -> Result<f64> {
    cfg.validate()?;
    let value = if cfg.debiased {
        let ab = entropic_cost(a, b, cfg)?;
        let aa = entropic_cost(a, a, cfg)?;
        let bb = entropic_cost(b, b, cfg)?;
        ab - 0.5 * (aa + bb)
    } else {
        entropic_cost(a, b, cfg)?
    };
    Ok(value.max(0.0).sqrt())
}

/// Converged potential from a previous solve, reused as the next solve's
/// starting point. Each pass recomputes `f` from `g` before reading it, so
/// only `g` carries information; a state at the right size and epsilon
/// also skips the epsilon-scaling phase, which is most of the work when
/// the measures have barely moved since the last call.
#[derive(Debug, Clone, Default)]
pub struct SinkhornState {
    eps: f64,
    g: Vec<f64>,
}

/// Regularized transport cost `<f,a> + <g,b>` at the converged potentials.
/// Exposed crate-internally so the median adapter can cache self-terms.
pub(crate) fn entropic_cost(a: &GridMeasure, b: &GridMeasure, cfg: &SinkhornConfig) -> Result<f64> {
    entropic_cost_warm(a, b, cfg, &mut SinkhornState::default())
}

/// `entropic_cost` with caller-owned warm-start state; the converged
/// potential is written back on success.
pub(crate) fn entropic_cost_warm(
    a: &GridMeasure,
    b: &GridMeasure,
    cfg: &SinkhornConfig,
    state: &mut SinkhornState,
) -> Result<f64> {
    if a.rank() != b.rank() {
        return Err(Error::invalid(format!(
            "sinkhorn: grid ranks differ ({} vs {})",
            a.rank(),
            b.rank()
        )));
    }
    let mut kernel = LogKernel::new(a.coordinates(), b.coordinates());
    if kernel.max_cost == 0.0 {
        // All ground costs vanish; any feasible plan is optimal at zero.
        return Ok(0.0);
    }
    let am = a.mass();
    let bm = b.mass();
    let la: Vec<f64> = am.iter().map(|&m| m.ln()).collect();
    let lb: Vec<f64> = bm.iter().map(|&m| m.ln()).collect();
    let na = am.len();
    let nb = bm.len();

    let target = cfg.epsilon;
    let warm = state.eps == target && state.g.len() == nb;
    let mut eps = if warm {
        target
    } else {
        (kernel.max_cost / 4.0).max(target)
    };
    kernel.set_eps(eps);
    let mut f = vec![0.0; na];
    let mut g = if warm {
        std::mem::take(&mut state.g)
    } else {
        vec![0.0; nb]
    };
    let mut xbuf = vec![0.0; na.max(nb)];
    let mut obuf = vec![0.0; na.max(nb)];

    let mut iters = 0;
    loop {
        // f_i = -eps lse_j(g_j/eps + log b_j - C_ij/eps)
        for j in 0..nb {
            xbuf[j] = g[j] / eps + lb[j];
        }
        kernel.apply_forward(&xbuf[..nb], &mut obuf[..na]);
        for i in 0..na {
            f[i] = -eps * obuf[i];
        }
        // g'_j = -eps lse_i(f_i/eps + log a_i - C_ij/eps)
        for i in 0..na {
            xbuf[i] = f[i] / eps + la[i];
        }
        kernel.apply_transpose(&xbuf[..na], &mut obuf[..nb]);
        let mut viol = 0.0_f64;
        for j in 0..nb {
            let gnew = -eps * obuf[j];
            let col_mass = bm[j] * ((g[j] - gnew) / eps).exp();
            viol = viol.max((col_mass - bm[j]).abs());
            g[j] = gnew;
        }
        iters += 1;

        if eps > target {
            // warm-started halving schedule down to the target
            if viol <= 1e-3 || iters % 25 == 0 {
                eps = (eps / 2.0).max(target);
                kernel.set_eps(eps);
            }
        } else if viol <= cfg.tol {
            break;
        }
        if iters >= cfg.max_iter {
            return Err(Error::Convergence {
                what: "sinkhorn",
                iterations: iters,
                residual: viol,
                tolerance: cfg.tol,
            });
        }
    }

    let mut cost = 0.0;
    for i in 0..na {
        if am[i] > 0.0 {
            cost += am[i] * f[i];
        }
    }
    for j in 0..nb {
        if bm[j] > 0.0 {
            cost += bm[j] * g[j];
        }
    }
    state.eps = target;
    state.g = g;
    Ok(cost)
}
