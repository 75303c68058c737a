//! Shared log-domain kernel applications for the entropic solvers.
//!
//! The squared Euclidean cost on a grid separates per axis, so a kernel
//! application on a 2-D grid is two batched 1-D log-sum-exp passes:
//! O(n^(3/2)) per application instead of O(n^2).

/// Per-axis squared-distance block: c[i * nb + j] = (x_i - y_j)^2.
pub(crate) struct AxisCost {
    pub na: usize,
    pub nb: usize,
    pub c: Vec<f64>,
}

impl AxisCost {
    pub fn new(xa: &[f64], xb: &[f64]) -> Self {
        let mut c = Vec::with_capacity(xa.len() * xb.len());
        for &x in xa {
            for &y in xb {
                c.push((x - y) * (x - y));
            }
        }
        AxisCost {
            na: xa.len(),
            nb: xb.len(),
            c,
        }
    }

    fn max(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, &v| m.max(v))
    }
}

pub(crate) fn logsumexp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Log-kernel between two grids (possibly the same one) at a mutable
/// epsilon; `scaled` holds cost/epsilon so inner loops only subtract.
pub(crate) struct LogKernel {
    axes: Vec<AxisCost>,
    scaled: Vec<Vec<f64>>,
    pub max_cost: f64,
    tmp: Vec<f64>,
}

impl LogKernel {
    pub fn new(coords_a: &[Vec<f64>], coords_b: &[Vec<f64>]) -> Self {
        let axes: Vec<AxisCost> = coords_a
            .iter()
            .zip(coords_b)
            .map(|(xa, xb)| AxisCost::new(xa, xb))
            .collect();
        let max_cost = axes.iter().map(AxisCost::max).sum();
        LogKernel {
            scaled: axes.iter().map(|ax| vec![0.0; ax.c.len()]).collect(),
            axes,
            max_cost,
            tmp: Vec::new(),
        }
    }

    pub fn set_eps(&mut self, eps: f64) {
        for (ax, s) in self.axes.iter().zip(self.scaled.iter_mut()) {
            for (dst, &src) in s.iter_mut().zip(&ax.c) {
                *dst = src / eps;
            }
        }
    }

    /// out_i = lse_j (x_j - C_ij / eps).
    pub fn apply_forward(&mut self, x: &[f64], out: &mut [f64]) {
        match self.axes.len() {
            1 => {
                let ax = &self.axes[0];
                let cs = &self.scaled[0];
                for i in 0..ax.na {
                    let row = &cs[i * ax.nb..(i + 1) * ax.nb];
                    out[i] = logsumexp(x.iter().zip(row).map(|(&xv, &cv)| xv - cv));
                }
            }
            _ => {
                let (a1, a2) = (&self.axes[0], &self.axes[1]);
                let (c1, c2) = (&self.scaled[0], &self.scaled[1]);
                let tmp = &mut self.tmp;
                // tmp[i2 * nb1 + j1] = lse_j2 (x[j1, j2] - c2[i2, j2])
                tmp.resize(a2.na * a1.nb, 0.0);
                for i2 in 0..a2.na {
                    let crow = &c2[i2 * a2.nb..(i2 + 1) * a2.nb];
                    for j1 in 0..a1.nb {
                        let xrow = &x[j1 * a2.nb..(j1 + 1) * a2.nb];
                        tmp[i2 * a1.nb + j1] =
                            logsumexp(xrow.iter().zip(crow).map(|(&xv, &cv)| xv - cv));
                    }
                }
                for i1 in 0..a1.na {
                    let crow = &c1[i1 * a1.nb..(i1 + 1) * a1.nb];
                    for i2 in 0..a2.na {
                        let trow = &tmp[i2 * a1.nb..(i2 + 1) * a1.nb];
                        out[i1 * a2.na + i2] =
                            logsumexp(trow.iter().zip(crow).map(|(&tv, &cv)| tv - cv));
                    }
                }
            }
        }
    }

    /// out_j = lse_i (x_i - C_ij / eps).
    pub fn apply_transpose(&mut self, x: &[f64], out: &mut [f64]) {
        match self.axes.len() {
            1 => {
                let ax = &self.axes[0];
                let cs = &self.scaled[0];
                for j in 0..ax.nb {
                    out[j] = logsumexp((0..ax.na).map(|i| x[i] - cs[i * ax.nb + j]));
                }
            }
            _ => {
                let (a1, a2) = (&self.axes[0], &self.axes[1]);
                let (c1, c2) = (&self.scaled[0], &self.scaled[1]);
                let tmp = &mut self.tmp;
                // tmp[j2 * na1 + i1] = lse_i2 (x[i1, i2] - c2[i2, j2])
                tmp.resize(a2.nb * a1.na, 0.0);
                for j2 in 0..a2.nb {
                    for i1 in 0..a1.na {
                        let xrow = &x[i1 * a2.na..(i1 + 1) * a2.na];
                        tmp[j2 * a1.na + i1] = logsumexp(
                            xrow.iter()
                                .enumerate()
                                .map(|(i2, &xv)| xv - c2[i2 * a2.nb + j2]),
                        );
                    }
                }
                for j1 in 0..a1.nb {
                    for j2 in 0..a2.nb {
                        let trow = &tmp[j2 * a1.na..(j2 + 1) * a1.na];
                        out[j1 * a2.nb + j2] = logsumexp(
                            trow.iter()
                                .enumerate()
                                .map(|(i1, &tv)| tv - c1[i1 * a1.nb + j1]),
                        );
                    }
                }
            }
        }
    }
}
