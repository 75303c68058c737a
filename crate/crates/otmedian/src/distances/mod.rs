//! 2-Wasserstein distances: closed forms for quantile and Gaussian
//! encodings, an entropic solver and an exact LP for grid measures.

mod exact;
pub(crate) mod kernel;
mod sinkhorn;

pub use exact::exact_lp_w2;
pub use sinkhorn::{sinkhorn_distance, SinkhornConfig};

pub(crate) use sinkhorn::{entropic_cost_warm, SinkhornState};

use nalgebra::DMatrix;

use crate::measures::{GridMeasure, QuantileFunction, SpdMatrix, SPD_EIGEN_FLOOR};
use crate::{Error, Result};

/// W2 between 1-D measures: L2 distance of their quantile functions,
/// sqrt((1/K) * sum_j (a_j - b_j)^2) on the shared mid-quantile grid.
pub fn w2_1d(a: &QuantileFunction, b: &QuantileFunction) -> Result<f64> {
    if a.grid_size() != b.grid_size() {
        return Err(Error::invalid(format!(
            "w2_1d: grid sizes differ ({} vs {})",
            a.grid_size(),
            b.grid_size()
        )));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.grid_size() as f64).sqrt())
}

/// Symmetric square root of an SPD matrix via eigendecomposition.
/// Eigenvalues below 1e-12 of the largest are an SPD violation and are
/// rejected rather than clamped.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::invalid("spd_sqrt: matrix must be square and non-empty"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("spd_sqrt: non-finite entry"));
    }
    let sym = (m.transpose() + m) * 0.5;
    let eigen = sym.symmetric_eigen();
    let max_eig = eigen.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    if max_eig <= 0.0
        || eigen
            .eigenvalues
            .iter()
            .any(|&v| v <= SPD_EIGEN_FLOOR * max_eig)
    {
        return Err(Error::invalid(
            "spd_sqrt: matrix is not positive definite after symmetrization",
        ));
    }
    let mut d = eigen.eigenvalues.clone();
    d.apply(|v| *v = v.sqrt());
    let r = &eigen.eigenvectors * DMatrix::from_diagonal(&d) * eigen.eigenvectors.transpose();
    Ok(symmetrize(r))
}

/// PSD square root with negative rounding noise clamped to zero; internal
/// helper for products of SPD matrices.
pub(crate) fn psd_sqrt(sym: &DMatrix<f64>) -> DMatrix<f64> {
    let eigen = sym.clone().symmetric_eigen();
    let mut d = eigen.eigenvalues.clone();
    d.apply(|v| *v = v.max(0.0).sqrt());
    symmetrize(&eigen.eigenvectors * DMatrix::from_diagonal(&d) * eigen.eigenvectors.transpose())
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (m.transpose() + m) * 0.5
}

/// Bures-Wasserstein distance between centered Gaussians:
/// sqrt(tr(A) + tr(B) - 2 tr((A^1/2 B A^1/2)^1/2)), clamped at zero before
/// the square root.
pub fn w2_gaussian(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "w2_gaussian: dimensions differ ({} vs {})",
            a.dim(),
            b.dim()
        )));
    }
    let ra = spd_sqrt(a.matrix())?;
    let cross = psd_sqrt(&symmetrize(&ra * b.matrix() * &ra));
    let val = a.matrix().trace() + b.matrix().trace() - 2.0 * cross.trace();
    Ok(val.max(0.0).sqrt())
}

/// Largest possible squared ground cost between two grids; the natural
/// scale for choosing epsilon.
pub fn max_ground_cost(a: &GridMeasure, b: &GridMeasure) -> Result<f64> {
    if a.rank() != b.rank() {
        return Err(Error::invalid("grid measures have different ranks"));
    }
    let mut total = 0.0;
    for (ca, cb) in a.coordinates().iter().zip(b.coordinates()) {
        let lo_a = ca[0];
        let hi_a = ca[ca.len() - 1];
        let lo_b = cb[0];
        let hi_b = cb[cb.len() - 1];
        let span = (hi_a - lo_b).abs().max((hi_b - lo_a).abs());
        total += span * span;
    }
    Ok(total)
}
