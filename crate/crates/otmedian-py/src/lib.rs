//! Python bindings over the otmedian library. One module, plain functions:
//! measures travel as lists (quantile values, covariance rows, grid mass),
//! solver results come back as dicts mirroring the CLI's JSON summaries.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use otmedian::barycenter::{
    bary_1d, bary_gaussian, bary_grid, BarycenterRule, GaussianBarycenterConfig,
    GridBarycenterConfig,
};
use otmedian::distances::{
    exact_lp_w2, max_ground_cost, sinkhorn_distance, w2_1d as lib_w2_1d,
    w2_gaussian as lib_w2_gaussian, SinkhornConfig,
};
use otmedian::measures::{GridMeasure, QuantileFunction, SimplexWeights, SpdMatrix};
use otmedian::median::{
    median_1d as lib_median_1d, median_gaussian as lib_median_gaussian,
    median_grid as lib_median_grid, GridMedianConfig, IrlsConfig, MedianResult,
};
use otmedian::Error;

/// Default entropic blur relative to the largest squared support distance,
/// matching the CLI.
const GRID_EPS_REL: f64 = 2e-3;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Parse { .. } | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Convergence { .. } => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
    }
}

fn quantiles_in(values: Vec<Vec<f64>>) -> PyResult<Vec<QuantileFunction>> {
    values
        .into_iter()
        .map(|v| QuantileFunction::new(v).map_err(to_py_err))
        .collect()
}

fn spd_in(rows: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<SpdMatrix>> {
    rows.iter()
        .map(|m| SpdMatrix::from_rows(m).map_err(to_py_err))
        .collect()
}

fn grids_in(
    shape: &[usize],
    coordinates: &[Vec<f64>],
    masses: Vec<Vec<f64>>,
) -> PyResult<Vec<GridMeasure>> {
    masses
        .into_iter()
        .map(|m| {
            GridMeasure::new(shape.to_vec(), coordinates.to_vec(), m).map_err(to_py_err)
        })
        .collect()
}

/// None means uniform; anything else is normalized from raw positives.
fn weights_in(n: usize, weights: Option<Vec<f64>>) -> PyResult<SimplexWeights> {
    match weights {
        None => SimplexWeights::uniform(n).map_err(to_py_err),
        Some(raw) => {
            if raw.len() != n {
                return Err(PyValueError::new_err(format!(
                    "{} weights for {} measures",
                    raw.len(),
                    n
                )));
            }
            SimplexWeights::normalized(&raw).map_err(to_py_err)
        }
    }
}

fn irls_config(max_outer: usize, tol: f64) -> IrlsConfig {
    IrlsConfig {
        max_outer,
        discrepancy_tol: tol,
        ..IrlsConfig::default()
    }
}

fn median_dict<'py, M>(
    py: Python<'py>,
    result: &MedianResult<M>,
    key: &str,
    value: impl IntoPyObject<'py>,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item(key, value)?;
    d.set_item("objective", &result.objective_trace)?;
    d.set_item(
        "iterations",
        result.objective_trace.len().saturating_sub(1),
    )?;
    d.set_item("weights_final", &result.weights_final)?;
    d.set_item("termination", result.termination.to_string())?;
    Ok(d)
}

fn grid_epsilon(epsilon: Option<f64>, measures: &[GridMeasure]) -> PyResult<f64> {
    match epsilon {
        Some(e) => Ok(e),
        None => {
            let cost = max_ground_cost(&measures[0], &measures[0]).map_err(to_py_err)?;
            Ok(GRID_EPS_REL * cost)
        }
    }
}

/// W2 between two quantile functions on a shared rank grid.
#[pyfunction]
fn w2_1d(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let qa = QuantileFunction::new(a).map_err(to_py_err)?;
    let qb = QuantileFunction::new(b).map_err(to_py_err)?;
    lib_w2_1d(&qa, &qb).map_err(to_py_err)
}

/// Bures-Wasserstein distance between centered Gaussians given as
/// covariance rows.
#[pyfunction]
fn w2_gaussian(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    let sa = SpdMatrix::from_rows(&a).map_err(to_py_err)?;
    let sb = SpdMatrix::from_rows(&b).map_err(to_py_err)?;
    lib_w2_gaussian(&sa, &sb).map_err(to_py_err)
}

/// Debiased entropic W2 between two mass vectors on one grid.
#[pyfunction]
#[pyo3(signature = (shape, coordinates, a, b, epsilon=None))]
fn w2_grid(
    shape: Vec<usize>,
    coordinates: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    epsilon: Option<f64>,
) -> PyResult<f64> {
    let ms = grids_in(&shape, &coordinates, vec![a, b])?;
    let eps = grid_epsilon(epsilon, &ms)?;
    sinkhorn_distance(&ms[0], &ms[1], &SinkhornConfig::new(eps)).map_err(to_py_err)
}

/// Exact W2 by the transportation LP; limited to small supports.
#[pyfunction]
fn w2_grid_exact(
    shape: Vec<usize>,
    coordinates: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
) -> PyResult<f64> {
    let ms = grids_in(&shape, &coordinates, vec![a, b])?;
    exact_lp_w2(&ms[0], &ms[1]).map_err(to_py_err)
}

/// Quantile-average barycenter; returns the quantile values.
#[pyfunction]
#[pyo3(signature = (quantiles, weights=None))]
fn barycenter_1d(quantiles: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    let qs = quantiles_in(quantiles)?;
    let w = weights_in(qs.len(), weights)?;
    Ok(bary_1d(&w, &qs).map_err(to_py_err)?.values().to_vec())
}

/// Fixed-point Gaussian barycenter; returns covariance rows. `rule` is
/// "alvarez" (default) or "ruschendorf".
#[pyfunction]
#[pyo3(signature = (matrices, weights=None, rule="alvarez"))]
fn barycenter_gaussian(
    matrices: Vec<Vec<Vec<f64>>>,
    weights: Option<Vec<f64>>,
    rule: &str,
) -> PyResult<Vec<Vec<f64>>> {
    let ms = spd_in(matrices)?;
    let w = weights_in(ms.len(), weights)?;
    let rule = match rule {
        "alvarez" => BarycenterRule::AlvarezEsteban,
        "ruschendorf" => BarycenterRule::Ruschendorf,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown rule {other:?}, expected \"alvarez\" or \"ruschendorf\""
            )))
        }
    };
    let cfg = GaussianBarycenterConfig {
        rule,
        ..GaussianBarycenterConfig::default()
    };
    Ok(bary_gaussian(&w, &ms, &cfg).map_err(to_py_err)?.to_rows())
}

/// Debiased entropic barycenter on a shared grid; returns the mass vector.
#[pyfunction]
#[pyo3(signature = (shape, coordinates, masses, weights=None, epsilon=None))]
fn barycenter_grid(
    shape: Vec<usize>,
    coordinates: Vec<Vec<f64>>,
    masses: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
    epsilon: Option<f64>,
) -> PyResult<Vec<f64>> {
    let ms = grids_in(&shape, &coordinates, masses)?;
    let w = weights_in(ms.len(), weights)?;
    let eps = grid_epsilon(epsilon, &ms)?;
    let cfg = GridBarycenterConfig::new(eps);
    Ok(bary_grid(&w, &ms, &cfg).map_err(to_py_err)?.mass().to_vec())
}

/// IRLS Wasserstein median of quantile functions. Returns a dict with the
/// centroid under "quantiles" plus the objective trace, final weights and
/// termination reason.
#[pyfunction]
#[pyo3(signature = (quantiles, weights=None, max_outer=100, tol=1e-8))]
fn median_1d<'py>(
    py: Python<'py>,
    quantiles: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
    max_outer: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let qs = quantiles_in(quantiles)?;
    let w = weights_in(qs.len(), weights)?;
    let r = lib_median_1d(&qs, &w, &irls_config(max_outer, tol)).map_err(to_py_err)?;
    let values = r.centroid.values().to_vec();
    median_dict(py, &r, "quantiles", values)
}

/// IRLS Wasserstein median of centered Gaussians; centroid under
/// "covariance" as rows.
#[pyfunction]
#[pyo3(signature = (matrices, weights=None, max_outer=100, tol=1e-8))]
fn median_gaussian<'py>(
    py: Python<'py>,
    matrices: Vec<Vec<Vec<f64>>>,
    weights: Option<Vec<f64>>,
    max_outer: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let ms = spd_in(matrices)?;
    let w = weights_in(ms.len(), weights)?;
    let r = lib_median_gaussian(
        &ms,
        &w,
        &irls_config(max_outer, tol),
        &GaussianBarycenterConfig::default(),
    )
    .map_err(to_py_err)?;
    let rows = r.centroid.to_rows();
    median_dict(py, &r, "covariance", rows)
}

/// IRLS Wasserstein median of grid measures; centroid under "mass".
#[pyfunction]
#[pyo3(signature = (shape, coordinates, masses, weights=None, epsilon=None, max_outer=100, tol=1e-8))]
#[allow(clippy::too_many_arguments)]
fn median_grid<'py>(
    py: Python<'py>,
    shape: Vec<usize>,
    coordinates: Vec<Vec<f64>>,
    masses: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
    epsilon: Option<f64>,
    max_outer: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let ms = grids_in(&shape, &coordinates, masses)?;
    let w = weights_in(ms.len(), weights)?;
    let eps = grid_epsilon(epsilon, &ms)?;
    let r = lib_median_grid(
        &ms,
        &w,
        &irls_config(max_outer, tol),
        &GridMedianConfig::new(eps),
    )
    .map_err(to_py_err)?;
    let mass = r.centroid.mass().to_vec();
    median_dict(py, &r, "mass", mass)
}

#[pymodule]
fn otmedian_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(w2_1d, m)?)?;
    m.add_function(wrap_pyfunction!(w2_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(w2_grid, m)?)?;
    m.add_function(wrap_pyfunction!(w2_grid_exact, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter_1d, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter_grid, m)?)?;
    m.add_function(wrap_pyfunction!(median_1d, m)?)?;
    m.add_function(wrap_pyfunction!(median_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(median_grid, m)?)?;
    Ok(())
}
