//! JSON documents exchanged with the user: measure sets on the way in,
//! result measures on the way out.
//!
//! One top-level shape serves all three families:
//!
//! ```json
//! {"measures": [<measure>, ...], "weights": [1, 1, 2]}
//! ```
//!
//! `weights` is optional (uniform when absent) and is normalized onto the
//! simplex, so raw positive weights are fine. The per-family measure
//! encodings are: a non-decreasing array of quantile values or a bare
//! number for a Dirac atom (univariate), a covariance matrix as row arrays
//! (gaussian), and `{"shape", "coordinates", "mass"}` (grid).

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use otmedian::measures::{GridMeasure, QuantileFunction, SimplexWeights, SpdMatrix};
use otmedian::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc<T> {
    measures: Vec<T>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum UnivariateEntry {
    Dirac(f64),
    Quantiles(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridEntry {
    shape: Vec<usize>,
    coordinates: Vec<Vec<f64>>,
    mass: Vec<f64>,
}

/// Prefixes bare I/O errors with the path they concern; the library
/// reports them without.
pub fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        Error::Json(e) => Error::Parse {
            offset: 0,
            message: format!("{}: {e}", path.display()),
        },
        other => other,
    }
}

fn measure_context(e: Error, path: &Path, index: usize) -> Error {
    match e {
        Error::InvalidInput(msg) => {
            Error::invalid(format!("{}: measure {index}: {msg}", path.display()))
        }
        other => other,
    }
}

/// Byte offset of a serde_json error position within `text`.
fn json_offset(text: &str, e: &serde_json::Error) -> usize {
    if e.line() == 0 {
        return 0;
    }
    let before: usize = text
        .split_inclusive('\n')
        .take(e.line() - 1)
        .map(str::len)
        .sum();
    before + e.column().saturating_sub(1)
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &Path) -> Result<InputDoc<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| with_path(Error::Io(e), path))?;
    let doc: InputDoc<T> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        offset: json_offset(&text, &e),
        message: format!("{}: {e}", path.display()),
    })?;
    if doc.measures.is_empty() {
        return Err(Error::invalid(format!("{}: no measures", path.display())));
    }
    Ok(doc)
}

fn weights_for(raw: Option<Vec<f64>>, n: usize, path: &Path) -> Result<SimplexWeights> {
    match raw {
        None => SimplexWeights::uniform(n),
        Some(v) => {
            if v.len() != n {
                return Err(Error::invalid(format!(
                    "{}: {} weights for {} measures",
                    path.display(),
                    v.len(),
                    n
                )));
            }
            SimplexWeights::normalized(&v).map_err(|e| match e {
                Error::InvalidInput(msg) => {
                    Error::invalid(format!("{}: {msg}", path.display()))
                }
                other => other,
            })
        }
    }
}

/// 1-D measures. Dirac atoms are expanded onto the grid the array-valued
/// entries share (a two-point grid when every entry is an atom).
pub fn load_univariate(path: &Path) -> Result<(Vec<QuantileFunction>, SimplexWeights)> {
    let doc: InputDoc<UnivariateEntry> = read_doc(path)?;
    let mut k: Option<usize> = None;
    for (i, entry) in doc.measures.iter().enumerate() {
        if let UnivariateEntry::Quantiles(v) = entry {
            match k {
                None => k = Some(v.len()),
                Some(k0) if k0 != v.len() => {
                    return Err(Error::invalid(format!(
                        "{}: measure {i}: quantile grid has {} points, earlier measures have {k0}",
                        path.display(),
                        v.len()
                    )));
                }
                Some(_) => {}
            }
        }
    }
    let k = k.unwrap_or(2);
    let weights = weights_for(doc.weights, doc.measures.len(), path)?;
    let measures = doc
        .measures
        .into_iter()
        .enumerate()
        .map(|(i, entry)| {
            match entry {
                UnivariateEntry::Dirac(c) => QuantileFunction::constant(c, k),
                UnivariateEntry::Quantiles(v) => QuantileFunction::new(v),
            }
            .map_err(|e| measure_context(e, path, i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((measures, weights))
}

/// Covariance matrices of centered Gaussians.
pub fn load_gaussian(path: &Path) -> Result<(Vec<SpdMatrix>, SimplexWeights)> {
    let doc: InputDoc<Vec<Vec<f64>>> = read_doc(path)?;
    let weights = weights_for(doc.weights, doc.measures.len(), path)?;
    let measures = doc
        .measures
        .iter()
        .enumerate()
        .map(|(i, rows)| SpdMatrix::from_rows(rows).map_err(|e| measure_context(e, path, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok((measures, weights))
}

/// Grid measures.
pub fn load_grid(path: &Path) -> Result<(Vec<GridMeasure>, SimplexWeights)> {
    let doc: InputDoc<GridEntry> = read_doc(path)?;
    let weights = weights_for(doc.weights, doc.measures.len(), path)?;
    let measures = doc
        .measures
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            GridMeasure::new(g.shape, g.coordinates, g.mass)
                .map_err(|e| measure_context(e, path, i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((measures, weights))
}

pub fn univariate_value(q: &QuantileFunction) -> Value {
    json!(q.values())
}

pub fn gaussian_value(s: &SpdMatrix) -> Value {
    json!(s.to_rows())
}

pub fn grid_value(g: &GridMeasure) -> Value {
    json!({
        "shape": g.shape(),
        "coordinates": g.coordinates(),
        "mass": g.mass(),
    })
}

/// Writes a single-measure document that `load_*` accepts back.
pub fn write_measure_doc(path: &Path, measure: &Value) -> Result<()> {
    let doc = json!({ "measures": [measure] });
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, text + "\n").map_err(|e| with_path(Error::Io(e), path))
}

/// Writes an arbitrary JSON document (summaries for `--out`).
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| with_path(Error::Io(e), path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_json(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn dirac_atoms_expand_to_the_shared_grid() {
        let f = temp_json(r#"{"measures": [2, [0.0, 1.0, 2.0], 5]}"#);
        let (ms, w) = load_univariate(f.path()).unwrap();
        assert_eq!(ms.len(), 3);
        assert!(ms.iter().all(|q| q.grid_size() == 3));
        assert_eq!(ms[0].values(), &[2.0, 2.0, 2.0]);
        assert_eq!(w.values(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn all_dirac_document_uses_a_two_point_grid() {
        let f = temp_json(r#"{"measures": [2, 5]}"#);
        let (ms, _) = load_univariate(f.path()).unwrap();
        assert_eq!(ms[0].grid_size(), 2);
    }

    #[test]
    fn mismatched_quantile_grids_name_the_measure() {
        let f = temp_json(r#"{"measures": [[0.0, 1.0], [0.0, 1.0, 2.0]]}"#);
        let err = load_univariate(f.path()).unwrap_err().to_string();
        assert!(err.contains("measure 1"), "{err}");
    }

    #[test]
    fn weights_are_normalized() {
        let f = temp_json(r#"{"measures": [1, 2], "weights": [1, 3]}"#);
        let (_, w) = load_univariate(f.path()).unwrap();
        assert_eq!(w.values(), &[0.25, 0.75]);
    }

    #[test]
    fn weight_count_mismatch_is_invalid_input() {
        let f = temp_json(r#"{"measures": [1, 2], "weights": [1]}"#);
        let err = load_univariate(f.path()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "{err}");
    }

    #[test]
    fn malformed_json_reports_a_byte_offset() {
        let f = temp_json("{\"measures\": [1,\n 2,]}");
        let err = load_univariate(f.path()).unwrap_err();
        match err {
            Error::Parse { offset, message } => {
                assert!(offset > 0, "offset {offset}");
                assert!(message.contains(".json") || message.contains("tmp"), "{message}");
            }
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn non_spd_covariance_is_rejected_with_context() {
        let f = temp_json(r#"{"measures": [[[1.0, 0.0], [0.0, -1.0]]]}"#);
        let err = load_gaussian(f.path()).unwrap_err().to_string();
        assert!(err.contains("measure 0"), "{err}");
    }

    #[test]
    fn grid_round_trip_through_measure_doc() {
        let g = GridMeasure::new(
            vec![2, 2],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![0.25; 4],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        write_measure_doc(&path, &grid_value(&g)).unwrap();
        let (ms, _) = load_grid(&path).unwrap();
        assert_eq!(ms[0], g);
    }
}
