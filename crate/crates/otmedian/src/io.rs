//! File formats: the IDX image/label container, the sweep result CSV, small
//! SVG emitters for error curves and grayscale image grids, and the JSON
//! sweep configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder};

use crate::experiments::{ContaminationConfig, SweepResult, SweepRow};
use crate::measures::GridMeasure;
use crate::{Error, Result};

/// Magic word of a 3-axis IDX file of unsigned bytes (image sets).
pub const IDX_IMAGES_MAGIC: u32 = 2051;
/// Magic word of a 1-axis IDX file of unsigned bytes (label sets).
pub const IDX_LABELS_MAGIC: u32 = 2049;

/// Header of an IDX container: the full magic word and one extent per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub dims: Vec<usize>,
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

/// Parses an IDX header and validates the magic word. The magic word pins
/// both the element type (third byte, 0x08 = unsigned byte) and the axis
/// count (fourth byte), so one 32-bit comparison covers them; the message
/// spells the decomposition out for mismatches.
pub fn parse_idx_header(bytes: &[u8], expected_magic: u32) -> Result<IdxHeader> {
    if bytes.len() < 4 {
        return Err(parse_err(
            bytes.len(),
            format!(
                "truncated IDX header: {} of 4 magic bytes present",
                bytes.len()
            ),
        ));
    }
    let magic = BigEndian::read_u32(&bytes[0..4]);
    if magic != expected_magic {
        return Err(parse_err(
            0,
            format!(
                "bad IDX magic {magic} (element type 0x{:02x}, {} axes): expected {expected_magic}",
                bytes[2], bytes[3]
            ),
        ));
    }
    let ndim = bytes[3] as usize;
    let mut dims = Vec::with_capacity(ndim);
    for axis in 0..ndim {
        let off = 4 + 4 * axis;
        if bytes.len() < off + 4 {
            return Err(parse_err(
                bytes.len(),
                format!(
                    "truncated IDX header: extent of axis {axis} needs bytes {off}..{}",
                    off + 4
                ),
            ));
        }
        dims.push(BigEndian::read_u32(&bytes[off..off + 4]) as usize);
    }
    Ok(IdxHeader { magic, dims })
}

/// Checks that exactly the declared payload follows the header and returns
/// the header length.
fn check_payload(bytes: &[u8], header: &IdxHeader) -> Result<usize> {
    let header_len = 4 + 4 * header.dims.len();
    let mut declared: usize = 1;
    for (axis, &d) in header.dims.iter().enumerate() {
        declared = declared.checked_mul(d).ok_or_else(|| {
            parse_err(
                4 + 4 * axis,
                "IDX extent product overflows the address space",
            )
        })?;
    }
    let present = bytes.len() - header_len;
    if present < declared {
        return Err(parse_err(
            bytes.len(),
            format!("truncated IDX payload: {declared} bytes declared, {present} present"),
        ));
    }
    if present > declared {
        return Err(parse_err(
            header_len + declared,
            format!("trailing bytes after IDX payload: {declared} bytes declared, {present} present"),
        ));
    }
    Ok(header_len)
}

/// Parses an in-memory IDX image set into row-major images.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Vec<Vec<u8>>>> {
    let header = parse_idx_header(bytes, IDX_IMAGES_MAGIC)?;
    let header_len = check_payload(bytes, &header)?;
    let (count, height, width) = (header.dims[0], header.dims[1], header.dims[2]);
    let mut images = Vec::with_capacity(count);
    let mut off = header_len;
    for _ in 0..count {
        let mut rows = Vec::with_capacity(height);
        for _ in 0..height {
            rows.push(bytes[off..off + width].to_vec());
            off += width;
        }
        images.push(rows);
    }
    Ok(images)
}

/// Parses an in-memory IDX label set.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let header = parse_idx_header(bytes, IDX_LABELS_MAGIC)?;
    let header_len = check_payload(bytes, &header)?;
    Ok(bytes[header_len..].to_vec())
}

/// Reads an IDX image file (magic 2051) into row-major images.
pub fn read_idx_images(path: &Path) -> Result<Vec<Vec<Vec<u8>>>> {
    parse_idx_images(&fs::read(path)?)
}

/// Reads an IDX label file (magic 2049).
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&fs::read(path)?)
}

/// Header line of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str = "k,sample_size,replicate,error_median,error_barycenter";

/// 12 significant digits. NaN (flagged rows) and the sign of zero survive
/// a round-trip through `parse::<f64>()`.
fn fmt_error(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes sweep rows as CSV in canonical (k, sample_size, replicate) order.
pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut rows: Vec<&SweepRow> = result.rows.iter().collect();
    rows.sort_by_key(|r| (r.k, r.sample_size, r.replicate));
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            r.sample_size,
            r.replicate,
            fmt_error(r.error_median),
            fmt_error(r.error_barycenter)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parses a sweep CSV produced by [`write_sweep_csv`]. Rows with NaN errors
/// come back flagged.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut offset = 0;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty CSV: missing header"))?;
    if header != SWEEP_CSV_HEADER {
        return Err(parse_err(
            0,
            format!("bad CSV header {header:?}: expected {SWEEP_CSV_HEADER:?}"),
        ));
    }
    offset += header.len() + 1;
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            offset += 1;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                offset,
                format!("expected 5 CSV fields, found {}", fields.len()),
            ));
        }
        let int = |i: usize| -> Result<usize> {
            fields[i]
                .parse::<usize>()
                .map_err(|e| parse_err(offset, format!("bad integer field {:?}: {e}", fields[i])))
        };
        let real = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| parse_err(offset, format!("bad real field {:?}: {e}", fields[i])))
        };
        let (error_median, error_barycenter) = (real(3)?, real(4)?);
        rows.push(SweepRow {
            k: int(0)?,
            sample_size: int(1)?,
            replicate: int(2)?,
            error_median,
            error_barycenter,
            flagged: error_median.is_nan() || error_barycenter.is_nan(),
        });
        offset += line.len() + 1;
    }
    Ok(rows)
}

/// Reads a sweep CSV file.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    parse_sweep_csv(&fs::read_to_string(path)?)
}

/// Loads and validates a contamination sweep configuration from JSON.
pub fn load_contamination_config(path: &Path) -> Result<ContaminationConfig> {
    let cfg: ContaminationConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
    cfg.validate()?;
    Ok(cfg)
}

/// A named polyline for [`emit_line_plot_svg`].
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Writes an SVG 1.1 line chart: axes with ticks, a legend, and one
/// polyline per series. Series must be non-empty, of equal length, and
/// finite.
pub fn emit_line_plot_svg(series: &[PlotSeries], path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::invalid("plot: no series"));
    }
    let len = series[0].points.len();
    if len == 0 {
        return Err(Error::invalid("plot: empty series"));
    }
    for s in series {
        if s.points.len() != len {
            return Err(Error::invalid(format!(
                "plot: series {:?} has {} points, expected {len}",
                s.name,
                s.points.len()
            )));
        }
        if let Some((x, y)) = s
            .points
            .iter()
            .find(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::invalid(format!(
                "plot: series {:?} contains a non-finite point ({x}, {y})",
                s.name
            )));
        }
    }

    let (width, height) = (640.0, 400.0);
    let (ml, mr, mt, mb) = (64.0, 16.0, 16.0, 44.0);
    let (pw, ph) = (width - ml - mr, height - mt - mb);

    let all = series.iter().flat_map(|s| s.points.iter());
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for &(x, y) in all {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    // Degenerate ranges get a symmetric pad so the scale stays finite.
    if xmax - xmin <= 0.0 {
        let pad = xmin.abs().max(1.0) * 0.05;
        xmin -= pad;
        xmax += pad;
    }
    if ymax - ymin <= 0.0 {
        let pad = ymin.abs().max(1.0) * 0.05;
        ymin -= pad;
        ymax += pad;
    }
    let sx = |x: f64| ml + (x - xmin) / (xmax - xmin) * pw;
    let sy = |y: f64| mt + ph - (y - ymin) / (ymax - ymin) * ph;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph,
        ml + pw,
        mt + ph
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph
    );
    // Ticks and labels.
    let ticks = 5;
    for i in 0..=ticks {
        let t = i as f64 / ticks as f64;
        let xv = xmin + t * (xmax - xmin);
        let yv = ymin + t * (ymax - ymin);
        let xp = sx(xv);
        let yp = sy(yv);
        let _ = writeln!(
            svg,
            "<line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>",
            mt + ph,
            mt + ph + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{xp}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            mt + ph + 18.0,
            xml_escape(&fmt_tick(xv))
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{ml}\" y2=\"{yp}\" stroke=\"black\"/>",
            ml - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            ml - 8.0,
            yp + 4.0,
            xml_escape(&fmt_tick(yv))
        );
    }
    // Data.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
    }
    // Legend, top-left inside the plot area.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = mt + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            ml + 10.0,
            ml + 34.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            ml + 40.0,
            y + 4.0,
            xml_escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

/// Writes a grid of grayscale images (heavier mass = darker) with one
/// caption per image. All measures must be rank-2 and share a shape.
pub fn emit_image_grid_svg(
    entries: &[(String, GridMeasure)],
    columns: usize,
    path: &Path,
) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::invalid("image grid: no images"));
    }
    if columns == 0 {
        return Err(Error::invalid("image grid: need at least one column"));
    }
    let shape = entries[0].1.shape().to_vec();
    if shape.len() != 2 {
        return Err(Error::invalid("image grid: measures must be rank-2"));
    }
    for (name, m) in entries {
        if m.shape() != shape {
            return Err(Error::invalid(format!(
                "image grid: {name:?} has shape {:?}, expected {:?}",
                m.shape(),
                shape
            )));
        }
    }
    let (h, w) = (shape[0], shape[1]);
    let scale = 4.0;
    let caption = 16.0;
    let pad = 8.0;
    let cell_w = w as f64 * scale + pad;
    let cell_h = h as f64 * scale + caption + pad;
    let rows = entries.len().div_ceil(columns);
    let width = pad + columns as f64 * cell_w;
    let height = pad + rows as f64 * cell_h;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    for (idx, (name, m)) in entries.iter().enumerate() {
        let cx = pad + (idx % columns) as f64 * cell_w;
        let cy = pad + (idx / columns) as f64 * cell_h;
        let peak = m.mass().iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            for (cell, &mass) in m.mass().iter().enumerate() {
                if mass <= 0.0 {
                    continue;
                }
                let g = (255.0 * (1.0 - mass / peak)).round() as u8;
                let x = cx + (cell % w) as f64 * scale;
                let y = cy + (cell / w) as f64 * scale;
                let _ = writeln!(
                    svg,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{scale}\" height=\"{scale}\" fill=\"rgb({g},{g},{g})\"/>"
                );
            }
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            cx + w as f64 * scale / 2.0,
            cy + h as f64 * scale + 12.0,
            xml_escape(name)
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Family;
    use tempfile::tempdir;

    fn idx_image_bytes(dims: (u32, u32, u32), payload: &[u8]) -> Vec<u8> {
        let mut bytes = vec![0, 0, 0x08, 3];
        for d in [dims.0, dims.1, dims.2] {
            bytes.extend_from_slice(&d.to_be_bytes());
        }
        bytes.extend_from_slice(payload);
        bytes
    }

    #[test]
    fn parses_the_reference_image_fixture() {
        let bytes = idx_image_bytes((1, 2, 2), &[0, 128, 255, 64]);
        let images = parse_idx_images(&bytes).unwrap();
        assert_eq!(images, vec![vec![vec![0, 128], vec![255, 64]]]);
    }

    #[test]
    fn wrong_magic_errors_at_offset_zero() {
        let mut bytes = idx_image_bytes((1, 1, 1), &[7]);
        bytes[0..4].copy_from_slice(&9999u32.to_be_bytes());
        match parse_idx_images(&bytes) {
            Err(Error::Parse { offset: 0, message }) => {
                assert!(message.contains("9999"), "message: {message}")
            }
            other => panic!("expected parse error at offset 0, got {other:?}"),
        }
    }

    #[test]
    fn wrong_element_type_is_rejected() {
        let mut bytes = idx_image_bytes((1, 1, 1), &[7]);
        bytes[2] = 0x0d;
        match parse_idx_images(&bytes) {
            Err(Error::Parse { offset: 0, message }) => {
                assert!(message.contains("0x0d"), "message: {message}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_header_errors_at_end_of_input() {
        let bytes = idx_image_bytes((1, 2, 2), &[0, 128, 255, 64]);
        match parse_idx_images(&bytes[..8]) {
            Err(Error::Parse { offset: 8, .. }) => {}
            other => panic!("expected parse error at offset 8, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_and_trailing_bytes_are_both_rejected() {
        let bytes = idx_image_bytes((1, 2, 2), &[0, 128, 255]);
        match parse_idx_images(&bytes) {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, bytes.len());
                assert!(message.contains("truncated"), "message: {message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let bytes = idx_image_bytes((1, 2, 2), &[0, 128, 255, 64, 9]);
        match parse_idx_images(&bytes) {
            Err(Error::Parse { offset: 20, message }) => {
                assert!(message.contains("trailing"), "message: {message}");
            }
            other => panic!("expected parse error at offset 20, got {other:?}"),
        }
    }

    #[test]
    fn extent_overflow_is_a_parse_error() {
        let bytes = idx_image_bytes((u32::MAX, u32::MAX, u32::MAX), &[]);
        match parse_idx_images(&bytes) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("overflows"), "message: {message}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn labels_round_trip() {
        let mut bytes = vec![0, 0, 0x08, 1];
        bytes.extend_from_slice(&3u32.to_be_bytes());
        bytes.extend_from_slice(&[5, 0, 9]);
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![5, 0, 9]);
    }

    fn sample_rows() -> Vec<SweepRow> {
        vec![
            SweepRow {
                k: 5,
                sample_size: 10,
                replicate: 0,
                error_median: 0.125,
                error_barycenter: 2.0 / 3.0,
                flagged: false,
            },
            SweepRow {
                k: 1,
                sample_size: 10,
                replicate: 1,
                error_median: f64::NAN,
                error_barycenter: f64::NAN,
                flagged: true,
            },
            SweepRow {
                k: 1,
                sample_size: 10,
                replicate: 0,
                error_median: 1.0 / 3.0,
                error_barycenter: 0.5,
                flagged: false,
            },
        ]
    }

    #[test]
    fn csv_round_trip_is_lossless_at_emitted_precision() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let result = SweepResult {
            family: Family::UnivariateGamma,
            rows: sample_rows(),
        };
        write_sweep_csv(&result, &path).unwrap();
        let rows = read_sweep_csv(&path).unwrap();
        // Canonical order: sorted by (k, sample_size, replicate).
        assert_eq!(
            rows.iter().map(|r| (r.k, r.replicate)).collect::<Vec<_>>(),
            vec![(1, 0), (1, 1), (5, 0)]
        );
        assert!(rows[1].flagged && rows[1].error_median.is_nan());
        let again = SweepResult {
            family: Family::UnivariateGamma,
            rows: rows.clone(),
        };
        let path2 = dir.path().join("sweep2.csv");
        write_sweep_csv(&again, &path2).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            fs::read_to_string(&path2).unwrap()
        );
        let twice = read_sweep_csv(&path2).unwrap();
        for (a, b) in rows.iter().zip(&twice) {
            assert_eq!(a.error_median.to_bits(), b.error_median.to_bits());
            assert_eq!(a.error_barycenter.to_bits(), b.error_barycenter.to_bits());
        }
    }

    #[test]
    fn empty_result_writes_a_header_only_file() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let result = SweepResult {
            family: Family::Gaussian,
            rows: vec![],
        };
        write_sweep_csv(&result, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{SWEEP_CSV_HEADER}\n"));
        assert!(read_sweep_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn single_row_gives_exactly_two_lines() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let result = SweepResult {
            family: Family::Gaussian,
            rows: vec![SweepRow {
                k: 1,
                sample_size: 10,
                replicate: 0,
                error_median: 0.5,
                error_barycenter: 0.7,
                flagged: false,
            }],
        };
        write_sweep_csv(&result, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn csv_header_mismatch_is_a_parse_error() {
        assert!(matches!(
            parse_sweep_csv("a,b,c\n1,2,3"),
            Err(Error::Parse { offset: 0, .. })
        ));
        let bad = format!("{SWEEP_CSV_HEADER}\n1,2\n");
        match parse_sweep_csv(&bad) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, SWEEP_CSV_HEADER.len() + 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    /// Minimal well-formedness check for the narrow XML this module emits:
    /// matched tags, quoted attributes, no stray `<` or `&`.
    fn assert_well_formed_xml(text: &str) {
        let text = text
            .strip_prefix("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n")
            .expect("xml declaration");
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('<') {
            let before = &rest[..open];
            assert!(
                !before.contains('&') || before.contains("&amp;")
                    || before.contains("&lt;")
                    || before.contains("&gt;")
                    || before.contains("&quot;")
                    || before.contains("&apos;"),
                "unescaped ampersand in text node"
            );
            let close = rest[open..].find('>').expect("unterminated tag") + open;
            let tag = &rest[open + 1..close];
            if let Some(name) = tag.strip_prefix('/') {
                let top = stack.pop().expect("closing tag with empty stack");
                assert_eq!(top, name, "mismatched closing tag");
            } else if !tag.ends_with('/') {
                let name: String = tag.chars().take_while(|c| !c.is_whitespace()).collect();
                stack.push(name);
            }
            rest = &rest[close + 1..];
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn single_series_plot_contains_one_polyline() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        let series = vec![PlotSeries {
            name: "median".to_string(),
            points: vec![(1.0, 0.5), (5.0, 0.6)],
        }];
        emit_line_plot_svg(&series, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 1);
        assert_well_formed_xml(&text);
    }

    #[test]
    fn two_series_plot_has_two_polylines_and_a_legend() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("plot2.svg");
        let series = vec![
            PlotSeries {
                name: "median <w>".to_string(),
                points: vec![(1.0, 0.5), (5.0, 0.6), (10.0, 0.7)],
            },
            PlotSeries {
                name: "barycenter & mean".to_string(),
                points: vec![(1.0, 0.6), (5.0, 0.9), (10.0, 1.4)],
            },
        ];
        emit_line_plot_svg(&series, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
        assert!(text.contains("median &lt;w&gt;"));
        assert!(text.contains("barycenter &amp; mean"));
        assert_well_formed_xml(&text);
    }

    #[test]
    fn non_finite_plot_data_is_invalid_input() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.svg");
        let series = vec![PlotSeries {
            name: "x".to_string(),
            points: vec![(0.0, f64::NAN)],
        }];
        assert!(matches!(
            emit_line_plot_svg(&series, &path),
            Err(Error::InvalidInput(_))
        ));
        let series = vec![PlotSeries {
            name: "x".to_string(),
            points: vec![(f64::INFINITY, 1.0)],
        }];
        assert!(matches!(
            emit_line_plot_svg(&series, &path),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn image_grid_renders_every_entry() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.svg");
        let a = GridMeasure::normalize_image(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = GridMeasure::normalize_image(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let entries = vec![("left".to_string(), a), ("right".to_string(), b)];
        emit_image_grid_svg(&entries, 2, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.matches("<rect").count() >= 5);
        assert!(text.contains(">left<") && text.contains(">right<"));
        assert_well_formed_xml(&text);
    }

    #[test]
    fn config_loader_applies_defaults_and_validates() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(
            &path,
            r#"{"family":"histogram_beta","contamination_counts":[1,5],"sample_sizes":[100]}"#,
        )
        .unwrap();
        let cfg = load_contamination_config(&path).unwrap();
        assert_eq!(cfg.family, Family::HistogramBeta);
        assert_eq!(cfg.total, 100);
        assert_eq!(cfg.replicates, 50);
        assert_eq!(cfg.seed, 0);

        fs::write(&path, r#"{"family":"nope"}"#).unwrap();
        assert!(matches!(
            load_contamination_config(&path),
            Err(Error::Json(_))
        ));

        fs::write(
            &path,
            r#"{"family":"gaussian","contamination_counts":[100],"sample_sizes":[100]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_contamination_config(&path),
            Err(Error::InvalidInput(_))
        ));
    }
}
