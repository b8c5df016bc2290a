//! File formats: 16-bit PGM images, CSV tables and twin-frame bundles.
//!
//! Images are portable greymaps (`P5`, maxval 65535, big-endian samples)
//! with an affine value mapping and the physical grid recorded in a header
//! comment, so a written map reads back with at most half a quantisation
//! step of error and full grid metadata. CSV output uses a fixed scientific
//! float format, making repeated runs byte-identical.

use std::io::{Read as _, Write as _};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::{IntensityFrame, PhaseMap};
use crate::grid::Grid;
use crate::twinbeam::{FrameSeed, TwinFrameSet};

const PGM_MAXVAL: u32 = 65535;

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.display().to_string(), reason: reason.into() }
}

/// Deterministic float formatting for CSV output: fixed scientific notation
/// with nine fractional digits, `nan` for undefined values.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.9e}")
    }
}

/// Write a CSV table. Cells must not contain commas or newlines; numeric
/// cells should be formatted with [`fmt_float`] for reproducible bytes.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        debug_assert!(row.iter().all(|c| !c.contains(',') && !c.contains('\n')));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Read a CSV table written by [`write_csv`]: header row plus data rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty csv"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok((header, rows))
}

fn write_pgm(path: &Path, grid: &Grid, data: &Array2<f64>) -> Result<()> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in data.iter() {
        if !v.is_finite() {
            return Err(format_err(path, format!("non-finite value {v} in image data")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let scale = (hi - lo) / PGM_MAXVAL as f64;
    let mut bytes = Vec::with_capacity(64 + 2 * data.len());
    // Shortest round-trip float formatting keeps the header lossless.
    let header = format!(
        "P5\n# twinphase scale={} offset={} pitch_um={} wavelength_um={}\n{} {}\n{}\n",
        scale, lo, grid.pitch_um, grid.wavelength_um, grid.nx, grid.ny, PGM_MAXVAL
    );
    bytes.extend_from_slice(header.as_bytes());
    for &v in data.iter() {
        let q = if scale > 0.0 {
            ((v - lo) / scale).round().clamp(0.0, PGM_MAXVAL as f64) as u16
        } else {
            0
        };
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn read_pgm(path: &Path) -> Result<(Grid, Array2<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut scale = None;
    let mut offset = None;
    let mut pitch = None;
    let mut wavelength = None;

    // Tokenise the header: whitespace-separated words, '#' starts a comment
    // running to end of line. Metadata lives in `key=value` comment words.
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 {
        if pos >= bytes.len() {
            return Err(format_err(path, "truncated header"));
        }
        let b = bytes[pos];
        if b == b'#' {
            let end = bytes[pos..]
                .iter()
                .position(|&c| c == b'\n')
                .map(|i| pos + i)
                .unwrap_or(bytes.len());
            let comment = String::from_utf8_lossy(&bytes[pos + 1..end]);
            for word in comment.split_whitespace() {
                if let Some((key, value)) = word.split_once('=') {
                    let parsed: Option<f64> = value.parse().ok();
                    match key {
                        "scale" => scale = parsed,
                        "offset" => offset = parsed,
                        "pitch_um" => pitch = parsed,
                        "wavelength_um" => wavelength = parsed,
                        _ => {}
                    }
                }
            }
            pos = end + 1;
        } else if b.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
    }
    // Exactly one whitespace byte separates the maxval token from the data.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(format_err(path, "missing separator before pixel data"));
    }
    pos += 1;

    if tokens[0] != "P5" {
        return Err(format_err(path, format!("expected P5 magic, found '{}'", tokens[0])));
    }
    let nx: usize = tokens[1].parse().map_err(|_| format_err(path, "bad width"))?;
    let ny: usize = tokens[2].parse().map_err(|_| format_err(path, "bad height"))?;
    let maxval: u32 = tokens[3].parse().map_err(|_| format_err(path, "bad maxval"))?;
    if maxval != PGM_MAXVAL {
        return Err(format_err(path, format!("expected 16-bit data (maxval {PGM_MAXVAL})")));
    }
    let (scale, offset) = (
        scale.ok_or_else(|| format_err(path, "missing scale= header comment"))?,
        offset.ok_or_else(|| format_err(path, "missing offset= header comment"))?,
    );
    let pitch = pitch.ok_or_else(|| format_err(path, "missing pitch_um= header comment"))?;
    let wavelength =
        wavelength.ok_or_else(|| format_err(path, "missing wavelength_um= header comment"))?;
    let grid = Grid::new(nx, ny, pitch, wavelength)?;

    let need = 2 * nx * ny;
    if bytes.len() - pos < need {
        return Err(format_err(
            path,
            format!("expected {need} data bytes, found {}", bytes.len() - pos),
        ));
    }
    let data = Array2::from_shape_fn((ny, nx), |(iy, ix)| {
        let i = pos + 2 * (iy * nx + ix);
        let q = u16::from_be_bytes([bytes[i], bytes[i + 1]]) as f64;
        offset + q * scale
    });
    Ok((grid, data))
}

pub fn write_phase_pgm(path: &Path, map: &PhaseMap) -> Result<()> {
    write_pgm(path, &map.grid, &map.data)
}

pub fn read_phase_pgm(path: &Path) -> Result<PhaseMap> {
    let (grid, data) = read_pgm(path)?;
    PhaseMap::new(grid, data)
}

pub fn write_frame_pgm(path: &Path, frame: &IntensityFrame) -> Result<()> {
    write_pgm(path, &frame.grid, &frame.counts)
}

pub fn read_frame_pgm(path: &Path) -> Result<IntensityFrame> {
    let (grid, data) = read_pgm(path)?;
    IntensityFrame::new(grid, data)
}

/// Write a phase map as CSV with a metadata comment carrying the grid.
pub fn write_phase_csv(path: &Path, map: &PhaseMap) -> Result<()> {
    let mut text = format!(
        "# twinphase pitch_um={} wavelength_um={}\n",
        map.grid.pitch_um, map.grid.wavelength_um
    );
    for iy in 0..map.grid.ny {
        let row: Vec<String> =
            (0..map.grid.nx).map(|ix| format!("{}", map.data[[iy, ix]])).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn read_phase_csv(path: &Path) -> Result<PhaseMap> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().peekable();
    let head = lines
        .peek()
        .ok_or_else(|| format_err(path, "empty file"))?;
    if !head.starts_with("# twinphase") {
        return Err(format_err(
            path,
            "first line must be '# twinphase pitch_um=<p> wavelength_um=<w>'",
        ));
    }
    let mut pitch = None;
    let mut wavelength = None;
    for word in head.trim_start_matches('#').split_whitespace() {
        if let Some((key, value)) = word.split_once('=') {
            match key {
                "pitch_um" => pitch = value.parse().ok(),
                "wavelength_um" => wavelength = value.parse().ok(),
                _ => {}
            }
        }
    }
    lines.next();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| format_err(path, format!("bad number: {e}")))?);
    }
    let ny = rows.len();
    let nx = rows.first().map(|r| r.len()).unwrap_or(0);
    if ny == 0 || nx == 0 {
        return Err(format_err(path, "no data rows"));
    }
    if rows.iter().any(|r| r.len() != nx) {
        return Err(format_err(path, "ragged rows"));
    }
    let grid = Grid::new(
        nx,
        ny,
        pitch.ok_or_else(|| format_err(path, "missing pitch_um"))?,
        wavelength.ok_or_else(|| format_err(path, "missing wavelength_um"))?,
    )?;
    let data = Array2::from_shape_fn((ny, nx), |(iy, ix)| rows[iy][ix]);
    PhaseMap::new(grid, data)
}

/// Load a phase map from `.pgm` or `.csv`, dispatching on the extension.
pub fn read_phase_map(path: &Path) -> Result<PhaseMap> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => read_phase_pgm(path),
        Some("csv") => read_phase_csv(path),
        other => Err(format_err(
            path,
            format!("unsupported phase-map extension {other:?} (use .pgm or .csv)"),
        )),
    }
}

/// Write a plain numeric matrix as CSV (no metadata), one row per line.
pub fn write_map_csv(path: &Path, data: &Array2<f64>) -> Result<()> {
    let mut text = String::new();
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Write a twin-frame set as a directory bundle: four PGM images plus a
/// JSON manifest with the random-stream identity.
pub fn write_twin_frames(dir: &Path, set: &TwinFrameSet) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_frame_pgm(&dir.join("signal.pgm"), &set.signal)?;
    write_frame_pgm(&dir.join("idler.pgm"), &set.idler)?;
    write_frame_pgm(&dir.join("mean_signal.pgm"), &set.mean_signal)?;
    write_frame_pgm(&dir.join("mean_idler.pgm"), &set.mean_idler)?;
    let manifest = serde_json::json!({
        "seed": set.seed,
        "grid": set.signal.grid,
    });
    let mut file = std::fs::File::create(dir.join("frame.json"))?;
    file.write_all(serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Read a twin-frame bundle written by [`write_twin_frames`].
pub fn read_twin_frames(dir: &Path) -> Result<TwinFrameSet> {
    let manifest_path = dir.join("frame.json");
    let text = std::fs::read_to_string(&manifest_path)?;
    let manifest: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| format_err(&manifest_path, e.to_string()))?;
    let seed: FrameSeed = serde_json::from_value(
        manifest
            .get("seed")
            .cloned()
            .ok_or_else(|| format_err(&manifest_path, "missing seed"))?,
    )
    .map_err(|e| format_err(&manifest_path, e.to_string()))?;
    let signal = read_frame_pgm(&dir.join("signal.pgm"))?;
    let idler = read_frame_pgm(&dir.join("idler.pgm"))?;
    let mean_signal = read_frame_pgm(&dir.join("mean_signal.pgm"))?;
    let mean_idler = read_frame_pgm(&dir.join("mean_idler.pgm"))?;
    signal.grid.ensure_same(&idler.grid, "twin bundle")?;
    signal.grid.ensure_same(&mean_signal.grid, "twin bundle")?;
    signal.grid.ensure_same(&mean_idler.grid, "twin bundle")?;
    Ok(TwinFrameSet { signal, idler, mean_signal, mean_idler, seed })
}
