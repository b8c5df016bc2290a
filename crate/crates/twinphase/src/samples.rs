//! Test-object generators: binary phase masks with matched readout regions.
//!
//! Each generator returns the phase map together with a pair of rectangular
//! regions for step readout: `roi_in` sits entirely on the etched feature,
//! `roi_out` entirely on the background. For the glyph sample the two are
//! exact point reflections of each other through the frame centre, so any
//! radially symmetric illumination envelope weighs them identically and the
//! envelope bias cancels from the difference `mean(in) - mean(out)`.

use std::path::PathBuf;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PhaseMap;
use crate::grid::Grid;
use crate::metrics::Roi;

/// Default etch depth of the binary phase samples, radians.
pub const DEFAULT_STEP_RAD: f64 = 0.230;

fn default_step() -> f64 {
    DEFAULT_STEP_RAD
}

fn default_period() -> usize {
    16
}

/// Which phase object to place in the beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSpec {
    /// Blocky "pi" glyph spanning ~40% of the frame, etched to `step_rad`.
    PiGlyph {
        #[serde(default = "default_step")]
        step_rad: f64,
    },
    /// Lattice of etched squares (side = period/2) on a flat background.
    Squares {
        #[serde(default = "default_step")]
        step_rad: f64,
        #[serde(default = "default_period")]
        period_px: usize,
    },
    /// No phase object; useful for pure noise characterisation.
    Flat,
    /// Phase map loaded from a CSV or PGM file.
    Custom { path: PathBuf },
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec::PiGlyph { step_rad: DEFAULT_STEP_RAD }
    }
}

/// A rendered sample: the ground-truth phase and its readout regions.
#[derive(Debug, Clone)]
pub struct SampleRealization {
    pub phase: PhaseMap,
    pub roi_in: Roi,
    pub roi_out: Roi,
    /// Nominal feature height in radians (max - min for custom maps).
    pub step_rad: f64,
}

fn check_step(step_rad: f64) -> Result<()> {
    if !step_rad.is_finite() {
        return Err(Error::InvalidParameter(format!("step_rad = {step_rad}")));
    }
    Ok(())
}

/// Point reflection of a pixel rectangle through the frame centre. Pixel
/// centres map exactly onto pixel centres, so the reflected region sees the
/// same radial envelope weights as the original.
fn reflect_roi(roi: &Roi, grid: &Grid) -> Roi {
    Roi::new(
        grid.nx - roi.x0 - roi.width,
        grid.ny - roi.y0 - roi.height,
        roi.width,
        roi.height,
    )
}

fn render_pi_glyph(grid: Grid, step_rad: f64) -> Result<SampleRealization> {
    check_step(step_rad)?;
    let n_min = grid.nx.min(grid.ny);
    let b = (0.4 * n_min as f64).round();
    if b < 20.0 {
        return Err(Error::InvalidParameter(format!(
            "grid {}x{} too small for the glyph sample (needs >= 50 px per side)",
            grid.nx, grid.ny
        )));
    }
    let ox = (grid.nx as f64 - b) / 2.0;
    let oy = (grid.ny as f64 - b) / 2.0;
    // Glyph geometry in box-normalised coordinates (u, v) in [0, 1]^2:
    // a top bar and two legs, with a clear central gap between the legs.
    let inside = |u: f64, v: f64| -> bool {
        let bar = (0.03..=0.30).contains(&v) && (0.02..=0.98).contains(&u);
        let legs = (0.03..=0.97).contains(&v)
            && ((0.10..=0.34).contains(&u) || (0.66..=0.90).contains(&u));
        bar || legs
    };
    let data = Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
        let u = (ix as f64 + 0.5 - ox) / b;
        let v = (iy as f64 + 0.5 - oy) / b;
        if inside(u, v) {
            step_rad
        } else {
            0.0
        }
    });
    // Readout region centred in the bar; its point reflection lands in the
    // background gap between the legs.
    let w = ((0.20 * b).round() as usize).max(3);
    let h = ((0.12 * b).round() as usize).max(3);
    let cx = grid.nx as f64 / 2.0;
    let cy = oy + 0.165 * b;
    let roi_in = Roi::new(
        (cx - w as f64 / 2.0).round() as usize,
        (cy - h as f64 / 2.0).round() as usize,
        w,
        h,
    );
    let roi_out = reflect_roi(&roi_in, &grid);
    roi_in.check_fits(&grid)?;
    roi_out.check_fits(&grid)?;
    Ok(SampleRealization {
        phase: PhaseMap::new(grid, data)?,
        roi_in,
        roi_out,
        step_rad,
    })
}

fn render_squares(grid: Grid, step_rad: f64, period_px: usize) -> Result<SampleRealization> {
    check_step(step_rad)?;
    if period_px < 6 || period_px > grid.nx.min(grid.ny) / 2 {
        return Err(Error::InvalidParameter(format!(
            "square lattice period {period_px} px out of range for {}x{} frame",
            grid.nx, grid.ny
        )));
    }
    let s = period_px / 2;
    let data = Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
        if ix % period_px < s && iy % period_px < s {
            step_rad
        } else {
            0.0
        }
    });
    // Square nearest the frame centre, inset one pixel; background region of
    // the same size one half-period to the right (always inter-square gap).
    let ax = period_px * (grid.nx / 2 / period_px);
    let ay = period_px * (grid.ny / 2 / period_px);
    let roi_in = Roi::new(ax + 1, ay + 1, s - 2, s - 2);
    let roi_out = Roi::new(ax + s + 1, ay + 1, s - 2, s - 2);
    roi_in.check_fits(&grid)?;
    roi_out.check_fits(&grid)?;
    Ok(SampleRealization {
        phase: PhaseMap::new(grid, data)?,
        roi_in,
        roi_out,
        step_rad,
    })
}

fn render_flat(grid: Grid) -> Result<SampleRealization> {
    let side = (grid.nx.min(grid.ny) / 8).max(2);
    let roi_in = Roi::new(grid.nx / 2 - side / 2, grid.ny / 4, side, side);
    let roi_out = reflect_roi(&roi_in, &grid);
    Ok(SampleRealization {
        phase: PhaseMap::zeros(grid),
        roi_in,
        roi_out,
        step_rad: 0.0,
    })
}

fn render_custom(grid: Grid, path: &PathBuf) -> Result<SampleRealization> {
    let phase = crate::io::read_phase_map(path)?;
    phase.grid.ensure_same(&grid, "custom sample")?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in phase.data.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let side = (grid.nx.min(grid.ny) / 8).max(2);
    let roi_in = Roi::new(grid.nx / 2 - side / 2, grid.ny / 4, side, side);
    let roi_out = reflect_roi(&roi_in, &grid);
    Ok(SampleRealization { phase, roi_in, roi_out, step_rad: hi - lo })
}

/// Render a sample specification onto a grid.
pub fn render_sample(spec: &SampleSpec, grid: Grid) -> Result<SampleRealization> {
    match spec {
        SampleSpec::PiGlyph { step_rad } => render_pi_glyph(grid, *step_rad),
        SampleSpec::Squares { step_rad, period_px } => {
            render_squares(grid, *step_rad, *period_px)
        }
        SampleSpec::Flat => render_flat(grid),
        SampleSpec::Custom { path } => render_custom(grid, path),
    }
}
