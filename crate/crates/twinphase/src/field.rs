//! Field, phase and intensity containers.
//!
//! Arrays are indexed `[[iy, ix]]` (row = y, column = x). Intensities are
//! detected counts in photons/pixel and may go negative once electronic
//! read noise has been added; they are kept as `f64` throughout.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Scalar complex optical field sampled on a [`Grid`].
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub grid: Grid,
    pub data: Array2<Complex64>,
}

/// Real phase map in radians on a [`Grid`].
#[derive(Debug, Clone)]
pub struct PhaseMap {
    pub grid: Grid,
    pub data: Array2<f64>,
}

/// Detected (or expected) photon counts per pixel on a [`Grid`].
#[derive(Debug, Clone)]
pub struct IntensityFrame {
    pub grid: Grid,
    pub counts: Array2<f64>,
}

fn check_shape(grid: &Grid, rows: usize, cols: usize, what: &str) -> Result<()> {
    if rows == grid.ny && cols == grid.nx {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{what}: array {rows}x{cols} vs grid {}x{}",
            grid.ny, grid.nx
        )))
    }
}

impl ComplexField {
    pub fn new(grid: Grid, data: Array2<Complex64>) -> Result<Self> {
        check_shape(&grid, data.nrows(), data.ncols(), "ComplexField")?;
        Ok(ComplexField { grid, data })
    }

    /// Field with unit amplitude everywhere.
    pub fn uniform(grid: Grid) -> Self {
        ComplexField { grid, data: Array2::from_elem((grid.ny, grid.nx), Complex64::new(1.0, 0.0)) }
    }

    /// Field whose squared modulus equals `intensity` (zero phase).
    pub fn from_intensity(intensity: &IntensityFrame) -> Result<Self> {
        if intensity.counts.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(
                "cannot take a field amplitude from negative intensity".into(),
            ));
        }
        Ok(ComplexField {
            grid: intensity.grid,
            data: intensity.counts.mapv(|v| Complex64::new(v.sqrt(), 0.0)),
        })
    }

    /// Total power, sum of |E|^2 over the grid.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// |E|^2 per pixel as an intensity map.
    pub fn intensity(&self) -> IntensityFrame {
        IntensityFrame { grid: self.grid, counts: self.data.mapv(|c| c.norm_sqr()) }
    }
}

impl PhaseMap {
    pub fn new(grid: Grid, data: Array2<f64>) -> Result<Self> {
        check_shape(&grid, data.nrows(), data.ncols(), "PhaseMap")?;
        Ok(PhaseMap { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        PhaseMap { grid, data: Array2::zeros((grid.ny, grid.nx)) }
    }

    pub fn mean(&self) -> f64 {
        self.data.mean().unwrap_or(0.0)
    }

    /// Subtract the spatial mean in place (gauge fix for reconstructions).
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.data.mapv_inplace(|v| v - m);
    }
}

impl IntensityFrame {
    pub fn new(grid: Grid, counts: Array2<f64>) -> Result<Self> {
        check_shape(&grid, counts.nrows(), counts.ncols(), "IntensityFrame")?;
        Ok(IntensityFrame { grid, counts })
    }

    pub fn zeros(grid: Grid) -> Self {
        IntensityFrame { grid, counts: Array2::zeros((grid.ny, grid.nx)) }
    }

    pub fn uniform(grid: Grid, level: f64) -> Self {
        IntensityFrame { grid, counts: Array2::from_elem((grid.ny, grid.nx), level) }
    }

    pub fn mean(&self) -> f64 {
        self.counts.mean().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }

    /// Point reflection about the grid centre, `(ix, iy) -> (nx-1-ix, ny-1-iy)`.
    ///
    /// Applying it twice is the identity. This is the array form of the
    /// `x -> -x` coordinate flip between the two beams of a correlated pair:
    /// after reflecting one of them, correlated pixels share indices.
    pub fn point_reflected(&self) -> IntensityFrame {
        let mut counts = self.counts.clone();
        counts.invert_axis(ndarray::Axis(0));
        counts.invert_axis(ndarray::Axis(1));
        IntensityFrame { grid: self.grid, counts }
    }
}
