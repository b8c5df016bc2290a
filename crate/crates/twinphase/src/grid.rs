//! Sampling geometry shared by every field and frame.
//!
//! Lengths are micrometres throughout the crate; spatial frequencies are in
//! cycles/um. Pixel `(ix, iy)` is centred at `((ix + 1/2) - nx/2) * pitch`
//! so the grid is symmetric about the optical axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform rectangular sampling grid plus the illumination wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Pixels along x (array axis 1).
    pub nx: usize,
    /// Pixels along y (array axis 0).
    pub ny: usize,
    /// Transverse sample spacing in um.
    pub pitch_um: f64,
    /// Vacuum wavelength in um.
    pub wavelength_um: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, pitch_um: f64, wavelength_um: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("grid must have nonzero size".into()));
        }
        if !(pitch_um > 0.0) || !(wavelength_um > 0.0) {
            return Err(Error::InvalidParameter(
                "pitch and wavelength must be positive".into(),
            ));
        }
        Ok(Grid { nx, ny, pitch_um, wavelength_um })
    }

    /// Wavenumber 2*pi/lambda in rad/um.
    pub fn k(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_um
    }

    /// Nyquist frequency 1/(2*pitch) in cycles/um.
    pub fn q_max(&self) -> f64 {
        1.0 / (2.0 * self.pitch_um)
    }

    /// Physical extent (nx*pitch, ny*pitch) in um.
    pub fn extent_um(&self) -> (f64, f64) {
        (self.nx as f64 * self.pitch_um, self.ny as f64 * self.pitch_um)
    }

    /// Centre of pixel `(ix, iy)` in um relative to the grid centre.
    pub fn pixel_centre_um(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            (ix as f64 + 0.5 - self.nx as f64 / 2.0) * self.pitch_um,
            (iy as f64 + 0.5 - self.ny as f64 / 2.0) * self.pitch_um,
        )
    }

    /// FFT-ordered frequency axis for `n` samples at this pitch, cycles/um.
    pub fn freq_axis(&self, n: usize) -> Vec<f64> {
        let d = 1.0 / (n as f64 * self.pitch_um);
        (0..n)
            .map(|i| {
                if i <= (n - 1) / 2 {
                    i as f64 * d
                } else {
                    (i as f64 - n as f64) * d
                }
            })
            .collect()
    }

    /// Largest |dz| for which the quadratic propagation kernel is sampled
    /// without phase aliasing on a grid padded by `pad` in each axis:
    /// lambda*|dz|*q_max <= n_min*pad*pitch/2.
    pub fn max_defocus_um(&self, pad: usize) -> f64 {
        let n_min = self.nx.min(self.ny) as f64;
        n_min * pad as f64 * self.pitch_um * self.pitch_um / self.wavelength_um
    }

    /// Error if the two grids differ, for ops combining maps.
    pub fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} @ {} um vs {}x{} @ {} um",
                self.nx, self.ny, self.pitch_um, other.nx, other.ny, other.pitch_um
            )))
        }
    }
}
