//! Phase retrieval from the axial intensity derivative.
//!
//! Under uniform illumination `I0` a thin phase object obeys
//! `-k * dI/dz = I0 * lap(phi)`, so the phase follows from one Fourier
//! division: `phi_hat(q) = k * didz_hat(q) / (4*pi^2 * I0 * (|q|^2 + eps*q_ref^2))`
//! with the `q = 0` bin zeroed (the mean of the phase is not observable;
//! reconstructions are returned with zero spatial mean).
//!
//! The map is mirror-extended (even-symmetric in both axes) before the
//! transform and cropped afterwards. The extension removes the artificial
//! jump a periodic transform would see at the frame edges; on the extended
//! grid the even symmetry is preserved by the isotropic `1/|q|^2` kernel,
//! so pixel-centre cosine modes of the original frame are still solved
//! exactly.
//!
//! The same division explains the reconstruction noise floor: white
//! intensity noise entering through `didz` is amplified by `1/|q|^2`, so
//! phase noise piles up at low spatial frequencies with a `|q|^-4` power
//! spectrum.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{IntensityFrame, PhaseMap};
use crate::grid::Grid;

/// Solver parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TieOptions {
    /// Defocus distance used to form the derivative, um. Not used by the
    /// Fourier division itself but required by the noise model.
    pub dz_um: f64,
    /// Wavenumber 2*pi/lambda, rad/um.
    pub k_wave: f64,
    /// Tikhonov strength; the kernel denominator is |q|^2 + eps*q_ref^2
    /// with q_ref = 1/(nx*pitch). 0 disables regularisation.
    pub regularization_eps: f64,
    /// Uniform-illumination level I0, photons/pixel.
    pub illum_mean: f64,
}

impl TieOptions {
    /// Options for a grid, taking the wavenumber from its wavelength.
    pub fn for_grid(grid: &Grid, dz_um: f64, illum_mean: f64) -> Self {
        TieOptions { dz_um, k_wave: grid.k(), regularization_eps: 0.0, illum_mean }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dz_um > 0.0) {
            return Err(Error::InvalidParameter("dz_um must be positive".into()));
        }
        if !(self.k_wave > 0.0) {
            return Err(Error::InvalidParameter("k_wave must be positive".into()));
        }
        if !(self.regularization_eps >= 0.0) {
            return Err(Error::InvalidParameter("regularization_eps must be >= 0".into()));
        }
        if !(self.illum_mean > 0.0) {
            return Err(Error::InvalidParameter("illum_mean must be positive".into()));
        }
        Ok(())
    }
}

/// Symmetric finite-difference axial derivative `(I_plus - I_minus)/(2*dz)`,
/// in counts/(pixel*um).
pub fn axial_derivative(
    i_plus: &IntensityFrame,
    i_minus: &IntensityFrame,
    dz_um: f64,
) -> Result<IntensityFrame> {
    i_plus.grid.ensure_same(&i_minus.grid, "axial_derivative")?;
    if !(dz_um > 0.0) {
        return Err(Error::InvalidParameter("dz_um must be positive".into()));
    }
    let counts = (&i_plus.counts - &i_minus.counts) / (2.0 * dz_um);
    IntensityFrame::new(i_plus.grid, counts)
}

/// Even-symmetric extension to twice the size in both axes, continuous at
/// every seam.
fn mirror_extend(a: &Array2<f64>) -> Array2<Complex64> {
    let (ny, nx) = a.dim();
    Array2::from_shape_fn((2 * ny, 2 * nx), |(iy, ix)| {
        let ry = if iy < ny { iy } else { 2 * ny - 1 - iy };
        let rx = if ix < nx { ix } else { 2 * nx - 1 - ix };
        Complex64::new(a[[ry, rx]], 0.0)
    })
}

/// Recover a zero-mean phase map from an axial derivative map.
pub fn solve_tie(didz: &IntensityFrame, opts: &TieOptions) -> Result<PhaseMap> {
    opts.validate()?;
    let g = didz.grid;
    let (ny, nx) = (g.ny, g.nx);

    let mut ext = mirror_extend(&didz.counts);
    let fft = Fft2::new(2 * ny, 2 * nx);
    fft.forward(&mut ext);

    let qx = g.freq_axis(2 * nx);
    let qy = g.freq_axis(2 * ny);
    let q_ref = 1.0 / (nx as f64 * g.pitch_um);
    let reg = opts.regularization_eps * q_ref * q_ref;
    let gain = opts.k_wave / (4.0 * std::f64::consts::PI.powi(2) * opts.illum_mean);

    for (iy, row) in ext.rows_mut().into_iter().enumerate() {
        let qy2 = qy[iy] * qy[iy];
        for (ix, v) in row.into_iter().enumerate() {
            let q2 = qx[ix] * qx[ix] + qy2;
            let denom = q2 + reg;
            if denom == 0.0 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= gain / denom;
            }
        }
    }

    fft.inverse(&mut ext);
    let mut phase = Array2::from_shape_fn((ny, nx), |(iy, ix)| ext[[iy, ix]].re);
    let mean = phase.mean().unwrap();
    phase.mapv_inplace(|v| v - mean);
    PhaseMap::new(g, phase)
}

/// Predicted phase-noise amplitude spectrum of a two-plane reconstruction
/// whose intensity frames carry flat (white) noise of std `sigma_flat`
/// counts/pixel: `k * sigma_flat / (4*pi^2 * sqrt(2) * I0 * dz * |q|^2)`,
/// on the frame's FFT-ordered frequency layout with the `q = 0` bin set to
/// zero. The sqrt(2) is the quadrature combination of the two planes.
pub fn noise_artifact_spectrum(
    sigma_flat: f64,
    grid: &Grid,
    opts: &TieOptions,
) -> Result<Array2<f64>> {
    opts.validate()?;
    if !(sigma_flat >= 0.0) {
        return Err(Error::InvalidParameter("sigma_flat must be >= 0".into()));
    }
    let qx = grid.freq_axis(grid.nx);
    let qy = grid.freq_axis(grid.ny);
    let gain = opts.k_wave * sigma_flat
        / (4.0 * std::f64::consts::PI.powi(2)
            * std::f64::consts::SQRT_2
            * opts.illum_mean
            * opts.dz_um);
    Ok(Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
        let q2 = qx[ix] * qx[ix] + qy[iy] * qy[iy];
        if q2 == 0.0 {
            0.0
        } else {
            gain / q2
        }
    }))
}
