//! Paraxial free-space propagation and thin phase objects.
//!
//! Propagation is a transfer-function (angular-spectrum) product in the
//! spatial-frequency domain with the quadratic kernel
//! `H(q, dz) = exp(-i*pi*lambda*dz*|q|^2)`, `q` in cycles/um. The kernel has
//! unit modulus, so propagation conserves total power exactly. Fields are
//! embedded centred in a 2x zero-padded grid before the transform and
//! cropped afterwards, which keeps periodic wraparound out of the frame for
//! any defocus below the sampling bound.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{ComplexField, IntensityFrame, PhaseMap};
use crate::grid::Grid;

/// Zero-padding factor used for every propagation.
pub const PAD: usize = 2;

/// Propagate a field by `dz_um` along the axis (negative values propagate
/// backwards). Errors with the maximum safe distance if the kernel phase
/// would alias on the padded grid.
pub fn fresnel_propagate(field: &ComplexField, dz_um: f64) -> Result<ComplexField> {
    let g = &field.grid;
    let max_dz = g.max_defocus_um(PAD);
    if !dz_um.is_finite() {
        return Err(Error::InvalidParameter("defocus must be finite".into()));
    }
    if dz_um.abs() > max_dz {
        return Err(Error::AliasingBound { dz_um, max_dz_um: max_dz });
    }

    let (ny, nx) = (g.ny, g.nx);
    let (py, px) = (PAD * ny, PAD * nx);
    let (oy, ox) = ((py - ny) / 2, (px - nx) / 2);

    let mut padded = Array2::<Complex64>::zeros((py, px));
    padded.slice_mut(s![oy..oy + ny, ox..ox + nx]).assign(&field.data);

    let fft = Fft2::new(py, px);
    fft.forward(&mut padded);

    let qx = g.freq_axis(px);
    let qy = g.freq_axis(py);
    let coef = -std::f64::consts::PI * g.wavelength_um * dz_um;
    for (iy, row) in padded.rows_mut().into_iter().enumerate() {
        let qy2 = qy[iy] * qy[iy];
        for (ix, v) in row.into_iter().enumerate() {
            let phase = coef * (qx[ix] * qx[ix] + qy2);
            *v *= Complex64::from_polar(1.0, phase);
        }
    }

    fft.inverse(&mut padded);
    let data = padded.slice(s![oy..oy + ny, ox..ox + nx]).to_owned();
    ComplexField::new(*g, data)
}

/// Multiply a field by the thin-object transmission `exp(i*phase)`.
/// Modulus is untouched pixelwise.
pub fn apply_phase_object(field: &ComplexField, phase: &PhaseMap) -> Result<ComplexField> {
    field.grid.ensure_same(&phase.grid, "apply_phase_object")?;
    let mut data = field.data.clone();
    ndarray::Zip::from(&mut data).and(&phase.data).for_each(|v, &p| {
        *v *= Complex64::from_polar(1.0, p);
    });
    ComplexField::new(field.grid, data)
}

/// Expected intensities of a phase object under the given illumination:
/// the symmetric defocus pair `(I_plus, I_minus)` at `+dz`/`-dz` and the
/// in-focus map `I_focus = |illumination|^2`.
pub fn defocused_intensities(
    illumination: &ComplexField,
    phase: &PhaseMap,
    dz_um: f64,
) -> Result<(IntensityFrame, IntensityFrame, IntensityFrame)> {
    if !(dz_um > 0.0) {
        return Err(Error::InvalidParameter("defocus separation must be positive".into()));
    }
    let object = apply_phase_object(illumination, phase)?;
    let i_plus = fresnel_propagate(&object, dz_um)?.intensity();
    let i_minus = fresnel_propagate(&object, -dz_um)?.intensity();
    Ok((i_plus, i_minus, illumination.intensity()))
}

/// Gaussian illumination with the given intensity FWHM, scaled so the mean
/// intensity over the frame is `n_mean` photons/pixel.
pub fn gaussian_illumination(grid: Grid, n_mean: f64, fwhm_um: f64) -> Result<ComplexField> {
    if !(n_mean > 0.0) || !(fwhm_um > 0.0) {
        return Err(Error::InvalidParameter("n_mean and fwhm must be positive".into()));
    }
    let coef = 4.0 * std::f64::consts::LN_2 / (fwhm_um * fwhm_um);
    let mut intensity = Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
        let (x, y) = grid.pixel_centre_um(ix, iy);
        (-coef * (x * x + y * y)).exp()
    });
    let mean = intensity.mean().unwrap();
    intensity.mapv_inplace(|v| v * n_mean / mean);
    ComplexField::from_intensity(&IntensityFrame::new(grid, intensity)?)
}

/// Uniform illumination at `n_mean` photons/pixel.
pub fn uniform_illumination(grid: Grid, n_mean: f64) -> Result<ComplexField> {
    if !(n_mean > 0.0) {
        return Err(Error::InvalidParameter("n_mean must be positive".into()));
    }
    Ok(ComplexField {
        grid,
        data: Array2::from_elem((grid.ny, grid.nx), Complex64::new(n_mean.sqrt(), 0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid128() -> Grid {
        Grid::new(128, 128, 5.0, 0.810).unwrap()
    }

    /// Amplitude-waist Gaussian beam centred on the grid.
    fn gaussian_beam(grid: Grid, w0_um: f64) -> ComplexField {
        let data = Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
            let (x, y) = grid.pixel_centre_um(ix, iy);
            Complex64::new((-(x * x + y * y) / (w0_um * w0_um)).exp(), 0.0)
        });
        ComplexField::new(grid, data).unwrap()
    }

    /// Beam radius from the intensity second moment: w = 2*sqrt(<x^2>).
    fn beam_radius(field: &ComplexField) -> f64 {
        let intensity = field.intensity();
        let mut sum = 0.0;
        let mut xx = 0.0;
        for ((iy, ix), v) in intensity.counts.indexed_iter() {
            let (x, _) = field.grid.pixel_centre_um(ix, iy);
            sum += v;
            xx += v * x * x;
        }
        2.0 * (xx / sum).sqrt()
    }

    #[test]
    fn zero_distance_is_identity() {
        let f = gaussian_beam(grid128(), 40.0);
        let out = fresnel_propagate(&f, 0.0).unwrap();
        for (a, b) in out.data.iter().zip(f.data.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn power_is_conserved_for_contained_beams() {
        let f = gaussian_beam(grid128(), 30.0);
        for dz in [50.0, -50.0, 500.0, 2000.0] {
            let out = fresnel_propagate(&f, dz).unwrap();
            let rel = (out.power() - f.power()).abs() / f.power();
            assert!(rel < 1e-10, "dz={dz}: relative power drift {rel:e}");
        }
    }

    #[test]
    fn forward_then_backward_returns_the_field() {
        let f = gaussian_beam(grid128(), 30.0);
        let back = fresnel_propagate(&fresnel_propagate(&f, 400.0).unwrap(), -400.0).unwrap();
        let num: f64 = back.data.iter().zip(f.data.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!((num / f.power()).sqrt() < 1e-10);
    }

    #[test]
    fn gaussian_beam_spreads_at_the_analytic_rate() {
        // w(z) = w0*sqrt(1 + (z/zR)^2), zR = pi*w0^2/lambda.
        let g = grid128();
        let w0 = 30.0;
        let zr = std::f64::consts::PI * w0 * w0 / g.wavelength_um;
        let beam = gaussian_beam(g, w0);
        assert_relative_eq!(beam_radius(&beam), w0, max_relative = 2e-4);
        for dz in [0.5 * zr, zr] {
            let expected = w0 * (1.0 + (dz / zr) * (dz / zr)).sqrt();
            let measured = beam_radius(&fresnel_propagate(&beam, dz).unwrap());
            assert_relative_eq!(measured, expected, max_relative = 5e-3);
        }
    }

    #[test]
    fn defocus_beyond_bound_is_a_hard_error() {
        let g = grid128();
        let max = g.max_defocus_um(PAD);
        let f = gaussian_beam(g, 30.0);
        match fresnel_propagate(&f, max * 1.01) {
            Err(Error::AliasingBound { max_dz_um, .. }) => {
                assert_relative_eq!(max_dz_um, max, max_relative = 1e-12);
            }
            other => panic!("expected aliasing error, got {other:?}"),
        }
        assert!(fresnel_propagate(&f, max * 0.99).is_ok());
    }

    #[test]
    fn phase_object_preserves_modulus() {
        let g = grid128();
        let f = gaussian_beam(g, 40.0);
        let phase = PhaseMap::new(
            g,
            Array2::from_shape_fn((g.ny, g.nx), |(iy, ix)| 0.01 * (ix as f64 - iy as f64)),
        )
        .unwrap();
        let out = apply_phase_object(&f, &phase).unwrap();
        for (a, b) in out.data.iter().zip(f.data.iter()) {
            assert_relative_eq!(a.norm(), b.norm(), epsilon = 1e-14);
        }
        let zero = apply_phase_object(&f, &PhaseMap::zeros(g)).unwrap();
        for (a, b) in zero.data.iter().zip(f.data.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn real_fields_have_symmetric_defocus_pairs() {
        // For a real field the -dz field is the conjugate of the +dz field,
        // so the two intensities agree exactly and the axial difference of a
        // zero-phase object vanishes.
        let g = grid128();
        let illum = gaussian_beam(g, 100.0);
        let (ip, im, _) = defocused_intensities(&illum, &PhaseMap::zeros(g), 100.0).unwrap();
        for (a, b) in ip.counts.iter().zip(im.counts.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn quadratic_phase_matches_the_transport_closed_form() {
        // Gaussian intensity I = exp(-2 r^2 / w^2) carrying phase a*r^2:
        // the transport relation gives, per pixel,
        //   dI/dz = -(1/k) div(I grad phi) = -(4a/k) I (1 - 2 r^2 / w^2),
        // including the grad(I).grad(phi) cross term. The beam decays to
        // ~1e-6 intensity at the frame edge, so there is no aperture ripple
        // and the central difference matches to ~1e-4 of the peak value.
        let g = grid128();
        let w0 = 120.0;
        let a = 1e-5;
        let beam = gaussian_beam(g, w0);
        let phase = PhaseMap::new(
            g,
            Array2::from_shape_fn((g.ny, g.nx), |(iy, ix)| {
                let (x, y) = g.pixel_centre_um(ix, iy);
                a * (x * x + y * y)
            }),
        )
        .unwrap();
        let dz = 20.0;
        let (ip, im, _) = defocused_intensities(&beam, &phase, dz).unwrap();
        let scale = 4.0 * a / g.k();
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let (x, y) = g.pixel_centre_um(ix, iy);
                let r2 = x * x + y * y;
                if r2 >= 100.0 * 100.0 {
                    continue;
                }
                let didz = (ip.counts[[iy, ix]] - im.counts[[iy, ix]]) / (2.0 * dz);
                let intensity = (-2.0 * r2 / (w0 * w0)).exp();
                let expected = -scale * intensity * (1.0 - 2.0 * r2 / (w0 * w0));
                assert!(
                    (didz - expected).abs() <= 5.0e-4 * scale,
                    "pixel ({ix},{iy}): didz {didz:.3e} vs {expected:.3e}"
                );
            }
        }
    }

    #[test]
    fn gaussian_illumination_has_requested_mean_and_peak() {
        let g = grid128();
        let illum = gaussian_illumination(g, 1000.0, 4.0 * 640.0).unwrap();
        let intensity = illum.intensity();
        assert_relative_eq!(intensity.mean(), 1000.0, max_relative = 1e-12);
        let centre = intensity.counts[[64, 64]];
        let corner = intensity.counts[[0, 0]];
        assert!(centre > corner);
    }
}
