//! Simulation toolkit for non-interferometric quantitative phase imaging
//! with correlated twin beams.
//!
//! The pipeline models a defocus-based phase microscope: a thin phase
//! object is illuminated, intensity is recorded at two planes `+dz`/`-dz`
//! around focus, and the phase is recovered from the axial intensity
//! derivative by inverting a Poisson equation in the Fourier domain
//! (the transport-of-intensity relation). Photon shot noise is amplified as
//! `1/|q|^2` by that inversion, so low spatial frequencies dominate the
//! reconstruction error.
//!
//! The twin-beam mode attacks exactly that noise: the source emits photon
//! pairs whose detection positions are correlated point-symmetrically
//! between a signal and an idler arm. Subtracting the idler fluctuation
//! from each signal frame (`I_s - k*(<I_i> - I_i)`) removes the correlated
//! part of the shot noise before reconstruction, below the level reachable
//! by any classical averaging of the same number of frames.
//!
//! Module map:
//! - [`grid`], [`field`]: sampling geometry and data containers.
//! - [`optics`]: Fresnel propagation, phase objects, defocused intensities.
//! - [`twinbeam`]: the correlated pair sampler, heralding efficiency,
//!   averaging filter, read noise and defocus-contrast estimation.
//! - [`tie`]: axial derivative, the Fourier phase solver and its noise
//!   transfer model.
//! - [`quantum`]: idler subtraction, optimal weights and the predicted
//!   noise-reduction law.
//! - [`metrics`]: Pearson correlation, step estimation, ensemble summaries.
//! - [`samples`]: built-in binary phase targets.
//! - [`config`], [`experiment`], [`io`]: experiment configs, sweep runner,
//!   and file formats (16-bit PGM, CSV, JSON manifests).

pub mod config;
pub mod error;
pub mod experiment;
mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod optics;
pub mod quantum;
pub mod samples;
pub mod tie;
pub mod twinbeam;

pub use error::{Error, Result};
pub use field::{ComplexField, IntensityFrame, PhaseMap};
pub use grid::Grid;
