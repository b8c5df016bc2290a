//! Correlated twin-beam photon statistics.
//!
//! The source emits photon pairs. One photon goes to the signal arm, the
//! other to the idler arm at the point-reflected transverse position plus a
//! Gaussian correlation jitter and a fixed misalignment offset. Each arm
//! detects its photon independently with probability `eta0`. The detected
//! frames therefore have Poisson marginals per pixel while pixel pairs that
//! share source cells are positively correlated.
//!
//! Sampling recipe, per source cell:
//! 1. pair count `N ~ Poisson(mean/eta0)`;
//! 2. detected signal `~ Binomial(N, eta0)` at the cell;
//! 3. detected idler `~ Binomial(N, eta0)`, each photon displaced by the
//!    sub-pixel jitter and binned into its destination pixel (a multinomial
//!    over the precomputed destination kernel, which is exactly equivalent
//!    to per-photon continuous sampling);
//! 4. arms whose mean maps differ are topped up with independent Poisson
//!    extras, which models photons redistributed by defocus: they are real
//!    detections but carry no usable correlation at their new position.
//!
//! The `uncorrelated_fraction` knob moves that fraction of the pair rate
//! into the independent extras of both arms, giving direct control over the
//! correlation loss that defocus otherwise produces implicitly.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::IntensityFrame;

/// Twin-beam source and detection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceModel {
    /// Nominal mean detected photons per pixel per frame.
    pub n_mean: f64,
    /// Detection probability per photon (losses and quantum efficiency).
    pub eta0: f64,
    /// Std of the Gaussian position jitter between twin photons, um.
    pub sigma_corr_um: f64,
    /// Fixed signal/idler registration offset, um, per axis (x, y).
    pub misalignment_um: [f64; 2],
    /// Electronic read noise std in photoelectrons per pixel per frame.
    pub read_noise_e: f64,
    /// Fraction of the pair rate replaced by uncorrelated photons.
    pub uncorrelated_fraction: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        // sigma is solved so that heralding_efficiency(L = 20 um) = 0.57 at
        // this eta0: the filtered-pixel correlation of the default camera
        // settings (5 um pixels, 4x4 averaging window).
        SourceModel {
            n_mean: 1000.0,
            eta0: 0.95,
            sigma_corr_um: 5.650_731_403_9,
            misalignment_um: [0.0, 0.0],
            read_noise_e: 4.0,
            uncorrelated_fraction: 0.0,
        }
    }
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_mean > 0.0) {
            return Err(Error::InvalidParameter("n_mean must be positive".into()));
        }
        if !(self.eta0 > 0.0 && self.eta0 <= 1.0) {
            return Err(Error::InvalidParameter("eta0 must be in (0, 1]".into()));
        }
        if !(self.sigma_corr_um >= 0.0) {
            return Err(Error::InvalidParameter("sigma_corr_um must be >= 0".into()));
        }
        if !(self.read_noise_e >= 0.0) {
            return Err(Error::InvalidParameter("read_noise_e must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.uncorrelated_fraction) {
            return Err(Error::InvalidParameter("uncorrelated_fraction must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Reproducible per-frame random stream: a master seed plus a stream index.
/// Distinct indices give statistically independent streams for the same
/// master seed, so frames can be drawn in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSeed {
    pub master: u64,
    pub stream: u64,
}

impl FrameSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        FrameSeed { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// One simultaneous signal/idler exposure plus the noiseless mean maps it
/// was drawn from.
///
/// `idler` is stored in its own camera orientation, which is the point
/// reflection of the signal orientation; [`TwinFrameSet::idler_aligned`]
/// flips it so that correlated pixels share indices. Mean maps are stored
/// in signal orientation.
#[derive(Debug, Clone)]
pub struct TwinFrameSet {
    pub signal: IntensityFrame,
    pub idler: IntensityFrame,
    pub mean_signal: IntensityFrame,
    pub mean_idler: IntensityFrame,
    pub seed: FrameSeed,
}

impl TwinFrameSet {
    /// Idler frame flipped into signal orientation.
    pub fn idler_aligned(&self) -> IntensityFrame {
        self.idler.point_reflected()
    }
}

/// Triangle-weighted Gaussian overlap, the basic geometric factor of the
/// pair correlation: `T(c) = (1/L) * integral_{-L}^{L} (L-|s|) * n_sigma(s+c) ds`
/// where `n_sigma` is the normal density. `T(c)` is the probability that a
/// photon born uniformly in a pixel of side `L` lands, after an offset `c`
/// plus the Gaussian jitter, in a pixel displaced by exactly that offset;
/// summed over all integer pixel offsets it is 1.
fn triangle_gauss(pixel_um: f64, c: f64, sigma_um: f64) -> f64 {
    let l = pixel_um;
    if sigma_um == 0.0 {
        return (1.0 - (c.abs() / l)).max(0.0);
    }
    // Integrand support is |s + c| <~ 8*sigma intersected with [-L, L],
    // split at s = 0 where the triangle weight has its kink.
    let lo = (-c - 8.0 * sigma_um).max(-l);
    let hi = (-c + 8.0 * sigma_um).min(l);
    if lo >= hi {
        return 0.0;
    }
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma_um);
    let f = |s: f64| (l - s.abs()) * norm * (-(s + c) * (s + c) / (2.0 * sigma_um * sigma_um)).exp();
    let mut total = 0.0;
    for (a, b) in [(lo, hi.min(0.0)), (lo.max(0.0), hi)] {
        if b <= a {
            continue;
        }
        // Composite Simpson, 512 panels: far below 1e-9 error for this
        // smooth integrand.
        let n = 512;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        total += acc * h / 3.0;
    }
    total / l
}

/// Probability that a twin photon is detected in the pixel symmetric to its
/// partner's, for square pixels of side `pixel_um`.
///
/// The source correlation is an isotropic Gaussian of std `sigma_um` in the
/// summed coordinate, displaced by the fixed misalignment; the efficiency
/// factorises over axes for square pixels. `sigma_um -> 0` with zero
/// misalignment gives exactly `eta0`; growing the pixel relative to
/// `sigma_um` approaches `eta0` from below.
pub fn heralding_efficiency(
    pixel_um: f64,
    misalignment_um: [f64; 2],
    sigma_um: f64,
    eta0: f64,
) -> Result<f64> {
    if !(pixel_um > 0.0) {
        return Err(Error::InvalidParameter("pixel size must be positive".into()));
    }
    if !(sigma_um >= 0.0) {
        return Err(Error::InvalidParameter("sigma must be >= 0".into()));
    }
    if !(eta0 > 0.0 && eta0 <= 1.0) {
        return Err(Error::InvalidParameter("eta0 must be in (0, 1]".into()));
    }
    Ok(eta0
        * triangle_gauss(pixel_um, misalignment_um[0], sigma_um)
        * triangle_gauss(pixel_um, misalignment_um[1], sigma_um))
}

/// Destination-pixel kernel for the idler jitter along one axis.
struct AxisKernel {
    /// First pixel offset covered by `probs`.
    first: i64,
    probs: Vec<f64>,
}

impl AxisKernel {
    fn build(pixel_um: f64, delta_um: f64, sigma_um: f64) -> AxisKernel {
        let reach = (delta_um.abs() + 8.0 * sigma_um) / pixel_um + 1.0;
        let span = reach.ceil() as i64;
        let mut first = -span;
        let mut probs: Vec<f64> = (-span..=span)
            .map(|m| triangle_gauss(pixel_um, m as f64 * pixel_um - delta_um, sigma_um))
            .collect();
        // Trim negligible tails so the multinomial loop stays short.
        while probs.len() > 1 && probs[0] < 1e-12 {
            probs.remove(0);
            first += 1;
        }
        while probs.len() > 1 && *probs.last().unwrap() < 1e-12 {
            probs.pop();
        }
        AxisKernel { first, probs }
    }

    fn is_identity(&self) -> bool {
        self.probs.len() == 1 && self.first == 0 && (self.probs[0] - 1.0).abs() < 1e-12
    }
}

/// Draw one simultaneous twin exposure.
///
/// `mean_signal` and `mean_idler` are the expected detected count maps of
/// the two arms in signal orientation; `mean_idler` is the no-object map.
/// Photons jittered off the grid edge are lost, as they are on a real
/// sensor. The returned idler frame is stored point-reflected (camera
/// orientation).
pub fn sample_twin_frames(
    mean_signal: &IntensityFrame,
    mean_idler: &IntensityFrame,
    src: &SourceModel,
    seed: FrameSeed,
) -> Result<TwinFrameSet> {
    mean_signal.grid.ensure_same(&mean_idler.grid, "sample_twin_frames")?;
    src.validate()?;
    if mean_signal.counts.iter().any(|&v| v < 0.0) || mean_idler.counts.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter("mean maps must be non-negative".into()));
    }

    let grid = mean_signal.grid;
    let (ny, nx) = (grid.ny, grid.nx);
    let kx = AxisKernel::build(grid.pitch_um, src.misalignment_um[0], src.sigma_corr_um);
    let ky = AxisKernel::build(grid.pitch_um, src.misalignment_um[1], src.sigma_corr_um);
    let in_place = kx.is_identity() && ky.is_identity();

    // Flattened 2-D destination kernel, most probable offsets first so the
    // sequential multinomial usually exhausts its budget early.
    let mut dest: Vec<(i64, i64, f64)> = Vec::with_capacity(kx.probs.len() * ky.probs.len());
    for (jy, py) in ky.probs.iter().enumerate() {
        for (jx, px) in kx.probs.iter().enumerate() {
            dest.push((ky.first + jy as i64, kx.first + jx as i64, py * px));
        }
    }
    dest.sort_by(|a, b| b.2.total_cmp(&a.2));

    let mut rng = seed.rng();
    let mut signal = Array2::<f64>::zeros((ny, nx));
    let mut idler = Array2::<f64>::zeros((ny, nx));
    let corr_scale = 1.0 - src.uncorrelated_fraction;

    let poisson = |rng: &mut ChaCha8Rng, mean: f64| -> u64 {
        if mean <= 0.0 {
            0
        } else {
            Poisson::new(mean).expect("positive mean").sample(rng) as u64
        }
    };

    for iy in 0..ny {
        for ix in 0..nx {
            let ms = mean_signal.counts[[iy, ix]];
            let mi = mean_idler.counts[[iy, ix]];
            let common = ms.min(mi) * corr_scale;

            let pairs = poisson(&mut rng, common / src.eta0);
            let (s_corr, i_surv) = if src.eta0 >= 1.0 {
                (pairs, pairs)
            } else {
                (
                    Binomial::new(pairs, src.eta0).unwrap().sample(&mut rng),
                    Binomial::new(pairs, src.eta0).unwrap().sample(&mut rng),
                )
            };

            signal[[iy, ix]] += (s_corr + poisson(&mut rng, ms - common)) as f64;

            let extra_i = poisson(&mut rng, mi - common);
            idler[[iy, ix]] += extra_i as f64;

            if in_place {
                idler[[iy, ix]] += i_surv as f64;
            } else {
                // Multinomial over destinations via sequential binomials.
                let mut remaining = i_surv;
                let mut mass_left = 1.0;
                for &(my, mx, p) in &dest {
                    if remaining == 0 {
                        break;
                    }
                    let frac = (p / mass_left).min(1.0);
                    let take = if frac >= 1.0 {
                        remaining
                    } else {
                        Binomial::new(remaining, frac).unwrap().sample(&mut rng)
                    };
                    mass_left -= p;
                    remaining -= take;
                    let ty = iy as i64 + my;
                    let tx = ix as i64 + mx;
                    if take > 0 && ty >= 0 && ty < ny as i64 && tx >= 0 && tx < nx as i64 {
                        idler[[ty as usize, tx as usize]] += take as f64;
                    }
                    if mass_left <= 0.0 {
                        break;
                    }
                }
            }
        }
    }

    Ok(TwinFrameSet {
        signal: IntensityFrame::new(grid, signal)?,
        idler: IntensityFrame::new(grid, idler)?.point_reflected(),
        mean_signal: mean_signal.clone(),
        mean_idler: mean_idler.clone(),
        seed,
    })
}

/// Mean of `n_frames` independent shot-noise exposures of the signal arm,
/// drawn in one pass: a Poisson sum of `n` frames has the distribution of a
/// single Poisson draw at `n` times the mean, so the per-pixel average is
/// `Poisson(n * mean) / n` exactly. Idler correlations are irrelevant here
/// because frame averaging uses the signal arm alone.
pub fn sample_averaged_signal(
    mean_signal: &IntensityFrame,
    n_frames: u32,
    seed: FrameSeed,
) -> Result<IntensityFrame> {
    if n_frames == 0 {
        return Err(Error::InvalidParameter("n_frames must be >= 1".into()));
    }
    let mut rng = seed.rng();
    let n = n_frames as f64;
    let mut counts = mean_signal.counts.clone();
    for v in counts.iter_mut() {
        if !(*v >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative mean {v}")));
        }
        *v = if *v > 0.0 {
            Poisson::new(*v * n).expect("positive mean").sample(&mut rng) / n
        } else {
            0.0
        };
    }
    IntensityFrame::new(mean_signal.grid, counts)
}

/// `d x d` moving-average filter. Output size equals input size; the
/// neighbourhood anchor is top-left biased for even `d` (offsets
/// `-(ceil(d/2)-1) ..= floor(d/2)`), and windows shrink at the edges.
/// Commutes exactly with affine rescaling of the counts.
pub fn averaging_filter(frame: &IntensityFrame, d: usize) -> Result<IntensityFrame> {
    if d == 0 {
        return Err(Error::InvalidParameter("filter size must be >= 1".into()));
    }
    if d == 1 {
        return Ok(frame.clone());
    }
    let (ny, nx) = (frame.grid.ny, frame.grid.nx);
    let back = (d + 1) / 2 - 1; // ceil(d/2) - 1
    let fwd = d / 2;

    // Summed-area table with a zero row/column in front.
    let mut sat = Array2::<f64>::zeros((ny + 1, nx + 1));
    for iy in 0..ny {
        let mut run = 0.0;
        for ix in 0..nx {
            run += frame.counts[[iy, ix]];
            sat[[iy + 1, ix + 1]] = sat[[iy, ix + 1]] + run;
        }
    }

    let mut out = Array2::<f64>::zeros((ny, nx));
    for iy in 0..ny {
        let y0 = iy.saturating_sub(back);
        let y1 = (iy + fwd).min(ny - 1);
        for ix in 0..nx {
            let x0 = ix.saturating_sub(back);
            let x1 = (ix + fwd).min(nx - 1);
            let sum = sat[[y1 + 1, x1 + 1]] - sat[[y0, x1 + 1]] - sat[[y1 + 1, x0]] + sat[[y0, x0]];
            let count = ((y1 + 1 - y0) * (x1 + 1 - x0)) as f64;
            out[[iy, ix]] = sum / count;
        }
    }
    IntensityFrame::new(frame.grid, out)
}

/// Add zero-mean Gaussian read noise of std `sigma_e` counts to every
/// pixel. Negative results are kept; clipping them would bias the
/// fluctuation statistics the subtraction relies on.
pub fn add_read_noise(frame: &mut IntensityFrame, sigma_e: f64, rng: &mut impl Rng) -> Result<()> {
    if !(sigma_e >= 0.0) {
        return Err(Error::InvalidParameter("read noise std must be >= 0".into()));
    }
    if sigma_e == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma_e).expect("valid std");
    frame.counts.mapv_inplace(|v| v + normal.sample(rng));
    Ok(())
}

/// Mean absolute defocus contrast `<|I_focus - I_dz|> / <I_focus>`, the
/// fraction of photons redistributed between the two planes. Expects
/// noiseless mean maps.
pub fn alpha_estimate(i_focus: &IntensityFrame, i_dz: &IntensityFrame) -> Result<f64> {
    i_focus.grid.ensure_same(&i_dz.grid, "alpha_estimate")?;
    let denom = i_focus.mean();
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter("focus intensity must have positive mean".into()));
    }
    let num: f64 = i_focus
        .counts
        .iter()
        .zip(i_dz.counts.iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / i_focus.counts.len() as f64;
    Ok(num / denom)
}
