//! Idler-fluctuation subtraction.
//!
//! Writing `dX = <X> - X` for the fluctuation of a frame about its
//! ensemble mean, the corrected signal is `I_s - k * dI_i`: wherever the
//! idler happened to detect fewer photons than average, its twin pixels in
//! the signal frame did too, so adding back `k` times the idler deficit
//! cancels the correlated part of the shot noise. With heralding
//! efficiency `eta` and a fraction `alpha` of signal photons decorrelated
//! by the defocus, the residual pixel variance is
//! `(1 - (1-alpha)^2 * eta^2) * <I>`, minimised by `k = (1-alpha)*eta`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::IntensityFrame;

/// Subtraction weight: one global factor or a per-pixel map.
#[derive(Debug, Clone)]
pub enum KFactor {
    Scalar(f64),
    Map(Array2<f64>),
}

/// Calibrated inputs of the subtraction: the weight and the idler
/// ensemble-mean map (signal orientation).
#[derive(Debug, Clone)]
pub struct QuantumCorrection {
    pub k: KFactor,
    pub idler_mean: IntensityFrame,
}

/// Apply `signal - k * (idler - idler_mean)`: subtract `k` times the idler
/// fluctuation about its ensemble mean, so a positively correlated idler
/// excess removes the matching signal excess. Both frames and the mean map
/// must share a grid and be in signal orientation (idler already flipped).
pub fn quantum_subtract(
    signal: &IntensityFrame,
    idler_aligned: &IntensityFrame,
    corr: &QuantumCorrection,
) -> Result<IntensityFrame> {
    signal.grid.ensure_same(&idler_aligned.grid, "quantum_subtract frames")?;
    signal.grid.ensure_same(&corr.idler_mean.grid, "quantum_subtract idler mean")?;
    let delta = &idler_aligned.counts - &corr.idler_mean.counts;
    let counts = match &corr.k {
        KFactor::Scalar(k) => &signal.counts - &(&delta * *k),
        KFactor::Map(k) => {
            if k.dim() != signal.counts.dim() {
                return Err(Error::GridMismatch("k map shape".into()));
            }
            &signal.counts - &(k * &delta)
        }
    };
    IntensityFrame::new(signal.grid, counts)
}

/// Empirical optimal weight from an ensemble of simultaneous frame pairs.
#[derive(Debug, Clone)]
pub struct KOptEstimate {
    /// Per-pixel `cov(signal, idler) / var(idler)`.
    pub map: Array2<f64>,
    /// Pooled ratio `<cov> / <var>` over all pixels, the variance-optimal
    /// single factor.
    pub scalar: f64,
    /// Idler ensemble mean, reusable as the subtraction reference.
    pub idler_mean: IntensityFrame,
}

/// Estimate the subtraction weight that minimises the residual variance,
/// `k_opt(x) = cov(dI_s, dI_i) / var(dI_i)`, from paired frames (idler in
/// signal orientation).
pub fn estimate_k_opt(
    signal_frames: &[IntensityFrame],
    idler_frames: &[IntensityFrame],
) -> Result<KOptEstimate> {
    if signal_frames.len() != idler_frames.len() {
        return Err(Error::InvalidParameter("signal/idler frame counts differ".into()));
    }
    let n = signal_frames.len();
    if n < 2 {
        return Err(Error::EmptyEnsemble("k estimation needs at least two frame pairs".into()));
    }
    let grid = signal_frames[0].grid;
    for f in signal_frames.iter().chain(idler_frames.iter()) {
        grid.ensure_same(&f.grid, "estimate_k_opt")?;
    }

    let shape = (grid.ny, grid.nx);
    let mut mean_s = Array2::<f64>::zeros(shape);
    let mut mean_i = Array2::<f64>::zeros(shape);
    for (s, i) in signal_frames.iter().zip(idler_frames) {
        mean_s += &s.counts;
        mean_i += &i.counts;
    }
    mean_s /= n as f64;
    mean_i /= n as f64;

    let mut cov = Array2::<f64>::zeros(shape);
    let mut var = Array2::<f64>::zeros(shape);
    for (s, i) in signal_frames.iter().zip(idler_frames) {
        let ds = &s.counts - &mean_s;
        let di = &i.counts - &mean_i;
        cov += &(&ds * &di);
        var += &(&di * &di);
    }
    let denom = (n - 1) as f64;
    cov /= denom;
    var /= denom;

    let var_total: f64 = var.sum();
    if !(var_total > 0.0) {
        return Err(Error::ZeroVariance("idler ensemble has no fluctuation".into()));
    }
    let scalar = cov.sum() / var_total;
    let map = ndarray::Zip::from(&cov)
        .and(&var)
        .map_collect(|&c, &v| if v > 0.0 { c / v } else { 0.0 });

    Ok(KOptEstimate { map, scalar, idler_mean: IntensityFrame::new(grid, mean_i)? })
}

/// Residual variance of the corrected frames relative to the uncorrected
/// shot level: `1 - (1-alpha)^2 * eta^2` at the optimal weight.
pub fn predicted_noise_reduction(eta: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter("eta must be in [0, 1]".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter("alpha must be in [0, 1]".into()));
    }
    let c = (1.0 - alpha) * eta;
    Ok(1.0 - c * c)
}
