//! Reconstruction quality metrics and ensemble summaries.

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::PhaseMap;
use crate::grid::Grid;

/// Rectangular pixel region `[x0, x0+width) x [y0, y0+height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Roi { x0, y0, width, height }
    }

    pub fn check_fits(&self, grid: &Grid) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::RoiOutOfBounds("roi must have nonzero area".into()));
        }
        if self.x0 + self.width > grid.nx || self.y0 + self.height > grid.ny {
            return Err(Error::RoiOutOfBounds(format!(
                "roi {}..{} x {}..{} on {}x{} grid",
                self.x0,
                self.x0 + self.width,
                self.y0,
                self.y0 + self.height,
                grid.nx,
                grid.ny
            )));
        }
        Ok(())
    }

    pub fn overlaps(&self, other: &Roi) -> bool {
        self.x0 < other.x0 + other.width
            && other.x0 < self.x0 + self.width
            && self.y0 < other.y0 + other.height
            && other.y0 < self.y0 + self.height
    }

    pub fn mean_over(&self, data: &Array2<f64>) -> f64 {
        let view = data.slice(s![self.y0..self.y0 + self.height, self.x0..self.x0 + self.width]);
        view.mean().unwrap()
    }
}

fn pearson_views(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.mean().unwrap();
    let mb = b.mean().unwrap();
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let _ = n;
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance("pearson input has no spread".into()));
    }
    Ok(sab / (saa.sqrt() * sbb.sqrt()))
}

/// Pearson correlation coefficient between two phase maps over the full
/// frame. Invariant under affine rescaling of either input; |C| <= 1.
pub fn pearson(a: &PhaseMap, b: &PhaseMap) -> Result<f64> {
    a.grid.ensure_same(&b.grid, "pearson")?;
    pearson_views(a.data.view(), b.data.view())
}

/// Pearson correlation with a border of `border_px` pixels excluded on all
/// sides, the default quality figure: mirror-extension residuals and sensor
/// edges live in the border.
pub fn pearson_excluding_border(a: &PhaseMap, b: &PhaseMap, border_px: usize) -> Result<f64> {
    a.grid.ensure_same(&b.grid, "pearson")?;
    let (ny, nx) = (a.grid.ny, a.grid.nx);
    if 2 * border_px >= nx.min(ny) {
        return Err(Error::RoiOutOfBounds(format!(
            "border {border_px} px leaves no interior on {nx}x{ny}"
        )));
    }
    let sl = s![border_px..ny - border_px, border_px..nx - border_px];
    pearson_views(a.data.slice(sl), b.data.slice(sl))
}

/// Phase step `mean(in) - mean(out)` between two disjoint regions, the
/// etched-minus-background convention.
pub fn phase_step_estimate(map: &PhaseMap, roi_in: &Roi, roi_out: &Roi) -> Result<f64> {
    roi_in.check_fits(&map.grid)?;
    roi_out.check_fits(&map.grid)?;
    if roi_in.overlaps(roi_out) {
        return Err(Error::RoiOutOfBounds("step rois overlap".into()));
    }
    Ok(roi_in.mean_over(&map.data) - roi_out.mean_over(&map.data))
}

/// Mean, sample standard deviation and standard error of an ensemble.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    /// n-1 normalised; NaN for a single sample.
    pub std_dev: f64,
    /// std_dev / sqrt(n).
    pub std_error: f64,
}

pub fn ensemble_stats(values: &[f64]) -> Result<EnsembleStats> {
    if values.is_empty() {
        return Err(Error::EmptyEnsemble("no values".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_dev = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(EnsembleStats { n, mean, std_dev, std_error: std_dev / (n as f64).sqrt() })
}

/// Azimuthally averaged power spectrum of a map: mean of `|F|^2 / N^2`
/// over rings of equal `|q|` bin width `1/(2*n_max*pitch)`. Returns
/// `(q_cycles_per_um, power)` pairs, DC excluded.
///
/// The transform is taken on the even-symmetric (mirrored) extension of the
/// map, the same basis a Neumann-boundary reconstruction lives in. A plain
/// periodic transform of a non-periodic map would leak low-frequency power
/// across the whole band and flatten steep spectra; the mirrored extension
/// is continuous at every seam and measures the decay cleanly.
pub fn radial_power_spectrum(map: &PhaseMap) -> Vec<(f64, f64)> {
    let g = map.grid;
    let (ny, nx) = (2 * g.ny, 2 * g.nx);
    let mean = map.data.mean().unwrap();
    let mut work = Array2::from_shape_fn((ny, nx), |(iy, ix)| {
        let ry = if iy < g.ny { iy } else { ny - 1 - iy };
        let rx = if ix < g.nx { ix } else { nx - 1 - ix };
        num_complex::Complex64::new(map.data[[ry, rx]] - mean, 0.0)
    });
    Fft2::new(ny, nx).forward(&mut work);

    let qx = g.freq_axis(nx);
    let qy = g.freq_axis(ny);
    let dq = 1.0 / (nx.max(ny) as f64 * g.pitch_um);
    let n_bins = (g.q_max() * std::f64::consts::SQRT_2 / dq).ceil() as usize + 1;
    let mut power = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    let norm = 1.0 / ((nx * ny) as f64).powi(2);
    for iy in 0..ny {
        for ix in 0..nx {
            let q = (qx[ix] * qx[ix] + qy[iy] * qy[iy]).sqrt();
            let bin = (q / dq).round() as usize;
            if bin == 0 || bin >= n_bins {
                continue;
            }
            power[bin] += work[[iy, ix]].norm_sqr() * norm;
            count[bin] += 1;
        }
    }
    (1..n_bins)
        .filter(|&b| count[b] > 0)
        .map(|b| (b as f64 * dq, power[b] / count[b] as f64))
        .collect()
}

/// Least-squares slope of `log(power)` against `log(q)` over a band,
/// for power-law diagnostics.
pub fn log_log_slope(points: &[(f64, f64)], q_lo: f64, q_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(q, p)| *q >= q_lo && *q <= q_hi && *p > 0.0)
        .map(|&(q, p)| (q.ln(), p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptyEnsemble("not enough points in the fit band".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("degenerate fit band".into()));
    }
    Ok(sxy / sxx)
}
