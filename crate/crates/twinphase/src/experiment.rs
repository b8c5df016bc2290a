//! End-to-end experiment runner: sample -> acquire -> retrieve -> score.
//!
//! A run renders the phase object, propagates the illumination to the two
//! defocus planes, draws photon-limited twin frames for every repetition,
//! reconstructs the phase per acquisition mode and summarises step accuracy
//! and map fidelity per defocus distance. Every random draw is tied to a
//! `(master_seed, stream)` pair with a fixed stream layout, so results are
//! reproducible to the byte for a given configuration, independent of
//! thread scheduling.
//!
//! Stream layout (one "event" = one sampled exposure; event `e` uses stream
//! `2e` for photons and `2e + 1` for read noise):
//!
//! - events `0 .. C`: gain-calibration exposures at focus,
//! - events `C + (dz_idx * R + rep) * 2 + plane`: the shared measurement
//!   exposures (`plane` 0 = +dz, 1 = -dz) used by both the classical and the
//!   noise-subtracted mode, which is what makes their comparison paired,
//! - one further block of the same shape per frame-averaging mode.

use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AcquisitionMode, ExperimentConfig, IlluminationSpec, KMode};
use crate::error::{Error, Result};
use crate::field::{ComplexField, IntensityFrame, PhaseMap};
use crate::io;
use crate::metrics::{
    ensemble_stats, pearson_excluding_border, phase_step_estimate, EnsembleStats,
};
use crate::optics::{defocused_intensities, gaussian_illumination, uniform_illumination};
use crate::quantum::{estimate_k_opt, quantum_subtract, KFactor, QuantumCorrection};
use crate::samples::render_sample;
use crate::tie::{axial_derivative, solve_tie, TieOptions};
use crate::twinbeam::{
    add_read_noise, alpha_estimate, averaging_filter, heralding_efficiency,
    sample_averaged_signal, sample_twin_frames, FrameSeed,
};

/// Two-plane phase retrieval: central intensity derivative, then the
/// regularised Fourier inversion at mean illumination `illum_mean`.
pub fn reconstruct_phase(
    i_plus: &IntensityFrame,
    i_minus: &IntensityFrame,
    dz_um: f64,
    illum_mean: f64,
    regularization_eps: f64,
) -> Result<PhaseMap> {
    let didz = axial_derivative(i_plus, i_minus, dz_um)?;
    let mut opts = TieOptions::for_grid(&i_plus.grid, dz_um, illum_mean);
    opts.regularization_eps = regularization_eps;
    solve_tie(&didz, &opts)
}

/// Result of the focal-plane gain calibration.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// Pooled empirical subtraction gain `<cov>/<var>` on filtered frames.
    pub k_scalar: f64,
    /// Per-pixel gain map (diagnostic; noisy at small ensembles).
    pub k_map: Array2<f64>,
    /// Closed-form gain at the filter scale, for comparison.
    pub eta_theory: f64,
    pub n_frames: usize,
}

/// Per-(mode, defocus) ensemble outcome.
#[derive(Debug, Clone)]
pub struct PointRecord {
    pub mode: AcquisitionMode,
    pub dz_um: f64,
    /// Defocus-induced intensity contrast of the filtered mean frames.
    pub alpha: f64,
    /// Subtraction gain actually applied (noise-subtracted mode only).
    pub k_used: Option<f64>,
    /// Phase-step estimate per repetition, radians.
    pub steps: Vec<f64>,
    /// Border-excluded correlation with the true phase per repetition
    /// (NaN when the true phase is flat).
    pub pearsons: Vec<f64>,
    pub step_stats: EnsembleStats,
    pub pearson_stats: EnsembleStats,
    /// Ensemble-mean reconstruction, a low-noise picture of the retrieval.
    pub mean_recon: PhaseMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationSummary {
    /// Empirical pooled gain; absent unless the gain mode is `calibrated`.
    pub k_scalar: Option<f64>,
    /// Closed-form gain at the filter scale.
    pub eta_theory: f64,
    pub n_frames: usize,
}

/// Deterministic provenance record written as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config_hash: String,
    pub modes: Vec<String>,
    pub calibration: Option<CalibrationSummary>,
    /// Every file the run emitted, relative to the output directory.
    pub files: Vec<String>,
}

/// In-memory outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub points: Vec<PointRecord>,
}

/// Build the illumination field a configuration describes.
pub fn illumination_field(cfg: &ExperimentConfig) -> Result<ComplexField> {
    match cfg.illumination {
        IlluminationSpec::Gaussian { fwhm_um } => {
            gaussian_illumination(cfg.grid, cfg.source.n_mean, fwhm_um)
        }
        IlluminationSpec::Uniform => uniform_illumination(cfg.grid, cfg.source.n_mean),
    }
}

/// Effective heralding efficiency at the analysis scale: the sliding
/// `d x d` mean filter makes each output pixel an aggregate detector of
/// side `d * pitch`, and the pooled optimal gain on filtered frames equals
/// the heralding efficiency of that aggregate cell exactly.
pub fn effective_heralding(cfg: &ExperimentConfig) -> Result<f64> {
    heralding_efficiency(
        cfg.filter_px as f64 * cfg.grid.pitch_um,
        cfg.source.misalignment_um,
        cfg.source.sigma_corr_um,
        cfg.source.eta0,
    )
}

/// Estimate the subtraction gain from focal-plane twin exposures: sample
/// `calibration_frames` twin frames with no object contrast, filter both
/// arms like the measurement path, and pool `cov/var` over all pixels.
pub fn calibrate(cfg: &ExperimentConfig) -> Result<CalibrationResult> {
    cfg.validate()?;
    let n_cal = cfg.reconstruction.calibration_frames;
    if n_cal < 2 {
        return Err(Error::Config("calibration needs at least 2 frames".into()));
    }
    let focus = illumination_field(cfg)?.intensity();
    let d = cfg.filter_px;
    let pairs: Vec<(IntensityFrame, IntensityFrame)> = (0..n_cal)
        .into_par_iter()
        .map(|j| -> Result<(IntensityFrame, IntensityFrame)> {
            let e = j as u64;
            let mut set = sample_twin_frames(
                &focus,
                &focus,
                &cfg.source,
                FrameSeed::new(cfg.master_seed, 2 * e),
            )?;
            let mut noise_rng = FrameSeed::new(cfg.master_seed, 2 * e + 1).rng();
            add_read_noise(&mut set.signal, cfg.source.read_noise_e, &mut noise_rng)?;
            add_read_noise(&mut set.idler, cfg.source.read_noise_e, &mut noise_rng)?;
            Ok((
                averaging_filter(&set.signal, d)?,
                averaging_filter(&set.idler_aligned(), d)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (signals, idlers): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let est = estimate_k_opt(&signals, &idlers)?;
    Ok(CalibrationResult {
        k_scalar: est.scalar,
        k_map: est.map,
        eta_theory: effective_heralding(cfg)?,
        n_frames: n_cal,
    })
}

/// One repetition's filtered frames: signal at both planes and the aligned
/// idler at both planes.
struct RepFrames {
    s_plus: IntensityFrame,
    s_minus: IntensityFrame,
    i_plus: IntensityFrame,
    i_minus: IntensityFrame,
}

/// Per-defocus context: noiseless mean maps and derived scalars.
struct DzContext {
    dz_um: f64,
    mean_plus: IntensityFrame,
    mean_minus: IntensityFrame,
    /// Focal intensity; also the idler arm's mean map (the idler sees the
    /// shared envelope but neither the object nor the defocus).
    mean_focus: IntensityFrame,
    alpha: f64,
    /// Spatial mean of the filtered focal intensity, the retrieval's
    /// uniform-illumination level.
    illum_mean: f64,
}

fn dz_tag(dz: f64) -> String {
    format!("{dz}").replace('.', "p")
}

fn mode_tag(mode: &AcquisitionMode) -> String {
    mode.to_string()
        .replace(['(', ')'], "_")
        .trim_end_matches('_')
        .to_string()
}

/// Run a full experiment. With `out_dir` set, writes the config echo,
/// `metrics.csv`, `manifest.json`, and an `images/` subdirectory holding
/// the true phase and the mean reconstructions
/// into the directory (created if needed); with `None`, runs in memory.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let grid = cfg.grid;
    let d = cfg.filter_px;
    let frames = cfg.frames_per_point;
    let n_dz = cfg.defocus_um.len();
    let eps = cfg.reconstruction.regularization_eps;
    let border = cfg.reconstruction.border_px;

    let sample = render_sample(&cfg.sample, grid)?;
    let (roi_in, roi_out) = match &cfg.rois {
        Some(pair) => (pair.roi_in, pair.roi_out),
        None => (sample.roi_in, sample.roi_out),
    };
    roi_in.check_fits(&grid)?;
    roi_out.check_fits(&grid)?;
    let truth = &sample.phase;
    let truth_flat = {
        let m = truth.data.mean().unwrap();
        truth.data.iter().all(|&v| (v - m).abs() < 1e-15)
    };
    let illum = illumination_field(cfg)?;

    let has_quantum = cfg.modes.iter().any(|m| *m == AcquisitionMode::Quantum);
    let calibration = if has_quantum && cfg.reconstruction.k_mode == KMode::Calibrated {
        Some(calibrate(cfg)?)
    } else {
        None
    };
    let eta_theory = if has_quantum { Some(effective_heralding(cfg)?) } else { None };

    // Stream accounting. The calibration block is always reserved so that
    // measurement frames do not depend on the gain mode.
    let cal_events = cfg.reconstruction.calibration_frames as u64;
    let meas_block = (n_dz * frames * 2) as u64;
    let meas_event = |dz_idx: usize, rep: usize, plane: u64| -> u64 {
        cal_events + ((dz_idx * frames + rep) as u64) * 2 + plane
    };

    let filt = |f: &IntensityFrame| averaging_filter(f, d);

    // Correlation against the true phase; flat truth yields NaN rather than
    // failing the run.
    let truth_corr = |recon: &PhaseMap| -> Result<f64> {
        if truth_flat {
            return Ok(f64::NAN);
        }
        match pearson_excluding_border(recon, truth, border) {
            Ok(c) => Ok(c),
            Err(Error::ZeroVariance(_)) => Ok(f64::NAN),
            Err(e) => Err(e),
        }
    };

    // Build per-defocus contexts (noiseless optics, done once).
    let mut contexts = Vec::with_capacity(n_dz);
    for &dz in &cfg.defocus_um {
        let (mean_plus, mean_minus, mean_focus) = defocused_intensities(&illum, truth, dz)?;
        let f_plus = filt(&mean_plus)?;
        let f_minus = filt(&mean_minus)?;
        let f_focus = filt(&mean_focus)?;
        let alpha = 0.5
            * (alpha_estimate(&f_focus, &f_plus)? + alpha_estimate(&f_focus, &f_minus)?);
        let illum_mean = f_focus.mean();
        contexts.push(DzContext { dz_um: dz, mean_plus, mean_minus, mean_focus, alpha, illum_mean });
    }

    let sample_rep = |ctx: &DzContext, e_plus: u64, e_minus: u64| -> Result<RepFrames> {
        let draw = |means: &IntensityFrame, e: u64| -> Result<(IntensityFrame, IntensityFrame)> {
            let mut set = sample_twin_frames(
                means,
                &ctx.mean_focus,
                &cfg.source,
                FrameSeed::new(cfg.master_seed, 2 * e),
            )?;
            let mut noise_rng = FrameSeed::new(cfg.master_seed, 2 * e + 1).rng();
            add_read_noise(&mut set.signal, cfg.source.read_noise_e, &mut noise_rng)?;
            add_read_noise(&mut set.idler, cfg.source.read_noise_e, &mut noise_rng)?;
            Ok((filt(&set.signal)?, filt(&set.idler_aligned())?))
        };
        let (s_plus, i_plus) = draw(&ctx.mean_plus, e_plus)?;
        let (s_minus, i_minus) = draw(&ctx.mean_minus, e_minus)?;
        Ok(RepFrames { s_plus, s_minus, i_plus, i_minus })
    };

    // Record per (dz, mode); reordered mode-major at the end.
    let needs_shared = cfg
        .modes
        .iter()
        .any(|m| matches!(m, AcquisitionMode::Classical | AcquisitionMode::Quantum));
    let mut by_dz_mode: Vec<Vec<PointRecord>> = Vec::with_capacity(n_dz);

    let mut multiframe_blocks = std::collections::HashMap::new();
    let mut next_block = 1u64;
    for mode in &cfg.modes {
        if let AcquisitionMode::MultiFrame(n) = mode {
            multiframe_blocks.entry(*n).or_insert_with(|| {
                let b = next_block;
                next_block += 1;
                b
            });
        }
    }

    for (dz_idx, ctx) in contexts.iter().enumerate() {
        let reps: Vec<RepFrames> = if needs_shared {
            (0..frames)
                .into_par_iter()
                .map(|rep| {
                    sample_rep(ctx, meas_event(dz_idx, rep, 0), meas_event(dz_idx, rep, 1))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };

        // Ensemble-mean filtered idler per plane: the subtraction reference.
        let idler_refs = if has_quantum {
            let mut mp = Array2::<f64>::zeros((grid.ny, grid.nx));
            let mut mm = Array2::<f64>::zeros((grid.ny, grid.nx));
            for rf in &reps {
                mp += &rf.i_plus.counts;
                mm += &rf.i_minus.counts;
            }
            mp /= frames as f64;
            mm /= frames as f64;
            Some((IntensityFrame::new(grid, mp)?, IntensityFrame::new(grid, mm)?))
        } else {
            None
        };

        let mut records = Vec::with_capacity(cfg.modes.len());
        for mode in &cfg.modes {
            let mut steps = Vec::with_capacity(frames);
            let mut pearsons = Vec::with_capacity(frames);
            let mut acc = Array2::<f64>::zeros((grid.ny, grid.nx));
            let mut k_used = None;

            let mut score = |recon: PhaseMap| -> Result<()> {
                steps.push(phase_step_estimate(&recon, &roi_in, &roi_out)?);
                pearsons.push(truth_corr(&recon)?);
                acc += &recon.data;
                Ok(())
            };

            match mode {
                AcquisitionMode::Classical => {
                    for rf in &reps {
                        score(reconstruct_phase(
                            &rf.s_plus,
                            &rf.s_minus,
                            ctx.dz_um,
                            ctx.illum_mean,
                            eps,
                        )?)?;
                    }
                }
                AcquisitionMode::Quantum => {
                    let k = match cfg.reconstruction.k_mode {
                        KMode::Calibrated => {
                            calibration.as_ref().expect("calibrated above").k_scalar
                        }
                        KMode::Theory => {
                            (1.0 - ctx.alpha) * eta_theory.expect("computed above")
                        }
                        KMode::Fixed(v) => v,
                    };
                    k_used = Some(k);
                    let (ref_plus, ref_minus) = idler_refs.as_ref().expect("quantum refs");
                    let corr_plus = QuantumCorrection {
                        k: KFactor::Scalar(k),
                        idler_mean: ref_plus.clone(),
                    };
                    let corr_minus = QuantumCorrection {
                        k: KFactor::Scalar(k),
                        idler_mean: ref_minus.clone(),
                    };
                    for rf in &reps {
                        let q_plus = quantum_subtract(&rf.s_plus, &rf.i_plus, &corr_plus)?;
                        let q_minus = quantum_subtract(&rf.s_minus, &rf.i_minus, &corr_minus)?;
                        score(reconstruct_phase(
                            &q_plus,
                            &q_minus,
                            ctx.dz_um,
                            ctx.illum_mean,
                            eps,
                        )?)?;
                    }
                }
                AcquisitionMode::MultiFrame(n_avg) => {
                    let block = multiframe_blocks[n_avg];
                    let sigma_avg = cfg.source.read_noise_e / (*n_avg as f64).sqrt();
                    let averaged: Vec<(IntensityFrame, IntensityFrame)> = (0..frames)
                        .into_par_iter()
                        .map(|rep| -> Result<(IntensityFrame, IntensityFrame)> {
                            let one = |means: &IntensityFrame,
                                       plane: u64|
                             -> Result<IntensityFrame> {
                                let e = cal_events
                                    + block * meas_block
                                    + ((dz_idx * frames + rep) as u64) * 2
                                    + plane;
                                let mut frame = sample_averaged_signal(
                                    means,
                                    *n_avg as u32,
                                    FrameSeed::new(cfg.master_seed, 2 * e),
                                )?;
                                let mut rng =
                                    FrameSeed::new(cfg.master_seed, 2 * e + 1).rng();
                                add_read_noise(&mut frame, sigma_avg, &mut rng)?;
                                filt(&frame)
                            };
                            Ok((one(&ctx.mean_plus, 0)?, one(&ctx.mean_minus, 1)?))
                        })
                        .collect::<Result<_>>()?;
                    for (a_plus, a_minus) in &averaged {
                        score(reconstruct_phase(
                            a_plus,
                            a_minus,
                            ctx.dz_um,
                            ctx.illum_mean,
                            eps,
                        )?)?;
                    }
                }
            }

            acc /= frames as f64;
            records.push(PointRecord {
                mode: *mode,
                dz_um: ctx.dz_um,
                alpha: ctx.alpha,
                k_used,
                step_stats: ensemble_stats(&steps)?,
                pearson_stats: ensemble_stats(&pearsons)?,
                steps,
                pearsons,
                mean_recon: PhaseMap::new(grid, acc)?,
            });
        }
        by_dz_mode.push(records);
    }

    // Mode-major ordering: all defocus values for the first mode, then the
    // next mode, matching the sweep figures.
    let mut points = Vec::with_capacity(n_dz * cfg.modes.len());
    for mode_idx in 0..cfg.modes.len() {
        for dz_records in &by_dz_mode {
            points.push(dz_records[mode_idx].clone());
        }
    }

    let mut files = Vec::new();
    let mut report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.content_hash(),
        modes: cfg.modes.iter().map(|m| m.to_string()).collect(),
        calibration: if has_quantum {
            Some(CalibrationSummary {
                k_scalar: calibration.as_ref().map(|c| c.k_scalar),
                eta_theory: eta_theory.unwrap(),
                n_frames: calibration.as_ref().map(|c| c.n_frames).unwrap_or(0),
            })
        } else {
            None
        },
        files: Vec::new(),
    };

    if let Some(dir) = out_dir {
        let images = dir.join("images");
        std::fs::create_dir_all(&images)?;
        cfg.save(&dir.join("config.json"))?;
        files.push("config.json".to_string());
        io::write_phase_pgm(&images.join("truth_phase.pgm"), truth)?;
        files.push("images/truth_phase.pgm".to_string());
        if let Some(cal) = &calibration {
            let k_frame = IntensityFrame::new(grid, cal.k_map.clone())?;
            io::write_frame_pgm(&images.join("k_map.pgm"), &k_frame)?;
            files.push("images/k_map.pgm".to_string());
        }
        for p in &points {
            let name = format!("recon_mean_{}_dz{}um.pgm", mode_tag(&p.mode), dz_tag(p.dz_um));
            io::write_phase_pgm(&images.join(&name), &p.mean_recon)?;
            files.push(format!("images/{name}"));
        }

        let header: Vec<String> = [
            "mode",
            "dz_um",
            "frames",
            "alpha",
            "k",
            "step_mean_rad",
            "step_std_rad",
            "step_se_rad",
            "pearson_mean",
            "pearson_std",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|p| {
                vec![
                    p.mode.to_string(),
                    io::fmt_float(p.dz_um),
                    format!("{}", p.steps.len()),
                    io::fmt_float(p.alpha),
                    io::fmt_float(p.k_used.unwrap_or(f64::NAN)),
                    io::fmt_float(p.step_stats.mean),
                    io::fmt_float(p.step_stats.std_dev),
                    io::fmt_float(p.step_stats.std_error),
                    io::fmt_float(p.pearson_stats.mean),
                    io::fmt_float(p.pearson_stats.std_dev),
                ]
            })
            .collect();
        io::write_csv(&dir.join("metrics.csv"), &header, &rows)?;
        files.push("metrics.csv".to_string());

        files.push("manifest.json".to_string());
        report.files = files;
        let text = serde_json::to_string_pretty(&report)?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
    }

    Ok(RunOutcome { report, points })
}
