//! Command-line front end for the twin-beam phase imaging simulator.
//!
//! Subcommands cover the full workflow: `sweep` runs a configured defocus
//! sweep and writes metrics, `simulate` emits raw twin-beam frame bundles,
//! `reconstruct` turns a defocused intensity pair back into a phase map,
//! `calibrate` estimates the idler-subtraction gain, `sample` renders the
//! phase target, and `plot` charts a sweep's metrics as an SVG.
//!
//! Exit codes: 0 on success, 2 for configuration/format errors, 3 for
//! numeric-domain errors (aliasing bound, degenerate variance), 1 otherwise.

mod plot;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use twinphase::config::{
    AcquisitionMode, ExperimentConfig, IlluminationSpec, KMode, ReconstructionOptions,
};
use twinphase::error::{Error, Result};
use twinphase::experiment::{
    calibrate, illumination_field, reconstruct_phase, run_experiment, PointRecord,
};
use twinphase::io::{
    read_frame_pgm, read_twin_frames, write_map_csv, write_phase_csv, write_phase_pgm,
    write_twin_frames,
};
use twinphase::optics::defocused_intensities;
use twinphase::quantum::{quantum_subtract, KFactor, QuantumCorrection};
use twinphase::samples::{render_sample, SampleSpec};
use twinphase::twinbeam::{add_read_noise, averaging_filter, sample_twin_frames, FrameSeed};
use twinphase::{Grid, IntensityFrame, PhaseMap};

#[derive(Parser)]
#[command(
    name = "twinphase",
    version,
    about = "Quantitative phase imaging simulator with twin-beam noise subtraction",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for frame sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured defocus sweep and write metrics + mean images.
    Sweep(SweepCmd),
    /// Generate raw twin-beam frame bundles at one defocus distance.
    Simulate(SimulateCmd),
    /// Recover a phase map from a defocused intensity pair.
    Reconstruct(ReconstructCmd),
    /// Estimate the idler-subtraction gain from focal-plane twin frames.
    Calibrate(CalibrateCmd),
    /// Render the phase target and its readout regions.
    Sample(SampleCmd),
    /// Chart a sweep's metrics.csv as an SVG figure.
    Plot(plot::PlotCmd),
}

/// Configuration source plus individual field overrides. Flags win over the
/// file; the file wins over built-in defaults.
#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration JSON (otherwise built-in defaults).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Grid width, pixels.
    #[arg(long)]
    nx: Option<usize>,
    /// Grid height, pixels.
    #[arg(long)]
    ny: Option<usize>,
    /// Pixel pitch, micrometres.
    #[arg(long, value_name = "UM")]
    pitch_um: Option<f64>,
    /// Illumination wavelength, micrometres.
    #[arg(long, value_name = "UM")]
    wavelength_um: Option<f64>,

    /// Phase target: pi_glyph, squares, flat, or a phase-map file path.
    #[arg(long)]
    sample: Option<String>,
    /// Feature height of the built-in targets, radians.
    #[arg(long, value_name = "RAD", allow_negative_numbers = true)]
    step_rad: Option<f64>,
    /// Lattice period of the squares target, pixels.
    #[arg(long)]
    period_px: Option<usize>,

    /// Mean detected photons per pixel per frame.
    #[arg(long)]
    n_mean: Option<f64>,
    /// Detection probability per photon.
    #[arg(long)]
    eta0: Option<f64>,
    /// Twin-photon position jitter std, micrometres.
    #[arg(long, value_name = "UM")]
    sigma_corr_um: Option<f64>,
    /// Signal/idler registration offset along x, micrometres.
    #[arg(long, value_name = "UM", allow_negative_numbers = true)]
    misalign_x_um: Option<f64>,
    /// Signal/idler registration offset along y, micrometres.
    #[arg(long, value_name = "UM", allow_negative_numbers = true)]
    misalign_y_um: Option<f64>,
    /// Read noise std, photoelectrons per pixel per frame.
    #[arg(long)]
    read_noise_e: Option<f64>,
    /// Fraction of the pair rate replaced by uncorrelated photons.
    #[arg(long)]
    uncorrelated_fraction: Option<f64>,

    /// Illumination envelope: gaussian or uniform.
    #[arg(long)]
    illumination: Option<String>,
    /// Gaussian envelope FWHM, micrometres.
    #[arg(long, value_name = "UM")]
    fwhm_um: Option<f64>,

    /// Defocus distances, micrometres (comma separated).
    #[arg(long, value_name = "UM,...", value_delimiter = ',', allow_negative_numbers = true)]
    dz_um: Option<Vec<f64>>,
    /// Repetitions per defocus value.
    #[arg(long)]
    frames: Option<usize>,
    /// Averaging-filter size applied before retrieval, pixels (1 = off).
    #[arg(long)]
    filter_px: Option<usize>,
    /// Acquisition modes: classical, quantum, multi_frame(N) (comma separated).
    #[arg(long, value_name = "MODE,...", value_delimiter = ',')]
    modes: Option<Vec<String>>,

    /// Low-frequency regularisation strength.
    #[arg(long)]
    regularization_eps: Option<f64>,
    /// Subtraction gain policy: calibrated, theory, or fixed(V).
    #[arg(long)]
    k_mode: Option<String>,
    /// Focal-plane frames used to estimate the gain.
    #[arg(long)]
    calibration_frames: Option<usize>,
    /// Border excluded from correlation metrics, pixels.
    #[arg(long)]
    border_px: Option<usize>,
}

/// Built-in defaults: the reference sweep of the simulated instrument.
fn base_config() -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        grid: Grid::new(80, 80, 5.0, 0.810)?,
        sample: SampleSpec::default(),
        source: Default::default(),
        illumination: IlluminationSpec::default(),
        defocus_um: vec![25.0, 50.0, 100.0, 150.0, 250.0, 400.0, 500.0],
        frames_per_point: 100,
        filter_px: 4,
        modes: vec![
            AcquisitionMode::Classical,
            AcquisitionMode::Quantum,
            AcquisitionMode::MultiFrame(100),
        ],
        reconstruction: ReconstructionOptions::default(),
        rois: None,
        master_seed: 7,
    })
}

impl ConfigArgs {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => base_config()?,
        };

        if self.nx.is_some()
            || self.ny.is_some()
            || self.pitch_um.is_some()
            || self.wavelength_um.is_some()
        {
            cfg.grid = Grid::new(
                self.nx.unwrap_or(cfg.grid.nx),
                self.ny.unwrap_or(cfg.grid.ny),
                self.pitch_um.unwrap_or(cfg.grid.pitch_um),
                self.wavelength_um.unwrap_or(cfg.grid.wavelength_um),
            )?;
        }

        cfg.sample = self.sample_spec(cfg.sample)?;

        let src = &mut cfg.source;
        if let Some(v) = self.n_mean {
            src.n_mean = v;
        }
        if let Some(v) = self.eta0 {
            src.eta0 = v;
        }
        if let Some(v) = self.sigma_corr_um {
            src.sigma_corr_um = v;
        }
        if let Some(v) = self.misalign_x_um {
            src.misalignment_um[0] = v;
        }
        if let Some(v) = self.misalign_y_um {
            src.misalignment_um[1] = v;
        }
        if let Some(v) = self.read_noise_e {
            src.read_noise_e = v;
        }
        if let Some(v) = self.uncorrelated_fraction {
            src.uncorrelated_fraction = v;
        }

        match self.illumination.as_deref().map(str::trim) {
            None => {
                if let (Some(f), IlluminationSpec::Gaussian { fwhm_um }) =
                    (self.fwhm_um, &mut cfg.illumination)
                {
                    *fwhm_um = f;
                }
            }
            Some("uniform") => cfg.illumination = IlluminationSpec::Uniform,
            Some("gaussian") => {
                let fwhm_um = self.fwhm_um.unwrap_or(match cfg.illumination {
                    IlluminationSpec::Gaussian { fwhm_um } => fwhm_um,
                    IlluminationSpec::Uniform => 1600.0,
                });
                cfg.illumination = IlluminationSpec::Gaussian { fwhm_um };
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown illumination '{other}' (expected gaussian or uniform)"
                )));
            }
        }

        if let Some(v) = &self.dz_um {
            cfg.defocus_um = v.clone();
        }
        if let Some(v) = self.frames {
            cfg.frames_per_point = v;
        }
        if let Some(v) = self.filter_px {
            cfg.filter_px = v;
        }
        if let Some(names) = &self.modes {
            cfg.modes = names
                .iter()
                .map(|s| AcquisitionMode::from_str(s))
                .collect::<Result<_>>()?;
        }

        let rec = &mut cfg.reconstruction;
        if let Some(v) = self.regularization_eps {
            rec.regularization_eps = v;
        }
        if let Some(s) = &self.k_mode {
            rec.k_mode = KMode::from_str(s)?;
        }
        if let Some(v) = self.calibration_frames {
            rec.calibration_frames = v;
        }
        if let Some(v) = self.border_px {
            rec.border_px = v;
        }

        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }

        cfg.validate()?;
        Ok(cfg)
    }

    fn sample_spec(&self, current: SampleSpec) -> Result<SampleSpec> {
        let step_of = |spec: &SampleSpec| match spec {
            SampleSpec::PiGlyph { step_rad } => Some(*step_rad),
            SampleSpec::Squares { step_rad, .. } => Some(*step_rad),
            _ => None,
        };
        let spec = match self.sample.as_deref().map(str::trim) {
            None => current,
            Some("pi_glyph") => SampleSpec::PiGlyph {
                step_rad: step_of(&current).unwrap_or(0.230),
            },
            Some("squares") => SampleSpec::Squares {
                step_rad: step_of(&current).unwrap_or(0.230),
                period_px: match current {
                    SampleSpec::Squares { period_px, .. } => period_px,
                    _ => 16,
                },
            },
            Some("flat") => SampleSpec::Flat,
            Some(path) => SampleSpec::Custom { path: PathBuf::from(path) },
        };
        let spec = match (self.step_rad, spec) {
            (Some(step), SampleSpec::PiGlyph { .. }) => SampleSpec::PiGlyph { step_rad: step },
            (Some(step), SampleSpec::Squares { period_px, .. }) => {
                SampleSpec::Squares { step_rad: step, period_px }
            }
            (Some(_), other) => {
                return Err(Error::Config(format!(
                    "--step-rad does not apply to the '{}' sample",
                    sample_name(&other)
                )));
            }
            (None, spec) => spec,
        };
        match (self.period_px, spec) {
            (Some(p), SampleSpec::Squares { step_rad, .. }) => {
                Ok(SampleSpec::Squares { step_rad, period_px: p })
            }
            (Some(_), other) => Err(Error::Config(format!(
                "--period-px only applies to the squares sample, not '{}'",
                sample_name(&other)
            ))),
            (None, spec) => Ok(spec),
        }
    }
}

fn sample_name(spec: &SampleSpec) -> &'static str {
    match spec {
        SampleSpec::PiGlyph { .. } => "pi_glyph",
        SampleSpec::Squares { .. } => "squares",
        SampleSpec::Flat => "flat",
        SampleSpec::Custom { .. } => "custom",
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory for metrics.csv, manifest.json and images/.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn point_line(p: &PointRecord) -> String {
    let k = match p.k_used {
        Some(k) => format!("{k:.4}"),
        None => "-".into(),
    };
    format!(
        "{:<16} dz={:>6.1} um  alpha={:.4}  k={:<6}  pearson={:.4} +/- {:.4}  step={:.4} +/- {:.4} rad",
        p.mode.to_string(),
        p.dz_um,
        p.alpha,
        k,
        p.pearson_stats.mean,
        p.pearson_stats.std_dev,
        p.step_stats.mean,
        p.step_stats.std_dev,
    )
}

fn cmd_sweep(cmd: &SweepCmd) -> Result<()> {
    let cfg = cmd.cfg.build()?;
    let outcome = run_experiment(&cfg, Some(&cmd.out_dir))?;
    for p in &outcome.points {
        println!("{}", point_line(p));
    }
    if let Some(cal) = &outcome.report.calibration {
        let k = cal.k_scalar.map_or_else(|| "-".into(), |k| format!("{k:.6}"));
        println!("calibration: k = {k} (closed form {:.6})", cal.eta_theory);
    }
    println!(
        "wrote {} files under {}",
        outcome.report.files.len(),
        cmd.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory for the frame bundles.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

/// Emit the raw measurement frames of the first configured defocus value:
/// one `frame_NNNN/{plus,minus}` twin bundle per repetition, drawn from the
/// same deterministic stream layout the sweep uses, so a sweep over the
/// same configuration sees byte-identical photon counts.
fn cmd_simulate(cmd: &SimulateCmd) -> Result<()> {
    let cfg = cmd.cfg.build()?;
    let dz = *cfg
        .defocus_um
        .first()
        .ok_or_else(|| Error::Config("simulate needs at least one defocus value".into()))?;
    let illum = illumination_field(&cfg)?;
    let truth = render_sample(&cfg.sample, cfg.grid)?;
    let (mean_plus, mean_minus, mean_focus) = defocused_intensities(&illum, &truth.phase, dz)?;

    std::fs::create_dir_all(&cmd.out_dir)?;
    cfg.save(&cmd.out_dir.join("config.json"))?;

    // Stream layout shared with the sweep runner: the calibration block is
    // reserved first, then two events (twin draw + read noise) per plane
    // per repetition.
    let cal_events = cfg.reconstruction.calibration_frames as u64;
    let mut files = Vec::new();
    for rep in 0..cfg.frames_per_point {
        let frame_dir = cmd.out_dir.join(format!("frame_{rep:04}"));
        for (plane, means) in [(0u64, &mean_plus), (1u64, &mean_minus)] {
            let event = cal_events + rep as u64 * 2 + plane;
            let mut set = sample_twin_frames(
                means,
                &mean_focus,
                &cfg.source,
                FrameSeed::new(cfg.master_seed, 2 * event),
            )?;
            let mut noise_rng = FrameSeed::new(cfg.master_seed, 2 * event + 1).rng();
            add_read_noise(&mut set.signal, cfg.source.read_noise_e, &mut noise_rng)?;
            add_read_noise(&mut set.idler, cfg.source.read_noise_e, &mut noise_rng)?;
            let dir = frame_dir.join(if plane == 0 { "plus" } else { "minus" });
            write_twin_frames(&dir, &set)?;
            files.push(dir);
        }
    }

    let manifest = serde_json::json!({
        "dz_um": dz,
        "frames": cfg.frames_per_point,
        "config_hash": cfg.content_hash(),
        "layout": "frame_NNNN/{plus,minus}/{signal,idler,mean_signal,mean_idler}.pgm",
        "idler_orientation": "camera (point-reflected relative to the signal)",
    });
    std::fs::write(
        cmd.out_dir.join("simulation.json"),
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format {
            path: "simulation.json".into(),
            reason: e.to_string(),
        })? + "\n",
    )?;

    println!(
        "wrote {} twin bundles ({} frames at dz = {dz} um) under {}",
        files.len(),
        cfg.frames_per_point,
        cmd.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ReconstructCmd {
    /// Over-focus input: intensity PGM, or a twin-bundle directory.
    #[arg(long, value_name = "PATH")]
    plus: PathBuf,
    /// Under-focus input: intensity PGM, or a twin-bundle directory.
    #[arg(long, value_name = "PATH")]
    minus: PathBuf,
    /// Defocus distance of the pair, micrometres.
    #[arg(long, value_name = "UM")]
    dz_um: f64,
    /// Idler-subtraction gain; requires twin-bundle inputs.
    #[arg(long, value_name = "GAIN")]
    k: Option<f64>,
    /// Averaging-filter size applied before retrieval, pixels (1 = off).
    #[arg(long, default_value_t = 4)]
    filter_px: usize,
    /// Mean illumination level (default: mean of the two inputs).
    #[arg(long)]
    illum_mean: Option<f64>,
    /// Low-frequency regularisation strength.
    #[arg(long, default_value_t = 0.0)]
    regularization_eps: f64,
    /// Output phase map; .pgm or .csv decides the format.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

/// I/O failures on user-named inputs become configuration errors with the
/// offending path attached.
pub(crate) fn named_input<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
        other => other,
    })
}

/// Load one retrieval input: a bare intensity frame, or a twin bundle with
/// the idler fluctuation subtracted at gain `k`.
fn load_arm(path: &Path, k: Option<f64>, d: usize) -> Result<IntensityFrame> {
    if path.is_dir() {
        let set = named_input(path, read_twin_frames(path))?;
        let signal = averaging_filter(&set.signal, d)?;
        match k {
            None => Ok(signal),
            Some(k) => {
                let idler = averaging_filter(&set.idler_aligned(), d)?;
                // The stored per-bundle mean is the idler's noiseless mean
                // map; filtering it gives the subtraction reference.
                let reference = averaging_filter(&set.mean_idler.point_reflected(), d)?;
                let corr = QuantumCorrection { k: KFactor::Scalar(k), idler_mean: reference };
                quantum_subtract(&signal, &idler, &corr)
            }
        }
    } else {
        if k.is_some() {
            return Err(Error::Config(format!(
                "--k needs a twin-bundle directory, but {} is a file",
                path.display()
            )));
        }
        averaging_filter(&named_input(path, read_frame_pgm(path))?, d)
    }
}

fn cmd_reconstruct(cmd: &ReconstructCmd) -> Result<()> {
    let plus = load_arm(&cmd.plus, cmd.k, cmd.filter_px)?;
    let minus = load_arm(&cmd.minus, cmd.k, cmd.filter_px)?;
    let illum_mean = cmd
        .illum_mean
        .unwrap_or_else(|| 0.5 * (plus.mean() + minus.mean()));
    let recon = reconstruct_phase(
        &plus,
        &minus,
        cmd.dz_um,
        illum_mean,
        cmd.regularization_eps,
    )?;
    write_phase_map(&cmd.out, &recon)?;
    let (lo, hi) = min_max(&recon);
    println!(
        "reconstructed {}x{} phase map (dz = {} um, illum_mean = {:.3}): range [{:.4}, {:.4}] rad -> {}",
        recon.grid.nx,
        recon.grid.ny,
        cmd.dz_um,
        illum_mean,
        lo,
        hi,
        cmd.out.display()
    );
    Ok(())
}

fn write_phase_map(path: &Path, map: &PhaseMap) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => write_phase_pgm(path, map),
        Some("csv") => write_phase_csv(path, map),
        _ => Err(Error::Config(format!(
            "output extension of {} must be .pgm or .csv",
            path.display()
        ))),
    }
}

fn min_max(map: &PhaseMap) -> (f64, f64) {
    map.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CalibrateCmd {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Also write calibration.json and the per-pixel gain map here.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn cmd_calibrate(cmd: &CalibrateCmd) -> Result<()> {
    let cfg = cmd.cfg.build()?;
    let cal = calibrate(&cfg)?;
    println!("calibration frames : {}", cal.n_frames);
    println!("k (empirical)      : {:.6}", cal.k_scalar);
    println!("k (closed form)    : {:.6}", cal.eta_theory);
    println!(
        "residual shot-noise variance at k: {:.4} of the classical level",
        1.0 - cal.k_scalar * cal.k_scalar
    );
    if let Some(dir) = &cmd.out_dir {
        std::fs::create_dir_all(dir)?;
        let summary = serde_json::json!({
            "n_frames": cal.n_frames,
            "k_scalar": cal.k_scalar,
            "k_closed_form": cal.eta_theory,
            "filter_px": cfg.filter_px,
            "config_hash": cfg.content_hash(),
        });
        std::fs::write(
            dir.join("calibration.json"),
            serde_json::to_string_pretty(&summary).map_err(|e| Error::Format {
                path: "calibration.json".into(),
                reason: e.to_string(),
            })? + "\n",
        )?;
        write_map_csv(&dir.join("k_map.csv"), &cal.k_map)?;
        println!("wrote calibration.json and k_map.csv under {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SampleCmd {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory for the rendered target.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn cmd_sample(cmd: &SampleCmd) -> Result<()> {
    let cfg = cmd.cfg.build()?;
    let sample = render_sample(&cfg.sample, cfg.grid)?;
    std::fs::create_dir_all(&cmd.out_dir)?;
    write_phase_pgm(&cmd.out_dir.join("truth_phase.pgm"), &sample.phase)?;
    write_phase_csv(&cmd.out_dir.join("truth_phase.csv"), &sample.phase)?;
    let roi_json = |r: &twinphase::metrics::Roi| {
        serde_json::json!({ "x0": r.x0, "y0": r.y0, "width": r.width, "height": r.height })
    };
    let info = serde_json::json!({
        "sample": sample_name(&cfg.sample),
        "step_rad": sample.step_rad,
        "grid": { "nx": cfg.grid.nx, "ny": cfg.grid.ny, "pitch_um": cfg.grid.pitch_um },
        "roi_in": roi_json(&sample.roi_in),
        "roi_out": roi_json(&sample.roi_out),
    });
    std::fs::write(
        cmd.out_dir.join("sample.json"),
        serde_json::to_string_pretty(&info).map_err(|e| Error::Format {
            path: "sample.json".into(),
            reason: e.to_string(),
        })? + "\n",
    )?;
    println!(
        "rendered '{}' target ({}x{}, feature height {:.3} rad) under {}",
        sample_name(&cfg.sample),
        cfg.grid.nx,
        cfg.grid.ny,
        sample.step_rad,
        cmd.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn run_cli() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Sweep(cmd) => cmd_sweep(cmd),
        Command::Simulate(cmd) => cmd_simulate(cmd),
        Command::Reconstruct(cmd) => cmd_reconstruct(cmd),
        Command::Calibrate(cmd) => cmd_calibrate(cmd),
        Command::Sample(cmd) => cmd_sample(cmd),
        Command::Plot(cmd) => plot::cmd_plot(cmd),
    }
}

fn main() {
    if let Err(e) = run_cli() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
