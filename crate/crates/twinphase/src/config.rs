//! Experiment configuration: JSON-serialisable description of a full run.
//!
//! A configuration fully determines an experiment given a master seed, so a
//! config file plus the library version is a complete provenance record. The
//! canonical content hash ([`ExperimentConfig::content_hash`]) is invariant
//! under key reordering and whitespace in the JSON file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::metrics::Roi;
use crate::optics::PAD;
use crate::samples::SampleSpec;
use crate::twinbeam::SourceModel;

/// Illumination envelope on the signal arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IlluminationSpec {
    /// Gaussian intensity envelope; `fwhm_um` is the intensity FWHM.
    Gaussian { fwhm_um: f64 },
    /// Flat illumination across the frame.
    Uniform,
}

impl Default for IlluminationSpec {
    fn default() -> Self {
        // Wide envelope: ~4x the default frame extent, so the frame sees a
        // gentle dome rather than a hard beam edge.
        IlluminationSpec::Gaussian { fwhm_um: 1600.0 }
    }
}

/// How intensity frames are acquired and combined before phase retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcquisitionMode {
    /// Signal-arm frames only.
    Classical,
    /// Signal frames with the heralded-idler noise subtraction applied.
    Quantum,
    /// Mean of `n` classical frames per defocus plane (frame averaging).
    MultiFrame(usize),
}

impl fmt::Display for AcquisitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcquisitionMode::Classical => write!(f, "classical"),
            AcquisitionMode::Quantum => write!(f, "quantum"),
            AcquisitionMode::MultiFrame(n) => write!(f, "multi_frame({n})"),
        }
    }
}

impl FromStr for AcquisitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "classical" => Ok(AcquisitionMode::Classical),
            "quantum" => Ok(AcquisitionMode::Quantum),
            _ => {
                if let Some(inner) = s.strip_prefix("multi_frame(").and_then(|r| r.strip_suffix(')'))
                {
                    let n: usize = inner.trim().parse().map_err(|_| {
                        Error::Config(format!("bad frame count in mode '{s}'"))
                    })?;
                    if n == 0 {
                        return Err(Error::Config("multi_frame(0) is empty".into()));
                    }
                    Ok(AcquisitionMode::MultiFrame(n))
                } else {
                    Err(Error::Config(format!(
                        "unknown mode '{s}' (expected classical, quantum or multi_frame(N))"
                    )))
                }
            }
        }
    }
}

impl Serialize for AcquisitionMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AcquisitionMode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the subtraction gain `k` is chosen in quantum mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KMode {
    /// Pooled empirical `cov/var` from a calibration ensemble.
    Calibrated,
    /// Closed-form `(1 - alpha) * eta` from the source model.
    Theory,
    /// A fixed user-supplied gain.
    Fixed(f64),
}

impl Default for KMode {
    fn default() -> Self {
        KMode::Calibrated
    }
}

impl fmt::Display for KMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KMode::Calibrated => write!(f, "calibrated"),
            KMode::Theory => write!(f, "theory"),
            KMode::Fixed(v) => write!(f, "fixed({v})"),
        }
    }
}

impl FromStr for KMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "calibrated" => Ok(KMode::Calibrated),
            "theory" => Ok(KMode::Theory),
            _ => {
                if let Some(inner) = s.strip_prefix("fixed(").and_then(|r| r.strip_suffix(')')) {
                    let v: f64 = inner
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad gain in '{s}'")))?;
                    Ok(KMode::Fixed(v))
                } else {
                    Err(Error::Config(format!(
                        "unknown k mode '{s}' (expected calibrated, theory or fixed(V))"
                    )))
                }
            }
        }
    }
}

impl Serialize for KMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KMode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Phase-retrieval settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructionOptions {
    /// Low-frequency regularisation strength (0 = pure inverse Laplacian).
    pub regularization_eps: f64,
    /// Subtraction gain policy for quantum mode.
    pub k_mode: KMode,
    /// Focal-plane twin frames used to estimate the subtraction gain.
    pub calibration_frames: usize,
    /// Border excluded from correlation metrics, pixels.
    pub border_px: usize,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions {
            regularization_eps: 0.0,
            k_mode: KMode::Calibrated,
            calibration_frames: 100,
            border_px: 4,
        }
    }
}

/// Explicit readout-region override (otherwise the sample's defaults apply).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiPair {
    pub roi_in: Roi,
    pub roi_out: Roi,
}

/// Complete description of a simulated acquisition campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: Grid,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default)]
    pub source: SourceModel,
    #[serde(default)]
    pub illumination: IlluminationSpec,
    /// Defocus distances to sweep, micrometres (one acquisition per value).
    pub defocus_um: Vec<f64>,
    /// Independent repetitions per defocus value.
    pub frames_per_point: usize,
    /// Averaging-filter size applied to every frame before retrieval.
    #[serde(default = "default_filter")]
    pub filter_px: usize,
    pub modes: Vec<AcquisitionMode>,
    #[serde(default)]
    pub reconstruction: ReconstructionOptions,
    /// Optional readout-region override for the step estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rois: Option<RoiPair>,
    pub master_seed: u64,
}

fn default_filter() -> usize {
    4
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: Grid::new(80, 80, 5.0, 0.810).unwrap(),
            sample: SampleSpec::default(),
            source: SourceModel::default(),
            illumination: IlluminationSpec::default(),
            defocus_um: vec![25.0, 50.0, 100.0, 150.0, 250.0, 400.0, 500.0],
            frames_per_point: 100,
            filter_px: 4,
            modes: vec![AcquisitionMode::Classical, AcquisitionMode::Quantum],
            reconstruction: ReconstructionOptions::default(),
            rois: None,
            master_seed: 7,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        // Re-run the grid invariants; the fields may have come from JSON.
        Grid::new(self.grid.nx, self.grid.ny, self.grid.pitch_um, self.grid.wavelength_um)?;
        self.source.validate()?;
        match self.illumination {
            IlluminationSpec::Gaussian { fwhm_um } => {
                if !(fwhm_um.is_finite() && fwhm_um > 0.0) {
                    return Err(Error::Config(format!("illumination fwhm_um = {fwhm_um}")));
                }
            }
            IlluminationSpec::Uniform => {}
        }
        if self.defocus_um.is_empty() {
            return Err(Error::Config("defocus_um list is empty".into()));
        }
        let max_dz = self.grid.max_defocus_um(PAD);
        for &dz in &self.defocus_um {
            if !(dz.is_finite() && dz > 0.0) {
                return Err(Error::Config(format!("defocus_um entry {dz} must be positive")));
            }
            if dz > max_dz {
                return Err(Error::AliasingBound { dz_um: dz, max_dz_um: max_dz });
            }
        }
        if self.frames_per_point == 0 {
            return Err(Error::Config("frames_per_point must be >= 1".into()));
        }
        if self.filter_px == 0 {
            return Err(Error::Config("filter_px must be >= 1 (1 = no filtering)".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("modes list is empty".into()));
        }
        for m in &self.modes {
            if let AcquisitionMode::MultiFrame(0) = m {
                return Err(Error::Config("multi_frame(0) is empty".into()));
            }
        }
        let r = &self.reconstruction;
        if !(r.regularization_eps.is_finite() && r.regularization_eps >= 0.0) {
            return Err(Error::Config(format!(
                "regularization_eps = {} must be finite and >= 0",
                r.regularization_eps
            )));
        }
        let has_quantum = self.modes.iter().any(|m| *m == AcquisitionMode::Quantum);
        if has_quantum && r.k_mode == KMode::Calibrated && r.calibration_frames < 2 {
            return Err(Error::Config(
                "calibrated gain needs calibration_frames >= 2".into(),
            ));
        }
        if has_quantum && self.frames_per_point < 2 {
            return Err(Error::Config(
                "quantum mode needs frames_per_point >= 2: the idler reference \
                 is the ensemble-mean idler frame"
                    .into(),
            ));
        }
        if let KMode::Fixed(v) = r.k_mode {
            if !v.is_finite() {
                return Err(Error::Config(format!("fixed gain {v} must be finite")));
            }
        }
        if 2 * r.border_px >= self.grid.nx.min(self.grid.ny) {
            return Err(Error::Config(format!(
                "border_px {} leaves no interior on {}x{}",
                r.border_px, self.grid.nx, self.grid.ny
            )));
        }
        if let Some(pair) = &self.rois {
            pair.roi_in.check_fits(&self.grid)?;
            pair.roi_out.check_fits(&self.grid)?;
            if pair.roi_in.overlaps(&pair.roi_out) {
                return Err(Error::Config("override rois overlap".into()));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_pretty()? + "\n")?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form. Stable under key reordering
    /// and formatting of the source file: the config is converted to a JSON
    /// value whose object keys serialise in sorted order.
    pub fn content_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serialises");
        let canonical = serde_json::to_string(&value).expect("value serialises");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            write!(out, "{byte:02x}").unwrap();
        }
        out
    }
}
