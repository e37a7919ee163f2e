//! TOML experiment configuration.
//!
//! Every key is optional; missing keys take the reference defaults listed in
//! the README. Unknown keys are rejected. Parse errors carry the dotted path
//! of the offending field.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wbnf_core::dictionary::RingPolicy;
use wbnf_core::model::{path_loss, SnrReference};
use wbnf_core::{ArrayConfig, Target, WidebandConfig};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub seed: u64,
    pub snr_db: f64,
    /// Range of the fixed-noise-floor SNR reference; per-entry SNR when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_reference_m: Option<f64>,
    pub trials: usize,
    pub array: RawArray,
    pub wideband: RawWideband,
    pub policy: RawPolicy,
    pub targets: Vec<RawTarget>,
    pub sweep: RawSweep,
    pub search: RawSearch,
    pub boundary: RawBoundary,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            snr_db: 0.0,
            snr_reference_m: None,
            trials: 50,
            array: RawArray::default(),
            wideband: RawWideband::default(),
            policy: RawPolicy::default(),
            targets: Vec::new(),
            sweep: RawSweep::default(),
            search: RawSearch::default(),
            boundary: RawBoundary::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawArray {
    pub n_elements: usize,
    pub carrier_freq_hz: f64,
    /// Half a carrier wavelength when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
}

impl Default for RawArray {
    fn default() -> Self {
        Self {
            n_elements: 127,
            carrier_freq_hz: 28e9,
            spacing_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawWideband {
    pub n_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub n_symbols: usize,
}

impl Default for RawWideband {
    fn default() -> Self {
        Self {
            n_subcarriers: 256,
            subcarrier_spacing_hz: 480e3,
            n_symbols: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPolicy {
    pub coherence_threshold: f64,
    /// Aperture `D` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min_m: Option<f64>,
    /// Rayleigh distance when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_m: Option<f64>,
}

impl Default for RawPolicy {
    fn default() -> Self {
        Self {
            coherence_threshold: 0.1,
            r_min_m: None,
            r_max_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTarget {
    pub range_m: f64,
    pub angle_deg: f64,
    /// Complex gain; free-space path loss when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_im: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSweep {
    /// Explicit distances; when empty, `points` log-spaced distances from
    /// `1.1·D` to twice the WB-FF boundary at `angle_deg`.
    pub distances_m: Vec<f64>,
    pub points: usize,
    pub angle_deg: f64,
    pub sources: usize,
    pub angle_spacing_deg: f64,
}

impl Default for RawSweep {
    fn default() -> Self {
        Self {
            distances_m: Vec::new(),
            points: 10,
            angle_deg: 90.0,
            sources: 1,
            angle_spacing_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSearch {
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
    pub range_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_m: Option<f64>,
    pub refine_rounds: usize,
}

impl Default for RawSearch {
    fn default() -> Self {
        Self {
            theta_min_deg: 60.0,
            theta_max_deg: 120.0,
            theta_step_deg: 0.1,
            range_points: 64,
            r_min_m: None,
            r_max_m: None,
            refine_rounds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawBoundary {
    pub theta_deg: f64,
    pub rho: Vec<f64>,
    pub scan_points: usize,
    pub bandwidths_hz: Vec<f64>,
    pub apertures_m: Vec<f64>,
}

impl Default for RawBoundary {
    fn default() -> Self {
        Self {
            theta_deg: 60.0,
            rho: vec![0.5, 0.7, 0.9, 0.95],
            scan_points: 2048,
            bandwidths_hz: (1..=20).map(|i| i as f64 * 5e6).collect(),
            apertures_m: (1..=9).map(|i| i as f64 * 0.2).collect(),
        }
    }
}

/// Distance-sweep descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Empty means automatic spacing.
    pub distances: Vec<f64>,
    pub points: usize,
    /// Radians.
    pub angle: f64,
    pub sources: usize,
    /// Radians.
    pub angle_spacing: f64,
}

/// MUSIC search axes description; ranges default to `[D, R_r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
    pub range_points: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub refine_rounds: usize,
}

/// Boundary sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    /// Radians.
    pub theta: f64,
    pub rho: Vec<f64>,
    pub scan_points: usize,
    pub bandwidths: Vec<f64>,
    pub apertures: Vec<f64>,
}

/// Fully validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub array: ArrayConfig,
    pub wb: WidebandConfig,
    pub policy: RingPolicy,
    pub snr_db: f64,
    pub snr_reference: SnrReference,
    pub seed: u64,
    pub trials: usize,
    pub targets: Vec<Target>,
    pub sweep: SweepSpec,
    pub search: SearchSpec,
    pub boundary: BoundarySpec,
    /// SHA-256 of the canonical TOML form of the resolved raw config.
    pub hash: String,
}

fn field(path: &str, e: wbnf_core::Error) -> HarnessError {
    HarnessError::Config(format!("{path}: {e}"))
}

fn check(cond: bool, path: &str, msg: &str) -> Result<(), HarnessError> {
    if cond {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{path}: {msg}")))
    }
}

impl ExperimentConfig {
    /// Validates a raw document and derives the typed configuration.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, HarnessError> {
        let a = &raw.array;
        let array = match a.spacing_m {
            Some(d) => ArrayConfig::new(a.n_elements, d, a.carrier_freq_hz),
            None => ArrayConfig::half_wavelength(a.n_elements, a.carrier_freq_hz),
        }
        .map_err(|e| field("array", e))?;
        let w = &raw.wideband;
        let wb = WidebandConfig::new(w.n_subcarriers, w.subcarrier_spacing_hz, w.n_symbols)
            .map_err(|e| field("wideband", e))?;

        let p = &raw.policy;
        let r_min = p.r_min_m.unwrap_or(array.aperture());
        let r_max = p.r_max_m.unwrap_or(array.rayleigh_distance());
        let policy = RingPolicy::new(p.coherence_threshold, &array)
            .and_then(|pol| pol.with_window(r_min, r_max))
            .map_err(|e| field("policy", e))?;

        check(raw.snr_db.is_finite(), "snr_db", "must be finite")?;
        let snr_reference = match raw.snr_reference_m {
            None => SnrReference::PerEntry,
            Some(r) => {
                check(
                    r.is_finite() && r > 0.0,
                    "snr_reference_m",
                    "must be positive",
                )?;
                SnrReference::NoiseFloor { range: r }
            }
        };
        check(raw.trials >= 1, "trials", "must be at least 1")?;

        let mut targets = Vec::with_capacity(raw.targets.len());
        for (i, t) in raw.targets.iter().enumerate() {
            let angle = t.angle_deg.to_radians();
            let gain = match (t.gain_re, t.gain_im) {
                (None, None) => Complex64::new(path_loss(t.range_m, &array), 0.0),
                (re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
            };
            let target = Target::new(t.range_m, angle, gain);
            target
                .validate(&array)
                .map_err(|e| field(&format!("targets[{i}]"), e))?;
            targets.push(target);
        }

        let s = &raw.sweep;
        check(s.sources >= 1, "sweep.sources", "must be at least 1")?;
        check(s.points >= 2, "sweep.points", "must be at least 2")?;
        check(
            s.distances_m.iter().all(|d| d.is_finite() && *d > 0.0),
            "sweep.distances_m",
            "distances must be positive",
        )?;
        let sweep = SweepSpec {
            distances: s.distances_m.clone(),
            points: s.points,
            angle: s.angle_deg.to_radians(),
            sources: s.sources,
            angle_spacing: s.angle_spacing_deg.to_radians(),
        };

        let q = &raw.search;
        let search = SearchSpec {
            theta_min_deg: q.theta_min_deg,
            theta_max_deg: q.theta_max_deg,
            theta_step_deg: q.theta_step_deg,
            range_points: q.range_points,
            r_min: q.r_min_m.unwrap_or(array.aperture()),
            r_max: q.r_max_m.unwrap_or(array.rayleigh_distance()),
            refine_rounds: q.refine_rounds,
        };
        let cfg_search = wbnf_core::subspace::SearchAxes::uniform_log(
            search.theta_min_deg,
            search.theta_max_deg,
            search.theta_step_deg,
            search.r_min,
            search.r_max,
            search.range_points,
        );
        cfg_search.map_err(|e| field("search", e))?;

        let b = &raw.boundary;
        check(
            b.rho.iter().all(|r| *r > 0.0 && *r < 1.0) && !b.rho.is_empty(),
            "boundary.rho",
            "thresholds must lie in (0, 1)",
        )?;
        check(
            b.scan_points >= 64,
            "boundary.scan_points",
            "must be at least 64",
        )?;
        check(
            b.bandwidths_hz.iter().all(|v| *v > 0.0),
            "boundary.bandwidths_hz",
            "must be positive",
        )?;
        check(
            b.apertures_m.iter().all(|v| *v > 0.0),
            "boundary.apertures_m",
            "must be positive",
        )?;
        let boundary = BoundarySpec {
            theta: b.theta_deg.to_radians(),
            rho: b.rho.clone(),
            scan_points: b.scan_points,
            bandwidths: b.bandwidths_hz.clone(),
            apertures: b.apertures_m.clone(),
        };

        let canonical = toml::to_string(raw).map_err(|e| HarnessError::Config(e.to_string()))?;
        let hash = Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();

        Ok(Self {
            array,
            wb,
            policy,
            snr_db: raw.snr_db,
            snr_reference,
            seed: raw.seed,
            trials: raw.trials,
            targets,
            sweep,
            search,
            boundary,
            hash,
        })
    }

    pub fn search_axes(&self) -> wbnf_core::Result<wbnf_core::subspace::SearchAxes> {
        let s = &self.search;
        wbnf_core::subspace::SearchAxes::uniform_log(
            s.theta_min_deg,
            s.theta_max_deg,
            s.theta_step_deg,
            s.r_min,
            s.r_max,
            s.range_points,
        )
    }

    /// Same configuration with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Parses a TOML document into a raw config, reporting field paths on error.
pub fn parse_raw(text: &str) -> Result<RawConfig, HarnessError> {
    let de = toml::Deserializer::parse(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        HarnessError::Config(format!("{path}: {}", e.into_inner().message()))
    })
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    ExperimentConfig::from_raw(&parse_raw(text)?)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Desk-scale configuration used for WB-FF MUSIC and NMSE sweeps: 101
/// elements, 32 subcarriers at 3.84 MHz (same bandwidth as the reference
/// system), 100 symbols and a Δ = 0.5 ring policy.
pub const DESK_CONFIG: &str = include_str!("../../../configs/desk.toml");

pub fn desk_config() -> ExperimentConfig {
    parse_config(DESK_CONFIG).expect("bundled desk config is valid")
}
