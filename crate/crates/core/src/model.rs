//! Array geometry, propagation distances, steering vectors and snapshot
//! synthesis for a symmetric uniform linear array observed over OFDM
//! subcarriers.
//!
//! Joint space-frequency vectors are laid out subcarrier-major: entry
//! `m * N + n` belongs to subcarrier `m` and antenna `n`.

use std::f64::consts::{FRAC_PI_3, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Geometry of an odd-sized uniform linear array centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n_elements: usize,
    spacing: f64,
    carrier_freq: f64,
}

impl ArrayConfig {
    pub fn new(n_elements: usize, spacing: f64, carrier_freq: f64) -> Result<Self> {
        if n_elements < 3 {
            return Err(invalid("n_elements", format!("{n_elements} < 3")));
        }
        if n_elements.is_multiple_of(2) {
            return Err(invalid(
                "n_elements",
                format!("{n_elements} is even; a symmetric array needs N = 2N'+1"),
            ));
        }
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(invalid(
                "carrier_freq",
                format!("{carrier_freq} is not positive"),
            ));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(invalid("spacing", format!("{spacing} is not positive")));
        }
        Ok(Self {
            n_elements,
            spacing,
            carrier_freq,
        })
    }

    /// Half-wavelength spacing at the carrier.
    pub fn half_wavelength(n_elements: usize, carrier_freq: f64) -> Result<Self> {
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(invalid(
                "carrier_freq",
                format!("{carrier_freq} is not positive"),
            ));
        }
        Self::new(
            n_elements,
            SPEED_OF_LIGHT / carrier_freq / 2.0,
            carrier_freq,
        )
    }

    /// Half-wavelength array whose aperture `(N-1)d` is closest to `aperture`
    /// among odd element counts.
    pub fn with_aperture(aperture: f64, carrier_freq: f64) -> Result<Self> {
        if !(aperture.is_finite() && aperture > 0.0) {
            return Err(invalid("aperture", format!("{aperture} is not positive")));
        }
        let d = SPEED_OF_LIGHT / carrier_freq / 2.0;
        let gaps = (aperture / d / 2.0).round().max(1.0) as usize * 2;
        Self::half_wavelength(gaps + 1, carrier_freq)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// `N'` in `N = 2N' + 1`.
    pub fn half_count(&self) -> usize {
        (self.n_elements - 1) / 2
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn carrier_wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    /// `D = (N-1) d`.
    pub fn aperture(&self) -> f64 {
        (self.n_elements - 1) as f64 * self.spacing
    }

    pub fn rayleigh_distance(&self) -> f64 {
        rayleigh_distance(self)
    }

    /// Signed element index `n - (N-1)/2`.
    pub fn offset(&self, n: usize) -> i64 {
        n as i64 - self.half_count() as i64
    }

    pub fn element_offsets(&self) -> Vec<i64> {
        element_offsets(self)
    }

    /// Element x-coordinates in meters.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_elements)
            .map(|n| self.offset(n) as f64 * self.spacing)
            .collect()
    }
}

impl Default for ArrayConfig {
    /// 127 half-wavelength elements at 28 GHz.
    fn default() -> Self {
        Self::half_wavelength(127, 28e9).expect("valid default array")
    }
}

/// OFDM sensing frame: `M` subcarriers spaced `Δf` above the carrier, `K` symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidebandConfig {
    n_subcarriers: usize,
    subcarrier_spacing: f64,
    n_symbols: usize,
}

impl WidebandConfig {
    pub fn new(n_subcarriers: usize, subcarrier_spacing: f64, n_symbols: usize) -> Result<Self> {
        if n_subcarriers == 0 {
            return Err(invalid("n_subcarriers", "must be at least 1"));
        }
        if n_symbols == 0 {
            return Err(invalid("n_symbols", "must be at least 1"));
        }
        if !(subcarrier_spacing.is_finite() && subcarrier_spacing > 0.0) {
            return Err(invalid(
                "subcarrier_spacing",
                format!("{subcarrier_spacing} is not positive"),
            ));
        }
        Ok(Self {
            n_subcarriers,
            subcarrier_spacing,
            n_symbols,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.subcarrier_spacing
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn with_symbols(self, n_symbols: usize) -> Result<Self> {
        Self::new(self.n_subcarriers, self.subcarrier_spacing, n_symbols)
    }

    /// `B = M Δf`.
    pub fn bandwidth(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing
    }

    /// `c / B`.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / self.bandwidth()
    }

    /// `Δk = 2π Δf / c`.
    pub fn wavenumber_step(&self) -> f64 {
        2.0 * PI * self.subcarrier_spacing / SPEED_OF_LIGHT
    }

    /// `k_m = 2π (f_c + m Δf) / c` for `m = 0..M`.
    pub fn wavenumbers(&self, array: &ArrayConfig) -> Vec<f64> {
        (0..self.n_subcarriers)
            .map(|m| {
                2.0 * PI * (array.carrier_freq() + m as f64 * self.subcarrier_spacing)
                    / SPEED_OF_LIGHT
            })
            .collect()
    }
}

impl Default for WidebandConfig {
    /// 256 subcarriers at 480 kHz (122.88 MHz), 100 symbols.
    fn default() -> Self {
        Self::new(256, 480e3, 100).expect("valid default wideband config")
    }
}

/// A point target in polar coordinates with its complex path gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub range: f64,
    /// Radians from the array axis.
    pub angle: f64,
    pub gain: Complex64,
}

impl Target {
    pub fn new(range: f64, angle: f64, gain: Complex64) -> Self {
        Self { range, angle, gain }
    }

    /// Target with free-space amplitude `c / (4π f_c r)`.
    pub fn with_path_loss(range: f64, angle: f64, array: &ArrayConfig) -> Self {
        Self::new(range, angle, Complex64::new(path_loss(range, array), 0.0))
    }

    pub fn alpha(&self) -> f64 {
        self.angle.cos()
    }

    /// Cartesian position (x along the array axis).
    pub fn position(&self) -> (f64, f64) {
        (self.range * self.angle.cos(), self.range * self.angle.sin())
    }

    /// Checks the radiative near-field window `D < r < R_r` and the
    /// 60°–120° field of view.
    pub fn validate(&self, array: &ArrayConfig) -> Result<()> {
        let (lo, hi) = (array.aperture(), array.rayleigh_distance());
        if !(self.range > lo && self.range < hi) {
            return Err(invalid(
                "range",
                format!(
                    "{} m outside the near-field window ({lo}, {hi})",
                    self.range
                ),
            ));
        }
        if !(self.angle > FRAC_PI_3 && self.angle < 2.0 * FRAC_PI_3) {
            return Err(invalid(
                "angle",
                format!(
                    "{}° outside the 60°–120° field of view",
                    self.angle.to_degrees()
                ),
            ));
        }
        Ok(())
    }
}

/// `c / (4π f_c r)`.
pub fn path_loss(range: f64, array: &ArrayConfig) -> f64 {
    SPEED_OF_LIGHT / (4.0 * PI * array.carrier_freq() * range)
}

/// Wavefront model used to compute per-element path lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WavefrontModel {
    /// Spherical wavefront, exact element distances.
    Exact,
    /// Second-order Taylor expansion of the element distance.
    Fresnel,
    /// Planar wavefront: `r - δ_n d cos θ`.
    Planar,
}

impl fmt::Display for WavefrontModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Fresnel => "fresnel",
            Self::Planar => "planar",
        })
    }
}

impl FromStr for WavefrontModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "fresnel" => Ok(Self::Fresnel),
            "planar" => Ok(Self::Planar),
            other => Err(invalid(
                "model",
                format!("unknown wavefront model `{other}`"),
            )),
        }
    }
}

pub fn element_offsets(array: &ArrayConfig) -> Vec<i64> {
    (0..array.n_elements()).map(|n| array.offset(n)).collect()
}

#[inline]
fn exact_distance_raw(r: f64, cos_theta: f64, x: f64) -> f64 {
    (r * r + x * x - 2.0 * r * x * cos_theta).sqrt()
}

#[inline]
fn fresnel_distance_raw(r0: f64, alpha: f64, x: f64) -> f64 {
    r0 - x * alpha + x * x * (1.0 - alpha * alpha) / (2.0 * r0)
}

/// Distance from element `n` to the target.
pub fn exact_distance(target: &Target, n: usize, array: &ArrayConfig) -> Result<f64> {
    if n >= array.n_elements() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: array.n_elements(),
        });
    }
    let x = array.offset(n) as f64 * array.spacing();
    Ok(exact_distance_raw(target.range, target.angle.cos(), x))
}

/// Fresnel (second-order) approximation of the element distance, with `alpha`
/// the directional cosine.
pub fn fresnel_distance(r0: f64, alpha: f64, n: usize, array: &ArrayConfig) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(invalid("r0", format!("{r0} is not positive")));
    }
    if n >= array.n_elements() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: array.n_elements(),
        });
    }
    let x = array.offset(n) as f64 * array.spacing();
    Ok(fresnel_distance_raw(r0, alpha, x))
}

pub fn rayleigh_distance(array: &ArrayConfig) -> f64 {
    rayleigh_distance_for_aperture(array.aperture(), array.carrier_freq())
}

/// `2 D² / λ_c` for an explicit aperture.
pub fn rayleigh_distance_for_aperture(aperture: f64, carrier_freq: f64) -> f64 {
    2.0 * aperture * aperture * carrier_freq / SPEED_OF_LIGHT
}

/// Per-element path lengths under `model`.
pub(crate) fn path_lengths(
    r: f64,
    theta: f64,
    array: &ArrayConfig,
    model: WavefrontModel,
    out: &mut [f64],
) {
    let alpha = theta.cos();
    let d = array.spacing();
    for (n, rho) in out.iter_mut().enumerate() {
        let x = array.offset(n) as f64 * d;
        *rho = match model {
            WavefrontModel::Exact => exact_distance_raw(r, alpha, x),
            WavefrontModel::Fresnel => fresnel_distance_raw(r, alpha, x),
            WavefrontModel::Planar => r - x * alpha,
        };
    }
}

/// Writes `scale · e^{-j k_m ρ_n}` into `out` (length `N · wavenumbers.len()`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn fill_steering(
    out: &mut [Complex64],
    r: f64,
    theta: f64,
    array: &ArrayConfig,
    wavenumbers: &[f64],
    model: WavefrontModel,
    scale: f64,
    scratch: &mut Vec<f64>,
) {
    let n = array.n_elements();
    debug_assert_eq!(out.len(), n * wavenumbers.len());
    scratch.resize(n, 0.0);
    path_lengths(r, theta, array, model, scratch);
    for (block, &k) in out.chunks_exact_mut(n).zip(wavenumbers) {
        for (z, &rho) in block.iter_mut().zip(scratch.iter()) {
            let (s, c) = (-k * rho).sin_cos();
            *z = Complex64::new(scale * c, scale * s);
        }
    }
}

/// Joint space-frequency steering vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub model: WavefrontModel,
    pub normalized: bool,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `self^H other`.
    pub fn inner(&self, other: &SteeringVector) -> Complex64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Steering vector of a source at `(r, θ)` across all subcarriers.
pub fn steering_vector(
    r: f64,
    theta: f64,
    array: &ArrayConfig,
    wb: &WidebandConfig,
    model: WavefrontModel,
    normalize: bool,
) -> Result<SteeringVector> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid("r", format!("{r} is not a positive range")));
    }
    let ks = wb.wavenumbers(array);
    let len = array.n_elements() * ks.len();
    let scale = if normalize {
        1.0 / (len as f64).sqrt()
    } else {
        1.0
    };
    let mut entries = vec![Complex64::default(); len];
    fill_steering(
        &mut entries,
        r,
        theta,
        array,
        &ks,
        model,
        scale,
        &mut Vec::new(),
    );
    Ok(SteeringVector {
        entries,
        model,
        normalized: normalize,
    })
}

/// Received frame `Y = Σ_p β_p a(r_p, θ_p) s_pᵀ + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    /// `NM × K`.
    pub data: DMatrix<Complex64>,
    /// `P × K` unit-modulus pilots.
    pub pilots: DMatrix<Complex64>,
    pub noise_variance: f64,
}

impl SnapshotMatrix {
    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    /// Same matrix scaled by a complex constant; pilots are left untouched.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            data: self.data.map(|z| z * factor),
            pilots: self.pilots.clone(),
            noise_variance: self.noise_variance * factor.norm_sqr(),
        }
    }
}

/// What the SNR in [`synthesize_snapshots_with`] is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SnrReference {
    /// Mean per-entry power of the noiseless synthesized signal.
    #[default]
    PerEntry,
    /// Fixed noise floor: the SNR holds for a single target with free-space
    /// gain at `range` meters, so farther targets are received weaker.
    NoiseFloor { range: f64 },
}

/// Synthesizes `K` noisy snapshots of the exact wideband near-field model
/// with the SNR measured per entry.
pub fn synthesize_snapshots(
    targets: &[Target],
    array: &ArrayConfig,
    wb: &WidebandConfig,
    snr_db: f64,
    seed: u64,
) -> Result<SnapshotMatrix> {
    synthesize_snapshots_with(targets, array, wb, snr_db, SnrReference::PerEntry, seed)
}

/// Synthesizes `K` noisy snapshots of the exact wideband near-field model.
///
/// Pilots are unit-modulus with a uniform random phase per (symbol, target)
/// and constant across subcarriers. They are drawn before the noise from the
/// same seeded stream. Output is a pure function of the inputs and `seed`.
pub fn synthesize_snapshots_with(
    targets: &[Target],
    array: &ArrayConfig,
    wb: &WidebandConfig,
    snr_db: f64,
    reference: SnrReference,
    seed: u64,
) -> Result<SnapshotMatrix> {
    if targets.is_empty() {
        return Err(invalid("targets", "at least one target is required"));
    }
    if targets.len() >= array.n_elements() {
        return Err(invalid(
            "targets",
            format!(
                "{} targets for a {}-element array",
                targets.len(),
                array.n_elements()
            ),
        ));
    }
    if !snr_db.is_finite() {
        return Err(invalid("snr_db", format!("{snr_db} is not finite")));
    }
    for (i, t) in targets.iter().enumerate() {
        if !(t.range.is_finite() && t.range > 0.0 && t.angle.is_finite()) {
            return Err(invalid(
                "targets",
                format!("target {i} has an invalid position"),
            ));
        }
        for u in &targets[..i] {
            if (u.range - t.range).abs() < 1e-12 && (u.angle - t.angle).abs() < 1e-12 {
                return Err(invalid("targets", format!("target {i} duplicates another")));
            }
        }
    }

    let k_sym = wb.n_symbols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pilots = DMatrix::from_fn(targets.len(), k_sym, |_, _| Complex64::new(0.0, 0.0));
    let mut pilots = pilots;
    for k in 0..k_sym {
        for p in 0..targets.len() {
            let phase: f64 = rng.random::<f64>() * 2.0 * PI;
            pilots[(p, k)] = Complex64::from_polar(1.0, phase);
        }
    }

    let ks = wb.wavenumbers(array);
    let rows = array.n_elements() * ks.len();
    let steering: Vec<Vec<Complex64>> = targets
        .iter()
        .map(|t| {
            let mut a = vec![Complex64::default(); rows];
            fill_steering(
                &mut a,
                t.range,
                t.angle,
                array,
                &ks,
                WavefrontModel::Exact,
                1.0,
                &mut Vec::new(),
            );
            a
        })
        .collect();

    let mut data = DMatrix::from_element(rows, k_sym, Complex64::default());
    for k in 0..k_sym {
        let mut col = data.column_mut(k);
        for (p, (t, a)) in targets.iter().zip(&steering).enumerate() {
            let w = t.gain * pilots[(p, k)];
            for (y, &ai) in col.iter_mut().zip(a) {
                *y += w * ai;
            }
        }
    }

    let signal_power = match reference {
        SnrReference::PerEntry => {
            data.iter().map(|z| z.norm_sqr()).sum::<f64>() / data.len() as f64
        }
        SnrReference::NoiseFloor { range } => {
            if !(range.is_finite() && range > 0.0) {
                return Err(invalid(
                    "snr_reference",
                    format!("range {range} is not positive"),
                ));
            }
            path_loss(range, array).powi(2)
        }
    };
    let noise_variance = signal_power / 10f64.powf(snr_db / 10.0);
    let sigma = (noise_variance / 2.0).sqrt();
    for z in data.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(sigma * re, sigma * im);
    }

    Ok(SnapshotMatrix {
        data,
        pilots,
        noise_variance,
    })
}
