//! Hybrid angle–distance sampling grid and the exact-wavefront dictionary
//! built on it.
//!
//! Angles are sampled uniformly in the directional cosine at the array-factor
//! null spacing `2/N`. For each angle, distance rings are generated outside-in
//! from `r_max`: the ideal inverse-distance rings `G_Δ(1-α²)/l` are snapped
//! onto the lattice `r_max - kΔr`, so every pair of atoms is separated by an
//! integer number of range-resolution cells.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coherence::solve_zeta;
use crate::error::{invalid, Error, Result};
use crate::model::{fill_steering, ArrayConfig, WavefrontModel, WidebandConfig};
use crate::par;

/// Default cap on `NM·Q` complex entries in an assembled dictionary.
pub const DEFAULT_DICTIONARY_CAP: usize = 1 << 28;

/// Parameters of the non-uniform distance sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingPolicy {
    pub coherence_threshold: f64,
    pub zeta_delta: f64,
    /// `G_Δ = D² / (2 ζ_Δ² λ_c)`.
    pub g_delta: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl RingPolicy {
    /// Policy for coherence threshold `delta` over the radiative near-field
    /// window `[D, 2D²/λ_c]`.
    pub fn new(delta: f64, array: &ArrayConfig) -> Result<Self> {
        let zeta = solve_zeta(delta, array.n_elements())?;
        Self::from_parts(
            delta,
            zeta,
            g_delta(zeta, array),
            array.aperture(),
            array.rayleigh_distance(),
        )
    }

    /// Policy with every field given explicitly.
    pub fn from_parts(
        coherence_threshold: f64,
        zeta_delta: f64,
        g_delta: f64,
        r_min: f64,
        r_max: f64,
    ) -> Result<Self> {
        if !(coherence_threshold > 0.0 && coherence_threshold < 1.0) {
            return Err(invalid(
                "coherence_threshold",
                format!("{coherence_threshold} is outside (0, 1)"),
            ));
        }
        if !(zeta_delta.is_finite() && zeta_delta > 0.0) {
            return Err(invalid(
                "zeta_delta",
                format!("{zeta_delta} is not positive"),
            ));
        }
        if !(g_delta.is_finite() && g_delta > 0.0) {
            return Err(invalid("g_delta", format!("{g_delta} is not positive")));
        }
        let policy = Self {
            coherence_threshold,
            zeta_delta,
            g_delta,
            r_min: 1.0,
            r_max: 2.0,
        };
        policy.with_window(r_min, r_max)
    }

    /// Replaces the `[r_min, r_max]` window.
    pub fn with_window(self, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min.is_finite() && r_min > 0.0) {
            return Err(invalid("r_min", format!("{r_min} is not positive")));
        }
        if !(r_max.is_finite() && r_max > r_min) {
            return Err(invalid(
                "r_max",
                format!("{r_max} is not above r_min = {r_min}"),
            ));
        }
        Ok(Self {
            r_min,
            r_max,
            ..self
        })
    }
}

/// `D² / (2 ζ² λ_c)`.
pub fn g_delta(zeta: f64, array: &ArrayConfig) -> f64 {
    let d = array.aperture();
    d * d / (2.0 * zeta * zeta * array.wavelength())
}

/// One dictionary atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub alpha: f64,
    pub range: f64,
    /// Index `l` of the ideal ring this atom was snapped from.
    pub ring_index: usize,
    pub angle_index: usize,
}

impl Atom {
    /// Angle from the array axis, radians.
    pub fn theta(&self) -> f64 {
        self.alpha.acos()
    }
}

/// Atoms ordered by angle index, then outside-in by range.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub atoms: Vec<Atom>,
    /// Angular pitch `2/N` in the directional cosine.
    pub alpha_pitch: f64,
    /// Range lattice pitch `c/B`.
    pub range_pitch: f64,
    pub policy: RingPolicy,
}

impl PolarGrid {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of atoms per angle index, for every angle in the angle grid.
    pub fn rings_per_angle(&self, n_angles: usize) -> Vec<usize> {
        let mut counts = vec![0; n_angles];
        for a in &self.atoms {
            counts[a.angle_index] += 1;
        }
        counts
    }

    /// Writes the grid as CSV (`angle_index,ring_index,alpha,theta_deg,range_m`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "angle_index,ring_index,alpha,theta_deg,range_m")?;
        for a in &self.atoms {
            writeln!(
                w,
                "{},{},{},{},{}",
                a.angle_index,
                a.ring_index,
                a.alpha,
                a.theta().to_degrees(),
                a.range
            )?;
        }
        Ok(())
    }
}

/// Directional cosines `-1/2 + (2n'+1)/N` for `n' = 0..⌊N/2⌋`.
pub fn angle_grid(array: &ArrayConfig) -> Vec<f64> {
    angle_grid_for(array.n_elements())
}

/// Angle grid for an arbitrary element count (even counts included).
pub fn angle_grid_for(n_elements: usize) -> Vec<f64> {
    let n = n_elements as f64;
    (0..n_elements / 2)
        .map(|i| -0.5 + (2 * i + 1) as f64 / n)
        .collect()
}

/// Distance rings for directional cosine `alpha`, with the range pitch taken
/// from the bandwidth of `wb`.
pub fn distance_rings(
    alpha: f64,
    policy: &RingPolicy,
    wb: &WidebandConfig,
) -> Result<Vec<(usize, f64)>> {
    distance_rings_with_pitch(alpha, policy, wb.range_resolution())
}

/// Outside-in ring recursion with an explicit range pitch `delta_r`.
///
/// Returns `(l, r'_l)` pairs with strictly decreasing ranges. After the first
/// ring the ideal candidate is also capped at the range whose inverse lies
/// `1/(G_Δ(1-α²))` above that of the previous aligned ring, so consecutive
/// rings always satisfy the inverse-gap bound. An empty list means no lattice
/// point `r_max - kΔr` fits above `r_min`.
pub fn distance_rings_with_pitch(
    alpha: f64,
    policy: &RingPolicy,
    delta_r: f64,
) -> Result<Vec<(usize, f64)>> {
    if !(alpha.abs() < 1.0) {
        return Err(invalid("alpha", format!("|{alpha}| is not below 1")));
    }
    if !(delta_r.is_finite() && delta_r > 0.0) {
        return Err(invalid("delta_r", format!("{delta_r} is not positive")));
    }
    let scale = policy.g_delta * (1.0 - alpha * alpha);
    let mut rings = Vec::new();
    let mut steps: u64 = 0;
    let mut prev = policy.r_max;
    let mut l = ((scale / policy.r_max).ceil() as usize).max(1);
    loop {
        let mut ideal = scale / l as f64;
        if !rings.is_empty() {
            // Keep the inverse-distance gap to the previous aligned ring.
            ideal = ideal.min(1.0 / (1.0 / prev + 1.0 / scale));
        }
        let k = ((prev - ideal) / delta_r).ceil().max(1.0) as u64;
        steps += k;
        let r = policy.r_max - steps as f64 * delta_r;
        if r < policy.r_min {
            break;
        }
        rings.push((l, r));
        prev = r;
        l += 1;
    }
    Ok(rings)
}

/// Builds the hybrid polar grid over every angle of the angle grid.
pub fn build_grid(
    array: &ArrayConfig,
    wb: &WidebandConfig,
    policy: &RingPolicy,
) -> Result<PolarGrid> {
    let alphas = angle_grid(array);
    let per_angle = par::map_slice(&alphas, |&alpha| distance_rings(alpha, policy, wb));
    let mut atoms = Vec::new();
    for (angle_index, (rings, &alpha)) in per_angle.into_iter().zip(&alphas).enumerate() {
        for (ring_index, range) in rings? {
            atoms.push(Atom {
                alpha,
                range,
                ring_index,
                angle_index,
            });
        }
    }
    if atoms.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(PolarGrid {
        atoms,
        alpha_pitch: 2.0 / array.n_elements() as f64,
        range_pitch: wb.range_resolution(),
        policy: *policy,
    })
}

/// Upper bound `⌊N/2⌋·(⌊(r_max - r_min)/Δr⌋ + 1)` on the grid cardinality.
pub fn grid_size_cap(array: &ArrayConfig, wb: &WidebandConfig, policy: &RingPolicy) -> usize {
    let per_angle = ((policy.r_max - policy.r_min) / wb.range_resolution()).floor() as usize + 1;
    array.n_elements() / 2 * per_angle
}

/// Range-atom count of a uniform grid with step `epsilon` on `[r_min, r_max]`.
pub fn uniform_range_count(r_min: f64, r_max: f64, epsilon: f64) -> usize {
    ((r_max - r_min) / epsilon).floor() as usize + 1
}

/// Ideal inverse-distance rings `G_Δ(1-α²)/l` inside `[r_min, r_max]`,
/// without bandwidth snapping.
pub fn fresnel_rings(alpha: f64, policy: &RingPolicy) -> Vec<(usize, f64)> {
    let scale = policy.g_delta * (1.0 - alpha * alpha);
    let first = ((scale / policy.r_max).ceil() as usize).max(1);
    let last = (scale / policy.r_min).floor() as usize;
    (first..=last).map(|l| (l, scale / l as f64)).collect()
}

/// Exact-wavefront dictionary with unit-norm columns, one per grid atom.
#[derive(Debug, Clone)]
pub struct Dictionary {
    /// `NM × Q`.
    pub matrix: DMatrix<Complex64>,
    pub grid: PolarGrid,
}

impl Dictionary {
    pub fn n_atoms(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Assembles the dictionary under the default entry cap.
pub fn build_dictionary(
    grid: &PolarGrid,
    array: &ArrayConfig,
    wb: &WidebandConfig,
) -> Result<Dictionary> {
    build_dictionary_capped(grid, array, wb, DEFAULT_DICTIONARY_CAP)
}

/// Assembles the dictionary, rejecting it when `NM·Q` exceeds `cap`.
pub fn build_dictionary_capped(
    grid: &PolarGrid,
    array: &ArrayConfig,
    wb: &WidebandConfig,
    cap: usize,
) -> Result<Dictionary> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows = array.n_elements() * wb.n_subcarriers();
    let requested = rows.saturating_mul(grid.len());
    if requested > cap {
        return Err(Error::CapacityExceeded {
            what: "dictionary",
            requested,
            cap,
        });
    }
    let ks = wb.wavenumbers(array);
    let scale = 1.0 / (rows as f64).sqrt();
    let mut data = vec![Complex64::default(); requested];
    par::for_each_chunk(&mut data, rows, |q, col| {
        let atom = &grid.atoms[q];
        let mut scratch = Vec::new();
        fill_steering(
            col,
            atom.range,
            atom.theta(),
            array,
            &ks,
            WavefrontModel::Exact,
            scale,
            &mut scratch,
        );
    });
    Ok(Dictionary {
        matrix: DMatrix::from_vec(rows, grid.len(), data),
        grid: grid.clone(),
    })
}

fn polar_cost(grid: &PolarGrid, atom: &Atom, alpha: f64, r: f64) -> f64 {
    let da = (atom.alpha - alpha) / grid.alpha_pitch;
    let dr = (atom.range - r) / grid.range_pitch;
    da * da + dr * dr
}

/// Index of the atom closest to `(r, θ)` in the pitch-normalized metric
/// `(Δα / (2/N))² + (Δr / (c/B))²`. Ties go to the lowest index.
pub fn grid_nearest(grid: &PolarGrid, r: f64, theta: f64) -> Result<usize> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let alpha = theta.cos();
    let atoms = &grid.atoms;
    let mut best: Option<(f64, usize)> = None;
    let mut start = 0;
    while start < atoms.len() {
        let angle = atoms[start].angle_index;
        let end = start + atoms[start..].partition_point(|a| a.angle_index == angle);
        let block = &atoms[start..end];
        // Ranges decrease within a block; `pos` is the first ring inside `r`.
        let pos = block.partition_point(|a| a.range > r);
        for i in [pos.wrapping_sub(1), pos] {
            if let Some(atom) = block.get(i) {
                let cost = polar_cost(grid, atom, alpha, r);
                let idx = start + i;
                if best.is_none_or(|(c, j)| cost < c || (cost == c && idx < j)) {
                    best = Some((cost, idx));
                }
            }
        }
        start = end;
    }
    Ok(best.expect("non-empty grid").1)
}
