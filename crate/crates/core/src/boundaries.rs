//! Regime boundaries: how far the narrowband near-field model stays accurate
//! under wideband excitation, and how far out the wideband far-field model
//! becomes accurate.
//!
//! `corr_nbnf` is the normalized correlation between the wideband near-field
//! response and its single-frequency counterpart. `corr_wbff` is the
//! correlation between the wideband near-field response and its planar
//! approximation, which isolates the residual wavefront curvature.

use std::f64::consts::FRAC_PI_3;

use crate::coherence::{dirichlet_sum, CoherenceValue};
use crate::error::{invalid, Error, Result};
use crate::model::{ArrayConfig, WavefrontModel, WidebandConfig, SPEED_OF_LIGHT};
use crate::par;

/// Minimum number of scan points in a [`BoundaryQuery`].
pub const MIN_SCAN_POINTS: usize = 64;

/// Default number of log-spaced scan points.
pub const DEFAULT_SCAN_POINTS: usize = 2048;

/// Default lower end of the search window, meters.
pub const DEFAULT_R_LO: f64 = 1e-2;

/// Default target angle for boundary evaluation (60°).
pub const DEFAULT_BOUNDARY_THETA: f64 = FRAC_PI_3;

/// Relative tolerance of the bisection refinement.
const BISECTION_RTOL: f64 = 1e-9;

/// Threshold search request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryQuery {
    /// Radians.
    pub theta: f64,
    pub threshold: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub scan_points: usize,
    /// Distance model inside the correlation (Fresnel by default).
    pub model: WavefrontModel,
}

impl BoundaryQuery {
    pub fn new(
        theta: f64,
        threshold: f64,
        r_lo: f64,
        r_hi: f64,
        scan_points: usize,
    ) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid(
                "threshold",
                format!("{threshold} is outside (0, 1)"),
            ));
        }
        if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) {
            return Err(invalid(
                "window",
                format!("need 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"),
            ));
        }
        if scan_points < MIN_SCAN_POINTS {
            return Err(invalid(
                "scan_points",
                format!("{scan_points} < {MIN_SCAN_POINTS}"),
            ));
        }
        if !theta.is_finite() {
            return Err(invalid("theta", "not finite"));
        }
        Ok(Self {
            theta,
            threshold,
            r_lo,
            r_hi,
            scan_points,
            model: WavefrontModel::Fresnel,
        })
    }

    /// Window `[1 cm, min(10·R_r, c/(2Δf))]`. The upper limit stays below the
    /// first range alias of the subcarrier comb at `c/Δf`, where the
    /// narrowband correlation returns to 1.
    pub fn for_nbnf(
        theta: f64,
        threshold: f64,
        array: &ArrayConfig,
        wb: &WidebandConfig,
    ) -> Result<Self> {
        let alias = SPEED_OF_LIGHT / (2.0 * wb.subcarrier_spacing());
        let hi = (10.0 * array.rayleigh_distance()).min(alias);
        Self::new(theta, threshold, DEFAULT_R_LO, hi, DEFAULT_SCAN_POINTS)
    }

    /// Window `[1 cm, 10·R_r]`.
    pub fn for_wbff(theta: f64, threshold: f64, array: &ArrayConfig) -> Result<Self> {
        Self::new(
            theta,
            threshold,
            DEFAULT_R_LO,
            10.0 * array.rayleigh_distance(),
            DEFAULT_SCAN_POINTS,
        )
    }

    pub fn with_model(self, model: WavefrontModel) -> Result<Self> {
        if model == WavefrontModel::Planar {
            return Err(invalid(
                "model",
                "boundary correlations need a curved wavefront",
            ));
        }
        Ok(Self { model, ..self })
    }

    fn scan_grid(&self) -> Vec<f64> {
        crate::subspace::log_space(self.r_lo, self.r_hi, self.scan_points)
    }
}

fn element_distance(r: f64, alpha: f64, x: f64, model: WavefrontModel) -> f64 {
    match model {
        WavefrontModel::Exact => (r * r + x * x - 2.0 * r * x * alpha).sqrt(),
        _ => r - x * alpha + x * x * (1.0 - alpha * alpha) / (2.0 * r),
    }
}

/// Correlation between the wideband near-field response and the
/// single-frequency response at `f_c`, Fresnel distances.
pub fn corr_nbnf(r: f64, theta: f64, array: &ArrayConfig, wb: &WidebandConfig) -> CoherenceValue {
    corr_nbnf_model(r, theta, array, wb, WavefrontModel::Fresnel)
}

/// [`corr_nbnf`] with a selectable distance model.
pub fn corr_nbnf_model(
    r: f64,
    theta: f64,
    array: &ArrayConfig,
    wb: &WidebandConfig,
    model: WavefrontModel,
) -> CoherenceValue {
    let alpha = theta.cos();
    let dk = wb.wavenumber_step();
    let m = wb.n_subcarriers();
    let d = array.spacing();
    let sum: num_complex::Complex64 = (0..array.n_elements())
        .map(|n| {
            let psi = element_distance(r, alpha, array.offset(n) as f64 * d, model);
            dirichlet_sum(m, dk * psi)
        })
        .sum();
    CoherenceValue::new(sum.norm() / (array.n_elements() * m) as f64)
}

/// Correlation between the wideband near-field response and its planar
/// approximation, Fresnel distances.
pub fn corr_wbff(r: f64, theta: f64, array: &ArrayConfig, wb: &WidebandConfig) -> CoherenceValue {
    corr_wbff_model(r, theta, array, wb, WavefrontModel::Fresnel)
}

/// [`corr_wbff`] with a selectable distance model. The residual path length
/// is the model distance minus the planar distance `r - xα`.
pub fn corr_wbff_model(
    r: f64,
    theta: f64,
    array: &ArrayConfig,
    wb: &WidebandConfig,
    model: WavefrontModel,
) -> CoherenceValue {
    let alpha = theta.cos();
    let dk = wb.wavenumber_step();
    let kc = array.carrier_wavenumber();
    let m = wb.n_subcarriers();
    let d = array.spacing();
    let sum: num_complex::Complex64 = (0..array.n_elements())
        .map(|n| {
            let x = array.offset(n) as f64 * d;
            let resid = match model {
                WavefrontModel::Exact => element_distance(r, alpha, x, model) - (r - x * alpha),
                _ => x * x * (1.0 - alpha * alpha) / (2.0 * r),
            };
            dirichlet_sum(m, dk * resid) * num_complex::Complex64::from_polar(1.0, kc * resid)
        })
        .sum();
    CoherenceValue::new(sum.norm() / (array.n_elements() * m) as f64)
}

fn bisect<F: Fn(f64) -> bool>(mut inside: f64, mut outside: f64, holds: F) -> f64 {
    while (inside - outside).abs() > BISECTION_RTOL * inside.abs().max(outside.abs()) {
        let mid = 0.5 * (inside + outside);
        if holds(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Outermost range at which the narrowband near-field correlation still
/// reaches the threshold.
pub fn r_nbnf_boundary(q: &BoundaryQuery, array: &ArrayConfig, wb: &WidebandConfig) -> Result<f64> {
    let g = |r: f64| corr_nbnf_model(r, q.theta, array, wb, q.model).value();
    let grid = q.scan_grid();
    let values = par::map_slice(&grid, |&r| g(r));
    let Some(i) = values.iter().rposition(|&v| v >= q.threshold) else {
        return Err(Error::Unsatisfiable(format!(
            "NB-NF correlation stays below {} on [{}, {}] m",
            q.threshold, q.r_lo, q.r_hi
        )));
    };
    if i + 1 == grid.len() {
        return Ok(q.r_hi);
    }
    Ok(bisect(grid[i], grid[i + 1], |r| g(r) >= q.threshold))
}

/// Innermost range beyond which the wideband far-field correlation stays at
/// or above the threshold on every scanned point.
pub fn r_wbff_boundary(q: &BoundaryQuery, array: &ArrayConfig, wb: &WidebandConfig) -> Result<f64> {
    let g = |r: f64| corr_wbff_model(r, q.theta, array, wb, q.model).value();
    let grid = q.scan_grid();
    let values = par::map_slice(&grid, |&r| g(r));
    match values.iter().rposition(|&v| v < q.threshold) {
        None => Ok(q.r_lo),
        Some(i) if i + 1 == grid.len() => Err(Error::Unsatisfiable(format!(
            "WB-FF correlation is below {} at r_hi = {} m",
            q.threshold, q.r_hi
        ))),
        Some(i) => Ok(bisect(grid[i + 1], grid[i], |r| g(r) >= q.threshold)),
    }
}

/// Closed-form sufficient distances for the planar wideband model:
/// `(MΔk(1-α²)(N'd)²/(4π), (1-α²)D²/(4λ_c))`.
pub fn sufficient_bounds_wbff(theta: f64, array: &ArrayConfig, wb: &WidebandConfig) -> (f64, f64) {
    let alpha = theta.cos();
    let s = (1.0 - alpha * alpha).max(0.0);
    let half = array.half_count() as f64 * array.spacing();
    let m_dk = wb.n_subcarriers() as f64 * wb.wavenumber_step();
    let r_dirichlet = m_dk * s * half * half / (4.0 * std::f64::consts::PI);
    let d = array.aperture();
    let r_fresnel = s * d * d / (4.0 * array.wavelength());
    (r_dirichlet, r_fresnel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn single_subcarrier_nbnf_is_one() {
        let a = ArrayConfig::default();
        let wb = WidebandConfig::new(1, 480e3, 1).unwrap();
        for r in [0.1, 1.0, 50.0] {
            assert_eq!(corr_nbnf(r, 1.1, &a, &wb).value(), 1.0);
        }
    }

    #[test]
    fn wbff_degenerate_cases() {
        let a = ArrayConfig::default();
        let wb = WidebandConfig::default();
        assert!((corr_wbff(1e9, 1.2, &a, &wb).value() - 1.0).abs() < 1e-9);
        assert!((corr_wbff(1.0, 0.0, &a, &wb).value() - 1.0).abs() < 1e-12);
        assert_eq!(sufficient_bounds_wbff(0.0, &a, &wb), (0.0, 0.0));
    }

    #[test]
    fn fresnel_bound_at_broadside() {
        let a = ArrayConfig::default();
        let wb = WidebandConfig::default();
        let (_, rf) = sufficient_bounds_wbff(FRAC_PI_2, &a, &wb);
        let d = a.aperture();
        assert!((rf - d * d / (4.0 * a.wavelength())).abs() < 1e-12);
    }

    #[test]
    fn query_validation() {
        assert!(BoundaryQuery::new(1.0, 1.0, 0.1, 1.0, 64).is_err());
        assert!(BoundaryQuery::new(1.0, 0.9, 1.0, 0.1, 64).is_err());
        assert!(BoundaryQuery::new(1.0, 0.9, 0.1, 1.0, 10).is_err());
        let q = BoundaryQuery::new(1.0, 0.9, 0.1, 1.0, 64).unwrap();
        assert!(q.with_model(WavefrontModel::Planar).is_err());
    }

    #[test]
    fn unsatisfiable_window() {
        let a = ArrayConfig::default();
        let wb = WidebandConfig::default();
        let q = BoundaryQuery::new(FRAC_PI_3, 0.9, 0.01, 0.1, 64).unwrap();
        assert!(matches!(
            r_wbff_boundary(&q, &a, &wb),
            Err(Error::Unsatisfiable(_))
        ));
    }
}
