//! Coherence kernels: mutual coherence of steering vectors, its
//! frequency/space factors, Fresnel integrals and the curvature coherence
//! `|F|` that governs how finely the range axis must be sampled.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{SteeringVector, WidebandConfig};

/// Arguments below this magnitude (after reduction modulo 2π) are treated as
/// the removable singularity of a Dirichlet kernel.
pub const DIRICHLET_SINGULARITY: f64 = 1e-12;

/// Default upper end of the ζ search range.
pub const ZETA_MAX: f64 = 200.0;

/// A coherence magnitude clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CoherenceValue(f64);

impl CoherenceValue {
    pub fn new(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<CoherenceValue> for f64 {
    fn from(c: CoherenceValue) -> f64 {
        c.0
    }
}

impl fmt::Display for CoherenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Cosine and sine Fresnel integrals `U(ζ)`, `V(ζ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub u: f64,
    pub v: f64,
}

impl FresnelPair {
    pub fn magnitude(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// `|a^H b|` for two normalized steering vectors.
pub fn mutual_coherence(a: &SteeringVector, b: &SteeringVector) -> Result<CoherenceValue> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    for v in [a, b] {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(invalid("steering vector", format!("norm {n} is not 1")));
        }
    }
    Ok(CoherenceValue::new(a.inner(b).norm()))
}

/// Reduces an angle to `(-π, π]`.
pub(crate) fn wrap_pi(gamma: f64) -> f64 {
    let t = gamma.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// `Σ_{m=0}^{M-1} e^{j m γ}` in closed form.
pub fn dirichlet_sum(m: usize, gamma: f64) -> Complex64 {
    let e = wrap_pi(gamma);
    let mf = m as f64;
    if e.abs() < DIRICHLET_SINGULARITY {
        return Complex64::new(mf, 0.0);
    }
    let ratio = (mf * e / 2.0).sin() / (e / 2.0).sin();
    Complex64::from_polar(ratio, (mf - 1.0) * e / 2.0)
}

/// `|sin(Mγ/2) / sin(γ/2)| / M`, equal to 1 at the singularity.
pub fn dirichlet_magnitude(m: usize, gamma: f64) -> f64 {
    let e = wrap_pi(gamma);
    if e.abs() < DIRICHLET_SINGULARITY {
        return 1.0;
    }
    let mf = m as f64;
    ((mf * e / 2.0).sin() / (e / 2.0).sin()).abs() / mf
}

/// Frequency factor of the coherence for a range offset `delta_r`.
pub fn s_freq(delta_r: f64, wb: &WidebandConfig) -> CoherenceValue {
    CoherenceValue::new(dirichlet_magnitude(
        wb.n_subcarriers(),
        wb.wavenumber_step() * delta_r,
    ))
}

/// Half-wavelength array factor for a directional-cosine offset.
pub fn s_space_linear(delta_alpha: f64, n_elements: usize) -> CoherenceValue {
    CoherenceValue::new(dirichlet_magnitude(n_elements, PI * delta_alpha))
}

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 5.0;

fn fresnel_series(z: f64) -> FresnelPair {
    // Terms of Σ (-1)^n t^n / n! · z / (2n+1) with t = π z² / 2, split by parity.
    let t = PI * z * z / 2.0;
    let mut u = 0.0;
    let mut v = 0.0;
    let mut term = z; // z · t^n / n!
    for n in 0..200usize {
        let c = term / (2 * n + 1) as f64;
        match n % 4 {
            0 => u += c,
            1 => v += c,
            2 => u -= c,
            _ => v -= c,
        }
        term *= t / (n + 1) as f64;
        if term.abs() < 1e-18 && n > 4 {
            break;
        }
    }
    FresnelPair { u, v }
}

fn fresnel_asymptotic(z: f64) -> FresnelPair {
    let x = PI * z * z;
    let inv = 1.0 / x;
    // f = (1/(πz)) Σ (-1)^k (4k-1)!! / x^{2k},  g = (1/(πz)) Σ (-1)^k (4k+1)!! / x^{2k+1}
    let mut f = 0.0;
    let mut g = 0.0;
    let mut tf: f64 = 1.0;
    let mut tg = inv;
    let mut prev = f64::INFINITY;
    for k in 0..60usize {
        let kk = k as f64;
        let mag = tf.abs().max(tg.abs());
        if mag > prev {
            break;
        }
        prev = mag;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        f += sign * tf;
        g += sign * tg;
        if mag < 1e-17 {
            break;
        }
        // (4k+3)!! = (4k-1)!! (4k+1)(4k+3);  (4k+5)!! = (4k+1)!! (4k+3)(4k+5)
        tf *= (4.0 * kk + 1.0) * (4.0 * kk + 3.0) * inv * inv;
        tg *= (4.0 * kk + 3.0) * (4.0 * kk + 5.0) * inv * inv;
    }
    f /= PI * z;
    g /= PI * z;
    let (s, c) = (PI * z * z / 2.0).sin_cos();
    FresnelPair {
        u: 0.5 + f * s - g * c,
        v: 0.5 - f * c - g * s,
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod G7/K15 panel, returning `(kronrod, |kronrod - gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol / 2.0, depth - 1) + rec(f, m, b, tol / 2.0, depth - 1)
    }
    rec(f, a, b, tol, 40)
}

/// `U(ζ) = ∫₀^ζ cos(πκ²/2) dκ` and `V(ζ) = ∫₀^ζ sin(πκ²/2) dκ`.
///
/// Negative arguments use odd symmetry. Absolute error is below 1e-10 on the
/// whole real line.
pub fn fresnel_integrals(zeta: f64) -> FresnelPair {
    if zeta < 0.0 {
        let p = fresnel_integrals(-zeta);
        return FresnelPair { u: -p.u, v: -p.v };
    }
    if zeta <= SERIES_LIMIT {
        fresnel_series(zeta)
    } else if zeta >= ASYMPTOTIC_LIMIT {
        fresnel_asymptotic(zeta)
    } else {
        let base = fresnel_series(SERIES_LIMIT);
        let cos_part = integrate(
            &|k: f64| (PI * k * k / 2.0).cos(),
            SERIES_LIMIT,
            zeta,
            1e-13,
        );
        let sin_part = integrate(
            &|k: f64| (PI * k * k / 2.0).sin(),
            SERIES_LIMIT,
            zeta,
            1e-13,
        );
        FresnelPair {
            u: base.u + cos_part,
            v: base.v + sin_part,
        }
    }
}

/// `|F|` as a function of `ζ = N'·√(2|x|)` via the Fresnel-integral form.
pub fn curvature_coherence_at_zeta(zeta: f64, n_elements: usize) -> CoherenceValue {
    let zeta = zeta.abs();
    if zeta == 0.0 {
        return CoherenceValue::new(1.0);
    }
    let half = ((n_elements - 1) / 2) as f64;
    let p = fresnel_integrals(zeta);
    CoherenceValue::new(2.0 * half / (n_elements as f64 * zeta) * p.magnitude())
}

/// Curvature coherence `|F(x)|` from the Fresnel-integral approximation.
pub fn curvature_coherence(x: f64, n_elements: usize) -> CoherenceValue {
    if x == 0.0 {
        return CoherenceValue::new(1.0);
    }
    let half = ((n_elements - 1) / 2) as f64;
    curvature_coherence_at_zeta(half * (2.0 * x.abs()).sqrt(), n_elements)
}

/// Curvature coherence from the discrete quadratic-phase sum
/// `(1/N)|Σ_{n'} e^{jπ n'² x}|`.
pub fn curvature_coherence_discrete(x: f64, n_elements: usize) -> CoherenceValue {
    let half = ((n_elements - 1) / 2) as i64;
    let s: Complex64 = (-half..=half)
        .map(|n| Complex64::from_polar(1.0, PI * (n * n) as f64 * x))
        .sum();
    CoherenceValue::new(s.norm() / n_elements as f64)
}

/// Which crossing of the oscillating `|F(ζ)| = Δ` curve to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaCrossing {
    /// Smallest ζ where `|F|` first drops below Δ.
    First,
    /// Largest ζ on `[0, ζ_max]` with `|F| ≥ Δ`.
    Last,
}

/// Step of the coarse ζ scan that brackets crossings before bisection.
const ZETA_SCAN_STEP: f64 = 1e-3;

/// Solves `|F(ζ)| = Δ` for the first crossing on `[0, ZETA_MAX]`.
pub fn solve_zeta(delta: f64, n_elements: usize) -> Result<f64> {
    solve_zeta_with(delta, n_elements, ZETA_MAX, ZetaCrossing::First)
}

/// Solves `|F(ζ)| = Δ` on `[0, zeta_max]`, choosing the crossing explicitly.
pub fn solve_zeta_with(
    delta: f64,
    n_elements: usize,
    zeta_max: f64,
    crossing: ZetaCrossing,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} is outside (0, 1)")));
    }
    if n_elements < 3 || n_elements.is_multiple_of(2) {
        return Err(invalid(
            "n_elements",
            format!("{n_elements} must be odd and ≥ 3"),
        ));
    }
    if !(zeta_max > 0.0 && zeta_max.is_finite()) {
        return Err(invalid("zeta_max", format!("{zeta_max} is not positive")));
    }
    let above = |z: f64| curvature_coherence_at_zeta(z, n_elements).value() >= delta;
    let steps = (zeta_max / ZETA_SCAN_STEP).ceil() as usize;
    let h = zeta_max / steps as f64;

    // (lo, hi) with above(lo) and !above(hi)
    let bracket = match crossing {
        ZetaCrossing::First => (1..=steps)
            .map(|i| ((i - 1) as f64 * h, i as f64 * h))
            .find(|&(_, hi)| !above(hi)),
        ZetaCrossing::Last => (1..=steps)
            .rev()
            .map(|i| ((i - 1) as f64 * h, i as f64 * h))
            .find(|&(lo, _)| above(lo)),
    };
    let (mut lo, mut hi) = match bracket {
        Some((lo, hi)) if !above(hi) => (lo, hi),
        Some(_) => {
            return Err(Error::Unsatisfiable(format!(
                "|F| stays above {delta} up to zeta_max = {zeta_max}"
            )))
        }
        None => {
            return Err(Error::Unsatisfiable(format!(
                "|F| stays above {delta} up to zeta_max = {zeta_max}"
            )))
        }
    };
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SPEED_OF_LIGHT;
    use approx::assert_abs_diff_eq;

    #[test]
    fn clamps() {
        assert_eq!(CoherenceValue::new(1.0 + 1e-10).value(), 1.0);
        assert_eq!(CoherenceValue::new(-1e-12).value(), 0.0);
    }

    #[test]
    fn dirichlet_sum_matches_direct() {
        for &gamma in &[0.0, 1e-13, 0.3, -2.0, 7.0, 2.0 * PI, 100.0] {
            for m in [1usize, 2, 7, 64] {
                let direct: Complex64 = (0..m)
                    .map(|i| Complex64::from_polar(1.0, i as f64 * gamma))
                    .sum();
                assert!((dirichlet_sum(m, gamma) - direct).norm() < 1e-9 * m as f64);
            }
        }
    }

    #[test]
    fn s_freq_nulls_and_peak() {
        let wb = WidebandConfig::default();
        assert_eq!(s_freq(0.0, &wb).value(), 1.0);
        let dr = SPEED_OF_LIGHT / wb.bandwidth();
        assert_abs_diff_eq!(s_freq(dr, &wb).value(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s_freq(-3.0 * dr, &wb).value(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s_freq(dr / 2.0, &wb).value(), 2.0 / PI, epsilon = 1e-3);
    }

    #[test]
    fn s_space_nulls() {
        assert_eq!(s_space_linear(0.0, 127).value(), 1.0);
        assert_abs_diff_eq!(
            s_space_linear(2.0 / 127.0, 127).value(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            s_space_linear(1.0 / 127.0, 127).value(),
            2.0 / PI,
            epsilon = 1e-3
        );
    }

    #[test]
    fn fresnel_reference_values() {
        let p = fresnel_integrals(1.0);
        assert_abs_diff_eq!(p.u, 0.779_893_400_376_822_8, epsilon = 1e-12);
        assert_abs_diff_eq!(p.v, 0.438_259_147_390_354_8, epsilon = 1e-12);
        let z = fresnel_integrals(0.0);
        assert_eq!((z.u, z.v), (0.0, 0.0));
        let f = fresnel_integrals(50.0);
        assert!((f.u - 0.5).abs() < 0.01 && (f.v - 0.5).abs() < 0.01);
        let n = fresnel_integrals(-1.0);
        assert_eq!((n.u, n.v), (-p.u, -p.v));
    }

    #[test]
    fn fresnel_branches_are_continuous() {
        for &z in &[SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
            let a = fresnel_integrals(z - 1e-12);
            let b = fresnel_integrals(z + 1e-12);
            assert_abs_diff_eq!(a.u, b.u, epsilon = 1e-10);
            assert_abs_diff_eq!(a.v, b.v, epsilon = 1e-10);
        }
    }

    #[test]
    fn curvature_coherence_limits() {
        assert_eq!(curvature_coherence(0.0, 127).value(), 1.0);
        assert_eq!(curvature_coherence_discrete(0.0, 127).value(), 1.0);
        let f = curvature_coherence_at_zeta(6.62, 127).value();
        assert!((f - 0.1).abs() < 0.005, "{f}");
        assert_eq!(
            curvature_coherence(0.01, 127),
            curvature_coherence(-0.01, 127)
        );
    }

    #[test]
    fn solve_zeta_reference_points() {
        let z = solve_zeta(0.5, 127).unwrap();
        assert!((z - 1.55).abs() < 0.05, "{z}");
        let z = solve_zeta(0.1, 127).unwrap();
        assert!((z - 6.62).abs() < 0.1, "{z}");
        assert!(solve_zeta(0.0, 127).is_err());
        assert!(solve_zeta(1.0, 127).is_err());
    }

    #[test]
    fn last_crossing_is_not_before_first() {
        let first = solve_zeta_with(0.1, 127, 50.0, ZetaCrossing::First).unwrap();
        let last = solve_zeta_with(0.1, 127, 50.0, ZetaCrossing::Last).unwrap();
        assert!(last >= first);
        assert!(curvature_coherence_at_zeta(last + 1e-3, 127).value() < 0.1);
    }
}
