//! MUSIC benchmarks: narrowband near-field MUSIC on the subcarrier-averaged
//! spatial covariance, and wideband far-field MUSIC on the full
//! space-frequency covariance with planar steering vectors.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{fill_steering, ArrayConfig, SnapshotMatrix, WavefrontModel, WidebandConfig};
use crate::par;
use crate::recovery::{Estimate, EstimateSet};

/// Floor on the MUSIC denominator.
pub const SPECTRUM_EPSILON: f64 = 1e-12;

/// Default cap on the dimension of the full wideband covariance.
pub const DEFAULT_COVARIANCE_CAP: usize = 4096;

/// Sample covariance with the number of snapshots it was averaged over.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub data: DMatrix<Complex64>,
    pub snapshot_count: usize,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

/// `(1/(MK)) Σ_m Y_m Y_mᴴ` over the `N × K` per-subcarrier blocks.
pub fn spatial_covariance_nb(
    y: &SnapshotMatrix,
    array: &ArrayConfig,
    wb: &WidebandConfig,
) -> Result<CovarianceMatrix> {
    let n = array.n_elements();
    let m = wb.n_subcarriers();
    if y.n_rows() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            actual: y.n_rows(),
        });
    }
    let k = y.n_snapshots();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for sub in 0..m {
        let block = y.data.rows(sub * n, n);
        acc += block * block.adjoint();
    }
    acc /= Complex64::new((m * k) as f64, 0.0);
    hermitize(&mut acc);
    Ok(CovarianceMatrix {
        data: acc,
        snapshot_count: k,
    })
}

/// `(1/K) Y Yᴴ` under the default dimension cap.
pub fn full_covariance_wb(y: &SnapshotMatrix) -> Result<CovarianceMatrix> {
    full_covariance_wb_capped(y, DEFAULT_COVARIANCE_CAP)
}

/// `(1/K) Y Yᴴ`, refusing dimensions above `cap`.
pub fn full_covariance_wb_capped(y: &SnapshotMatrix, cap: usize) -> Result<CovarianceMatrix> {
    let n = y.n_rows();
    if n > cap {
        return Err(Error::CapacityExceeded {
            what: "wideband covariance dimension",
            requested: n,
            cap,
        });
    }
    let k = y.n_snapshots();
    let mut r = &y.data * y.data.adjoint();
    r /= Complex64::new(k as f64, 0.0);
    hermitize(&mut r);
    Ok(CovarianceMatrix {
        data: r,
        snapshot_count: k,
    })
}

fn hermitize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Eigen-split of a covariance into signal and noise parts.
///
/// The signal basis is always stored. The noise basis is stored when it came
/// out of a full eigendecomposition and is otherwise completed on request.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSubspace {
    dim: usize,
    signal_basis: DMatrix<Complex64>,
    signal_values: Vec<f64>,
    noise_basis: Option<DMatrix<Complex64>>,
    noise_values: Vec<f64>,
}

impl NoiseSubspace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source_count(&self) -> usize {
        self.signal_basis.ncols()
    }

    /// `U_s`, `n × p`, columns sorted by descending eigenvalue.
    pub fn signal_basis(&self) -> &DMatrix<Complex64> {
        &self.signal_basis
    }

    pub fn signal_values(&self) -> &[f64] {
        &self.signal_values
    }

    /// Noise eigenvalues in descending order. The low-rank route only knows
    /// the nonzero ones and pads with zeros.
    pub fn noise_values(&self) -> &[f64] {
        &self.noise_values
    }

    /// `U_n`, `n × (n - p)` with orthonormal columns.
    pub fn basis(&self) -> DMatrix<Complex64> {
        match &self.noise_basis {
            Some(b) => b.clone(),
            None => orthonormal_complement(&self.signal_basis),
        }
    }

    /// `aᴴ U_n U_nᴴ a`, computed as `‖a‖² - ‖U_sᴴ a‖²`.
    pub fn projection(&self, a: &[Complex64]) -> f64 {
        let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let signal: f64 = self
            .signal_basis
            .column_iter()
            .map(|u| {
                u.iter()
                    .zip(a)
                    .map(|(ui, ai)| ui.conj() * ai)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum();
        (total - signal).max(0.0)
    }
}

fn orthonormal_complement(q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = q.nrows();
    let mut cols: Vec<DVector<Complex64>> = q.column_iter().map(|c| c.into_owned()).collect();
    let p = cols.len();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(n);
        v[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols[p..])
}

/// Hermitian eigendecomposition with eigenpairs sorted by descending value.
fn sorted_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Splits `r` into its `p` dominant eigenvectors and the remaining noise
/// subspace.
pub fn noise_subspace(r: &CovarianceMatrix, p: usize) -> Result<NoiseSubspace> {
    let n = r.dim();
    if p == 0 || p >= n {
        return Err(invalid("p", format!("{p} is outside 1..{n}")));
    }
    let (values, vectors) = sorted_eigen(&r.data);
    Ok(NoiseSubspace {
        dim: n,
        signal_basis: vectors.columns(0, p).into_owned(),
        signal_values: values[..p].to_vec(),
        noise_basis: Some(vectors.columns(p, n - p).into_owned()),
        noise_values: values[p..].to_vec(),
    })
}

/// Noise subspace of `(1/K) Y Yᴴ` obtained from the `K × K` Gram matrix
/// `(1/K) Yᴴ Y`, which shares its nonzero eigenvalues. Used when `NM ≫ K`.
pub fn noise_subspace_from_snapshots(y: &SnapshotMatrix, p: usize) -> Result<NoiseSubspace> {
    let (n, k) = y.data.shape();
    if p == 0 || p >= n {
        return Err(invalid("p", format!("{p} is outside 1..{n}")));
    }
    if p > k {
        return Err(invalid("p", format!("{p} sources from {k} snapshots")));
    }
    let mut gram = y.data.adjoint() * &y.data;
    gram /= Complex64::new(k as f64, 0.0);
    hermitize(&mut gram);
    let (values, vectors) = sorted_eigen(&gram);
    let mut signal = DMatrix::<Complex64>::zeros(n, p);
    for (i, &value) in values.iter().take(p).enumerate() {
        if !(value > 0.0) {
            return Err(Error::RankDeficient { atom: i });
        }
        let mut u = &y.data * vectors.column(i);
        // Re-orthogonalize against earlier columns to absorb rounding.
        for j in 0..i {
            let c = signal.column(j).dotc(&u);
            u -= signal.column(j) * c;
        }
        let norm = u.norm();
        signal.set_column(i, &(u / Complex64::new(norm, 0.0)));
    }
    let mut noise_values: Vec<f64> = values[p..].iter().map(|v| v.max(0.0)).collect();
    noise_values.resize(n - p, 0.0);
    Ok(NoiseSubspace {
        dim: n,
        signal_basis: signal,
        signal_values: values[..p].to_vec(),
        noise_basis: None,
        noise_values,
    })
}

/// Angle and range axes of a 2-D spectrum search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchAxes {
    pub theta_deg: Vec<f64>,
    pub range_m: Vec<f64>,
}

impl SearchAxes {
    pub fn new(theta_deg: Vec<f64>, range_m: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("theta_deg", &theta_deg), ("range_m", &range_m)] {
            if axis.is_empty() {
                return Err(invalid(name, "empty axis"));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid(name, "axis is not strictly increasing"));
            }
        }
        if range_m[0] <= 0.0 {
            return Err(invalid("range_m", "ranges must be positive"));
        }
        Ok(Self { theta_deg, range_m })
    }

    /// Uniform angles `[lo, hi]` with `step` degrees and `n_ranges`
    /// log-spaced ranges over `[r_min, r_max]`.
    pub fn uniform_log(
        theta_lo: f64,
        theta_hi: f64,
        step: f64,
        r_min: f64,
        r_max: f64,
        n_ranges: usize,
    ) -> Result<Self> {
        if !(step > 0.0 && theta_hi >= theta_lo) {
            return Err(invalid("theta_step", "need step > 0 and hi ≥ lo"));
        }
        if !(r_min > 0.0 && r_max > r_min) || n_ranges < 2 {
            return Err(invalid("range", "need 0 < r_min < r_max and ≥ 2 points"));
        }
        let n_theta = ((theta_hi - theta_lo) / step + 1e-9).floor() as usize + 1;
        let theta = (0..n_theta).map(|i| theta_lo + i as f64 * step).collect();
        Self::new(theta, log_space(r_min, r_max, n_ranges))
    }

    /// 60°–120° in 0.1° steps, 64 log-spaced ranges over `[r_min, r_max]`.
    pub fn default_for(r_min: f64, r_max: f64) -> Result<Self> {
        Self::uniform_log(60.0, 120.0, 0.1, r_min, r_max, 64)
    }

    pub fn n_cells(&self) -> usize {
        self.theta_deg.len() * self.range_m.len()
    }
}

/// `n` points geometrically spaced from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Pseudo-spectrum sampled on a [`SearchAxes`] grid. `values[(i, j)]` belongs
/// to `theta_axis[i]`, `range_axis[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub theta_axis: Vec<f64>,
    pub range_axis: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl Spectrum {
    /// Values in dB relative to the spectrum maximum.
    pub fn to_db(&self) -> DMatrix<f64> {
        let peak = self.values.max();
        self.values.map(|v| 10.0 * (v / peak).log10())
    }

    /// Writes `theta_deg,range_m,value_db` rows, angle-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let db = self.to_db();
        writeln!(w, "theta_deg,range_m,value_db")?;
        for (i, t) in self.theta_axis.iter().enumerate() {
            for (j, r) in self.range_axis.iter().enumerate() {
                writeln!(w, "{t},{r},{}", db[(i, j)])?;
            }
        }
        Ok(())
    }
}

fn evaluate_spectrum<F>(
    axes: &SearchAxes,
    rows: usize,
    un: &NoiseSubspace,
    fill: F,
) -> Result<Spectrum>
where
    F: Fn(&mut [Complex64], f64, f64, &mut Vec<f64>) + Sync + Send,
{
    if un.dim() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: un.dim(),
        });
    }
    let nr = axes.range_m.len();
    let per_theta = par::map_slice(&axes.theta_deg, |&deg| {
        let theta = deg * PI / 180.0;
        let mut a = vec![Complex64::default(); rows];
        let mut scratch = Vec::new();
        axes.range_m
            .iter()
            .map(|&r| {
                fill(&mut a, r, theta, &mut scratch);
                1.0 / un.projection(&a).max(SPECTRUM_EPSILON)
            })
            .collect::<Vec<_>>()
    });
    let flat: Vec<f64> = per_theta.into_iter().flatten().collect();
    Ok(Spectrum {
        theta_axis: axes.theta_deg.clone(),
        range_axis: axes.range_m.clone(),
        values: DMatrix::from_row_slice(axes.theta_deg.len(), nr, &flat),
    })
}

/// NB-NF MUSIC with unit-norm exact-model steering vectors at the carrier.
pub fn music_spectrum_nbnf(
    un: &NoiseSubspace,
    axes: &SearchAxes,
    array: &ArrayConfig,
) -> Result<Spectrum> {
    let n = array.n_elements();
    let k = [array.carrier_wavenumber()];
    let scale = 1.0 / (n as f64).sqrt();
    evaluate_spectrum(axes, n, un, |a, r, theta, s| {
        fill_steering(a, r, theta, array, &k, WavefrontModel::Exact, scale, s)
    })
}

/// WB-FF MUSIC with unit-norm planar wideband steering vectors.
///
/// The planar response factors as `e^{-j k_m r} · e^{j k_m x_n α}`, so for a
/// fixed angle the projections `u_iᴴ a` reduce to an `M`-term sum per range.
pub fn music_spectrum_wbff(
    un: &NoiseSubspace,
    axes: &SearchAxes,
    array: &ArrayConfig,
    wb: &WidebandConfig,
) -> Result<Spectrum> {
    let rows = array.n_elements() * wb.n_subcarriers();
    if un.dim() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: un.dim(),
        });
    }
    let ks = wb.wavenumbers(array);
    let per_theta = par::map_slice(&axes.theta_deg, |&deg| {
        let folded = fold_planar_angle(un, array, &ks, deg.to_radians());
        axes.range_m
            .iter()
            .map(|&r| 1.0 / planar_projection(&folded, &ks, r).max(SPECTRUM_EPSILON))
            .collect::<Vec<_>>()
    });
    let flat: Vec<f64> = per_theta.into_iter().flatten().collect();
    Ok(Spectrum {
        theta_axis: axes.theta_deg.clone(),
        range_axis: axes.range_m.clone(),
        values: DMatrix::from_row_slice(axes.theta_deg.len(), axes.range_m.len(), &flat),
    })
}

/// `c[i][m] = Σ_n conj(u_i[m, n]) e^{j k_m x_n α} / √(NM)` for each signal
/// eigenvector `u_i`.
fn fold_planar_angle(
    un: &NoiseSubspace,
    array: &ArrayConfig,
    ks: &[f64],
    theta: f64,
) -> Vec<Vec<Complex64>> {
    let n = array.n_elements();
    let alpha = theta.cos();
    let scale = 1.0 / ((n * ks.len()) as f64).sqrt();
    let xs = array.positions();
    let mut phase = vec![Complex64::default(); n];
    let mut folded = vec![vec![Complex64::default(); ks.len()]; un.source_count()];
    for (m, &k) in ks.iter().enumerate() {
        for (p, &x) in phase.iter_mut().zip(&xs) {
            *p = Complex64::from_polar(scale, k * x * alpha);
        }
        for (i, u) in un.signal_basis.column_iter().enumerate() {
            folded[i][m] = u
                .rows(m * n, n)
                .iter()
                .zip(&phase)
                .map(|(ui, p)| ui.conj() * p)
                .sum();
        }
    }
    folded
}

fn planar_projection(folded: &[Vec<Complex64>], ks: &[f64], r: f64) -> f64 {
    let delay: Vec<Complex64> = ks
        .iter()
        .map(|&k| Complex64::from_polar(1.0, -k * r))
        .collect();
    let signal: f64 = folded
        .iter()
        .map(|c| {
            c.iter()
                .zip(&delay)
                .map(|(a, b)| a * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    (1.0 - signal).max(0.0)
}

/// NB-NF pseudo-spectrum at a single point.
pub fn nbnf_value(un: &NoiseSubspace, array: &ArrayConfig, r: f64, theta: f64) -> f64 {
    let n = array.n_elements();
    let mut a = vec![Complex64::default(); n];
    fill_steering(
        &mut a,
        r,
        theta,
        array,
        &[array.carrier_wavenumber()],
        WavefrontModel::Exact,
        1.0 / (n as f64).sqrt(),
        &mut Vec::new(),
    );
    1.0 / un.projection(&a).max(SPECTRUM_EPSILON)
}

/// WB-FF pseudo-spectrum at a single point.
pub fn wbff_value(
    un: &NoiseSubspace,
    array: &ArrayConfig,
    wb: &WidebandConfig,
    r: f64,
    theta: f64,
) -> f64 {
    let ks = wb.wavenumbers(array);
    let folded = fold_planar_angle(un, array, &ks, theta);
    1.0 / planar_projection(&folded, &ks, r).max(SPECTRUM_EPSILON)
}

/// Local zoom search around each estimate: `rounds` passes over a 9×9
/// patch spanning one search cell on either side, shrinking the patch by 4×
/// per pass. Angles stay inside the axis span; ranges stay positive.
pub fn refine_peaks<F>(
    f: F,
    estimates: &EstimateSet,
    axes: &SearchAxes,
    rounds: usize,
) -> EstimateSet
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    const SIDE: usize = 9;
    let theta_step = axis_step(&axes.theta_deg).to_radians();
    let range_ratio = axis_ratio(&axes.range_m);
    let (t_lo, t_hi) = (
        axes.theta_deg[0].to_radians(),
        axes.theta_deg[axes.theta_deg.len() - 1].to_radians(),
    );
    let refined = par::map_slice(&estimates.estimates, |est| {
        let (mut theta, mut r) = (est.angle, est.range);
        let mut best = f(r, theta);
        let (mut dt, mut lr) = (theta_step, range_ratio.ln());
        for _ in 0..rounds {
            let (c_theta, c_r) = (theta, r);
            for i in 0..SIDE {
                let t =
                    (c_theta + dt * (2.0 * i as f64 / (SIDE - 1) as f64 - 1.0)).clamp(t_lo, t_hi);
                for j in 0..SIDE {
                    let rr = c_r * (lr * (2.0 * j as f64 / (SIDE - 1) as f64 - 1.0)).exp();
                    let v = f(rr, t);
                    if v > best {
                        best = v;
                        theta = t;
                        r = rr;
                    }
                }
            }
            dt /= 4.0;
            lr /= 4.0;
        }
        Estimate {
            range: r,
            angle: theta,
        }
    });
    EstimateSet { estimates: refined }
}

fn axis_step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        0.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

fn axis_ratio(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        (axis[axis.len() - 1] / axis[0]).powf(1.0 / (axis.len() - 1) as f64)
    }
}

/// The `p` largest strict 8-neighbourhood local maxima, descending by value
/// with ties broken by row-major index. Missing peaks are filled from the
/// largest remaining cells.
pub fn find_peaks(spec: &Spectrum, p: usize) -> Result<EstimateSet> {
    let (nt, nr) = spec.values.shape();
    if nt == 0 || nr == 0 {
        return Err(invalid("spectrum", "empty spectrum"));
    }
    if p == 0 {
        return Err(invalid("p", "need at least one peak"));
    }
    let v = &spec.values;
    let mut maxima = Vec::new();
    for i in 0..nt {
        for j in 0..nr {
            let x = v[(i, j)];
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nt as i64 || jj >= nr as i64 {
                        continue;
                    }
                    if v[(ii as usize, jj as usize)] >= x {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                maxima.push((x, i * nr + j));
            }
        }
    }
    let by_value = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    maxima.sort_by(by_value);
    maxima.truncate(p);
    if maxima.len() < p {
        let chosen: Vec<usize> = maxima.iter().map(|m| m.1).collect();
        let mut rest: Vec<(f64, usize)> = (0..nt * nr)
            .filter(|idx| !chosen.contains(idx))
            .map(|idx| (v[(idx / nr, idx % nr)], idx))
            .collect();
        rest.sort_by(by_value);
        maxima.extend(rest.into_iter().take(p - chosen.len()));
    }
    Ok(EstimateSet {
        estimates: maxima
            .into_iter()
            .map(|(_, idx)| Estimate {
                range: spec.range_axis[idx % nr],
                angle: spec.theta_axis[idx / nr].to_radians(),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum_from(values: DMatrix<f64>) -> Spectrum {
        let (nt, nr) = values.shape();
        Spectrum {
            theta_axis: (0..nt).map(|i| 60.0 + i as f64).collect(),
            range_axis: (0..nr).map(|j| 1.0 + j as f64).collect(),
            values,
        }
    }

    #[test]
    fn single_peak() {
        let mut v = DMatrix::from_element(5, 6, 1.0);
        v[(2, 3)] = 9.0;
        let e = find_peaks(&spectrum_from(v), 1).unwrap();
        assert_eq!(e.estimates[0].range, 4.0);
        assert!((e.estimates[0].angle.to_degrees() - 62.0).abs() < 1e-12);
    }

    #[test]
    fn equal_peaks_keep_linear_order_and_fill() {
        let mut v = DMatrix::from_element(5, 6, 0.0);
        v[(3, 4)] = 5.0;
        v[(0, 1)] = 5.0;
        v[(4, 0)] = 1.0;
        let e = find_peaks(&spectrum_from(v), 4).unwrap();
        assert_eq!(e.estimates[0].range, 2.0);
        assert_eq!(e.estimates[1].range, 5.0);
        assert_eq!(e.estimates[2].range, 1.0);
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn plateaus_are_not_strict_maxima() {
        let v = DMatrix::from_element(3, 3, 2.0);
        let e = find_peaks(&spectrum_from(v), 1).unwrap();
        // filled from the largest cell, lowest index
        assert_eq!(e.estimates[0].range, 1.0);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(0.5, 50.0, 5);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[4], 50.0);
        assert!((v[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn default_axes_shape() {
        let a = SearchAxes::default_for(1.0, 80.0).unwrap();
        assert_eq!(a.theta_deg.len(), 601);
        assert_eq!(a.range_m.len(), 64);
        assert!((a.theta_deg[600] - 120.0).abs() < 1e-9);
        assert!(SearchAxes::new(vec![1.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn complement_is_orthonormal() {
        let mut q = DMatrix::<Complex64>::zeros(4, 1);
        for i in 0..4 {
            q[(i, 0)] = Complex64::new(0.5, 0.0);
        }
        let c = orthonormal_complement(&q);
        assert_eq!(c.shape(), (4, 3));
        let g = c.adjoint() * &c;
        assert!((g - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((q.adjoint() * &c).norm() < 1e-12);
    }
}
