//! Simultaneous orthogonal matching pursuit over a multi-snapshot frame and
//! the mapping of recovered atoms to position estimates.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dictionary::{Dictionary, PolarGrid};
use crate::error::{invalid, Error, Result};
use crate::model::{SnapshotMatrix, Target};
use crate::par;

/// How per-snapshot correlations are combined into one atom score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// `Σ_k |b^H r_k|`.
    #[default]
    L1,
    /// `(Σ_k |b^H r_k|²)^{1/2}`.
    L2,
}

/// Output of [`somp`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Selected atom indices in selection order.
    pub support: Vec<usize>,
    /// Least-squares coefficients of `Y` on the support, `P × K`.
    pub coefficients: DMatrix<Complex64>,
    /// Frobenius norm of the residual after each iteration.
    pub residual_norms: Vec<f64>,
}

/// Relative norm below which a newly selected atom is considered to lie in
/// the span of the current support.
const RANK_TOL: f64 = 1e-9;

/// Runs SOMP with `ℓ1` score aggregation for exactly `sparsity` iterations.
pub fn somp(y: &SnapshotMatrix, dict: &Dictionary, sparsity: usize) -> Result<RecoveryResult> {
    somp_with(&y.data, &dict.matrix, sparsity, Aggregation::L1)
}

/// SOMP on raw matrices. Columns of `dict` are assumed to have unit norm.
///
/// The correlation matrix `C = Bᴴ R` is kept up to date with a rank-one
/// correction per iteration, so the dictionary is swept once per iteration.
pub fn somp_with(
    y: &DMatrix<Complex64>,
    dict: &DMatrix<Complex64>,
    sparsity: usize,
    aggregation: Aggregation,
) -> Result<RecoveryResult> {
    let (rows, k) = y.shape();
    let q = dict.ncols();
    if dict.nrows() != rows {
        return Err(Error::DimensionMismatch {
            expected: dict.nrows(),
            actual: rows,
        });
    }
    if sparsity == 0 || sparsity >= q.min(rows) {
        return Err(invalid(
            "sparsity",
            format!("{sparsity} is outside 1..min(Q = {q}, NM = {rows})"),
        ));
    }

    // corr[(atom, snapshot)] = b_atomᴴ r_snapshot, stored atom-major.
    let mut corr: Vec<Complex64> = par::map_range(q, |j| {
        let b = dict.column(j);
        (0..k)
            .map(move |s| b.dotc(&y.column(s)))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut residual = y.clone();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(sparsity);
    let mut r_tri = DMatrix::<Complex64>::zeros(sparsity, sparsity);
    let mut support = Vec::with_capacity(sparsity);
    let mut residual_norms = Vec::with_capacity(sparsity);

    for t in 0..sparsity {
        let scores = par::map_range(q, |j| {
            let row = &corr[j * k..(j + 1) * k];
            match aggregation {
                Aggregation::L1 => row.iter().map(|z| z.norm()).sum::<f64>(),
                Aggregation::L2 => row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            }
        });
        let mut best = 0;
        for (j, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = j;
            }
        }
        if support.contains(&best) {
            return Err(Error::RankDeficient { atom: best });
        }

        // Gram–Schmidt with one reorthogonalization pass.
        let b = dict.column(best);
        let mut u: Vec<Complex64> = b.iter().copied().collect();
        let b_norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for _ in 0..2 {
            for (i, e) in basis.iter().enumerate() {
                let c: Complex64 = e.iter().zip(&u).map(|(a, b)| a.conj() * b).sum();
                r_tri[(i, t)] += c;
                for (ui, ei) in u.iter_mut().zip(e) {
                    *ui -= c * ei;
                }
            }
        }
        let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(nu > RANK_TOL * b_norm) {
            return Err(Error::RankDeficient { atom: best });
        }
        for z in u.iter_mut() {
            *z /= nu;
        }
        r_tri[(t, t)] = Complex64::new(nu, 0.0);

        // z = uᴴ R, then R ← R - u z and C ← C - (Bᴴ u) z.
        let z: Vec<Complex64> = (0..k)
            .map(|s| {
                residual
                    .column(s)
                    .iter()
                    .zip(&u)
                    .map(|(r, ui)| ui.conj() * r)
                    .sum()
            })
            .collect();
        for (s, &zs) in z.iter().enumerate() {
            for (r, ui) in residual.column_mut(s).iter_mut().zip(&u) {
                *r -= ui * zs;
            }
        }
        let bu = par::map_range(q, |j| {
            dict.column(j)
                .iter()
                .zip(&u)
                .map(|(b, ui)| b.conj() * ui)
                .sum::<Complex64>()
        });
        par::for_each_chunk(&mut corr, k, |j, row| {
            for (c, zs) in row.iter_mut().zip(&z) {
                *c -= bu[j] * zs;
            }
        });

        basis.push(u);
        support.push(best);
        residual_norms.push(residual.norm());
    }

    // X = R⁻¹ Qᴴ Y by back substitution.
    let p = sparsity;
    let mut coefficients = DMatrix::<Complex64>::zeros(p, k);
    for s in 0..k {
        let col = y.column(s);
        let mut rhs: Vec<Complex64> = basis
            .iter()
            .map(|e| e.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum())
            .collect();
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for j in i + 1..p {
                acc -= r_tri[(i, j)] * coefficients[(j, s)];
            }
            rhs[i] = acc / r_tri[(i, i)];
            coefficients[(i, s)] = rhs[i];
        }
    }

    Ok(RecoveryResult {
        support,
        coefficients,
        residual_norms,
    })
}

/// A position estimate in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub range: f64,
    /// Radians from the array axis.
    pub angle: f64,
}

impl Estimate {
    pub fn position(&self) -> (f64, f64) {
        (self.range * self.angle.cos(), self.range * self.angle.sin())
    }
}

/// Ordered list of estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateSet {
    pub estimates: Vec<Estimate>,
}

impl EstimateSet {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

/// Maps support indices to the `(r, arccos α)` of their atoms.
pub fn extract_estimates(result: &RecoveryResult, grid: &PolarGrid) -> Result<EstimateSet> {
    let estimates = result
        .support
        .iter()
        .map(|&i| {
            grid.atoms
                .get(i)
                .map(|a| Estimate {
                    range: a.range,
                    angle: a.theta(),
                })
                .ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: grid.len(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateSet { estimates })
}

/// Per-target squared errors and the aggregate NMSE.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    /// Squared Cartesian error of each true target, in input order.
    pub squared_errors: Vec<f64>,
    /// For each true target, the index of its matched estimate.
    pub assignment: Vec<usize>,
    pub nmse: f64,
}

/// Greedily pairs estimates with targets in order of increasing Cartesian
/// distance and returns `Σ‖p̂ - p‖² / Σ‖p‖²`.
pub fn match_and_score(estimates: &EstimateSet, truth: &[Target]) -> Result<Score> {
    if estimates.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: estimates.len(),
        });
    }
    let est: Vec<(f64, f64)> = estimates.estimates.iter().map(Estimate::position).collect();
    let tru: Vec<(f64, f64)> = truth.iter().map(Target::position).collect();
    let mut pairs = Vec::with_capacity(est.len() * tru.len());
    for (i, t) in tru.iter().enumerate() {
        for (j, e) in est.iter().enumerate() {
            let d = (t.0 - e.0).powi(2) + (t.1 - e.1).powi(2);
            pairs.push((d, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assignment = vec![usize::MAX; tru.len()];
    let mut squared_errors = vec![0.0; tru.len()];
    let mut used = vec![false; est.len()];
    for (d, i, j) in pairs {
        if assignment[i] == usize::MAX && !used[j] {
            assignment[i] = j;
            squared_errors[i] = d;
            used[j] = true;
        }
    }
    let energy: f64 = tru.iter().map(|p| p.0 * p.0 + p.1 * p.1).sum();
    Ok(Score {
        nmse: squared_errors.iter().sum::<f64>() / energy,
        squared_errors,
        assignment,
    })
}

/// Writes `atom_index,alpha,range_m,mean_coeff_magnitude` for every atom;
/// atoms outside the support have magnitude 0.
pub fn write_coefficients_csv<W: Write>(
    result: &RecoveryResult,
    grid: &PolarGrid,
    mut w: W,
) -> io::Result<()> {
    let k = result.coefficients.ncols().max(1) as f64;
    let mut mags = vec![0.0; grid.len()];
    for (row, &atom) in result.support.iter().enumerate() {
        if let Some(m) = mags.get_mut(atom) {
            *m = result
                .coefficients
                .row(row)
                .iter()
                .map(|z| z.norm())
                .sum::<f64>()
                / k;
        }
    }
    writeln!(w, "atom_index,alpha,range_m,mean_coeff_magnitude")?;
    for (i, (a, m)) in grid.atoms.iter().zip(mags).enumerate() {
        writeln!(w, "{i},{},{},{m}", a.alpha, a.range)?;
    }
    Ok(())
}
