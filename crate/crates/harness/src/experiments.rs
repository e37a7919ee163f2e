//! Experiment drivers behind the CLI subcommands. Each driver returns its CSV
//! artifacts in memory; [`write_artifacts`] puts them on disk behind a
//! commented metadata line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use wbnf_core::boundaries::{r_nbnf_boundary, r_wbff_boundary, BoundaryQuery};
use wbnf_core::coherence::{curvature_coherence_at_zeta, curvature_coherence_discrete, solve_zeta};
use wbnf_core::dictionary::{build_dictionary, build_grid, Dictionary};
use wbnf_core::model::{synthesize_snapshots_with, SnapshotMatrix};
use wbnf_core::recovery::{
    extract_estimates, match_and_score, somp, write_coefficients_csv, EstimateSet, Score,
};
use wbnf_core::subspace::{
    find_peaks, log_space, music_spectrum_nbnf, music_spectrum_wbff, nbnf_value, noise_subspace,
    noise_subspace_from_snapshots, refine_peaks, spatial_covariance_nb, wbff_value, SearchAxes,
    Spectrum, DEFAULT_COVARIANCE_CAP,
};
use wbnf_core::{par, ArrayConfig, Error, Target, WidebandConfig};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named CSV body.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

impl Artifact {
    fn new(name: impl Into<String>, body: String) -> Self {
        Self {
            name: name.into(),
            body,
        }
    }
}

/// `# wbnf <version> config_sha256=<hash> seed=<seed>`.
pub fn metadata_line(cfg: &ExperimentConfig) -> String {
    format!(
        "# wbnf {VERSION} config_sha256={} seed={}",
        cfg.hash, cfg.seed
    )
}

/// Writes every artifact into `out` (created if needed) with the metadata
/// line first and returns the written paths.
pub fn write_artifacts(
    out: &Path,
    cfg: &ExperimentConfig,
    artifacts: &[Artifact],
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out)?;
    let meta = metadata_line(cfg);
    artifacts
        .iter()
        .map(|a| {
            let path = out.join(&a.name);
            fs::write(&path, format!("{meta}\n{}", a.body))?;
            Ok(path)
        })
        .collect()
}

fn csv<F>(f: F) -> String
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

fn synthesize(
    cfg: &ExperimentConfig,
    targets: &[Target],
    seed: u64,
) -> Result<SnapshotMatrix, HarnessError> {
    Ok(synthesize_snapshots_with(
        targets,
        &cfg.array,
        &cfg.wb,
        cfg.snr_db,
        cfg.snr_reference,
        seed,
    )?)
}

/// `|F|` from the Fresnel-integral form and from the discrete quadratic-phase
/// sum over `ζ ∈ [0, 20]`, plus `ζ_Δ` for a few thresholds.
pub fn run_coherence_curve(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, HarnessError> {
    let n = cfg.array.n_elements();
    let half = cfg.array.half_count() as f64;
    let rows = par::map_range(1001, |i| {
        let zeta = i as f64 * 0.02;
        let x = (zeta / half).powi(2) / 2.0;
        (
            zeta,
            curvature_coherence_at_zeta(zeta, n).value(),
            curvature_coherence_discrete(x, n).value(),
        )
    });
    let mut curve = String::from("zeta,curvature_coherence,discrete_sum\n");
    for (z, f, d) in rows {
        writeln!(curve, "{z},{f},{d}").unwrap();
    }
    let mut zetas = String::from("delta,zeta\n");
    for delta in [0.5, 0.1, 0.01] {
        writeln!(zetas, "{delta},{}", solve_zeta(delta, n)?).unwrap();
    }
    Ok(vec![
        Artifact::new("coherence_curve.csv", curve),
        Artifact::new("zeta_delta.csv", zetas),
    ])
}

/// Hybrid grid export.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, HarnessError> {
    let grid = build_grid(&cfg.array, &cfg.wb, &cfg.policy)?;
    Ok(vec![Artifact::new("grid.csv", csv(|w| grid.write_csv(w)))])
}

/// Output of [`run_localize`].
#[derive(Debug, Clone)]
pub struct LocalizeOutput {
    pub estimates: EstimateSet,
    pub score: Score,
    pub artifacts: Vec<Artifact>,
}

/// Grid, dictionary, snapshots and SOMP for the configured targets.
pub fn run_localize(cfg: &ExperimentConfig) -> Result<LocalizeOutput, HarnessError> {
    if cfg.targets.is_empty() {
        return Err(HarnessError::Config(
            "targets: localize needs at least one [[targets]] entry".into(),
        ));
    }
    let grid = build_grid(&cfg.array, &cfg.wb, &cfg.policy)?;
    let dict = build_dictionary(&grid, &cfg.array, &cfg.wb)?;
    let y = synthesize(cfg, &cfg.targets, cfg.seed)?;
    let result = somp(&y, &dict, cfg.targets.len())?;
    let estimates = extract_estimates(&result, &grid)?;
    let score = match_and_score(&estimates, &cfg.targets)?;

    let mut est = String::from(
        "target_index,true_range_m,true_theta_deg,range_m,theta_deg,squared_error_m2\n",
    );
    for (i, t) in cfg.targets.iter().enumerate() {
        let e = estimates.estimates[score.assignment[i]];
        writeln!(
            est,
            "{i},{},{},{},{},{}",
            t.range,
            t.angle.to_degrees(),
            e.range,
            e.angle.to_degrees(),
            score.squared_errors[i]
        )
        .unwrap();
    }
    let artifacts = vec![
        Artifact::new(
            "coefficients.csv",
            csv(|w| write_coefficients_csv(&result, &grid, w)),
        ),
        Artifact::new("estimates.csv", est),
    ];
    Ok(LocalizeOutput {
        estimates,
        score,
        artifacts,
    })
}

/// MUSIC benchmark variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MusicVariant {
    Nbnf,
    Wbff,
}

impl MusicVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Nbnf => "nbnf",
            Self::Wbff => "wbff",
        }
    }
}

/// Spectrum plus refined peak estimates.
#[derive(Debug, Clone)]
pub struct MusicOutput {
    pub spectrum: Spectrum,
    pub peaks: EstimateSet,
    /// Peak values in dB relative to the spectrum maximum.
    pub peak_db: Vec<f64>,
    pub artifacts: Vec<Artifact>,
}

fn check_wbff_capacity(array: &ArrayConfig, wb: &WidebandConfig) -> Result<(), HarnessError> {
    let rows = array.n_elements() * wb.n_subcarriers();
    if rows > DEFAULT_COVARIANCE_CAP {
        return Err(Error::CapacityExceeded {
            what: "wideband covariance dimension N*M",
            requested: rows,
            cap: DEFAULT_COVARIANCE_CAP,
        }
        .into());
    }
    Ok(())
}

/// Runs one MUSIC variant on snapshots `y` with `p` sources and returns the
/// spectrum together with its (optionally refined) peaks.
pub fn music_estimate(
    cfg: &ExperimentConfig,
    axes: &SearchAxes,
    y: &SnapshotMatrix,
    p: usize,
    variant: MusicVariant,
) -> Result<(Spectrum, EstimateSet, Vec<f64>), HarnessError> {
    let (array, wb) = (&cfg.array, &cfg.wb);
    let rounds = cfg.search.refine_rounds;
    let (spectrum, peaks, values) = match variant {
        MusicVariant::Nbnf => {
            let r = spatial_covariance_nb(y, array, wb)?;
            let un = noise_subspace(&r, p)?;
            let spectrum = music_spectrum_nbnf(&un, axes, array)?;
            let f = |r: f64, th: f64| nbnf_value(&un, array, r, th);
            let peaks = refine_peaks(f, &find_peaks(&spectrum, p)?, axes, rounds);
            let values = peaks
                .estimates
                .iter()
                .map(|e| f(e.range, e.angle))
                .collect::<Vec<_>>();
            (spectrum, peaks, values)
        }
        MusicVariant::Wbff => {
            check_wbff_capacity(array, wb)?;
            let un = noise_subspace_from_snapshots(y, p)?;
            let spectrum = music_spectrum_wbff(&un, axes, array, wb)?;
            let f = |r: f64, th: f64| wbff_value(&un, array, wb, r, th);
            let peaks = refine_peaks(f, &find_peaks(&spectrum, p)?, axes, rounds);
            let values = peaks
                .estimates
                .iter()
                .map(|e| f(e.range, e.angle))
                .collect::<Vec<_>>();
            (spectrum, peaks, values)
        }
    };
    let top = spectrum.values.max();
    let db = values.iter().map(|v| 10.0 * (v / top).log10()).collect();
    Ok((spectrum, peaks, db))
}

/// Spectrum and peak list for the configured targets.
pub fn run_music(
    cfg: &ExperimentConfig,
    variant: MusicVariant,
) -> Result<MusicOutput, HarnessError> {
    if cfg.targets.is_empty() {
        return Err(HarnessError::Config(
            "targets: music needs at least one [[targets]] entry".into(),
        ));
    }
    if variant == MusicVariant::Wbff {
        check_wbff_capacity(&cfg.array, &cfg.wb)?;
    }
    let axes = cfg.search_axes()?;
    let y = synthesize(cfg, &cfg.targets, cfg.seed)?;
    let (spectrum, peaks, peak_db) = music_estimate(cfg, &axes, &y, cfg.targets.len(), variant)?;
    let mut list = String::from("peak_index,range_m,theta_deg,value_db\n");
    for (i, (e, v)) in peaks.estimates.iter().zip(&peak_db).enumerate() {
        writeln!(list, "{i},{},{},{v}", e.range, e.angle.to_degrees()).unwrap();
    }
    let name = variant.name();
    let artifacts = vec![
        Artifact::new(
            format!("spectrum_{name}.csv"),
            csv(|w| spectrum.write_csv(w)),
        ),
        Artifact::new(format!("peaks_{name}.csv"), list),
    ];
    Ok(MusicOutput {
        spectrum,
        peaks,
        peak_db,
        artifacts,
    })
}

/// Boundary sweep variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySweep {
    /// `r_NB-NF` versus total bandwidth (subcarrier count fixed).
    Bandwidth,
    /// `r_WB-FF` versus aperture (half-wavelength arrays).
    Aperture,
}

/// One row of a boundary sweep; `boundary` is `None` when unsatisfiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub value: f64,
    pub rho: f64,
    pub boundary: Option<f64>,
}

/// Boundary sweep table plus warnings for unsatisfiable rows.
#[derive(Debug, Clone)]
pub struct BoundaryOutput {
    pub rows: Vec<BoundaryRow>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

/// Tabulates regime boundaries over bandwidth or aperture for every ρ.
pub fn run_boundary_sweep(
    cfg: &ExperimentConfig,
    sweep: BoundarySweep,
) -> Result<BoundaryOutput, HarnessError> {
    let b = &cfg.boundary;
    let values = match sweep {
        BoundarySweep::Bandwidth => &b.bandwidths,
        BoundarySweep::Aperture => &b.apertures,
    };
    let cells: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|&v| b.rho.iter().map(move |&rho| (v, rho)))
        .collect();
    let results = par::map_slice(&cells, |&(value, rho)| -> Result<Option<f64>, Error> {
        let solved = match sweep {
            BoundarySweep::Bandwidth => {
                let m = cfg.wb.n_subcarriers();
                let wb = WidebandConfig::new(m, value / m as f64, cfg.wb.n_symbols())?;
                let mut q = BoundaryQuery::for_nbnf(b.theta, rho, &cfg.array, &wb)?;
                q.scan_points = b.scan_points;
                r_nbnf_boundary(&q, &cfg.array, &wb)
            }
            BoundarySweep::Aperture => {
                let array = ArrayConfig::with_aperture(value, cfg.array.carrier_freq())?;
                let mut q = BoundaryQuery::for_wbff(b.theta, rho, &array)?;
                q.scan_points = b.scan_points;
                r_wbff_boundary(&q, &array, &cfg.wb)
            }
        };
        match solved {
            Ok(r) => Ok(Some(r)),
            Err(Error::Unsatisfiable(_)) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let var = match sweep {
        BoundarySweep::Bandwidth => "bandwidth_hz",
        BoundarySweep::Aperture => "aperture_m",
    };
    let mut rows = Vec::with_capacity(cells.len());
    let mut warnings = Vec::new();
    let mut body = String::from("sweep_var,value,rho,boundary_m\n");
    for ((value, rho), res) in cells.into_iter().zip(results) {
        let boundary = res?;
        if boundary.is_none() {
            warnings.push(format!(
                "{var}={value} rho={rho}: threshold unsatisfiable on the search window"
            ));
        }
        writeln!(body, "{var},{value},{rho},{}", boundary.unwrap_or(-1.0)).unwrap();
        rows.push(BoundaryRow {
            value,
            rho,
            boundary,
        });
    }
    let name = match sweep {
        BoundarySweep::Bandwidth => "boundary_bandwidth.csv",
        BoundarySweep::Aperture => "boundary_aperture.csv",
    };
    Ok(BoundaryOutput {
        rows,
        warnings,
        artifacts: vec![Artifact::new(name, body)],
    })
}

/// Localization method compared in the NMSE sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cs,
    NbnfMusic,
    WbffMusic,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cs, Method::NbnfMusic, Method::WbffMusic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cs => "cs",
            Self::NbnfMusic => "nbnf_music",
            Self::WbffMusic => "wbff_music",
        }
    }
}

/// One `(distance, method)` aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub distance: f64,
    pub method: Method,
    pub nmse: f64,
    pub median_nmse: f64,
    pub trials: usize,
}

/// NMSE sweep results, ordered by distance then method.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub distances: Vec<f64>,
    pub rows: Vec<SweepRow>,
    /// The WB-FF boundary used for automatic spacing, when computed.
    pub wbff_boundary: Option<f64>,
    pub artifacts: Vec<Artifact>,
}

impl SweepResult {
    pub fn row(&self, distance_index: usize, method: Method) -> &SweepRow {
        let i = Method::ALL.iter().position(|m| *m == method).unwrap();
        &self.rows[distance_index * Method::ALL.len() + i]
    }
}

/// Per-trial seed: `seed ⊕ (distance_index << 32 | trial)`.
pub fn trial_seed(seed: u64, distance_index: usize, trial: usize) -> u64 {
    seed ^ (((distance_index as u64) << 32) | trial as u64)
}

/// Targets of one sweep point: `sources` targets at range `r`, angles spread
/// symmetrically around the sweep angle.
pub fn sweep_targets(cfg: &ExperimentConfig, r: f64) -> Vec<Target> {
    let s = &cfg.sweep;
    let centre = (s.sources as f64 - 1.0) / 2.0;
    (0..s.sources)
        .map(|p| {
            let theta = s.angle + (p as f64 - centre) * s.angle_spacing;
            Target::with_path_loss(r, theta, &cfg.array)
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Monte-Carlo NMSE versus distance for CS, NB-NF MUSIC and WB-FF MUSIC.
pub fn run_nmse_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    check_wbff_capacity(&cfg.array, &cfg.wb)?;
    let (distances, wbff_boundary) = if cfg.sweep.distances.is_empty() {
        let q = BoundaryQuery::for_wbff(cfg.sweep.angle, 0.9, &cfg.array)?;
        let r_wbff = r_wbff_boundary(&q, &cfg.array, &cfg.wb)?;
        let lo = 1.1 * cfg.array.aperture();
        let hi = (2.0 * r_wbff).min(0.95 * cfg.array.rayleigh_distance());
        (log_space(lo, hi, cfg.sweep.points), Some(r_wbff))
    } else {
        (cfg.sweep.distances.clone(), None)
    };
    let scenarios: Vec<Vec<Target>> = distances.iter().map(|&r| sweep_targets(cfg, r)).collect();
    for (i, ts) in scenarios.iter().enumerate() {
        for t in ts {
            t.validate(&cfg.array)
                .map_err(|e| HarnessError::Config(format!("sweep distance {i}: {e}")))?;
        }
    }

    let grid = build_grid(&cfg.array, &cfg.wb, &cfg.policy)?;
    let dict: Dictionary = build_dictionary(&grid, &cfg.array, &cfg.wb)?;
    let axes = cfg.search_axes()?;
    let trials = cfg.trials;
    let p = cfg.sweep.sources;

    let per_item = par::map_range(distances.len() * trials, |item| {
        let (di, trial) = (item / trials, item % trials);
        let truth = &scenarios[di];
        let y = synthesize(cfg, truth, trial_seed(cfg.seed, di, trial))?;
        let cs = {
            let res = somp(&y, &dict, p)?;
            match_and_score(&extract_estimates(&res, &grid)?, truth)?.nmse
        };
        let nb = music_estimate(cfg, &axes, &y, p, MusicVariant::Nbnf)?.1;
        let wf = music_estimate(cfg, &axes, &y, p, MusicVariant::Wbff)?.1;
        Ok::<_, HarnessError>([
            cs,
            match_and_score(&nb, truth)?.nmse,
            match_and_score(&wf, truth)?.nmse,
        ])
    });
    let per_item = per_item.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(distances.len() * Method::ALL.len());
    let mut body = String::from("distance_m,method,nmse,median_nmse,trials\n");
    for (di, &distance) in distances.iter().enumerate() {
        let chunk = &per_item[di * trials..(di + 1) * trials];
        for (mi, &method) in Method::ALL.iter().enumerate() {
            let mut v: Vec<f64> = chunk.iter().map(|r| r[mi]).collect();
            let mean = v.iter().sum::<f64>() / trials as f64;
            let med = median(&mut v);
            writeln!(body, "{distance},{},{mean},{med},{trials}", method.name()).unwrap();
            rows.push(SweepRow {
                distance,
                method,
                nmse: mean,
                median_nmse: med,
                trials,
            });
        }
    }
    Ok(SweepResult {
        distances,
        rows,
        wbff_boundary,
        artifacts: vec![Artifact::new("nmse.csv", body)],
    })
}
