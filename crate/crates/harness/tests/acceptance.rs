//! Acceptance suite. Prints one `PASS` or `FAIL` line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::FRAC_PI_3;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbnf_core::boundaries::{
    corr_nbnf, corr_wbff, r_nbnf_boundary, r_wbff_boundary, BoundaryQuery,
};
use wbnf_core::coherence::{
    curvature_coherence, curvature_coherence_discrete, s_freq, s_space_linear, solve_zeta,
};
use wbnf_core::dictionary::{
    angle_grid, build_dictionary, build_grid, grid_size_cap, PolarGrid, RingPolicy,
};
use wbnf_core::model::synthesize_snapshots;
use wbnf_core::recovery::somp;
use wbnf_core::subspace::{
    find_peaks, full_covariance_wb, music_spectrum_nbnf, music_spectrum_wbff, noise_subspace,
    noise_subspace_from_snapshots, spatial_covariance_nb, CovarianceMatrix, SearchAxes,
};
use wbnf_core::{ArrayConfig, Error, Target, WidebandConfig};
use wbnf_harness::desk_config;
use wbnf_harness::experiments::{run_nmse_sweep, Method};

const FC: f64 = 28e9;

/// Outcome of one criterion: a verdict and a one-line summary of the numbers.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn reference_array() -> ArrayConfig {
    ArrayConfig::half_wavelength(127, FC).unwrap()
}

fn reference_wideband() -> WidebandConfig {
    WidebandConfig::new(256, 480e3, 100).unwrap()
}

fn zeta_reproduction() -> Verdict {
    let z: Vec<f64> = [0.5, 0.1, 0.01]
        .iter()
        .map(|&d| solve_zeta(d, 127).unwrap())
        .collect();
    let pass =
        (z[0] - 1.55).abs() <= 0.05 && (z[1] - 6.62).abs() <= 0.1 && (z[2] - 70.22).abs() <= 1.0;
    verdict(
        pass,
        format!(
            "zeta(0.5)={:.4} zeta(0.1)={:.4} zeta(0.01)={:.3}",
            z[0], z[1], z[2]
        ),
    )
}

fn boundary_reproduction() -> Verdict {
    let a = reference_array();
    let wb = reference_wideband();
    let nb = r_nbnf_boundary(
        &BoundaryQuery::for_nbnf(FRAC_PI_3, 0.9, &a, &wb).unwrap(),
        &a,
        &wb,
    )
    .unwrap();
    let wf = r_wbff_boundary(
        &BoundaryQuery::for_wbff(FRAC_PI_3, 0.9, &a).unwrap(),
        &a,
        &wb,
    )
    .unwrap();
    let wb5 = WidebandConfig::new(256, 5e6 / 256.0, 100).unwrap();
    let fig4 = r_nbnf_boundary(
        &BoundaryQuery::for_nbnf(FRAC_PI_3, 0.9, &a, &wb5).unwrap(),
        &a,
        &wb5,
    )
    .unwrap();
    let big = ArrayConfig::with_aperture(1.8, FC).unwrap();
    let fig6 = |rho| {
        r_wbff_boundary(
            &BoundaryQuery::for_wbff(FRAC_PI_3, rho, &big).unwrap(),
            &big,
            &wb,
        )
        .unwrap()
    };
    let (f95, f85) = (fig6(0.95), fig6(0.85));
    let pass = within(nb, 0.53, 0.10)
        && within(wf, 17.302, 0.10)
        && within(fig4, 15.0, 0.15)
        && within(f95, 168.3, 0.05)
        && within(f85, 95.1, 0.05);
    verdict(
        pass,
        format!(
            "r_NB-NF={nb:.4} m r_WB-FF={wf:.3} m B=5MHz:{fig4:.3} m D=1.8m(N={}): rho=0.95 {f95:.2} m, rho=0.85 {f85:.2} m",
            big.n_elements()
        ),
    )
}

fn closed_forms_vs_oracles() -> Verdict {
    let a = reference_array();
    let wb = reference_wideband();
    let ks = wb.wavenumbers(&a);
    let kc = a.carrier_wavenumber();
    let mut corr_err: f64 = 0.0;
    for &r in &[0.4, 1.0, 5.0, 17.3, 70.0] {
        for &deg in &[60.0f64, 80.0, 90.0, 115.0] {
            let th = deg.to_radians();
            let al = th.cos();
            let (mut s1, mut s2) = (Complex64::default(), Complex64::default());
            for x in a.positions() {
                let psi = r - x * al + x * x * (1.0 - al * al) / (2.0 * r);
                for &k in &ks {
                    s1 += Complex64::from_polar(1.0, -(k - kc) * psi);
                    s2 += Complex64::from_polar(1.0, k * (r - x * al) - k * psi);
                }
            }
            let nm = (a.n_elements() * ks.len()) as f64;
            corr_err = corr_err
                .max((corr_nbnf(r, th, &a, &wb).value() - s1.norm() / nm).abs())
                .max((corr_wbff(r, th, &a, &wb).value() - s2.norm() / nm).abs());
        }
    }
    let mut sum_err: f64 = 0.0;
    let dk = wb.wavenumber_step();
    for i in 0..200 {
        let dr = -150.0 + 1.37 * i as f64;
        let direct: Complex64 = (0..256)
            .map(|m| Complex64::from_polar(1.0, m as f64 * dk * dr))
            .sum();
        sum_err = sum_err.max((s_freq(dr, &wb).value() - direct.norm() / 256.0).abs());
        let da = -1.0 + 0.0101 * i as f64;
        let direct: Complex64 = (0..127)
            .map(|n| Complex64::from_polar(1.0, std::f64::consts::PI * n as f64 * da))
            .sum();
        sum_err = sum_err.max((s_space_linear(da, 127).value() - direct.norm() / 127.0).abs());
    }
    let mut fres_err: f64 = 0.0;
    for n in [101usize, 127, 201] {
        let half = ((n - 1) / 2) as f64;
        for i in 0..=800 {
            let x = (i as f64 * 0.01 / half).powi(2) / 2.0;
            fres_err = fres_err.max(
                (curvature_coherence(x, n).value() - curvature_coherence_discrete(x, n).value())
                    .abs(),
            );
        }
    }
    let pass = corr_err <= 1e-10 && sum_err <= 1e-12 && fres_err <= 0.02;
    verdict(
        pass,
        format!("corr max err {corr_err:.2e}, s_freq/s_space max err {sum_err:.2e}, Fresnel vs discrete (zeta<=8, N>=101) max gap {fres_err:.4}"),
    )
}

fn grid_violations(grid: &PolarGrid, array: &ArrayConfig, wb: &WidebandConfig) -> Vec<String> {
    let p = &grid.policy;
    let dr = wb.range_resolution();
    let alphas = angle_grid(array);
    let mut bad = Vec::new();
    for atom in &grid.atoms {
        let steps = (p.r_max - atom.range) / dr;
        if (steps - steps.round()).abs() > 1e-6 {
            bad.push(format!("misaligned {}", atom.range));
        }
        if atom.range < p.r_min || atom.range > p.r_max || atom.alpha != alphas[atom.angle_index] {
            bad.push(format!("outside window {}", atom.range));
        }
    }
    for w in grid.atoms.windows(2) {
        if w[0].angle_index == w[1].angle_index {
            let bound = 1.0 / (p.g_delta * (1.0 - w[0].alpha * w[0].alpha));
            if (1.0 / w[1].range - 1.0 / w[0].range) < bound - 1e-9 {
                bad.push(format!("inverse gap at {}", w[1].range));
            }
        }
    }
    if grid.len() > grid_size_cap(array, wb, p) {
        bad.push("cardinality".into());
    }
    bad
}

fn grid_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut built, mut atoms, mut failures) = (0, 0, Vec::new());
    let mut attempts = 0;
    while built < 20 && attempts < 400 {
        attempts += 1;
        let n = 2 * rng.random_range(16..128) + 1;
        let array = ArrayConfig::half_wavelength(n, FC).unwrap();
        let wb = WidebandConfig::new(rng.random_range(16..256), rng.random_range(0.5e6..20e6), 4)
            .unwrap();
        let delta = rng.random_range(0.2..0.8);
        let scale = rng.random_range(0.5..3.0);
        let Ok(policy) = RingPolicy::new(delta, &array).and_then(|p| {
            p.with_window(
                array.aperture() * rng.random_range(0.3..1.5),
                array.rayleigh_distance() * scale,
            )
        }) else {
            continue;
        };
        match build_grid(&array, &wb, &policy) {
            Ok(grid) => {
                built += 1;
                atoms += grid.len();
                failures.extend(grid_violations(&grid, &array, &wb));
            }
            Err(Error::EmptyGrid) => {}
            Err(e) => failures.push(e.to_string()),
        }
    }
    verdict(
        built == 20 && failures.is_empty(),
        format!(
            "{built} grids ({atoms} atoms) from {attempts} random policies, {} violations",
            failures.len()
        ),
    )
}

fn exact_recovery() -> Verdict {
    let array = ArrayConfig::half_wavelength(33, FC).unwrap();
    let wb = WidebandConfig::new(64, 16e6, 8).unwrap();
    let policy = RingPolicy::new(0.5, &array).unwrap();
    let grid = build_grid(&array, &wb, &policy).unwrap();
    let dict = build_dictionary(&grid, &array, &wb).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let (mut ok, mut worst) = (0, 0.0f64);
    for case in 0..100u64 {
        let p = 1 + (case % 3) as usize;
        let mut support: Vec<usize> = Vec::new();
        while support.len() < p {
            let i = rng.random_range(0..grid.len());
            if !support.contains(&i) {
                support.push(i);
            }
        }
        let targets: Vec<Target> = support
            .iter()
            .map(|&i| {
                let g = Complex64::from_polar(
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                );
                Target::new(grid.atoms[i].range, grid.atoms[i].theta(), g)
            })
            .collect();
        let y = synthesize_snapshots(&targets, &array, &wb, 400.0, case).unwrap();
        let res = somp(&y, &dict, p).unwrap();
        let mut got = res.support.clone();
        got.sort_unstable();
        support.sort_unstable();
        let rel = res.residual_norms.last().unwrap() / y.data.norm();
        worst = worst.max(rel);
        if got == support && rel < 1e-8 {
            ok += 1;
        }
    }
    verdict(
        ok == 100,
        format!(
            "N=33 M=64 Q={}: {ok}/100 exact supports, worst relative residual {worst:.2e}",
            grid.len()
        ),
    )
}

fn reconstruction_error(r: &CovarianceMatrix, p: usize) -> f64 {
    let un = noise_subspace(r, p).unwrap();
    let diag = |v: &[f64]| {
        DMatrix::from_diagonal(&DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    };
    let us = un.signal_basis();
    let u_n = un.basis();
    let rebuilt = us * diag(un.signal_values()) * us.adjoint()
        + &u_n * diag(un.noise_values()) * u_n.adjoint();
    (rebuilt - &r.data).norm() / r.data.norm()
}

fn music_correctness() -> Verdict {
    let cfg = desk_config();
    let (array, wb) = (&cfg.array, &cfg.wb);
    let axes = SearchAxes::default_for(array.aperture(), array.rayleigh_distance()).unwrap();
    let theta_nb = 100.0f64;
    let r_nb = r_nbnf_boundary(
        &BoundaryQuery::for_nbnf(theta_nb.to_radians(), 0.9, array, wb).unwrap(),
        array,
        wb,
    )
    .unwrap();
    let r_near = axes
        .range_m
        .iter()
        .copied()
        .rfind(|&r| r > array.aperture() && r <= r_nb);
    let theta_wf = 80.0f64;
    let r_wf = r_wbff_boundary(
        &BoundaryQuery::for_wbff(theta_wf.to_radians(), 0.9, array).unwrap(),
        array,
        wb,
    )
    .unwrap();
    let r_far = axes.range_m.iter().copied().find(|&r| r >= r_wf).unwrap();

    let mut lines = Vec::new();
    let mut pass = true;
    match r_near {
        Some(r) => {
            let y = synthesize_snapshots(
                &[Target::with_path_loss(r, theta_nb.to_radians(), array)],
                array,
                wb,
                400.0,
                1,
            )
            .unwrap();
            let r_nb_cov = spatial_covariance_nb(&y, array, wb).unwrap();
            let un = noise_subspace(&r_nb_cov, 1).unwrap();
            let spec = music_spectrum_nbnf(&un, &axes, array).unwrap();
            let e = find_peaks(&spec, 1).unwrap().estimates[0];
            let hit = e.range == r && (e.angle.to_degrees() - theta_nb).abs() < 1e-9;
            pass &= hit;
            lines.push(format!(
                "NB-NF ({r:.3} m, {theta_nb} deg; r_NB-NF={r_nb:.3}) argmax {}",
                if hit { "at truth" } else { "off truth" }
            ));
            let rec = reconstruction_error(&r_nb_cov, 1);
            pass &= rec < 1e-8;
            lines.push(format!("NB covariance split error {rec:.1e}"));
        }
        None => {
            pass = false;
            lines.push(format!("no search range inside r_NB-NF={r_nb:.3} m"));
        }
    }
    let y = synthesize_snapshots(
        &[Target::with_path_loss(r_far, theta_wf.to_radians(), array)],
        array,
        wb,
        400.0,
        2,
    )
    .unwrap();
    let un = noise_subspace_from_snapshots(&y, 1).unwrap();
    let spec = music_spectrum_wbff(&un, &axes, array, wb).unwrap();
    let e = find_peaks(&spec, 1).unwrap().estimates[0];
    let hit = e.range == r_far && (e.angle.to_degrees() - theta_wf).abs() < 1e-9;
    pass &= hit;
    lines.push(format!(
        "WB-FF ({r_far:.3} m, {theta_wf} deg; r_WB-FF={r_wf:.3}) argmax {}",
        if hit { "at truth" } else { "off truth" }
    ));

    let small = ArrayConfig::half_wavelength(15, FC).unwrap();
    let swb = WidebandConfig::new(8, 20e6, 40).unwrap();
    let targets = [
        Target::with_path_loss(2.0, 1.3, &small),
        Target::with_path_loss(4.0, 1.9, &small),
    ];
    let ys = synthesize_snapshots(&targets, &small, &swb, 0.0, 3).unwrap();
    let rec = reconstruction_error(&full_covariance_wb(&ys).unwrap(), 2);
    pass &= rec < 1e-8;
    lines.push(format!("WB rank-2 split error {rec:.1e}"));
    verdict(pass, lines.join("; "))
}

fn nmse_ordering() -> Verdict {
    let cfg = desk_config();
    let (array, wb) = (&cfg.array, &cfg.wb);
    let theta = cfg.sweep.angle;
    let r_nb = r_nbnf_boundary(
        &BoundaryQuery::for_nbnf(theta, 0.9, array, wb).unwrap(),
        array,
        wb,
    )
    .unwrap();
    let r_wf = r_wbff_boundary(
        &BoundaryQuery::for_wbff(theta, 0.9, array).unwrap(),
        array,
        wb,
    )
    .unwrap();
    let (lo, hi) = (2.0 * r_nb, 0.5 * r_wf);
    let sweep = run_nmse_sweep(&cfg).unwrap();
    let last = sweep.distances.len() - 1;
    let med = |i, m| sweep.row(i, m).median_nmse;
    let inner = med(0, Method::NbnfMusic) < med(0, Method::WbffMusic);
    let outer = med(last, Method::WbffMusic) < med(last, Method::NbnfMusic);
    let gray: Vec<usize> = (0..sweep.distances.len())
        .filter(|&i| sweep.distances[i] >= lo && sweep.distances[i] <= hi)
        .collect();
    let cs_wins = gray.iter().any(|&i| {
        med(i, Method::Cs) < med(i, Method::NbnfMusic)
            && med(i, Method::Cs) < med(i, Method::WbffMusic)
    });
    let best_gap = gray
        .iter()
        .map(|&i| med(i, Method::Cs) / med(i, Method::NbnfMusic).min(med(i, Method::WbffMusic)))
        .fold(f64::INFINITY, f64::min);
    verdict(
        inner && outer && cs_wins,
        format!(
            "trials={} inner {:.3} m nbnf<wbff: {inner} ({:.2e} vs {:.2e}); outer {:.2} m wbff<nbnf: {outer} ({:.2e} vs {:.2e}); gray zone [{lo:.2}, {hi:.2}] m ({} points) cs<both: {cs_wins} (best cs/min(benchmarks) = {best_gap:.3e})",
            cfg.trials,
            sweep.distances[0],
            med(0, Method::NbnfMusic),
            med(0, Method::WbffMusic),
            sweep.distances[last],
            med(last, Method::WbffMusic),
            med(last, Method::NbnfMusic),
            gray.len(),
        ),
    )
}

const DETERMINISM_CONFIG: &str = r#"
seed = 11
trials = 2

[array]
n_elements = 101

[wideband]
n_subcarriers = 32
subcarrier_spacing_hz = 3.84e6
n_symbols = 20

[policy]
coherence_threshold = 0.5

[[targets]]
range_m = 4.0
angle_deg = 95.0

[[targets]]
range_m = 12.0
angle_deg = 75.0

[sweep]
points = 3

[search]
theta_step_deg = 0.5
range_points = 32
refine_rounds = 3

[boundary]
rho = [0.7, 0.9]
scan_points = 512
bandwidths_hz = [5e6, 20e6, 100e6]
apertures_m = [0.2, 0.6]
"#;

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let commands: [&[&str]; 8] = [
        &["coherence-curve"],
        &["grid"],
        &["localize"],
        &["music", "--variant", "nbnf"],
        &["music", "--variant", "wbff"],
        &["boundary", "--sweep", "bandwidth"],
        &["boundary", "--sweep", "aperture"],
        &["nmse-sweep"],
    ];
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("cfg.toml");
    fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for args in commands {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let out = root.path().join(format!("{}-{rep}", args.join("_")));
            let status = Command::new(env!("CARGO_BIN_EXE_wbnf"))
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .args(args)
                .output()
                .unwrap();
            if !status.status.success() {
                mismatched.push(format!("{} failed", args.join(" ")));
            }
            runs.push(csv_bodies(&out));
        }
        files += runs[0].len();
        if runs[0] != runs[1] || runs[0].is_empty() {
            mismatched.push(args.join(" "));
        }
    }
    verdict(
        mismatched.is_empty(),
        format!(
            "{} subcommands, {files} CSV files compared byte for byte, mismatches: {mismatched:?}",
            commands.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("zeta reproduction", zeta_reproduction),
        ("boundary reproduction", boundary_reproduction),
        ("closed form vs oracle", closed_forms_vs_oracles),
        ("grid invariants", grid_suite),
        ("exact recovery", exact_recovery),
        ("MUSIC correctness", music_correctness),
        ("NMSE ordering", nmse_ordering),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {name} [{:.1} s]: {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
