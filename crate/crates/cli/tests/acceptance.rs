//! Acceptance suite: eleven numbered criteria, one test and one printed
//! verdict line each.
//!
//! Every test prints exactly one line of the form
//! `[criterion N] PASS — detail` or `[criterion N] FAIL — detail`
//! (run with `--nocapture` to see the lines for passing tests) and then
//! asserts the criterion, so the suite's pass/fail status is the verdict.
//!
//! Criteria 7 and 8 state trend targets that the implemented constructions
//! measurably do not meet on the stated grids; the tests report the honest
//! measured sequences and fail. The remaining nine criteria pass.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use macrospin_core::macro_obs::nearest_neighbor_interaction;
use macrospin_core::thermo::{audit_inclusions, domain_sample};
use macrospin_core::{
    approximation_error, beta_min_rank, build_interaction_means, build_mean_observables,
    coarse_grain, commutator_decay_profile, contour_ladder, convergence_experiment, entropy_mu,
    entropy_mu_oracle, mean_entropy_product, operator_norm, pauli_x, pauli_y, pauli_z, rank_rate,
    sequential_joint_cluster, BoxSpec, ClusterParams, DomMembership, EntropyProfile,
    FreeEnergySurface, HermitianOperator, ObservableFamily, ProductState,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const MAX_DIM: usize = 1 << 14;

fn bloch_pair() -> ObservableFamily {
    ObservableFamily::new(2, vec![pauli_z(), pauli_x()]).unwrap()
}

fn verdict(n: u32, pass: bool, detail: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("[criterion {n}] {word} — {detail}");
}

#[test]
fn criterion_01_commutator_decay_identity() {
    let family = ObservableFamily::new(2, vec![pauli_x(), pauli_y()]).unwrap();
    let rows = commutator_decay_profile(&family, &[1, 2, 3, 4, 5], MAX_DIM).unwrap();
    let worst = rows
        .iter()
        .map(|row| (row.norm - 2.0 / f64::from(2 * row.n + 1)).abs())
        .fold(0.0, f64::max);
    let pass = rows.len() == 5 && worst <= 1e-9;
    verdict(
        1,
        pass,
        &format!("max |‖[H1,H2]‖ − 2/(2n+1)| = {worst:.2e} over n = 1..5 (tolerance 1e-9)"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_legendre_duality() {
    let family = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
    let mut worst_mu = 0.0_f64;
    for k in 0..21 {
        let x = -1.0 + 2.0 * f64::from(k + 1) / 22.0;
        let mu = entropy_mu(&family, &[x]).unwrap();
        let p = (1.0 + x) / 2.0;
        let closed_form = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        worst_mu = worst_mu.max((mu - closed_form).abs());
    }
    let surface = FreeEnergySurface::new(family.clone());
    let mut worst_fenchel = 0.0_f64;
    for k in 0..9 {
        let alpha = -2.0 + 0.5 * f64::from(k);
        let p = surface.p(&[alpha]).unwrap();
        let x = surface.grad(&[alpha]).unwrap();
        let mu = entropy_mu(&family, &x).unwrap();
        worst_fenchel = worst_fenchel.max((mu + alpha * x[0] - p).abs());
    }
    let pass = worst_mu <= 1e-6 && worst_fenchel <= 1e-7;
    verdict(
        2,
        pass,
        &format!(
            "max |mu − binary entropy| = {worst_mu:.2e} at 21 points (tol 1e-6); \
             max Fenchel gap = {worst_fenchel:.2e} at 9 alphas (tol 1e-7)"
        ),
    );
    assert!(pass);
}

/// Draws interior points of the closed unit ball uniformly from the cube,
/// rejecting radii above 0.9 so every sample is safely interior.
fn interior_points(m: usize, count: usize, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let v: Vec<f64> = (0..m).map(|_| -1.0 + 2.0 * rng.random::<f64>()).collect();
        let r2: f64 = v.iter().map(|c| c * c).sum();
        if r2 <= 0.81 {
            points.push(v);
        }
    }
    points
}

#[test]
fn criterion_03_oracle_cross_check() {
    let families = [
        ObservableFamily::new(2, vec![pauli_z()]).unwrap(),
        bloch_pair(),
        ObservableFamily::new(2, vec![pauli_x(), pauli_y(), pauli_z()]).unwrap(),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let mut worst = 0.0_f64;
    for family in &families {
        for x in interior_points(family.m(), 20, &mut rng) {
            let a = entropy_mu(family, &x).unwrap();
            let b = entropy_mu_oracle(family, &x).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    let pass = worst <= 1e-6;
    verdict(
        3,
        pass,
        &format!(
            "max |solver − oracle| = {worst:.2e} over 3 families x 20 interior points (tol 1e-6)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_domain_geometry() {
    let family = bloch_pair();
    let profile = EntropyProfile::new(family);
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let mut misclassified = 0usize;
    let mut checked = 0usize;
    for _ in 0..200 {
        let x = [
            -1.2 + 2.4 * rng.random::<f64>(),
            -1.2 + 2.4 * rng.random::<f64>(),
        ];
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if (r - 1.0).abs() < 0.05 {
            continue;
        }
        checked += 1;
        let membership = profile.mu(&x).unwrap().membership;
        let wrong = (r < 1.0 && membership == DomMembership::Outside)
            || (r > 1.0 && membership == DomMembership::Interior);
        misclassified += usize::from(wrong);
    }
    let pass = misclassified == 0;
    verdict(
        4,
        pass,
        &format!(
            "{misclassified} INTERIOR/OUTSIDE misclassifications among {checked} of 200 points \
             at margin >= 0.05 from the unit circle"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_contour_ladder() {
    let profile = EntropyProfile::new(bloch_pair());
    let sample = domain_sample(&profile, 0.05).unwrap();
    let ladder = contour_ladder(&profile, &sample, 0.3).unwrap();
    let levels = &ladder.levels;

    let s0_ok = (levels[0] - 2.0_f64.ln()).abs() <= 1e-8;
    let decreasing = levels.windows(2).all(|w| w[1] < w[0]);
    let terminal_ok = *levels.last().unwrap() < 0.0;
    let ratio = ladder.ratio();
    let mut worst_schedule = 0.0_f64;
    for (k, &level) in levels.iter().enumerate().skip(2) {
        let expected = levels[0] - ratio.powi(k as i32 - 1) * (levels[0] - levels[1]);
        worst_schedule = worst_schedule.max((level - expected).abs());
    }
    let audit = audit_inclusions(&ladder, &sample);
    let inclusions_ok = audit.iter().all(|row| row.holds);

    let pass = s0_ok && decreasing && terminal_ok && worst_schedule <= 1e-12 && inclusions_ok;
    verdict(
        5,
        pass,
        &format!(
            "{} levels: s0 − ln 2 = {:.1e}, strictly decreasing = {decreasing}, terminal {:.3} < 0, \
             schedule defect {worst_schedule:.1e} (tol 1e-12), inclusion audits on the 0.05 grid all hold = {inclusions_ok}",
            levels.len(),
            levels[0] - 2.0_f64.ln(),
            levels.last().unwrap(),
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_rank_rates() {
    let family = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
    let spec = BoxSpec::closed(vec![0.0], 0.25).unwrap();
    let records = rank_rate(&family, &spec, &[2, 5], None, MAX_DIM).unwrap();
    let ranks_ok = records[0].rank == 20 && records[1].rank == 924;
    let bounds_ok = records
        .iter()
        .all(|rec| rec.rate <= rec.target_sup_mu + rec.slack() + 1e-12);
    let d2 = records[0].deficit();
    let d5 = records[1].deficit();
    let shrink_ok = d5 < d2 && (d2 - 0.0940).abs() < 1e-3 && (d5 - 0.0725).abs() < 1e-3;
    let pass = ranks_ok && bounds_ok && shrink_ok;
    verdict(
        6,
        pass,
        &format!(
            "ranks ({}, {}) vs binomial (20, 924); rate <= sup-box mu + slack = {bounds_ok}; \
             deficit {d2:.4} -> {d5:.4}",
            records[0].rank, records[1].rank
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_beta_entropy_trend() {
    let rho = HermitianOperator::from_real_diagonal(&[0.9, 0.1]).unwrap();
    let state = ProductState::new(rho).unwrap();
    let entropy = mean_entropy_product(&state);
    let entropy_ok = (entropy - 0.325083).abs() < 1e-6;

    let n_values = [2u32, 4, 6, 9, 12];
    let deviations: Vec<f64> = n_values
        .iter()
        .map(|&n| (beta_min_rank(&state, 0.1, n).unwrap().rate - entropy).abs())
        .collect();
    let monotone = deviations.windows(2).all(|w| w[1] < w[0]);

    let uniform =
        ProductState::new(HermitianOperator::from_real_diagonal(&[0.5, 0.5]).unwrap()).unwrap();
    let uniform_rank = beta_min_rank(&uniform, 0.2, 1).unwrap().rank;
    let uniform_ok = uniform_rank == 7;

    let sequence = deviations
        .iter()
        .map(|d| format!("{d:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = monotone && uniform_ok && entropy_ok;
    verdict(
        7,
        pass,
        &format!(
            "|beta/(2n+1) − S| over n = 2,4,6,9,12 is [{sequence}] (monotone decrease required: {monotone}); \
             uniform-state rank at n = 1, eps = 0.2 is {uniform_rank} (want 7); S = {entropy:.6}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_main_theorem_trend() {
    let family = ObservableFamily::new(2, vec![pauli_x(), pauli_y(), pauli_z()]).unwrap();
    let rows = convergence_experiment(&family, &[1, 2, 3, 4, 5], None, MAX_DIM).unwrap();
    let worst_commutator = rows
        .iter()
        .map(|row| row.max_commutator)
        .fold(0.0, f64::max);
    let commutators_ok = worst_commutator < 1e-11;
    let first = rows.first().unwrap().max_error;
    let last = rows.last().unwrap().max_error;
    let trend_ok = last < 0.8 * first;
    let errors = rows
        .iter()
        .map(|row| format!("{:.4}", row.max_error))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = commutators_ok && trend_ok;
    verdict(
        8,
        pass,
        &format!(
            "max commutator = {worst_commutator:.1e} (< 1e-11: {commutators_ok}); \
             max error over n = 1..5 is [{errors}], need n=5 < 0.8 x n=1 ({last:.4} vs {:.4}): {trend_ok}",
            0.8 * first
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_fixed_points() {
    let tau = ClusterParams::new(0.05).unwrap();
    let pair = ObservableFamily::new(
        2,
        vec![
            pauli_z(),
            HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap(),
        ],
    )
    .unwrap();
    let mut worst_pair = 0.0_f64;
    for n in [1u32, 2] {
        let means = build_mean_observables(&pair, n, MAX_DIM).unwrap();
        let model = sequential_joint_cluster(&means, &tau).unwrap();
        let err = approximation_error(&model, &means).unwrap();
        worst_pair = worst_pair.max(err.max_error);
    }

    let single = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
    let mut worst_single = 0.0_f64;
    for n in [1u32, 2] {
        let means = build_mean_observables(&single, n, MAX_DIM).unwrap();
        let model = sequential_joint_cluster(&means, &tau).unwrap();
        let err = approximation_error(&model, &means).unwrap();
        worst_single = worst_single.max(err.max_error);
    }

    let pass = worst_pair < 1e-9 && worst_single < 1e-10;
    verdict(
        9,
        pass,
        &format!(
            "commuting pair max ‖H − Y‖ = {worst_pair:.1e} (tol 1e-9); \
             single generator max error = {worst_single:.1e} (tol 1e-10); n = 1, 2, width 0.05"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_coarse_graining() {
    let phi = nearest_neighbor_interaction(&pauli_z()).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for n in [3u32, 4, 5] {
        let plain = build_interaction_means(std::slice::from_ref(&phi), n, MAX_DIM).unwrap();
        let coarse = coarse_grain(std::slice::from_ref(&phi), 2, n, MAX_DIM).unwrap();
        let diff = coarse.operators()[0].sub(&plain.operators()[0]).unwrap();
        let deviation = operator_norm(&diff).unwrap();
        let allowance = coarse.reports()[0].boundary_bound + 2.0 / f64::from(2 * n + 1);
        pass &= deviation <= allowance + 1e-12;
        details.push(format!("n={n}: {deviation:.4} <= {allowance:.4}"));
    }
    verdict(
        10,
        pass,
        &format!(
            "measured ‖K − H‖ within reported bound + 2/(2n+1) at M = 2: {}",
            details.join("; ")
        ),
    );
    assert!(pass);
}

fn run_cli(cmd: &str, config: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_macrospin"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary must spawn");
    assert!(status.success(), "{cmd} run failed");
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
}

#[test]
fn criterion_11_determinism() {
    let configs_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("sample_configs");
    let work = tempfile::TempDir::new().unwrap();
    let runs = [
        ("freeenergy", "freeenergy_sigma_z.json"),
        ("entropy", "entropy_bloch_random.json"),
        ("contours", "contours_bloch_pair.json"),
        ("rankrate", "rankrate_sigma_z.json"),
        ("beta", "beta_biased.json"),
        ("coarsegrain", "coarsegrain_zz.json"),
    ];
    let mut pass = true;
    for (cmd, config_name) in runs {
        let config = configs_dir.join(config_name);
        let out_a = work.path().join(format!("{cmd}_a"));
        let out_b = work.path().join(format!("{cmd}_b"));
        run_cli(cmd, &config, &out_a);
        run_cli(cmd, &config, &out_b);
        pass &= dir_bytes(&out_a) == dir_bytes(&out_b);
    }
    verdict(
        11,
        pass,
        &format!(
            "byte-identical artifacts across repeated runs of {} commands with identical config and seed",
            runs.len()
        ),
    );
    assert!(pass);
}
