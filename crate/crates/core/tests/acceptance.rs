//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see the lines for passing
//! criteria too).

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use itolab::convex::{
    directional_derivative, geometric_schedule, random_pl, smooth, ConvexOracle, PLConvex,
    DEFAULT_SCHEDULE_TERMS,
};
use itolab::ito::{
    default_checkpoints, ito_integral, martingale_test, DEFAULT_CORR_CRIT, DEFAULT_Z_CRIT,
};
use itolab::lab::{
    abs_selection_independence, calibrated_margin, condition_estimates, decompose_pl,
    directional_limit_check, epsilon_convergence_experiment, identity_residual,
    mollified_selection_check, pl_pair_tanaka_residual, residual_flatness_check,
    smoothing_convergence_experiment, tanaka_baseline, PATH_ACTIVE_TOL,
};
use itolab::path::{
    build_semimartingale, ensemble, noise_ensemble, perturb_with_noise, substream, FvRecipe,
    Lane, MartingaleRecipe, ProcessRecipe, TimeGrid, Trajectory,
};
use itolab::stats;

fn criterion(name: &str, pass: bool, details: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[{name}] {verdict}: {details}");
    assert!(pass, "[{name}] FAIL: {details}");
}

const STEPS: usize = 1 << 12;

/// A1: ensemble mean of the discrete Tanaka local time of BM at 0 equals an
/// independent Monte Carlo estimate of E|B_1| within 3 combined standard
/// errors, 10^4 paths each, in under a minute.
#[test]
fn a1_tanaka_baseline() {
    let start = Instant::now();
    let report = tanaka_baseline(10_000, STEPS, 1.0, 2026).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        "A1",
        report.pass && elapsed < 60.0,
        &format!(
            "tanaka {:.5} ± {:.5} vs oracle {:.5} ± {:.5}, |z| = {:.2}, {elapsed:.1}s",
            report.tanaka_mean, report.tanaka_se, report.oracle_mean, report.oracle_se,
            report.z.abs()
        ),
    );
}

/// A2: for 50 random two-piece functions (d <= 3) and every simulated path,
/// the identity `f(X) - f(X_0) = N + S` is exact and `S` matches the
/// half-local-time reconstruction of `l_1(X) - l_2(X)` to 1e-12 pathwise.
#[test]
fn a2_pl_pair_exactness() {
    let grid = Arc::new(TimeGrid::uniform(STEPS, 1.0).unwrap());
    let mut frng = substream(2202, 0, Lane::Oracle);
    let mut worst_identity = 0.0f64;
    let mut worst_pair = 0.0f64;
    for fi in 0..50u64 {
        let dim = 1 + (fi as usize % 3);
        let f = loop {
            let cand = random_pl(dim, 2, &mut frng);
            // keep the start point off the coincidence set
            let x0: Vec<f64> = vec![0.2; dim];
            let w0 = cand.pieces()[0].eval(&x0) - cand.pieces()[1].eval(&x0);
            if w0.abs() > 1e-3 {
                break cand;
            }
        };
        let recipes = [
            ProcessRecipe {
                x0: vec![0.2; dim],
                martingale: MartingaleRecipe::ScaledBm { sigma: 1.0 },
                fv: FvRecipe::Zero,
                frozen: vec![],
            },
            ProcessRecipe {
                x0: vec![0.2; dim],
                martingale: MartingaleRecipe::StateSigma { base: 0.8, amp: 0.3 },
                fv: FvRecipe::LinearDrift { rate: vec![0.3; dim] },
                frozen: vec![],
            },
        ];
        for (ri, recipe) in recipes.iter().enumerate() {
            for pi in 0..2u64 {
                let mut rng = substream(2202, fi * 16 + ri as u64 * 4 + pi + 1, Lane::Base);
                let x = build_semimartingale(recipe, Arc::clone(&grid), &mut rng).unwrap();
                let d = decompose_pl(&f, &x, PATH_ACTIVE_TOL).unwrap();
                worst_identity = worst_identity.max(identity_residual(&f, &x, &d));
                worst_pair = worst_pair.max(pl_pair_tanaka_residual(&f, &x, &d).unwrap());
            }
        }
    }
    criterion(
        "A2",
        worst_identity <= 1e-12 && worst_pair <= 1e-12,
        &format!("identity residual {worst_identity:.2e}, pair residual {worst_pair:.2e} over 50 functions x 4 paths"),
    );
}

/// A3: residual flatness off the coincidence set at the calibrated margin,
/// and monotonicity within tolerance, on 10^3 BM paths for |x| and for a
/// random four-piece function.
#[test]
fn a3_residual_flatness() {
    let grid = Arc::new(TimeGrid::uniform(STEPS, 1.0).unwrap());
    let dt = 1.0 / STEPS as f64;
    let mut frng = substream(2303, 0, Lane::Oracle);
    let functions = [PLConvex::abs(), random_pl(1, 4, &mut frng)];
    let mut all_ok = true;
    let mut checked = 0usize;
    let mut details = String::new();
    for f in &functions {
        let margin = calibrated_margin(f, dt);
        let paths = ensemble(&ProcessRecipe::standard_bm(1), &grid, 1000, 2304).unwrap();
        for x in &paths {
            let d = decompose_pl(f, x, PATH_ACTIVE_TOL).unwrap();
            let r = residual_flatness_check(&d, f, x, margin).unwrap();
            checked += r.off_steps_checked;
            if !r.ok {
                all_ok = false;
                details = format!("{r:?}");
            }
        }
    }
    criterion(
        "A3",
        all_ok,
        &format!("2000 paths, {checked} off-coincidence steps checked{}", details),
    );
}

/// A4: the martingale test passes for int sgn(B) dB and fails for the
/// deterministic drift N(t) = t, 10^3 paths, documented thresholds.
#[test]
fn a4_martingale_certification() {
    let grid = Arc::new(TimeGrid::uniform(STEPS, 1.0).unwrap());
    let tanaka_parts: Vec<_> = (0..1000u64)
        .map(|i| {
            let mut rng = substream(2404, i, Lane::Base);
            let x = build_semimartingale(&ProcessRecipe::standard_bm(1), Arc::clone(&grid), &mut rng)
                .unwrap();
            let h = Trajectory::from_fn(grid.len(), 1, |j, _| itolab::ito::sgn(x.x().coord(j, 0)));
            ito_integral(&h, x.m(), &grid, "sgn(B)").unwrap()
        })
        .collect();
    let good = martingale_test(
        &tanaka_parts,
        &default_checkpoints(1.0),
        DEFAULT_Z_CRIT,
        DEFAULT_CORR_CRIT,
    )
    .unwrap();

    let drift_paths: Vec<_> = (0..1000u64)
        .map(|_| {
            let h = Trajectory::from_fn(grid.len(), 1, |_, _| 1.0);
            let t = Trajectory::from_fn(grid.len(), 1, |j, _| grid.times()[j]);
            ito_integral(&h, &t, &grid, "drift").unwrap()
        })
        .collect();
    let bad = martingale_test(
        &drift_paths,
        &default_checkpoints(1.0),
        DEFAULT_Z_CRIT,
        DEFAULT_CORR_CRIT,
    )
    .unwrap();

    criterion(
        "A4",
        good.verdict && !bad.verdict,
        &format!(
            "tanaka part max|z| = {:.2}, lag1 = {:.3} (pass); drift max|z| = {:.1} (fail as required)",
            good.max_abs_z, good.lag1_corr, bad.max_abs_z
        ),
    );
}

/// A5: smoothing convergence for |x| under a 0.25-perturbation: the H^2
/// error curve over n = 1..64 decreases modulo 2 standard errors and ends
/// at most a fifth of where it started, in under five minutes.
#[test]
fn a5_smoothing_convergence() {
    let start = Instant::now();
    let grid = Arc::new(TimeGrid::uniform(STEPS, 1.0).unwrap());
    let f = ConvexOracle::from_pl_left_derivative(PLConvex::abs()).unwrap();
    let n_paths = 512;
    let paths = ensemble(&ProcessRecipe::standard_bm(1), &grid, n_paths, 2505).unwrap();
    let noise = noise_ensemble(&grid, 1, n_paths, 2505);
    let xtilde: Vec<_> = paths
        .iter()
        .zip(&noise)
        .map(|(p, b)| perturb_with_noise(p, 0.25, b))
        .collect();
    let curve =
        smoothing_convergence_experiment(&f, &xtilde, &[1, 2, 4, 8, 16, 32, 64], 4.0, 2505)
            .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let monotone = curve.monotone_within(2.0);
    let ratio = curve.last() / curve.first();
    criterion(
        "A5",
        monotone && ratio <= 0.2 && elapsed < 300.0,
        &format!(
            "errors {:?}, final/first = {ratio:.3}, monotone = {monotone}, {elapsed:.1}s",
            curve
                .errors
                .iter()
                .map(|e| (e * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    );
}

/// A6: perturbation limit for |x| of BM over eps = 2^-1..2^-8: the H^2
/// distance curve decreases modulo 2 standard errors and its final point is
/// at most 0.05.
#[test]
fn a6_perturbation_limit() {
    let grid = Arc::new(TimeGrid::uniform(STEPS, 1.0).unwrap());
    let f = ConvexOracle::from_pl_left_derivative(PLConvex::abs()).unwrap();
    let n_paths = 1000;
    let paths = ensemble(&ProcessRecipe::standard_bm(1), &grid, n_paths, 2606).unwrap();
    let noise = noise_ensemble(&grid, 1, n_paths, 2606);
    let eps: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    let curve =
        epsilon_convergence_experiment(&f, &paths, &noise, &eps, 4.0, 5.0, 2606).unwrap();
    let monotone = curve.monotone_within(2.0);
    let last = curve.last();
    criterion(
        "A6",
        monotone && last <= 0.05,
        &format!(
            "errors {:?}, monotone = {monotone}, final = {last:.4} (threshold 0.05)",
            curve
                .errors
                .iter()
                .map(|e| (e * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    );
}

/// A7: condition estimates for |x|: e1 is dominated by eps * K * E[sup|B|]
/// (with exact equality to 1e-12 in the affine case) and e2, e3 vary by
/// less than 2x across the eps schedule.
#[test]
fn a7_condition_estimates() {
    let grid = Arc::new(TimeGrid::uniform(STEPS, 1.0).unwrap());
    let n_paths = 256;
    let eps_schedule = [0.5, 0.25, 0.125, 0.0625];
    let (r, r_prime) = (4.0, 5.0);

    // |x|: inequality against the sup oracle over the same stopped windows
    let f = ConvexOracle::from_pl_left_derivative(PLConvex::abs()).unwrap();
    let paths = ensemble(&ProcessRecipe::standard_bm(1), &grid, n_paths, 2707).unwrap();
    let noise = noise_ensemble(&grid, 1, n_paths, 2707);
    let mut abs_ok = true;
    let mut e2s = Vec::new();
    let mut e3s = Vec::new();
    for &eps in &eps_schedule {
        let rep = condition_estimates(&f, &paths, &noise, eps, r, r_prime).unwrap();
        let sup_oracle = stats::mean(
            &paths
                .iter()
                .zip(&noise)
                .map(|(x, b)| {
                    let pert = perturb_with_noise(x, eps, b);
                    let stop = itolab::path::stop_at_exit(x, r)
                        .min(itolab::path::stop_at_exit(&pert.result, r_prime))
                        .index;
                    (0..=stop).map(|j| b.coord(j, 0).abs()).fold(0.0f64, f64::max)
                })
                .collect::<Vec<_>>(),
        );
        if rep.e1 > eps * rep.k_r_prime * sup_oracle + 1e-12 {
            abs_ok = false;
        }
        e2s.push(rep.e2);
        e3s.push(rep.e3);
    }
    let spread = |v: &[f64]| {
        let max = v.iter().copied().fold(0.0f64, f64::max);
        let min = v.iter().copied().fold(f64::MAX, f64::min);
        max / min
    };
    let bounded_ok = spread(&e2s) < 2.0 && spread(&e3s) < 2.0;

    // affine case: exact equality
    let beta = -1.3;
    let fa = ConvexOracle::from_pl(PLConvex::affine(0.7, vec![beta]).unwrap());
    let recipe = ProcessRecipe {
        x0: vec![0.0],
        martingale: MartingaleRecipe::ScaledBm { sigma: 1.0 },
        fv: FvRecipe::LinearDrift { rate: vec![0.5] },
        frozen: vec![],
    };
    let apaths = ensemble(&recipe, &grid, n_paths, 2708).unwrap();
    let anoise = noise_ensemble(&grid, 1, n_paths, 2708);
    let eps = 0.25;
    let rep = condition_estimates(&fa, &apaths, &anoise, eps, r, r_prime).unwrap();
    let sup_oracle = stats::mean(
        &apaths
            .iter()
            .zip(&anoise)
            .map(|(x, b)| {
                let pert = perturb_with_noise(x, eps, b);
                let stop = itolab::path::stop_at_exit(x, r)
                    .min(itolab::path::stop_at_exit(&pert.result, r_prime))
                    .index;
                (0..=stop).map(|j| b.coord(j, 0).abs()).fold(0.0f64, f64::max)
            })
            .collect::<Vec<_>>(),
    );
    let affine_gap = (rep.e1 - beta.abs() * eps * sup_oracle).abs();

    criterion(
        "A7",
        abs_ok && bounded_ok && affine_gap <= 1e-12,
        &format!(
            "e1 bound holds = {abs_ok}, e2 spread {:.3}, e3 spread {:.3}, affine gap {affine_gap:.2e}",
            spread(&e2s),
            spread(&e3s)
        ),
    );
}

/// A8: mollified and directional-limit selections pass the subgradient
/// inequality at 10^3 random points of 20 random functions with zero
/// violations at 1e-6, and the three |x| kink selections give pathwise
/// identical integrals on paths avoiding exact grid zeros.
#[test]
fn a8_subgradient_selections() {
    let thetas = geometric_schedule(0.0625, DEFAULT_SCHEDULE_TERMS);
    let mollified =
        mollified_selection_check(20, 50, 3, &thetas, 256, 1e-6, 2808).unwrap();
    let epses = geometric_schedule(0.25, DEFAULT_SCHEDULE_TERMS);
    let directional = directional_limit_check(20, 50, 3, &epses, 1e-6, 2809).unwrap();
    let independence =
        abs_selection_independence(1000, STEPS, 1.0, 0.123, 2810, 1e-12).unwrap();
    criterion(
        "A8",
        mollified.pass && directional.pass && independence.pass,
        &format!(
            "mollified violations {}/{} (worst margin {:.1e}), directional violations {}/{}, selection gap {:.1e} over {} paths ({} skipped)",
            mollified.violations,
            mollified.points,
            mollified.worst_margin,
            directional.violations,
            directional.points,
            independence.max_terminal_gap,
            independence.n_paths,
            independence.skipped_paths
        ),
    );
}

/// A9: Moreau monotonicity holds exactly at 10^3 sampled points; the
/// smoothed gradient matches central finite differences to 1e-4 relative at
/// 10^3 points; the two-sided derivative bound and positive homogeneity
/// hold at 10^3 sampled (x, y).
#[test]
fn a9_convex_core_properties() {
    let mut rng = substream(2909, 0, Lane::Oracle);
    let functions: Vec<PLConvex> = std::iter::once(PLConvex::abs())
        .chain((0..3).map(|_| random_pl(1, 4, &mut rng)))
        .collect();
    let oracles: Vec<ConvexOracle> = functions
        .iter()
        .map(|f| ConvexOracle::from_pl(f.clone()))
        .collect();

    // exact monotone chain over 10^3 sampled points
    let mut monotone_ok = true;
    let levels = [1u32, 2, 4, 8, 16, 32, 64];
    for i in 0..1000 {
        let f = &oracles[i % oracles.len()];
        let x = [rng.random_range(-3.0..3.0)];
        let mut prev = f64::NEG_INFINITY;
        for n in levels {
            let v = smooth(f, n).unwrap().eval(&x).unwrap();
            if !(v >= prev && v <= f.eval(&x)) {
                monotone_ok = false;
            }
            prev = v;
        }
    }

    // gradient vs central finite difference, step 1e-5
    let h = 1e-5;
    let mut worst_rel = 0.0f64;
    for i in 0..1000 {
        let f = &oracles[i % oracles.len()];
        let s = smooth(f, 8).unwrap();
        let x = rng.random_range(-3.0..3.0);
        let g = s.grad(&[x]).unwrap()[0];
        let fd = (s.eval(&[x + h]).unwrap() - s.eval(&[x - h]).unwrap()) / (2.0 * h);
        worst_rel = worst_rel.max(((g - fd) / g.abs().max(1.0)).abs());
    }
    let grad_ok = worst_rel <= 1e-4;

    // two-sided bound and positive homogeneity at 10^3 sampled (x, y)
    let lambdas = geometric_schedule(1.0, DEFAULT_SCHEDULE_TERMS);
    let mut deriv_ok = true;
    for i in 0..1000 {
        let f = &oracles[i % oracles.len()];
        let x = [rng.random_range(-3.0..3.0)];
        let y = [if rng.random_range(0.0..1.0) < 0.5 { -1.0 } else { 1.0 }];
        let lam: f64 = rng.random_range(0.05..2.0);
        let d = directional_derivative(f, &x, &y, &lambdas).unwrap().value;
        let dneg = directional_derivative(f, &x, &[-y[0]], &lambdas).unwrap().value;
        let dscaled = directional_derivative(f, &x, &[lam * y[0]], &lambdas)
            .unwrap()
            .value;
        if d < -dneg - 1e-9 || (dscaled - lam * d).abs() > 1e-9 * (1.0 + d.abs()) {
            deriv_ok = false;
        }
    }

    criterion(
        "A9",
        monotone_ok && grad_ok && deriv_ok,
        &format!(
            "monotone chain exact = {monotone_ok}, worst grad-vs-fd rel {worst_rel:.2e}, derivative properties = {deriv_ok}"
        ),
    );
}
