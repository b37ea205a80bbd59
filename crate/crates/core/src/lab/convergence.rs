//! Convergence curves in the `H^2` metric.
//!
//! Both experiments estimate `|| int g dM ||_{H^2}` through its
//! quadratic-variation representation: the ensemble mean of
//! `sum_j (g_j . dm_j)^2` up to the stopping index, square-rooted. That is
//! the low-variance route; sup-norm estimates are never used.

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::oracle::{check_schedule, ConvexOracle};
use crate::convex::smooth::smooth;
use crate::error::{Error, Result};
use crate::path::perturb::{perturb_with_noise, PerturbedPath};
use crate::path::semimartingale::SemimartingalePath;
use crate::path::stopping::stop_at_exit;
use crate::path::trajectory::Trajectory;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Smoothing,
    Perturbation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceCurve {
    pub params: Vec<f64>,
    pub errors: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub kind: CurveKind,
}

impl ConvergenceCurve {
    /// Monotone decrease modulo noise: `errors[i+1] <= errors[i] + c * se_{i+1}`.
    pub fn monotone_within(&self, c: f64) -> bool {
        self.errors
            .windows(2)
            .zip(self.stderrs.iter().skip(1))
            .all(|(w, se)| w[1] <= w[0] + c * se)
    }

    pub fn first(&self) -> f64 {
        self.errors[0]
    }

    pub fn last(&self) -> f64 {
        *self.errors.last().expect("nonempty curve")
    }
}

const BOOTSTRAP_RESAMPLES: usize = 200;

fn sqrt_mean(values: &[f64]) -> f64 {
    stats::mean(values).max(0.0).sqrt()
}

fn curve_point(per_path_qv: &[f64], bootstrap_seed: u64) -> (f64, f64) {
    let err = sqrt_mean(per_path_qv);
    let se = stats::bootstrap_se(per_path_qv, BOOTSTRAP_RESAMPLES, bootstrap_seed, sqrt_mean);
    (err, se)
}

/// Convergence of the smoothed gradients: for each level `n` estimate
/// `|| int (grad f_n(X~) - selection(X~)) dM~ ||_{H^2}` on the ensemble,
/// stopped at the exit of the ball of radius `r`.
///
/// The same paths serve every level (common random numbers), so the curve
/// is monotone up to Monte Carlo noise.
pub fn smoothing_convergence_experiment(
    f: &ConvexOracle,
    xtilde: &[PerturbedPath],
    n_levels: &[u32],
    r: f64,
    bootstrap_seed: u64,
) -> Result<ConvergenceCurve> {
    if xtilde.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if n_levels.is_empty() {
        return Err(Error::InvalidInput("need at least one smoothing level".into()));
    }
    if n_levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("n_levels must be strictly increasing".into()));
    }
    let stops: Vec<usize> = xtilde
        .par_iter()
        .map(|p| stop_at_exit(&p.result, r).index)
        .collect();

    let mut params = Vec::with_capacity(n_levels.len());
    let mut errors = Vec::with_capacity(n_levels.len());
    let mut stderrs = Vec::with_capacity(n_levels.len());
    for &n in n_levels {
        let smoothed = smooth(f, n)?;
        let per_path: Result<Vec<f64>> = xtilde
            .par_iter()
            .zip(&stops)
            .map(|(p, &stop)| {
                let x = p.result.x();
                let m = p.result.m();
                let d = p.result.dim();
                let mut qv = 0.0;
                for j in 0..stop {
                    let grad_n = smoothed.grad(x.point(j))?;
                    let sel = f.subgrad(x.point(j));
                    let inc: f64 = (0..d)
                        .map(|c| (grad_n[c] - sel[c]) * (m.coord(j + 1, c) - m.coord(j, c)))
                        .sum();
                    qv += inc * inc;
                }
                Ok(qv)
            })
            .collect();
        let (err, se) = curve_point(&per_path?, bootstrap_seed);
        params.push(f64::from(n));
        errors.push(err);
        stderrs.push(se);
    }
    Ok(ConvergenceCurve {
        params,
        errors,
        stderrs,
        kind: CurveKind::Smoothing,
    })
}

/// Convergence of the perturbed integral to the base integral: for each
/// epsilon estimate the `H^2` distance between `int sel(X~) dM~` and
/// `int sel(X) dM`, both stopped at `T = T_r(X) ^ T~_{r'}(X~)`, with the
/// same Brownian path reused across epsilon values.
pub fn epsilon_convergence_experiment(
    f: &ConvexOracle,
    paths: &[SemimartingalePath],
    noise: &[Trajectory],
    eps_schedule: &[f64],
    r: f64,
    r_prime: f64,
    bootstrap_seed: u64,
) -> Result<ConvergenceCurve> {
    if paths.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if paths.len() != noise.len() {
        return Err(Error::InvalidInput("paths and noise ensembles differ in size".into()));
    }
    check_schedule(eps_schedule, "eps")?;
    if !(r_prime > r) {
        return Err(Error::InvalidInput(format!("need r' > r, got r'={r_prime}, r={r}")));
    }

    let base_stops: Vec<usize> = paths
        .par_iter()
        .map(|p| stop_at_exit(p, r).index)
        .collect();

    let mut params = Vec::with_capacity(eps_schedule.len());
    let mut errors = Vec::with_capacity(eps_schedule.len());
    let mut stderrs = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let per_path: Vec<f64> = paths
            .par_iter()
            .zip(noise.par_iter().zip(&base_stops))
            .map(|(x, (b, &base_stop))| {
                let pert = perturb_with_noise(x, eps, b);
                let stop = base_stop.min(stop_at_exit(&pert.result, r_prime).index);
                let d = x.dim();
                let xt = pert.result.x();
                let mt = pert.result.m();
                let mut qv = 0.0;
                for j in 0..stop {
                    let sel_t = f.subgrad(xt.point(j));
                    let sel = f.subgrad(x.x().point(j));
                    let inc: f64 = (0..d)
                        .map(|c| {
                            sel_t[c] * (mt.coord(j + 1, c) - mt.coord(j, c))
                                - sel[c] * (x.m().coord(j + 1, c) - x.m().coord(j, c))
                        })
                        .sum();
                    qv += inc * inc;
                }
                qv
            })
            .collect();
        let (err, se) = curve_point(&per_path, bootstrap_seed);
        params.push(eps);
        errors.push(err);
        stderrs.push(se);
    }
    Ok(ConvergenceCurve {
        params,
        errors,
        stderrs,
        kind: CurveKind::Perturbation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::pl::PLConvex;
    use crate::path::grid::TimeGrid;
    use crate::path::rng::{substream, Lane};
    use crate::path::semimartingale::{build_semimartingale, noise_ensemble, ProcessRecipe};
    use std::sync::Arc;

    fn bm_ensemble(n: usize, steps: usize, seed: u64) -> Vec<SemimartingalePath> {
        let g = Arc::new(TimeGrid::uniform(steps, 1.0).unwrap());
        (0..n)
            .map(|i| {
                let mut rng = substream(seed, i as u64, Lane::Base);
                build_semimartingale(&ProcessRecipe::standard_bm(1), Arc::clone(&g), &mut rng)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn smoothing_curve_smooth_oracle_shrinks_like_envelope() {
        // quadratic oracle: grad f_n - grad f = -c^2 x / (n + c), so the
        // curve decays like 1/(n + 1)
        let f = ConvexOracle::quadratic(1, 1.0);
        let paths = bm_ensemble(64, 512, 81);
        let noise = noise_ensemble(paths[0].grid(), 1, 64, 81);
        let xtilde: Vec<PerturbedPath> = paths
            .iter()
            .zip(&noise)
            .map(|(p, b)| perturb_with_noise(p, 0.25, b))
            .collect();
        let curve =
            smoothing_convergence_experiment(&f, &xtilde, &[1, 2, 4, 8], 4.0, 5).unwrap();
        assert!(curve.monotone_within(2.0));
        let expected_ratio = 2.0 / 9.0; // (1/(8+1)) / (1/(1+1))
        let ratio = curve.last() / curve.first();
        assert!(
            (ratio - expected_ratio).abs() < 0.05,
            "ratio {ratio} vs {expected_ratio}"
        );
    }

    #[test]
    fn smoothing_single_level_gives_single_point() {
        let f = ConvexOracle::from_pl(PLConvex::abs());
        let paths = bm_ensemble(16, 256, 82);
        let noise = noise_ensemble(paths[0].grid(), 1, 16, 82);
        let xtilde: Vec<PerturbedPath> = paths
            .iter()
            .zip(&noise)
            .map(|(p, b)| perturb_with_noise(p, 0.25, b))
            .collect();
        let curve = smoothing_convergence_experiment(&f, &xtilde, &[4], 4.0, 5).unwrap();
        assert_eq!(curve.errors.len(), 1);
        assert!(curve.monotone_within(2.0));
    }

    #[test]
    fn epsilon_curve_affine_is_linear_in_eps() {
        // identical integrands: the distance is |beta| eps (E <B>_T)^{1/2}
        let beta = 1.7;
        let f = ConvexOracle::from_pl(PLConvex::affine(0.4, vec![beta]).unwrap());
        let paths = bm_ensemble(128, 512, 83);
        let noise = noise_ensemble(paths[0].grid(), 1, 128, 83);
        let eps = vec![0.5, 0.25, 0.125];
        let curve =
            epsilon_convergence_experiment(&f, &paths, &noise, &eps, 4.0, 5.0, 5).unwrap();
        for (e, err) in curve.params.iter().zip(&curve.errors) {
            // <B>_T concentrates at T = 1
            let expected = beta * e;
            assert!(
                (err - expected).abs() < 0.05 * expected,
                "eps {e}: {err} vs {expected}"
            );
        }
        assert!(curve.monotone_within(2.0));
    }

    #[test]
    fn epsilon_single_point_schedule() {
        let f = ConvexOracle::from_pl_left_derivative(PLConvex::abs()).unwrap();
        let paths = bm_ensemble(32, 256, 84);
        let noise = noise_ensemble(paths[0].grid(), 1, 32, 84);
        let curve =
            epsilon_convergence_experiment(&f, &paths, &noise, &[0.25], 4.0, 5.0, 5).unwrap();
        assert_eq!(curve.errors.len(), 1);
    }

    #[test]
    fn epsilon_rejects_bad_radii() {
        let f = ConvexOracle::from_pl(PLConvex::abs());
        let paths = bm_ensemble(4, 64, 85);
        let noise = noise_ensemble(paths[0].grid(), 1, 4, 85);
        assert!(
            epsilon_convergence_experiment(&f, &paths, &noise, &[0.5, 0.25], 5.0, 4.0, 5).is_err()
        );
    }
}
