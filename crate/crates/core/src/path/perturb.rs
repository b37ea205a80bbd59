//! Brownian perturbation `X + eps B` with an independent Brownian path `B`.

use rand::Rng;

use crate::path::semimartingale::{simulate_bm, SemimartingalePath};
use crate::path::trajectory::Trajectory;

/// A perturbed path together with its ingredients.
///
/// The perturbation joins the martingale component (`m + eps b`); the
/// finite-variation component is untouched.
#[derive(Debug, Clone)]
pub struct PerturbedPath {
    pub base: SemimartingalePath,
    pub epsilon: f64,
    /// The unit Brownian path used, kept for common-random-number reuse.
    pub b: Trajectory,
    pub result: SemimartingalePath,
}

/// Perturb with a freshly drawn independent Brownian path.
pub fn perturb<R: Rng>(base: &SemimartingalePath, epsilon: f64, rng: &mut R) -> PerturbedPath {
    let b = simulate_bm(base.grid(), base.dim(), rng);
    perturb_with_noise(base, epsilon, &b)
}

/// Perturb with a caller-supplied Brownian path (common random numbers
/// across epsilon values).
pub fn perturb_with_noise(base: &SemimartingalePath, epsilon: f64, b: &Trajectory) -> PerturbedPath {
    assert!(epsilon >= 0.0, "epsilon must be >= 0");
    assert_eq!(b.dim(), base.dim());
    assert_eq!(b.len(), base.len());
    let m_tilde = Trajectory::from_fn(base.len(), base.dim(), |j, c| {
        base.m().coord(j, c) + epsilon * b.coord(j, c)
    });
    let result = SemimartingalePath::new(
        base.grid().clone(),
        base.x0().to_vec(),
        m_tilde,
        base.a().clone(),
    )
    .expect("perturbation preserves path validity");
    PerturbedPath {
        base: base.clone(),
        epsilon,
        b: b.clone(),
        result,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::grid::TimeGrid;
    use crate::path::rng::{substream, Lane};
    use crate::path::semimartingale::{build_semimartingale, ProcessRecipe};
    use crate::stats;
    use std::sync::Arc;

    #[test]
    fn zero_epsilon_is_identity() {
        let g = Arc::new(TimeGrid::uniform(128, 1.0).unwrap());
        let mut rng = substream(1, 0, Lane::Base);
        let base = build_semimartingale(&ProcessRecipe::standard_bm(1), g, &mut rng).unwrap();
        let mut prng = substream(1, 0, Lane::Perturbation);
        let p = perturb(&base, 0.0, &mut prng);
        assert_eq!(p.result.x().as_slice(), base.x().as_slice());
    }

    #[test]
    fn additivity_and_decomposition() {
        let g = Arc::new(TimeGrid::uniform(512, 1.0).unwrap());
        let mut rng = substream(2, 3, Lane::Base);
        let base = build_semimartingale(&ProcessRecipe::standard_bm(2), g, &mut rng).unwrap();
        let mut prng = substream(2, 3, Lane::Perturbation);
        let p = perturb(&base, 0.5, &mut prng);
        // decomposition identity stays bit-exact after the transformation
        assert_eq!(p.result.decomposition_residual(), 0.0);
        // additivity: x_tilde - x = eps * b up to one rounding of the rebuild
        for j in 0..base.len() {
            for c in 0..2 {
                let lhs = p.result.x().coord(j, c) - base.x().coord(j, c);
                let rhs = 0.5 * p.b.coord(j, c);
                assert!((lhs - rhs).abs() <= 1e-12, "j={j} c={c}: {lhs} vs {rhs}");
            }
        }
        // the fv part is untouched
        assert_eq!(p.result.a().as_slice(), base.a().as_slice());
    }

    #[test]
    fn marginal_of_perturbed_constant_path_is_gaussian() {
        // base identically 0, eps = 0.5: x(1) ~ N(0, 0.25); KS at level 0.01
        // against the exact normal CDF, critical value 1.628/sqrt(n)
        let g = Arc::new(TimeGrid::uniform(64, 1.0).unwrap());
        let recipe = ProcessRecipe {
            x0: vec![0.0],
            martingale: crate::path::semimartingale::MartingaleRecipe::Zero,
            fv: crate::path::semimartingale::FvRecipe::Zero,
            frozen: vec![],
        };
        let n = 10_000;
        let terminals: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = substream(11, i as u64, Lane::Base);
                let base = build_semimartingale(&recipe, Arc::clone(&g), &mut rng).unwrap();
                let mut prng = substream(11, i as u64, Lane::Perturbation);
                let p = perturb(&base, 0.5, &mut prng);
                p.result.x().coord(g.len() - 1, 0)
            })
            .collect();
        let d = stats::ks_statistic(&terminals, |x| stats::normal_cdf(x / 0.5));
        assert!(d < stats::ks_critical_001(n), "KS statistic {d}");
    }

    #[test]
    fn perturbation_noise_is_uncorrelated_with_base() {
        // terminal <M, eps B> over 10^3 paths: 0 within 3 standard errors
        let g = Arc::new(TimeGrid::uniform(256, 1.0).unwrap());
        let eps = 0.5;
        let cov: Vec<f64> = (0..1000)
            .map(|i| {
                let mut rng = substream(13, i as u64, Lane::Base);
                let base =
                    build_semimartingale(&ProcessRecipe::standard_bm(1), Arc::clone(&g), &mut rng)
                        .unwrap();
                let mut prng = substream(13, i as u64, Lane::Perturbation);
                let p = perturb(&base, eps, &mut prng);
                (0..g.n_steps())
                    .map(|j| {
                        let dm = base.m().coord(j + 1, 0) - base.m().coord(j, 0);
                        let db = eps * (p.b.coord(j + 1, 0) - p.b.coord(j, 0));
                        dm * db
                    })
                    .sum()
            })
            .collect();
        let z = stats::mean(&cov) / stats::std_error(&cov);
        assert!(z.abs() < 3.0, "z = {z}");
    }
}
