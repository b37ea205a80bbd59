//! Moreau-envelope smoothing.
//!
//! `f_n(x) = inf_z f(z) + (n/2)|x - z|^2` is convex, below `f`, increases to
//! `f` pointwise as `n` grows, and has an `n`-Lipschitz gradient
//! `n (x - z*)`. The envelope (rather than Gaussian mollification, which
//! decreases to `f`) is what the increasing-approximation arguments need.

use crate::convex::envelope1d::Envelope1d;
use crate::convex::oracle::ConvexOracle;
use crate::convex::simplex::{moreau_pl, MAX_ENUMERATED_PIECES};
use crate::error::{Error, Result};
use crate::stats::norm2;

/// Iteration budget of the generic inner minimization.
const INNER_ITERS: usize = 1000;
/// Early-stop residual for the inner minimization.
const INNER_RESIDUAL_TOL: f64 = 1e-8;
/// Residuals above this (relative to `n (1 + |x|)`) count as failure.
const INNER_FAILURE_TOL: f64 = 1e-3;

enum Route {
    /// Exact piecewise closed form, one-dimensional max-of-affine.
    Exact1d(Envelope1d),
    /// Exact simplex-dual solve, multidimensional max-of-affine.
    ExactDual,
    /// Projected subgradient descent on the envelope objective.
    Iterative,
}

/// A smoothing level `f_n` of a convex oracle.
pub struct SmoothedConvex<'a> {
    base: &'a ConvexOracle,
    level: u32,
    route: Route,
}

/// Construct the Moreau envelope of `f` at parameter `n >= 1`.
pub fn smooth(f: &ConvexOracle, n: u32) -> Result<SmoothedConvex<'_>> {
    if n == 0 {
        return Err(Error::InvalidInput("smoothing level must be >= 1".into()));
    }
    let route = match f.pl() {
        Some(pl) if pl.dim() == 1 => Route::Exact1d(Envelope1d::build(pl)),
        Some(pl) if pl.k() <= MAX_ENUMERATED_PIECES => Route::ExactDual,
        _ => Route::Iterative,
    };
    Ok(SmoothedConvex {
        base: f,
        level: n,
        route,
    })
}

impl SmoothedConvex<'_> {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn base(&self) -> &ConvexOracle {
        self.base
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_grad(x)?.0)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_grad(x)?.1)
    }

    /// Envelope value and gradient at `x`.
    pub fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = f64::from(self.level);
        match &self.route {
            Route::Exact1d(env) => {
                let (v, g) = env.moreau(x[0], n);
                Ok((v, vec![g]))
            }
            Route::ExactDual => moreau_pl(self.base.pl().expect("dual route keeps pl"), x, n),
            Route::Iterative => self.eval_grad_iterative(x, n),
        }
    }

    /// Subgradient descent on `phi(z) = f(z) + (n/2)|z - x|^2` with steps
    /// `1/(n k)`, tracking the best iterate by objective value.
    fn eval_grad_iterative(&self, x: &[f64], n: f64) -> Result<(f64, Vec<f64>)> {
        let phi = |z: &[f64]| -> f64 {
            let pen: f64 = z.iter().zip(x).map(|(zi, xi)| (zi - xi) * (zi - xi)).sum();
            self.base.eval(z) + 0.5 * n * pen
        };
        let mut z = x.to_vec();
        let mut best_z = z.clone();
        let mut best_val = phi(&z);
        let mut residual = f64::INFINITY;
        for k in 1..=INNER_ITERS {
            let g = self.base.subgrad(&z);
            let step: Vec<f64> = g
                .iter()
                .zip(z.iter().zip(x))
                .map(|(gi, (zi, xi))| gi + n * (zi - xi))
                .collect();
            residual = norm2(&step);
            if residual <= INNER_RESIDUAL_TOL {
                best_z = z.clone();
                break;
            }
            let rate = 1.0 / (n * k as f64);
            for (zi, si) in z.iter_mut().zip(&step) {
                *zi -= rate * si;
            }
            let val = phi(&z);
            if val < best_val {
                best_val = val;
                best_z.clone_from(&z);
            }
        }
        let scale = n * (1.0 + norm2(x));
        if residual > INNER_FAILURE_TOL * scale {
            return Err(Error::SmoothingFailure { residual });
        }
        let grad: Vec<f64> = best_z
            .iter()
            .zip(x)
            .map(|(zi, xi)| n * (xi - zi))
            .collect();
        Ok((phi(&best_z), grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::pl::{random_pl, PLConvex};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn envelope_of_abs_values() {
        let f = ConvexOracle::from_pl(PLConvex::abs());
        let s1 = smooth(&f, 1).unwrap();
        assert_eq!(s1.eval_grad(&[0.0]).unwrap(), (0.0, vec![0.0]));
        assert_eq!(s1.eval_grad(&[2.0]).unwrap(), (1.5, vec![1.0]));
    }

    #[test]
    fn envelope_of_affine_keeps_gradient() {
        // inf_z l(z) + (n/2)|x-z|^2 = l(x) - |beta|^2/(2n): the gradient is
        // untouched, the value drops by the constant |beta|^2/(2n)
        let f = ConvexOracle::from_pl(PLConvex::affine(1.3, vec![0.5, -2.0]).unwrap());
        let n = 7u32;
        let s = smooth(&f, n).unwrap();
        let x = [0.4, -0.9];
        let (v, g) = s.eval_grad(&x).unwrap();
        let beta_sq = 0.5 * 0.5 + 2.0 * 2.0;
        assert!((v - (f.eval(&x) - beta_sq / (2.0 * f64::from(n)))).abs() < 1e-12);
        assert!((g[0] - 0.5).abs() < 1e-12 && (g[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_level_and_below_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let f = ConvexOracle::from_pl(random_pl(1, 4, &mut rng));
            let levels = [1u32, 2, 4, 8, 16, 32, 64];
            for _ in 0..20 {
                let x = [rng.random_range(-3.0..3.0)];
                let mut prev = f64::NEG_INFINITY;
                for n in levels {
                    let v = smooth(&f, n).unwrap().eval(&x).unwrap();
                    assert!(v >= prev, "envelope must be nondecreasing in n");
                    assert!(v <= f.eval(&x), "envelope must stay below f");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = ConvexOracle::from_pl(random_pl(1, 4, &mut rng));
        let s = smooth(&f, 8).unwrap();
        let h = 1e-5;
        for _ in 0..200 {
            let x = rng.random_range(-3.0..3.0);
            let g = s.grad(&[x]).unwrap()[0];
            let fd = (s.eval(&[x + h]).unwrap() - s.eval(&[x - h]).unwrap()) / (2.0 * h);
            let denom = g.abs().max(1.0);
            assert!(
                ((g - fd) / denom).abs() <= 1e-4,
                "grad {g} vs fd {fd} at {x}"
            );
        }
    }

    #[test]
    fn exact_dual_route_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let f = ConvexOracle::from_pl(random_pl(2, 4, &mut rng));
        let s = smooth(&f, 4).unwrap();
        let h = 1e-5;
        for _ in 0..50 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let (v, g) = s.eval_grad(&x).unwrap();
            assert!(v <= f.eval(&x) + 1e-12);
            for c in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[c] += h;
                xm[c] -= h;
                let fd = (s.eval(&xp).unwrap() - s.eval(&xm).unwrap()) / (2.0 * h);
                assert!(
                    (g[c] - fd).abs() <= 1e-4 * g[c].abs().max(1.0),
                    "coord {c}: grad {} vs fd {fd}",
                    g[c]
                );
            }
        }
    }

    #[test]
    fn iterative_route_quadratic() {
        // gradient of the envelope of (c/2) x^2 shrinks by n/(n+c)
        let f = ConvexOracle::quadratic(1, 1.0);
        for n in [1u32, 4, 16] {
            let s = smooth(&f, n).unwrap();
            let x = 1.5;
            let g = s.grad(&[x]).unwrap()[0];
            let expected = x * f64::from(n) / (f64::from(n) + 1.0);
            assert!(
                (g - expected).abs() < 2e-3 * expected.abs(),
                "n={n}: {g} vs {expected}"
            );
        }
    }

    #[test]
    fn level_zero_rejected() {
        let f = ConvexOracle::quadratic(1, 1.0);
        assert!(smooth(&f, 0).is_err());
    }

    #[test]
    fn broken_oracle_reports_smoothing_failure() {
        // an oscillating subgradient never lets the inner residual settle
        let f = ConvexOracle::custom(
            1,
            "broken",
            |x| x[0].abs(),
            |z| vec![if (z[0] * 1e6).sin() > 0.0 { 1e6 } else { -1e6 }],
        );
        let s = smooth(&f, 1).unwrap();
        match s.eval(&[0.5]) {
            Err(crate::error::Error::SmoothingFailure { residual }) => {
                assert!(residual > 1.0)
            }
            other => panic!("expected smoothing failure, got {other:?}"),
        }
    }

    #[test]
    fn gradients_stay_under_empirical_lipschitz_bound() {
        // the envelope gradient never exceeds the slope bound of the base
        // function on a slightly larger ball
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let r = 3.0;
        for _ in 0..5 {
            let f = ConvexOracle::from_pl(random_pl(1, 5, &mut rng));
            let (_, k_bound) = crate::lab::conditions::empirical_bounds(&f, r + 1.0);
            let mut max_grad = 0.0f64;
            for n in [1u32, 2, 4, 8, 16, 32, 64] {
                let s = smooth(&f, n).unwrap();
                for _ in 0..150 {
                    let x = [rng.random_range(-r..r)];
                    max_grad = max_grad.max(s.grad(&x).unwrap()[0].abs());
                }
            }
            assert!(
                max_grad <= k_bound + 1e-9,
                "max envelope gradient {max_grad} vs bound {k_bound}"
            );
        }
    }
}
