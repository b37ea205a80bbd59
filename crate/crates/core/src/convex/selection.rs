//! Distinguished subgradient selections: Gaussian-mollified averages and
//! single-direction limits.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::convex::oracle::{check_schedule, ConvexOracle};
use crate::convex::simplex::hull_distance;
use crate::error::{Error, Result};
use crate::stats::{mean, std_error};

/// Estimates settle when successive means agree within this many combined
/// standard errors.
const MOLLIFIED_CI_FACTOR: f64 = 4.0;

/// Oscillation beyond this (over the schedule tail) fails the limit.
const LIMIT_OSCILLATION_TOL: f64 = 1e-7;

/// Membership slack for the hull feasibility check.
pub const HULL_MEMBERSHIP_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct ThetaEstimate {
    pub theta: f64,
    pub mean: Vec<f64>,
    /// Largest per-coordinate standard error of the Monte Carlo mean.
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct MollifiedSubgradient {
    /// Estimate at the smallest theta.
    pub estimate: Vec<f64>,
    pub per_theta: Vec<ThetaEstimate>,
    /// False when successive estimates drift apart beyond Monte Carlo error;
    /// reported, not fatal.
    pub converged: bool,
}

/// Monte Carlo estimate of `E[grad f(x + theta N)]` along a shrinking theta
/// schedule, `N` standard Gaussian.
///
/// Samples are drawn in antithetic pairs, so selections with the symmetry of
/// `|x|` at the kink average to the midpoint exactly.
pub fn mollified_subgradient<R: Rng>(
    f: &ConvexOracle,
    x: &[f64],
    thetas: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<MollifiedSubgradient> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    check_schedule(thetas, "theta")?;
    let d = f.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let pairs = samples.div_ceil(2);
    let mut per_theta = Vec::with_capacity(thetas.len());
    let mut shifted = vec![0.0; d];
    for &theta in thetas {
        // per-coordinate means of the antithetic pair averages
        let mut pair_means: Vec<Vec<f64>> = vec![Vec::with_capacity(pairs); d];
        for _ in 0..pairs {
            let noise: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            for sign in [1.0, -1.0] {
                for (s, (xi, ni)) in shifted.iter_mut().zip(x.iter().zip(&noise)) {
                    *s = xi + sign * theta * ni;
                }
                let g = f.subgrad(&shifted);
                for (c, gc) in g.iter().enumerate() {
                    if sign > 0.0 {
                        pair_means[c].push(0.5 * gc);
                    } else {
                        *pair_means[c].last_mut().expect("pushed above") += 0.5 * gc;
                    }
                }
            }
        }
        let m: Vec<f64> = pair_means.iter().map(|c| mean(c)).collect();
        let se = pair_means
            .iter()
            .map(|c| std_error(c))
            .fold(0.0f64, f64::max);
        per_theta.push(ThetaEstimate {
            theta,
            mean: m,
            std_error: se,
        });
    }
    // settling is judged on the schedule tail: drift at large theta is the
    // expected approach to the limit, not divergence
    let converged = match per_theta.len() {
        0 | 1 => true,
        n => {
            let (a, b) = (&per_theta[n - 2], &per_theta[n - 1]);
            let gap = a
                .mean
                .iter()
                .zip(&b.mean)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0f64, f64::max);
            gap <= MOLLIFIED_CI_FACTOR * (a.std_error + b.std_error) + 1e-12
        }
    };
    Ok(MollifiedSubgradient {
        estimate: per_theta.last().expect("nonempty schedule").mean.clone(),
        per_theta,
        converged,
    })
}

#[derive(Debug, Clone)]
pub struct DirectionalLimit {
    /// Selection at the smallest epsilon.
    pub value: Vec<f64>,
    pub per_eps: Vec<(f64, Vec<f64>)>,
    /// Largest pairwise distance over the schedule tail.
    pub oscillation: f64,
    /// Distance from `value` to the convex hull of the subdifferential at
    /// `x`; available when the oracle carries an exact representation.
    pub hull_distance: Option<f64>,
    pub in_subdifferential: Option<bool>,
}

/// Subgradient limit along the ray `x + eps y`.
///
/// Checks Cauchy behaviour across the schedule tail and, for max-of-affine
/// oracles, membership of the limit in the subdifferential at `x` via a
/// small feasibility solve. A non-settling sequence on valid convex input
/// would falsify the limit and is reported as [`Error::LimitFailure`].
pub fn directional_limit(
    f: &ConvexOracle,
    x: &[f64],
    y: &[f64],
    eps_schedule: &[f64],
) -> Result<DirectionalLimit> {
    check_schedule(eps_schedule, "eps")?;
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput("direction y must be nonzero".into()));
    }
    let mut per_eps = Vec::with_capacity(eps_schedule.len());
    let mut shifted = vec![0.0; x.len()];
    for &eps in eps_schedule {
        for (s, (xi, yi)) in shifted.iter_mut().zip(x.iter().zip(y)) {
            *s = xi + eps * yi;
        }
        per_eps.push((eps, f.subgrad(&shifted)));
    }
    let tail = &per_eps[per_eps.len().saturating_sub(4)..];
    let mut oscillation = 0.0f64;
    for a in 0..tail.len() {
        for b in a + 1..tail.len() {
            let gap = tail[a]
                .1
                .iter()
                .zip(&tail[b].1)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0f64, f64::max);
            oscillation = oscillation.max(gap);
        }
    }
    if oscillation > LIMIT_OSCILLATION_TOL {
        return Err(Error::LimitFailure { oscillation });
    }
    let value = per_eps.last().expect("nonempty schedule").1.clone();
    let (hull_distance, in_subdifferential) = match f.pl() {
        Some(pl) => {
            let grads = pl.subdifferential(x, 1e-9)?;
            let dist = hull_distance(&grads, &value)?;
            (Some(dist), Some(dist <= HULL_MEMBERSHIP_TOL))
        }
        None => (None, None),
    };
    Ok(DirectionalLimit {
        value,
        per_eps,
        oscillation,
        hull_distance,
        in_subdifferential,
    })
}
