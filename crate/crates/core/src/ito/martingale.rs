//! Fixed-checkpoint martingale hypothesis test.
//!
//! At each checkpoint pair the ensemble mean increment should be zero; a
//! drift shows up as a large z-statistic, and serial dependence as lag-1
//! correlation of consecutive increments. Thresholds are deliberately loose
//! (Bonferroni-style) so a true martingale essentially never fails.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ito::integral::IntegralPath;
use crate::stats;

pub const DEFAULT_Z_CRIT: f64 = 4.0;
pub const DEFAULT_CORR_CRIT: f64 = 0.1;
pub const MIN_PATHS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleTestReport {
    pub checkpoints: Vec<f64>,
    pub increment_means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    pub lag1_corr: f64,
    pub z_crit: f64,
    pub corr_crit: f64,
    pub verdict: bool,
}

/// Test an ensemble of integral paths at the given checkpoint times.
///
/// An implicit checkpoint at `t = 0` starts the increment sequence. Needs at
/// least [`MIN_PATHS`] paths.
pub fn martingale_test(
    ensemble: &[IntegralPath],
    checkpoints: &[f64],
    z_crit: f64,
    corr_crit: f64,
) -> Result<MartingaleTestReport> {
    if ensemble.len() < MIN_PATHS {
        return Err(Error::InsufficientData {
            needed: MIN_PATHS,
            got: ensemble.len(),
        });
    }
    if checkpoints.is_empty() {
        return Err(Error::InvalidInput("need at least one checkpoint".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints[0] <= 0.0 {
        return Err(Error::InvalidInput(
            "checkpoints must be strictly increasing and positive".into(),
        ));
    }
    let grid = ensemble[0].grid();
    let mut indices = vec![0usize];
    for t in checkpoints {
        indices.push(grid.index_at(*t));
    }

    let n_incs = checkpoints.len();
    // increments[k][path]
    let mut increments = vec![Vec::with_capacity(ensemble.len()); n_incs];
    for path in ensemble {
        for k in 0..n_incs {
            increments[k].push(path.values[indices[k + 1]] - path.values[indices[k]]);
        }
    }

    let mut means = Vec::with_capacity(n_incs);
    let mut ses = Vec::with_capacity(n_incs);
    let mut zs = Vec::with_capacity(n_incs);
    for incs in &increments {
        let m = stats::mean(incs);
        let se = stats::std_error(incs);
        let z = if se > 0.0 {
            m / se
        } else if m == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        means.push(m);
        ses.push(se);
        zs.push(z);
    }
    let max_abs_z = zs.iter().map(|z| z.abs()).fold(0.0f64, f64::max);

    // lag-1 correlation pooled over paths and consecutive checkpoint pairs
    let lag1_corr = if n_incs >= 2 {
        let mut prev = Vec::new();
        let mut next = Vec::new();
        for k in 0..n_incs - 1 {
            prev.extend_from_slice(&increments[k]);
            next.extend_from_slice(&increments[k + 1]);
        }
        stats::pearson(&prev, &next)
    } else {
        0.0
    };

    let verdict = max_abs_z <= z_crit && lag1_corr.abs() <= corr_crit;
    Ok(MartingaleTestReport {
        checkpoints: checkpoints.to_vec(),
        increment_means: means,
        std_errors: ses,
        z_scores: zs,
        max_abs_z,
        lag1_corr,
        z_crit,
        corr_crit,
        verdict,
    })
}

/// Evenly spaced default checkpoints `{T/4, T/2, 3T/4, T}`.
pub fn default_checkpoints(horizon: f64) -> Vec<f64> {
    (1..=4).map(|k| horizon * k as f64 / 4.0).collect()
}
