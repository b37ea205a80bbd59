//! `H^p`-norm estimation: the L^p average of
//! `<M, M>_T^{1/2} + int_0^T |dA|` over an ensemble.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ito::variation::{quadratic_variation, total_variation};
use crate::path::semimartingale::SemimartingalePath;
use crate::stats;

#[derive(Debug, Clone, Serialize)]
pub struct HpEstimate {
    pub p: f64,
    pub value: f64,
    pub n_paths: usize,
    /// Path-level bootstrap standard error (200 resamples).
    pub std_error: f64,
}

const BOOTSTRAP_RESAMPLES: usize = 200;

/// Terminal-time quadratic variation stands in for the infinite-horizon
/// bracket; callers localize by stopping before building the ensemble.
pub fn hp_norm_estimate(paths: &[SemimartingalePath], p: f64, seed: u64) -> Result<HpEstimate> {
    if paths.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if p < 1.0 {
        return Err(Error::InvalidInput("p must be >= 1".into()));
    }
    let values: Vec<f64> = paths
        .iter()
        .map(|path| {
            let qv = quadratic_variation(path.m(), path.grid()).terminal();
            qv.sqrt() + total_variation(path.a())
        })
        .collect();
    let lp = |vals: &[f64]| -> f64 {
        stats::mean(&vals.iter().map(|v| v.powf(p)).collect::<Vec<_>>()).powf(1.0 / p)
    };
    Ok(HpEstimate {
        p,
        value: lp(&values),
        n_paths: paths.len(),
        std_error: stats::bootstrap_se(&values, BOOTSTRAP_RESAMPLES, seed, lp),
    })
}
