//! Tanaka local-time baseline: the ensemble mean of the discrete local time
//! of Brownian motion at 0 against an independent Monte Carlo estimate of
//! `E|B_1|`, same sample budget.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::ito::local_time::local_time_tanaka;
use crate::path::grid::TimeGrid;
use crate::path::rng::{substream, Lane};
use crate::path::semimartingale::{build_semimartingale, ProcessRecipe};
use crate::stats;

#[derive(Debug, Clone, Serialize)]
pub struct TanakaBaselineReport {
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub tanaka_mean: f64,
    pub tanaka_se: f64,
    pub oracle_mean: f64,
    pub oracle_se: f64,
    /// Gap in combined standard errors.
    pub z: f64,
    pub pass: bool,
}

pub fn tanaka_baseline(
    n_paths: usize,
    n_steps: usize,
    horizon: f64,
    seed: u64,
) -> Result<TanakaBaselineReport> {
    let grid = Arc::new(TimeGrid::uniform(n_steps, horizon)?);
    let recipe = ProcessRecipe::standard_bm(1);
    let results: Result<Vec<(f64, f64)>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64, Lane::Base);
            let path = build_semimartingale(&recipe, Arc::clone(&grid), &mut rng)?;
            let lt = local_time_tanaka(&path, 0.0)?.terminal();
            // independent draw of |B_horizon| on its own lane
            let mut orng = substream(seed, i as u64, Lane::Oracle);
            let z: f64 = orng.sample(StandardNormal);
            Ok((lt, (z * horizon.sqrt()).abs()))
        })
        .collect();
    let results = results?;
    let tanaka: Vec<f64> = results.iter().map(|r| r.0).collect();
    let oracle: Vec<f64> = results.iter().map(|r| r.1).collect();
    let tanaka_mean = stats::mean(&tanaka);
    let tanaka_se = stats::std_error(&tanaka);
    let oracle_mean = stats::mean(&oracle);
    let oracle_se = stats::std_error(&oracle);
    let combined = tanaka_se.hypot(oracle_se);
    let z = (tanaka_mean - oracle_mean) / combined;
    Ok(TanakaBaselineReport {
        n_paths,
        n_steps,
        horizon,
        tanaka_mean,
        tanaka_se,
        oracle_mean,
        oracle_se,
        z,
        pass: z.abs() <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_budget_baseline_agrees() {
        let r = tanaka_baseline(2000, 1 << 12, 1.0, 7).unwrap();
        assert!(r.pass, "{r:?}");
        // both sides estimate E|B_1| = sqrt(2/pi)
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!((r.tanaka_mean - target).abs() < 0.05);
        assert!((r.oracle_mean - target).abs() < 0.05);
    }
}
