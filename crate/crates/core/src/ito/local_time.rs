//! Local time at a level: the discrete Tanaka residual, cross-checked by an
//! occupation-density estimator.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::grid::TimeGrid;
use crate::path::semimartingale::SemimartingalePath;
use crate::path::trajectory::Trajectory;

/// Sign convention used throughout: `sgn(0) = -1` (the left derivative of
/// `|x|`).
pub fn sgn(v: f64) -> f64 {
    if v <= 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalTimeMethod {
    Tanaka,
    Occupation,
}

#[derive(Debug, Clone)]
pub struct LocalTimePath {
    grid: Arc<TimeGrid>,
    pub values: Vec<f64>,
    pub method: LocalTimeMethod,
}

impl LocalTimePath {
    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }
}

/// Discrete Tanaka residual of a scalar series `w` at `level`:
/// `L_j = |w_j - level| - |w_0 - level| - sum_{i<j} sgn(w_i - level)(w_{i+1} - w_i)`.
///
/// This is exact telescoping arithmetic; each increment is nonnegative up to
/// rounding.
pub fn tanaka_series(w: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len());
    out.push(0.0);
    let mut ito_sum = 0.0;
    for j in 1..w.len() {
        ito_sum += sgn(w[j - 1] - level) * (w[j] - w[j - 1]);
        out.push((w[j] - level).abs() - (w[0] - level).abs() - ito_sum);
    }
    out
}

/// Tanaka local time of a one-dimensional semimartingale path.
pub fn local_time_tanaka(x: &SemimartingalePath, level: f64) -> Result<LocalTimePath> {
    if x.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            got: x.dim(),
            context: "local time needs a scalar path",
        });
    }
    let series: Vec<f64> = (0..x.len()).map(|j| x.x().coord(j, 0)).collect();
    Ok(LocalTimePath {
        grid: Arc::clone(x.grid()),
        values: tanaka_series(&series, level),
        method: LocalTimeMethod::Tanaka,
    })
}

/// Occupation-density estimate of the terminal local time:
/// `(1 / 2h) sum_j 1{|x_j - level| < h} (x_{j+1} - x_j)^2`.
pub fn local_time_occupation(
    x: &Trajectory,
    level: f64,
    bandwidth: f64,
) -> Result<f64> {
    if x.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            got: x.dim(),
            context: "local time needs a scalar path",
        });
    }
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidInput("bandwidth must be positive".into()));
    }
    let mut acc = 0.0;
    for j in 0..x.len() - 1 {
        if (x.coord(j, 0) - level).abs() < bandwidth {
            let d = x.coord(j + 1, 0) - x.coord(j, 0);
            acc += d * d;
        }
    }
    Ok(acc / (2.0 * bandwidth))
}

/// Default occupation bandwidth, `4 sqrt(dt)` on a uniform grid.
pub fn default_bandwidth(grid: &TimeGrid) -> f64 {
    4.0 * (grid.horizon() / grid.n_steps() as f64).sqrt()
}
