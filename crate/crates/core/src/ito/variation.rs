//! Quadratic (co)variation and total variation on the grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::grid::TimeGrid;
use crate::path::trajectory::Trajectory;

/// Running quadratic variation: nondecreasing, starts at 0. For vector
/// paths this is the trace, `sum_c (dm_c)^2`.
#[derive(Debug, Clone)]
pub struct QVPath {
    grid: Arc<TimeGrid>,
    pub values: Vec<f64>,
}

impl QVPath {
    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }
}

pub fn quadratic_variation(m: &Trajectory, grid: &Arc<TimeGrid>) -> QVPath {
    assert_eq!(m.len(), grid.len());
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..grid.len() - 1 {
        let inc: f64 = m
            .point(j + 1)
            .iter()
            .zip(m.point(j))
            .map(|(next, prev)| (next - prev) * (next - prev))
            .sum();
        acc += inc;
        values.push(acc);
    }
    QVPath {
        grid: Arc::clone(grid),
        values,
    }
}

/// Running covariation `sum_{i<j} sum_c dm_c dn_c`.
pub fn quadratic_covariation(m: &Trajectory, n: &Trajectory, grid: &Arc<TimeGrid>) -> Result<Vec<f64>> {
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: n.dim(),
        });
    }
    if m.len() != grid.len() || n.len() != grid.len() {
        return Err(Error::InvalidInput("path length != grid length".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..grid.len() - 1 {
        let inc: f64 = (0..m.dim())
            .map(|c| {
                (m.coord(j + 1, c) - m.coord(j, c)) * (n.coord(j + 1, c) - n.coord(j, c))
            })
            .sum();
        acc += inc;
        values.push(acc);
    }
    Ok(values)
}

/// Total variation: coordinate-wise l1 of the increments, summed.
pub fn total_variation(a: &Trajectory) -> f64 {
    *total_variation_running(a).last().expect("nonempty")
}

/// Running total variation, `tv[0] = 0`.
pub fn total_variation_running(a: &Trajectory) -> Vec<f64> {
    let mut values = Vec::with_capacity(a.len());
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..a.len() - 1 {
        let inc: f64 = a
            .point(j + 1)
            .iter()
            .zip(a.point(j))
            .map(|(next, prev)| (next - prev).abs())
            .sum();
        acc += inc;
        values.push(acc);
    }
    values
}

/// Running total variation of a scalar series.
pub fn total_variation_series(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    out.push(0.0);
    let mut acc = 0.0;
    for w in values.windows(2) {
        acc += (w[1] - w[0]).abs();
        out.push(acc);
    }
    out
}
