//! Time discretization of `[0, horizon]`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    uniform: bool,
}

impl TimeGrid {
    /// Uniform grid with `n_steps` steps, `times[j] = j * horizon / n_steps`.
    pub fn uniform(n_steps: usize, horizon: f64) -> Result<Self> {
        if n_steps < 1 {
            return Err(Error::InvalidInput("need at least one step".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        let times = (0..=n_steps)
            .map(|j| j as f64 * horizon / n_steps as f64)
            .collect();
        Ok(TimeGrid {
            times,
            uniform: true,
        })
    }

    /// Arbitrary grid; must start at 0 and be strictly increasing.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidInput("need at least two time points".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidInput("grid must start at t = 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        let dt0 = times[1] - times[0];
        let uniform = times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt0).abs() <= 1e-12 * dt0.max(1.0));
        Ok(TimeGrid { times, uniform })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of grid points (steps + 1).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn dt(&self, j: usize) -> f64 {
        self.times[j + 1] - self.times[j]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Largest index `j` with `times[j] <= t`.
    pub fn index_at(&self, t: f64) -> usize {
        match self.times.partition_point(|s| *s <= t) {
            0 => 0,
            p => p - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid() {
        let g = TimeGrid::uniform(4, 1.0).unwrap();
        assert_eq!(g.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.is_uniform());
        assert_eq!(g.n_steps(), 4);
        assert_eq!(g.horizon(), 1.0);
    }

    #[test]
    fn from_times_validation() {
        assert!(TimeGrid::from_times(vec![0.0, 0.1, 0.1]).is_err());
        assert!(TimeGrid::from_times(vec![0.5, 1.0]).is_err());
        let g = TimeGrid::from_times(vec![0.0, 0.1, 0.5]).unwrap();
        assert!(!g.is_uniform());
    }

    #[test]
    fn index_at_checkpoints() {
        let g = TimeGrid::uniform(4, 1.0).unwrap();
        assert_eq!(g.index_at(0.0), 0);
        assert_eq!(g.index_at(0.25), 1);
        assert_eq!(g.index_at(0.3), 1);
        assert_eq!(g.index_at(1.0), 4);
        assert_eq!(g.index_at(2.0), 4);
    }
}
