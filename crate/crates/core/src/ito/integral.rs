//! Left-endpoint (Itô) stochastic integrals on the grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::grid::TimeGrid;
use crate::path::trajectory::Trajectory;

/// Running integral `value[j] = sum_{i<j} <h_i, m_{i+1} - m_i>`.
///
/// The integrand is indexed strictly before the increment, which hard-wires
/// the Itô (left-endpoint) interpretation.
#[derive(Debug, Clone)]
pub struct IntegralPath {
    grid: Arc<TimeGrid>,
    pub values: Vec<f64>,
    pub integrand_label: String,
}

impl IntegralPath {
    /// Wrap precomputed running values (must start at 0).
    pub fn from_values(grid: Arc<TimeGrid>, values: Vec<f64>, label: &str) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput("values length != grid length".into()));
        }
        if values.first() != Some(&0.0) {
            return Err(Error::InvalidInput("integral must start at 0".into()));
        }
        Ok(IntegralPath {
            grid,
            values,
            integrand_label: label.into(),
        })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }
}

pub fn ito_integral(
    h: &Trajectory,
    m: &Trajectory,
    grid: &Arc<TimeGrid>,
    label: &str,
) -> Result<IntegralPath> {
    if h.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: h.dim(),
        });
    }
    if h.len() != grid.len() || m.len() != grid.len() {
        return Err(Error::InvalidInput("integrand/integrator length != grid".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for j in 0..grid.len() - 1 {
        let hj = h.point(j);
        let inc: f64 = hj
            .iter()
            .zip(m.point(j + 1).iter().zip(m.point(j)))
            .map(|(hc, (next, prev))| hc * (next - prev))
            .sum();
        acc += inc;
        values.push(acc);
    }
    Ok(IntegralPath {
        grid: Arc::clone(grid),
        values,
        integrand_label: label.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::rng::{substream, Lane};
    use crate::path::semimartingale::simulate_bm;
    use crate::stats;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(n, 1.0).unwrap())
    }

    #[test]
    fn unit_integrand_telescopes() {
        let g = grid(64);
        let mut rng = substream(1, 0, Lane::Base);
        let m = simulate_bm(&g, 2, &mut rng);
        let h = Trajectory::from_fn(g.len(), 2, |_, _| 1.0);
        let int = ito_integral(&h, &m, &g, "ones").unwrap();
        for j in 0..g.len() {
            let expected: f64 = (0..2).map(|c| m.coord(j, c) - m.coord(0, c)).sum();
            assert!((int.values[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_integrand_is_zero() {
        let g = grid(16);
        let mut rng = substream(2, 0, Lane::Base);
        let m = simulate_bm(&g, 1, &mut rng);
        let h = Trajectory::zeros(g.len(), 1);
        let int = ito_integral(&h, &m, &g, "zero").unwrap();
        assert!(int.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bdb_matches_ito_formula() {
        // terminal of int B dB is (B_1^2 - 1)/2 up to (1 - QV)/2; the RMS of
        // that gap is sqrt(dt/2), bounded here by 3 sqrt(dt/2)
        let g = grid(4096);
        let errs: Vec<f64> = (0..1000)
            .map(|i| {
                let mut rng = substream(3, i, Lane::Base);
                let b = simulate_bm(&g, 1, &mut rng);
                let int = ito_integral(&b, &b, &g, "b").unwrap();
                let b1 = b.coord(g.len() - 1, 0);
                int.terminal() - 0.5 * (b1 * b1 - 1.0)
            })
            .collect();
        let rms = (stats::mean(&errs.iter().map(|e| e * e).collect::<Vec<_>>())).sqrt();
        let dt = 1.0f64 / 4096.0;
        assert!(rms <= 3.0 * (dt / 2.0).sqrt(), "rms {rms}");
    }

    #[test]
    fn linearity() {
        let g = grid(128);
        let mut rng = substream(4, 0, Lane::Base);
        let m = simulate_bm(&g, 1, &mut rng);
        let h1 = simulate_bm(&g, 1, &mut rng);
        let h2 = simulate_bm(&g, 1, &mut rng);
        let (alpha, beta) = (1.25, -0.75);
        let combo = Trajectory::from_fn(g.len(), 1, |j, c| {
            alpha * h1.coord(j, c) + beta * h2.coord(j, c)
        });
        let lhs = ito_integral(&combo, &m, &g, "combo").unwrap();
        let i1 = ito_integral(&h1, &m, &g, "h1").unwrap();
        let i2 = ito_integral(&h2, &m, &g, "h2").unwrap();
        for j in 0..g.len() {
            let rhs = alpha * i1.values[j] + beta * i2.values[j];
            assert!((lhs.values[j] - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn ito_isometry_sampled() {
        // ensemble variance of terminal int h dB matches mean of sum h^2 dt
        // for a bounded deterministic h, within 3 bootstrap standard errors
        let g = grid(512);
        let h = Trajectory::from_fn(g.len(), 1, |j, _| (g.times()[j] * 3.0).sin());
        let terminals: Vec<f64> = (0..2000)
            .map(|i| {
                let mut rng = substream(5, i, Lane::Base);
                let b = simulate_bm(&g, 1, &mut rng);
                ito_integral(&h, &b, &g, "h").unwrap().terminal()
            })
            .collect();
        let target: f64 = (0..g.n_steps())
            .map(|j| h.coord(j, 0) * h.coord(j, 0) * g.dt(j))
            .sum();
        let var = stats::variance(&terminals);
        let se = stats::bootstrap_se(&terminals, 200, 99, stats::variance);
        assert!(
            (var - target).abs() <= 3.0 * se,
            "variance {var} vs target {target} (se {se})"
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = grid(4);
        let h = Trajectory::zeros(g.len(), 2);
        let m = Trajectory::zeros(g.len(), 1);
        assert!(ito_integral(&h, &m, &g, "bad").is_err());
    }
}
