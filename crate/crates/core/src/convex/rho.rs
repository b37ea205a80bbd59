//! Metric of uniform convergence on compact sets,
//! `rho(f, g) = sum_k 2^-k rho_k(f, g)` with
//! `rho_k = sup_{|x|<=k} |f-g| / (1 + sup_{|x|<=k} |f-g|)`.

use serde::Serialize;

use crate::convex::oracle::ConvexOracle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RhoDistance {
    /// Truncated sum over k = 1..=K.
    pub rho: f64,
    pub per_k: Vec<f64>,
    /// The dropped tail is at most `2^-K`.
    pub tail_bound: f64,
}

/// Estimate `rho` on deterministic lattices of `grid_density` points per
/// unit length inside each ball `|x| <= k`, k = 1..=K.
pub fn estimate_rho(
    f: &ConvexOracle,
    g: &ConvexOracle,
    k_max: usize,
    grid_density: usize,
) -> Result<RhoDistance> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    if k_max == 0 || grid_density == 0 {
        return Err(Error::InvalidInput("k_max and grid_density must be >= 1".into()));
    }
    let d = f.dim();
    let mut per_k = Vec::with_capacity(k_max);
    let mut rho = 0.0;
    for k in 1..=k_max {
        let radius = k as f64;
        let steps_per_axis = 2 * k * grid_density;
        let mut sup = 0.0f64;
        let mut x = vec![0.0; d];
        let mut index = vec![0usize; d];
        'grid: loop {
            for (xi, ix) in x.iter_mut().zip(&index) {
                *xi = -radius + *ix as f64 / grid_density as f64;
            }
            if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
                sup = sup.max((f.eval(&x) - g.eval(&x)).abs());
            }
            // odometer increment over the product lattice
            for c in 0..d {
                index[c] += 1;
                if index[c] <= steps_per_axis {
                    continue 'grid;
                }
                index[c] = 0;
            }
            break;
        }
        let rho_k = sup / (1.0 + sup);
        per_k.push(rho_k);
        rho += 0.5f64.powi(k as i32) * rho_k;
    }
    Ok(RhoDistance {
        rho,
        per_k,
        tail_bound: 0.5f64.powi(k_max as i32),
    })
}
