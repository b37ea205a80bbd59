//! Convex quadratic minimization over the probability simplex by support
//! enumeration.
//!
//! For the small piece counts used here (k <= 16) the optimal support can be
//! found exactly: for every candidate support solve the equality-constrained
//! KKT system and keep the best primal-feasible solution. Used for the exact
//! multidimensional Moreau envelope of max-of-affine functions and for
//! distance-to-convex-hull checks.

use nalgebra::{DMatrix, DVector};

use crate::convex::pl::PLConvex;
use crate::error::{Error, Result};
use crate::stats::dot;

/// Largest support size we are willing to enumerate (2^k subsets).
pub const MAX_ENUMERATED_PIECES: usize = 16;

const FEAS_TOL: f64 = 1e-10;

/// Minimize `w' Q w / 2 + c' w` over `{w >= 0, sum w = 1}`.
///
/// `Q` must be positive semidefinite. Returns the minimizing weights and the
/// objective value.
pub fn minimize_over_simplex(q: &DMatrix<f64>, c: &DVector<f64>) -> Result<(Vec<f64>, f64)> {
    let k = c.len();
    if k == 0 || q.nrows() != k || q.ncols() != k {
        return Err(Error::InvalidInput("simplex qp: bad shapes".into()));
    }
    if k > MAX_ENUMERATED_PIECES {
        return Err(Error::InvalidInput(format!(
            "simplex qp supports at most {MAX_ENUMERATED_PIECES} pieces, got {k}"
        )));
    }
    let objective = |w: &[f64]| -> f64 {
        let wv = DVector::from_column_slice(w);
        0.5 * (q * &wv).dot(&wv) + c.dot(&wv)
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let s = support.len();
        // KKT for the support: [Q_SS 1; 1' 0] [w; nu] = [-c_S; 1]
        let mut sys = DMatrix::zeros(s + 1, s + 1);
        let mut rhs = DVector::zeros(s + 1);
        for (a, &ia) in support.iter().enumerate() {
            for (b, &ib) in support.iter().enumerate() {
                sys[(a, b)] = q[(ia, ib)];
            }
            sys[(a, s)] = 1.0;
            sys[(s, a)] = 1.0;
            rhs[a] = -c[ia];
        }
        rhs[s] = 1.0;
        let Some(sol) = sys.lu().solve(&rhs) else {
            continue;
        };
        if (0..s).any(|a| sol[a] < -FEAS_TOL) {
            continue;
        }
        let mut w = vec![0.0; k];
        for (a, &ia) in support.iter().enumerate() {
            w[ia] = sol[a].max(0.0);
        }
        let total: f64 = w.iter().sum();
        for wi in w.iter_mut() {
            *wi /= total;
        }
        let val = objective(&w);
        if best.as_ref().is_none_or(|(_, b)| val < *b) {
            best = Some((w, val));
        }
    }
    best.ok_or_else(|| Error::InvalidInput("simplex qp: no feasible support".into()))
}

/// Euclidean distance from `g` to the convex hull of `points`.
pub fn hull_distance(points: &[Vec<f64>], g: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("hull of no points".into()));
    }
    let k = points.len();
    let d = g.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: points.iter().map(|p| p.len()).find(|l| *l != d).unwrap_or(d),
        });
    }
    // |P w - g|^2 / 2 = w' (P'P) w / 2 - (P'g)' w + |g|^2 / 2
    let mut q = DMatrix::zeros(k, k);
    let mut c = DVector::zeros(k);
    for a in 0..k {
        for b in 0..k {
            q[(a, b)] = dot(&points[a], &points[b]);
        }
        c[a] = -dot(&points[a], g);
    }
    let (_, val) = minimize_over_simplex(&q, &c)?;
    Ok((2.0 * val + dot(g, g)).max(0.0).sqrt())
}

/// Exact Moreau envelope of a max-of-affine function at parameter `n`.
///
/// Dualizing the inf-convolution gives
/// `f_n(x) = max_{w in simplex} sum_i w_i l_i(x) - |B w|^2 / (2n)`
/// with `B w = sum_i w_i beta_i`; the envelope gradient is `B w*`.
pub fn moreau_pl(f: &PLConvex, x: &[f64], n: f64) -> Result<(f64, Vec<f64>)> {
    let k = f.k();
    let mut q = DMatrix::zeros(k, k);
    let mut c = DVector::zeros(k);
    for a in 0..k {
        for b in 0..k {
            q[(a, b)] = dot(&f.pieces()[a].beta, &f.pieces()[b].beta) / n;
        }
        c[a] = -f.pieces()[a].eval(x);
    }
    let (w, val) = minimize_over_simplex(&q, &c)?;
    let mut grad = vec![0.0; f.dim()];
    for (wi, p) in w.iter().zip(f.pieces()) {
        for (g, b) in grad.iter_mut().zip(&p.beta) {
            *g += wi * b;
        }
    }
    Ok((-val, grad))
}
