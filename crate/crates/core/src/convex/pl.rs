//! Max-of-affine convex functions with exact subdifferential structure.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::dot;

/// One affine piece `l(x) = alpha + beta . x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub alpha: f64,
    pub beta: Vec<f64>,
}

impl AffinePiece {
    pub fn new(alpha: f64, beta: Vec<f64>) -> Self {
        AffinePiece { alpha, beta }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.alpha + dot(&self.beta, x)
    }
}

/// Convex function given as the pointwise maximum of affine pieces.
///
/// Convexity holds by construction; the subdifferential at any point is the
/// convex hull of the gradients of the active pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLConvex {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

impl PLConvex {
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dim must be >= 1".into()));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidInput("need at least one affine piece".into()));
        }
        for p in &pieces {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if !p.alpha.is_finite() || p.beta.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidInput("piece coefficients must be finite".into()));
            }
        }
        Ok(PLConvex { dim, pieces })
    }

    /// `|x|` in one dimension, pieces ordered `(-x, x)`.
    pub fn abs() -> Self {
        PLConvex {
            dim: 1,
            pieces: vec![
                AffinePiece::new(0.0, vec![-1.0]),
                AffinePiece::new(0.0, vec![1.0]),
            ],
        }
    }

    /// A single affine function `alpha + beta . x`.
    pub fn affine(alpha: f64, beta: Vec<f64>) -> Result<Self> {
        let dim = beta.len();
        PLConvex::new(dim, vec![AffinePiece::new(alpha, beta)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn k(&self) -> usize {
        self.pieces.len()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f(x) = max_i (alpha_i + beta_i . x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self
            .pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Smallest index whose piece value is within `tol` of the maximum.
    ///
    /// Ties resolve to the lowest index. `tol = 0` is exact arithmetic; use a
    /// small positive `tol` on simulated paths.
    pub fn active_index(&self, x: &[f64], tol: f64) -> Result<usize> {
        self.check_dim(x)?;
        if tol < 0.0 {
            return Err(Error::InvalidInput("tol must be >= 0".into()));
        }
        let values: Vec<f64> = self.pieces.iter().map(|p| p.eval(x)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(values
            .iter()
            .position(|&v| v >= max - tol)
            .expect("max is attained"))
    }

    /// Gradient of the active (min-index) piece at `x`.
    pub fn min_index_gradient(&self, x: &[f64], tol: f64) -> Result<Vec<f64>> {
        let i = self.active_index(x, tol)?;
        Ok(self.pieces[i].beta.clone())
    }

    /// Gradients of all pieces active at `x` within `tol`, deduplicated.
    ///
    /// The subdifferential is the convex hull of the returned vectors.
    pub fn subdifferential(&self, x: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        if tol < 0.0 {
            return Err(Error::InvalidInput("tol must be >= 0".into()));
        }
        let values: Vec<f64> = self.pieces.iter().map(|p| p.eval(x)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut grads: Vec<Vec<f64>> = Vec::new();
        for (p, v) in self.pieces.iter().zip(&values) {
            if *v >= max - tol && !grads.iter().any(|g| g == &p.beta) {
                grads.push(p.beta.clone());
            }
        }
        Ok(grads)
    }

    /// Serialize to the structured text interchange form
    /// (`{"dim": .., "pieces": [{"alpha": .., "beta": [..]}, ..]}`).
    ///
    /// Floats are written in shortest round-trip form, so decoding recovers
    /// the exact values.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("PLConvex serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PLConvex = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad PLConvex text: {e}")))?;
        PLConvex::new(raw.dim, raw.pieces)
    }
}

/// Random max-of-affine function with standard normal coefficients.
pub fn random_pl<R: Rng>(dim: usize, k: usize, rng: &mut R) -> PLConvex {
    assert!(dim >= 1 && k >= 1);
    let pieces = (0..k)
        .map(|_| {
            let alpha: f64 = rng.sample(StandardNormal);
            let beta = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            AffinePiece::new(alpha, beta)
        })
        .collect();
    PLConvex { dim, pieces }
}
