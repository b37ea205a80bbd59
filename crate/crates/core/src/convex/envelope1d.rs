//! Canonical interval structure of a one-dimensional max-of-affine function.
//!
//! Reducing the pieces to their upper envelope gives strictly increasing
//! slopes separated by breakpoints. That structure makes the proximal map,
//! the left derivative, and Gaussian-averaged subgradients exact.

use crate::convex::pl::PLConvex;
use crate::stats::normal_cdf;

#[derive(Debug, Clone)]
pub struct Envelope1d {
    /// Slopes of the active pieces, strictly increasing left to right.
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
    /// `breaks[i]` separates the region of `slopes[i]` from `slopes[i+1]`.
    breaks: Vec<f64>,
}

impl Envelope1d {
    /// Build the upper envelope. Panics if `f` is not one-dimensional.
    pub fn build(f: &PLConvex) -> Self {
        assert_eq!(f.dim(), 1, "Envelope1d needs a one-dimensional function");
        let mut lines: Vec<(f64, f64)> = f
            .pieces()
            .iter()
            .map(|p| (p.beta[0], p.alpha))
            .collect();
        lines.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
        // among equal slopes only the largest intercept can be active
        lines.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                if next.1 > kept.1 {
                    kept.1 = next.1;
                }
                true
            } else {
                false
            }
        });

        let mut slopes: Vec<f64> = Vec::with_capacity(lines.len());
        let mut intercepts: Vec<f64> = Vec::with_capacity(lines.len());
        let mut breaks: Vec<f64> = Vec::with_capacity(lines.len());
        for (g, c) in lines {
            loop {
                match slopes.len() {
                    0 => break,
                    n => {
                        // x where the candidate overtakes the current last line
                        let x = (intercepts[n - 1] - c) / (g - slopes[n - 1]);
                        if n >= 2 && x <= breaks[n - 2] {
                            // last line is dominated everywhere right of its own entry
                            slopes.pop();
                            intercepts.pop();
                            breaks.pop();
                        } else {
                            breaks.push(x);
                            break;
                        }
                    }
                }
            }
            slopes.push(g);
            intercepts.push(c);
        }
        Envelope1d {
            slopes,
            intercepts,
            breaks,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment_left(x);
        self.intercepts[i] + self.slopes[i] * x
    }

    /// Index of the piece active on `(breaks[i-1], breaks[i]]` containing `x`.
    fn segment_left(&self, x: f64) -> usize {
        self.breaks.partition_point(|b| *b < x)
    }

    /// Left derivative: slope of the piece active immediately left of `x`.
    pub fn left_derivative(&self, x: f64) -> f64 {
        self.slopes[self.segment_left(x)]
    }

    /// Endpoints of the subdifferential interval at `x`.
    pub fn subdifferential_interval(&self, x: f64) -> (f64, f64) {
        let lo = self.segment_left(x);
        let hi = self.breaks.partition_point(|b| *b <= x);
        (self.slopes[lo], self.slopes[hi])
    }

    /// Kink locations.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Proximal point `argmin_z f(z) + (n/2)(z - x)^2`, exact.
    ///
    /// The optimality condition `n (x - z) ∈ ∂f(z)` partitions the x-axis
    /// into cells: interiors map to `x - g_i / n`, breakpoints absorb the
    /// x-interval `[b_i + g_i/n, b_i + g_{i+1}/n]`.
    pub fn prox(&self, x: f64, n: f64) -> f64 {
        debug_assert!(n > 0.0);
        for (i, &b) in self.breaks.iter().enumerate() {
            if x < b + self.slopes[i] / n {
                return x - self.slopes[i] / n;
            }
            if x <= b + self.slopes[i + 1] / n {
                return b;
            }
        }
        x - self.slopes[self.slopes.len() - 1] / n
    }

    /// Moreau envelope value and gradient at `x` for parameter `n`.
    pub fn moreau(&self, x: f64, n: f64) -> (f64, f64) {
        let z = self.prox(x, n);
        let value = self.eval(z) + 0.5 * n * (x - z) * (x - z);
        (value, n * (x - z))
    }

    /// Exact Gaussian average `E[grad f(x + theta N)]` of the interval
    /// selection, `N` standard normal.
    ///
    /// Kinks have probability zero under the Gaussian, so any tie rule gives
    /// the same value.
    pub fn mollified_gradient(&self, x: f64, theta: f64) -> f64 {
        debug_assert!(theta > 0.0);
        let mut acc = 0.0;
        let mut lower_cdf = 0.0;
        for (i, &g) in self.slopes.iter().enumerate() {
            let upper_cdf = if i < self.breaks.len() {
                normal_cdf((self.breaks[i] - x) / theta)
            } else {
                1.0
            };
            acc += g * (upper_cdf - lower_cdf);
            lower_cdf = upper_cdf;
        }
        acc
    }
}
