//! General convex functions as evaluation + subgradient-selection callbacks.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::convex::envelope1d::Envelope1d;
use crate::convex::pl::PLConvex;
use crate::error::{Error, Result};
use crate::stats::{dot, norm2};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type LipFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Convex function with a chosen measurable subgradient selection.
///
/// `subgrad` must return some element of the subdifferential at every point;
/// which element is the caller's choice. When the oracle is backed by a
/// [`PLConvex`] the exact representation is kept alongside the callbacks so
/// smoothing and hull checks can use closed forms.
pub struct ConvexOracle {
    dim: usize,
    eval: Box<EvalFn>,
    subgrad: Box<GradFn>,
    lipschitz_hint: Option<Box<LipFn>>,
    pl: Option<PLConvex>,
    label: String,
}

impl fmt::Debug for ConvexOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexOracle")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("pl", &self.pl.is_some())
            .finish()
    }
}

impl ConvexOracle {
    /// Wrap a max-of-affine function with the min-index selection.
    pub fn from_pl(f: PLConvex) -> Self {
        let dim = f.dim();
        let fe = f.clone();
        let fg = f.clone();
        ConvexOracle {
            dim,
            eval: Box::new(move |x| fe.eval(x).expect("dim checked")),
            subgrad: Box::new(move |x| fg.min_index_gradient(x, 0.0).expect("dim checked")),
            lipschitz_hint: Some(pl_lipschitz_hint(&f)),
            pl: Some(f),
            label: "pl/min_index".into(),
        }
    }

    /// Wrap a one-dimensional max-of-affine function with the left-derivative
    /// selection (for `|x|` this is `sgn` with `sgn(0) = -1`).
    pub fn from_pl_left_derivative(f: PLConvex) -> Result<Self> {
        if f.dim() != 1 {
            return Err(Error::UnsupportedDimension {
                got: f.dim(),
                context: "left-derivative selection",
            });
        }
        let env = Envelope1d::build(&f);
        let fe = f.clone();
        Ok(ConvexOracle {
            dim: 1,
            eval: Box::new(move |x| fe.eval(x).expect("dim checked")),
            subgrad: Box::new(move |x| vec![env.left_derivative(x[0])]),
            lipschitz_hint: Some(pl_lipschitz_hint(&f)),
            pl: Some(f),
            label: "pl/left_derivative".into(),
        })
    }

    /// Wrap a max-of-affine function with a caller-supplied selection.
    ///
    /// The selection must pick subgradients of `f`; this is checked by the
    /// tests, not by the constructor.
    pub fn from_pl_with_subgrad<G>(f: PLConvex, label: &str, subgrad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let dim = f.dim();
        let fe = f.clone();
        ConvexOracle {
            dim,
            eval: Box::new(move |x| fe.eval(x).expect("dim checked")),
            subgrad: Box::new(subgrad),
            lipschitz_hint: Some(pl_lipschitz_hint(&f)),
            pl: Some(f),
            label: format!("pl/{label}"),
        }
    }

    /// Fully custom oracle.
    pub fn custom<E, G>(dim: usize, label: &str, eval: E, subgrad: G) -> Self
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ConvexOracle {
            dim,
            eval: Box::new(eval),
            subgrad: Box::new(subgrad),
            lipschitz_hint: None,
            pl: None,
            label: label.into(),
        }
    }

    /// `(c/2) |x|^2` with its exact gradient.
    pub fn quadratic(dim: usize, curvature: f64) -> Self {
        assert!(curvature >= 0.0);
        ConvexOracle {
            dim,
            eval: Box::new(move |x| 0.5 * curvature * dot(x, x)),
            subgrad: Box::new(move |x| x.iter().map(|v| curvature * v).collect()),
            lipschitz_hint: None,
            pl: None,
            label: format!("quadratic(c={curvature})"),
        }
    }

    pub fn with_lipschitz_hint<H>(mut self, hint: H) -> Self
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.lipschitz_hint = Some(Box::new(hint));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn subgrad(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.subgrad)(x)
    }

    /// Exact representation, when the oracle wraps a [`PLConvex`].
    pub fn pl(&self) -> Option<&PLConvex> {
        self.pl.as_ref()
    }

    /// Bound `C_r` on subgradient norms over the ball `|x| <= r`, if known.
    pub fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        self.lipschitz_hint.as_ref().map(|h| h(radius))
    }

    /// Sampled midpoint convexity: the worst violation of
    /// `f((u + v)/2) <= (f(u) + f(v))/2` over random segments in
    /// `[-range, range]^d`. Nonpositive (up to rounding) for a valid
    /// oracle.
    pub fn midpoint_convexity_violation<R: Rng>(
        &self,
        segments: usize,
        range: f64,
        rng: &mut R,
    ) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..segments {
            let u: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-range..range)).collect();
            let v: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-range..range)).collect();
            let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
            worst = worst.max(self.eval(&mid) - 0.5 * (self.eval(&u) + self.eval(&v)));
        }
        worst
    }
}

fn pl_lipschitz_hint(f: &PLConvex) -> Box<LipFn> {
    let bound = f
        .pieces()
        .iter()
        .map(|p| norm2(&p.beta))
        .fold(0.0f64, f64::max);
    Box::new(move |_r| bound)
}

/// Default geometric schedule `start * 2^-k`, k = 0..terms-1.
pub fn geometric_schedule(start: f64, terms: usize) -> Vec<f64> {
    assert!(start > 0.0 && terms >= 1);
    (0..terms).map(|k| start * 0.5f64.powi(k as i32)).collect()
}

pub const DEFAULT_SCHEDULE_TERMS: usize = 12;

/// Slack allowed before a growing difference-quotient sequence counts as a
/// convexity violation.
pub const CONVEXITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DirectionalDerivative {
    /// Difference quotient at the smallest step; an upper bound on the true
    /// one-directional derivative.
    pub value: f64,
    /// Gap between the last two quotients, a cheap error indicator.
    pub last_gap: f64,
    pub quotients: Vec<f64>,
}

/// One-directional derivative `Df(x)[y]` by shrinking difference quotients.
///
/// For a convex oracle the quotients are nonincreasing in the step; a rise
/// beyond [`CONVEXITY_TOL`] (relative to scale) is reported as a
/// [`Error::ConvexityViolation`].
pub fn directional_derivative(
    f: &ConvexOracle,
    x: &[f64],
    y: &[f64],
    lambdas: &[f64],
) -> Result<DirectionalDerivative> {
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput("direction y must be nonzero".into()));
    }
    check_schedule(lambdas, "lambda")?;
    let fx = f.eval(x);
    let scale = 1.0 + fx.abs();
    let mut quotients = Vec::with_capacity(lambdas.len());
    let mut worst = 0.0f64;
    let mut shifted = vec![0.0; x.len()];
    for &lambda in lambdas {
        for (s, (xi, yi)) in shifted.iter_mut().zip(x.iter().zip(y)) {
            *s = xi + lambda * yi;
        }
        let q = (f.eval(&shifted) - fx) / lambda;
        if let Some(&prev) = quotients.last() {
            worst = worst.max(q - prev);
        }
        quotients.push(q);
    }
    if worst > CONVEXITY_TOL * scale {
        return Err(Error::ConvexityViolation { worst });
    }
    let n = quotients.len();
    let last_gap = if n >= 2 {
        (quotients[n - 1] - quotients[n - 2]).abs()
    } else {
        0.0
    };
    Ok(DirectionalDerivative {
        value: quotients[n - 1],
        last_gap,
        quotients,
    })
}

#[derive(Debug, Clone)]
pub struct SubgradientCheck {
    pub ok: bool,
    /// Most negative value of `Df(x)[y] - <g, y>` over the sampled
    /// directions; a subgradient keeps this above `-tol`.
    pub worst_margin: f64,
    pub worst_dir: Vec<f64>,
}

/// Sampled subgradient inequality: `Df(x)[y] >= <g, y> - tol` for every
/// supplied direction.
pub fn subgradient_check(
    f: &ConvexOracle,
    x: &[f64],
    g: &[f64],
    dirs: &[Vec<f64>],
    tol: f64,
) -> Result<SubgradientCheck> {
    if dirs.is_empty() {
        return Err(Error::InvalidInput("need at least one direction".into()));
    }
    let lambdas = geometric_schedule(1.0, DEFAULT_SCHEDULE_TERMS);
    let mut worst_margin = f64::INFINITY;
    let mut worst_dir = dirs[0].clone();
    for y in dirs {
        let d = directional_derivative(f, x, y, &lambdas)?;
        let margin = d.value - dot(g, y);
        if margin < worst_margin {
            worst_margin = margin;
            worst_dir = y.clone();
        }
    }
    Ok(SubgradientCheck {
        ok: worst_margin >= -tol,
        worst_margin,
        worst_dir,
    })
}

/// `count` independent uniform directions on the unit sphere.
pub fn random_unit_dirs<R: Rng>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm2(&v);
            if n > 1e-12 {
                return v.iter().map(|c| c / n).collect();
            }
        })
        .collect()
}

pub(crate) fn check_schedule(values: &[f64], name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput(format!("{name} schedule is empty")));
    }
    if values.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{name} schedule must be positive and finite"
        )));
    }
    if values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(format!(
            "{name} schedule must be strictly decreasing"
        )));
    }
    Ok(())
}
