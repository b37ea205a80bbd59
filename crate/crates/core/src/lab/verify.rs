//! End-to-end verification that `int sel(X) dM` is the local-martingale
//! part of `f(X)`.
//!
//! Two certificates are combined: a fixed-checkpoint martingale test on the
//! candidate `N`, and a refinement contrast on the total variation of the
//! residual `S = f(X) - f(X_0) - N`. A genuine finite-variation residual
//! keeps its discrete TV essentially constant as the grid refines, while a
//! contaminated residual grows like the square root of the step count. A
//! single-grid TV value decides nothing; only the contrast does.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::envelope1d::Envelope1d;
use crate::convex::oracle::ConvexOracle;
use crate::error::{Error, Result};
use crate::ito::integral::IntegralPath;
use crate::ito::martingale::{martingale_test, MartingaleTestReport};
use crate::path::grid::TimeGrid;
use crate::path::semimartingale::{build_semimartingale, ProcessRecipe, SemimartingalePath};
use crate::path::rng::{substream, Lane};
use crate::path::trajectory::Trajectory;
use crate::stats;

/// Subgradient selections available for building the integrand on a path.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Selection {
    /// Gradient of the lowest-index active piece (max-of-affine only).
    MinIndexPl,
    /// Left derivative, one-dimensional functions only.
    LeftDerivative1d,
    /// Gaussian-mollified selection at a fixed small theta (exact closed
    /// form for one-dimensional max-of-affine functions).
    Mollified { theta: f64 },
    /// Deliberately wrong integrand `h = 0`; the negative control for the
    /// refinement contrast.
    Zero,
}

/// Allowed relative TV growth per 4x grid refinement.
pub const TV_GROWTH_LIMIT: f64 = 1.25;

/// Mean TV below this is indistinguishable from rounding noise of an
/// identically-zero residual; the growth ratio is meaningless there.
pub const TV_NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub selection: Selection,
    pub martingale: MartingaleTestReport,
    pub refinement_steps: Vec<usize>,
    pub mean_tv: Vec<f64>,
    pub growth_ratios: Vec<f64>,
    pub tv_ok: bool,
    pub pass: bool,
}

struct PathSelector<'a> {
    f: &'a ConvexOracle,
    selection: &'a Selection,
    env: Option<Envelope1d>,
}

impl<'a> PathSelector<'a> {
    fn new(f: &'a ConvexOracle, selection: &'a Selection) -> Result<Self> {
        let env = match selection {
            Selection::LeftDerivative1d | Selection::Mollified { .. } => {
                let pl = f.pl().ok_or_else(|| {
                    Error::InvalidInput("selection needs a max-of-affine representation".into())
                })?;
                if pl.dim() != 1 {
                    return Err(Error::UnsupportedDimension {
                        got: pl.dim(),
                        context: "this selection is one-dimensional",
                    });
                }
                Some(Envelope1d::build(pl))
            }
            Selection::MinIndexPl => {
                if f.pl().is_none() {
                    return Err(Error::InvalidInput(
                        "min-index selection needs a max-of-affine representation".into(),
                    ));
                }
                None
            }
            Selection::Zero => None,
        };
        Ok(PathSelector { f, selection, env })
    }

    fn integrand(&self, x: &[f64]) -> Vec<f64> {
        match self.selection {
            Selection::MinIndexPl => self
                .f
                .pl()
                .expect("checked in new")
                .min_index_gradient(x, crate::lab::decompose::PATH_ACTIVE_TOL)
                .expect("dims checked"),
            Selection::LeftDerivative1d => {
                vec![self.env.as_ref().expect("built in new").left_derivative(x[0])]
            }
            Selection::Mollified { theta } => {
                vec![self
                    .env
                    .as_ref()
                    .expect("built in new")
                    .mollified_gradient(x[0], *theta)]
            }
            Selection::Zero => vec![0.0; x.len()],
        }
    }
}

/// Verify the decomposition for paths of `recipe` at several refinements.
///
/// The finest grid is simulated once per path index; coarser grids reuse the
/// same noise by subsampling, so the refinement contrast sees nested
/// versions of the same trajectory. The martingale test runs at the middle
/// refinement.
pub fn verify_decomposition(
    f: &ConvexOracle,
    recipe: &ProcessRecipe,
    n_paths: usize,
    refinement_steps: &[usize],
    horizon: f64,
    seed: u64,
    checkpoints: &[f64],
    z_crit: f64,
    corr_crit: f64,
    selection: &Selection,
) -> Result<VerifyReport> {
    if refinement_steps.len() < 2 {
        return Err(Error::InvalidInput("need at least two refinement levels".into()));
    }
    for w in refinement_steps.windows(2) {
        if w[1] % w[0] != 0 || w[1] <= w[0] {
            return Err(Error::InvalidInput(
                "refinement steps must be increasing and nested".into(),
            ));
        }
    }
    let selector = PathSelector::new(f, selection)?;
    let finest = *refinement_steps.last().expect("nonempty");
    let fine_grid = Arc::new(TimeGrid::uniform(finest, horizon)?);
    let grids: Vec<Arc<TimeGrid>> = refinement_steps
        .iter()
        .map(|&s| Ok(Arc::new(TimeGrid::uniform(s, horizon)?)))
        .collect::<Result<_>>()?;
    let middle = refinement_steps.len() / 2;

    struct PerPath {
        tv: Vec<f64>,
        n_middle: Vec<f64>,
    }

    let per_path: Result<Vec<PerPath>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64, Lane::Base);
            let fine = build_semimartingale(recipe, Arc::clone(&fine_grid), &mut rng)?;
            let mut tv = Vec::with_capacity(refinement_steps.len());
            let mut n_middle = Vec::new();
            for (level, &steps) in refinement_steps.iter().enumerate() {
                let skip = finest / steps;
                let sub = subsample(&fine, &grids[level], skip)?;
                let (n_values, tv_s) = decompose_tv(&selector, f, &sub);
                tv.push(tv_s);
                if level == middle {
                    n_middle = n_values;
                }
            }
            Ok(PerPath { tv, n_middle })
        })
        .collect();
    let per_path = per_path?;

    let mean_tv: Vec<f64> = (0..refinement_steps.len())
        .map(|l| stats::mean(&per_path.iter().map(|p| p.tv[l]).collect::<Vec<_>>()))
        .collect();
    let growth_ratios: Vec<f64> = mean_tv.windows(2).map(|w| w[1] / w[0]).collect();
    let tv_ok = mean_tv
        .windows(2)
        .all(|w| w[1] < TV_GROWTH_LIMIT * w[0] || w[1] <= TV_NOISE_FLOOR);

    let n_paths_middle: Vec<IntegralPath> = per_path
        .iter()
        .map(|p| {
            IntegralPath::from_values(
                Arc::clone(&grids[middle]),
                p.n_middle.clone(),
                &format!("{selection:?}"),
            )
        })
        .collect::<Result<_>>()?;
    let martingale = martingale_test(&n_paths_middle, checkpoints, z_crit, corr_crit)?;

    let pass = martingale.verdict && tv_ok;
    Ok(VerifyReport {
        selection: selection.clone(),
        martingale,
        refinement_steps: refinement_steps.to_vec(),
        mean_tv,
        growth_ratios,
        tv_ok,
        pass,
    })
}

fn subsample(
    fine: &SemimartingalePath,
    grid: &Arc<TimeGrid>,
    skip: usize,
) -> Result<SemimartingalePath> {
    let d = fine.dim();
    let m = Trajectory::from_fn(grid.len(), d, |j, c| fine.m().coord(j * skip, c));
    let a = Trajectory::from_fn(grid.len(), d, |j, c| fine.a().coord(j * skip, c));
    SemimartingalePath::new(Arc::clone(grid), fine.x0().to_vec(), m, a)
}

/// Candidate martingale part values and TV of the residual for one path.
fn decompose_tv(
    selector: &PathSelector<'_>,
    f: &ConvexOracle,
    x: &SemimartingalePath,
) -> (Vec<f64>, f64) {
    let len = x.len();
    let d = x.dim();
    let f0 = f.eval(x.x().point(0));
    let mut n_values = Vec::with_capacity(len);
    let mut acc = 0.0;
    n_values.push(0.0);
    let mut tv = 0.0;
    let mut s_prev = 0.0;
    for j in 0..len - 1 {
        let h = selector.integrand(x.x().point(j));
        let inc: f64 = (0..d)
            .map(|c| h[c] * (x.m().coord(j + 1, c) - x.m().coord(j, c)))
            .sum();
        acc += inc;
        n_values.push(acc);
        let s = f.eval(x.x().point(j + 1)) - f0 - acc;
        tv += (s - s_prev).abs();
        s_prev = s;
    }
    (n_values, tv)
}
