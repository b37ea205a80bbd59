//! Structure checks on the decomposition residual: it may grow only near
//! the coincidence set of the pieces, and it should not decrease.

use serde::Serialize;

use crate::convex::pl::PLConvex;
use crate::error::{Error, Result};
use crate::lab::decompose::DecompositionResult;
use crate::path::semimartingale::SemimartingalePath;
use crate::stats::norm2;

/// Residual increments on qualifying windows must stay below this.
pub const FLATNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    /// Steps whose both endpoints keep all piece pairs separated by more
    /// than the margin.
    pub off_steps_checked: usize,
    /// Largest |ds| over those steps.
    pub max_off_move: f64,
    pub flat_ok: bool,
    /// Largest decrease of `s` anywhere on the path.
    pub max_decrease: f64,
    /// Tolerance used for the monotonicity check,
    /// `2 max_j |dx_j| max_i |beta_i|`.
    pub monotone_tol: f64,
    pub monotone_ok: bool,
    pub ok: bool,
}

/// Margin that makes window qualification robust for a given function and
/// grid: `4 sqrt(dt) max_{i != j} |beta_i - beta_j|` (calibrated so that a
/// piece switch inside a qualifying window needs an 8-sigma step).
pub fn calibrated_margin(f: &PLConvex, dt: f64) -> f64 {
    let mut max_gap = 0.0f64;
    for i in 0..f.k() {
        for j in i + 1..f.k() {
            let gap: f64 = f.pieces()[i]
                .beta
                .iter()
                .zip(&f.pieces()[j].beta)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            max_gap = max_gap.max(gap);
        }
    }
    4.0 * dt.sqrt() * max_gap
}

/// Check that the residual is flat wherever all pieces are separated by
/// more than `margin`, and nondecreasing within the discretization
/// tolerance.
pub fn residual_flatness_check(
    result: &DecompositionResult,
    f: &PLConvex,
    x: &SemimartingalePath,
    margin: f64,
) -> Result<FlatnessReport> {
    if !(margin > 0.0) {
        return Err(Error::InvalidInput("margin must be positive".into()));
    }
    let len = x.len();
    // minimal pairwise piece gap per grid point; +inf for a single piece
    let gap = |j: usize| -> f64 {
        let values: Vec<f64> = f.pieces().iter().map(|p| p.eval(x.x().point(j))).collect();
        let mut min_gap = f64::INFINITY;
        for a in 0..values.len() {
            for b in a + 1..values.len() {
                min_gap = min_gap.min((values[a] - values[b]).abs());
            }
        }
        min_gap
    };

    let mut off_steps_checked = 0usize;
    let mut max_off_move = 0.0f64;
    let mut prev_gap = gap(0);
    for j in 0..len - 1 {
        let next_gap = gap(j + 1);
        if prev_gap > margin && next_gap > margin {
            off_steps_checked += 1;
            max_off_move = max_off_move.max((result.s[j + 1] - result.s[j]).abs());
        }
        prev_gap = next_gap;
    }

    let max_step = (0..len - 1)
        .map(|j| {
            let d: Vec<f64> = (0..x.dim())
                .map(|c| x.x().coord(j + 1, c) - x.x().coord(j, c))
                .collect();
            norm2(&d)
        })
        .fold(0.0f64, f64::max);
    let max_beta = f
        .pieces()
        .iter()
        .map(|p| norm2(&p.beta))
        .fold(0.0f64, f64::max);
    let monotone_tol = 2.0 * max_step * max_beta;
    let max_decrease = result
        .s
        .windows(2)
        .map(|w| (w[0] - w[1]).max(0.0))
        .fold(0.0f64, f64::max);

    let flat_ok = max_off_move <= FLATNESS_TOL;
    let monotone_ok = max_decrease <= monotone_tol;
    Ok(FlatnessReport {
        off_steps_checked,
        max_off_move,
        flat_ok,
        max_decrease,
        monotone_tol,
        monotone_ok,
        ok: flat_ok && monotone_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::pl::AffinePiece;
    use crate::lab::decompose::{decompose_pl, PATH_ACTIVE_TOL};
    use crate::path::grid::TimeGrid;
    use crate::path::rng::{substream, Lane};
    use crate::path::semimartingale::{build_semimartingale, ProcessRecipe};
    use std::sync::Arc;

    #[test]
    fn single_piece_is_flat_everywhere() {
        let g = Arc::new(TimeGrid::uniform(512, 1.0).unwrap());
        let f = PLConvex::affine(0.0, vec![1.5]).unwrap();
        let mut rng = substream(71, 0, Lane::Base);
        let x = build_semimartingale(&ProcessRecipe::standard_bm(1), g, &mut rng).unwrap();
        let d = decompose_pl(&f, &x, PATH_ACTIVE_TOL).unwrap();
        let r = residual_flatness_check(&d, &f, &x, 0.01).unwrap();
        assert!(r.ok);
        assert!(r.max_off_move <= FLATNESS_TOL);
        assert!(r.off_steps_checked > 0);
    }

    #[test]
    fn abs_path_away_from_kink_is_flat() {
        let g = Arc::new(TimeGrid::uniform(1024, 1.0).unwrap());
        let f = PLConvex::abs();
        let recipe = ProcessRecipe {
            x0: vec![5.0],
            martingale: crate::path::semimartingale::MartingaleRecipe::ScaledBm { sigma: 0.5 },
            fv: crate::path::semimartingale::FvRecipe::Zero,
            frozen: vec![],
        };
        let mut rng = substream(72, 0, Lane::Base);
        let x = build_semimartingale(&recipe, g, &mut rng).unwrap();
        let d = decompose_pl(&f, &x, PATH_ACTIVE_TOL).unwrap();
        let r = residual_flatness_check(&d, &f, &x, 0.05).unwrap();
        assert!(r.ok, "{r:?}");
        assert!(r.max_off_move <= FLATNESS_TOL);
    }

    #[test]
    fn abs_of_bm_passes_at_calibrated_margin() {
        let g = Arc::new(TimeGrid::uniform(4096, 1.0).unwrap());
        let f = PLConvex::abs();
        let margin = calibrated_margin(&f, 1.0 / 4096.0);
        // for |x| the pairwise slope gap is 2, so this is 8 sqrt(dt)
        assert!((margin - 8.0 * (1.0f64 / 4096.0).sqrt()).abs() < 1e-12);
        for i in 0..50 {
            let mut rng = substream(73, i, Lane::Base);
            let x = build_semimartingale(&ProcessRecipe::standard_bm(1), Arc::clone(&g), &mut rng)
                .unwrap();
            let d = decompose_pl(&f, &x, PATH_ACTIVE_TOL).unwrap();
            let r = residual_flatness_check(&d, &f, &x, margin).unwrap();
            assert!(r.ok, "path {i}: {r:?}");
        }
    }

    #[test]
    fn kink_heavy_function_still_flat_off_coincidence() {
        let g = Arc::new(TimeGrid::uniform(4096, 1.0).unwrap());
        let f = PLConvex::new(
            1,
            vec![
                AffinePiece::new(0.0, vec![-2.0]),
                AffinePiece::new(0.0, vec![-0.5]),
                AffinePiece::new(-0.2, vec![0.5]),
                AffinePiece::new(-0.5, vec![2.0]),
            ],
        )
        .unwrap();
        let margin = calibrated_margin(&f, 1.0 / 4096.0);
        for i in 0..20 {
            let mut rng = substream(74, i, Lane::Base);
            let x = build_semimartingale(&ProcessRecipe::standard_bm(1), Arc::clone(&g), &mut rng)
                .unwrap();
            let d = decompose_pl(&f, &x, PATH_ACTIVE_TOL).unwrap();
            let r = residual_flatness_check(&d, &f, &x, margin).unwrap();
            assert!(r.ok, "path {i}: {r:?}");
        }
    }
}
