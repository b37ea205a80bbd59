//! The experiments: decomposition, residual structure, convergence curves,
//! perturbation conditions, and end-to-end verification.

pub mod baseline;
pub mod conditions;
pub mod convergence;
pub mod decompose;
pub mod flatness;
pub mod selection_checks;
pub mod verify;

pub use baseline::{tanaka_baseline, TanakaBaselineReport};
pub use conditions::{condition_estimates, empirical_bounds, ConditionReport};
pub use convergence::{
    epsilon_convergence_experiment, smoothing_convergence_experiment, ConvergenceCurve, CurveKind,
};
pub use decompose::{
    decompose_pl, identity_residual, pl_pair_tanaka_residual, DecompositionResult,
    PATH_ACTIVE_TOL,
};
pub use flatness::{calibrated_margin, residual_flatness_check, FlatnessReport, FLATNESS_TOL};
pub use selection_checks::{
    abs_selection_independence, directional_limit_check, mollified_selection_check,
    SelectionCheckReport, SelectionIndependenceReport,
};
pub use verify::{verify_decomposition, Selection, VerifyReport, TV_GROWTH_LIMIT};
