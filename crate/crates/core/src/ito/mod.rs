//! Discrete stochastic calculus over sampled paths.

pub mod hp;
pub mod integral;
pub mod local_time;
pub mod martingale;
pub mod variation;

pub use hp::{hp_norm_estimate, HpEstimate};
pub use integral::{ito_integral, IntegralPath};
pub use local_time::{
    default_bandwidth, local_time_occupation, local_time_tanaka, sgn, tanaka_series,
    LocalTimeMethod, LocalTimePath,
};
pub use martingale::{
    default_checkpoints, martingale_test, MartingaleTestReport, DEFAULT_CORR_CRIT, DEFAULT_Z_CRIT,
};
pub use variation::{
    quadratic_covariation, quadratic_variation, total_variation, total_variation_running,
    total_variation_series, QVPath,
};
