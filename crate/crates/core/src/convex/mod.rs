//! Exact and numerical convex analysis.

pub mod envelope1d;
pub mod oracle;
pub mod pl;
pub mod rho;
pub mod selection;
pub mod simplex;
pub mod smooth;

pub use envelope1d::Envelope1d;
pub use oracle::{
    directional_derivative, geometric_schedule, random_unit_dirs, subgradient_check,
    ConvexOracle, DirectionalDerivative, SubgradientCheck, DEFAULT_SCHEDULE_TERMS,
};
pub use pl::{random_pl, AffinePiece, PLConvex};
pub use rho::{estimate_rho, RhoDistance};
pub use selection::{
    directional_limit, mollified_subgradient, DirectionalLimit, MollifiedSubgradient,
};
pub use simplex::hull_distance;
pub use smooth::{smooth, SmoothedConvex};
