//! Discrete-time semimartingale path generation.

pub mod csv;
pub mod grid;
pub mod perturb;
pub mod rng;
pub mod semimartingale;
pub mod stopping;
pub mod trajectory;

pub use grid::TimeGrid;
pub use perturb::{perturb, perturb_with_noise, PerturbedPath};
pub use rng::{substream, Lane};
pub use semimartingale::{
    build_semimartingale, ensemble, noise_ensemble, simulate_bm, FvRecipe, MartingaleRecipe,
    ProcessRecipe, SemimartingalePath,
};
pub use stopping::{stop_at_exit, StopKind, StoppingRecord};
pub use trajectory::Trajectory;
