//! Experiment configuration: TOML file + flag overrides + validation.
//!
//! Key names are the lower_snake_case field names below. Validation
//! collects every violation instead of stopping at the first.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use itolab::convex::{ConvexOracle, PLConvex};
use itolab::path::{FvRecipe, MartingaleRecipe, ProcessRecipe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum Experiment {
    TanakaBaseline,
    PlDecomposition,
    Smoothing,
    EpsilonLimit,
    Conditions,
    MollifiedSelection,
    DirectionalLimit,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::TanakaBaseline => "tanaka_baseline",
            Experiment::PlDecomposition => "pl_decomposition",
            Experiment::Smoothing => "smoothing",
            Experiment::EpsilonLimit => "epsilon_limit",
            Experiment::Conditions => "conditions",
            Experiment::MollifiedSelection => "mollified_selection",
            Experiment::DirectionalLimit => "directional_limit",
        }
    }

    /// Ensemble experiments need enough paths for stable statistics; the
    /// documented minimum is 100.
    pub fn min_paths(&self) -> usize {
        match self {
            Experiment::TanakaBaseline
            | Experiment::Smoothing
            | Experiment::EpsilonLimit
            | Experiment::Conditions
            | Experiment::PlDecomposition => 100,
            Experiment::MollifiedSelection | Experiment::DirectionalLimit => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct FunctionSpec {
    /// "abs" | "pl" | "affine" | "quadratic"
    pub kind: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub pieces: Option<Vec<PieceSpec>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub alpha: f64,
    pub beta: Vec<f64>,
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec {
            kind: "abs".into(),
            dim: None,
            pieces: None,
            alpha: None,
            beta: None,
            curvature: None,
        }
    }
}

impl FunctionSpec {
    pub fn dim(&self) -> usize {
        match self.kind.as_str() {
            "abs" => 1,
            "pl" => self
                .pieces
                .as_ref()
                .and_then(|p| p.first())
                .map_or(self.dim.unwrap_or(1), |p| p.beta.len()),
            "affine" => self.beta.as_ref().map_or(1, |b| b.len()),
            "quadratic" => self.dim.unwrap_or(1),
            _ => 1,
        }
    }

    pub fn to_pl(&self) -> Result<Option<PLConvex>, String> {
        match self.kind.as_str() {
            "abs" => Ok(Some(PLConvex::abs())),
            "pl" => {
                let pieces = self
                    .pieces
                    .as_ref()
                    .ok_or("function.kind = \"pl\" needs function.pieces")?;
                let dim = self.dim.unwrap_or_else(|| self.dim());
                let built = pieces
                    .iter()
                    .map(|p| itolab::convex::AffinePiece::new(p.alpha, p.beta.clone()))
                    .collect();
                PLConvex::new(dim, built).map(Some).map_err(|e| e.to_string())
            }
            "affine" => {
                let beta = self
                    .beta
                    .as_ref()
                    .ok_or("function.kind = \"affine\" needs function.beta")?;
                PLConvex::affine(self.alpha.unwrap_or(0.0), beta.clone())
                    .map(Some)
                    .map_err(|e| e.to_string())
            }
            "quadratic" => Ok(None),
            other => Err(format!(
                "unknown function.kind \"{other}\" (expected one of \"abs\", \"pl\", \"affine\", \"quadratic\")"
            )),
        }
    }

    /// The oracle used by the experiments; one-dimensional max-of-affine
    /// functions get the left-derivative selection.
    pub fn to_oracle(&self) -> Result<ConvexOracle, String> {
        match self.to_pl()? {
            Some(pl) if pl.dim() == 1 => {
                ConvexOracle::from_pl_left_derivative(pl).map_err(|e| e.to_string())
            }
            Some(pl) => Ok(ConvexOracle::from_pl(pl)),
            None => {
                let c = self.curvature.unwrap_or(1.0);
                if c < 0.0 {
                    return Err("quadratic curvature must be >= 0".into());
                }
                Ok(ConvexOracle::quadratic(self.dim.unwrap_or(1), c))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ProcessSpec {
    /// "bm" | "scaled_bm" | "state_sigma" | "zero"
    pub martingale: String,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_sigma")]
    pub sigma_base: f64,
    #[serde(default)]
    pub sigma_amp: f64,
    /// "zero" | "linear_drift"
    #[serde(default = "default_fv")]
    pub fv: String,
    #[serde(default)]
    pub rate: Vec<f64>,
    #[serde(default = "default_x0")]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub frozen: Vec<(f64, f64)>,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_fv() -> String {
    "zero".into()
}

fn default_x0() -> Vec<f64> {
    vec![0.0]
}

impl Default for ProcessSpec {
    fn default() -> Self {
        ProcessSpec {
            martingale: "bm".into(),
            sigma: 1.0,
            sigma_base: 1.0,
            sigma_amp: 0.0,
            fv: "zero".into(),
            rate: vec![],
            x0: vec![0.0],
            frozen: vec![],
        }
    }
}

impl ProcessSpec {
    pub fn to_recipe(&self) -> Result<ProcessRecipe, String> {
        let martingale = match self.martingale.as_str() {
            "bm" => MartingaleRecipe::ScaledBm { sigma: 1.0 },
            "scaled_bm" => MartingaleRecipe::ScaledBm { sigma: self.sigma },
            "state_sigma" => MartingaleRecipe::StateSigma {
                base: self.sigma_base,
                amp: self.sigma_amp,
            },
            "zero" => MartingaleRecipe::Zero,
            other => {
                return Err(format!(
                    "unknown process.martingale \"{other}\" (expected one of \"bm\", \"scaled_bm\", \"state_sigma\", \"zero\")"
                ))
            }
        };
        let fv = match self.fv.as_str() {
            "zero" => FvRecipe::Zero,
            "linear_drift" => FvRecipe::LinearDrift {
                rate: if self.rate.is_empty() {
                    vec![0.0; self.x0.len()]
                } else {
                    self.rate.clone()
                },
            },
            other => {
                return Err(format!(
                    "unknown process.fv \"{other}\" (expected one of \"zero\", \"linear_drift\")"
                ))
            }
        };
        let recipe = ProcessRecipe {
            x0: self.x0.clone(),
            martingale,
            fv,
            frozen: self.frozen.clone(),
        };
        recipe.validate().map_err(|e| e.to_string())?;
        Ok(recipe)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct Schedules {
    /// Strictly decreasing; defaults to 2^-1..2^-8.
    #[serde(default = "default_epsilon")]
    pub epsilon: Vec<f64>,
    /// Strictly increasing smoothing levels.
    #[serde(default = "default_n_levels")]
    pub n_levels: Vec<u32>,
    #[serde(default = "default_theta_start")]
    pub theta_start: f64,
    #[serde(default = "default_lambda_start")]
    pub lambda_start: f64,
    #[serde(default = "default_terms")]
    pub terms: usize,
    /// Perturbation size used by the smoothing experiment.
    #[serde(default = "default_smoothing_epsilon")]
    pub smoothing_epsilon: f64,
}

fn default_epsilon() -> Vec<f64> {
    (1..=8).map(|k| 0.5f64.powi(k)).collect()
}

fn default_n_levels() -> Vec<u32> {
    vec![1, 2, 4, 8, 16, 32, 64]
}

fn default_theta_start() -> f64 {
    0.0625
}

fn default_lambda_start() -> f64 {
    1.0
}

fn default_terms() -> usize {
    12
}

fn default_smoothing_epsilon() -> f64 {
    0.25
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules {
            epsilon: default_epsilon(),
            n_levels: default_n_levels(),
            theta_start: default_theta_start(),
            lambda_start: default_lambda_start(),
            terms: default_terms(),
            smoothing_epsilon: default_smoothing_epsilon(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct Tolerances {
    #[serde(default = "default_z_crit")]
    pub z_crit: f64,
    #[serde(default = "default_corr_crit")]
    pub corr_crit: f64,
    /// Final-point threshold of the epsilon-limit curve.
    #[serde(default = "default_final_epsilon_error")]
    pub final_epsilon_error: f64,
    #[serde(default = "default_subgradient_tol")]
    pub subgradient_tol: f64,
    /// The smoothing curve must end at most this fraction of its start.
    #[serde(default = "default_smoothing_ratio")]
    pub smoothing_ratio: f64,
}

fn default_z_crit() -> f64 {
    itolab::ito::DEFAULT_Z_CRIT
}

fn default_corr_crit() -> f64 {
    itolab::ito::DEFAULT_CORR_CRIT
}

fn default_final_epsilon_error() -> f64 {
    0.05
}

fn default_subgradient_tol() -> f64 {
    1e-6
}

fn default_smoothing_ratio() -> f64 {
    0.2
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            z_crit: default_z_crit(),
            corr_crit: default_corr_crit(),
            final_epsilon_error: default_final_epsilon_error(),
            subgradient_tol: default_subgradient_tol(),
            smoothing_ratio: default_smoothing_ratio(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub function: FunctionSpec,
    #[serde(default)]
    pub process: ProcessSpec,
    #[serde(default)]
    pub schedules: Schedules,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_r_prime")]
    pub r_prime: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

fn default_n_paths() -> usize {
    1000
}

fn default_n_steps() -> usize {
    1 << 12
}

fn default_horizon() -> f64 {
    1.0
}

fn default_r() -> f64 {
    4.0
}

fn default_r_prime() -> f64 {
    5.0
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: default_seed(),
            n_paths: default_n_paths(),
            n_steps: default_n_steps(),
            horizon: default_horizon(),
            function: FunctionSpec::default(),
            process: ProcessSpec::default(),
            schedules: Schedules::default(),
            r: default_r(),
            r_prime: default_r_prime(),
            tolerances: Tolerances::default(),
            out_dir: None,
        }
    }
}

/// Parse a config file. Structural problems (unknown keys, bad experiment
/// names, type errors) surface here with the offending key named.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    toml::from_str(text).map_err(|e| format!("config error: {e}"))
}

impl ExperimentConfig {
    /// Validate against an experiment; returns every violation found.
    pub fn validate(&self, experiment: Experiment) -> Result<(), Vec<String>> {
        let mut violations = Vec::new();
        if self.n_paths < 1 {
            violations.push("n_paths must be >= 1".into());
        }
        if self.n_paths < experiment.min_paths() {
            violations.push(format!(
                "insufficient data: {} needs n_paths >= {} (got {})",
                experiment.name(),
                experiment.min_paths(),
                self.n_paths
            ));
        }
        if self.n_steps < 2 {
            violations.push("n_steps must be >= 2".into());
        }
        if !(self.horizon > 0.0) {
            violations.push("horizon must be positive".into());
        }
        if self.r_prime <= self.r {
            violations.push(format!(
                "r_prime must exceed r (got r_prime = {}, r = {})",
                self.r_prime, self.r
            ));
        }
        if !(self.r > 0.0) {
            violations.push("r must be positive".into());
        }
        if self.schedules.epsilon.is_empty()
            || self.schedules.epsilon.windows(2).any(|w| w[1] >= w[0])
            || self.schedules.epsilon.iter().any(|e| *e <= 0.0)
        {
            violations.push("schedules.epsilon must be strictly decreasing and positive".into());
        }
        if self.schedules.n_levels.is_empty()
            || self.schedules.n_levels.windows(2).any(|w| w[1] <= w[0])
            || self.schedules.n_levels.contains(&0)
        {
            violations.push("schedules.n_levels must be strictly increasing and >= 1".into());
        }
        if !(self.schedules.theta_start > 0.0) {
            violations.push("schedules.theta_start must be positive".into());
        }
        if !(self.schedules.lambda_start > 0.0) {
            violations.push("schedules.lambda_start must be positive".into());
        }
        if self.schedules.terms < 2 {
            violations.push("schedules.terms must be >= 2".into());
        }
        if !(self.schedules.smoothing_epsilon > 0.0) {
            violations.push("schedules.smoothing_epsilon must be positive".into());
        }
        match self.function.to_pl() {
            Err(e) => violations.push(e),
            Ok(None) if experiment == Experiment::PlDecomposition => {
                violations.push("pl_decomposition needs a max-of-affine function".into());
            }
            Ok(_) => {}
        }
        match self.process.to_recipe() {
            Err(e) => violations.push(e),
            Ok(recipe) => {
                if recipe.dim() != self.function.dim() {
                    violations.push(format!(
                        "function dimension {} != process dimension {}",
                        self.function.dim(),
                        recipe.dim()
                    ));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    pub fn effective_out_dir(&self, experiment: Experiment) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs").join(experiment.name()))
    }
}
