//! Experiment dispatch: every experiment builds its ensembles from the
//! config, runs the corresponding lab routine, writes artifacts, and
//! returns a manifest whose verdicts decide the exit status.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use itolab::convex::{geometric_schedule, PLConvex};
use itolab::ito::default_checkpoints;
use itolab::lab::{
    abs_selection_independence, calibrated_margin, condition_estimates, decompose_pl,
    directional_limit_check, epsilon_convergence_experiment, identity_residual,
    mollified_selection_check, pl_pair_tanaka_residual, residual_flatness_check,
    smoothing_convergence_experiment, tanaka_baseline, verify_decomposition, ConditionReport,
    ConvergenceCurve, Selection, PATH_ACTIVE_TOL,
};
use itolab::path::{ensemble, noise_ensemble, perturb_with_noise, stop_at_exit, TimeGrid};
use itolab::stats;

use crate::artifacts::{config_digest, ArtifactSink, RunManifest, Verdict};
use crate::config::{Experiment, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Engine(#[from] itolab::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::Io(_) => 4,
            // engine preconditions are configuration-shaped problems
            RunError::Engine(_) => 3,
        }
    }
}

pub fn run(experiment: Experiment, config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    config
        .validate(experiment)
        .map_err(RunError::Config)?;
    let digest = config_digest(config);
    let out_dir = config.effective_out_dir(experiment);
    let mut sink = ArtifactSink::create(&out_dir, config.seed, &digest)?;

    let verdicts = match experiment {
        Experiment::TanakaBaseline => run_tanaka(config, &mut sink)?,
        Experiment::PlDecomposition => run_pl_decomposition(config, &mut sink)?,
        Experiment::Smoothing => run_smoothing(config, &mut sink)?,
        Experiment::EpsilonLimit => run_epsilon_limit(config, &mut sink)?,
        Experiment::Conditions => run_conditions(config, &mut sink)?,
        Experiment::MollifiedSelection => run_mollified(config, &mut sink)?,
        Experiment::DirectionalLimit => run_directional(config, &mut sink)?,
    };
    Ok(sink.finish(experiment.name(), config, verdicts)?)
}

#[derive(Serialize)]
struct ReportEnvelope<T: Serialize> {
    experiment: String,
    seed: u64,
    config_digest: String,
    config: ExperimentConfig,
    verdicts: Vec<Verdict>,
    #[serde(flatten)]
    payload: T,
}

fn envelope<T: Serialize>(
    experiment: &str,
    config: &ExperimentConfig,
    verdicts: &[Verdict],
    payload: T,
) -> ReportEnvelope<T> {
    // echo the semantic config; the output directory lives in the manifest
    let mut echo = config.clone();
    echo.out_dir = None;
    ReportEnvelope {
        experiment: experiment.to_string(),
        seed: config.seed,
        config_digest: config_digest(config),
        config: echo,
        verdicts: verdicts.to_vec(),
        payload,
    }
}

fn verdict(name: &str, pass: bool, details: String) -> Verdict {
    Verdict {
        name: name.to_string(),
        pass,
        details,
    }
}

fn curve_rows(curve: &ConvergenceCurve) -> Vec<Vec<f64>> {
    curve
        .params
        .iter()
        .zip(curve.errors.iter().zip(&curve.stderrs))
        .map(|(p, (e, s))| vec![*p, *e, *s])
        .collect()
}

fn run_tanaka(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<Vec<Verdict>, RunError> {
    let report = tanaka_baseline(config.n_paths, config.n_steps, config.horizon, config.seed)?;
    let verdicts = vec![verdict(
        "tanaka_mean_matches_oracle",
        report.pass,
        format!(
            "tanaka {:.6} ± {:.6}, oracle {:.6} ± {:.6}, |z| = {:.3}",
            report.tanaka_mean, report.tanaka_se, report.oracle_mean, report.oracle_se,
            report.z.abs()
        ),
    )];
    sink.write_csv(
        "baseline.csv",
        "estimator,mean,std_error",
        &[
            vec![0.0, report.tanaka_mean, report.tanaka_se],
            vec![1.0, report.oracle_mean, report.oracle_se],
        ],
    )?;
    sink.write_json(
        "report.json",
        &envelope("tanaka_baseline", config, &verdicts, report),
    )?;
    Ok(verdicts)
}

#[derive(Serialize)]
struct PlDecompositionPayload {
    n_paths: usize,
    max_identity_residual: f64,
    max_pair_residual: Option<f64>,
    flatness_failures: usize,
    margin: f64,
    verify: itolab::lab::VerifyReport,
}

fn run_pl_decomposition(
    config: &ExperimentConfig,
    sink: &mut ArtifactSink,
) -> Result<Vec<Verdict>, RunError> {
    let f: PLConvex = config
        .function
        .to_pl()
        .map_err(|e| RunError::Config(vec![e]))?
        .expect("validated as max-of-affine");
    let oracle = config
        .function
        .to_oracle()
        .map_err(|e| RunError::Config(vec![e]))?;
    let recipe = config
        .process
        .to_recipe()
        .map_err(|e| RunError::Config(vec![e]))?;
    let grid = Arc::new(TimeGrid::uniform(config.n_steps, config.horizon)?);
    let paths = ensemble(&recipe, &grid, config.n_paths, config.seed)?;

    let margin = calibrated_margin(&f, config.horizon / config.n_steps as f64);
    let mut max_identity = 0.0f64;
    let mut max_pair: Option<f64> = None;
    let mut flatness_failures = 0usize;
    for x in &paths {
        let d = decompose_pl(&f, x, PATH_ACTIVE_TOL)?;
        max_identity = max_identity.max(identity_residual(&f, x, &d));
        if f.k() == 2 {
            let worst = pl_pair_tanaka_residual(&f, x, &d)?;
            max_pair = Some(max_pair.unwrap_or(0.0).max(worst));
        }
        if !residual_flatness_check(&d, &f, x, margin)?.ok {
            flatness_failures += 1;
        }
    }

    let selection = if f.dim() == 1 {
        Selection::LeftDerivative1d
    } else {
        Selection::MinIndexPl
    };
    let verify = verify_decomposition(
        &oracle,
        &recipe,
        config.n_paths.min(400),
        &[config.n_steps / 4, config.n_steps, config.n_steps * 4],
        config.horizon,
        config.seed,
        &default_checkpoints(config.horizon),
        config.tolerances.z_crit,
        config.tolerances.corr_crit,
        &selection,
    )?;

    let mut verdicts = vec![
        verdict(
            "identity_exact",
            max_identity <= 1e-12,
            format!("max residual {max_identity:.3e}"),
        ),
        verdict(
            "residual_flat_off_coincidence",
            flatness_failures == 0,
            format!("{flatness_failures} of {} paths failed at margin {margin:.4}", paths.len()),
        ),
        verdict(
            "martingale_part_certified",
            verify.pass,
            format!(
                "max |z| = {:.3}, lag1 = {:.4}, tv growth {:?}",
                verify.martingale.max_abs_z, verify.martingale.lag1_corr, verify.growth_ratios
            ),
        ),
    ];
    if let Some(worst) = max_pair {
        verdicts.push(verdict(
            "pair_identity_exact",
            worst <= 1e-12,
            format!("max pair residual {worst:.3e}"),
        ));
    }

    let mrows: Vec<Vec<f64>> = verify
        .martingale
        .checkpoints
        .iter()
        .zip(
            verify
                .martingale
                .increment_means
                .iter()
                .zip(verify.martingale.std_errors.iter().zip(&verify.martingale.z_scores)),
        )
        .map(|(t, (m, (se, z)))| vec![*t, *m, *se, *z])
        .collect();
    sink.write_csv(
        "martingale.csv",
        "checkpoint_t,mean_increment,std_error,z",
        &mrows,
    )?;
    let payload = PlDecompositionPayload {
        n_paths: paths.len(),
        max_identity_residual: max_identity,
        max_pair_residual: max_pair,
        flatness_failures,
        margin,
        verify,
    };
    sink.write_json(
        "report.json",
        &envelope("pl_decomposition", config, &verdicts, payload),
    )?;
    Ok(verdicts)
}

fn run_smoothing(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<Vec<Verdict>, RunError> {
    let oracle = config
        .function
        .to_oracle()
        .map_err(|e| RunError::Config(vec![e]))?;
    let recipe = config
        .process
        .to_recipe()
        .map_err(|e| RunError::Config(vec![e]))?;
    let grid = Arc::new(TimeGrid::uniform(config.n_steps, config.horizon)?);
    let paths = ensemble(&recipe, &grid, config.n_paths, config.seed)?;
    let noise = noise_ensemble(&grid, recipe.dim(), config.n_paths, config.seed);
    let eps = config.schedules.smoothing_epsilon;
    let xtilde: Vec<_> = paths
        .iter()
        .zip(&noise)
        .map(|(p, b)| perturb_with_noise(p, eps, b))
        .collect();
    let curve = smoothing_convergence_experiment(
        &oracle,
        &xtilde,
        &config.schedules.n_levels,
        config.r,
        config.seed,
    )?;
    let monotone = curve.monotone_within(2.0);
    let ratio = curve.last() / curve.first();
    let ratio_ok = ratio <= config.tolerances.smoothing_ratio;
    let verdicts = vec![
        verdict(
            "curve_monotone",
            monotone,
            format!("errors {:?}", curve.errors),
        ),
        verdict(
            "final_fraction_of_first",
            ratio_ok,
            format!("final/first = {ratio:.4} (limit {})", config.tolerances.smoothing_ratio),
        ),
    ];
    sink.write_csv("curve.csv", "param,error,stderr", &curve_rows(&curve))?;
    sink.write_json("report.json", &envelope("smoothing", config, &verdicts, curve))?;
    Ok(verdicts)
}

fn run_epsilon_limit(
    config: &ExperimentConfig,
    sink: &mut ArtifactSink,
) -> Result<Vec<Verdict>, RunError> {
    let oracle = config
        .function
        .to_oracle()
        .map_err(|e| RunError::Config(vec![e]))?;
    let recipe = config
        .process
        .to_recipe()
        .map_err(|e| RunError::Config(vec![e]))?;
    let grid = Arc::new(TimeGrid::uniform(config.n_steps, config.horizon)?);
    let paths = ensemble(&recipe, &grid, config.n_paths, config.seed)?;
    let noise = noise_ensemble(&grid, recipe.dim(), config.n_paths, config.seed);
    let curve = epsilon_convergence_experiment(
        &oracle,
        &paths,
        &noise,
        &config.schedules.epsilon,
        config.r,
        config.r_prime,
        config.seed,
    )?;
    let monotone = curve.monotone_within(2.0);
    let final_ok = curve.last() <= config.tolerances.final_epsilon_error;
    let verdicts = vec![
        verdict(
            "curve_monotone",
            monotone,
            format!("errors {:?}", curve.errors),
        ),
        verdict(
            "final_below_threshold",
            final_ok,
            format!(
                "final = {:.4} (threshold {})",
                curve.last(),
                config.tolerances.final_epsilon_error
            ),
        ),
    ];
    sink.write_csv("curve.csv", "param,error,stderr", &curve_rows(&curve))?;
    sink.write_json("report.json", &envelope("epsilon_limit", config, &verdicts, curve))?;
    Ok(verdicts)
}

#[derive(Serialize)]
struct ConditionsPayload {
    reports: Vec<ConditionReport>,
    e1_bound_ok: bool,
    e2_spread: f64,
    e3_spread: f64,
}

fn run_conditions(
    config: &ExperimentConfig,
    sink: &mut ArtifactSink,
) -> Result<Vec<Verdict>, RunError> {
    let oracle = config
        .function
        .to_oracle()
        .map_err(|e| RunError::Config(vec![e]))?;
    let recipe = config
        .process
        .to_recipe()
        .map_err(|e| RunError::Config(vec![e]))?;
    let grid = Arc::new(TimeGrid::uniform(config.n_steps, config.horizon)?);
    let paths = ensemble(&recipe, &grid, config.n_paths, config.seed)?;
    let noise = noise_ensemble(&grid, recipe.dim(), config.n_paths, config.seed);

    let mut reports = Vec::new();
    let mut e1_bound_ok = true;
    for &eps in &config.schedules.epsilon {
        let rep = condition_estimates(&oracle, &paths, &noise, eps, config.r, config.r_prime)?;
        // sup oracle over the same stopped windows and the same noise
        let sup_oracle = stats::mean(
            &paths
                .iter()
                .zip(&noise)
                .map(|(x, b)| {
                    let pert = perturb_with_noise(x, eps, b);
                    let stop = stop_at_exit(x, config.r)
                        .min(stop_at_exit(&pert.result, config.r_prime))
                        .index;
                    (0..=stop)
                        .map(|j| {
                            (0..b.dim()).map(|c| b.coord(j, c).powi(2)).sum::<f64>().sqrt()
                        })
                        .fold(0.0f64, f64::max)
                })
                .collect::<Vec<_>>(),
        );
        if rep.e1 > eps * rep.k_r_prime * sup_oracle + 1e-12 {
            e1_bound_ok = false;
        }
        reports.push(rep);
    }
    let spread = |get: fn(&ConditionReport) -> f64| {
        let max = reports.iter().map(get).fold(0.0f64, f64::max);
        let min = reports.iter().map(get).fold(f64::MAX, f64::min);
        if min > 0.0 {
            max / min
        } else if max == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    };
    let e2_spread = spread(|r| r.e2);
    let e3_spread = spread(|r| r.e3);
    let verdicts = vec![
        verdict(
            "e1_dominated_by_lipschitz_bound",
            e1_bound_ok,
            "E[sup |f(X~) - f(X)|] <= eps K E[sup |B|] at every eps".into(),
        ),
        verdict(
            "e2_e3_bounded_over_schedule",
            e2_spread < 2.0 && e3_spread < 2.0,
            format!("e2 spread {e2_spread:.3}, e3 spread {e3_spread:.3}"),
        ),
    ];
    let rows: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| vec![r.epsilon, r.e1, r.e2, r.e3, r.c_r_prime, r.k_r_prime])
        .collect();
    sink.write_csv(
        "conditions.csv",
        "epsilon,e1,e2,e3,c_r_prime,k_r_prime",
        &rows,
    )?;
    let payload = ConditionsPayload {
        reports,
        e1_bound_ok,
        e2_spread,
        e3_spread,
    };
    sink.write_json("report.json", &envelope("conditions", config, &verdicts, payload))?;
    Ok(verdicts)
}

const BATTERY_FUNCTIONS: usize = 20;
const BATTERY_MAX_DIM: usize = 3;
const BATTERY_SAMPLES: usize = 256;

fn run_mollified(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<Vec<Verdict>, RunError> {
    let thetas = geometric_schedule(config.schedules.theta_start, config.schedules.terms);
    let points_per_fn = (config.n_paths / BATTERY_FUNCTIONS).max(1);
    let report = mollified_selection_check(
        BATTERY_FUNCTIONS,
        points_per_fn,
        BATTERY_MAX_DIM,
        &thetas,
        BATTERY_SAMPLES,
        config.tolerances.subgradient_tol,
        config.seed,
    )?;
    let independence = abs_selection_independence(
        config.n_paths.max(100),
        config.n_steps,
        config.horizon,
        0.123,
        config.seed,
        1e-12,
    )?;
    let verdicts = vec![
        verdict(
            "subgradient_inequality_holds",
            report.pass,
            format!(
                "{} violations over {} points (worst margin {:.2e})",
                report.violations, report.points, report.worst_margin
            ),
        ),
        verdict(
            "selection_independence",
            independence.pass,
            format!(
                "max terminal gap {:.2e} over {} paths",
                independence.max_terminal_gap, independence.n_paths
            ),
        ),
    ];
    #[derive(Serialize)]
    struct Payload {
        battery: itolab::lab::SelectionCheckReport,
        independence: itolab::lab::SelectionIndependenceReport,
    }
    sink.write_json(
        "report.json",
        &envelope(
            "mollified_selection",
            config,
            &verdicts,
            Payload {
                battery: report,
                independence,
            },
        ),
    )?;
    Ok(verdicts)
}

fn run_directional(
    config: &ExperimentConfig,
    sink: &mut ArtifactSink,
) -> Result<Vec<Verdict>, RunError> {
    let eps = geometric_schedule(config.schedules.epsilon[0], config.schedules.terms);
    let points_per_fn = (config.n_paths / BATTERY_FUNCTIONS).max(1);
    let report = directional_limit_check(
        BATTERY_FUNCTIONS,
        points_per_fn,
        BATTERY_MAX_DIM,
        &eps,
        config.tolerances.subgradient_tol,
        config.seed,
    )?;
    let verdicts = vec![verdict(
        "limits_are_subgradients",
        report.pass,
        format!(
            "{} violations over {} points, {} non-settled",
            report.violations, report.points, report.non_convergent
        ),
    )];
    sink.write_json(
        "report.json",
        &envelope("directional_limit", config, &verdicts, report),
    )?;
    Ok(verdicts)
}
