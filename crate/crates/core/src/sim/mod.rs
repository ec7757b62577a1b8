//! Monte Carlo engine: per-trial solve, evaluate and worst-case check,
//! spread over a bounded worker pool and reduced in trial order.

mod repro;
mod sweep;

pub use repro::{run_preset, verifier_self_check, Figure, Scale};
pub use sweep::{run_sweep, Provenance, SweepRow, SweepResult, SweepSpec, SweptParameter};

use rayon::prelude::*;
use serde::Serialize;

use crate::beamformer::{solve, BeamformingSolution, Method, TargetSinrs};
use crate::channel::{make_channel_set, make_trial_channel_set, ChannelSet};
use crate::config::{ChannelMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{eve_sinr_summary, evaluate, mean_se, sample_realization, MeanSe};
use crate::rng::{mix_seed, stream};
use crate::verifier::worst_case_feasible;

/// Environment variable that sets the worker count when no explicit count is given.
pub const WORKERS_ENV: &str = "SECBEAM_WORKERS";

/// Explicit count, then `SECBEAM_WORKERS`, then the available parallelism.
pub fn resolve_workers(requested: Option<usize>) -> Result<usize> {
    if let Some(w) = requested {
        if w == 0 {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        return Ok(w);
    }
    if let Ok(text) = std::env::var(WORKERS_ENV) {
        return match text.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(Error::invalid(WORKERS_ENV, format!("`{text}` is not a positive integer"))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::SelfCheck(format!("worker pool: {e}")))
}

/// Aggregates for one method over all trials of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub total_power: MeanSe,
    pub secret_sum_rate: MeanSe,
    pub eve_sinr_db: MeanSe,
    /// Share of trials whose solution meets every constraint at the exact worst case.
    pub frac_worstcase_feasible: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub n_trials: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

impl ScenarioResult {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// One channel set with every requested method solved and checked on it.
struct Prepared {
    channels: ChannelSet,
    solutions: Vec<(BeamformingSolution, bool)>,
}

fn prepare(config: &ScenarioConfig, channels: ChannelSet, targets: &TargetSinrs) -> Result<Prepared> {
    let solutions = config
        .methods
        .iter()
        .map(|&m| {
            let sol = solve(m, &channels, targets, config.an_fraction)?;
            let ok = worst_case_feasible(&channels, &sol, targets)?;
            Ok((sol, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared { channels, solutions })
}

struct TrialRecord {
    total_power: f64,
    secret_sum_rate: f64,
    eve_sinr: f64,
    feasible: bool,
}

fn run_trial(config: &ScenarioConfig, targets: &TargetSinrs, shared: Option<&Prepared>, trial: u64) -> Result<Vec<TrialRecord>> {
    let owned;
    let prepared = match shared {
        Some(p) => p,
        None => {
            owned = prepare(config, make_trial_channel_set(config, trial)?, targets)?;
            &owned
        }
    };
    // one realization per trial, shared by every method
    let seed = mix_seed(config.base_seed, stream::ERRORS, trial);
    let realization = sample_realization(&prepared.channels, seed, config.error_sampler);
    Ok(prepared
        .solutions
        .iter()
        .map(|(sol, feasible)| {
            let m = evaluate(&realization, &prepared.channels, sol, config.eve_aggregate);
            TrialRecord {
                total_power: m.total_power,
                secret_sum_rate: m.secret_sum_rate,
                eve_sinr: m.eve_sinr,
                feasible: *feasible,
            }
        })
        .collect())
}

/// Runs every trial of `config`. Trials are reduced in index order, so the
/// result does not depend on the worker count.
pub fn run_scenario(config: &ScenarioConfig, workers: Option<usize>) -> Result<ScenarioResult> {
    config.validate()?;
    let targets = config.targets()?;
    let workers = resolve_workers(workers)?;
    let shared = match config.channel_mode {
        ChannelMode::Synthetic => Some(prepare(config, make_channel_set(config)?, &targets)?),
        ChannelMode::Physical => None,
    };
    let trials = config.n_trials as u64;
    let records: Vec<Vec<TrialRecord>> = pool(workers)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(config, &targets, shared.as_ref(), t))
            .collect::<Result<Vec<_>>>()
    })?;

    let n = records.len();
    let methods = config
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let column = |f: fn(&TrialRecord) -> f64| records.iter().map(|r| f(&r[j])).collect::<Vec<f64>>();
            let feasible = records.iter().filter(|r| r[j].feasible).count();
            MethodSummary {
                method,
                total_power: mean_se(&column(|r| r.total_power)),
                secret_sum_rate: mean_se(&column(|r| r.secret_sum_rate)),
                eve_sinr_db: eve_sinr_summary(&column(|r| r.eve_sinr), config.eve_average),
                frac_worstcase_feasible: feasible as f64 / n as f64,
            }
        })
        .collect();
    Ok(ScenarioResult {
        n_trials: n,
        seed: config.base_seed,
        methods,
    })
}
