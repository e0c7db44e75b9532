//! Monte-Carlo comparison of the navigation filters on shared logs.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ImperfectIekf, Mekf};
use crate::error::{Result, TfgError};
use crate::scenarios::inertial::{
    draw_prior, simulate, InertialNavConfig, NavErrors, NavFilter, NavPrior, NavTuning, SimLog,
    TfgNavFilter, Trajectory,
};

/// Filters taking part in the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Tfg,
    Imperfect,
    Mekf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::Tfg, FilterKind::Imperfect, FilterKind::Mekf];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Tfg => "tfg",
            FilterKind::Imperfect => "imperfect",
            FilterKind::Mekf => "mekf",
        }
    }

    pub fn build(self, prior: &NavPrior, tuning: &NavTuning) -> Box<dyn NavFilter> {
        match self {
            FilterKind::Tfg => Box::new(TfgNavFilter::new(prior, tuning)),
            FilterKind::Imperfect => Box::new(ImperfectIekf::new(prior, tuning)),
            FilterKind::Mekf => Box::new(Mekf::new(prior, tuning)),
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = TfgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tfg" => Ok(FilterKind::Tfg),
            "imperfect" => Ok(FilterKind::Imperfect),
            "mekf" => Ok(FilterKind::Mekf),
            other => Err(TfgError::Config(format!("unknown filter '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub runs: usize,
    pub seed: u64,
    pub filters: Vec<FilterKind>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            seed: 1,
            filters: FilterKind::ALL.to_vec(),
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(TfgError::Config("runs must be at least 1".into()));
        }
        if self.filters.is_empty() {
            return Err(TfgError::Config("at least one filter is required".into()));
        }
        Ok(())
    }
}

/// Error traces of one filter.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterTrace {
    pub kind: FilterKind,
    /// `per_run[run][record]`.
    pub per_run: Vec<Vec<NavErrors>>,
    /// Root-mean-square over runs at each record time, in the order
    /// `(att_deg, vel, pos, bw_deg_s, ba)`.
    pub rmse: Vec<[f64; 5]>,
}

impl FilterTrace {
    pub fn final_rmse(&self) -> [f64; 5] {
        self.rmse.last().copied().unwrap_or([0.0; 5])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloResult {
    pub times: Vec<f64>,
    pub traces: Vec<FilterTrace>,
}

impl MonteCarloResult {
    pub fn trace(&self, kind: FilterKind) -> Option<&FilterTrace> {
        self.traces.iter().find(|t| t.kind == kind)
    }
}

/// RNG of run `run`: one independent stream per run of the master seed.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Root-mean-square of each component over runs.
pub fn rmse(per_run: &[Vec<NavErrors>]) -> Vec<[f64; 5]> {
    let len = per_run.iter().map(Vec::len).min().unwrap_or(0);
    let k = per_run.len().max(1) as f64;
    (0..len)
        .map(|i| {
            let mut acc = [0.0; 5];
            for run in per_run {
                for (a, e) in acc.iter_mut().zip(run[i].as_array()) {
                    *a += e * e;
                }
            }
            acc.map(|a| (a / k).sqrt())
        })
        .collect()
}

/// Runs one filter over a log and returns errors at the record times.
pub fn run_filter(
    kind: FilterKind,
    cfg: &InertialNavConfig,
    log: &SimLog,
    prior: &NavPrior,
) -> Result<Vec<NavErrors>> {
    let tuning = NavTuning::from_config(cfg);
    let mut f = kind.build(prior, &tuning);
    let every = cfg.record_every();
    let mut out = vec![NavErrors::between(&f.estimate(), &log.truth[0])];
    for n in 1..log.truth.len() {
        f.propagate(&log.imu[n])?;
        f.update(&log.obs[n])?;
        if n % every == 0 {
            out.push(NavErrors::between(&f.estimate(), &log.truth[n]));
        }
    }
    Ok(out)
}

/// Record times matching [`run_filter`].
pub fn record_times(cfg: &InertialNavConfig) -> Vec<f64> {
    let every = cfg.record_every();
    std::iter::once(0.0)
        .chain(
            (1..=cfg.steps())
                .filter(|n| n % every == 0)
                .map(|n| n as f64 * cfg.dt_s),
        )
        .collect()
}

/// Runs every requested filter on identical per-run logs.
///
/// Runs execute in parallel; results are collected in run order, so the
/// output does not depend on scheduling.
pub fn run_monte_carlo(cfg: &InertialNavConfig, mc: &MonteCarloConfig) -> Result<MonteCarloResult> {
    cfg.validate()?;
    mc.validate()?;
    let traj = Trajectory::generate(cfg);
    let runs: Vec<Vec<Vec<NavErrors>>> = (0..mc.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(mc.seed, run);
            let log = simulate(cfg, &traj, &mut rng);
            let prior = draw_prior(cfg, &log.truth[0], &mut rng);
            mc.filters
                .iter()
                .map(|k| run_filter(*k, cfg, &log, &prior))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let traces = mc
        .filters
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let per_run: Vec<Vec<NavErrors>> = runs.iter().map(|r| r[i].clone()).collect();
            FilterTrace {
                kind: *kind,
                rmse: rmse(&per_run),
                per_run,
            }
        })
        .collect();
    Ok(MonteCarloResult {
        times: record_times(cfg),
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_of_constant_error_is_its_magnitude() {
        let e = NavErrors {
            att_deg: 2.0,
            vel: 0.5,
            pos: 3.0,
            gyro_bias_deg_s: 0.1,
            accel_bias: 0.2,
        };
        let runs = vec![vec![e; 4]; 7];
        for row in rmse(&runs) {
            for (a, b) in row.iter().zip(e.as_array()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn filter_names_round_trip() {
        for k in FilterKind::ALL {
            assert_eq!(k.name().parse::<FilterKind>().unwrap(), k);
        }
        assert!("ukf".parse::<FilterKind>().is_err());
    }
}
