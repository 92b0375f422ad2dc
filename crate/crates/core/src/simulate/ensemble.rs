use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::block_state::BlockState;
use super::observables::{check_window, theta_mass};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::stats::{exp_cdf, ks_test, mean_and_se, KsResult};

/// Protocol for equilibrium replicates: each chain starts from the single
/// block on `[0, R)`, runs for `t_burn`, then records `samples_per_chain`
/// observations `spacing` time units apart. With one sample per chain every
/// replicate is an independent chain.
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleConfig {
    pub sim: SimConfig,
    pub samples_per_chain: usize,
    pub spacing: f64,
    /// Log-scale windows `(a, b)` for the IBD-to-0 mass on `[R^a, R^b]`.
    pub theta_windows: Vec<(f64, f64)>,
    /// Position windows whose segment counts are recorded.
    pub count_windows: Vec<(f64, f64)>,
}

impl EnsembleConfig {
    /// Count windows default to the two halves of `[0, R)`.
    pub fn new(sim: SimConfig, theta_windows: Vec<(f64, f64)>) -> Result<Self> {
        sim.validate()?;
        for &(a, b) in &theta_windows {
            check_window(a, b)?;
        }
        let half = sim.r / 2.0;
        Ok(Self {
            sim,
            samples_per_chain: 1,
            spacing: 0.0,
            theta_windows,
            count_windows: vec![(0.0, half), (half, sim.r)],
        })
    }

    /// Records `per_chain` samples per chain, `spacing` apart after burn-in.
    pub fn with_chains(mut self, per_chain: usize, spacing: f64) -> Result<Self> {
        if per_chain == 0 {
            return Err(Error::Precondition("need at least one sample per chain".into()));
        }
        if per_chain > 1 && !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Precondition(format!("sample spacing must be positive, got {spacing}")));
        }
        self.samples_per_chain = per_chain;
        self.spacing = spacing;
        Ok(self)
    }

    pub fn with_count_windows(mut self, windows: Vec<(f64, f64)>) -> Self {
        self.count_windows = windows;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateObservables {
    pub replicate: u64,
    pub leftmost_raw: f64,
    pub leftmost_rescaled: f64,
    pub segments_total: usize,
    /// `(a, b, mass)` per log-scale window.
    pub theta: Vec<(f64, f64, f64)>,
    /// Segment count per count window, in configuration order.
    pub window_segments: Vec<usize>,
    pub events: u64,
}

fn observe(cfg: &EnsembleConfig, state: &BlockState, replicate: u64) -> Result<ReplicateObservables> {
    let r = cfg.sim.r;
    let segs = state.block_segments(state.zero_block());
    let leftmost_raw: f64 = segs.iter().map(|(a, b)| b - a).sum();
    let leftmost_rescaled = if r > 1.0 { leftmost_raw / r.ln() } else { f64::NAN };
    let theta = cfg
        .theta_windows
        .iter()
        .map(|&(a, b)| theta_mass(segs, r, a, b).map(|m| (a, b, m)))
        .collect::<Result<Vec<_>>>()?;
    let window_segments = cfg
        .count_windows
        .iter()
        .map(|&(a, b)| 1 + state.breakpoints_between(a, b))
        .collect();
    Ok(ReplicateObservables {
        replicate,
        leftmost_raw,
        leftmost_rescaled,
        segments_total: state.num_segments(),
        theta,
        window_segments,
        events: state.events(),
    })
}

fn run_chain(cfg: &EnsembleConfig, chain: u64, count: usize) -> Result<Vec<ReplicateObservables>> {
    let sim = cfg.sim.with_replicate(chain);
    let mut rng = sim.rng();
    let mut state = BlockState::single_block(sim.r);
    let first = chain * cfg.samples_per_chain as u64;
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        state.run_until(sim.rho, sim.t_burn + j as f64 * cfg.spacing, &mut rng);
        out.push(observe(cfg, &state, first + j as u64)?);
    }
    Ok(out)
}

/// Runs `replicates` replicates on the current rayon pool. Chain `c` draws
/// from seed stream `c` of `cfg.sim.seed` and yields replicates
/// `c * samples_per_chain ..`, so the result does not depend on scheduling.
pub fn equilibrium_ensemble(cfg: &EnsembleConfig, replicates: usize) -> Result<Vec<ReplicateObservables>> {
    if replicates == 0 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    cfg.sim.validate()?;
    let per = cfg.samples_per_chain.max(1);
    let chains = replicates.div_ceil(per);
    let nested = (0..chains)
        .into_par_iter()
        .map(|c| run_chain(cfg, c as u64, per.min(replicates - c * per)))
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// One row per (replicate, window); a replicate without windows gets one row
/// with empty window fields.
pub fn write_ensemble_csv<W: Write>(
    cfg: &EnsembleConfig,
    reps: &[ReplicateObservables],
    mut out: W,
) -> Result<()> {
    writeln!(
        out,
        "replicate,R,rho,t_burn,leftmost_raw,leftmost_rescaled,segments_total,theta_a,theta_b,theta_mass"
    )?;
    let s = &cfg.sim;
    for rep in reps {
        let prefix = format!(
            "{},{:?},{:?},{:?},{:?},{:?},{}",
            rep.replicate, s.r, s.rho, s.t_burn, rep.leftmost_raw, rep.leftmost_rescaled, rep.segments_total
        );
        if rep.theta.is_empty() {
            writeln!(out, "{prefix},,,")?;
        }
        for &(a, b, m) in &rep.theta {
            writeln!(out, "{prefix},{a:?},{b:?},{m:?}")?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub std_err: f64,
}

impl MeanSe {
    fn of(xs: &[f64]) -> Self {
        let (mean, std_err) = mean_and_se(xs);
        Self { mean, std_err }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowCheck {
    pub a: f64,
    pub b: f64,
    pub expected: f64,
    pub observed: MeanSe,
    pub z_score: f64,
    pub within_3_se: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaWindowSummary {
    pub a: f64,
    pub b: f64,
    pub mass: MeanSe,
    pub second_moment: MeanSe,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleSummary {
    pub replicates: usize,
    pub total_events: u64,
    pub leftmost_rescaled: MeanSe,
    /// KS test of rescaled leftmost lengths against Exp(1); absent with
    /// fewer than two replicates.
    pub ks_vs_exp1: Option<KsResult>,
    pub ks_note: Option<String>,
    /// Lag-one autocorrelation of rescaled leftmost lengths between
    /// consecutive samples of a chain; absent with one sample per chain.
    pub within_chain_lag1: Option<f64>,
    pub theta_windows: Vec<ThetaWindowSummary>,
    /// Segment counts against the equilibrium mean `1 + rho (b - a)`.
    pub stationarity: Vec<WindowCheck>,
    pub stationary: bool,
}

pub fn summarize(cfg: &EnsembleConfig, reps: &[ReplicateObservables]) -> Result<EnsembleSummary> {
    if reps.is_empty() {
        return Err(Error::EmptySample);
    }
    let rescaled: Vec<f64> = reps.iter().map(|r| r.leftmost_rescaled).collect();
    let (ks_vs_exp1, ks_note) = if reps.len() >= 2 && rescaled.iter().all(|x| x.is_finite()) {
        (Some(ks_test(&rescaled, exp_cdf(1.0))?), None)
    } else {
        (None, Some("KS test skipped: needs at least two replicates and R > 1".to_string()))
    };
    let within_chain_lag1 = lag1_within_chains(&rescaled, cfg.samples_per_chain);
    let theta_windows = cfg
        .theta_windows
        .iter()
        .enumerate()
        .map(|(w, &(a, b))| {
            let m: Vec<f64> = reps.iter().map(|r| r.theta[w].2).collect();
            let m2: Vec<f64> = m.iter().map(|x| x * x).collect();
            ThetaWindowSummary {
                a,
                b,
                mass: MeanSe::of(&m),
                second_moment: MeanSe::of(&m2),
            }
        })
        .collect();
    let stationarity: Vec<WindowCheck> = cfg
        .count_windows
        .iter()
        .enumerate()
        .map(|(w, &(a, b))| {
            let counts: Vec<f64> = reps.iter().map(|r| r.window_segments[w] as f64).collect();
            let observed = MeanSe::of(&counts);
            let expected = 1.0 + cfg.sim.rho * (b - a);
            let z_score = if observed.std_err > 0.0 {
                (observed.mean - expected) / observed.std_err
            } else {
                f64::INFINITY
            };
            WindowCheck {
                a,
                b,
                expected,
                within_3_se: z_score.abs() <= 3.0,
                observed,
                z_score,
            }
        })
        .collect();
    let stationary = stationarity.iter().all(|c| c.within_3_se);
    Ok(EnsembleSummary {
        replicates: reps.len(),
        total_events: reps.iter().map(|r| r.events).sum(),
        leftmost_rescaled: MeanSe::of(&rescaled),
        ks_vs_exp1,
        ks_note,
        within_chain_lag1,
        theta_windows,
        stationarity,
        stationary,
    })
}

fn lag1_within_chains(xs: &[f64], per_chain: usize) -> Option<f64> {
    if per_chain < 2 || xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let (mut acc, mut pairs) = (0.0, 0usize);
    for chain in xs.chunks(per_chain) {
        for w in chain.windows(2) {
            acc += (w[0] - mean) * (w[1] - mean);
            pairs += 1;
        }
    }
    (pairs > 0 && var > 0.0).then(|| acc / pairs as f64 / var)
}
