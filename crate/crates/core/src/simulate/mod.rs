//! Event-driven simulation of the finite-loci ARG and of the interval
//! partitioning process on `[0, R)`, with the observables used to check the
//! equilibrium limit laws.

mod arg;
mod block_state;
mod ensemble;
mod observables;

pub use arg::{simulate_arg, ArgTrajectory};
pub use block_state::{BlockState, Event};
pub use ensemble::{
    equilibrium_ensemble, summarize, write_ensemble_csv, EnsembleConfig, EnsembleSummary,
    ReplicateObservables,
};
pub use observables::{leftmost_block_length, measure_theta_r, segments_in_window};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::IntervalPartition;

pub type SimRng = ChaCha8Rng;

/// Default burn-in, in coalescent time units.
pub const DEFAULT_T_BURN: f64 = 20.0;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of stream `index` under `base`: `splitmix64(base ^ splitmix64(index))`.
///
/// Every replicate draws from its own stream, so results never depend on the
/// order in which replicates are evaluated.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

pub fn stream_rng(base: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(base, index))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rho: f64,
    pub r: f64,
    pub t_burn: f64,
    pub t_max: f64,
    pub seed: u64,
    pub replicate_index: u64,
}

impl SimConfig {
    pub fn new(rho: f64, r: f64, t_burn: f64, t_max: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            rho,
            r,
            t_burn,
            t_max,
            seed,
            replicate_index: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Precondition(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Precondition(format!("R must be positive, got {}", self.r)));
        }
        if !(self.t_burn >= 0.0 && self.t_burn <= self.t_max && self.t_max.is_finite()) {
            return Err(Error::Precondition(format!(
                "need 0 <= t_burn <= t_max, got t_burn = {}, t_max = {}",
                self.t_burn, self.t_max
            )));
        }
        Ok(())
    }

    pub fn with_replicate(mut self, index: u64) -> Self {
        self.replicate_index = index;
        self
    }

    pub fn rng(&self) -> SimRng {
        stream_rng(self.seed, self.replicate_index)
    }
}

/// Runs the interval partitioning process from `start` up to `cfg.t_max`.
pub fn simulate_interval(cfg: &SimConfig, start: &IntervalPartition) -> Result<IntervalPartition> {
    cfg.validate()?;
    if start.r() != cfg.r {
        return Err(Error::Precondition(format!(
            "start lives on [0, {}) but R = {}",
            start.r(),
            cfg.r
        )));
    }
    let mut state = BlockState::from_partition(start);
    let mut rng = cfg.rng();
    state.run_until(cfg.rho, cfg.t_max, &mut rng);
    Ok(state.to_partition())
}
