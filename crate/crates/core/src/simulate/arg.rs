use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::exactarg::build_generator;
use crate::partitions::{LociSet, SetPartition};
use crate::stats::Trajectory;

/// A simulated ARG path; states are indices into `states`.
#[derive(Clone, Debug)]
pub struct ArgTrajectory {
    pub states: Vec<SetPartition>,
    pub trajectory: Trajectory,
}

impl ArgTrajectory {
    pub fn state_at(&self, t: f64) -> Option<&SetPartition> {
        self.trajectory.state_at(t).map(|i| &self.states[i])
    }

    pub fn final_state(&self) -> &SetPartition {
        &self.states[self.trajectory.jumps.last().expect("nonempty path").1]
    }
}

/// Exact continuous-time simulation of the ARG on `[0, t_max]`.
pub fn simulate_arg<R: Rng + ?Sized>(
    z: &LociSet,
    rho: f64,
    start: &SetPartition,
    t_max: f64,
    rng: &mut R,
) -> Result<ArgTrajectory> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Precondition(format!("t_max must be positive, got {t_max}")));
    }
    let generator = build_generator(z, rho)?;
    let mut s = generator
        .space()
        .index_of(start)
        .ok_or_else(|| Error::Precondition(format!("{start} is not a partition of the loci")))?;
    let moves: Vec<Vec<(usize, f64)>> = (0..generator.len()).map(|i| generator.transitions(i)).collect();
    let out_rate: Vec<f64> = (0..generator.len()).map(|i| -generator.rate(i, i)).collect();

    let mut jumps = vec![(0.0, s)];
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        t += e / out_rate[s];
        if t >= t_max {
            break;
        }
        let mut u = rng.random::<f64>() * out_rate[s];
        let row = &moves[s];
        let mut next = row[row.len() - 1].0;
        for &(j, r) in row {
            if u < r {
                next = j;
                break;
            }
            u -= r;
        }
        s = next;
        jumps.push((t, s));
    }
    Ok(ArgTrajectory {
        states: generator.states().to_vec(),
        trajectory: Trajectory { jumps, t_end: t_max },
    })
}
