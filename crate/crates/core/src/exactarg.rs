//! Exact treatment of the finite-loci ARG: the generator over all partitions
//! of the loci, its stationary law, transient laws, and embedded-chain
//! hitting probabilities.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::partitions::{
    cover_length_unchecked, merge_pairs, restrict, split_moves, LociSet, SetPartition, StateSpace,
};

/// Largest number of loci handled by the dense solvers (Bell(8) = 4140 states).
pub const MAX_EXACT_LOCI: usize = 8;

/// Residual bound `max |mu Q|` enforced on every stationary solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Dense transition-rate matrix of the ARG over the enumerated partitions.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    space: StateSpace,
    rates: DMatrix<f64>,
    rho: f64,
    z: LociSet,
}

impl GeneratorMatrix {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn states(&self) -> &[SetPartition] {
        self.space.states()
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn loci(&self) -> &LociSet {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// Rate of `from -> to` (off-diagonal), or minus the total out-rate.
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates[(from, to)]
    }

    /// Off-diagonal transitions out of `from` with positive rate.
    pub fn transitions(&self, from: usize) -> Vec<(usize, f64)> {
        (0..self.len())
            .filter(|&to| to != from && self.rates[(from, to)] > 0.0)
            .map(|to| (to, self.rates[(from, to)]))
            .collect()
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Precondition(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

fn check_size(z: &LociSet) -> Result<()> {
    if z.len() > MAX_EXACT_LOCI {
        return Err(Error::SizeLimit {
            what: "number of loci",
            value: z.len(),
            max: MAX_EXACT_LOCI,
        });
    }
    Ok(())
}

/// Coagulation of each pair of blocks at rate 1, fragmentation of a block
/// between consecutive elements `z_a < z_b` at rate `rho (z_b - z_a)`.
pub fn build_generator(z: &LociSet, rho: f64) -> Result<GeneratorMatrix> {
    check_rho(rho)?;
    check_size(z)?;
    let space = StateSpace::new(z.n())?;
    let m = space.len();
    let mut rates = DMatrix::<f64>::zeros(m, m);
    for (i, pi) in space.states().iter().enumerate() {
        let mut out = 0.0;
        for succ in merge_pairs(pi) {
            let j = space.index_of(&succ).expect("merge stays in state space");
            rates[(i, j)] += 1.0;
            out += 1.0;
        }
        for (succ, gap) in split_moves(pi, z)? {
            let j = space.index_of(&succ).expect("split stays in state space");
            rates[(i, j)] += rho * gap;
            out += rho * gap;
        }
        rates[(i, i)] = -out;
    }
    Ok(GeneratorMatrix {
        space,
        rates,
        rho,
        z: z.clone(),
    })
}

/// Stationary probabilities indexed like [`StateSpace::states`].
#[derive(Clone, Debug)]
pub struct StationaryTable {
    states: Vec<SetPartition>,
    probabilities: Vec<f64>,
    rho: f64,
    z: LociSet,
    residual: f64,
}

impl StationaryTable {
    pub fn states(&self) -> &[SetPartition] {
        &self.states
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn loci(&self) -> &LociSet {
        &self.z
    }

    /// `max |mu Q|` of the solution.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn probability(&self, pi: &SetPartition) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == pi)
            .map(|i| self.probabilities[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SetPartition, f64)> {
        self.states.iter().zip(self.probabilities.iter().copied())
    }

    /// CSV with header `partition,probability`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "partition,probability")?;
        for (pi, p) in self.iter() {
            writeln!(out, "\"{pi}\",{}", format_sig17(p))?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits, locale independent.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Solves `mu Q = 0, sum(mu) = 1` by replacing the last balance equation with
/// the normalization row and LU-factorizing.
pub fn stationary_exact(z: &LociSet, rho: f64) -> Result<StationaryTable> {
    let generator = build_generator(z, rho)?;
    stationary_from_generator(&generator)
}

pub fn stationary_from_generator(generator: &GeneratorMatrix) -> Result<StationaryTable> {
    let q = generator.rates();
    let m = generator.len();
    let mut a = q.transpose();
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let lu = a.clone().lu();
    let mut mu = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular("stationary balance system".into()))?;
    // one step of iterative refinement
    let r = &b - &a * &mu;
    if let Some(delta) = lu.solve(&r) {
        mu += delta;
    }
    let residual = (mu.transpose() * q).amax();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::Singular(format!(
            "stationary residual {residual:e} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    let probabilities: Vec<f64> = mu.iter().map(|&p| p.max(0.0)).collect();
    Ok(StationaryTable {
        states: generator.states().to_vec(),
        probabilities,
        rho: generator.rho(),
        z: generator.loci().clone(),
        residual,
    })
}

/// Law at time `t` of the chain started at `start`, by uniformization.
pub fn transient_law(z: &LociSet, rho: f64, start: &SetPartition, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("time must be nonnegative, got {t}")));
    }
    let generator = build_generator(z, rho)?;
    let m = generator.len();
    let s = generator
        .space()
        .index_of(start)
        .ok_or_else(|| Error::Precondition(format!("{start} is not a partition of the loci")))?;
    let q = generator.rates();
    let lambda = (0..m).map(|i| -q[(i, i)]).fold(0.0, f64::max).max(1e-300);
    let p = DMatrix::<f64>::identity(m, m) + q / lambda;
    let mut v = DVector::<f64>::zeros(m);
    v[s] = 1.0;
    let mut v = v.transpose();
    let lt = lambda * t;
    // Poisson weights computed in log space to survive large lt
    let mut law = DVector::<f64>::zeros(m).transpose();
    let mut cumulative = 0.0;
    let max_terms = (lt + 12.0 * lt.sqrt() + 50.0).ceil() as usize;
    let mut log_w = -lt;
    for k in 0..=max_terms {
        if k > 0 {
            log_w += lt.ln() - (k as f64).ln();
            v = &v * &p;
        }
        let w = log_w.exp();
        law += &v * w;
        cumulative += w;
        if 1.0 - cumulative < 1e-14 && k as f64 > lt {
            break;
        }
    }
    let total: f64 = law.iter().sum();
    Ok(law.iter().map(|x| (x / total).max(0.0)).collect())
}

/// Max absolute discrepancy between `Rest_keep * mu^{rho,z}` and
/// `mu^{rho, z_keep}`.
pub fn check_consistency(z: &LociSet, keep: &[usize], rho: f64) -> Result<f64> {
    let full = stationary_exact(z, rho)?;
    let sub_loci = z.subset(keep)?;
    let sub = stationary_exact(&sub_loci, rho)?;
    let sub_space = StateSpace::new(sub_loci.n())?;
    let mut pushed = vec![0.0; sub_space.len()];
    for (pi, p) in full.iter() {
        let image = restrict(pi, keep)?;
        pushed[sub_space.index_of(&image).expect("restriction is a partition")] += p;
    }
    Ok(pushed
        .iter()
        .zip(sub.probabilities())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Max discrepancy of `mu^{rho,z}` against `mu^{1, rho z}` and against
/// `mu^{rho/lambda, lambda z}` under the index-preserving identification.
pub fn check_scaling(z: &LociSet, rho: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    let base = stationary_exact(z, rho)?;
    let unit = stationary_exact(&z.scaled(rho)?, 1.0)?;
    let rescaled = stationary_exact(&z.scaled(lambda)?, rho / lambda)?;
    let disc = |other: &StationaryTable| {
        base.probabilities()
            .iter()
            .zip(other.probabilities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    Ok(disc(&unit).max(disc(&rescaled)))
}

/// Probability that the embedded jump chain started at `pi_0` visits
/// `target` before returning to `pi_0`.
pub fn hitting_probability(z: &LociSet, rho: f64, target: &SetPartition) -> Result<f64> {
    if target.is_singletons() {
        return Err(Error::Precondition(
            "target must differ from the singleton partition".into(),
        ));
    }
    let generator = build_generator(z, rho)?;
    let space = generator.space();
    let t = space.index_of(target).ok_or_else(|| {
        Error::Precondition(format!("{target} is not a partition of {} loci", z.len()))
    })?;
    let s0 = space.singletons_index();
    let q = generator.rates();
    let m = space.len();

    // interior states, excluding both absorbing boundaries
    let interior: Vec<usize> = (0..m).filter(|&i| i != s0 && i != t).collect();
    let mut slot = vec![usize::MAX; m];
    for (k, &i) in interior.iter().enumerate() {
        slot[i] = k;
    }
    let mi = interior.len();
    let mut a = DMatrix::<f64>::identity(mi, mi);
    let mut b = DVector::<f64>::zeros(mi);
    for (k, &i) in interior.iter().enumerate() {
        let out = -q[(i, i)];
        for j in 0..m {
            if j == i || q[(i, j)] == 0.0 {
                continue;
            }
            let p = q[(i, j)] / out;
            if j == t {
                b[k] += p;
            } else if j != s0 {
                a[(k, slot[j])] -= p;
            }
        }
    }
    let h = if mi == 0 {
        DVector::zeros(0)
    } else {
        a.lu()
            .solve(&b)
            .ok_or_else(|| Error::Singular("hitting-probability system".into()))?
    };
    let out0 = -q[(s0, s0)];
    let mut prob = 0.0;
    for j in 0..m {
        if j == s0 || q[(s0, j)] == 0.0 {
            continue;
        }
        let p = q[(s0, j)] / out0;
        prob += p * if j == t { 1.0 } else { h[slot[j]] };
    }
    Ok(prob.clamp(0.0, 1.0))
}

/// Total out-rate of a state: `gamma_r + rho C(pi)`.
pub fn total_rate(pi: &SetPartition, z: &LociSet, rho: f64) -> f64 {
    let k = pi.num_blocks() as f64;
    k * (k - 1.0) / 2.0 + rho * cover_length_unchecked(pi, z.positions())
}
