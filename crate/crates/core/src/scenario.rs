//! Coalescence scenarios, their energies, the functional `F` and the
//! high-recombination approximations built from it.
//!
//! A scenario of order `r` is a chain `pi_0 = s_0 -> s_1 -> ... -> s_r` of
//! single merges. Its energy is `prod_{i>=1} C(s_i)` and
//! `F(pi) = sum_{s ending at pi} 1 / E(s)`.
//!
//! `F` is computed two ways: [`f_bruteforce`] walks every scenario and
//! [`f_dp`] regroups the sum by the last merge,
//! `F(pi) = (1 / C(pi)) * sum_{pi' -> pi} F(pi')` with `F(pi_0) = 1`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::partitions::{cover_length, cover_length_unchecked, LociSet, SetPartition};

pub const DEFAULT_SCENARIO_CAP: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    chain: Vec<SetPartition>,
}

impl Scenario {
    /// Checks that the chain starts at `pi_0` and each step is one merge.
    pub fn new(chain: Vec<SetPartition>) -> Result<Self> {
        let first = chain
            .first()
            .ok_or_else(|| Error::InvalidPartition("empty scenario".into()))?;
        if !first.is_singletons() {
            return Err(Error::InvalidPartition(
                "scenario must start at the singleton partition".into(),
            ));
        }
        for (k, w) in chain.windows(2).enumerate() {
            if w[1].order() != k + 1 || !w[0].refines(&w[1]) {
                return Err(Error::InvalidPartition(format!(
                    "step {} ({} -> {}) is not a single merge",
                    k + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { chain })
    }

    pub fn chain(&self) -> &[SetPartition] {
        &self.chain
    }

    pub fn order(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn target(&self) -> &SetPartition {
        self.chain.last().unwrap()
    }
}

fn check_target(target: &SetPartition) -> Result<()> {
    if target.order() == 0 {
        return Err(Error::Precondition(
            "target must have order at least 1".into(),
        ));
    }
    Ok(())
}

/// Merges of two blocks of `current` that lie in the same block of `target`.
fn merges_within(current: &SetPartition, target: &SetPartition) -> Vec<SetPartition> {
    let blocks = current.blocks();
    let tr = target.rgs();
    let mut out = Vec::new();
    for a in 0..blocks.len() {
        for b in a + 1..blocks.len() {
            if tr[blocks[a][0]] == tr[blocks[b][0]] {
                let labels: Vec<u32> = current
                    .rgs()
                    .iter()
                    .map(|&l| if l == b as u32 { a as u32 } else { l })
                    .collect();
                out.push(SetPartition::from_labels(&labels));
            }
        }
    }
    out
}

/// Number of scenarios ending at `target`, by recursion on predecessors.
pub fn count_scenarios(target: &SetPartition) -> u128 {
    fn rec(pi: &SetPartition, memo: &mut HashMap<SetPartition, u128>) -> u128 {
        if pi.is_singletons() {
            return 1;
        }
        if let Some(&c) = memo.get(pi) {
            return c;
        }
        let c = predecessors(pi).iter().map(|q| rec(q, memo)).sum();
        memo.insert(pi.clone(), c);
        c
    }
    rec(target, &mut HashMap::new())
}

/// All scenarios from `pi_0` to `target`, depth-first in merge order.
pub fn enumerate_scenarios(target: &SetPartition) -> Result<Vec<Scenario>> {
    enumerate_scenarios_capped(target, DEFAULT_SCENARIO_CAP)
}

pub fn enumerate_scenarios_capped(target: &SetPartition, cap: usize) -> Result<Vec<Scenario>> {
    check_target(target)?;
    let count = count_scenarios(target);
    if count > cap as u128 {
        return Err(Error::SizeLimit {
            what: "scenario count",
            value: usize::try_from(count).unwrap_or(usize::MAX),
            max: cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut chain = vec![SetPartition::singletons(target.len())];
    fn dfs(
        chain: &mut Vec<SetPartition>,
        target: &SetPartition,
        out: &mut Vec<Scenario>,
    ) {
        let current = chain.last().unwrap();
        if current.order() == target.order() {
            out.push(Scenario {
                chain: chain.clone(),
            });
            return;
        }
        for next in merges_within(current, target) {
            chain.push(next);
            dfs(chain, target, out);
            chain.pop();
        }
    }
    dfs(&mut chain, target, &mut out);
    Ok(out)
}

/// `E(s) = prod_{i=1}^{r} C(s_i)`.
pub fn energy(s: &Scenario, z: &LociSet) -> Result<f64> {
    s.chain()[1..]
        .iter()
        .map(|pi| cover_length(pi, z))
        .product()
}

/// `F(target)` as a literal sum over every scenario.
pub fn f_bruteforce(target: &SetPartition, z: &LociSet) -> Result<f64> {
    let scenarios = enumerate_scenarios(target)?;
    let mut total = 0.0;
    for s in &scenarios {
        total += 1.0 / energy(s, z)?;
    }
    Ok(total)
}

/// Partitions one merge below `pi`: each block split into two nonempty parts.
pub fn predecessors(pi: &SetPartition) -> Vec<SetPartition> {
    let fresh = pi.num_blocks() as u32;
    let mut out = Vec::new();
    for block in pi.blocks() {
        let m = block.len();
        if m < 2 {
            continue;
        }
        // block[0] stays put; every nonempty subset of the rest moves out
        for mask in 1u64..(1u64 << (m - 1)) {
            let mut labels = pi.rgs().to_vec();
            for (bit, &i) in block[1..].iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    labels[i] = fresh;
                }
            }
            out.push(SetPartition::from_labels(&labels));
        }
    }
    out
}

/// `F(target)` through the last-merge recursion, memoized per call.
pub fn f_dp(target: &SetPartition, z: &LociSet) -> Result<f64> {
    check_target(target)?;
    if target.len() != z.len() {
        return Err(Error::Precondition(format!(
            "partition has {} elements but there are {} loci",
            target.len(),
            z.len()
        )));
    }
    let mut memo = HashMap::new();
    Ok(f_memo(target, z.positions(), &mut memo))
}

fn f_memo(pi: &SetPartition, z: &[f64], memo: &mut HashMap<SetPartition, f64>) -> f64 {
    if pi.is_singletons() {
        return 1.0;
    }
    if let Some(&v) = memo.get(pi) {
        return v;
    }
    let sum: f64 = predecessors(pi).iter().map(|q| f_memo(q, z, memo)).sum();
    let v = sum / cover_length_unchecked(pi, z);
    memo.insert(pi.clone(), v);
    v
}

/// `F(target) / rho^k` with `k` the order of `target`.
pub fn approx_stationary(target: &SetPartition, z: &LociSet, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Precondition(format!("rho must be positive, got {rho}")));
    }
    let k = target.order() as i32;
    Ok(f_dp(target, z)? / rho.powi(k))
}

/// Approximate stationary law over `states`: `F(pi)/rho^order` for every
/// non-singleton state and the normalization complement for `pi_0`.
pub fn approx_table(states: &[SetPartition], z: &LociSet, rho: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; states.len()];
    let mut rest = 0.0;
    let mut singleton_slot = None;
    for (i, pi) in states.iter().enumerate() {
        if pi.is_singletons() {
            singleton_slot = Some(i);
        } else {
            out[i] = approx_stationary(pi, z, rho)?;
            rest += out[i];
        }
    }
    if let Some(i) = singleton_slot {
        out[i] = 1.0 - rest;
    }
    Ok(out)
}

/// `C(pi) F(pi) / (rho^{k-1} gamma_0)`, the approximate probability that the
/// embedded chain visits `target` during an excursion from `pi_0`.
pub fn hitting_approx(target: &SetPartition, z: &LociSet, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Precondition(format!("rho must be positive, got {rho}")));
    }
    let k = target.order() as i32;
    let n = z.n() as f64;
    let gamma0 = n * (n + 1.0) / 2.0;
    let value = cover_length(target, z)? * f_dp(target, z)? / (rho.powi(k - 1) * gamma0);
    if value > 1.0 {
        log::warn!("hitting approximation {value} exceeds 1 for {target}: rho = {rho} is outside the asymptotic regime");
    }
    Ok(value)
}
