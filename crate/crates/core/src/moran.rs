//! Forward Moran model with single-crossover recombination and ancestral
//! chromosome painting, and its comparison with the ARG.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactarg::transient_law;
use crate::partitions::{IntervalPartition, LociSet, SetPartition, StateSpace};
use crate::simulate::stream_rng;
use crate::stats::{empirical_law, tv_distance};

/// A painted chromosome on `[0, R]`: `(start, color)` per segment, starting at
/// 0, with adjacent colors distinct.
#[derive(Clone, Debug, PartialEq)]
pub struct Mosaic {
    segs: Vec<(f64, u32)>,
}

impl Mosaic {
    fn monochrome(color: u32) -> Self {
        Self {
            segs: vec![(0.0, color)],
        }
    }

    /// `(start, color)` per segment.
    pub fn segments(&self) -> &[(f64, u32)] {
        &self.segs
    }

    /// `(start, end, color)` per segment.
    pub fn spans(&self, r: f64) -> Vec<(f64, f64, u32)> {
        self.segs
            .iter()
            .enumerate()
            .map(|(i, &(s, c))| (s, self.segs.get(i + 1).map_or(r, |n| n.0), c))
            .collect()
    }

    /// Color of the segment containing `x`; `x = R` belongs to the last one.
    pub fn color_at(&self, x: f64) -> u32 {
        let i = self.segs.partition_point(|s| s.0 <= x);
        self.segs[i.saturating_sub(1)].1
    }

    pub fn num_colors(&self) -> usize {
        self.segs.iter().map(|s| s.1).collect::<BTreeSet<_>>().len()
    }

    pub fn to_interval_partition(&self, r: f64) -> Result<IntervalPartition> {
        let mut bps: Vec<f64> = self.segs.iter().map(|s| s.0).collect();
        bps.push(r);
        IntervalPartition::new(bps, self.segs.iter().map(|s| s.1).collect())
    }

    /// `left` on `[0, u)` followed by `right` on `[u, R]`.
    fn splice(left: &Mosaic, right: &Mosaic, u: f64) -> Mosaic {
        let mut segs: Vec<(f64, u32)> = left.segs.iter().copied().take_while(|s| s.0 < u).collect();
        let j = right.segs.partition_point(|s| s.0 <= u).saturating_sub(1);
        for (k, &(s, c)) in right.segs[j..].iter().enumerate() {
            let s = if k == 0 { u } else { s };
            match segs.last() {
                Some(&(_, last)) if last == c => {}
                _ => segs.push((s, c)),
            }
        }
        Mosaic { segs }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MoranParams {
    pub n: usize,
    pub r: f64,
    /// Recombination probability per unit length; `rho_n * r` must lie in (0, 1).
    pub rho_n: f64,
}

impl MoranParams {
    pub fn new(n: usize, r: f64, rho_n: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("need N >= 2, got {n}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Precondition(format!("R must be positive, got {r}")));
        }
        let p = rho_n * r;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Precondition(format!("need rho_N R in (0, 1), got {p}")));
        }
        Ok(Self { n, r, rho_n })
    }

    /// Diffusion-limit recombination rate `rho_N N / 2`.
    pub fn limit_rho(&self) -> f64 {
        self.rho_n * self.n as f64 / 2.0
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    params: MoranParams,
    individuals: Vec<Mosaic>,
    time: f64,
    events: u64,
}

impl Population {
    /// Individual `i` is painted entirely in color `i + 1`.
    pub fn new(params: MoranParams) -> Self {
        Self {
            params,
            individuals: (1..=params.n as u32).map(Mosaic::monochrome).collect(),
            time: 0.0,
            events: 0,
        }
    }

    pub fn params(&self) -> &MoranParams {
        &self.params
    }

    pub fn individuals(&self) -> &[Mosaic] {
        &self.individuals
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn colors_present(&self) -> BTreeSet<u32> {
        self.individuals
            .iter()
            .flat_map(|m| m.segs.iter().map(|s| s.1))
            .collect()
    }

    /// All chromosomes carry the same mosaic.
    pub fn is_fixed(&self) -> bool {
        let first = &self.individuals[0];
        self.individuals[1..].iter().all(|m| m == first)
    }

    /// One reproduction event. Events occur at total rate `N`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.time += self.holding_time(rng);
        self.reproduce(rng);
    }

    fn holding_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Exp::new(self.params.n as f64).expect("N > 0").sample(rng)
    }

    fn reproduce<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.params.n;
        self.events += 1;
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = if rng.random::<bool>() { (i, j) } else { (j, i) };
        let offspring = if rng.random::<f64>() < self.params.rho_n * self.params.r {
            let u = rng.random::<f64>() * self.params.r;
            Mosaic::splice(&self.individuals[a], &self.individuals[b], u)
        } else {
            self.individuals[a].clone()
        };
        let target = rng.random_range(0..n);
        self.individuals[target] = offspring;
    }

    pub fn run_until<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) {
        loop {
            let dt = self.holding_time(rng);
            if self.time + dt > t {
                self.time = t.max(self.time);
                return;
            }
            self.time += dt;
            self.reproduce(rng);
        }
    }

    /// CSV with columns `individual, seg_start, seg_end, color`.
    pub fn write_mosaic_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "individual,seg_start,seg_end,color")?;
        for (i, m) in self.individuals.iter().enumerate() {
            for (s, e, c) in m.spans(self.params.r) {
                writeln!(out, "{i},{s:?},{e:?},{c}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FixationOutcome {
    pub fixed: bool,
    pub events: u64,
    pub time: f64,
    /// `(start, end, color)` of the common mosaic, when fixed.
    pub mosaic: Vec<(f64, f64, u32)>,
    pub color_count: usize,
}

/// Steps until every chromosome carries the same mosaic or `max_events`
/// events have run.
pub fn run_to_fixation<R: Rng + ?Sized>(pop: &mut Population, max_events: u64, rng: &mut R) -> FixationOutcome {
    let start = pop.events;
    while !pop.is_fixed() && pop.events - start < max_events {
        pop.step(rng);
    }
    let fixed = pop.is_fixed();
    let m = &pop.individuals[0];
    FixationOutcome {
        fixed,
        events: pop.events - start,
        time: pop.time,
        mosaic: if fixed { m.spans(pop.params.r) } else { Vec::new() },
        color_count: if fixed { m.num_colors() } else { pop.colors_present().len() },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub params: MoranParams,
    pub loci: Vec<f64>,
    pub t: f64,
    /// ARG time `2 t / N`.
    pub arg_time: f64,
    /// ARG recombination rate `rho_N N / 2`.
    pub rho: f64,
    pub replicates: usize,
    pub states: Vec<String>,
    pub moran: Vec<f64>,
    pub arg: Vec<f64>,
    pub tv: f64,
}

/// Compares the ancestry partition of the loci of one sampled individual at
/// forward time `t` with the ARG law at time `2t/N` and `rho = rho_N N / 2`.
///
/// Every chromosome starts monochromatic, so both sides start from the
/// partition with all loci in one block.
pub fn duality_check(params: MoranParams, z: &LociSet, t: f64, replicates: usize, seed: u64) -> Result<DualityReport> {
    if replicates == 0 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("time must be nonnegative, got {t}")));
    }
    if z.positions().iter().any(|&x| x < 0.0 || x > params.r) {
        return Err(Error::InvalidLoci(format!("loci must lie in [0, {}]", params.r)));
    }
    let space = StateSpace::new(z.n())?;
    let samples = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, rep);
            let mut pop = Population::new(params);
            pop.run_until(t, &mut rng);
            let who = rng.random_range(0..params.n);
            let colors: Vec<u32> = z.positions().iter().map(|&x| pop.individuals[who].color_at(x)).collect();
            space
                .index_of(&SetPartition::from_labels(&colors))
                .expect("every labelling is a partition of the loci")
        })
        .collect::<Vec<usize>>();
    let moran = empirical_law(&samples, space.len());
    let rho = params.limit_rho();
    let arg_time = 2.0 * t / params.n as f64;
    let arg = transient_law(z, rho, &SetPartition::coarsest(z.len()), arg_time)?;
    Ok(DualityReport {
        params,
        loci: z.positions().to_vec(),
        t,
        arg_time,
        rho,
        replicates,
        states: space.states().iter().map(ToString::to_string).collect(),
        tv: tv_distance(&moran, &arg),
        moran,
        arg,
    })
}
