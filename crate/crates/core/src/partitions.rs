//! Set partitions of a finite loci set, their combinatorics, and interval
//! partitions of `[0, R)` with the `phi`-metric.
//!
//! A [`SetPartition`] is stored as a restricted-growth string (RGS): element
//! `i` carries the index of its block, blocks being numbered in order of their
//! smallest element. The RGS is the canonical key for every table in the crate.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest `n` (loci indexed `0..=n`) accepted by [`enumerate_partitions`].
pub const MAX_ENUMERATION_N: usize = 9;

/// Sorted, pairwise distinct loci positions `z_0 < z_1 < ... < z_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LociSet {
    positions: Vec<f64>,
}

impl LociSet {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidLoci("no positions given".into()));
        }
        if let Some(bad) = positions.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidLoci(format!("non-finite position {bad}")));
        }
        for w in positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidLoci(format!(
                    "positions must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Number of loci, `n + 1`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest locus index `n`.
    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }

    /// Minimum pairwise gap. Infinite for a single locus.
    pub fn alpha(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Positions multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {factor}")));
        }
        Self::new(self.positions.iter().map(|p| p * factor).collect())
    }

    /// The loci at the given (strictly increasing) indices.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        check_keep(keep, self.len())?;
        Self::new(keep.iter().map(|&i| self.positions[i]).collect())
    }
}

impl FromStr for LociSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let positions = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("locus {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(positions)
    }
}

fn check_keep(keep: &[usize], len: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::Precondition("index subset must be nonempty".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "index subset must be strictly increasing".into(),
        ));
    }
    if keep[keep.len() - 1] >= len {
        return Err(Error::Precondition(format!(
            "index {} out of range for {} elements",
            keep[keep.len() - 1],
            len
        )));
    }
    Ok(())
}

/// A partition of `{0, ..., n}` in canonical restricted-growth form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    rgs: Vec<u32>,
}

impl SetPartition {
    /// Validates that `rgs` is a restricted-growth string.
    pub fn from_rgs(rgs: Vec<u32>) -> Result<Self> {
        if rgs.is_empty() {
            return Err(Error::InvalidPartition("empty ground set".into()));
        }
        let mut next = 0u32;
        for &label in &rgs {
            if label > next {
                return Err(Error::InvalidPartition(format!(
                    "{rgs:?} is not a restricted-growth string"
                )));
            }
            if label == next {
                next += 1;
            }
        }
        Ok(Self { rgs })
    }

    /// Canonicalizes arbitrary block labels (equal labels = same block).
    pub fn from_labels<T: Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut seen: HashMap<&T, u32> = HashMap::with_capacity(labels.len());
        let rgs = labels
            .iter()
            .map(|l| {
                let next = seen.len() as u32;
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Self { rgs }
    }

    /// Builds a partition from explicit blocks covering `{0, ..., n}`.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        let len: usize = blocks.iter().map(Vec::len).sum();
        if len == 0 {
            return Err(Error::InvalidPartition("empty ground set".into()));
        }
        let mut labels = vec![usize::MAX; len];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= len {
                    return Err(Error::InvalidPartition(format!(
                        "element {i} outside 0..{len}"
                    )));
                }
                if labels[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("element {i} repeated")));
                }
                labels[i] = b;
            }
        }
        Ok(Self::from_labels(&labels))
    }

    /// `pi_0`: every element in its own block.
    pub fn singletons(len: usize) -> Self {
        Self {
            rgs: (0..len as u32).collect(),
        }
    }

    /// The coarsest partition: a single block.
    pub fn coarsest(len: usize) -> Self {
        Self { rgs: vec![0; len] }
    }

    pub fn rgs(&self) -> &[u32] {
        &self.rgs
    }

    /// Size of the ground set, `n + 1`.
    pub fn len(&self) -> usize {
        self.rgs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rgs.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.rgs.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// `(n + 1) - #blocks`: the number of merges separating it from `pi_0`.
    pub fn order(&self) -> usize {
        self.len() - self.num_blocks()
    }

    pub fn is_singletons(&self) -> bool {
        self.order() == 0
    }

    /// Blocks ordered by minimum element, elements ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b as usize].push(i);
        }
        blocks
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.rgs[i] == self.rgs[j]
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &SetPartition) -> bool {
        let mut image: HashMap<u32, u32> = HashMap::new();
        self.len() == coarser.len()
            && self
                .rgs
                .iter()
                .zip(&coarser.rgs)
                .all(|(&f, &c)| *image.entry(f).or_insert(c) == c)
    }
}

impl fmt::Display for SetPartition {
    /// Slash-separated blocks of comma-joined indices, e.g. `0,2/1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, block) in self.blocks().iter().enumerate() {
            if b > 0 {
                f.write_str("/")?;
            }
            for (k, i) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{i}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split('/')
            .map(|block| {
                block
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("partition {s:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(&blocks)
    }
}

/// All partitions of `{0, ..., n}` in lexicographic RGS order.
///
/// The first entry is the coarsest partition and the last is `pi_0`; use
/// [`StateSpace::index_of`] to locate a given partition.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::SizeLimit {
            what: "n",
            value: n,
            max: MAX_ENUMERATION_N,
        });
    }
    let len = n + 1;
    let mut out = Vec::new();
    let mut rgs = vec![0u32; len];
    fn rec(pos: usize, max_so_far: u32, rgs: &mut Vec<u32>, out: &mut Vec<SetPartition>) {
        if pos == rgs.len() {
            out.push(SetPartition { rgs: rgs.clone() });
            return;
        }
        for label in 0..=max_so_far + 1 {
            rgs[pos] = label;
            rec(pos + 1, max_so_far.max(label), rgs, out);
        }
    }
    if len == 1 {
        out.push(SetPartition { rgs });
    } else {
        rec(1, 0, &mut rgs, &mut out);
    }
    Ok(out)
}

/// Enumerated partitions together with a reverse lookup.
#[derive(Clone, Debug)]
pub struct StateSpace {
    states: Vec<SetPartition>,
    index: HashMap<SetPartition, usize>,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        let states = enumerate_partitions(n)?;
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self { states, index })
    }

    pub fn states(&self) -> &[SetPartition] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, pi: &SetPartition) -> Option<usize> {
        self.index.get(pi).copied()
    }

    pub fn singletons_index(&self) -> usize {
        self.states.len() - 1
    }
}

pub fn order_of(pi: &SetPartition) -> usize {
    pi.order()
}

fn check_loci(pi: &SetPartition, z: &LociSet) -> Result<()> {
    if pi.len() != z.len() {
        return Err(Error::Precondition(format!(
            "partition has {} elements but there are {} loci",
            pi.len(),
            z.len()
        )));
    }
    Ok(())
}

/// `C(pi)`: sum over blocks of the distance between the extreme loci.
pub fn cover_length(pi: &SetPartition, z: &LociSet) -> Result<f64> {
    check_loci(pi, z)?;
    Ok(cover_length_unchecked(pi, z.positions()))
}

pub(crate) fn cover_length_unchecked(pi: &SetPartition, z: &[f64]) -> f64 {
    let k = pi.num_blocks();
    let mut lo = vec![usize::MAX; k];
    let mut hi = vec![0usize; k];
    for (i, &b) in pi.rgs.iter().enumerate() {
        let b = b as usize;
        lo[b] = lo[b].min(i);
        hi[b] = i;
    }
    lo.iter().zip(&hi).map(|(&l, &h)| z[h] - z[l]).sum()
}

/// Every partition reachable by merging one unordered pair of blocks.
pub fn merge_pairs(pi: &SetPartition) -> Vec<SetPartition> {
    let k = pi.num_blocks() as u32;
    let mut out = Vec::with_capacity((k as usize * k.saturating_sub(1) as usize) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let labels: Vec<u32> = pi.rgs.iter().map(|&l| if l == b { a } else { l }).collect();
            out.push(SetPartition::from_labels(&labels));
        }
    }
    out
}

/// Prefix/suffix fragmentations of each block with their rates at `rho = 1`.
pub fn split_moves(pi: &SetPartition, z: &LociSet) -> Result<Vec<(SetPartition, f64)>> {
    check_loci(pi, z)?;
    let zs = z.positions();
    let fresh = pi.num_blocks() as u32;
    let mut out = Vec::new();
    for block in pi.blocks() {
        for cut in 1..block.len() {
            let mut labels = pi.rgs.clone();
            for &i in &block[cut..] {
                labels[i] = fresh;
            }
            let rate = zs[block[cut]] - zs[block[cut - 1]];
            out.push((SetPartition::from_labels(&labels), rate));
        }
    }
    Ok(out)
}

/// Partition induced on the elements `keep`, re-indexed to `0..keep.len()`.
pub fn restrict(pi: &SetPartition, keep: &[usize]) -> Result<SetPartition> {
    check_keep(keep, pi.len())?;
    let labels: Vec<u32> = keep.iter().map(|&i| pi.rgs[i]).collect();
    Ok(SetPartition::from_labels(&labels))
}

/// A right-continuous finite partition of `[0, R)` into labelled segments.
///
/// Labels are canonical (numbered by first appearance, which is the order of
/// block minima) and adjacent segments always carry distinct labels.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPartition {
    breakpoints: Vec<f64>,
    labels: Vec<u32>,
}

impl IntervalPartition {
    /// `breakpoints = [0, x_1, ..., R]`, one label per segment. Adjacent
    /// segments with equal labels are fused.
    pub fn new(breakpoints: Vec<f64>, labels: Vec<u32>) -> Result<Self> {
        if breakpoints.len() < 2 || labels.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidPartition(format!(
                "{} breakpoints for {} segments",
                breakpoints.len(),
                labels.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidPartition("first breakpoint must be 0".into()));
        }
        if breakpoints.iter().any(|x| !x.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidPartition(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        let mut bps = vec![0.0];
        let mut labs: Vec<u32> = Vec::with_capacity(labels.len());
        for (i, &l) in labels.iter().enumerate() {
            if labs.last() == Some(&l) {
                *bps.last_mut().unwrap() = breakpoints[i + 1];
            } else {
                labs.push(l);
                bps.push(breakpoints[i + 1]);
            }
        }
        let canon = SetPartition::from_labels(&labs);
        Ok(Self {
            breakpoints: bps,
            labels: canon.rgs,
        })
    }

    /// The single-block partition of `[0, r)`.
    pub fn single_block(r: f64) -> Result<Self> {
        Self::new(vec![0.0, r], vec![0])
    }

    pub fn r(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_segments(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// `(start, end, label)` for each segment, left to right.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, u32)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (self.breakpoints[i], self.breakpoints[i + 1], l))
    }

    /// Label of the segment containing `x`, for `0 <= x < R`.
    pub fn label_at(&self, x: f64) -> Option<u32> {
        if !(0.0..self.r()).contains(&x) {
            return None;
        }
        let seg = self.breakpoints.partition_point(|&b| b <= x) - 1;
        Some(self.labels[seg])
    }

    /// Minimum of each block, indexed by label.
    pub fn block_minima(&self) -> Vec<f64> {
        let mut mins = vec![f64::NAN; self.num_blocks()];
        for (start, _, l) in self.segments() {
            if mins[l as usize].is_nan() {
                mins[l as usize] = start;
            }
        }
        mins
    }

    /// Partition of the loci `z` induced by this interval partition.
    pub fn restrict_to_loci(&self, z: &LociSet) -> Result<SetPartition> {
        let labels = z
            .positions()
            .iter()
            .map(|&x| {
                self.label_at(x).ok_or_else(|| {
                    Error::Precondition(format!("locus {x} outside [0, {})", self.r()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SetPartition::from_labels(&labels))
    }
}

/// `d(p1, p2) = ∫_0^R |phi(p1)(x) - phi(p2)(x)| e^{-x} dx` where `phi` maps a
/// point to the minimum of its block. Evaluated exactly on the merged grid.
pub fn metric_d(p1: &IntervalPartition, p2: &IntervalPartition) -> Result<f64> {
    if p1.r() != p2.r() {
        return Err(Error::Precondition(format!(
            "partitions live on [0, {}) and [0, {})",
            p1.r(),
            p2.r()
        )));
    }
    let (m1, m2) = (p1.block_minima(), p2.block_minima());
    let (b1, b2) = (p1.breakpoints(), p2.breakpoints());
    let (mut i, mut j) = (0usize, 0usize);
    let mut lo = 0.0f64;
    let mut total = 0.0;
    while i < p1.num_segments() && j < p2.num_segments() {
        let hi = b1[i + 1].min(b2[j + 1]);
        let diff = (m1[p1.labels[i] as usize] - m2[p2.labels[j] as usize]).abs();
        if diff > 0.0 {
            total += diff * ((-lo).exp() - (-hi).exp());
        }
        lo = hi;
        if b1[i + 1] == hi {
            i += 1;
        }
        if b2[j + 1] == hi {
            j += 1;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_triangle(m: usize) -> u64 {
        // Bell(m) via the Bell triangle
        let mut row = vec![1u64];
        for _ in 1..m {
            let mut next = vec![*row.last().unwrap()];
            for &v in &row {
                let last = *next.last().unwrap();
                next.push(last + v);
            }
            row = next;
        }
        row[row.len() - 1]
    }

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    #[test]
    fn enumeration_counts_match_bell_numbers() {
        assert_eq!(enumerate_partitions(1).unwrap().len(), 2);
        assert_eq!(enumerate_partitions(2).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(3).unwrap().len(), 15);
        for n in 0..=9 {
            let all = enumerate_partitions(n).unwrap();
            assert_eq!(all.len() as u64, bell_triangle(n + 1), "n = {n}");
        }
    }

    #[test]
    fn enumeration_is_distinct_and_sorted() {
        let all = enumerate_partitions(5).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let space = StateSpace::new(5).unwrap();
        assert_eq!(space.states()[space.singletons_index()], SetPartition::singletons(6));
        assert_eq!(space.states()[0], SetPartition::coarsest(6));
    }

    #[test]
    fn enumeration_guards_size() {
        assert!(matches!(
            enumerate_partitions(10),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn two_loci_enumeration() {
        let all = enumerate_partitions(1).unwrap();
        let names: Vec<String> = all.iter().map(ToString::to_string).collect();
        assert!(names.contains(&"0/1".to_string()));
        assert!(names.contains(&"0,1".to_string()));
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_of(&SetPartition::singletons(3)), 0);
        assert_eq!(order_of(&p("0,1,2")), 2);
        assert_eq!(order_of(&p("0,2/1")), 1);
    }

    #[test]
    fn cover_length_examples() {
        let z = LociSet::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(cover_length(&SetPartition::singletons(3), &z).unwrap(), 0.0);
        assert_eq!(cover_length(&p("0,2/1"), &z).unwrap(), 3.0);
        let z4 = LociSet::new(vec![0.0, 1.0, 3.0, 7.0]).unwrap();
        assert_eq!(cover_length(&p("0,1/2,3"), &z4).unwrap(), 5.0);
        assert!(cover_length(&p("0,1"), &z).is_err());
    }

    #[test]
    fn merge_pair_counts() {
        let pi0 = SetPartition::singletons(4);
        assert_eq!(merge_pairs(&pi0).len(), 6);
        assert_eq!(merge_pairs(&p("0,1/2/3")).len(), 3);
        assert!(merge_pairs(&p("0,1,2,3")).is_empty());
    }

    #[test]
    fn merge_count_is_gamma_of_order() {
        for n in 0..=7 {
            for pi in enumerate_partitions(n).unwrap() {
                let r = pi.order();
                assert_eq!(merge_pairs(&pi).len(), (n - r) * (n - r + 1) / 2);
            }
        }
    }

    #[test]
    fn split_move_examples() {
        let z = LociSet::new(vec![0.0, 2.5]).unwrap();
        let moves = split_moves(&p("0,1"), &z).unwrap();
        assert_eq!(moves, vec![(SetPartition::singletons(2), 2.5)]);
        assert!(split_moves(&SetPartition::singletons(3), &LociSet::new(vec![0.0, 1.0, 3.0]).unwrap())
            .unwrap()
            .is_empty());

        let z = LociSet::new(vec![0.0, 1.0, 3.0]).unwrap();
        let moves = split_moves(&p("0,1,2"), &z).unwrap();
        assert_eq!(moves.len(), 2);
        assert_eq!(moves[0], (p("0/1,2"), 1.0));
        assert_eq!(moves[1], (p("0,1/2"), 2.0));
    }

    #[test]
    fn split_rates_sum_to_cover_length() {
        let z = LociSet::new(vec![0.0, 0.3, 1.7, 2.0, 5.5, 9.25]).unwrap();
        for pi in enumerate_partitions(5).unwrap() {
            let total: f64 = split_moves(&pi, &z).unwrap().iter().map(|m| m.1).sum();
            let c = cover_length(&pi, &z).unwrap();
            assert!((total - c).abs() <= 1e-12 * c.max(1.0), "{pi}");
        }
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(restrict(&p("0,1/2"), &[0, 2]).unwrap(), p("0/1"));
        assert_eq!(
            restrict(&SetPartition::singletons(4), &[1, 3]).unwrap(),
            SetPartition::singletons(2)
        );
        assert_eq!(restrict(&p("0,2/1"), &[0, 1, 2]).unwrap(), p("0,2/1"));
        assert!(restrict(&p("0,2/1"), &[]).is_err());
        assert!(restrict(&p("0,2/1"), &[2, 0]).is_err());
    }

    #[test]
    fn text_encoding() {
        let pi = SetPartition::from_rgs(vec![0, 1, 0]).unwrap();
        assert_eq!(pi.to_string(), "0,2/1");
        assert_eq!(p("1/0,2"), pi);
        assert!("0,0/1".parse::<SetPartition>().is_err());
        assert!(SetPartition::from_rgs(vec![0, 2, 1]).is_err());
    }

    #[test]
    fn refinement() {
        assert!(SetPartition::singletons(3).refines(&p("0,1,2")));
        assert!(p("0,1/2").refines(&p("0,1,2")));
        assert!(!p("0,1/2").refines(&p("0,2/1")));
    }

    #[test]
    fn loci_validation() {
        assert!(LociSet::new(vec![1.0, 0.0]).is_err());
        assert!(LociSet::new(vec![0.0, 0.0]).is_err());
        assert!("1,0".parse::<LociSet>().is_err());
        assert!("0,x".parse::<LociSet>().is_err());
        let z: LociSet = "0, 1, 3".parse().unwrap();
        assert_eq!(z.alpha(), 1.0);
        assert_eq!(z.scaled(2.0).unwrap().positions(), &[0.0, 2.0, 6.0]);
    }

    #[test]
    fn interval_partition_normalizes() {
        let ip = IntervalPartition::new(vec![0.0, 1.0, 2.0, 4.0], vec![7, 7, 3]).unwrap();
        assert_eq!(ip.breakpoints(), &[0.0, 2.0, 4.0]);
        assert_eq!(ip.labels(), &[0, 1]);
        assert!(IntervalPartition::new(vec![0.0, 2.0, 1.0], vec![0, 1]).is_err());
        assert!(IntervalPartition::new(vec![0.5, 2.0], vec![0]).is_err());
        assert_eq!(ip.label_at(1.999), Some(0));
        assert_eq!(ip.label_at(2.0), Some(1));
        assert_eq!(ip.label_at(4.0), None);
    }

    #[test]
    fn metric_examples() {
        let r = 10.0;
        let c = 2.5;
        let one = IntervalPartition::single_block(r).unwrap();
        let two = IntervalPartition::new(vec![0.0, c, r], vec![0, 1]).unwrap();
        assert_eq!(metric_d(&one, &one).unwrap(), 0.0);
        let expected = c * ((-c).exp() - (-r).exp());
        assert!((metric_d(&one, &two).unwrap() - expected).abs() < 1e-15);
        let other = IntervalPartition::single_block(5.0).unwrap();
        assert!(metric_d(&one, &other).is_err());
    }
}
