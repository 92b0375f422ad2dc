use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::partitions::IntervalPartition;

/// Segments `[start, end)` of one block: sorted, disjoint and never touching
/// (two touching segments of one block would be a single segment).
type Segments = Vec<(f64, f64)>;

#[derive(Clone, Debug)]
struct Block {
    segs: Segments,
    alive_slot: usize,
}

impl Block {
    #[inline]
    fn min(&self) -> f64 {
        self.segs[0].0
    }

    #[inline]
    fn sup(&self) -> f64 {
        self.segs[self.segs.len() - 1].1
    }

    #[inline]
    fn span(&self) -> f64 {
        self.sup() - self.min()
    }
}

/// Fenwick tree of block spans, for sampling a block proportionally to span.
#[derive(Clone, Debug)]
struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl Fenwick {
    fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        for i in 1..=n {
            tree[i] += values[i - 1];
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Self { tree, values }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn set(&mut self, i: usize, v: f64) {
        let d = v - self.values[i];
        self.values[i] = v;
        let n = self.len();
        let mut j = i + 1;
        while j <= n {
            self.tree[j] += d;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut j = self.len();
        let mut s = 0.0;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    /// Index `i` with `prefix(i) <= u < prefix(i + 1)`, clamped to the range.
    #[inline]
    fn find(&self, mut u: f64) -> usize {
        let n = self.len();
        let mut pos = 0usize;
        let mut step = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= u {
                pos = next;
                u -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n.saturating_sub(1))
    }
}

/// Outcome of one simulated event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    /// Two blocks merged into `survivor`.
    Coalescence { survivor: u32, absorbed: u32 },
    /// `block` was cut at `at`; material at or right of `at` is now `new_block`.
    Fragmentation { block: u32, new_block: u32, at: f64 },
}

/// Simulator view of an interval partition of `[0, R)`.
///
/// Each block owns its sorted segment list; a segment's end only moves in
/// events involving its own block, so no global segment index is needed. A
/// Fenwick tree over block spans gives the cover length `C` and
/// span-proportional block sampling.
#[derive(Clone, Debug)]
pub struct BlockState {
    r: f64,
    blocks: Vec<Option<Block>>,
    free: Vec<u32>,
    alive: Vec<u32>,
    spans: Fenwick,
    zero: u32,
    segments: usize,
    time: f64,
    events: u64,
    scratch: Segments,
    pool: Vec<Segments>,
}

/// Events between full rebuilds of the span tree.
const REFRESH_EVERY: u64 = 100_000;

impl BlockState {
    pub fn single_block(r: f64) -> Self {
        Self::from_partition(&IntervalPartition::single_block(r).expect("R > 0"))
    }

    pub fn from_partition(p: &IntervalPartition) -> Self {
        let nb = p.num_blocks();
        let mut per_block: Vec<Segments> = vec![Vec::new(); nb];
        for (start, end, label) in p.segments() {
            per_block[label as usize].push((start, end));
        }
        let blocks: Vec<Option<Block>> = per_block
            .into_iter()
            .enumerate()
            .map(|(slot, segs)| Some(Block { segs, alive_slot: slot }))
            .collect();
        let mut state = Self {
            r: p.r(),
            blocks,
            free: Vec::new(),
            alive: (0..nb as u32).collect(),
            spans: Fenwick::from_values(Vec::new()),
            zero: p.labels()[0],
            segments: p.num_segments(),
            time: 0.0,
            events: 0,
            scratch: Vec::new(),
            pool: Vec::new(),
        };
        state.rebuild_spans();
        state
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn num_blocks(&self) -> usize {
        self.alive.len()
    }

    pub fn num_segments(&self) -> usize {
        self.segments
    }

    /// Cover length `C`: the sum of block spans `sup - min`.
    pub fn cover_length(&self) -> f64 {
        self.spans.total()
    }

    /// Ids of the live blocks.
    pub fn block_ids(&self) -> &[u32] {
        &self.alive
    }

    /// Id of the block containing 0.
    pub fn zero_block(&self) -> u32 {
        self.zero
    }

    /// `(min, sup)` of a live block.
    pub fn block_extent(&self, id: u32) -> Option<(f64, f64)> {
        self.get(id).map(|b| (b.min(), b.sup()))
    }

    /// `(start, end)` of each segment of block `id`, left to right.
    pub fn block_segments(&self, id: u32) -> &[(f64, f64)] {
        self.get(id).map_or(&[], |b| &b.segs)
    }

    /// Block id of the segment containing `x`.
    pub fn block_at(&self, x: f64) -> Option<u32> {
        if !(0.0..self.r).contains(&x) {
            return None;
        }
        self.alive.iter().copied().find(|&id| {
            let segs = &self.block(id).segs;
            let i = segs.partition_point(|s| s.1 <= x);
            i < segs.len() && segs[i].0 <= x
        })
    }

    /// All segments as `(start, end, block)`, left to right.
    pub fn all_segments(&self) -> Vec<(f64, f64, u32)> {
        let mut out: Vec<(f64, f64, u32)> = Vec::with_capacity(self.segments);
        for &id in &self.alive {
            out.extend(self.block(id).segs.iter().map(|&(s, e)| (s, e, id)));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Segment starts strictly inside `(a, b)`.
    pub fn breakpoints_between(&self, a: f64, b: f64) -> usize {
        self.alive
            .iter()
            .map(|&id| {
                self.block(id)
                    .segs
                    .iter()
                    .filter(|s| s.0 > a && s.0 < b)
                    .count()
            })
            .sum()
    }

    pub fn to_partition(&self) -> IntervalPartition {
        let segs = self.all_segments();
        let mut bps: Vec<f64> = segs.iter().map(|s| s.0).collect();
        bps.push(self.r);
        let labels = segs.iter().map(|s| s.2).collect();
        IntervalPartition::new(bps, labels).expect("simulator state is a valid partition")
    }

    #[inline]
    fn get(&self, id: u32) -> Option<&Block> {
        self.blocks.get(id as usize).and_then(Option::as_ref)
    }

    #[inline]
    fn block(&self, id: u32) -> &Block {
        self.blocks[id as usize].as_ref().expect("live block")
    }

    #[inline]
    fn block_mut(&mut self, id: u32) -> &mut Block {
        self.blocks[id as usize].as_mut().expect("live block")
    }

    fn rebuild_spans(&mut self) {
        let cap = self.spans.len().max(self.blocks.len());
        let mut values: Vec<f64> = self
            .blocks
            .iter()
            .map(|b| b.as_ref().map_or(0.0, Block::span))
            .collect();
        values.resize(cap, 0.0);
        self.spans = Fenwick::from_values(values);
    }

    #[inline]
    fn set_span(&mut self, id: u32) {
        let span = self.block(id).span();
        self.spans.set(id as usize, span);
    }

    fn allocate(&mut self, segs: Segments) -> u32 {
        let block = Block {
            segs,
            alive_slot: self.alive.len(),
        };
        let id = if let Some(id) = self.free.pop() {
            self.blocks[id as usize] = Some(block);
            id
        } else {
            self.blocks.push(Some(block));
            if self.blocks.len() > self.spans.len() {
                let cap = (self.blocks.len() * 2).max(16);
                let mut values = self.spans.values.clone();
                values.resize(cap, 0.0);
                self.spans = Fenwick::from_values(values);
            }
            (self.blocks.len() - 1) as u32
        };
        self.alive.push(id);
        id
    }

    fn release(&mut self, id: u32) -> Segments {
        let block = self.blocks[id as usize].take().expect("live block");
        let slot = block.alive_slot;
        self.alive.swap_remove(slot);
        if let Some(&moved) = self.alive.get(slot) {
            self.block_mut(moved).alive_slot = slot;
        }
        self.spans.set(id as usize, 0.0);
        self.free.push(id);
        block.segs
    }

    /// Merges block `b` into block `a`, fusing segments that touch.
    pub fn coalesce(&mut self, a: u32, b: u32) -> Event {
        assert_ne!(a, b, "cannot merge a block with itself");
        let mut other = self.release(b);
        let mut merged = std::mem::take(&mut self.scratch);
        merged.clear();
        let mut fused = 0usize;
        {
            let own = &self.blocks[a as usize].as_ref().expect("live block").segs;
            merged.reserve(own.len() + other.len());
            let (mut i, mut j) = (0usize, 0usize);
            while i < own.len() || j < other.len() {
                let next = if j == other.len() || (i < own.len() && own[i].0 < other[j].0) {
                    i += 1;
                    own[i - 1]
                } else {
                    j += 1;
                    other[j - 1]
                };
                match merged.last_mut() {
                    Some(last) if last.1 == next.0 => {
                        last.1 = next.1;
                        fused += 1;
                    }
                    _ => merged.push(next),
                }
            }
        }
        let blk = self.block_mut(a);
        std::mem::swap(&mut blk.segs, &mut merged);
        self.scratch = merged;
        other.clear();
        self.pool.push(other);
        self.segments -= fused;
        if self.zero == b {
            self.zero = a;
        }
        self.set_span(a);
        Event::Coalescence {
            survivor: a,
            absorbed: b,
        }
    }

    /// Cuts block `id` at `x`: material left of `x` stays in `id`, material at
    /// or right of `x` moves to a new block. Returns `None` unless
    /// `min < x < sup` and `x` differs from every endpoint of the block.
    pub fn fragment(&mut self, id: u32, x: f64) -> Option<Event> {
        let blk = self.get(id)?;
        if !(x > blk.min() && x < blk.sup()) {
            return None;
        }
        let segs = &blk.segs;
        // first segment ending after x
        let i = segs.partition_point(|s| s.1 <= x);
        if segs[i].0 == x || (i > 0 && segs[i - 1].1 == x) {
            return None;
        }
        let mut right = self.pool.pop().unwrap_or_default();
        let blk = self.block_mut(id);
        let inside = blk.segs[i].0 < x;
        if inside {
            right.push((x, blk.segs[i].1));
            right.extend_from_slice(&blk.segs[i + 1..]);
            blk.segs[i].1 = x;
            blk.segs.truncate(i + 1);
        } else {
            right.extend_from_slice(&blk.segs[i..]);
            blk.segs.truncate(i);
        }
        if inside {
            self.segments += 1;
        }
        let new_id = self.allocate(right);
        self.set_span(id);
        self.set_span(new_id);
        Some(Event::Fragmentation {
            block: id,
            new_block: new_id,
            at: x,
        })
    }

    /// Total event rate `k(k-1)/2 + rho C`.
    pub fn total_rate(&self, rho: f64) -> f64 {
        let k = self.alive.len() as f64;
        k * (k - 1.0) / 2.0 + rho * self.cover_length()
    }

    /// Draws and applies the next event; returns the holding time and event.
    pub fn step<R: Rng + ?Sized>(&mut self, rho: f64, rng: &mut R) -> (f64, Event) {
        let k = self.alive.len();
        let coal = (k * k.saturating_sub(1)) as f64 / 2.0;
        let total = coal + rho * self.cover_length();
        let e: f64 = Exp1.sample(rng);
        let dt = e / total;
        self.time += dt;
        let event = self.apply_random_event(coal, total, rng);
        (dt, event)
    }

    fn apply_random_event<R: Rng + ?Sized>(&mut self, coal: f64, total: f64, rng: &mut R) -> Event {
        let k = self.alive.len();
        self.events += 1;
        if self.events.is_multiple_of(REFRESH_EVERY) {
            self.rebuild_spans();
        }
        if rng.random::<f64>() * total < coal {
            let i = rng.random_range(0..k);
            let mut j = rng.random_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            let (a, b) = (self.alive[i], self.alive[j]);
            self.coalesce(a, b)
        } else {
            loop {
                let c = self.spans.total();
                let id = self.spans.find(rng.random::<f64>() * c) as u32;
                let Some((min, sup)) = self.block_extent(id) else {
                    continue;
                };
                let x = min + rng.random::<f64>() * (sup - min);
                if let Some(ev) = self.fragment(id, x) {
                    return ev;
                }
            }
        }
    }

    /// Advances the process to absolute time `t_end`.
    pub fn run_until<R: Rng + ?Sized>(&mut self, rho: f64, t_end: f64, rng: &mut R) {
        loop {
            let k = self.alive.len();
            let coal = (k * k.saturating_sub(1)) as f64 / 2.0;
            let total = coal + rho * self.spans.total();
            if !(total > 0.0) {
                self.time = t_end.max(self.time);
                return;
            }
            let e: f64 = Exp1.sample(rng);
            let dt = e / total;
            if self.time + dt > t_end {
                self.time = t_end;
                return;
            }
            self.time += dt;
            self.apply_random_event(coal, total, rng);
        }
    }

    /// Recomputes every cached quantity from the segment lists. Returns the
    /// relative drift of the cached cover length, or a description of the
    /// first structural inconsistency found.
    pub fn verify(&self) -> Result<f64, String> {
        let segs = self.all_segments();
        if segs.len() != self.segments {
            return Err(format!("{} segments cached, {} found", self.segments, segs.len()));
        }
        let mut cursor = 0.0;
        let mut prev: Option<u32> = None;
        for &(s, e, id) in &segs {
            if s != cursor || !(e > s) {
                return Err(format!("segment [{s}, {e}) does not continue at {cursor}"));
            }
            if prev == Some(id) {
                return Err(format!("adjacent segments share block {id} at {s}"));
            }
            prev = Some(id);
            cursor = e;
        }
        if cursor != self.r {
            return Err(format!("segments end at {cursor}, not {}", self.r));
        }
        if segs[0].2 != self.zero {
            return Err("stale id for the block of 0".into());
        }
        let mut c = 0.0;
        for (slot, &id) in self.alive.iter().enumerate() {
            let b = self.block(id);
            if b.alive_slot != slot {
                return Err(format!("block {id} has stale slot"));
            }
            c += b.span();
            if self.spans.values[id as usize] != b.span() {
                return Err(format!("block {id} has stale span"));
            }
        }
        let cached = self.cover_length();
        Ok((cached - c).abs() / c.max(f64::MIN_POSITIVE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ip(bps: &[f64], labels: &[u32]) -> IntervalPartition {
        IntervalPartition::new(bps.to_vec(), labels.to_vec()).unwrap()
    }

    #[test]
    fn fenwick_sampling() {
        let f = Fenwick::from_values(vec![1.0, 0.0, 2.0, 3.0, 0.0]);
        assert_eq!(f.total(), 6.0);
        assert_eq!(f.find(0.5), 0);
        assert_eq!(f.find(1.0), 2);
        assert_eq!(f.find(2.999), 2);
        assert_eq!(f.find(3.0), 3);
        assert_eq!(f.find(5.999), 3);
        let mut f = f;
        f.set(1, 4.0);
        assert_eq!(f.total(), 10.0);
        assert_eq!(f.find(1.5), 1);
    }

    #[test]
    fn roundtrip_partition() {
        let p = ip(&[0.0, 1.0, 2.5, 4.0, 6.0], &[0, 1, 0, 2]);
        let s = BlockState::from_partition(&p);
        assert_eq!(s.to_partition(), p);
        assert_eq!(s.num_blocks(), 3);
        assert_eq!(s.cover_length(), 4.0 + 1.5 + 2.0);
        assert_eq!(s.verify().unwrap(), 0.0);
        assert_eq!(s.block_at(2.5), s.block_at(0.0));
        assert_eq!(s.block_at(6.0), None);
    }

    #[test]
    fn merge_fuses_adjacent_segments() {
        let p = ip(&[0.0, 1.0, 2.0, 3.0, 5.0], &[0, 1, 0, 2]);
        let mut s = BlockState::from_partition(&p);
        let a = s.block_at(1.5).unwrap();
        let b = s.block_at(0.0).unwrap();
        s.coalesce(a, b);
        s.verify().unwrap();
        assert_eq!(s.zero_block(), a);
        assert_eq!(s.to_partition(), ip(&[0.0, 3.0, 5.0], &[0, 1]));
        assert_eq!(s.cover_length(), 3.0 + 2.0);
        assert_eq!(s.num_segments(), 2);
    }

    #[test]
    fn merge_then_split_at_boundary_is_identity() {
        let p = ip(&[0.0, 2.0, 7.0], &[0, 1]);
        let mut s = BlockState::from_partition(&p);
        let (a, b) = (s.block_at(0.0).unwrap(), s.block_at(3.0).unwrap());
        let Event::Coalescence { survivor, .. } = s.coalesce(a, b) else {
            unreachable!()
        };
        assert_eq!(s.num_segments(), 1);
        s.fragment(survivor, 2.0).unwrap();
        s.verify().unwrap();
        assert_eq!(s.to_partition(), p);
    }

    #[test]
    fn cut_inside_gap_keeps_segments() {
        // block 0 = [0,1) u [2,3); cutting at 1.5 splits it without a new breakpoint
        let p = ip(&[0.0, 1.0, 2.0, 3.0], &[0, 1, 0]);
        let mut s = BlockState::from_partition(&p);
        let id = s.block_at(0.0).unwrap();
        s.fragment(id, 1.5).unwrap();
        s.verify().unwrap();
        assert_eq!(s.num_segments(), 3);
        assert_eq!(s.num_blocks(), 3);
        assert_eq!(s.cover_length(), 1.0 + 1.0 + 1.0);
        // cuts on the block's own endpoints are rejected
        let p = ip(&[0.0, 1.0, 2.0, 3.0], &[0, 1, 0]);
        let mut s = BlockState::from_partition(&p);
        let id = s.block_at(0.0).unwrap();
        assert!(s.fragment(id, 1.0).is_none());
        assert!(s.fragment(id, 2.0).is_none());
    }

    #[test]
    fn cut_inside_segment_adds_breakpoint() {
        let mut s = BlockState::single_block(4.0);
        let id = s.block_at(0.0).unwrap();
        assert!(s.fragment(id, 0.0).is_none());
        assert!(s.fragment(id, 4.0).is_none());
        s.fragment(id, 1.25).unwrap();
        assert_eq!(s.to_partition(), ip(&[0.0, 1.25, 4.0], &[0, 1]));
        let left = s.block_at(0.0).unwrap();
        assert!(s.fragment(left, 1.25).is_none());
        s.verify().unwrap();
    }

    #[test]
    fn random_evolution_keeps_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = BlockState::single_block(30.0);
        for i in 0..300_000 {
            s.step(1.0, &mut rng);
            if i % 997 == 0 {
                let drift = s.verify().unwrap();
                assert!(drift < 1e-9, "{drift}");
            }
        }
        s.verify().unwrap();
        assert!(s.num_blocks() > 1);
    }

    #[test]
    fn invariants_survive_tree_growth() {
        // hundreds of blocks: the span tree is regrown several times
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut s = BlockState::single_block(400.0);
        for i in 0..400_000 {
            s.step(1.0, &mut rng);
            if i % 9_973 == 0 {
                assert!(s.verify().unwrap() < 1e-9);
            }
        }
        assert!(s.num_blocks() > 50);
        s.verify().unwrap();
    }

    #[test]
    fn single_block_first_event_is_fragmentation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = BlockState::single_block(10.0);
        let (_, ev) = s.step(1.0, &mut rng);
        assert!(matches!(ev, Event::Fragmentation { .. }));
    }
}
