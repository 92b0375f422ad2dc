use crate::error::{Error, Result};
use crate::partitions::IntervalPartition;

fn log_r(r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("log rescaling needs R > 1, got {r}")));
    }
    Ok(r.ln())
}

fn zero_block(p: &IntervalPartition) -> Vec<(f64, f64)> {
    let label = p.labels()[0];
    p.segments()
        .filter(|s| s.2 == label)
        .map(|(a, b, _)| (a, b))
        .collect()
}

pub(crate) fn check_window(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(Error::Domain(format!(
            "window exponents must satisfy 0 <= a <= b <= 1, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// Lebesgue measure of `segments ∩ [lo, hi]`.
pub(crate) fn overlap(segments: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    segments
        .iter()
        .fold(0.0, |acc, &(s, e)| acc + (e.min(hi) - s.max(lo)).max(0.0))
}

/// `(1 / log R) * |{x in [R^a, R^b] : x ~ 0}|` for the given segments of the
/// block of 0.
pub(crate) fn theta_mass(segments: &[(f64, f64)], r: f64, a: f64, b: f64) -> Result<f64> {
    check_window(a, b)?;
    let lr = log_r(r)?;
    if a == b {
        return Ok(0.0);
    }
    Ok(overlap(segments, r.powf(a), r.powf(b)) / lr)
}

/// Total length of the block containing 0, optionally divided by `log R`.
pub fn leftmost_block_length(p: &IntervalPartition, log_rescale: bool) -> Result<f64> {
    let raw: f64 = zero_block(p).iter().map(|(a, b)| b - a).sum();
    if log_rescale {
        Ok(raw / log_r(p.r())?)
    } else {
        Ok(raw)
    }
}

/// Mass of material identical by descent with 0 inside `[R^a, R^b]`, divided
/// by `log R`, for each window `(a, b)`.
pub fn measure_theta_r(p: &IntervalPartition, windows: &[(f64, f64)]) -> Result<Vec<f64>> {
    let segs = zero_block(p);
    windows
        .iter()
        .map(|&(a, b)| theta_mass(&segs, p.r(), a, b))
        .collect()
}

/// Number of segments meeting the window `(a, b)`: one plus the breakpoints
/// strictly inside it.
pub fn segments_in_window(p: &IntervalPartition, a: f64, b: f64) -> usize {
    1 + p.breakpoints()[1..p.num_segments()]
        .iter()
        .filter(|&&x| x > a && x < b)
        .count()
}
