//! Validation statistics: one-sample Kolmogorov–Smirnov, moments with
//! standard errors, occupancy fractions and batch means.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub sample_size: usize,
}

impl KsResult {
    pub fn rejected_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`, with the
/// asymptotic Kolmogorov p-value `Q(sqrt(n) D)`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(n.sqrt() * d),
        sample_size: sorted.len(),
    })
}

/// Survival function of the Kolmogorov distribution,
/// `Q(l) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 l^2)`.
///
/// Below `l = 1` the alternating series converges slowly, so the equivalent
/// Jacobi theta form `1 - sqrt(2 pi)/l sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 l^2))`
/// is used instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.0 {
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=100 {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * c).exp();
            sum += term;
            if term < 1e-16 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-12 {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

/// `(mean of x^power, standard error of that mean)`.
pub fn empirical_moment(samples: &[f64], power: u32) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if power == 0 {
        return Err(Error::Precondition("power must be at least 1".into()));
    }
    let transformed: Vec<f64> = samples.iter().map(|x| x.powi(power as i32)).collect();
    Ok(mean_and_se(&transformed))
}

/// Sample mean and plain standard error (zero for a single sample).
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample covariance and its standard error, from paired observations.
pub fn covariance_and_se(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::EmptySample);
    }
    let (mx, _) = mean_and_se(xs);
    let (my, _) = mean_and_se(ys);
    let products: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    Ok(mean_and_se(&products))
}

/// Piecewise-constant trajectory: jump times with the state entered, plus the
/// observation end time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub jumps: Vec<(f64, usize)>,
    pub t_end: f64,
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.jumps.first().map_or(self.t_end, |j| j.0)
    }

    /// State occupied at time `t`.
    pub fn state_at(&self, t: f64) -> Option<usize> {
        let i = self.jumps.partition_point(|j| j.0 <= t);
        (i > 0).then(|| self.jumps[i - 1].1)
    }
}

/// Fraction of `[start, t_end)` spent in each of `num_states` states.
pub fn occupancy_histogram(trajectory: &Trajectory, num_states: usize) -> Result<Vec<f64>> {
    occupancy_between(trajectory, num_states, trajectory.start_time(), trajectory.t_end)
}

fn occupancy_between(trajectory: &Trajectory, num_states: usize, from: f64, to: f64) -> Result<Vec<f64>> {
    let span = to - from;
    if !(span > 0.0) {
        return Err(Error::Precondition("trajectory must span positive time".into()));
    }
    let mut occ = vec![0.0; num_states];
    let jumps = &trajectory.jumps;
    for (k, &(t, s)) in jumps.iter().enumerate() {
        let next = jumps.get(k + 1).map_or(trajectory.t_end, |j| j.0);
        let lo = t.max(from);
        let hi = next.min(to);
        if hi > lo {
            occ[s] += hi - lo;
        }
    }
    let total: f64 = occ.iter().sum();
    Ok(occ.iter().map(|x| x / total).collect())
}

/// Per-state occupancy split into `batches` equal time windows: returns the
/// overall fractions and the batch-means standard error of each.
pub fn batch_means(
    trajectory: &Trajectory,
    num_states: usize,
    batches: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if batches < 2 {
        return Err(Error::Precondition("need at least two batches".into()));
    }
    let t0 = trajectory.start_time();
    let width = (trajectory.t_end - t0) / batches as f64;
    let per_batch = (0..batches)
        .map(|b| {
            let lo = t0 + b as f64 * width;
            occupancy_between(trajectory, num_states, lo, lo + width)
        })
        .collect::<Result<Vec<_>>>()?;
    let overall = occupancy_histogram(trajectory, num_states)?;
    let se = (0..num_states)
        .map(|s| {
            let col: Vec<f64> = per_batch.iter().map(|b| b[s]).collect();
            mean_and_se(&col).1
        })
        .collect();
    Ok((overall, se))
}

/// Total-variation distance between two probability vectors.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Normalized histogram of state indices.
pub fn empirical_law(samples: &[usize], num_states: usize) -> Vec<f64> {
    let mut counts = vec![0.0; num_states];
    for &s in samples {
        counts[s] += 1.0;
    }
    let n = samples.len().max(1) as f64;
    counts.iter().map(|c| c / n).collect()
}

/// Exponential CDF with the given rate.
pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    fn exp_samples(rate: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Exp::new(rate).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn single_sample_at_median() {
        let r = ks_test(&[0.5], |x| x.clamp(0.0, 1.0)).unwrap();
        assert_eq!(r.statistic, 0.5);
        assert_eq!(r.sample_size, 1);
        assert!(ks_test(&[], |x| x).is_err());
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both series are valid around l = 1; compare them directly
        for &l in &[0.8, 0.9, 1.0, 1.1] {
            let c = std::f64::consts::PI.powi(2) / (8.0 * l * l);
            let theta: f64 = 1.0
                - (2.0 * std::f64::consts::PI).sqrt() / l
                    * (1..50).map(|k| (-(((2 * k - 1) as f64).powi(2)) * c).exp()).sum::<f64>();
            let alt: f64 = 2.0
                * (1..200)
                    .map(|k| {
                        let t = (-2.0 * (k as f64).powi(2) * l * l).exp();
                        if k % 2 == 1 { t } else { -t }
                    })
                    .sum::<f64>();
            assert!((theta - alt).abs() < 1e-12, "{l}");
        }
        // reference values of the Kolmogorov survival function
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 5e-4);
        assert!((kolmogorov_q(0.5) - 0.9639).abs() < 5e-4);
    }

    #[test]
    fn p_value_decreases_with_statistic() {
        let mut prev = 1.0;
        for i in 0..300 {
            let q = kolmogorov_q(i as f64 * 0.01);
            assert!(q <= prev + 1e-15);
            prev = q;
        }
    }

    #[test]
    fn self_consistent_rejection_rate() {
        let batches = 200;
        let rejected = (0..batches)
            .filter(|&b| {
                let s = exp_samples(1.0, 2000, 1000 + b);
                ks_test(&s, exp_cdf(1.0)).unwrap().rejected_at(0.01)
            })
            .count();
        // about 1% expected; binomial(200, 0.01) rarely exceeds 7
        assert!(rejected <= 7, "{rejected}");
    }

    #[test]
    fn power_against_wrong_rate() {
        let s = exp_samples(1.0, 10_000, 5);
        assert!(ks_test(&s, exp_cdf(2.0)).unwrap().p_value < 1e-6);
    }

    #[test]
    fn invariant_under_monotone_map() {
        let s = exp_samples(1.0, 500, 9);
        let a = ks_test(&s, exp_cdf(1.0)).unwrap();
        let mapped: Vec<f64> = s.iter().map(|x| x.ln()).collect();
        let b = ks_test(&mapped, |y| exp_cdf(1.0)(y.exp())).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-12);
    }

    #[test]
    fn moments() {
        let (m, se) = empirical_moment(&[3.0; 10], 2).unwrap();
        assert_eq!((m, se), (9.0, 0.0));
        let xs = [1.0, 2.0, 6.0];
        assert_eq!(empirical_moment(&xs, 1).unwrap().0, 3.0);
        let s = exp_samples(1.0, 100_000, 3);
        let (m2, se2) = empirical_moment(&s, 2).unwrap();
        assert!((m2 - 2.0).abs() < 3.0 * se2, "{m2} ± {se2}");
        assert!(empirical_moment(&[], 1).is_err());
    }

    #[test]
    fn occupancy() {
        let constant = Trajectory { jumps: vec![(0.0, 1)], t_end: 5.0 };
        assert_eq!(occupancy_histogram(&constant, 3).unwrap(), vec![0.0, 1.0, 0.0]);
        let alternating = Trajectory {
            jumps: vec![(0.0, 0), (1.0, 1), (2.0, 0), (3.0, 1)],
            t_end: 4.0,
        };
        assert_eq!(occupancy_histogram(&alternating, 2).unwrap(), vec![0.5, 0.5]);
        let (overall, se) = batch_means(&alternating, 2, 2).unwrap();
        assert_eq!(overall, vec![0.5, 0.5]);
        assert_eq!(se, vec![0.0, 0.0]);
        assert_eq!(alternating.state_at(2.5), Some(0));
    }

    #[test]
    fn occupancy_sums_to_one() {
        let jumps: Vec<(f64, usize)> = (0..97).map(|i| (i as f64 * 0.37, i % 4)).collect();
        let t = Trajectory { jumps, t_end: 40.0 };
        let occ = occupancy_histogram(&t, 4).unwrap();
        assert!((occ.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
