//! The limit point process `theta_infty = sum y_i delta_{x_i}` with intensity
//! `x^-2 exp(-y/x) dx dy` on `(0, 1] x (0, inf)`, and its closed-form moments.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::mean_and_se;

/// Disjoint intervals with their powers, for a product moment.
pub type MomentCase = (&'static [(f64, f64)], &'static [u32]);

/// Moment cases reported by the `theta` command and checked in validation.
pub const MOMENT_GRID: [MomentCase; 5] = [
    (&[(0.0, 1.0)], &[1]),
    (&[(0.0, 1.0)], &[2]),
    (&[(0.0, 1.0)], &[3]),
    (&[(0.5, 1.0)], &[1]),
    (&[(0.0, 0.5), (0.5, 1.0)], &[1, 1]),
];

/// Default truncation: atoms with `x <= 1e-6` are dropped, losing expected
/// mass `1e-6`.
pub const DEFAULT_TRUNC: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub x: f64,
    pub y: f64,
}

/// Finite atomic measure on `(x_trunc, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomMeasure {
    pub x_trunc: f64,
    pub atoms: Vec<Atom>,
}

impl AtomMeasure {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().fold(0.0, |s, a| s + a.y)
    }

    /// Mass of atoms with `a < x <= b`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.atoms.iter().filter(|p| p.x > a && p.x <= b).fold(0.0, |s, p| s + p.y)
    }

    /// JSON array of `{x, y}`.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, &self.atoms)?;
        Ok(())
    }
}

fn check_trunc(x_trunc: f64) -> Result<()> {
    if x_trunc > 0.0 && x_trunc < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("truncation must lie in (0, 1), got {x_trunc}")))
    }
}

/// Exact sample of the point process restricted to `x > x_trunc`.
///
/// The `x`-marginal has intensity `1/x`, so the atom count is
/// Poisson(`ln(1/x_trunc)`) and `x = x_trunc^U`; given `x`, the mass is
/// exponential with mean `x`. Atoms are sorted by position.
pub fn sample_theta_infty<R: Rng + ?Sized>(x_trunc: f64, rng: &mut R) -> Result<AtomMeasure> {
    check_trunc(x_trunc)?;
    let lambda = -x_trunc.ln();
    let count = Poisson::new(lambda)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sample(rng) as usize;
    let mut atoms: Vec<Atom> = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = 1.0 - rng.random::<f64>();
            let x = x_trunc.powf(u);
            Atom { x, y: -x * v.ln() }
        })
        .collect();
    atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(AtomMeasure { x_trunc, atoms })
}

fn check_intervals(intervals: &[(f64, f64)]) -> Result<()> {
    for &(a, b) in intervals {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::Domain(format!("interval ({a}, {b}) is not inside [0, 1]")));
        }
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::Domain(format!(
                "intervals ({}, {}) and ({}, {}) overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(())
}

/// `E[prod theta((a_i, b_i])^{n_i}] = prod n_i! b_i^{n_i - 1} (b_i - a_i)` for
/// disjoint intervals.
pub fn theta_moment(intervals: &[(f64, f64)], powers: &[u32]) -> Result<f64> {
    if intervals.len() != powers.len() {
        return Err(Error::Precondition(format!(
            "{} intervals but {} powers",
            intervals.len(),
            powers.len()
        )));
    }
    if powers.contains(&0) {
        return Err(Error::Precondition("powers must be at least 1".into()));
    }
    check_intervals(intervals)?;
    Ok(intervals
        .iter()
        .zip(powers)
        .map(|(&(a, b), &n)| {
            let fact: f64 = (1..=n).map(f64::from).product();
            fact * b.powi(n as i32 - 1) * (b - a)
        })
        .product())
}

/// `E[exp(t theta((a, b]))] = (1 - t a) / (1 - t b)`, finite for `t < 1/b`.
pub fn theta_mgf(a: f64, b: f64, t: f64) -> Result<f64> {
    check_intervals(&[(a, b)])?;
    if t * b >= 1.0 {
        return Err(Error::Domain(format!("MGF diverges for t = {t} >= 1/b = {}", 1.0 / b)));
    }
    Ok((1.0 - t * a) / (1.0 - t * b))
}

/// One row of the moment comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub intervals: Vec<(f64, f64)>,
    pub powers: Vec<u32>,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub std_err: f64,
}

impl MomentCheck {
    /// `|monte_carlo - analytic|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.monte_carlo - self.analytic).abs() / self.std_err
    }
}

/// Monte Carlo estimate of `E[prod theta(I_i)^{n_i}]` over `samples`.
pub fn moment_check(samples: &[AtomMeasure], intervals: &[(f64, f64)], powers: &[u32]) -> Result<MomentCheck> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let analytic = theta_moment(intervals, powers)?;
    let values: Vec<f64> = samples
        .iter()
        .map(|m| {
            intervals
                .iter()
                .zip(powers)
                .map(|(&(a, b), &n)| m.mass(a, b).powi(n as i32))
                .product()
        })
        .collect();
    let (monte_carlo, std_err) = mean_and_se(&values);
    Ok(MomentCheck {
        intervals: intervals.to_vec(),
        powers: powers.to_vec(),
        analytic,
        monte_carlo,
        std_err,
    })
}

/// CSV with columns `intervals, powers, analytic, monte_carlo, std_err`;
/// intervals are written as `a:b` joined by `;`.
pub fn write_moment_csv<W: Write>(rows: &[MomentCheck], mut out: W) -> Result<()> {
    writeln!(out, "intervals,powers,analytic,monte_carlo,std_err")?;
    for row in rows {
        let iv: Vec<String> = row.intervals.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        let pw: Vec<String> = row.powers.iter().map(u32::to_string).collect();
        writeln!(
            out,
            "{},{},{:?},{:?},{:?}",
            iv.join(";"),
            pw.join(";"),
            row.analytic,
            row.monte_carlo,
            row.std_err
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{covariance_and_se, exp_cdf, ks_test};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn draws(n: usize, x_trunc: f64, seed: u64) -> Vec<AtomMeasure> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| sample_theta_infty(x_trunc, &mut rng).unwrap()).collect()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(theta_moment(&[(0.0, 1.0)], &[1]).unwrap(), 1.0);
        assert_eq!(theta_moment(&[(0.5, 1.0)], &[2]).unwrap(), 1.0);
        assert_eq!(theta_moment(&[(0.3, 0.3)], &[2]).unwrap(), 0.0);
        assert_eq!(theta_moment(&[(0.0, 1.0)], &[3]).unwrap(), 6.0);
        assert_eq!(theta_moment(&[(0.0, 0.5), (0.5, 1.0)], &[1, 1]).unwrap(), 0.25);
        assert!(theta_moment(&[(0.0, 0.6), (0.5, 1.0)], &[1, 1]).is_err());
        assert!(theta_moment(&[(0.0, 1.0)], &[0]).is_err());
        assert_eq!(theta_mgf(0.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(theta_mgf(0.0, 1.0, 0.5).unwrap(), 2.0);
        assert_eq!(theta_mgf(0.4, 0.4, 2.0).unwrap(), 1.0);
        assert!(theta_mgf(0.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn rejects_bad_truncation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for x in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(sample_theta_infty(x, &mut rng).is_err());
        }
    }

    #[test]
    fn atom_count_and_support() {
        let xt = (-1.0f64).exp();
        let s = draws(20_000, xt, 1);
        let counts: Vec<f64> = s.iter().map(|m| m.len() as f64).collect();
        let (mean, se) = mean_and_se(&counts);
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean} {se}");
        for m in &s {
            assert!(m.atoms.iter().all(|a| a.x > xt && a.x <= 1.0 && a.y > 0.0));
        }
    }

    #[test]
    fn moments_match() {
        let s = draws(50_000, DEFAULT_TRUNC, 2);
        for (iv, pw) in [
            (vec![(0.0, 1.0)], vec![1]),
            (vec![(0.0, 1.0)], vec![2]),
            (vec![(0.5, 1.0)], vec![1]),
            (vec![(0.25, 0.5), (0.5, 1.0)], vec![2, 1]),
        ] {
            let c = moment_check(&s, &iv, &pw).unwrap();
            assert!(c.z_score() < 3.0, "{c:?}");
        }
    }

    #[test]
    fn truncation_bias_is_lost_mass() {
        // mass below 0.01 for an untruncated-looking sample equals 0.01 on average
        let s = draws(50_000, 1e-4, 3);
        let m: Vec<f64> = s.iter().map(|a| a.mass(0.0, 0.01)).collect();
        let (mean, se) = mean_and_se(&m);
        assert!((mean - (0.01 - 1e-4)).abs() < 3.0 * se, "{mean} {se}");
    }

    #[test]
    fn disjoint_windows_uncorrelated() {
        let s = draws(50_000, DEFAULT_TRUNC, 4);
        let lo: Vec<f64> = s.iter().map(|m| m.mass(0.0, 0.5)).collect();
        let hi: Vec<f64> = s.iter().map(|m| m.mass(0.5, 1.0)).collect();
        let (cov, se) = covariance_and_se(&lo, &hi).unwrap();
        assert!(cov.abs() < 3.0 * se, "{cov} {se}");
    }

    #[test]
    fn initial_mass_is_exponential() {
        let s = draws(20_000, DEFAULT_TRUNC, 5);
        for x in [0.25, 0.5, 1.0] {
            let m: Vec<f64> = s.iter().map(|a| a.mass(0.0, x)).collect();
            let ks = ks_test(&m, exp_cdf(1.0 / x)).unwrap();
            assert!(!ks.rejected_at(0.01), "x = {x}: {ks:?}");
        }
    }

    #[test]
    fn empirical_mgf() {
        let s = draws(50_000, DEFAULT_TRUNC, 6);
        for t in [0.1, 0.5] {
            let e: Vec<f64> = s.iter().map(|m| (t * m.mass(0.0, 1.0)).exp()).collect();
            let (mean, se) = mean_and_se(&e);
            let exact = theta_mgf(0.0, 1.0, t).unwrap();
            assert!((mean - exact).abs() < 3.0 * se, "t = {t}: {mean} vs {exact} ({se})");
        }
    }

    #[test]
    fn json_and_csv() {
        let m = AtomMeasure {
            x_trunc: 0.1,
            atoms: vec![Atom { x: 0.5, y: 0.25 }],
        };
        let mut buf = Vec::new();
        m.write_json(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), r#"[{"x":0.5,"y":0.25}]"#);
        let row = moment_check(&[m], &[(0.0, 0.5), (0.5, 1.0)], &[1, 1]).unwrap();
        let mut buf = Vec::new();
        write_moment_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0:0.5;0.5:1,1;1,0.25,0.0,0.0");
    }
}
