//! Empirical distributions, Wilson intervals and goodness-of-fit statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::pmf::{tv_distance, Pmf};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Family-wise significance level of one report.
pub const ALPHA: f64 = 0.01;

/// Two-sided normal quantile for level `alpha` split across `rows` tests.
pub fn bonferroni_z(alpha: f64, rows: usize) -> f64 {
    let per = alpha / rows.max(1) as f64;
    Normal::standard().inverse_cdf(1.0 - per / 2.0)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Counts of an integer statistic over returned excursions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    pub counts: Vec<u64>,
    pub n_returned: u64,
    pub censored: u64,
}

impl EmpiricalDist {
    pub fn from_counts(counts: Vec<u64>, censored: u64) -> Self {
        let n_returned = counts.iter().sum();
        EmpiricalDist { counts, n_returned, censored }
    }

    pub fn push(&mut self, k: u64) {
        let k = k as usize;
        if self.counts.len() <= k {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
        self.n_returned += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalDist) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_returned += other.n_returned;
        self.censored += other.censored;
    }

    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn censored_fraction(&self) -> f64 {
        let total = self.n_returned + self.censored;
        if total == 0 {
            0.0
        } else {
            self.censored as f64 / total as f64
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n_returned > 0).then(|| {
            let s: f64 = self.counts.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum();
            s / self.n_returned as f64
        })
    }

    /// Mean with a normal-approximation interval at quantile `z`.
    pub fn mean_ci(&self, z: f64) -> Option<(f64, f64, f64)> {
        let mean = self.mean()?;
        let n = self.n_returned as f64;
        let var = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * (k as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        let half = z * (var / n).sqrt();
        Some((mean, mean - half, mean + half))
    }

    pub fn pmf(&self, label: impl Into<String>) -> Result<Pmf> {
        if self.n_returned == 0 {
            return Err(Error::EmptySample);
        }
        let n = self.n_returned as f64;
        let masses = if self.counts.is_empty() { vec![0.0] } else { self.counts.iter().map(|&c| c as f64 / n).collect() };
        Pmf::from_parts(masses, 0.0, label)
    }
}

/// One bin of an empirical pmf with its Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinEstimate {
    pub k: usize,
    pub mass: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Relative frequencies with 99% Wilson intervals per bin.
pub fn empirical_pmf(e: &EmpiricalDist) -> Result<(Pmf, Vec<BinEstimate>)> {
    let pmf = e.pmf("empirical")?;
    let bins = (0..pmf.masses().len())
        .map(|k| {
            let (lo, hi) = wilson(e.count(k), e.n_returned, Z99);
            BinEstimate { k, mass: pmf.mass(k), ci_low: lo, ci_high: hi }
        })
        .collect();
    Ok((pmf, bins))
}

/// Sampling-noise scale of the TV distance between an empirical pmf and its
/// mean: `z · ½ Σ sqrt(p_k (1 - p_k) / n)`.
pub fn tv_noise(e: &EmpiricalDist, z: f64) -> f64 {
    if e.n_returned == 0 {
        return f64::INFINITY;
    }
    let n = e.n_returned as f64;
    let s: f64 = e
        .counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            (p * (1.0 - p) / n).sqrt()
        })
        .sum();
    z * 0.5 * s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² against `expected`, merging consecutive bins until each
/// expected count is at least 5. Mass beyond the last bin forms its own
/// group, folded into the previous one if too small.
pub fn chi_square(e: &EmpiricalDist, expected: &Pmf) -> ChiSquare {
    let n = e.n_returned as f64;
    let last = expected.masses().len().max(e.counts.len());
    let impossible = (0..last).any(|k| e.count(k) > 0 && expected.mass(k) == 0.0 && k < expected.masses().len())
        || (expected.tail() == 0.0 && (expected.masses().len()..last).any(|k| e.count(k) > 0));
    if impossible {
        return ChiSquare { statistic: f64::INFINITY, dof: 1, p_value: 0.0 };
    }
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0..last {
        obs += e.count(k) as f64;
        exp += expected.mass(k) * n;
        if exp >= 5.0 {
            groups.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    exp += expected.tail() * n;
    if exp > 0.0 || obs > 0.0 {
        match groups.last_mut() {
            Some(g) if exp < 5.0 => {
                g.0 += obs;
                g.1 += exp;
            }
            _ => groups.push((obs, exp)),
        }
    }
    if groups.len() < 2 {
        return ChiSquare { statistic: 0.0, dof: 0, p_value: 1.0 };
    }
    let statistic: f64 = groups
        .iter()
        .map(|&(o, x)| if x > 0.0 { (o - x).powi(2) / x } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = groups.len() - 1;
    let p_value = if statistic.is_finite() {
        ChiSquared::new(dof as f64).map(|c| 1.0 - c.cdf(statistic)).unwrap_or(f64::NAN)
    } else {
        0.0
    };
    ChiSquare { statistic, dof, p_value }
}

/// TV distance between the empirical law and a prediction.
pub fn empirical_tv(e: &EmpiricalDist, prediction: &Pmf) -> Result<f64> {
    Ok(tv_distance(&e.pmf("empirical")?, prediction))
}

/// Discrepancies across a cutoff ladder may only grow by less than the sum
/// of neighboring noise half-widths.
pub fn trend_ok(discrepancies: &[f64], half_widths: &[f64]) -> bool {
    discrepancies
        .windows(2)
        .zip(half_widths.windows(2))
        .all(|(d, h)| d[1] - d[0] <= h[0] + h[1])
}
