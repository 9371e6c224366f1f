//! Sample statistics for infidelity campaigns: bootstrap errors, rescaled
//! moments, Wigner–Dyson surmises, two-sample Kolmogorov–Smirnov distance,
//! and histograms on a shared binning.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bootstrap resample count.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Unit-mean GOE surmise `(πx/2)·exp(−πx²/4)`.
pub fn goe_surmise(x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    0.5 * PI * x * (-0.25 * PI * x * x).exp()
}

/// Unit-mean GUE surmise `(32/π²)·x²·exp(−4x²/π)`.
pub fn gue_surmise(x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    32.0 / (PI * PI) * x * x * (-4.0 * x * x / PI).exp()
}

/// `⟨x²⟩` of the unit-mean GOE surmise, `4/π`.
pub const GOE_SECOND_MOMENT: f64 = 4.0 / PI;
/// `⟨x²⟩` of the unit-mean GUE surmise, `3π/8`.
pub const GUE_SECOND_MOMENT: f64 = 3.0 * PI / 8.0;

/// Reference ensemble for the Wigner–Dyson comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Goe,
    Gue,
}

impl Ensemble {
    pub fn density(self, x: f64) -> f64 {
        match self {
            Ensemble::Goe => goe_surmise(x),
            Ensemble::Gue => gue_surmise(x),
        }
    }

    pub fn second_moment(self) -> f64 {
        match self {
            Ensemble::Goe => GOE_SECOND_MOMENT,
            Ensemble::Gue => GUE_SECOND_MOMENT,
        }
    }
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Samples divided by their mean.
pub fn rescale(samples: &[f64]) -> Result<Vec<f64>> {
    let m = mean(samples);
    if samples.is_empty() || !(m.is_finite() && m > 0.0) {
        return Err(Error::param("rescaling needs a non-empty sample with positive mean"));
    }
    Ok(samples.iter().map(|x| x / m).collect())
}

/// `⟨x²⟩/⟨x⟩²`, the second moment of the mean-rescaled sample.
pub fn rescaled_second_moment(samples: &[f64]) -> f64 {
    let m = mean(samples);
    samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64 / (m * m)
}

/// Standard deviation of `statistic` over `resamples` bootstrap resamples.
pub fn bootstrap_se(samples: &[f64], statistic: impl Fn(&[f64]) -> f64, resamples: usize, seed: u64) -> Result<f64> {
    if samples.len() < 2 || resamples < 2 {
        return Err(Error::param("bootstrap needs at least two samples and two resamples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; samples.len()];
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[rng.gen_range(0..samples.len())];
            }
            statistic(&buf)
        })
        .collect();
    let m = mean(&values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(var.sqrt())
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("KS statistic needs two non-empty samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample KS critical value `c(α)·√((n+m)/(n·m))` with
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Equal-width bins shared by several samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Probability densities, one vector per input sample.
    pub densities: Vec<Vec<f64>>,
}

/// Histograms of every sample on `bins` equal bins over `[lo, hi)`.
/// Densities integrate to the fraction of each sample inside the range.
pub fn shared_histogram(samples: &[&[f64]], bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::param("histogram needs at least one bin and hi > lo"));
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let densities = samples
        .iter()
        .map(|s| {
            let mut counts = vec![0usize; bins];
            for &x in s.iter() {
                if x >= lo && x < hi {
                    counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
                }
            }
            counts.iter().map(|&c| c as f64 / (s.len().max(1) as f64 * width)).collect()
        })
        .collect();
    Ok(Histogram { edges, densities })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    #[test]
    fn surmises_are_unit_mean_densities() {
        for e in [Ensemble::Goe, Ensemble::Gue] {
            let norm = simpson(|x| e.density(x), 0.0, 12.0, 20_000);
            let m1 = simpson(|x| x * e.density(x), 0.0, 12.0, 20_000);
            let m2 = simpson(|x| x * x * e.density(x), 0.0, 12.0, 20_000);
            assert!((norm - 1.0).abs() < 1e-10);
            assert!((m1 - 1.0).abs() < 1e-10);
            assert!((m2 - e.second_moment()).abs() < 1e-10);
        }
        assert!((GOE_SECOND_MOMENT - 1.2732395447351628).abs() < 1e-15);
    }

    #[test]
    fn rescaled_mean_is_one() {
        let s = [0.01, 0.03, 0.002, 0.2, 0.05];
        let r = rescale(&s).unwrap();
        assert!((mean(&r) - 1.0).abs() < 1e-12);
        let direct = mean(&r.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!((rescaled_second_moment(&s) - direct).abs() < 1e-12);
        assert!(rescale(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn bootstrap_se_of_mean_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let m = mean(&s);
        let sd = (s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64).sqrt();
        let analytic = sd / (s.len() as f64).sqrt();
        let a = bootstrap_se(&s, mean, 1000, 7).unwrap();
        let b = bootstrap_se(&s, mean, 1000, 8).unwrap();
        assert!((a / analytic - 1.0).abs() < 0.1);
        assert!((a / b - 1.0).abs() < 0.1);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..1000).map(|k| k as f64 / 1000.0).collect();
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.25).collect();
        assert!((ks_statistic(&a, &b).unwrap() - 0.25).abs() < 2e-3);
        assert!((ks_critical_value(100, 100, 0.05) - 1.358 * 0.02f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn histogram_shares_bins() {
        let a = [0.1, 0.2, 0.2, 0.9];
        let b = [0.5, 1.5];
        let h = shared_histogram(&[&a, &b], 4, 0.0, 1.0).unwrap();
        assert_eq!(h.edges.len(), 5);
        assert_eq!(h.densities[0], vec![3.0, 0.0, 0.0, 1.0]);
        assert_eq!(h.densities[1], vec![0.0, 0.0, 2.0, 0.0]);
    }
}
