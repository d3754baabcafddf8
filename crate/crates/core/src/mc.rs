//! Seeded Monte Carlo plumbing.
//!
//! Every trial draws from its own ChaCha8 stream whose seed is a pure
//! function of `(master_seed, trial_index)`, so results never depend on how
//! rayon schedules the work. Hit counts are summed as integers; real-valued
//! samples are collected in trial order and reduced sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// SplitMix64 finalizer: multiply-xor-shift avalanche.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, index))
}

/// Number of trials in `0..trials` for which `hit` returns true.
pub fn count_hits<F>(trials: u64, master: u64, hit: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    (0..trials)
        .into_par_iter()
        .filter(|&i| hit(&mut trial_rng(master, i)))
        .count() as u64
}

/// Per-trial samples in trial order.
pub fn collect_samples<T, F>(trials: u64, master: u64, sample: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| sample(&mut trial_rng(master, i)))
        .collect()
}

/// A Monte Carlo probability estimate with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

impl McEstimate {
    /// Normal-approximation interval, switching to Wilson's score interval
    /// when the estimate is within `5 / trials` of 0 or 1.
    pub fn from_counts(hits: u64, trials: u64, master_seed: u64) -> Self {
        assert!(trials > 0 && hits <= trials);
        let n = trials as f64;
        let est = hits as f64 / n;
        let edge = 5.0 / n;
        let (lo, hi) = if est <= edge || est >= 1.0 - edge {
            wilson(est, n)
        } else {
            let half = Z95 * (est * (1.0 - est) / n).sqrt();
            (est - half, est + half)
        };
        Self {
            estimate: est,
            trials,
            ci_low: lo.clamp(0.0, est),
            ci_high: hi.clamp(est, 1.0),
            master_seed,
        }
    }

    /// An exactly known probability, reported with a degenerate interval.
    pub fn exact(value: f64, trials: u64, master_seed: u64) -> Self {
        Self {
            estimate: value,
            trials,
            ci_low: value,
            ci_high: value,
            master_seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// `|estimate - value| <= k * half_width`, with a floor of one trial's
    /// worth of resolution so a degenerate interval still tolerates rounding.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let slack = (k * self.half_width()).max(1e-12);
        (self.estimate - value).abs() <= slack
    }
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (centre - half, centre + half)
}

/// Sample mean and its standard error, summed in slice order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}
