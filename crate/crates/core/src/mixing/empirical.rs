use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::trajectory_rng;

const MIN_PAIRS: usize = 1000;
const MIN_PER_BIN: usize = 20;
const BOOTSTRAP: usize = 40;
const PERMUTATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    /// Plug-in statistic.
    pub raw: f64,
    /// Mean statistic after shuffling the pairing (its value under independence).
    pub null_level: f64,
    /// `max(raw - null_level, 0)`.
    pub estimate: f64,
    pub std_error: f64,
    pub bins: usize,
}

/// Binned plug-in estimate of `sup_t E|P(X_n <= t | X_0) - P(X_n <= t)|`.
///
/// `X_0` is cut into `floor(sqrt N)` equal-count bins; within each bin the
/// conditional cdf of `X_n` is compared with the pooled one on `t_grid`.
pub fn empirical_tilde_alpha(
    pairs: &[(f64, f64)],
    t_grid: &[f64],
    seed: u64,
) -> Result<AlphaEstimate> {
    let n = pairs.len();
    if n < MIN_PAIRS {
        return Err(Error::TooFewSamples {
            got: n,
            need: MIN_PAIRS,
        });
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty threshold grid".into()));
    }
    let bins = (n as f64).sqrt().floor() as usize;
    if n / bins < MIN_PER_BIN {
        return Err(Error::TooFewSamples {
            got: n / bins,
            need: MIN_PER_BIN,
        });
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let later: Vec<f64> = sorted.iter().map(|p| p.1).collect();

    let raw = binned_statistic(&later, bins, t_grid);
    let mut rng = trajectory_rng(seed, 0);

    let mut shuffled = later.clone();
    let null_level = (0..PERMUTATIONS)
        .map(|_| {
            shuffled.shuffle(&mut rng);
            binned_statistic(&shuffled, bins, t_grid)
        })
        .sum::<f64>()
        / PERMUTATIONS as f64;

    let boots: Vec<f64> = (0..BOOTSTRAP)
        .map(|_| {
            let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            idx.sort_unstable();
            let resampled: Vec<f64> = idx.iter().map(|&i| later[i]).collect();
            binned_statistic(&resampled, bins, t_grid)
        })
        .collect();
    let std_error = crate::stats::variance(&boots).sqrt();

    Ok(AlphaEstimate {
        raw,
        null_level,
        estimate: (raw - null_level).max(0.0),
        std_error,
        bins,
    })
}

/// `later` is ordered by the conditioning variable.
fn binned_statistic(later: &[f64], bins: usize, t_grid: &[f64]) -> f64 {
    let n = later.len();
    let mut pooled = later.to_vec();
    pooled.sort_by(f64::total_cmp);
    let groups: Vec<Vec<f64>> = (0..bins)
        .map(|b| {
            let mut g = later[b * n / bins..(b + 1) * n / bins].to_vec();
            g.sort_by(f64::total_cmp);
            g
        })
        .collect();
    let cdf = |v: &[f64], t: f64| v.partition_point(|&x| x <= t) as f64 / v.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            let f = cdf(&pooled, t);
            groups
                .iter()
                .map(|g| g.len() as f64 / n as f64 * (cdf(g, t) - f).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
