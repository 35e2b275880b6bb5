use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleBetaOptions {
    /// Fourier truncation.
    pub k_max: usize,
    /// Points of the `x` and `t` grids.
    pub grid: usize,
    /// Largest acceptable truncation bound, if any.
    pub tolerance: Option<f64>,
}

impl Default for CircleBetaOptions {
    fn default() -> Self {
        CircleBetaOptions {
            k_max: 100_000,
            grid: 2048,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleBeta {
    pub n: usize,
    pub value: f64,
    /// Size of the first omitted Fourier term, `1 / (pi k_max)`.
    pub tail_bound: f64,
}

/// `E sup_t |P(X_n <= t | X_0) - t|` for the walk `x -> x +- a` on the circle.
///
/// With `h(y) = sum_{k>=1} cos(2 pi k a)^n sin(2 pi k y) / (pi k)` the
/// deviation at `(x, t)` is `h(x) - h(x - t)`, so the sup over `t` is
/// `max(h(x) - min h, max h - h(x))`. Coefficients are folded modulo the grid
/// size, which makes grid values of the truncated series exact.
pub fn circle_tilde_beta(n: usize, a: f64, opts: &CircleBetaOptions) -> Result<CircleBeta> {
    if n == 0 || opts.k_max == 0 || opts.grid < 2 {
        return Err(Error::InvalidInput(format!(
            "circle beta needs n, k_max >= 1 and grid >= 2, got n = {n}, k_max = {}, grid = {}",
            opts.k_max, opts.grid
        )));
    }
    let tail_bound = 1.0 / (PI * opts.k_max as f64);
    if let Some(tol) = opts.tolerance {
        if tail_bound > tol {
            return Err(Error::TruncationTooCoarse {
                bound: tail_bound,
                tolerance: tol,
            });
        }
    }
    let m = opts.grid;
    let mut folded = vec![0.0; m];
    for k in 1..=opts.k_max {
        let c = (2.0 * PI * k as f64 * a).cos();
        let w = c.powi(n as i32) / (PI * k as f64);
        folded[k % m] += w;
    }
    let sines: Vec<f64> = (0..m)
        .map(|r| (2.0 * PI * r as f64 / m as f64).sin())
        .collect();
    let h: Vec<f64> = (0..m)
        .map(|j| {
            folded
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0.0)
                .map(|(r, &b)| b * sines[(r * j) % m])
                .sum()
        })
        .collect();
    let hi = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = h.iter().copied().fold(f64::INFINITY, f64::min);
    let value = h.iter().map(|&v| (v - lo).max(hi - v)).sum::<f64>() / m as f64;
    Ok(CircleBeta {
        n,
        value: value.clamp(0.0, 1.0),
        tail_bound,
    })
}
