//! Scalar and sequence primitives: the Huber-type function `f`, partial sums,
//! generalized inverses, quantile functions, `Q*` and the uniform
//! integrability diagnostic.

mod growth;
mod quantile;
mod seq;

use serde::{Deserialize, Serialize};

pub use growth::Growth;
pub use quantile::QuantileFn;
pub use seq::{inverse_sequence, partial_sums, Monotone, RealSeq, SeqIndex, SeqKind, SeqTemplate};

use crate::error::{Error, Result};

/// `x^2/2` on `[-1, 1]`, `|x| - 1/2` outside.
#[inline]
pub fn f_eval(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        0.5 * x * x
    } else {
        a - 0.5
    }
}

/// Derivative of [`f_eval`]; 1-Lipschitz.
#[inline]
pub fn f_prime(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `Q*` over a finite family of quantile functions.
///
/// `Q*(u) = u^{-1} max_i int_0^u Q_i`, `Q*(0) = 0`. The family size is the
/// horizon of the approximation to the supremum over all `n`.
#[derive(Debug, Clone)]
pub struct QStar {
    family: Vec<QuantileFn>,
}

impl QStar {
    pub fn new(family: Vec<QuantileFn>) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::InvalidInput("Q* needs a nonempty family".into()));
        }
        Ok(QStar { family })
    }

    pub fn horizon(&self) -> usize {
        self.family.len()
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidInput(format!(
                "Q* argument {u} outside [0, 1]"
            )));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let best = self
            .family
            .iter()
            .map(|q| q.integral_to(u))
            .fold(0.0_f64, f64::max);
        Ok(best / u)
    }
}

pub fn qstar_eval(family: &[QuantileFn], u: f64) -> Result<f64> {
    QStar::new(family.to_vec())?.eval(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UiVerdict {
    UniformlyIntegrableOnEvidence,
    NotUniformlyIntegrable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UiReport {
    /// `(eps, sup_i int_0^eps Q_i)` in grid order.
    pub trace: Vec<(f64, f64)>,
    /// Least-squares slope of `ln sup` against `ln eps`.
    pub slope: Option<f64>,
    pub verdict: UiVerdict,
}

const UI_MIN_SLOPE: f64 = 0.1;
const UI_FLAT_TOL: f64 = 1e-6;
const UI_FLOOR: f64 = 1e-3;

/// Finite-evidence check of `lim_{eps -> 0} sup_i int_0^eps Q_i = 0`.
pub fn ui_diagnostic(family: &[QuantileFn], eps_grid: &[f64]) -> Result<UiReport> {
    if family.is_empty() {
        return Err(Error::InvalidInput(
            "ui_diagnostic needs a nonempty family".into(),
        ));
    }
    if eps_grid.is_empty()
        || eps_grid.iter().any(|&e| !(e > 0.0 && e <= 1.0))
        || eps_grid.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidInput(
            "eps grid must be strictly decreasing within (0, 1]".into(),
        ));
    }
    let trace: Vec<(f64, f64)> = eps_grid
        .iter()
        .map(|&e| {
            let s = family
                .iter()
                .map(|q| q.integral_to(e))
                .fold(0.0_f64, f64::max);
            (e, s)
        })
        .collect();

    let positive: Vec<(f64, f64)> = trace
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(e, s)| (e.ln(), s.ln()))
        .collect();
    let slope = crate::stats::ols_slope(&positive);

    let last = trace.last().unwrap().1;
    let (lo, hi) = trace
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    let verdict = if last == 0.0 || slope.is_some_and(|s| s >= UI_MIN_SLOPE) {
        UiVerdict::UniformlyIntegrableOnEvidence
    } else if hi - lo <= UI_FLAT_TOL && lo >= UI_FLOOR {
        UiVerdict::NotUniformlyIntegrable
    } else {
        UiVerdict::Inconclusive
    };
    Ok(UiReport {
        trace,
        slope,
        verdict,
    })
}
