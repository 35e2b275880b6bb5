//! Finite-horizon decision rules for limit and series clauses.
//!
//! Trend rule: least-squares slope of `ln x_n` on `ln n` over the last two
//! decades of the trace. The trace tends to 0 if the slope is at most -0.05
//! and the endpoint is below half the value one decade earlier; the mirror
//! image decides `-> infinity`. A slope within 0.01 of flat (or moving the
//! wrong way) counts as evidence against the limit.
//!
//! Tail rule: slope of `ln term_n` on `ln n` over the last decade. Below -1.1
//! the series converges, above -0.9 it diverges.

use serde::{Deserialize, Serialize};

use super::{TracePoint, Verdict};
use crate::stats::ols_slope;

const DECAY_SLOPE: f64 = -0.05;
const DECAY_RATIO: f64 = 0.5;
const FLAT_SLOPE: f64 = 0.01;
const CONVERGENT_SLOPE: f64 = -1.1;
const DIVERGENT_SLOPE: f64 = -0.9;
const MIN_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    ToZero,
    ToInfinity,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub trend: Trend,
    pub slope: Option<f64>,
}

impl TrendFit {
    pub fn judge_to_zero(&self) -> Verdict {
        match (self.trend, self.slope) {
            (Trend::ToZero, _) => Verdict::Satisfied,
            (Trend::ToInfinity, _) => Verdict::Violated,
            (_, Some(s)) if s >= -FLAT_SLOPE => Verdict::Violated,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn judge_to_infinity(&self) -> Verdict {
        match (self.trend, self.slope) {
            (Trend::ToInfinity, _) => Verdict::Satisfied,
            (Trend::ToZero, _) => Verdict::Violated,
            (_, Some(s)) if s <= FLAT_SLOPE => Verdict::Violated,
            _ => Verdict::Inconclusive,
        }
    }
}

fn log_window(trace: &[TracePoint], from: f64) -> Vec<(f64, f64)> {
    trace
        .iter()
        .filter(|p| p.n as f64 >= from && p.value > 0.0 && p.value.is_finite())
        .map(|p| ((p.n as f64).ln(), p.value.ln()))
        .collect()
}

pub fn trend_rule(trace: &[TracePoint]) -> TrendFit {
    let inconclusive = TrendFit {
        trend: Trend::Inconclusive,
        slope: None,
    };
    let Some(last) = trace.last() else {
        return inconclusive;
    };
    if last.value == 0.0 {
        return TrendFit {
            trend: Trend::ToZero,
            slope: None,
        };
    }
    let end = last.n as f64;
    let pts = log_window(trace, end / 100.0);
    let slope = if pts.len() >= MIN_POINTS {
        ols_slope(&pts)
    } else {
        None
    };
    let Some(s) = slope else {
        return inconclusive;
    };
    let earlier = trace
        .iter()
        .rev()
        .find(|p| p.n as f64 <= end / 10.0)
        .map(|p| p.value);
    let trend = match earlier {
        Some(e) if s <= DECAY_SLOPE && last.value < DECAY_RATIO * e => Trend::ToZero,
        Some(e) if s >= -DECAY_SLOPE && last.value * DECAY_RATIO > e => Trend::ToInfinity,
        _ => Trend::Inconclusive,
    };
    TrendFit {
        trend,
        slope: Some(s),
    }
}

/// `x_n -> 0` judged against a scale `E_n` known to diverge: the slope of
/// `ln x_n` on `ln E_n` over the last two decades of `n`. A slope at most
/// -1/2 means `x_n = O(E_n^{-1/2})` on evidence.
pub fn relative_to_zero(
    trace: &[TracePoint],
    scale: impl Fn(usize) -> f64,
) -> (Verdict, Option<f64>) {
    let Some(last) = trace.last() else {
        return (Verdict::Inconclusive, None);
    };
    if last.value == 0.0 {
        return (Verdict::Satisfied, None);
    }
    let from = last.n as f64 / 100.0;
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|p| p.n as f64 >= from && p.value > 0.0)
        .filter_map(|p| {
            let e = scale(p.n);
            (e > 0.0).then(|| (e.ln(), p.value.ln()))
        })
        .collect();
    let slope = if pts.len() >= MIN_POINTS {
        ols_slope(&pts)
    } else {
        None
    };
    let v = match slope {
        Some(s) if s <= -0.5 => Verdict::Satisfied,
        Some(s) if s >= -FLAT_SLOPE => Verdict::Violated,
        _ => Verdict::Inconclusive,
    };
    (v, slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub verdict: Summability,
    pub slope: Option<f64>,
    /// Integral estimate of the remainder `sum_{k > n} term_k` when convergent.
    pub tail: Option<f64>,
}

/// `terms` holds `(n, term_n)` at increasing `n`.
pub fn tail_rule(terms: &[TracePoint]) -> TailFit {
    let none = TailFit {
        verdict: Summability::Inconclusive,
        slope: None,
        tail: None,
    };
    let Some(last) = terms.last() else {
        return none;
    };
    let from = last.n as f64 / 10.0;
    let window: Vec<&TracePoint> = terms.iter().filter(|p| p.n as f64 >= from).collect();
    if window.iter().all(|p| p.value == 0.0) {
        return TailFit {
            verdict: Summability::Convergent,
            slope: None,
            tail: Some(0.0),
        };
    }
    let pts = log_window(terms, from);
    let slope = if pts.len() >= MIN_POINTS {
        ols_slope(&pts)
    } else {
        None
    };
    let Some(s) = slope else {
        return none;
    };
    let verdict = if s < CONVERGENT_SLOPE {
        Summability::Convergent
    } else if s > DIVERGENT_SLOPE {
        Summability::Divergent
    } else {
        Summability::Inconclusive
    };
    let tail =
        (verdict == Summability::Convergent).then(|| last.value * last.n as f64 / (-s - 1.0));
    TailFit {
        verdict,
        slope: Some(s),
        tail,
    }
}
