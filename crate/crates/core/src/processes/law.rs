use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::Measure;

/// A one-dimensional law sampled by inverting its distribution function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Density `a x^{a-1}` on `[0, 1]`.
    Power {
        a: f64,
    },
}

impl Default for Law {
    fn default() -> Self {
        Law::Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Law::Uniform { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => Err(
                Error::InvalidInput(format!("uniform law needs lo < hi, got [{lo}, {hi}]")),
            ),
            Law::Power { a } if !(a > 0.0 && a.is_finite()) => Err(Error::InvalidInput(format!(
                "power law needs a > 0, got {a}"
            ))),
            _ => Ok(()),
        }
    }

    /// Inverse distribution function at `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        match *self {
            Law::Uniform { lo, hi } => lo + (hi - lo) * u,
            Law::Power { a } => u.powf(1.0 / a),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Law::Uniform { lo, hi } => (lo, hi),
            Law::Power { .. } => (0.0, 1.0),
        }
    }
}

impl Measure for Law {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Law::Power { a } => x.clamp(0.0, 1.0).powf(a),
        }
    }
}

/// Regeneration probability `x -> s(x)` of a split chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "s", rename_all = "snake_case")]
pub enum RegenFn {
    Constant {
        c: f64,
    },
    /// `x^p` on `[0, 1]`.
    Power {
        p: f64,
    },
}

impl RegenFn {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let s = match *self {
            RegenFn::Constant { c } => c,
            RegenFn::Power { p } => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::StateOutOfSpace { state: x });
                }
                x.powf(p)
            }
        };
        if (0.0..=1.0).contains(&s) {
            Ok(s)
        } else {
            Err(Error::InvalidRegeneration(s))
        }
    }

    /// `nu(s)` by midpoint quadrature in the quantile scale of `nu`.
    pub fn mean_under(&self, nu: &Law) -> Result<f64> {
        const M: usize = 4096;
        let mut acc = 0.0;
        for i in 0..M {
            acc += self.eval(nu.sample((i as f64 + 0.5) / M as f64))?;
        }
        Ok(acc / M as f64)
    }
}

/// Innovation of the halving autoregression `X_{n+1} = X_n / 2 + eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "innovation", rename_all = "snake_case")]
pub enum Innovation {
    /// Bernoulli(1/2) plus an independent centered discrete perturbation.
    Bernoulli {
        #[serde(default)]
        noise: Vec<(f64, f64)>,
    },
    /// Nonnegative with `P(eps > x) = (1 + ln(1 + x))^{-p}`.
    LogTail { p: f64 },
}

impl Default for Innovation {
    fn default() -> Self {
        Innovation::Bernoulli { noise: Vec::new() }
    }
}

const HEAVY_CAP: f64 = 1e300;

impl Innovation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Innovation::Bernoulli { noise } => {
                if noise.is_empty() {
                    return Ok(());
                }
                if let Some(&(_, p)) = noise.iter().find(|a| a.1 < 0.0) {
                    return Err(Error::NegativeProbability(p));
                }
                let total: f64 = noise.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::ProbabilitySum { sum: total });
                }
                let mean: f64 = noise.iter().map(|a| a.0 * a.1).sum();
                if mean.abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "noise must be centered, mean {mean}"
                    )));
                }
                Ok(())
            }
            Innovation::LogTail { p } if !(*p > 0.0) => Err(Error::InvalidInput(format!(
                "log-tail exponent must be positive, got {p}"
            ))),
            Innovation::LogTail { .. } => Ok(()),
        }
    }

    pub fn is_plain_bernoulli(&self) -> bool {
        matches!(self, Innovation::Bernoulli { noise } if noise.iter().all(|a| a.0 == 0.0 || a.1 == 0.0))
    }

    pub fn sample(&self, u0: f64, u1: f64) -> f64 {
        match self {
            Innovation::Bernoulli { noise } => {
                let b = if u0 < 0.5 { 1.0 } else { 0.0 };
                let mut acc = 0.0;
                let mut eta = noise.last().map_or(0.0, |a| a.0);
                for &(v, p) in noise {
                    acc += p;
                    if u1 < acc {
                        eta = v;
                        break;
                    }
                }
                b + eta
            }
            Innovation::LogTail { p } => {
                let t = (1.0 - u0).powf(-1.0 / p) - 1.0;
                (t.exp() - 1.0).min(HEAVY_CAP)
            }
        }
    }
}
