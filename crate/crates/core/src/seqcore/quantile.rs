use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-12;

/// Cadlag inverse of a tail function `t -> P(Z > t)` for a finitely supported
/// nonnegative `Z`.
///
/// Stored as a right-continuous, nonincreasing step function on `(0, 1]`:
/// `Q(u) = levels[i]` for `u` in `[breakpoints[i-1], breakpoints[i])`, with an
/// implicit `breakpoints[-1] = 0` and `breakpoints.last() = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFn {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl QuantileFn {
    /// Builds `Q_Z` from a discrete law given as `(value, probability)` atoms.
    pub fn from_weights(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut total = 0.0;
        for &(v, p) in atoms {
            if p < 0.0 {
                return Err(Error::NegativeProbability(p));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "quantile atoms must be finite and nonnegative, got {v}"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::ProbabilitySum { sum: total });
        }
        let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

        let mut breakpoints = Vec::with_capacity(sorted.len());
        let mut levels: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        for (v, p) in sorted {
            acc += p;
            if levels.last() == Some(&v) {
                *breakpoints.last_mut().unwrap() = acc;
            } else {
                levels.push(v);
                breakpoints.push(acc);
            }
        }
        // absorb rounding so the last piece ends exactly at 1
        if let Some(b) = breakpoints.last_mut() {
            *b = 1.0;
        }
        Ok(QuantileFn {
            breakpoints,
            levels,
        })
    }

    /// `Q(u)` for `u` in `(0, 1]`.
    pub fn eval(&self, u: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= u);
        match self.levels.get(i) {
            Some(v) => *v,
            None => *self.levels.last().unwrap_or(&0.0),
        }
    }

    /// Exact `int_0^u Q(s) ds`.
    pub fn integral_to(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (&b, &q) in self.breakpoints.iter().zip(&self.levels) {
            if u <= prev {
                break;
            }
            acc += q * (b.min(u) - prev);
            prev = b;
        }
        acc
    }

    /// `int_0^1 Q`, equal to the mean of the law it was built from.
    pub fn mean(&self) -> f64 {
        self.integral_to(1.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_is_constant() {
        let q = QuantileFn::from_weights(&[(1.0, 1.0)]).unwrap();
        for u in [1e-9, 0.3, 0.5, 1.0] {
            assert_eq!(q.eval(u), 1.0);
        }
    }

    #[test]
    fn two_point_law() {
        let q = QuantileFn::from_weights(&[(0.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(q.eval(0.1), 2.0);
        assert_eq!(q.eval(0.49), 2.0);
        // right-continuous at the jump
        assert_eq!(q.eval(0.5), 0.0);
        assert_eq!(q.eval(0.9), 0.0);
        assert!((q.mean() - 1.0).abs() < 1e-15);
        assert!((q.integral_to(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mass_identity_for_thirds() {
        let q = QuantileFn::from_weights(&[(3.0, 1.0 / 3.0), (0.0, 2.0 / 3.0)]).unwrap();
        assert!((q.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_laws() {
        assert!(matches!(
            QuantileFn::from_weights(&[(1.0, -0.1), (2.0, 1.1)]),
            Err(Error::NegativeProbability(_))
        ));
        assert!(matches!(
            QuantileFn::from_weights(&[(1.0, 0.5)]),
            Err(Error::ProbabilitySum { .. })
        ));
    }

    #[test]
    fn duplicate_values_merge() {
        let q = QuantileFn::from_weights(&[(1.0, 0.25), (1.0, 0.25), (0.0, 0.5)]).unwrap();
        assert_eq!(q.levels(), &[1.0, 0.0]);
        assert_eq!(q.breakpoints(), &[0.5, 1.0]);
    }
}
