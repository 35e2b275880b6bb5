use serde::{Deserialize, Serialize};

use super::interval::{frac, Interval, Space};
use super::measure::Measure;
use crate::error::{Error, Result};
use crate::seqcore::RealSeq;

/// An indexed family of target sets `A_1, A_2, ...`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum IntervalFamily {
    /// `A_k = [0, a_k)`.
    NestedLeft {
        a: RealSeq,
        #[serde(default)]
        space: Space,
    },
    /// `A_k = [a_k, b_k)`.
    NestedWindow {
        a: RealSeq,
        b: RealSeq,
        #[serde(default)]
        space: Space,
    },
    /// Torus arcs laid end to end: `A_{n+1} = [b_n, b_n + a_n)`, `b_{n+1} = b_n + a_n mod 1`.
    TorusConsecutive {
        #[serde(default)]
        b0: f64,
        steps: RealSeq,
    },
    /// `A_k = intervals[k - 1]`.
    Custom { intervals: Vec<Interval> },
}

fn make(space: Space, lo: f64, hi: f64) -> Result<Interval> {
    match space {
        Space::Line => {
            if lo > hi {
                return Err(Error::InvalidInput(format!("empty window [{lo}, {hi})")));
            }
            Ok(Interval::line(lo, hi))
        }
        Space::Torus => {
            if hi - lo >= 1.0 {
                Ok(Interval::full_torus())
            } else if hi <= lo {
                Ok(Interval::empty(Space::Torus))
            } else {
                Ok(Interval::torus_arc(lo, hi - lo))
            }
        }
    }
}

impl IntervalFamily {
    pub fn nested_left(a: RealSeq) -> Self {
        IntervalFamily::NestedLeft {
            a,
            space: Space::Line,
        }
    }

    pub fn nested_left_torus(a: RealSeq) -> Self {
        IntervalFamily::NestedLeft {
            a,
            space: Space::Torus,
        }
    }

    pub fn nested_window(a: RealSeq, b: RealSeq) -> Self {
        IntervalFamily::NestedWindow {
            a,
            b,
            space: Space::Line,
        }
    }

    pub fn torus_consecutive(b0: f64, steps: RealSeq) -> Self {
        IntervalFamily::TorusConsecutive { b0, steps }
    }

    pub fn custom(intervals: Vec<Interval>) -> Self {
        IntervalFamily::Custom { intervals }
    }

    pub fn space(&self) -> Space {
        match self {
            IntervalFamily::NestedLeft { space, .. }
            | IntervalFamily::NestedWindow { space, .. } => *space,
            IntervalFamily::TorusConsecutive { .. } => Space::Torus,
            IntervalFamily::Custom { intervals } => {
                intervals.first().map(|i| i.space).unwrap_or_default()
            }
        }
    }

    /// Largest available index, if the family is finite.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            IntervalFamily::Custom { intervals } => Some(intervals.len()),
            IntervalFamily::NestedLeft { a, .. }
            | IntervalFamily::TorusConsecutive { steps: a, .. } => a.last_index(),
            IntervalFamily::NestedWindow { a, b, .. } => match (a.last_index(), b.last_index()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// `A_k` for `k >= 1`. Torus-consecutive families are walked from the start.
    pub fn get(&self, k: usize) -> Result<Interval> {
        if k == 0 {
            return Err(Error::InvalidInput("families are indexed from 1".into()));
        }
        match self {
            IntervalFamily::TorusConsecutive { .. } => Ok(self.materialize(k)?[k - 1]),
            _ => self.get_direct(k),
        }
    }

    fn get_direct(&self, k: usize) -> Result<Interval> {
        match self {
            IntervalFamily::NestedLeft { a, space } => make(*space, 0.0, a.get(k)?),
            IntervalFamily::NestedWindow { a, b, space } => make(*space, a.get(k)?, b.get(k)?),
            IntervalFamily::Custom { intervals } => {
                intervals
                    .get(k - 1)
                    .copied()
                    .ok_or(Error::HorizonExhausted {
                        last: intervals.len(),
                    })
            }
            IntervalFamily::TorusConsecutive { .. } => unreachable!(),
        }
    }

    /// `A_1, ..., A_n` (element `k - 1` holds `A_k`).
    pub fn materialize(&self, n: usize) -> Result<Vec<Interval>> {
        match self {
            IntervalFamily::TorusConsecutive { b0, steps } => {
                let mut out = Vec::with_capacity(n);
                let mut b = frac(*b0);
                for i in 0..n {
                    let len = steps.get(i)?;
                    out.push(Interval::torus_arc(b, len));
                    b = frac(b + len);
                }
                Ok(out)
            }
            IntervalFamily::Custom { intervals } => {
                if n > intervals.len() {
                    return Err(Error::HorizonExhausted {
                        last: intervals.len(),
                    });
                }
                let space = self.space();
                if intervals.iter().any(|i| i.space != space) {
                    return Err(Error::MixedSpaces);
                }
                Ok(intervals[..n].to_vec())
            }
            _ => (1..=n).map(|k| self.get_direct(k)).collect(),
        }
    }

    /// `mu(A_1), ..., mu(A_n)`.
    pub fn measures(&self, measure: &dyn Measure, n: usize) -> Result<Vec<f64>> {
        Ok(self
            .materialize(n)?
            .iter()
            .map(|iv| measure.interval(iv))
            .collect())
    }

    /// Whether `A_{k+1}` is contained in `A_k` for all `k < n`.
    pub fn is_nested(&self, n: usize) -> Result<bool> {
        let v = self.materialize(n)?;
        Ok(v.windows(2).all(|w| w[1].is_subset_of(&w[0])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::MeasureSpec;

    #[test]
    fn nested_left_is_nested() {
        let f = IntervalFamily::nested_left(RealSeq::power(1.0, -1.0));
        assert!(f.is_nested(100).unwrap());
        assert_eq!(f.get(4).unwrap(), Interval::line(0.0, 0.25));
    }

    #[test]
    fn window_family() {
        let f = IntervalFamily::nested_window(RealSeq::constant(0.5), RealSeq::power(0.5, -1.0));
        // b_k = 0.5/k < a_k for k >= 2 is rejected
        assert!(f.get(2).is_err());
    }

    #[test]
    fn torus_consecutive_recurrence() {
        let f = IntervalFamily::torus_consecutive(0.0, RealSeq::power(1.0, -0.5));
        let v = f.materialize(50).unwrap();
        assert!(v[0].is_full());
        let mut b = 0.0f64;
        for (i, iv) in v.iter().enumerate() {
            let len = (i.max(1) as f64).powf(-0.5);
            if len < 1.0 {
                assert!((iv.lo - b).abs() < 1e-9, "start of A_{}", i + 1);
                assert!((iv.length() - len).abs() < 1e-9);
            }
            b = (b + len).fract();
        }
        assert_eq!(f.get(7).unwrap(), v[6]);
    }

    #[test]
    fn measures_match_lengths() {
        let f = IntervalFamily::nested_left_torus(RealSeq::power(1.0, -0.3));
        let m = f.measures(&MeasureSpec::Lebesgue, 10).unwrap();
        for (k, x) in m.iter().enumerate() {
            assert!((x - ((k + 1) as f64).powf(-0.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn custom_rejects_mixed_spaces() {
        let f = IntervalFamily::custom(vec![Interval::line(0.0, 1.0), Interval::torus(0.1, 0.2)]);
        assert!(matches!(f.materialize(2), Err(Error::MixedSpaces)));
    }
}
