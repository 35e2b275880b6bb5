use serde::{Deserialize, Serialize};

use super::interval::{normalize, Interval, Piece};

/// A finite measure on the line given by its distribution function.
///
/// Implementations must be safe to call from several threads at once.
pub trait Measure: Send + Sync {
    fn cdf(&self, x: f64) -> f64;

    fn piece(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            0.0
        } else {
            (self.cdf(hi) - self.cdf(lo)).max(0.0)
        }
    }

    fn interval(&self, iv: &Interval) -> f64 {
        iv.pieces().iter().map(|&(lo, hi)| self.piece(lo, hi)).sum()
    }

    /// Measure of a union of arbitrary (possibly overlapping) pieces.
    fn union_pieces(&self, pieces: Vec<Piece>) -> f64 {
        normalize(pieces)
            .iter()
            .map(|&(lo, hi)| self.piece(lo, hi))
            .sum()
    }

    fn union(&self, ivs: &[Interval]) -> f64 {
        self.union_pieces(ivs.iter().flat_map(|iv| iv.pieces()).collect())
    }
}

/// Serializable choice among the closed-form measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Length on the line; on the torus this is Haar measure.
    Lebesgue,
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `a x^{a-1} dx` on `[0, 1]`.
    Power {
        a: f64,
    },
}

impl Measure for MeasureSpec {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            MeasureSpec::Lebesgue => x,
            MeasureSpec::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            MeasureSpec::Power { a } => x.clamp(0.0, 1.0).powf(a),
        }
    }
}

impl<M: Measure + ?Sized> Measure for &M {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
}

impl<M: Measure + ?Sized> Measure for std::sync::Arc<M> {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
}
