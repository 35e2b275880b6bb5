//! Mixing coefficient inputs: Fourier computation for the circle walk, kernel
//! powers on a grid, the DMR reference sandwich and an empirical estimator.

mod circle;
mod empirical;
mod kernel;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use circle::{circle_tilde_beta, CircleBeta, CircleBetaOptions};
pub use empirical::{empirical_tilde_alpha, AlphaEstimate};
pub use kernel::{dmr_grid_kernel, kernel_tilde_beta, kernel_tilde_beta_profile, GridKernel};

use crate::error::{Error, Result};
use crate::seqcore::{Monotone, RealSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    AlphaInf1,
    BetaInf1,
    TildeAlpha,
    TildeBeta11,
    TildeBetaRev,
    TildePhi11,
}

impl ProfileKind {
    fn must_decrease(self) -> bool {
        matches!(self, ProfileKind::AlphaInf1 | ProfileKind::BetaInf1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AnalyticBound,
    Computed,
    Empirical,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::AnalyticBound => "analytic_bound",
            Provenance::Computed => "computed",
            Provenance::Empirical => "empirical",
        }
    }
}

/// A mixing coefficient sequence `n -> c(n)` with its origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingProfile {
    pub kind: ProfileKind,
    pub values: RealSeq,
    pub provenance: Provenance,
    /// Per-term error bars for tabulated values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_bars: Option<Vec<f64>>,
}

impl MixingProfile {
    pub fn new(kind: ProfileKind, values: RealSeq, provenance: Provenance) -> Result<Self> {
        let values = if kind.must_decrease() {
            values.with_monotone(Monotone::NonIncreasing)
        } else {
            values
        };
        let p = MixingProfile {
            kind,
            values,
            provenance,
            error_bars: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Tabulated profile on lags `start, start + 1, ...`.
    pub fn tabulated(
        kind: ProfileKind,
        start: usize,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        Self::new(kind, RealSeq::tabulated(start, values), provenance)
    }

    pub fn with_error_bars(mut self, bars: Vec<f64>) -> Self {
        self.error_bars = Some(bars);
        self
    }

    /// Checks the `[0, 1]` range and, for the full-past coefficients,
    /// monotonicity on the tabulated prefix (or the first 1000 lags).
    pub fn validate(&self) -> Result<()> {
        let (from, to) = self.span();
        for n in from..=to {
            let v = self.values.get(n)?;
            if v > 1.0 {
                return Err(Error::InvalidTerm { index: n, value: v });
            }
        }
        if self.kind.must_decrease() && !self.values.check_monotone(from, to)? {
            return Err(Error::InvalidInput(format!(
                "{:?} profile must be nonincreasing",
                self.kind
            )));
        }
        Ok(())
    }

    fn span(&self) -> (usize, usize) {
        match &self.values.kind {
            crate::seqcore::SeqKind::Tabulated { start, values } => {
                (*start, start + values.len().max(1) - 1)
            }
            crate::seqcore::SeqKind::Closed(_) => {
                (1, self.values.horizon.map_or(1000, |h| h.min(1000)))
            }
        }
    }

    /// CSV with columns `n,value,provenance,error_bar` over lags `from..=to`.
    pub fn to_csv(&self, from: usize, to: usize) -> Result<String> {
        let mut out = String::from("n,value,provenance,error_bar\n");
        let (start, _) = self.span();
        for n in from..=to {
            let v = self.values.get(n)?;
            let bar = self
                .error_bars
                .as_ref()
                .and_then(|b| n.checked_sub(start).and_then(|i| b.get(i)))
                .map(|b| b.to_string())
                .unwrap_or_default();
            writeln!(out, "{n},{v},{},{bar}", self.provenance.as_str()).unwrap();
        }
        Ok(out)
    }
}

/// Asymptotic sandwich `(a G(a) n^{-a}, 3 a G(a) 2^a n^{-a})` for the DMR chain's beta coefficients.
pub fn dmr_beta_bounds(a: f64, n: usize) -> Result<(f64, f64)> {
    if !(a > 0.0) || n == 0 {
        return Err(Error::InvalidInput(format!(
            "dmr bounds need a > 0 and n >= 1, got a = {a}, n = {n}"
        )));
    }
    let c = a * statrs::function::gamma::gamma(a);
    let scale = (n as f64).powf(-a);
    Ok((c * scale, 3.0 * c * 2f64.powf(a) * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sandwich_examples() {
        let (lo, hi) = dmr_beta_bounds(1.0, 10).unwrap();
        assert!((lo - 0.1).abs() < 1e-12 && (hi - 0.6).abs() < 1e-12);
        for n in [1, 7, 100] {
            let (lo, hi) = dmr_beta_bounds(1.0, n).unwrap();
            assert!((hi / lo - 6.0).abs() < 1e-12);
        }
        let (lo, hi) = dmr_beta_bounds(2.0, 100).unwrap();
        assert!((lo - 2e-4).abs() < 1e-15 && (hi - 2.4e-3).abs() < 1e-15);
    }

    #[test]
    fn profile_validation() {
        assert!(MixingProfile::tabulated(
            ProfileKind::BetaInf1,
            1,
            vec![0.5, 0.6],
            Provenance::Computed
        )
        .is_err());
        assert!(MixingProfile::tabulated(
            ProfileKind::TildeBeta11,
            1,
            vec![0.5, 0.6],
            Provenance::Computed
        )
        .is_ok());
        assert!(MixingProfile::tabulated(
            ProfileKind::TildeBeta11,
            1,
            vec![1.5],
            Provenance::Computed
        )
        .is_err());
        let p = MixingProfile::new(
            ProfileKind::AlphaInf1,
            RealSeq::power(0.5, -1.0),
            Provenance::AnalyticBound,
        )
        .unwrap();
        let csv = p.to_csv(1, 2).unwrap();
        assert_eq!(
            csv,
            "n,value,provenance,error_bar\n1,0.5,analytic_bound,\n2,0.25,analytic_bound,\n"
        );
    }
}
