//! Finite-horizon evaluators for Borel-Cantelli criteria.
//!
//! Every evaluator returns a [`CriterionReport`] whose verdict is the
//! conjunction of its clauses. Limit clauses (`-> 0`, `-> infinity`) and
//! series clauses (`sum < infinity`) are decided exactly when all inputs are
//! closed forms and by the finite-horizon rules in [`rules`] otherwise.

mod alpha;
mod moments;
mod pairwise;
pub mod rules;
mod sparse;
mod tilde;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use alpha::{check_alpha, check_beta_strong, AlphaMode, AlphaParams};
pub use moments::{check_f_criteria, check_l2, FMode, PathSamples, MIN_PATHS};
pub use pairwise::{check_pairwise, PairwiseMode};
pub use sparse::{sparsify_psi, SparseLevel, SparsePlan};
pub use tilde::{check_harris_nested, check_tilde, TildeMode, TildeParams};

use crate::error::{Error, Result};
use crate::seqcore::{Growth, RealSeq};
use rules::{tail_rule, trend_rule, Summability, TrendFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: any violation wins, then any inconclusive clause.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Satisfied,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exponent comparison on closed forms.
    Exact,
    Trend,
    Tail,
    /// Read off an input or a finite check.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
}

impl TracePoint {
    pub fn new(n: usize, value: f64) -> Self {
        TracePoint {
            n,
            value,
            error: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub verdict: Verdict,
    pub method: Method,
    pub trace: Vec<TracePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub slope: Option<f64>,
    pub tail_estimate: Option<f64>,
    pub first_failure: Option<usize>,
    pub clauses: Vec<Clause>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Outcome of one criterion on one set of inputs.
///
/// `trace`, `slope`, `tail_estimate` and `first_failure` are copied from the
/// deciding clause: the first violated one, else the first inconclusive one,
/// else the last.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub inputs_digest: String,
    pub horizon: usize,
    pub trace: Vec<TracePoint>,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

impl CriterionReport {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.diagnostics.clauses.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Hex SHA-256 of the JSON encoding of `inputs`.
pub fn inputs_digest<T: Serialize + ?Sized>(inputs: &T) -> Result<String> {
    let bytes = serde_json::to_vec(inputs)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Clause {
    fn new(name: &str, verdict: Verdict, method: Method) -> Self {
        Clause {
            name: name.to_string(),
            verdict,
            method,
            trace: Vec::new(),
            slope: None,
            tail_estimate: None,
            first_failure: None,
            note: None,
        }
    }

    pub(crate) fn direct(name: &str, ok: bool, note: impl Into<String>) -> Self {
        let v = if ok {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        };
        Clause::new(name, v, Method::Direct).with_note(note)
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        let s = note.into();
        if !s.is_empty() {
            self.note = Some(s);
        }
        self
    }

    pub(crate) fn with_first_failure(mut self, n: Option<usize>) -> Self {
        self.first_failure = n;
        self
    }

    fn exact(name: &str, ok: bool, trace: Vec<TracePoint>) -> Self {
        let v = if ok {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        };
        let mut c = Clause::new(name, v, Method::Exact);
        c.trace = trace;
        c
    }

    /// `x_n -> 0`.
    pub(crate) fn to_zero(name: &str, trace: Vec<TracePoint>, closed: Option<Growth>) -> Self {
        if let Some(g) = closed {
            return Clause::exact(name, g.tends_to_zero(), trace);
        }
        let fit = trend_rule(&trace);
        let mut c = Clause::new(name, fit.judge_to_zero(), Method::Trend);
        c.slope = fit.slope;
        c.trace = trace;
        c
    }

    /// `x_n -> infinity`.
    pub(crate) fn to_infinity(name: &str, trace: Vec<TracePoint>, closed: Option<Growth>) -> Self {
        if let Some(g) = closed {
            return Clause::exact(name, g.tends_to_infinity(), trace);
        }
        let fit = trend_rule(&trace);
        let mut c = Clause::new(name, fit.judge_to_infinity(), Method::Trend);
        c.slope = fit.slope;
        c.trace = trace;
        c
    }

    /// `sum_n terms[n - 1] < infinity`; the trace holds partial sums on a geometric grid.
    pub(crate) fn summable(name: &str, terms: &[f64], closed: Option<Growth>) -> Self {
        Self::series(name, terms, closed, true)
    }

    /// `sum_n terms[n - 1] = infinity`.
    pub(crate) fn divergent(name: &str, terms: &[f64], closed: Option<Growth>) -> Self {
        Self::series(name, terms, closed, false)
    }

    fn series(name: &str, terms: &[f64], closed: Option<Growth>, want_finite: bool) -> Self {
        let trace = partial_sum_trace(terms);
        if let Some(g) = closed {
            return Clause::exact(name, g.summable() == want_finite, trace);
        }
        let sampled: Vec<TracePoint> = grid(terms.len())
            .into_iter()
            .map(|n| TracePoint::new(n, terms[n - 1]))
            .collect();
        let fit = tail_rule(&sampled);
        let verdict = match (fit.verdict, want_finite) {
            (Summability::Inconclusive, _) => Verdict::Inconclusive,
            (Summability::Convergent, true) | (Summability::Divergent, false) => Verdict::Satisfied,
            _ => Verdict::Violated,
        };
        let mut c = Clause::new(name, verdict, Method::Tail);
        c.slope = fit.slope;
        c.tail_estimate = fit.tail;
        c.trace = trace;
        c
    }

    /// Wraps a trend fit computed elsewhere.
    pub(crate) fn from_fit(
        name: &str,
        trace: Vec<TracePoint>,
        fit: &TrendFit,
        verdict: Verdict,
    ) -> Self {
        let mut c = Clause::new(name, verdict, Method::Trend);
        c.slope = fit.slope;
        c.trace = trace;
        c
    }
}

pub(crate) struct ReportBuilder {
    criterion: String,
    digest: String,
    horizon: usize,
    clauses: Vec<Clause>,
    note: Option<String>,
}

impl ReportBuilder {
    pub(crate) fn new<T: Serialize>(criterion: &str, inputs: &T, horizon: usize) -> Result<Self> {
        Ok(ReportBuilder {
            criterion: criterion.to_string(),
            digest: inputs_digest(inputs)?,
            horizon,
            clauses: Vec::new(),
            note: None,
        })
    }

    pub(crate) fn push(&mut self, c: Clause) -> &mut Self {
        self.clauses.push(c);
        self
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.note = Some(s.into());
        self
    }

    pub(crate) fn finish(self) -> CriterionReport {
        let verdict = self
            .clauses
            .iter()
            .fold(Verdict::Satisfied, |v, c| v.and(c.verdict));
        let pick = self
            .clauses
            .iter()
            .position(|c| c.verdict == Verdict::Violated)
            .or_else(|| {
                self.clauses
                    .iter()
                    .position(|c| c.verdict == Verdict::Inconclusive)
            })
            .or(self.clauses.len().checked_sub(1));
        let main = pick.map(|i| self.clauses[i].clone());
        CriterionReport {
            criterion: self.criterion,
            inputs_digest: self.digest,
            horizon: self.horizon,
            trace: main.as_ref().map(|c| c.trace.clone()).unwrap_or_default(),
            verdict,
            diagnostics: Diagnostics {
                slope: main.as_ref().and_then(|c| c.slope),
                tail_estimate: main.as_ref().and_then(|c| c.tail_estimate),
                first_failure: main.as_ref().and_then(|c| c.first_failure),
                clauses: self.clauses,
                note: self.note,
            },
        }
    }
}

/// Trace abscissae: 10 points per decade on `[1, n]`.
pub(crate) fn grid(n: usize) -> Vec<usize> {
    crate::stats::geometric_grid(n, 10)
}

/// `(n, values[n - 1])` on the trace grid.
pub(crate) fn sample(values: &[f64]) -> Vec<TracePoint> {
    grid(values.len())
        .into_iter()
        .map(|n| TracePoint::new(n, values[n - 1]))
        .collect()
}

pub(crate) fn partial_sum_trace(terms: &[f64]) -> Vec<TracePoint> {
    let g = grid(terms.len());
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    let mut k = 0;
    for n in g {
        while k < n {
            acc += terms[k];
            k += 1;
        }
        out.push(TracePoint::new(n, acc));
    }
    out
}

/// Terms `1..=n` of a sequence.
pub(crate) fn table(seq: &RealSeq, n: usize) -> Result<Vec<f64>> {
    seq.terms(1, n)
}

/// The horizon shortened to the shortest tabulated input.
pub(crate) fn fit_horizon(horizon: usize, seqs: &[&RealSeq]) -> Result<usize> {
    let h = seqs
        .iter()
        .filter_map(|s| s.last_index())
        .fold(horizon, usize::min);
    if h < 10 {
        return Err(Error::InvalidInput(format!(
            "criteria need at least 10 terms, inputs end at {h}"
        )));
    }
    Ok(h)
}

/// Prefix sums `E_n` for `n = 1..=len`.
pub(crate) fn cumsum(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// Closed-form class of `E_n = sum_{k <= n} mu_k`.
pub(crate) fn sum_class(mu: &RealSeq) -> Option<Growth> {
    mu.growth().and_then(Growth::partial_sum)
}

/// First index in `1..=n` where a sequence meant to be nonincreasing goes up.
pub(crate) fn first_increase(xs: &[f64]) -> Option<usize> {
    xs.windows(2).position(|w| w[1] > w[0]).map(|i| i + 2)
}

pub(crate) fn n_pow(p: f64) -> Growth {
    Growth::poly(1.0, p, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction() {
        use Verdict::*;
        assert_eq!(Satisfied.and(Satisfied), Satisfied);
        assert_eq!(Satisfied.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Violated), Violated);
    }

    #[test]
    fn digest_is_stable() {
        let a = inputs_digest(&serde_json::json!({"x": 1.5, "y": [1, 2]})).unwrap();
        let b = inputs_digest(&serde_json::json!({"x": 1.5, "y": [1, 2]})).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(a, inputs_digest(&serde_json::json!({"x": 1.5})).unwrap());
    }

    #[test]
    fn partial_sums_on_grid() {
        let t = partial_sum_trace(&[1.0; 100]);
        assert!(t.iter().all(|p| p.value == p.n as f64));
        assert_eq!(t.last().unwrap().n, 100);
    }

    #[test]
    fn report_picks_deciding_clause() {
        let mut b = ReportBuilder::new("x", &1, 10).unwrap();
        b.push(Clause::direct("a", true, ""));
        b.push(Clause::direct("b", false, "bad").with_first_failure(Some(3)));
        let r = b.finish();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.diagnostics.first_failure, Some(3));
        let json = r.to_json().unwrap();
        let back: CriterionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.verdict, Verdict::Violated);
        assert_eq!(back.diagnostics.clauses.len(), 2);
    }
}
