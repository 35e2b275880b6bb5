use serde::{Deserialize, Serialize};

use super::growth::Growth;
use crate::error::{Error, Result};

/// Closed-form sequence templates. Power-type templates clamp the index to
/// `n >= 1` so that `v_0 = v_1`; the asymptotic class is unaffected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum SeqTemplate {
    /// `c * n^p`
    Power { c: f64, p: f64 },
    /// `c * n^p * ln(n + 1)^q`
    PowerLog { c: f64, p: f64, q: f64 },
    /// `c * rate^n`
    Geometric { c: f64, rate: f64 },
    /// `c * sum_{k=1}^n k^p`, zero at `n = 0`
    PowerSum { c: f64, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqKind {
    Closed(SeqTemplate),
    /// `values[i]` is the term of index `start + i`.
    Tabulated {
        start: usize,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    NonIncreasing,
    NonDecreasing,
    #[default]
    None,
}

/// A nonnegative real sequence, closed-form or tabulated.
///
/// Closed forms read without a `monotone` field get the template's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawRealSeq")]
pub struct RealSeq {
    #[serde(flatten)]
    pub kind: SeqKind,
    /// Last valid index for closed forms; tabulated sequences end with their table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub monotone: Monotone,
}

#[derive(Deserialize)]
struct RawRealSeq {
    #[serde(flatten)]
    kind: SeqKind,
    #[serde(default)]
    horizon: Option<usize>,
    #[serde(default)]
    monotone: Option<Monotone>,
}

impl From<RawRealSeq> for RealSeq {
    fn from(raw: RawRealSeq) -> Self {
        let monotone = raw.monotone.unwrap_or(match &raw.kind {
            SeqKind::Closed(t) => closed_monotone(t),
            SeqKind::Tabulated { .. } => Monotone::None,
        });
        RealSeq {
            kind: raw.kind,
            horizon: raw.horizon,
            monotone,
        }
    }
}

/// Result of a generalized inverse: an index or the empty-set sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqIndex {
    Finite(usize),
    Infinite,
}

impl SeqIndex {
    pub fn finite(self) -> Option<usize> {
        match self {
            SeqIndex::Finite(n) => Some(n),
            SeqIndex::Infinite => None,
        }
    }
}

fn closed_monotone(t: &SeqTemplate) -> Monotone {
    match *t {
        SeqTemplate::Power { c, p } if c >= 0.0 => {
            if p <= 0.0 {
                Monotone::NonIncreasing
            } else {
                Monotone::NonDecreasing
            }
        }
        SeqTemplate::PowerLog { c, p, q } if c >= 0.0 => {
            if p <= 0.0 && q <= 0.0 {
                Monotone::NonIncreasing
            } else if p >= 0.0 && q >= 0.0 {
                Monotone::NonDecreasing
            } else {
                Monotone::None
            }
        }
        SeqTemplate::Geometric { c, rate } if c >= 0.0 => {
            if rate <= 1.0 {
                Monotone::NonIncreasing
            } else {
                Monotone::NonDecreasing
            }
        }
        SeqTemplate::PowerSum { c, .. } if c >= 0.0 => Monotone::NonDecreasing,
        _ => Monotone::None,
    }
}

const DIRECT_SUM_LIMIT: usize = 64;

/// `sum_{k=1}^n k^p`: exact up to `DIRECT_SUM_LIMIT`, Euler-Maclaurin beyond.
fn power_sum(n: usize, p: f64) -> f64 {
    let direct = |m: usize| (1..=m).map(|k| (k as f64).powf(p)).sum::<f64>();
    if n <= DIRECT_SUM_LIMIT {
        return direct(n);
    }
    let a = DIRECT_SUM_LIMIT as f64;
    let b = n as f64;
    let integral = if (p + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    };
    let d1 = p * (b.powf(p - 1.0) - a.powf(p - 1.0)) / 12.0;
    let d3 = p * (p - 1.0) * (p - 2.0) * (b.powf(p - 3.0) - a.powf(p - 3.0)) / 720.0;
    direct(DIRECT_SUM_LIMIT) + integral + (b.powf(p) - a.powf(p)) / 2.0 + d1 - d3
}

impl RealSeq {
    pub fn closed(t: SeqTemplate) -> Self {
        let monotone = closed_monotone(&t);
        RealSeq {
            kind: SeqKind::Closed(t),
            horizon: None,
            monotone,
        }
    }

    pub fn power(c: f64, p: f64) -> Self {
        Self::closed(SeqTemplate::Power { c, p })
    }

    pub fn power_log(c: f64, p: f64, q: f64) -> Self {
        Self::closed(SeqTemplate::PowerLog { c, p, q })
    }

    pub fn geometric(c: f64, rate: f64) -> Self {
        Self::closed(SeqTemplate::Geometric { c, rate })
    }

    pub fn power_sum(c: f64, p: f64) -> Self {
        Self::closed(SeqTemplate::PowerSum { c, p })
    }

    pub fn constant(c: f64) -> Self {
        Self::power(c, 0.0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn tabulated(start: usize, values: Vec<f64>) -> Self {
        RealSeq {
            kind: SeqKind::Tabulated { start, values },
            horizon: None,
            monotone: Monotone::None,
        }
    }

    pub fn with_monotone(mut self, m: Monotone) -> Self {
        self.monotone = m;
        self
    }

    pub fn with_horizon(mut self, h: usize) -> Self {
        self.horizon = Some(h);
        self
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, SeqKind::Closed(_))
    }

    /// Last index that can be evaluated, if finite.
    pub fn last_index(&self) -> Option<usize> {
        match &self.kind {
            SeqKind::Closed(_) => self.horizon,
            SeqKind::Tabulated { start, values } => {
                let end = (start + values.len()).checked_sub(1);
                match (end, self.horizon) {
                    (Some(e), Some(h)) => Some(e.min(h)),
                    (e, _) => e,
                }
            }
        }
    }

    fn raw(&self, n: usize) -> Result<f64> {
        let v = match &self.kind {
            SeqKind::Closed(t) => {
                if let Some(h) = self.horizon {
                    if n > h {
                        return Err(Error::HorizonExhausted { last: h });
                    }
                }
                let m = n.max(1) as f64;
                match *t {
                    SeqTemplate::Power { c, p } => {
                        if c == 0.0 {
                            0.0
                        } else {
                            c * m.powf(p)
                        }
                    }
                    SeqTemplate::PowerLog { c, p, q } => {
                        if c == 0.0 {
                            0.0
                        } else {
                            c * m.powf(p) * (m + 1.0).ln().powf(q)
                        }
                    }
                    SeqTemplate::Geometric { c, rate } => c * rate.powf(n as f64),
                    SeqTemplate::PowerSum { c, p } => {
                        if c == 0.0 {
                            0.0
                        } else {
                            c * power_sum(n, p)
                        }
                    }
                }
            }
            SeqKind::Tabulated { start, values } => {
                if n < *start {
                    return Err(Error::InvalidInput(format!(
                        "index {n} precedes table start {start}"
                    )));
                }
                match values.get(n - start) {
                    Some(v) => *v,
                    None => {
                        return Err(Error::HorizonExhausted {
                            last: (start + values.len()).saturating_sub(1),
                        })
                    }
                }
            }
        };
        Ok(v)
    }

    /// Term of index `n`; every evaluated term is finite and nonnegative.
    pub fn get(&self, n: usize) -> Result<f64> {
        let v = self.raw(n)?;
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidTerm { index: n, value: v })
        }
    }

    /// Terms `from..=to`.
    pub fn terms(&self, from: usize, to: usize) -> Result<Vec<f64>> {
        (from..=to).map(|n| self.get(n)).collect()
    }

    /// Asymptotic class for closed forms.
    pub fn growth(&self) -> Option<Growth> {
        match &self.kind {
            SeqKind::Closed(SeqTemplate::Power { c, p }) => Some(Growth::poly(*c, *p, 0.0)),
            SeqKind::Closed(SeqTemplate::PowerLog { c, p, q }) => Some(Growth::poly(*c, *p, *q)),
            SeqKind::Closed(SeqTemplate::Geometric { c, rate }) => Some(if *c == 0.0 {
                Growth::Zero
            } else {
                Growth::Geometric {
                    coef: Some(*c),
                    rate: *rate,
                }
            }),
            SeqKind::Closed(SeqTemplate::PowerSum { c, p }) => {
                Growth::poly(*c, *p, 0.0).partial_sum()
            }
            SeqKind::Tabulated { .. } => None,
        }
    }

    /// Checks the declared monotonicity on `from..=to`.
    pub fn check_monotone(&self, from: usize, to: usize) -> Result<bool> {
        let terms = self.terms(from, to)?;
        Ok(match self.monotone {
            Monotone::NonIncreasing => terms.windows(2).all(|w| w[1] <= w[0]),
            Monotone::NonDecreasing => terms.windows(2).all(|w| w[1] >= w[0]),
            Monotone::None => true,
        })
    }
}

/// Prefix sums `E_n = sum_{k=1}^n v_k` for `n = 1..=n_max`, tabulated from index 1.
pub fn partial_sums(v: &RealSeq, n_max: usize) -> Result<RealSeq> {
    if n_max == 0 {
        return Err(Error::InvalidInput("partial_sums needs n >= 1".into()));
    }
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        acc += v.get(k)?;
        if !acc.is_finite() {
            return Err(Error::Overflow { index: k });
        }
        out.push(acc);
    }
    Ok(RealSeq::tabulated(1, out).with_monotone(Monotone::NonDecreasing))
}

/// `v^{-1}(u) = inf { n >= 0 : v_n <= u }` for a nonincreasing sequence.
///
/// Closed forms that never reach `u` give [`SeqIndex::Infinite`]; a table that
/// ends first gives [`Error::HorizonExhausted`].
pub fn inverse_sequence(v: &RealSeq, u: f64) -> Result<SeqIndex> {
    if !(u >= 0.0) {
        return Err(Error::InvalidInput(format!("level {u} must be >= 0")));
    }
    if v.monotone == Monotone::NonDecreasing {
        return Err(Error::InvalidInput(
            "inverse_sequence needs a nonincreasing sequence".into(),
        ));
    }
    // a table starting after 0 treats the missing leading terms as above every level
    let leading = match &v.kind {
        SeqKind::Tabulated { start, .. } if *start > 0 => None,
        _ => Some(v.get(0)?),
    };
    if leading.is_some_and(|v0| v0 <= u) {
        return Ok(SeqIndex::Finite(0));
    }
    match &v.kind {
        SeqKind::Tabulated { start, values } => {
            // the table is nonincreasing, so the qualifying set is a suffix
            let first = values.partition_point(|&x| x > u);
            if first < values.len() {
                Ok(SeqIndex::Finite(start + first))
            } else {
                Err(Error::HorizonExhausted {
                    last: (start + values.len()).saturating_sub(1),
                })
            }
        }
        SeqKind::Closed(_) => {
            let g = v.growth().expect("closed forms have a class");
            if !g.tends_to_zero() {
                // the limit is a positive constant or infinity; compare u with the infimum
                let limit = match g {
                    Growth::Poly {
                        coef: Some(c),
                        p,
                        q,
                        ..
                    } if p == 0.0 && q == 0.0 => c,
                    Growth::Geometric {
                        coef: Some(c),
                        rate: 1.0,
                    } => c,
                    _ => f64::INFINITY,
                };
                if limit > u {
                    return Ok(SeqIndex::Infinite);
                }
            }
            // doubling then bisection on the monotone predicate v_n <= u
            let mut hi: usize = 1;
            loop {
                if let Some(h) = v.horizon {
                    if hi > h {
                        hi = h;
                        if v.get(hi)? > u {
                            return Err(Error::HorizonExhausted { last: h });
                        }
                        break;
                    }
                }
                if v.get(hi)? <= u {
                    break;
                }
                hi = hi
                    .checked_mul(2)
                    .filter(|&x| x < (1usize << 62))
                    .ok_or(Error::IndexOverflow { level: u })?;
            }
            let mut lo = hi / 2; // v_lo > u (or lo = 0, already checked)
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if v.get(mid)? <= u {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(SeqIndex::Finite(hi))
        }
    }
}
