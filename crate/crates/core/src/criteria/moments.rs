use serde::{Deserialize, Serialize};
use serde_json::json;

use super::rules::{relative_to_zero, trend_rule};
use super::{
    fit_horizon, sample, table, Clause, CriterionReport, ReportBuilder, TracePoint, Verdict,
};
use crate::error::{Error, Result};
use crate::processes::HitRecord;
use crate::seqcore::{f_eval, RealSeq};
use crate::stats::{mean, variance};

/// Fewest Monte Carlo paths accepted by [`check_f_criteria`].
pub const MIN_PATHS: usize = 100;

/// Hit counts `S_n` of many trajectories on a shared checkpoint grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSamples {
    pub checkpoints: Vec<usize>,
    /// `paths[t][i]` is `S` of trajectory `t` at `checkpoints[i]`.
    pub paths: Vec<Vec<f64>>,
}

impl PathSamples {
    pub fn new(checkpoints: Vec<usize>, paths: Vec<Vec<f64>>) -> Result<Self> {
        if checkpoints.is_empty()
            || checkpoints[0] == 0
            || checkpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidInput(
                "checkpoints must be positive and strictly increasing".into(),
            ));
        }
        if let Some(t) = paths.iter().position(|p| p.len() != checkpoints.len()) {
            return Err(Error::InvalidInput(format!(
                "path {t} has {} values for {} checkpoints",
                paths[t].len(),
                checkpoints.len()
            )));
        }
        Ok(PathSamples { checkpoints, paths })
    }

    pub fn from_records(records: &[HitRecord]) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::TooFewSamples { got: 0, need: 1 });
        };
        let checkpoints: Vec<usize> = first.checkpoints.iter().map(|c| c.0 as usize).collect();
        let paths = records
            .iter()
            .map(|r| {
                if r.checkpoints.len() != checkpoints.len()
                    || r.checkpoints
                        .iter()
                        .zip(&checkpoints)
                        .any(|(a, &b)| a.0 as usize != b)
                {
                    return Err(Error::InvalidInput(format!(
                        "trajectory {} uses a different checkpoint grid",
                        r.trajectory
                    )));
                }
                Ok(r.checkpoints.iter().map(|c| c.1 as f64).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(checkpoints, paths)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    fn column(&self, i: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p[i]).collect()
    }

    /// `E((S_n - E_n)^2) / E_n^2` at each checkpoint with a 3-sigma error bar.
    pub fn l2_trace(&self, e: &RealSeq) -> Result<Vec<TracePoint>> {
        self.moment_trace(e, |x| x * x)
    }

    /// `E f((S_n - E_n) / E_n)` at each checkpoint with a 3-sigma error bar.
    pub fn f_trace(&self, e: &RealSeq) -> Result<Vec<TracePoint>> {
        self.moment_trace(e, f_eval)
    }

    fn moment_trace(&self, e: &RealSeq, g: impl Fn(f64) -> f64) -> Result<Vec<TracePoint>> {
        let mut out = Vec::new();
        for (i, &n) in self.checkpoints.iter().enumerate() {
            let en = e.get(n)?;
            if en <= 0.0 {
                continue;
            }
            let vals: Vec<f64> = self.column(i).iter().map(|s| g((s - en) / en)).collect();
            let err = 3.0 * (variance(&vals) / vals.len() as f64).sqrt();
            out.push(TracePoint {
                n,
                value: mean(&vals),
                error: Some(err),
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    /// Triangular sub-family: the paths and `E` describe `g_{j,n} <= 1_{B_j}` on a subsequence.
    Triangular,
    /// `E f((S_n - E_n)/E_n) -> 0`.
    L1,
    /// `sum_n P(B_n)/E_n sup_{k <= n} E f((S_k - E_k)/E_n) < infinity`.
    Strong,
    /// `sum_n E_n^{-3} P(B_n) sup_{k <= n} Var(S_k) < infinity`.
    Variance,
}

impl FMode {
    fn id(self) -> &'static str {
        match self {
            FMode::Triangular => "f_criteria_triangular",
            FMode::L1 => "f_criteria_l1",
            FMode::Strong => "f_criteria_strong",
            FMode::Variance => "f_criteria_variance",
        }
    }
}

/// Erdos-Renyi second-moment criterion: `E_n -> infinity` and `Var(S_n)/E_n^2 -> 0`.
///
/// `e` and `var` are indexed by `n >= 1`.
pub fn check_l2(e: &RealSeq, var: &RealSeq, horizon: usize) -> Result<CriterionReport> {
    if let (Some(a), Some(b)) = (e.last_index(), var.last_index()) {
        if !e.is_closed() && !var.is_closed() && a != b {
            return Err(Error::InvalidInput(format!(
                "E has {a} terms but the variance model has {b}"
            )));
        }
    }
    let h = fit_horizon(horizon, &[e, var])?;
    let ev = table(e, h)?;
    if let Some(k) = ev.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(format!(
            "E must be nondecreasing, drops at n = {}",
            k + 2
        )));
    }
    let vv = table(var, h)?;
    let mut b = ReportBuilder::new("l2", &json!({"e": e, "var": var, "horizon": h}), h)?;
    b.push(Clause::to_infinity("E_n -> inf", sample(&ev), e.growth()));
    let ratio: Vec<TracePoint> = sample(&ev)
        .into_iter()
        .filter(|p| p.value > 0.0)
        .map(|p| TracePoint::new(p.n, vv[p.n - 1] / (p.value * p.value)))
        .collect();
    let closed = e
        .growth()
        .zip(var.growth())
        .map(|(ge, gv)| gv.times(ge.powf(-2.0)));
    b.push(Clause::to_zero("Var(S_n)/E_n^2 -> 0", ratio, closed));
    Ok(b.finish())
}

/// Criteria built on `f(x) = min(x^2/2, |x| - 1/2)` evaluated on Monte Carlo paths.
///
/// `e` holds `E_n = E S_n` for `n >= 1` and must cover the last checkpoint.
pub fn check_f_criteria(
    samples: &PathSamples,
    e: &RealSeq,
    mode: FMode,
) -> Result<CriterionReport> {
    if samples.len() < MIN_PATHS {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: MIN_PATHS,
        });
    }
    let h = *samples.checkpoints.last().unwrap();
    let ev = table(e, h)?;
    let mut b = ReportBuilder::new(
        mode.id(),
        &json!({"samples": samples, "e": e, "mode": mode}),
        h,
    )?;
    let ec: Vec<TracePoint> = samples
        .checkpoints
        .iter()
        .map(|&n| TracePoint::new(n, ev[n - 1]))
        .collect();
    let e_inf = Clause::to_infinity("E_n -> inf", ec, e.growth());
    let e_diverges = e_inf.verdict == Verdict::Satisfied;
    b.push(e_inf);

    match mode {
        FMode::Triangular | FMode::L1 => {
            let trace = samples.f_trace(e)?;
            let name = "E f((S_n - E_n)/E_n) -> 0";
            let fit = trend_rule(&trace);
            let mut verdict = fit.judge_to_zero();
            let mut clause_fit = fit;
            if verdict == Verdict::Inconclusive && e_diverges {
                let (v, s) = relative_to_zero(&trace, |n| ev[n - 1]);
                verdict = v;
                clause_fit.slope = s;
                b.note("decay measured against E_n");
            }
            b.push(Clause::from_fit(name, trace, &clause_fit, verdict));
        }
        FMode::Strong | FMode::Variance => {
            let terms = series_terms(samples, &ev, mode)?;
            b.push(block_series_clause(mode, &samples.checkpoints, &terms));
        }
    }
    Ok(b.finish())
}

/// Block contributions to the strong-mode series, one per checkpoint interval.
///
/// Within `(c_{i-1}, c_i]` the supremum is taken over checkpoints `<= c_i`
/// and normalized by `E_{c_i}`.
fn series_terms(samples: &PathSamples, ev: &[f64], mode: FMode) -> Result<Vec<f64>> {
    let cps = &samples.checkpoints;
    let cols: Vec<Vec<f64>> = (0..cps.len()).map(|i| samples.column(i)).collect();
    let vars: Vec<f64> = cols.iter().map(|c| variance(c)).collect();
    let mut out = Vec::with_capacity(cps.len());
    let mut prev = 0usize;
    for (i, &c) in cps.iter().enumerate() {
        let en = ev[c - 1];
        let mut weight = 0.0;
        for n in prev + 1..=c {
            let e_n = ev[n - 1];
            if e_n > 0.0 {
                let p = e_n - if n > 1 { ev[n - 2] } else { 0.0 };
                weight += match mode {
                    FMode::Strong => p / e_n,
                    _ => p / (e_n * e_n * e_n),
                };
            }
        }
        let sup = if en <= 0.0 {
            0.0
        } else {
            (0..=i)
                .map(|j| match mode {
                    FMode::Strong => {
                        let ej = ev[cps[j] - 1];
                        mean(
                            &cols[j]
                                .iter()
                                .map(|s| f_eval((s - ej) / en))
                                .collect::<Vec<_>>(),
                        )
                    }
                    _ => vars[j],
                })
                .fold(0.0, f64::max)
        };
        out.push(weight * sup);
        prev = c;
    }
    Ok(out)
}

fn block_series_clause(mode: FMode, cps: &[usize], blocks: &[f64]) -> Clause {
    let name = match mode {
        FMode::Strong => "sum P(B_n)/E_n sup_k E f((S_k - E_k)/E_n) < inf",
        _ => "sum P(B_n) E_n^-3 sup_k Var(S_k) < inf",
    };
    let mut acc = 0.0;
    let trace: Vec<TracePoint> = cps
        .iter()
        .zip(blocks)
        .map(|(&n, t)| {
            acc += t;
            TracePoint::new(n, acc)
        })
        .collect();
    // per-index size of each block for the tail fit
    let mut prev = 0;
    let per_index: Vec<TracePoint> = cps
        .iter()
        .zip(blocks)
        .map(|(&n, t)| {
            let p = TracePoint::new(n, t / (n - prev) as f64);
            prev = n;
            p
        })
        .collect();
    let fit = super::rules::tail_rule(&per_index);
    let verdict = match fit.verdict {
        super::rules::Summability::Convergent => Verdict::Satisfied,
        super::rules::Summability::Divergent => Verdict::Violated,
        super::rules::Summability::Inconclusive => Verdict::Inconclusive,
    };
    let mut c = Clause::from_fit(
        name,
        trace,
        &super::rules::TrendFit {
            trend: super::rules::Trend::Inconclusive,
            slope: fit.slope,
        },
        verdict,
    );
    c.method = super::Method::Tail;
    c.tail_estimate = fit.tail;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::IntervalFamily;
    use crate::processes::{simulate_targets, ProcessSpec, SimOptions};

    fn iid_paths(n: usize, count: u64) -> PathSamples {
        let fam = IntervalFamily::nested_left(RealSeq::power(1.0, -1.0));
        let t = fam.materialize(n).unwrap();
        let spec = ProcessSpec::iid_uniform();
        let recs: Vec<HitRecord> = (0..count)
            .map(|i| simulate_targets(&spec, &t, 5, i, &SimOptions::default()).unwrap())
            .collect();
        PathSamples::from_records(&recs).unwrap()
    }

    fn harmonic(n: usize) -> RealSeq {
        let mut acc = 0.0;
        RealSeq::tabulated(
            1,
            (1..=n)
                .map(|k| {
                    acc += 1.0 / k as f64;
                    acc
                })
                .collect(),
        )
    }

    #[test]
    fn l2_log_example() {
        let e = RealSeq::power_log(1.0, 0.0, 1.0);
        let r = check_l2(&e, &e, 100_000).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        // Var/E^2 = 1/ln(n + 1)
        let last = r.trace.last().unwrap();
        assert!((last.value - 1.0 / 100_001f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn l2_bounded_and_proportional() {
        let r = check_l2(&RealSeq::constant(5.0), &RealSeq::constant(1.0), 1000).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.clause("E_n -> inf").unwrap().verdict, Verdict::Violated);
        let e = RealSeq::power(1.0, 1.0);
        let r = check_l2(&e, &RealSeq::power(1.0, 2.0), 1000).unwrap();
        assert_eq!(
            r.clause("Var(S_n)/E_n^2 -> 0").unwrap().verdict,
            Verdict::Violated
        );
        let tab = |v: f64| RealSeq::tabulated(1, (1..=1000).map(|k| v * k as f64).collect());
        let r = check_l2(
            &tab(1.0),
            &RealSeq::tabulated(1, (1..=1000).map(|k| (k * k) as f64).collect()),
            1000,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn l2_length_mismatch() {
        let a = RealSeq::tabulated(1, vec![1.0; 20]);
        let b = RealSeq::tabulated(1, vec![1.0; 30]);
        assert!(check_l2(&a, &b, 100).is_err());
    }

    #[test]
    fn f_mode_ii_iid_harmonic() {
        let n = 100_000;
        let s = iid_paths(n, 200);
        let e = RealSeq::power_sum(1.0, -1.0);
        let r = check_f_criteria(&s, &e, FMode::L1).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied, "{:?}", r.diagnostics);
        let f = s.f_trace(&e).unwrap();
        let l2 = s.l2_trace(&e).unwrap();
        for (a, b) in f.iter().zip(&l2) {
            assert!(a.value <= b.value / 2.0 + 1e-15);
        }
        // f-trace close to 1/(2 E_n)
        let last = f.last().unwrap();
        let target = 0.5 / e.get(n).unwrap();
        assert!(
            (last.value - target).abs() < last.error.unwrap() + 0.01,
            "{} vs {target}",
            last.value
        );
    }

    #[test]
    fn f_constant_family() {
        let cps = crate::stats::geometric_grid(10_000, 10);
        let paths = vec![cps.iter().map(|&c| c as f64).collect::<Vec<_>>(); 100];
        let s = PathSamples::new(cps, paths).unwrap();
        let e = RealSeq::power(1.0, 1.0);
        let r = check_f_criteria(&s, &e, FMode::L1).unwrap();
        assert!(r.trace.iter().all(|p| p.value == 0.0));
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert_eq!(
            check_f_criteria(&s, &e, FMode::Strong).unwrap().verdict,
            Verdict::Satisfied
        );
    }

    #[test]
    fn f_two_point_law() {
        // S_n in {0, n} with equal probability, E_n = n/2
        let cps = crate::stats::geometric_grid(10_000, 10);
        let paths: Vec<Vec<f64>> = (0..100)
            .map(|t| {
                cps.iter()
                    .map(|&c| if t % 2 == 0 { 0.0 } else { c as f64 })
                    .collect()
            })
            .collect();
        let s = PathSamples::new(cps, paths).unwrap();
        let r = check_f_criteria(&s, &RealSeq::power(0.5, 1.0), FMode::L1).unwrap();
        assert!(r.trace.iter().all(|p| (p.value - 0.5).abs() < 1e-12));
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn f_too_few_paths() {
        let s = PathSamples::new(vec![1, 2], vec![vec![0.0, 1.0]; 10]).unwrap();
        assert!(matches!(
            check_f_criteria(&s, &RealSeq::constant(1.0), FMode::L1),
            Err(Error::TooFewSamples { got: 10, need: 100 })
        ));
    }

    #[test]
    fn variance_mode_runs_on_iid() {
        let n = 20_000;
        let s = iid_paths(n, 100);
        let r = check_f_criteria(&s, &harmonic(n), FMode::Variance).unwrap();
        assert_ne!(r.verdict, Verdict::Violated);
        assert!(r.trace.windows(2).all(|w| w[1].value >= w[0].value));
    }
}
