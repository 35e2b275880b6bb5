use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    cumsum, first_increase, fit_horizon, n_pow, sample, sum_class, table, Clause, CriterionReport,
    ReportBuilder, TracePoint,
};
use crate::error::{Error, Result};
use crate::seqcore::RealSeq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseMode {
    /// L1 Borel-Cantelli: all three averages tend to 0.
    L1,
    /// Strong Borel-Cantelli: all three series converge.
    Strong,
}

/// Fenwick tree over value ranks holding counts and sums.
struct Fenwick {
    count: Vec<u64>,
    sum: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            count: vec![0; n + 1],
            sum: vec![0.0; n + 1],
        }
    }

    fn add(&mut self, rank: usize, v: f64) {
        let mut i = rank + 1;
        while i < self.count.len() {
            self.count[i] += 1;
            self.sum[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Count and sum over ranks `< rank`.
    fn prefix(&self, rank: usize) -> (u64, f64) {
        let (mut c, mut s) = (0, 0.0);
        let mut i = rank;
        while i > 0 {
            c += self.count[i];
            s += self.sum[i];
            i -= i & i.wrapping_neg();
        }
        (c, s)
    }
}

/// `D_k = sum_{j <= k} min(alpha_j, p_k)` for every `k`, in `O(n log n)`.
pub(crate) fn min_sums(alpha: &[f64], p: &[f64]) -> Vec<f64> {
    let mut sorted = alpha.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let rank = |x: f64| sorted.partition_point(|&v| v < x);
    let mut fw = Fenwick::new(sorted.len());
    let mut out = Vec::with_capacity(alpha.len());
    for (k, (&a, &pk)) in alpha.iter().zip(p).enumerate() {
        fw.add(rank(a), a);
        // alpha_j <= p_k contributes alpha_j, larger ones contribute p_k
        let (c, s) = fw.prefix(sorted.partition_point(|&v| v <= pk));
        let above = (k as u64 + 1) - c;
        out.push(s + above as f64 * pk);
    }
    out
}

fn check_unit(name: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidInput(format!(
            "{name}_{} = {} outside [0, 1]",
            i + 1,
            v[i]
        )));
    }
    Ok(())
}

/// Criteria from a covariance bound
/// `|P(B_k B_{k+n}) - P(B_k)P(B_{k+n})| <= gamma_n P(B_k)P(B_{k+n}) + phi_n (P(B_k) + P(B_{k+n})) + alpha_n`.
pub fn check_pairwise(
    gamma: &RealSeq,
    phi: &RealSeq,
    alpha: &RealSeq,
    p: &RealSeq,
    mode: PairwiseMode,
    horizon: usize,
) -> Result<CriterionReport> {
    let h = fit_horizon(horizon, &[gamma, phi, alpha, p])?;
    let (g, f, a, pv) = (
        table(gamma, h)?,
        table(phi, h)?,
        table(alpha, h)?,
        table(p, h)?,
    );
    for (name, v) in [("gamma", &g), ("phi", &f), ("alpha", &a), ("P(B)", &pv)] {
        check_unit(name, v)?;
    }
    if let Some(k) = first_increase(&g) {
        return Err(Error::InvalidInput(format!(
            "gamma must be nonincreasing, rises at n = {k}"
        )));
    }
    let e = cumsum(&pv);
    let d = min_sums(&a, &pv);
    let id = match mode {
        PairwiseMode::L1 => "pairwise_l1",
        PairwiseMode::Strong => "pairwise_strong",
    };
    let inputs =
        json!({"gamma": gamma, "phi": phi, "alpha": alpha, "p": p, "mode": mode, "horizon": h});
    let mut b = ReportBuilder::new(id, &inputs, h)?;
    let e_class = sum_class(p);
    b.push(Clause::divergent("sum P(B_k) = inf", &pv, p.growth()));

    match mode {
        PairwiseMode::L1 => {
            b.push(Clause::to_zero("gamma_n -> 0", sample(&g), gamma.growth()));
            let phi_avg: Vec<f64> = cumsum(&f).iter().zip(&e).map(|(s, en)| s / en).collect();
            let closed = phi
                .growth()
                .and_then(|x| x.partial_sum())
                .zip(e_class)
                .map(|(s, en)| s.times(en.recip()));
            b.push(Clause::to_zero(
                "E_n^-1 sum phi_k -> 0",
                positive_e(&phi_avg, &e),
                closed,
            ));
            let dd: Vec<f64> = cumsum(&d)
                .iter()
                .zip(&e)
                .map(|(s, en)| s / (en * en))
                .collect();
            b.push(Clause::to_zero(
                "E_n^-2 sum_k sum_j min(alpha_j, P(B_k)) -> 0",
                positive_e(&dd, &e),
                None,
            ));
        }
        PairwiseMode::Strong => {
            let gt: Vec<f64> = g
                .iter()
                .enumerate()
                .map(|(i, x)| x / (i + 1) as f64)
                .collect();
            b.push(Clause::summable(
                "sum gamma_k/k < inf",
                &gt,
                gamma.growth().map(|x| x.times(n_pow(-1.0))),
            ));
            let ft: Vec<f64> = f
                .iter()
                .zip(&e)
                .map(|(x, en)| if *en > 0.0 { x / en } else { 0.0 })
                .collect();
            let closed = phi.growth().zip(e_class).map(|(x, en)| x.times(en.recip()));
            b.push(Clause::summable("sum phi_k/E_k < inf", &ft, closed));
            let dt: Vec<f64> = d
                .iter()
                .zip(&e)
                .map(|(x, en)| if *en > 0.0 { x / (en * en) } else { 0.0 })
                .collect();
            b.push(Clause::summable(
                "sum E_k^-2 sum_j min(alpha_j, P(B_k)) < inf",
                &dt,
                None,
            ));
        }
    }
    Ok(b.finish())
}

/// Trace of a ratio with denominator `E_n`, skipping indices where `E_n = 0`.
fn positive_e(ratio: &[f64], e: &[f64]) -> Vec<TracePoint> {
    sample(ratio)
        .into_iter()
        .filter(|p| e[p.n - 1] > 0.0)
        .collect()
}
