use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    cumsum, fit_horizon, n_pow, sample, sum_class, table, Clause, CriterionReport, ReportBuilder,
    TracePoint,
};
use crate::error::{Error, Result};
use crate::intervals::{IntervalFamily, Measure};
use crate::mixing::{MixingProfile, ProfileKind};
use crate::seqcore::{Growth, RealSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TildeMode {
    /// Borel-Cantelli: positive limsup mass and summable coefficients.
    I,
    /// L1 Borel-Cantelli with an `L^q` bound on the normalized occupation.
    Ii,
    /// Strong Borel-Cantelli with an `L^q` bound.
    Iii,
    /// L1 Borel-Cantelli under uniform-type coefficients.
    Iv,
    /// Strong Borel-Cantelli under uniform-type coefficients.
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TildeParams {
    /// `sup_n E_n^{-1} || sum_{k <= n} 1_{I_k}(X_0) ||_q`, required by modes ii and iii.
    #[serde(default)]
    pub lq_bound: Option<f64>,
    /// Exponent `p >= 1`, conjugate to the `q` of `lq_bound`.
    pub p: f64,
    /// Asymptotic floor of `mu(union_{k >= m} I_k)`, required by mode i.
    #[serde(default)]
    pub limsup_floor: Option<f64>,
}

impl Default for TildeParams {
    fn default() -> Self {
        TildeParams {
            lq_bound: None,
            p: 1.0,
            limsup_floor: None,
        }
    }
}

/// `sum_{k < n} k^{p-1} c_k` for `n = 1..=len`.
fn weighted_prefix(c: &[f64], p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len());
    let mut acc = 0.0;
    for (i, x) in c.iter().enumerate() {
        out.push(acc);
        acc += ((i + 1) as f64).powf(p - 1.0) * x;
    }
    out
}

/// Criteria for interval targets from the `tilde beta` / `tilde phi` coefficients.
///
/// `mu` holds `mu(I_n)` for `n >= 1`.
pub fn check_tilde(
    profile: &MixingProfile,
    mu: &RealSeq,
    mode: TildeMode,
    params: &TildeParams,
    horizon: usize,
) -> Result<CriterionReport> {
    let uniform = matches!(mode, TildeMode::Iv | TildeMode::V);
    let kind_ok = if uniform {
        profile.kind == ProfileKind::TildePhi11
    } else {
        matches!(
            profile.kind,
            ProfileKind::TildeBeta11 | ProfileKind::TildeBetaRev | ProfileKind::TildePhi11
        )
    };
    if !kind_ok {
        return Err(Error::InvalidInput(format!(
            "{mode:?} cannot use a {:?} profile",
            profile.kind
        )));
    }
    let p = params.p;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "p must lie in [1, inf), got {p}"
        )));
    }
    let needs_lq = matches!(mode, TildeMode::Ii | TildeMode::Iii);
    if needs_lq && params.lq_bound.is_none() {
        return Err(Error::InvalidInput(format!(
            "mode {mode:?} needs an L^q bound"
        )));
    }
    if mode == TildeMode::I && params.limsup_floor.is_none() {
        return Err(Error::InvalidInput("mode I needs a limsup floor".into()));
    }

    let h = fit_horizon(horizon, &[&profile.values, mu])?;
    let c = table(&profile.values, h)?;
    let m = table(mu, h)?;
    let e = cumsum(&m);
    let cg = profile.values.growth();
    let e_class = sum_class(mu);
    let id = match mode {
        TildeMode::I => "tilde_bc",
        TildeMode::Ii => "tilde_l1",
        TildeMode::Iii => "tilde_strong",
        TildeMode::Iv => "tilde_phi_l1",
        TildeMode::V => "tilde_phi_strong",
    };
    let inputs =
        json!({"profile": profile, "mu": mu, "mode": mode, "params": params, "horizon": h});
    let mut b = ReportBuilder::new(id, &inputs, h)?;
    b.push(Clause::direct("mu(I_1) > 0", m[0] > 0.0, ""));
    b.push(Clause::divergent("sum mu(I_k) = inf", &m, mu.growth()));
    if needs_lq {
        let q = params.lq_bound.unwrap();
        b.push(Clause::direct(
            "L^q occupation bound finite",
            q.is_finite(),
            format!("bound {q}"),
        ));
    }

    match mode {
        TildeMode::I => {
            let floor = params.limsup_floor.unwrap();
            b.push(Clause::direct(
                "mu(limsup I_n) > 0",
                floor > 0.0,
                format!("floor {floor}"),
            ));
            b.push(Clause::summable("sum coefficients < inf", &c, cg));
        }
        TildeMode::Ii => {
            let w = weighted_prefix(&c, p);
            let v: Vec<TracePoint> = sample(&w)
                .into_iter()
                .filter(|t| e[t.n - 1] > 0.0)
                .map(|t| TracePoint::new(t.n, t.value / e[t.n - 1].powf(p)))
                .collect();
            let closed = weighted_class(cg, p)
                .zip(e_class)
                .map(|(s, en)| s.times(en.powf(-p)));
            b.push(Clause::to_zero(
                "E_n^-p sum k^(p-1) coefficient_k -> 0",
                v,
                closed,
            ));
        }
        TildeMode::Iii => {
            let w = weighted_prefix(&c, p);
            let t: Vec<f64> = (0..h)
                .map(|i| {
                    if e[i] > 0.0 {
                        m[i] / (e[i] * e[i]) * w[i].powf(1.0 / p)
                    } else {
                        0.0
                    }
                })
                .collect();
            let closed = weighted_class(cg, p)
                .zip(e_class)
                .zip(mu.growth())
                .map(|((s, en), g)| g.times(en.powf(-2.0)).times(s.powf(1.0 / p)));
            b.push(Clause::summable(
                "sum mu(I_n) E_n^-2 (sum k^(p-1) coefficient_k)^(1/p) < inf",
                &t,
                closed,
            ));
        }
        TildeMode::Iv => {
            let w = weighted_prefix(&c, 1.0);
            let v: Vec<TracePoint> = sample(&w)
                .into_iter()
                .filter(|t| e[t.n - 1] > 0.0)
                .map(|t| TracePoint::new(t.n, t.value / e[t.n - 1]))
                .collect();
            let closed = weighted_class(cg, 1.0)
                .zip(e_class)
                .map(|(s, en)| s.times(en.recip()));
            b.push(Clause::to_zero("E_n^-1 sum phi_k -> 0", v, closed));
        }
        TildeMode::V => {
            let t: Vec<f64> = c
                .iter()
                .zip(&e)
                .map(|(x, en)| if *en > 0.0 { x / en } else { 0.0 })
                .collect();
            let closed = cg.zip(e_class).map(|(x, en)| x.times(en.recip()));
            b.push(Clause::summable("sum phi_n/E_n < inf", &t, closed));
        }
    }
    Ok(b.finish())
}

/// Class of `n -> sum_{k < n} k^{p-1} c_k`.
fn weighted_class(c: Option<Growth>, p: f64) -> Option<Growth> {
    c.and_then(|g| g.times(n_pow(p - 1.0)).partial_sum())
}

/// Nested targets for a split chain: the family is nested and `sum nu(A_k)`
/// diverges, with `nu` the regeneration law.
pub fn check_harris_nested(
    family: &IntervalFamily,
    nu: &dyn Measure,
    horizon: usize,
) -> Result<CriterionReport> {
    let h = family.horizon().map_or(horizon, |fh| fh.min(horizon));
    if h < 10 {
        return Err(Error::InvalidInput(format!(
            "harris criterion needs at least 10 sets, got {h}"
        )));
    }
    let targets = family.materialize(h)?;
    let nested_upto = targets.windows(2).position(|w| !w[1].is_subset_of(&w[0]));
    let masses: Vec<f64> = targets.iter().map(|iv| nu.interval(iv)).collect();
    let mut b = ReportBuilder::new(
        "harris_nested",
        &json!({"family": family, "nu_masses": sample(&masses), "horizon": h}),
        h,
    )?;
    b.push(
        Clause::direct("A_{k+1} subset of A_k", nested_upto.is_none(), "")
            .with_first_failure(nested_upto.map(|i| i + 2)),
    );
    b.push(Clause::divergent("sum nu(A_k) = inf", &masses, None));
    Ok(b.finish())
}
