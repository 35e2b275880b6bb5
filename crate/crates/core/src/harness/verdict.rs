use serde::{Deserialize, Serialize};

use super::config::Prediction;
use super::run::{CheckpointStats, ExperimentReport};

/// Late-window hit fraction a Borel-Cantelli prediction must reach.
pub const BC_LATE_HIT_MIN: f64 = 0.8;
/// Late-window hit fraction a non-Borel-Cantelli prediction may not exceed.
pub const NOT_BC_LATE_HIT_MAX: f64 = 0.1;
/// Band of admissible mean ratios for an L1 prediction.
pub const L1_MEAN_BAND: (f64, f64) = (0.8, 1.2);
/// Floor of the per-trajectory ratio band half-width.
pub const SBC_BAND_FLOOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// The statistics cannot speak to the prediction.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub pass: bool,
}

impl Margin {
    fn new(name: &str, value: f64, bound: Bound, threshold: f64) -> Self {
        let pass = match bound {
            Bound::AtLeast => value >= threshold,
            Bound::AtMost => value <= threshold,
        };
        Margin {
            name: name.to_string(),
            value,
            bound,
            threshold,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateOutcome {
    pub prediction: Prediction,
    pub outcome: Outcome,
    pub margins: Vec<Margin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn inconclusive(prediction: Prediction, note: &str) -> AggregateOutcome {
    AggregateOutcome {
        prediction,
        outcome: Outcome::Inconclusive,
        margins: Vec::new(),
        note: Some(note.to_string()),
    }
}

/// Last checkpoint at or below `n`.
fn at_or_below(cps: &[CheckpointStats], n: u64) -> Option<&CheckpointStats> {
    cps.iter().rev().find(|c| c.n <= n)
}

/// Tests the simulated statistics against a predicted behaviour.
///
/// Borel-Cantelli needs the median count to keep growing over the last
/// decade and most trajectories to hit in it; the negation needs almost no
/// late hits. The L1 prediction needs `mean |S_n/E_n - 1|` not to grow over
/// the last two decades and the mean ratio near 1; the strong one needs the
/// 10% and 90% ratio quantiles inside `1 +- max(0.2, 4 / sqrt(E_n))`.
pub fn aggregate_verdict(report: &ExperimentReport, prediction: Prediction) -> AggregateOutcome {
    let Some(last) = report.checkpoints.last() else {
        return inconclusive(prediction, "no trajectories");
    };
    if last.e_n <= 0.0 {
        return inconclusive(prediction, "E_n = 0 at the horizon");
    }
    let mut margins = Vec::new();
    let mut note = None;
    match prediction {
        Prediction::Bc => {
            margins.push(Margin::new(
                "late hit fraction",
                last.hit_frac_late,
                Bound::AtLeast,
                BC_LATE_HIT_MIN,
            ));
            let growth = match at_or_below(&report.checkpoints, last.n / 10) {
                Some(early) => last.median_s - early.median_s,
                None => last.median_s,
            };
            // medians move in steps of 1/2
            margins.push(Margin::new(
                "median S_n growth over last decade",
                growth,
                Bound::AtLeast,
                0.5,
            ));
        }
        Prediction::NotBc => {
            margins.push(Margin::new(
                "late hit fraction",
                last.hit_frac_late,
                Bound::AtMost,
                NOT_BC_LATE_HIT_MAX,
            ));
        }
        Prediction::L1bc => {
            let (Some(dev), Some(m)) = (last.mean_abs_dev, last.mean_ratio) else {
                return inconclusive(prediction, "ratios undefined at the horizon");
            };
            margins.push(Margin::new("mean ratio", m, Bound::AtLeast, L1_MEAN_BAND.0));
            margins.push(Margin::new("mean ratio", m, Bound::AtMost, L1_MEAN_BAND.1));
            match at_or_below(&report.checkpoints, last.n / 100).and_then(|c| c.mean_abs_dev) {
                Some(early) => margins.push(Margin::new(
                    "mean |S_n/E_n - 1| change",
                    dev - early,
                    Bound::AtMost,
                    0.0,
                )),
                None => note = Some("no checkpoint two decades below the horizon".to_string()),
            }
        }
        Prediction::Sbc => {
            let (Some(q10), Some(q90)) = (last.q10, last.q90) else {
                return inconclusive(prediction, "ratios undefined at the horizon");
            };
            let w = SBC_BAND_FLOOR.max(4.0 / last.e_n.sqrt());
            margins.push(Margin::new("ratio q10", q10, Bound::AtLeast, 1.0 - w));
            margins.push(Margin::new("ratio q90", q90, Bound::AtMost, 1.0 + w));
        }
    }
    let outcome = if margins.iter().all(|m| m.pass) {
        if note.is_some() {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        }
    } else {
        Outcome::Fail
    };
    AggregateOutcome {
        prediction,
        outcome,
        margins,
        note,
    }
}
