use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criteria::{AlphaMode, AlphaParams, FMode, PairwiseMode, TildeMode, TildeParams};
use crate::error::{Error, Result};
use crate::intervals::IntervalFamily;
use crate::mixing::MixingProfile;
use crate::processes::{Law, ProcessSpec};
use crate::seqcore::RealSeq;
use crate::stats::geometric_grid;

/// Smallest admissible horizon.
pub const MIN_HORIZON: usize = 100;

/// Behaviour a simulation is expected to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    /// Infinitely many hits.
    Bc,
    /// Finitely many hits.
    NotBc,
    /// `S_n / E_n -> 1` in mean.
    L1bc,
    /// `S_n / E_n -> 1` along every trajectory.
    Sbc,
}

/// A criterion evaluation requested alongside an experiment, or on its own.
///
/// A missing `horizon` falls back to the experiment horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CriterionSpec {
    L2 {
        e: RealSeq,
        var: RealSeq,
        #[serde(default)]
        horizon: Option<usize>,
    },
    Pairwise {
        gamma: RealSeq,
        phi: RealSeq,
        alpha: RealSeq,
        p: RealSeq,
        mode: PairwiseMode,
        #[serde(default)]
        horizon: Option<usize>,
    },
    Alpha {
        profile: MixingProfile,
        mu: RealSeq,
        mode: AlphaMode,
        #[serde(default)]
        params: AlphaParams,
        #[serde(default)]
        horizon: Option<usize>,
    },
    Tilde {
        profile: MixingProfile,
        mu: RealSeq,
        mode: TildeMode,
        #[serde(default)]
        params: TildeParams,
        #[serde(default)]
        horizon: Option<usize>,
    },
    /// Nested targets against a regeneration law; the family defaults to the experiment's.
    HarrisNested {
        nu: Law,
        #[serde(default)]
        family: Option<IntervalFamily>,
        #[serde(default)]
        horizon: Option<usize>,
    },
    /// Moment criteria on the simulated counts; only available inside an experiment.
    FMoments { mode: FMode },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub process: ProcessSpec,
    pub family: IntervalFamily,
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// Geometric with 10 points per decade when absent.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default)]
    pub criteria: Vec<CriterionSpec>,
    #[serde(default)]
    pub prediction: Option<Prediction>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(
        process: ProcessSpec,
        family: IntervalFamily,
        horizon: usize,
        trajectories: usize,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            process,
            family,
            horizon,
            trajectories,
            seed,
            checkpoints: None,
            criteria: Vec::new(),
            prediction: None,
            out_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_slice(&std::fs::read(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < MIN_HORIZON {
            return Err(Error::InvalidInput(format!(
                "horizon must be at least {MIN_HORIZON}, got {}",
                self.horizon
            )));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidInput("need at least one trajectory".into()));
        }
        if let Some(cps) = &self.checkpoints {
            if cps.is_empty() {
                return Err(Error::InvalidInput("checkpoint grid is empty".into()));
            }
            if let Some(&c) = cps.iter().find(|&&c| c == 0 || c > self.horizon) {
                return Err(Error::InvalidInput(format!(
                    "checkpoint {c} outside [1, {}]",
                    self.horizon
                )));
            }
            if cps.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidInput(
                    "checkpoints must be strictly increasing".into(),
                ));
            }
        }
        if let Some(h) = self.family.horizon() {
            if h < self.horizon {
                return Err(Error::InvalidInput(format!(
                    "family has {h} sets, fewer than the horizon {}",
                    self.horizon
                )));
            }
        }
        self.process.validate()
    }

    pub fn checkpoint_grid(&self) -> Vec<usize> {
        self.checkpoints
            .clone()
            .unwrap_or_else(|| geometric_grid(self.horizon, 10))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new(
            ProcessSpec::iid_uniform(),
            IntervalFamily::nested_left(RealSeq::power(1.0, -1.0)),
            1000,
            3,
            7,
        )
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.horizon = 99;
        assert!(c.validate().is_err());
        let mut c = base();
        c.trajectories = 0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.checkpoints = Some(vec![10, 2000]);
        assert!(c.validate().is_err());
        let mut c = base();
        c.checkpoints = Some(vec![10, 10]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "process": {"kind": "iid"},
            "family": {"template": "nested_left", "a": {"kind": "closed", "template": "power", "c": 1.0, "p": -1.0}},
            "horizon": 1000, "trajectories": 3, "seed": 1,
            "criteria": [{"check": "f_moments", "mode": "l1"}],
            "prediction": "sbc"
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.prediction, Some(Prediction::Sbc));
        assert_eq!(*cfg.checkpoint_grid().last().unwrap(), 1000);
        let again: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(
            serde_json::to_string(&again).unwrap(),
            serde_json::to_string(&cfg).unwrap()
        );
    }
}
