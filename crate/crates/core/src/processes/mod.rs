//! Stationary processes: iid sequences, the LSV intermittent map, the halving
//! autoregression, the circle random walk and split (regenerative) chains.

mod law;
mod lsv;
mod sim;

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use law::{Innovation, Law, RegenFn};
pub use lsv::{is_degenerate, lsv_burn, lsv_map, LsvCalibration, DEGENERATE_BELOW};
pub use sim::{
    renewal_times, sample_path, simulate_hits, simulate_targets, HitRecord, SamplePath, SimOptions,
};

use crate::error::{Error, Result};
use crate::intervals::{Measure, MeasureSpec};

pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden() -> f64 {
    GOLDEN
}

fn default_burn_in() -> u64 {
    10_000
}

fn default_calibration_steps() -> u64 {
    10_000_000
}

/// Conditional-cdf inverse `(x, eps) -> G_x^{-1}(eps)` of a residual kernel.
#[derive(Clone)]
pub struct ConditionalInverse(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl std::fmt::Debug for ConditionalInverse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ConditionalInverse(..)")
    }
}

/// Residual kernel used when a split chain does not regenerate.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "q1", rename_all = "snake_case")]
pub enum ResidualKernel {
    /// Stay put: `delta_x`.
    #[default]
    Stay,
    /// Draw from a fixed law regardless of the state.
    Law { law: Law },
    #[serde(skip)]
    Custom(ConditionalInverse),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    Iid {
        #[serde(default)]
        law: Law,
    },
    Lsv {
        gamma: f64,
    },
    /// `X_{n+1} = X_n / 2 + eps_{n+1}`.
    ArHalf {
        #[serde(default)]
        innovation: Innovation,
    },
    /// `x -> x +- a mod 1` with a fair coin; hits are tested on `X_k - k t`.
    CircleRw {
        #[serde(default = "golden")]
        a: f64,
        #[serde(default)]
        t: f64,
    },
    SplitChain {
        s: RegenFn,
        nu: Law,
        #[serde(default)]
        q1: ResidualKernel,
    },
    /// `P(x, .) = x nu + (1 - x) delta_x` with `nu = (a + 1) x^a dx`.
    Dmr {
        a: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationSpec {
    pub path: PathBuf,
    #[serde(default = "default_calibration_steps")]
    pub steps: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub process: Process,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default)]
    pub calibration: Option<CalibrationSpec>,
}

impl From<Process> for ProcessSpec {
    fn from(process: Process) -> Self {
        ProcessSpec {
            process,
            burn_in: default_burn_in(),
            calibration: None,
        }
    }
}

/// Outcome of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub next: f64,
    /// `eta_n = 1{U_n <= s(X_n)}` for split chains, always false otherwise.
    pub regenerated: bool,
}

impl ProcessSpec {
    pub fn iid_uniform() -> Self {
        Process::Iid {
            law: Law::default(),
        }
        .into()
    }

    pub fn dmr(a: f64) -> Self {
        Process::Dmr { a }.into()
    }

    pub fn lsv(gamma: f64) -> Self {
        Process::Lsv { gamma }.into()
    }

    pub fn circle(a: f64, t: f64) -> Self {
        Process::CircleRw { a, t }.into()
    }

    pub fn with_calibration(mut self, path: impl Into<PathBuf>, steps: u64) -> Self {
        self.calibration = Some(CalibrationSpec {
            path: path.into(),
            steps,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.process {
            Process::Iid { law } => law.validate(),
            Process::Lsv { gamma } if !(*gamma > 0.0 && *gamma < 1.0) => Err(Error::InvalidInput(
                format!("LSV needs 0 < gamma < 1, got {gamma}"),
            )),
            Process::Lsv { .. } => Ok(()),
            Process::ArHalf { innovation } => innovation.validate(),
            Process::CircleRw { a, t } => {
                if !(*a > 0.0 && *a < 1.0) || !(0.0..1.0).contains(t) {
                    return Err(Error::InvalidInput(format!(
                        "circle walk needs a in (0, 1) and t in [0, 1), got a = {a}, t = {t}"
                    )));
                }
                Ok(())
            }
            Process::SplitChain { s, nu, q1 } => {
                nu.validate()?;
                if let ResidualKernel::Law { law } = q1 {
                    law.validate()?;
                }
                let m = s.mean_under(nu)?;
                if m <= 0.0 {
                    return Err(Error::InvalidInput("split chain needs nu(s) > 0".into()));
                }
                Ok(())
            }
            Process::Dmr { a } if !(*a > 0.0 && a.is_finite()) => {
                Err(Error::InvalidInput(format!("DMR needs a > 0, got {a}")))
            }
            Process::Dmr { .. } => Ok(()),
        }
    }

    /// Whether the process regenerates and has renewal times.
    pub fn is_split(&self) -> bool {
        matches!(
            self.process,
            Process::SplitChain { .. } | Process::Dmr { .. }
        )
    }

    /// Circle drift `t` when nonzero.
    pub fn drift(&self) -> Option<f64> {
        match self.process {
            Process::CircleRw { t, .. } if t != 0.0 => Some(t),
            _ => None,
        }
    }
}

fn split_step(s: &RegenFn, nu: &Law, q1: &ResidualKernel, x: f64, u: [f64; 2]) -> Result<Step> {
    let sx = s.eval(x)?;
    if u[0] <= sx {
        return Ok(Step {
            next: nu.sample(u[1]),
            regenerated: true,
        });
    }
    let next = match q1 {
        ResidualKernel::Stay => x,
        ResidualKernel::Law { law } => law.sample(u[1]),
        ResidualKernel::Custom(g) => (g.0)(x, u[1]),
    };
    Ok(Step {
        next,
        regenerated: false,
    })
}

/// One transition from `x` driven by two uniforms.
pub fn process_step(spec: &ProcessSpec, x: f64, u: [f64; 2]) -> Result<Step> {
    if !x.is_finite() {
        return Err(Error::StateOutOfSpace { state: x });
    }
    let plain = |next| {
        Ok(Step {
            next,
            regenerated: false,
        })
    };
    match &spec.process {
        Process::Iid { law } => plain(law.sample(u[0])),
        Process::Lsv { gamma } => {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::StateOutOfSpace { state: x });
            }
            plain(lsv_map(*gamma, x))
        }
        Process::ArHalf { innovation } => plain(0.5 * x + innovation.sample(u[0], u[1])),
        Process::CircleRw { a, .. } => {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::StateOutOfSpace { state: x });
            }
            let y = if u[0] < 0.5 { x + a } else { x - a };
            plain(crate::intervals::frac(y))
        }
        Process::SplitChain { s, nu, q1 } => split_step(s, nu, q1, x, u),
        Process::Dmr { a } => split_step(
            &RegenFn::Power { p: 1.0 },
            &Law::Power { a: a + 1.0 },
            &ResidualKernel::Stay,
            x,
            u,
        ),
    }
}

/// Exact draw from the invariant law from a single uniform, where one exists.
pub fn exact_init(spec: &ProcessSpec, u: f64) -> Option<f64> {
    match &spec.process {
        Process::Iid { law } => Some(law.sample(u)),
        Process::CircleRw { .. } => Some(u),
        Process::Dmr { a } => Some(Law::Power { a: *a }.sample(u)),
        Process::ArHalf { innovation } if innovation.is_plain_bernoulli() => Some(2.0 * u),
        _ => None,
    }
}

/// Restart point for a degenerate LSV orbit: burn in from `u`, then from a
/// golden-ratio walk away from it if that degenerates too.
pub(crate) fn lsv_restart(gamma: f64, burn_in: u64, mut u: f64) -> f64 {
    loop {
        if let Some(x) = lsv_burn(gamma, u.max(f64::MIN_POSITIVE), burn_in) {
            return x;
        }
        u = (u + GOLDEN).fract();
    }
}

/// A draw approximately from the invariant law.
pub fn stationary_init(spec: &ProcessSpec, rng: &mut impl Rng) -> Result<f64> {
    let u: f64 = rng.random();
    if let Some(x) = exact_init(spec, u) {
        return Ok(x);
    }
    match &spec.process {
        Process::Lsv { gamma } => Ok(lsv_restart(*gamma, spec.burn_in, u)),
        Process::ArHalf { innovation } => {
            // 55 halvings push the truncated tail below double resolution
            let mut x = 0.0;
            for _ in 0..55 {
                let (u0, u1): (f64, f64) = (rng.random(), rng.random());
                x = 0.5 * x + innovation.sample(u0, u1);
            }
            Ok(x)
        }
        Process::SplitChain { nu, .. } => {
            let mut x = nu.sample(u);
            for _ in 0..spec.burn_in {
                x = process_step(spec, x, [rng.random(), rng.random()])?.next;
            }
            Ok(x)
        }
        _ => unreachable!("exact initialisation covers the remaining variants"),
    }
}

/// Independent per-trajectory stream.
pub fn trajectory_rng(seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng
}

/// Empirical distribution of a sample.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    sorted: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::TooFewSamples { got: 0, need: 1 });
        }
        sample.sort_by(f64::total_cmp);
        Ok(EmpiricalMeasure { sorted: sample })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

impl Measure for EmpiricalMeasure {
    fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }
}

const EMPIRICAL_SAMPLE: usize = 1 << 20;

/// The invariant law as a measure oracle.
///
/// LSV requires a calibration path; the cache is built there on first use.
pub fn stationary_measure(spec: &ProcessSpec) -> Result<Arc<dyn Measure>> {
    spec.validate()?;
    Ok(match &spec.process {
        Process::Iid { law } => Arc::new(*law),
        Process::CircleRw { .. } => Arc::new(MeasureSpec::Lebesgue),
        Process::Dmr { a } => Arc::new(MeasureSpec::Power { a: *a }),
        Process::ArHalf { innovation } if innovation.is_plain_bernoulli() => {
            Arc::new(MeasureSpec::Uniform { lo: 0.0, hi: 2.0 })
        }
        Process::Lsv { gamma } => {
            let cal = spec.calibration.as_ref().ok_or(Error::CalibrationMissing)?;
            Arc::new(LsvCalibration::load_or_build(
                &cal.path,
                *gamma,
                cal.steps,
                spec.burn_in,
            )?)
        }
        _ => {
            let mut rng = trajectory_rng(0x5eed, u64::MAX);
            let mut sample = Vec::with_capacity(EMPIRICAL_SAMPLE);
            if spec.is_split() {
                // one long path after burn-in
                let mut x = stationary_init(spec, &mut rng)?;
                for _ in 0..EMPIRICAL_SAMPLE {
                    x = process_step(spec, x, [rng.random(), rng.random()])?.next;
                    sample.push(x);
                }
            } else {
                for _ in 0..EMPIRICAL_SAMPLE {
                    sample.push(stationary_init(spec, &mut rng)?);
                }
            }
            Arc::new(EmpiricalMeasure::new(sample)?)
        }
    })
}
