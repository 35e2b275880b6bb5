use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{CriterionSpec, ExperimentConfig};
use super::verdict::{aggregate_verdict, AggregateOutcome};
use crate::criteria::{
    check_alpha, check_f_criteria, check_harris_nested, check_l2, check_pairwise, check_tilde,
    inputs_digest, CriterionReport, PathSamples,
};
use crate::error::{Error, Result};
use crate::intervals::IntervalFamily;
use crate::processes::{simulate_targets, stationary_measure, HitRecord, Law, Process, SimOptions};
use crate::seqcore::{RealSeq, SeqKind, SeqTemplate};
use crate::stats::{mean, quantile};

/// Horizon used by stand-alone criterion specs that do not name one.
pub const DEFAULT_CRITERION_HORIZON: usize = 100_000;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BCLAB_THREADS";

/// Where the `E_n` values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSource {
    /// Power-law targets under Lebesgue measure: `E_n` is a power sum.
    ClosedForm,
    /// Masses of the targets under the invariant law.
    Measure,
    /// Masses under the occupation measure of a long LSV orbit.
    Calibration,
}

/// `E_n = sum_{k <= n} mu(A_k)` for an experiment.
#[derive(Debug, Clone)]
pub struct Expectation {
    pub source: MassSource,
    pub seq: RealSeq,
}

impl Expectation {
    pub fn at(&self, n: usize) -> Result<f64> {
        self.seq.get(n)
    }
}

/// `c k^p` with `0 < c <= 1`, `p <= 0` as a closed template, if it is one.
fn unit_power(a: &RealSeq) -> Option<(f64, f64)> {
    match a.kind {
        SeqKind::Closed(SeqTemplate::Power { c, p })
            if c > 0.0 && c <= 1.0 && p <= 0.0 && a.horizon.is_none() =>
        {
            Some((c, p))
        }
        _ => None,
    }
}

fn lebesgue_marginal(process: &Process) -> bool {
    match process {
        Process::Iid {
            law: Law::Uniform { lo, hi },
        } => *lo == 0.0 && *hi == 1.0,
        Process::Iid {
            law: Law::Power { a },
        }
        | Process::Dmr { a } => *a == 1.0,
        Process::CircleRw { .. } => true,
        _ => false,
    }
}

/// Computes `E_n` for the configured process and targets.
///
/// Initial intervals `[0, c k^p)` of a process with uniform marginal give a
/// closed power sum; everything else sums the masses under the invariant law.
pub fn expectation(cfg: &ExperimentConfig) -> Result<Expectation> {
    if let IntervalFamily::NestedLeft { a, .. } = &cfg.family {
        if let Some((c, p)) = unit_power(a) {
            if lebesgue_marginal(&cfg.process.process) {
                return Ok(Expectation {
                    source: MassSource::ClosedForm,
                    seq: RealSeq::power_sum(c, p),
                });
            }
        }
    }
    let measure = stationary_measure(&cfg.process)?;
    let masses = cfg.family.measures(&*measure, cfg.horizon)?;
    let mut acc = 0.0;
    let mut e = Vec::with_capacity(masses.len() + 1);
    e.push(0.0);
    for m in masses {
        acc += m;
        e.push(acc);
    }
    let source = match cfg.process.process {
        Process::Lsv { .. } => MassSource::Calibration,
        _ => MassSource::Measure,
    };
    Ok(Expectation {
        source,
        seq: RealSeq::tabulated(0, e),
    })
}

/// Ratio and hit statistics at one checkpoint.
///
/// Ratio fields are absent when `E_n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub n: u64,
    pub e_n: f64,
    pub mean_ratio: Option<f64>,
    pub median_s: f64,
    pub q10: Option<f64>,
    pub q90: Option<f64>,
    /// Mean of `|S_n / E_n - 1|`.
    pub mean_abs_dev: Option<f64>,
    /// Fraction of trajectories with a hit in `(n/10, n]`.
    pub hit_frac_late: f64,
    /// Fraction of trajectories with a hit after `n`, up to the horizon.
    pub hit_after: f64,
}

/// Statistics from the persisted records and `E_n` at each checkpoint.
pub fn checkpoint_stats(
    records: &[HitRecord],
    grid: &[(u64, f64)],
    horizon: u64,
) -> Vec<CheckpointStats> {
    if records.is_empty() {
        return Vec::new();
    }
    let frac = |f: &dyn Fn(&HitRecord) -> bool| {
        records.iter().filter(|r| f(r)).count() as f64 / records.len() as f64
    };
    grid.iter()
        .map(|&(n, e_n)| {
            let s: Vec<f64> = records.iter().map(|r| r.count_to(n) as f64).collect();
            let ratios: Option<Vec<f64>> = (e_n > 0.0).then(|| s.iter().map(|x| x / e_n).collect());
            CheckpointStats {
                n,
                e_n,
                mean_ratio: ratios.as_ref().map(|r| mean(r)),
                median_s: quantile(&s, 0.5),
                q10: ratios.as_ref().map(|r| quantile(r, 0.1)),
                q90: ratios.as_ref().map(|r| quantile(r, 0.9)),
                mean_abs_dev: ratios
                    .as_ref()
                    .map(|r| r.iter().map(|x| (x - 1.0).abs()).sum::<f64>() / r.len() as f64),
                hit_frac_late: frac(&|r| r.hit_in(n / 10, n)),
                hit_after: frac(&|r| r.hit_in(n, horizon)),
            }
        })
        .collect()
}

/// Wall-clock and seed provenance; excluded from digests.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub seed: u64,
    pub started_unix_ms: u128,
    pub wall_clock_ms: u128,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_digest: String,
    pub horizon: usize,
    pub trajectories: usize,
    pub mass_source: MassSource,
    pub checkpoints: Vec<CheckpointStats>,
    /// sha256 of each trajectory's JSON line in `hits.jsonl`.
    pub record_digests: Vec<String>,
    pub criteria: Vec<CriterionReport>,
    #[serde(default)]
    pub verdict: Option<AggregateOutcome>,
    pub run: RunInfo,
    #[serde(skip)]
    pub records: Vec<HitRecord>,
}

pub fn record_line(r: &HitRecord) -> Result<String> {
    Ok(serde_json::to_string(r)?)
}

pub fn record_digest(r: &HitRecord) -> Result<String> {
    Ok(hex::encode(Sha256::digest(record_line(r)?.as_bytes())))
}

impl ExperimentReport {
    /// Digest of everything except the run provenance.
    pub fn digest(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("run");
        }
        inputs_digest(&v)
    }

    /// Attaches persisted records after checking them against the stored
    /// digests and statistics.
    pub fn attach_records(&mut self, records: Vec<HitRecord>) -> Result<()> {
        if records.len() != self.record_digests.len() {
            return Err(Error::InvalidInput(format!(
                "{} records for {} digests",
                records.len(),
                self.record_digests.len()
            )));
        }
        for (r, d) in records.iter().zip(&self.record_digests) {
            if &record_digest(r)? != d {
                return Err(Error::InvalidInput(format!(
                    "trajectory {} does not match its digest",
                    r.trajectory
                )));
            }
        }
        let grid: Vec<(u64, f64)> = self.checkpoints.iter().map(|c| (c.n, c.e_n)).collect();
        if checkpoint_stats(&records, &grid, self.horizon as u64) != self.checkpoints {
            return Err(Error::InvalidInput(
                "statistics do not match the records".into(),
            ));
        }
        self.records = records;
        Ok(())
    }

    /// Loads `report.json` and `hits.jsonl` from a run directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut report: ExperimentReport =
            serde_json::from_slice(&std::fs::read(dir.join("report.json"))?)?;
        let text = std::fs::read_to_string(dir.join("hits.jsonl"))?;
        let records = text
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect::<Result<Vec<HitRecord>>>()?;
        report.attach_records(records)?;
        Ok(report)
    }
}

/// Inputs a criterion spec may borrow from a running experiment.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunContext<'a> {
    pub family: Option<&'a IntervalFamily>,
    pub horizon: Option<usize>,
    pub samples: Option<&'a PathSamples>,
    pub e: Option<&'a RealSeq>,
}

pub fn evaluate_criterion(spec: &CriterionSpec, ctx: &RunContext) -> Result<CriterionReport> {
    let h = |own: &Option<usize>| own.or(ctx.horizon).unwrap_or(DEFAULT_CRITERION_HORIZON);
    match spec {
        CriterionSpec::L2 { e, var, horizon } => check_l2(e, var, h(horizon)),
        CriterionSpec::Pairwise {
            gamma,
            phi,
            alpha,
            p,
            mode,
            horizon,
        } => check_pairwise(gamma, phi, alpha, p, *mode, h(horizon)),
        CriterionSpec::Alpha {
            profile,
            mu,
            mode,
            params,
            horizon,
        } => check_alpha(profile, mu, *mode, params, h(horizon)),
        CriterionSpec::Tilde {
            profile,
            mu,
            mode,
            params,
            horizon,
        } => check_tilde(profile, mu, *mode, params, h(horizon)),
        CriterionSpec::HarrisNested {
            nu,
            family,
            horizon,
        } => {
            let fam = family
                .as_ref()
                .or(ctx.family)
                .ok_or_else(|| Error::InvalidInput("harris_nested needs a family".into()))?;
            check_harris_nested(fam, nu, h(horizon))
        }
        CriterionSpec::FMoments { mode } => match (ctx.samples, ctx.e) {
            (Some(s), Some(e)) => check_f_criteria(s, e, *mode),
            _ => Err(Error::InvalidInput(
                "f_moments needs simulated counts".into(),
            )),
        },
    }
}

/// Worker count from `BCLAB_THREADS`, if set.
pub fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::InvalidInput(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// [`run_experiment_with`] capped by `BCLAB_THREADS`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(cfg, env_threads()?)
}

/// Simulates every trajectory, evaluates the requested criteria and, with an
/// output directory, persists the run.
///
/// Results do not depend on the number of workers.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis());
    let clock = Instant::now();

    let e = expectation(cfg)?;
    let targets = cfg.family.materialize(cfg.horizon)?;
    let grid = cfg.checkpoint_grid();
    let opts = SimOptions {
        checkpoints: Some(grid.clone()),
        record_renewals: false,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|err| Error::InvalidInput(format!("thread pool: {err}")))?;
    let workers = pool.current_num_threads();
    let records = pool.install(|| {
        (0..cfg.trajectories as u64)
            .into_par_iter()
            .map(|t| simulate_targets(&cfg.process, &targets, cfg.seed, t, &opts))
            .collect::<Result<Vec<_>>>()
    })?;

    let e_grid = grid
        .iter()
        .map(|&n| Ok((n as u64, e.at(n)?)))
        .collect::<Result<Vec<_>>>()?;
    let checkpoints = checkpoint_stats(&records, &e_grid, cfg.horizon as u64);
    let record_digests = records
        .iter()
        .map(record_digest)
        .collect::<Result<Vec<_>>>()?;

    let samples = if cfg
        .criteria
        .iter()
        .any(|c| matches!(c, CriterionSpec::FMoments { .. }))
    {
        Some(PathSamples::from_records(&records)?)
    } else {
        None
    };
    let ctx = RunContext {
        family: Some(&cfg.family),
        horizon: Some(cfg.horizon),
        samples: samples.as_ref(),
        e: Some(&e.seq),
    };
    let criteria = cfg
        .criteria
        .iter()
        .map(|c| evaluate_criterion(c, &ctx))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport {
        config_digest: inputs_digest(&ExperimentConfig {
            out_dir: None,
            ..cfg.clone()
        })?,
        horizon: cfg.horizon,
        trajectories: cfg.trajectories,
        mass_source: e.source,
        checkpoints,
        record_digests,
        criteria,
        verdict: None,
        run: RunInfo {
            seed: cfg.seed,
            started_unix_ms: started,
            wall_clock_ms: 0,
            threads: workers,
        },
        records,
    };
    report.verdict = cfg.prediction.map(|p| aggregate_verdict(&report, p));
    report.run.wall_clock_ms = clock.elapsed().as_millis();
    if let Some(dir) = &cfg.out_dir {
        super::emit::persist_run(cfg, &report, dir)?;
    }
    Ok(report)
}
