use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    is_degenerate, lsv_restart, process_step, stationary_init, trajectory_rng, Process, ProcessSpec,
};
use crate::error::Result;
use crate::intervals::{Interval, IntervalFamily};
use crate::stats::geometric_grid;

/// One trajectory's hits against a target family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub trajectory: u64,
    pub seed: u64,
    /// Times `k` with `X_k` in `A_k`, strictly increasing.
    pub hit_times: Vec<u64>,
    /// `(n, S_n)` at the requested checkpoints.
    pub checkpoints: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewal_times: Option<Vec<u64>>,
    /// Circle drift subtracted before testing hits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    /// Degenerate LSV states replaced by a fresh start.
    #[serde(default)]
    pub restarts: u32,
}

impl HitRecord {
    /// `S_n`, the number of hits up to time `n`.
    pub fn count_to(&self, n: u64) -> u64 {
        self.hit_times.partition_point(|&k| k <= n) as u64
    }

    /// Whether some hit falls in `(lo, hi]`.
    pub fn hit_in(&self, lo: u64, hi: u64) -> bool {
        self.count_to(hi) > self.count_to(lo)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    /// Checkpoints for `S_n`; defaults to a geometric grid with 10 points per decade.
    pub checkpoints: Option<Vec<usize>>,
    pub record_renewals: bool,
}

/// State sequence `X_0, ..., X_n` and regeneration bits `eta_0, ..., eta_{n-1}`.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub states: Vec<f64>,
    pub etas: Vec<bool>,
    pub restarts: u32,
}

struct Walker<'a, R> {
    spec: &'a ProcessSpec,
    rng: R,
    x: f64,
    restarts: u32,
}

impl<R: Rng> Walker<'_, R> {
    fn advance(&mut self) -> Result<bool> {
        let u = [self.rng.random(), self.rng.random()];
        let step = process_step(self.spec, self.x, u)?;
        self.x = step.next;
        if let Process::Lsv { gamma } = self.spec.process {
            if is_degenerate(self.x) {
                // the map ignores both uniforms, so the first one seeds the restart
                self.x = lsv_restart(gamma, self.spec.burn_in, u[0]);
                self.restarts += 1;
            }
        }
        Ok(step.regenerated)
    }
}

fn walker(spec: &ProcessSpec, seed: u64, trajectory: u64) -> Result<Walker<'_, impl Rng>> {
    spec.validate()?;
    let mut rng = trajectory_rng(seed, trajectory);
    let x = stationary_init(spec, &mut rng)?;
    Ok(Walker {
        spec,
        rng,
        x,
        restarts: 0,
    })
}

pub fn sample_path(spec: &ProcessSpec, n: usize, seed: u64, trajectory: u64) -> Result<SamplePath> {
    let mut w = walker(spec, seed, trajectory)?;
    let mut states = Vec::with_capacity(n + 1);
    let mut etas = Vec::with_capacity(n);
    states.push(w.x);
    for _ in 0..n {
        etas.push(w.advance()?);
        states.push(w.x);
    }
    Ok(SamplePath {
        states,
        etas,
        restarts: w.restarts,
    })
}

/// Runs `X_1, ..., X_n` with `n = targets.len()` and records `k` whenever
/// `X_k` (shifted by `-k t` for a drifting circle walk) lies in `targets[k - 1]`.
pub fn simulate_targets(
    spec: &ProcessSpec,
    targets: &[Interval],
    seed: u64,
    trajectory: u64,
    opts: &SimOptions,
) -> Result<HitRecord> {
    let n = targets.len();
    let mut w = walker(spec, seed, trajectory)?;
    let drift = spec.drift();
    let record = opts.record_renewals && spec.is_split();
    let mut renewals = Vec::new();
    let mut hits = Vec::new();
    for (k, target) in (1..=n as u64).zip(targets) {
        if w.advance()? && record {
            // eta_{k-1} = 1 puts a renewal at T = k
            renewals.push(k);
        }
        let y = match drift {
            Some(t) => {
                let y = (w.x - (k as f64 * t).fract()).rem_euclid(1.0);
                if y >= 1.0 {
                    0.0
                } else {
                    y
                }
            }
            None => w.x,
        };
        if target.contains(y) {
            hits.push(k);
        }
    }
    let grid = opts
        .checkpoints
        .clone()
        .unwrap_or_else(|| geometric_grid(n, 10));
    let checkpoints = grid
        .iter()
        .filter(|&&c| c <= n)
        .map(|&c| (c as u64, hits.partition_point(|&k| k <= c as u64) as u64))
        .collect();
    Ok(HitRecord {
        trajectory,
        seed,
        hit_times: hits,
        checkpoints,
        renewal_times: record.then_some(renewals),
        drift,
        restarts: w.restarts,
    })
}

/// [`simulate_targets`] on the first `n` sets of a family, trajectory 0,
/// renewal times recorded for split chains.
pub fn simulate_hits(
    spec: &ProcessSpec,
    family: &IntervalFamily,
    n: usize,
    seed: u64,
) -> Result<HitRecord> {
    let targets = family.materialize(n)?;
    simulate_targets(
        spec,
        &targets,
        seed,
        0,
        &SimOptions {
            checkpoints: None,
            record_renewals: true,
        },
    )
}

/// `T_k = 1 + inf{j : eta_0 + ... + eta_j = k + 1}` for every level reached.
pub fn renewal_times(etas: &[bool]) -> Vec<u64> {
    etas.iter()
        .enumerate()
        .filter(|(_, &e)| e)
        .map(|(j, _)| j as u64 + 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{Law, RegenFn, ResidualKernel};
    use crate::seqcore::RealSeq;

    #[test]
    fn renewal_examples() {
        assert_eq!(renewal_times(&[true, true, false, true]), vec![1, 2, 4]);
        assert_eq!(renewal_times(&[true; 5]), vec![1, 2, 3, 4, 5]);
        assert!(renewal_times(&[false; 7]).is_empty());
    }

    #[test]
    fn full_targets_hit_every_time() {
        let fam = IntervalFamily::nested_left(RealSeq::constant(1.0));
        let r = simulate_hits(&ProcessSpec::iid_uniform(), &fam, 100, 1).unwrap();
        assert_eq!(r.hit_times, (1..=100).collect::<Vec<_>>());
        assert_eq!(r.count_to(100), 100);
        assert_eq!(r.checkpoints.last(), Some(&(100, 100)));
    }

    #[test]
    fn checkpoints_count_hits() {
        let fam = IntervalFamily::nested_left(RealSeq::power(1.0, -0.5));
        let r = simulate_hits(&ProcessSpec::iid_uniform(), &fam, 5000, 9).unwrap();
        for &(n, s) in &r.checkpoints {
            assert_eq!(s, r.count_to(n));
        }
        assert!(r.hit_times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn always_regenerating_chain() {
        let spec = ProcessSpec::from(Process::SplitChain {
            s: RegenFn::Constant { c: 1.0 },
            nu: Law::Power { a: 2.0 },
            q1: ResidualKernel::Stay,
        });
        let fam = IntervalFamily::nested_left(RealSeq::constant(1.0));
        let r = simulate_hits(&spec, &fam, 50, 3).unwrap();
        assert_eq!(r.renewal_times.unwrap(), (1..=50).collect::<Vec<_>>());
        let p = sample_path(&spec, 50, 3, 0).unwrap();
        assert!(p.etas.iter().all(|&e| e));
    }

    #[test]
    fn reproducible_and_stream_separated() {
        let fam = IntervalFamily::nested_left(RealSeq::power(1.0, -0.4));
        let spec = ProcessSpec::dmr(1.0);
        let t = fam.materialize(2000).unwrap();
        let o = SimOptions::default();
        let a = simulate_targets(&spec, &t, 11, 4, &o).unwrap();
        let b = simulate_targets(&spec, &t, 11, 4, &o).unwrap();
        let c = simulate_targets(&spec, &t, 11, 5, &o).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.hit_times, c.hit_times);
    }

    #[test]
    fn iid_harmonic_mean_count() {
        // E S_n = H_n for A_k = [0, 1/k]
        let fam = IntervalFamily::nested_left(RealSeq::power(1.0, -1.0));
        let t = fam.materialize(10_000).unwrap();
        let o = SimOptions::default();
        let spec = ProcessSpec::iid_uniform();
        let total: u64 = (0..1000)
            .map(|i| {
                simulate_targets(&spec, &t, 77, i, &o)
                    .unwrap()
                    .count_to(10_000)
            })
            .sum();
        let mean = total as f64 / 1000.0;
        let h: f64 = (1..=10_000).map(|k| 1.0 / k as f64).sum();
        assert!((h - 9.787606).abs() < 1e-6);
        // three standard errors of the mean (Var S_n < H_n)
        assert!((mean - h).abs() < 3.0 * (h / 1000.0).sqrt(), "mean {mean}");
    }

    #[test]
    fn drift_shifts_the_test_point() {
        // a deterministic target covering only [0, 0.5): with drift t = 0.5 the
        // tested point alternates between x and x + 1/2
        let spec = ProcessSpec::circle(0.5, 0.5);
        let fam = IntervalFamily::custom(vec![Interval::torus(0.0, 0.5); 10]);
        let t = fam.materialize(10).unwrap();
        let r = simulate_targets(&spec, &t, 1, 0, &SimOptions::default()).unwrap();
        assert_eq!(r.drift, Some(0.5));
        let plain = simulate_targets(
            &ProcessSpec::circle(0.5, 0.0),
            &t,
            1,
            0,
            &SimOptions::default(),
        )
        .unwrap();
        // both walks see the same states; drift flips membership on odd k only
        for k in 1..=10u64 {
            let a = plain.hit_times.contains(&k);
            let b = r.hit_times.contains(&k);
            assert_eq!(a != b, k % 2 == 1, "k = {k}");
        }
    }
}
