use serde::{Deserialize, Serialize};

use super::interval::{difference, Interval, IntervalSet, Piece};
use super::measure::Measure;
use crate::error::{Error, Result};

/// Pairwise disjoint `gammas[k] ⊆ family[k]` with the same union as the family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisjointCover {
    pub gammas: Vec<Interval>,
    /// `source[k]` is the index of the input interval `gammas[k]` was cut from.
    pub source: Vec<usize>,
}

/// Greedy disjointification of a list of intervals.
///
/// Step `m`: every earlier piece lying inside `J_m` is emptied, the others are
/// kept, and the new piece is `J_m` minus the kept pieces. The result is always
/// a single interval because each kept piece sticks out of `J_m`.
pub fn disjointify(family: &[Interval]) -> Result<DisjointCover> {
    let Some(first) = family.first() else {
        return Err(Error::InvalidInput(
            "disjointify needs at least one interval".into(),
        ));
    };
    let space = first.space;
    if family.iter().any(|j| j.space != space) {
        return Err(Error::MixedSpaces);
    }
    let mut gammas: Vec<Interval> = Vec::with_capacity(family.len());
    for j in family {
        for g in gammas.iter_mut() {
            if !g.is_empty() && g.is_subset_of(j) {
                *g = Interval::empty(space);
            }
        }
        let kept: Vec<Piece> = gammas.iter().flat_map(|g| g.pieces()).collect();
        let rest = difference(&j.pieces(), &kept);
        let mut g = Interval::from_pieces(space, &rest).ok_or_else(|| {
            Error::InvalidInput(format!("disjointification split {j:?} into {rest:?}"))
        })?;
        g.closure = j.closure;
        gammas.push(g);
    }
    Ok(DisjointCover {
        source: (0..gammas.len()).collect(),
        gammas,
    })
}

/// Why [`gamma_blocks`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum BlockStop {
    /// The remaining sets are too few to judge the next block.
    HorizonConsumed { block: usize },
    /// All remaining sets together fall short of the next threshold.
    Unreachable {
        block: usize,
        threshold: f64,
        tail_measure: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaBlocks {
    /// `n_0 = 1 < n_1 < ...`; block `k` holds indices `[n_{k-1}, n_k)`.
    pub boundaries: Vec<usize>,
    /// `gammas[j - 1]` is `Γ_j` for `j < n_K`.
    pub gammas: Vec<Interval>,
    pub stop: BlockStop,
}

impl GammaBlocks {
    pub fn completed(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// The error form of an unreachable stop.
    pub fn unreachable_error(&self, horizon: usize) -> Option<Error> {
        match self.stop {
            BlockStop::Unreachable {
                block, threshold, ..
            } => Some(Error::BlockUnreachable {
                block,
                horizon,
                threshold,
            }),
            BlockStop::HorizonConsumed { .. } => None,
        }
    }
}

/// Block decomposition with `mu(∪_{j in block k} A_j) >= delta (1 - 2^{-k})`.
///
/// `family[j - 1]` is `A_j`; the horizon is `family.len()`. Each block end is
/// found by doubling then bisection on the (monotone) union measure.
pub fn gamma_blocks(family: &[Interval], delta: f64, measure: &dyn Measure) -> Result<GammaBlocks> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let horizon = family.len();
    let union_of = |lo: usize, hi: usize| -> f64 {
        measure.union_pieces(
            family[lo - 1..hi - 1]
                .iter()
                .flat_map(|a| a.pieces())
                .collect(),
        )
    };

    let mut boundaries = vec![1usize];
    let mut gammas = Vec::new();
    let mut longest = 0usize;
    let mut k = 1u32;
    let stop = loop {
        let start = *boundaries.last().unwrap();
        let threshold = delta * (1.0 - 0.5f64.powi(k as i32));
        let remaining = horizon + 1 - start;
        if remaining == 0 {
            break BlockStop::HorizonConsumed { block: k as usize };
        }
        let tail = union_of(start, horizon + 1);
        if tail < threshold {
            break if remaining >= longest.max(1) {
                BlockStop::Unreachable {
                    block: k as usize,
                    threshold,
                    tail_measure: tail,
                }
            } else {
                BlockStop::HorizonConsumed { block: k as usize }
            };
        }
        // smallest len with union over [start, start + len) reaching the threshold
        let mut hi_len = 1usize;
        while hi_len < remaining && union_of(start, start + hi_len) < threshold {
            hi_len = (hi_len * 2).min(remaining);
        }
        let mut lo_len = hi_len / 2;
        while hi_len - lo_len > 1 {
            let mid = (lo_len + hi_len) / 2;
            if union_of(start, start + mid) >= threshold {
                hi_len = mid;
            } else {
                lo_len = mid;
            }
        }
        let end = start + hi_len;
        gammas.extend(disjointify(&family[start - 1..end - 1])?.gammas);
        boundaries.push(end);
        longest = longest.max(hi_len);
        k += 1;
    };
    Ok(GammaBlocks {
        boundaries,
        gammas,
        stop,
    })
}

/// Essential sup of `(sum_{k<=n} 1_{J_k}) / E_n` with `E_n = sum_{k<=n} mu(J_k)`.
pub fn equirep_norm(family: &[Interval], measure: &dyn Measure) -> Result<f64> {
    let e_n: f64 = family.iter().map(|j| measure.interval(j)).sum();
    if e_n <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mut events: Vec<(f64, i64)> = family
        .iter()
        .flat_map(|j| j.pieces())
        .flat_map(|(lo, hi)| [(lo, 1), (hi, -1)])
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut depth = 0i64;
    let mut best = 0i64;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            depth += events[i].1;
            i += 1;
        }
        if let Some(&(next, _)) = events.get(i) {
            if depth > best && measure.piece(x, next) > 0.0 {
                best = depth;
            }
        }
    }
    Ok(best as f64 / e_n)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimsupReport {
    /// `(m, mu(∪_{m <= k <= horizon} A_k))` in increasing `m`.
    pub trace: Vec<(usize, f64)>,
    /// Log-log slope of the trace, when defined.
    pub slope: Option<f64>,
    /// Estimated `mu(limsup A_k)`.
    pub floor: f64,
}

const DECAY_SLOPE: f64 = -0.05;

/// Tail-union measures `mu(∪_{m <= k <= horizon} A_k)` for each `m` in `starts`.
///
/// `family[k - 1]` is `A_k` and the horizon is `family.len()`.
pub fn limsup_probe(
    family: &[Interval],
    measure: &dyn Measure,
    starts: &[usize],
) -> Result<LimsupReport> {
    if starts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("starts must be increasing".into()));
    }
    if starts.first() == Some(&0) || starts.last().is_some_and(|&m| m > family.len()) {
        return Err(Error::InvalidInput(format!(
            "starts must lie in [1, {}]",
            family.len()
        )));
    }
    let mut set = IntervalSet::new();
    let mut trace = Vec::with_capacity(starts.len());
    let mut next = family.len();
    for &m in starts.iter().rev() {
        while next >= m {
            set.insert_interval(&family[next - 1]);
            next -= 1;
        }
        let v: f64 = set
            .pieces()
            .iter()
            .map(|&(lo, hi)| measure.piece(lo, hi))
            .sum();
        trace.push((m, v));
    }
    trace.reverse();

    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(m, v)| ((m as f64).ln(), v.ln()))
        .collect();
    let slope = crate::stats::ols_slope(&pts);
    let last = trace.last().map_or(0.0, |p| p.1);
    let floor = if last == 0.0 || slope.is_some_and(|s| s <= DECAY_SLOPE) {
        0.0
    } else {
        last
    };
    Ok(LimsupReport {
        trace,
        slope,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::{IntervalFamily, MeasureSpec, Space};
    use crate::seqcore::RealSeq;

    fn line(lo: f64, hi: f64) -> Interval {
        Interval::line(lo, hi)
    }

    #[test]
    fn disjointify_examples() {
        let c = disjointify(&[line(0.0, 2.0)]).unwrap();
        assert_eq!(c.gammas, vec![line(0.0, 2.0)]);
        let c = disjointify(&[line(0.0, 2.0), line(1.0, 3.0)]).unwrap();
        assert_eq!(c.gammas, vec![line(0.0, 2.0), line(2.0, 3.0)]);
        let c = disjointify(&[line(0.0, 3.0), line(1.0, 2.0)]).unwrap();
        assert_eq!(c.gammas[0], line(0.0, 3.0));
        assert!(c.gammas[1].is_empty());
    }

    #[test]
    fn disjointify_rejects_mixed() {
        assert!(matches!(
            disjointify(&[line(0.0, 0.5), Interval::torus(0.1, 0.2)]),
            Err(Error::MixedSpaces)
        ));
    }

    #[test]
    fn disjointify_torus_wrap() {
        let fam = [
            Interval::torus(0.2, 0.6),
            Interval::torus(0.5, 0.1),
            Interval::torus(0.9, 0.3),
        ];
        let c = disjointify(&fam).unwrap();
        let leb = MeasureSpec::Lebesgue;
        let total: f64 = c.gammas.iter().map(|g| leb.interval(g)).sum();
        assert!((total - leb.union(&fam)).abs() < 1e-12);
        for (g, j) in c.gammas.iter().zip(&fam) {
            assert!(g.is_subset_of(j));
        }
    }

    #[test]
    fn blocks_of_full_space() {
        let fam = vec![line(0.0, 1.0); 20];
        let b = gamma_blocks(&fam, 1.0, &MeasureSpec::Lebesgue).unwrap();
        assert_eq!(b.boundaries, (1..=21).collect::<Vec<_>>());
        assert_eq!(b.stop, BlockStop::HorizonConsumed { block: 21 });
    }

    #[test]
    fn blocks_of_alternating_halves() {
        let fam: Vec<Interval> = (1..=41)
            .map(|j| {
                if j % 2 == 1 {
                    line(0.0, 0.5)
                } else {
                    line(0.5, 1.0)
                }
            })
            .collect();
        let b = gamma_blocks(&fam, 1.0, &MeasureSpec::Lebesgue).unwrap();
        let gaps: Vec<usize> = b.boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(gaps[0], 1);
        assert!(gaps[1..].iter().all(|&g| g == 2));
        assert!(matches!(b.stop, BlockStop::HorizonConsumed { .. }));
    }

    #[test]
    fn blocks_unreachable_for_shrinking_targets() {
        let fam = IntervalFamily::nested_left(RealSeq::power(1.0, -1.0))
            .materialize(1_000_000)
            .unwrap();
        let b = gamma_blocks(&fam, 0.5, &MeasureSpec::Lebesgue).unwrap();
        assert_eq!(b.boundaries, vec![1, 2, 3]);
        match b.stop {
            BlockStop::Unreachable {
                block,
                tail_measure,
                threshold,
            } => {
                assert_eq!(block, 3);
                assert!((tail_measure - 1.0 / 3.0).abs() < 1e-12);
                assert!(threshold > tail_measure);
            }
            s => panic!("unexpected stop {s:?}"),
        }
        assert!(b.unreachable_error(fam.len()).is_some());
    }

    #[test]
    fn equirep_examples() {
        let leb = MeasureSpec::Lebesgue;
        assert_eq!(equirep_norm(&[line(0.0, 1.0); 7], &leb).unwrap(), 1.0);
        assert_eq!(equirep_norm(&[line(0.0, 0.5); 7], &leb).unwrap(), 2.0);
        assert_eq!(
            equirep_norm(&[line(0.0, 0.5), line(0.5, 1.0)], &leb).unwrap(),
            1.0
        );
        assert!(matches!(
            equirep_norm(&[line(0.3, 0.3)], &leb),
            Err(Error::ZeroMass)
        ));
    }

    #[test]
    fn equirep_ignores_null_cells() {
        // the overlap [2, 3) carries no mass under Uniform[0, 2]
        let u = MeasureSpec::Uniform { lo: 0.0, hi: 2.0 };
        let v = equirep_norm(&[line(0.0, 3.0), line(2.0, 3.0)], &u).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn limsup_examples() {
        let leb = MeasureSpec::Lebesgue;
        let starts = [1, 10, 100, 1000];
        let full = vec![line(0.0, 1.0); 10_000];
        let r = limsup_probe(&full, &leb, &starts).unwrap();
        assert!(r.trace.iter().all(|p| p.1 == 1.0));
        assert_eq!(r.floor, 1.0);

        let shrinking = IntervalFamily::nested_left(RealSeq::power(1.0, -1.0))
            .materialize(10_000)
            .unwrap();
        let r = limsup_probe(&shrinking, &leb, &starts).unwrap();
        for &(m, v) in &r.trace {
            assert!((v - 1.0 / m as f64).abs() < 1e-12);
        }
        assert_eq!(r.floor, 0.0);

        let sweep = IntervalFamily::torus_consecutive(0.0, RealSeq::power(1.0, -0.5))
            .materialize(10_000)
            .unwrap();
        assert_eq!(sweep[5].space, Space::Torus);
        let r = limsup_probe(&sweep, &leb, &starts).unwrap();
        assert!((r.floor - 1.0).abs() < 1e-12);
    }
}
