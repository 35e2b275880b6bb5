use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqcore::{RealSeq, SeqIndex};

/// Level `L` of a sparse plan: indices `2^L + l 2^k` for `l < 2^{L-k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseLevel {
    pub level: u32,
    pub k: u32,
    /// Position `j_L` of the level's first index in the sparse sequence.
    pub start: u64,
}

impl SparseLevel {
    pub fn len(&self) -> u64 {
        1 << (self.level - self.k)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Sparse subsequence `psi` of the positive integers, level by level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsePlan {
    pub levels: Vec<SparseLevel>,
}

impl SparsePlan {
    /// Number of indices over all levels, `j_{L_max + 1}`.
    pub fn len(&self) -> u64 {
        self.levels.last().map_or(0, |l| l.start + l.len())
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `psi_i`, or `None` past the last level.
    pub fn psi(&self, i: u64) -> Option<u64> {
        let pos = self.levels.partition_point(|l| l.start <= i);
        let lv = self.levels.get(pos.checked_sub(1)?)?;
        let offset = i - lv.start;
        (offset < lv.len()).then(|| (1u64 << lv.level) + (offset << lv.k))
    }

    /// All of `psi`; only sensible for small plans.
    pub fn indices(&self) -> Vec<u64> {
        (0..self.len()).filter_map(|i| self.psi(i)).collect()
    }

    /// `sum_{L = from}^{to} 2^{L - k_L} w_L`.
    pub fn weighted_count(&self, weights: &RealSeq, from: u32, to: u32) -> Result<f64> {
        let mut acc = 0.0;
        for lv in self
            .levels
            .iter()
            .filter(|l| (from..=to).contains(&l.level))
        {
            acc += lv.len() as f64 * weights.get(lv.level as usize)?;
        }
        Ok(acc)
    }
}

/// Builds the plan with `k_L = min(L, ceil(log2 max(alpha*^-1(eps_L mu_L), 1)))`.
///
/// `eps` and `mu_pow2` are both indexed by the level `L`, `mu_pow2` holding
/// `mu(A_{2^L})`. An infinite inverse gives `k_L = L`.
pub fn sparsify_psi(
    eps: &RealSeq,
    mu_pow2: &RealSeq,
    alpha_star_inv: &dyn Fn(f64) -> Result<SeqIndex>,
    l_max: u32,
) -> Result<SparsePlan> {
    if l_max > 62 {
        return Err(Error::InvalidInput(format!(
            "level {l_max} overflows 64-bit indices"
        )));
    }
    let mut levels = Vec::with_capacity(l_max as usize + 1);
    let mut start = 0u64;
    for level in 0..=l_max {
        let x = eps.get(level as usize)? * mu_pow2.get(level as usize)?;
        if !(x > 0.0) {
            return Err(Error::InvalidInput(format!(
                "eps * mu must be positive at level {level}"
            )));
        }
        let k = match alpha_star_inv(x)? {
            SeqIndex::Infinite => level,
            SeqIndex::Finite(m) => {
                let bits = (m.max(1) as f64).log2().ceil() as u32;
                bits.min(level)
            }
        };
        let lv = SparseLevel { level, k, start };
        start += lv.len();
        levels.push(lv);
    }
    Ok(SparsePlan { levels })
}
