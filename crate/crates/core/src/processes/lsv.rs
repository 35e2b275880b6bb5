use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::intervals::Measure;

/// Below this a state is treated as stuck at the neutral fixed point.
pub const DEGENERATE_BELOW: f64 = 1e-300;

/// The intermittent map `x (1 + 2^g x^g)` on `[0, 1/2)`, `2x - 1` on `[1/2, 1]`.
#[inline]
pub fn lsv_map(gamma: f64, x: f64) -> f64 {
    if x < 0.5 {
        x * (1.0 + (2.0 * x).powf(gamma))
    } else {
        2.0 * x - 1.0
    }
}

#[inline]
pub fn is_degenerate(x: f64) -> bool {
    !(DEGENERATE_BELOW..1.0).contains(&x)
}

/// Iterates the map `steps` times from `x`. Returns `None` if the orbit degenerates.
pub fn lsv_burn(gamma: f64, mut x: f64, steps: u64) -> Option<f64> {
    for _ in 0..steps {
        if is_degenerate(x) {
            return None;
        }
        x = lsv_map(gamma, x);
    }
    (!is_degenerate(x)).then_some(x)
}

const MAGIC: &[u8; 8] = b"BCLABCAL";
const VERSION: u32 = 1;
const UNIFORM_BINS: usize = 1 << 16;
const LOG_FLOOR: f64 = 1e-12;
const LOG_PER_DECADE: usize = 20;
/// Cumulative count required at the anchor of the small-scale extrapolation.
const ANCHOR_COUNT: u64 = 1000;

/// Occupation measure of one long orbit on a fixed grid.
///
/// The grid is log-spaced from `1e-12` up to `2^-16` and uniform above. The
/// distribution function interpolates linearly inside cells; below the
/// smallest well-populated edge it follows `C x^{1 - gamma}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsvCalibration {
    pub gamma: f64,
    pub steps: u64,
    pub burn_in: u64,
    edges: Vec<f64>,
    counts: Vec<u64>,
    cum: Vec<f64>,
    anchor: usize,
}

fn grid() -> Vec<f64> {
    let top = 1.0 / UNIFORM_BINS as f64;
    let decades = (top / LOG_FLOOR).log10();
    let n_log = (decades * LOG_PER_DECADE as f64).ceil() as usize;
    let mut edges = vec![0.0];
    for i in 0..n_log {
        edges.push(LOG_FLOOR * (top / LOG_FLOOR).powf(i as f64 / n_log as f64));
    }
    for i in 1..=UNIFORM_BINS {
        edges.push(i as f64 / UNIFORM_BINS as f64);
    }
    edges
}

impl LsvCalibration {
    /// Runs an orbit of `steps` points after `burn_in` iterations from `start`.
    /// Degenerate orbits restart from the next point of a fixed Weyl sequence.
    pub fn build(gamma: f64, steps: u64, burn_in: u64, start: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidInput(format!(
                "LSV needs 0 < gamma < 1, got {gamma}"
            )));
        }
        if steps == 0 {
            return Err(Error::Calibration(
                "calibration orbit must be nonempty".into(),
            ));
        }
        let edges = grid();
        let mut counts = vec![0u64; edges.len() - 1];
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let mut seed = start;
        let restart = |seed: &mut f64| loop {
            *seed = (*seed + golden).fract();
            if let Some(x) = lsv_burn(gamma, *seed, burn_in) {
                return x;
            }
        };
        let mut x = match lsv_burn(gamma, start, burn_in) {
            Some(x) => x,
            None => restart(&mut seed),
        };
        for _ in 0..steps {
            let i = edges.partition_point(|&e| e <= x) - 1;
            let last = counts.len() - 1;
            counts[i.min(last)] += 1;
            x = lsv_map(gamma, x);
            if is_degenerate(x) {
                x = restart(&mut seed);
            }
        }
        Self::from_parts(gamma, steps, burn_in, edges, counts)
    }

    fn from_parts(
        gamma: f64,
        steps: u64,
        burn_in: u64,
        edges: Vec<f64>,
        counts: Vec<u64>,
    ) -> Result<Self> {
        if edges.len() != counts.len() + 1 || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Calibration("malformed calibration grid".into()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Calibration("calibration histogram is empty".into()));
        }
        let mut cum = Vec::with_capacity(edges.len());
        let mut acc = 0u64;
        cum.push(0.0);
        let mut anchor = edges.len() - 1;
        for (i, &c) in counts.iter().enumerate() {
            acc += c;
            cum.push(acc as f64 / total as f64);
            if acc >= ANCHOR_COUNT.min(total) && anchor == edges.len() - 1 {
                anchor = i + 1;
            }
        }
        Ok(LsvCalibration {
            gamma,
            steps,
            burn_in,
            edges,
            counts,
            cum,
            anchor,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 * self.edges.len() + 64);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.gamma.to_le_bytes());
        buf.extend_from_slice(&self.steps.to_le_bytes());
        buf.extend_from_slice(&self.burn_in.to_le_bytes());
        buf.extend_from_slice(&(self.edges.len() as u64).to_le_bytes());
        for e in &self.edges {
            buf.extend_from_slice(&e.to_le_bytes());
        }
        for c in &self.counts {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        // write then rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let mut rd = Reader { buf: &buf, pos: 0 };
        if rd.take(8)? != MAGIC {
            return Err(Error::Calibration(format!(
                "{} is not a calibration file",
                path.display()
            )));
        }
        let version = u32::from_le_bytes(rd.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Calibration(format!(
                "unsupported calibration version {version}"
            )));
        }
        let gamma = rd.f64()?;
        let steps = rd.u64()?;
        let burn_in = rd.u64()?;
        let n = rd.u64()? as usize;
        if n < 2 || n > buf.len() / 8 {
            return Err(Error::Calibration("corrupt calibration header".into()));
        }
        let edges = (0..n).map(|_| rd.f64()).collect::<Result<Vec<_>>>()?;
        let counts = (0..n - 1).map(|_| rd.u64()).collect::<Result<Vec<_>>>()?;
        Self::from_parts(gamma, steps, burn_in, edges, counts)
    }

    /// Loads the cache at `path` if it matches `gamma`, otherwise builds and stores it.
    pub fn load_or_build(path: &Path, gamma: f64, steps: u64, burn_in: u64) -> Result<Self> {
        if path.exists() {
            let cal = Self::load(path)?;
            if cal.gamma == gamma && cal.steps >= steps {
                return Ok(cal);
            }
        }
        let cal = Self::build(gamma, steps, burn_in, 0.5 * (5f64.sqrt() - 1.0) / 2.0)?;
        cal.save(path)?;
        Ok(cal)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(Error::Calibration("truncated calibration file".into()));
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Measure for LsvCalibration {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let a = self.edges[self.anchor];
        if x < a {
            return self.cum[self.anchor] * (x / a).powf(1.0 - self.gamma);
        }
        let i = self.edges.partition_point(|&e| e <= x) - 1;
        let (lo, hi) = (self.edges[i], self.edges[i + 1]);
        let w = (x - lo) / (hi - lo);
        self.cum[i] + w * (self.cum[i + 1] - self.cum[i])
    }
}
