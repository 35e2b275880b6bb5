use rayon::prelude::*;

use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-8;

/// A transition matrix on grid points together with its invariant weights.
#[derive(Debug, Clone)]
pub struct GridKernel {
    pub points: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
    /// Regeneration law when `rows[i] = s_i nu + (1 - s_i) e_i` with `s_i = points[i]`.
    regeneration: Option<Vec<f64>>,
}

impl GridKernel {
    pub fn new(points: Vec<f64>, rows: Vec<Vec<f64>>, marginal: Vec<f64>) -> Self {
        GridKernel {
            points,
            rows,
            marginal,
            regeneration: None,
        }
    }

    pub fn tilde_beta(&self, n: usize) -> Result<f64> {
        Ok(self.tilde_beta_profile(&[n])?[0])
    }

    pub fn tilde_beta_profile(&self, lags: &[usize]) -> Result<Vec<f64>> {
        match &self.regeneration {
            Some(nu) => {
                validate(&self.rows, &self.marginal)?;
                Ok(split_profile(&self.points, nu, &self.marginal, lags))
            }
            None => kernel_tilde_beta_profile(&self.rows, &self.marginal, lags),
        }
    }
}

/// DMR chain on `m` cell midpoints: `P = s_i nu_j + (1 - s_i) delta_ij` with
/// `s(x) = x` and `nu` the cell masses of `(a + 1) x^a dx`. The atom stays on
/// the diagonal. The invariant weights `mu_i ∝ nu_i / s_i` are exact for the grid chain.
pub fn dmr_grid_kernel(a: f64, m: usize) -> Result<GridKernel> {
    if !(a > 0.0) || m < 2 {
        return Err(Error::InvalidInput(format!(
            "DMR grid needs a > 0 and at least 2 points, got a = {a}, m = {m}"
        )));
    }
    let points: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let nu: Vec<f64> = (0..m)
        .map(|j| ((j + 1) as f64 / m as f64).powf(a + 1.0) - (j as f64 / m as f64).powf(a + 1.0))
        .collect();
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut row: Vec<f64> = nu.iter().map(|&v| s * v).collect();
            row[i] += 1.0 - s;
            row
        })
        .collect();
    let raw: Vec<f64> = nu.iter().zip(&points).map(|(v, s)| v / s).collect();
    let z: f64 = raw.iter().sum();
    Ok(GridKernel {
        points,
        rows,
        marginal: raw.iter().map(|v| v / z).collect(),
        regeneration: Some(nu),
    })
}

fn validate(matrix: &[Vec<f64>], marginal: &[f64]) -> Result<()> {
    let m = matrix.len();
    if m == 0 || marginal.len() != m || matrix.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput(
            "kernel must be square and match the marginal".into(),
        ));
    }
    for (row, r) in matrix.iter().enumerate() {
        let sum: f64 = r.iter().sum();
        if r.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > ROW_TOL {
            return Err(Error::NotStochastic { row, sum });
        }
    }
    let total: f64 = marginal.iter().sum();
    if marginal.iter().any(|&v| v < 0.0) || (total - 1.0).abs() > ROW_TOL {
        return Err(Error::NotInvariant {
            deviation: (total - 1.0).abs(),
        });
    }
    let deviation = (0..m)
        .map(|j| {
            let pushed: f64 = (0..m).map(|i| marginal[i] * matrix[i][j]).sum();
            (pushed - marginal[j]).abs()
        })
        .fold(0.0, f64::max);
    if deviation > INVARIANCE_TOL {
        return Err(Error::NotInvariant { deviation });
    }
    Ok(())
}

fn multiply(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = b.len();
    a.par_iter()
        .map(|row| {
            let mut out = vec![0.0; m];
            for (k, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    for (o, &v) in out.iter_mut().zip(&b[k]) {
                        *o += w * v;
                    }
                }
            }
            out
        })
        .collect()
}

fn statistic(power: &[Vec<f64>], marginal: &[f64], cdf: &[f64]) -> f64 {
    power
        .iter()
        .zip(marginal)
        .map(|(row, &w)| {
            let mut acc = 0.0;
            let mut worst: f64 = 0.0;
            for (v, f) in row.iter().zip(cdf) {
                acc += v;
                worst = worst.max((acc - f).abs());
            }
            w * worst
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

fn cumulative(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Same statistic as the dense path, but each row of `P^n` is advanced in
/// `O(m)` per step using the diagonal plus rank-one form.
fn split_profile(s: &[f64], nu: &[f64], marginal: &[f64], lags: &[usize]) -> Vec<f64> {
    let cdf = cumulative(marginal);
    let mut order: Vec<usize> = (0..lags.len()).collect();
    order.sort_by_key(|&i| lags[i]);
    let m = s.len();
    let per_row: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; m];
            row[i] = 1.0;
            let mut reached = 0usize;
            let mut out = vec![0.0; lags.len()];
            for &l in &order {
                while reached < lags[l] {
                    let renew: f64 = row.iter().zip(s).map(|(r, s)| r * s).sum();
                    for ((r, s), v) in row.iter_mut().zip(s).zip(nu) {
                        *r = *r * (1.0 - s) + renew * v;
                    }
                    reached += 1;
                }
                let mut acc = 0.0;
                let mut worst: f64 = 0.0;
                for (v, f) in row.iter().zip(&cdf) {
                    acc += v;
                    worst = worst.max((acc - f).abs());
                }
                out[l] = marginal[i] * worst;
            }
            out
        })
        .collect();
    (0..lags.len())
        .map(|l| per_row.iter().map(|r| r[l]).sum::<f64>().clamp(0.0, 1.0))
        .collect()
}

/// `sum_x mu(x) max_t |P^n(x, (-inf, t]) - F(t)|` over grid thresholds.
pub fn kernel_tilde_beta(matrix: &[Vec<f64>], marginal: &[f64], n: usize) -> Result<f64> {
    Ok(kernel_tilde_beta_profile(matrix, marginal, &[n])?[0])
}

/// [`kernel_tilde_beta`] at several lags, sharing the matrix powers.
pub fn kernel_tilde_beta_profile(
    matrix: &[Vec<f64>],
    marginal: &[f64],
    lags: &[usize],
) -> Result<Vec<f64>> {
    validate(matrix, marginal)?;
    let cdf = cumulative(marginal);
    let mut order: Vec<usize> = (0..lags.len()).collect();
    order.sort_by_key(|&i| lags[i]);
    let mut out = vec![0.0; lags.len()];
    let m = matrix.len();
    let mut power: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = vec![0.0; m];
            r[i] = 1.0;
            r
        })
        .collect();
    let mut reached = 0usize;
    for i in order {
        while reached < lags[i] {
            power = multiply(&power, matrix);
            reached += 1;
        }
        out[i] = statistic(&power, marginal, &cdf);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_is_constant() {
        let id = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let mu = [0.2, 0.3, 0.5];
        for n in [1, 5] {
            let v = kernel_tilde_beta(&id, &mu, n).unwrap();
            assert!((v - 0.56).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_kernel_mixes_in_one_step() {
        let mu = [0.2, 0.3, 0.5];
        let p = vec![mu.to_vec(); 3];
        for n in [1, 2, 7] {
            assert!(kernel_tilde_beta(&p, &mu, n).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = vec![vec![0.5, 0.6], vec![0.5, 0.5]];
        assert!(matches!(
            kernel_tilde_beta(&p, &[0.5, 0.5], 1),
            Err(Error::NotStochastic { row: 0, .. })
        ));
        let p = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            kernel_tilde_beta(&p, &[0.5, 0.5], 1),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn dmr_grid_is_consistent() {
        let k = dmr_grid_kernel(1.0, 200).unwrap();
        let v = k.tilde_beta(20).unwrap();
        assert!((1.0 / 22.0..=6.0 / 20.0).contains(&v), "value {v}");
        let prof = k.tilde_beta_profile(&[40, 10, 20]).unwrap();
        assert!((prof[2] - v).abs() < 1e-12);
        assert!(prof[0] < prof[2] && prof[2] < prof[1]);
    }

    #[test]
    fn split_and_dense_paths_agree() {
        let k = dmr_grid_kernel(1.5, 60).unwrap();
        let lags = [1, 7, 3, 30];
        let fast = k.tilde_beta_profile(&lags).unwrap();
        let dense = kernel_tilde_beta_profile(&k.rows, &k.marginal, &lags).unwrap();
        for (f, d) in fast.iter().zip(&dense) {
            assert!((f - d).abs() < 1e-12, "{f} vs {d}");
        }
    }
}
