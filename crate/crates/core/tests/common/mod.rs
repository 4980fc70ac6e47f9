//! Test-only oracles. Nothing here calls into the code paths it checks.
#![allow(dead_code)]

use corrqubo::{QuboProblem, RegressionDataset};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All `2^n` assignments in counting order (bit `i` of the counter is `z_i`).
pub fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

/// Symmetric matrix with entries uniform on `[-scale, scale]`.
pub fn random_matrix(n: usize, scale: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-scale..=scale);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

pub fn random_qubo(n: usize, rng: &mut impl Rng) -> QuboProblem {
    let offset = rng.random_range(-2.0..=2.0);
    QuboProblem::from_rows(&random_matrix(n, 1.0, rng), offset).unwrap()
}

/// Direct double sum over the nested-row matrix.
pub fn naive_energy(m: &[Vec<f64>], offset: f64, z: &[bool]) -> f64 {
    let mut e = offset;
    for i in 0..m.len() {
        for j in 0..m.len() {
            if z[i] && z[j] {
                e += m[i][j];
            }
        }
    }
    e
}

/// Exhaustive minimum `(energy, assignment)`.
pub fn brute_force_min(q: &QuboProblem) -> (f64, Vec<bool>) {
    all_assignments(q.n())
        .map(|z| (q.energy(&z).unwrap(), z))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap()
}

/// `n x d` dataset with features uniform on `[-1, 1]` and random targets.
pub fn random_dataset(n: usize, d: usize, rng: &mut impl Rng) -> RegressionDataset {
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| (1..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..=5.0)).collect();
    RegressionDataset::from_features(&features, &targets).unwrap()
}

/// Dense `I_D (x) b` as a `D x (D*K)` matrix.
pub fn kron_identity(d: usize, b: &[f64]) -> Vec<Vec<f64>> {
    let k = b.len();
    (0..d)
        .map(|row| {
            (0..d * k)
                .map(|col| if col / k == row { b[col % k] } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `|| y - X w ||^2 - y^T y` by scalar loops.
pub fn residual_cost(ds: &RegressionDataset, w: &[f64]) -> f64 {
    let (x, y) = (ds.x(), ds.y());
    let mut rss = 0.0;
    let mut yy = 0.0;
    for i in 0..ds.n_samples() {
        let mut pred = 0.0;
        for j in 0..ds.n_params() {
            pred += x[(i, j)] * w[j];
        }
        rss += (y[i] - pred).powi(2);
        yy += y[i] * y[i];
    }
    rss - yy
}

/// Inverse of a small symmetric positive-definite matrix by Gauss-Jordan
/// elimination.
pub fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `X^T X` by scalar loops.
pub fn gram(ds: &RegressionDataset) -> Vec<Vec<f64>> {
    let d = ds.n_params();
    let x = ds.x();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| (0..ds.n_samples()).map(|i| x[(i, a)] * x[(i, b)]).sum())
                .collect()
        })
        .collect()
}

/// Correlation matrix of the Gaussian `exp(-cost / T)`, covariance
/// `T (X^T X)^{-1} / 2`.
pub fn analytic_correlation(ds: &RegressionDataset, temperature: f64) -> Vec<Vec<f64>> {
    let inv = invert(&gram(ds));
    let cov: Vec<Vec<f64>> = inv
        .iter()
        .map(|r| r.iter().map(|v| temperature * v / 2.0).collect())
        .collect();
    let d = cov.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| cov[i][j] / (cov[i][i] * cov[j][j]).sqrt())
                .collect()
        })
        .collect()
}
