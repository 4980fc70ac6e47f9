//! Synthetic regression data and train/test splitting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::regression::RegressionDataset;

/// Coefficients of the generating linear function, intercept first.
pub const TRUE_WEIGHTS: [f64; 10] = [15.5, 15.5, 10.0, 10.0, 5.0, 5.0, -0.5, -0.5, -15.5, -15.5];

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_total: usize,
    pub train_size: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_total: 1000,
            train_size: 100,
            noise_sigma: 1.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_size == 0 || self.train_size >= self.n_total {
            return Err(Error::InvalidConfig(format!(
                "train size {} must be in 1..{}",
                self.train_size, self.n_total
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Noise-free value of the generating function at feature vector `x`
/// (without the dummy component).
pub fn true_function(x: &[f64]) -> f64 {
    TRUE_WEIGHTS[0]
        + TRUE_WEIGHTS[1..]
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
}

/// Draws `n_total` samples: nine features uniform on `[-1, 1]`, target
/// `f(x) + N(0, noise_sigma^2)`. `train_size` is not consulted.
pub fn generate(cfg: &GeneratorConfig) -> Result<RegressionDataset> {
    if cfg.n_total == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(Error::InvalidConfig("noise sigma must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|e| Error::InvalidConfig(format!("noise: {e}")))?;
    let width = TRUE_WEIGHTS.len() - 1;

    let mut features = Vec::with_capacity(cfg.n_total);
    let mut targets = Vec::with_capacity(cfg.n_total);
    for _ in 0..cfg.n_total {
        let x: Vec<f64> = (0..width).map(|_| rng.random_range(-1.0..=1.0)).collect();
        targets.push(true_function(&x) + noise.sample(&mut rng));
        features.push(x);
    }
    RegressionDataset::from_features(&features, &targets)
}

/// Index sets for one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions `0..n_samples` into `n_trials` consecutive training blocks of
/// `train_size`; each trial tests on every index outside its block.
pub fn trial_splits(n_samples: usize, train_size: usize, n_trials: usize) -> Result<Vec<Split>> {
    if train_size == 0 || n_trials == 0 {
        return Err(Error::InvalidConfig(
            "train size and trial count must be positive".into(),
        ));
    }
    if n_trials * train_size > n_samples {
        return Err(Error::InvalidConfig(format!(
            "{n_trials} trials of {train_size} samples exceed {n_samples} samples"
        )));
    }
    Ok((0..n_trials)
        .map(|t| {
            let block = t * train_size..(t + 1) * train_size;
            Split {
                train: block.clone().collect(),
                test: (0..n_samples).filter(|i| !block.contains(i)).collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_values() {
        assert_eq!(true_function(&[0.0; 9]), 15.5);
        let mut x = [0.0; 9];
        x[0] = 1.0;
        assert_eq!(true_function(&x), 31.0);
    }

    #[test]
    fn noiseless_generation_matches_function() {
        let cfg = GeneratorConfig {
            n_total: 50,
            train_size: 10,
            noise_sigma: 0.0,
            seed: 9,
        };
        let ds = generate(&cfg).unwrap();
        assert_eq!(ds.n_params(), 10);
        for i in 0..ds.n_samples() {
            let row: Vec<f64> = (1..10).map(|j| ds.x()[(i, j)]).collect();
            assert!(row.iter().all(|v| (-1.0..=1.0).contains(v)));
            assert_eq!(ds.y()[i], true_function(&row));
        }
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = GeneratorConfig::default();
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = GeneratorConfig {
            seed: 1,
            ..cfg.clone()
        };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn config_validation() {
        let bad = GeneratorConfig {
            train_size: 1000,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GeneratorConfig {
            noise_sigma: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ten_blocks_of_hundred() {
        let splits = trial_splits(1000, 100, 10).unwrap();
        assert_eq!(splits.len(), 10);
        let mut seen = vec![0; 1000];
        for s in &splits {
            assert_eq!(s.train.len(), 100);
            assert_eq!(s.test.len(), 900);
            for &i in &s.train {
                seen[i] += 1;
                assert!(!s.test.contains(&i));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn single_split() {
        let splits = trial_splits(10, 4, 1).unwrap();
        assert_eq!(splits[0].train, vec![0, 1, 2, 3]);
        assert_eq!(splits[0].test, vec![4, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn split_size_mismatch() {
        assert!(trial_splits(100, 30, 4).is_err());
        assert!(trial_splits(100, 0, 4).is_err());
    }
}
