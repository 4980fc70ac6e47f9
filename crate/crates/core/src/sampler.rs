//! Short Metropolis chains over the continuous regression cost, used to
//! find parameter pairs that move together.
//!
//! The chain targets the Gibbs-Boltzmann density `exp(-cost(w) / T)`.
//! Each elementary step perturbs one randomly chosen parameter by a normal
//! increment; every `interval` steps the current state is recorded.

use std::cmp::Ordering;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::regression::{Gram, RegressionDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Sampling temperature `T`.
    pub temperature: f64,
    /// Standard deviation of the additive normal proposal.
    pub proposal_sigma: f64,
    /// Elementary steps between recorded samples.
    pub interval: usize,
    /// Number of recorded samples.
    pub chain_length: usize,
    /// Intervals discarded before the first recorded sample.
    pub burn_in: usize,
    pub seed: u64,
}

impl SamplerConfig {
    /// Benchmark settings for `dims` parameters: `T = 0.1`, proposal
    /// standard deviation 0.5, interval `2 * dims`, 100 samples, no burn-in.
    pub fn for_dims(dims: usize, seed: u64) -> Self {
        Self {
            temperature: 0.1,
            proposal_sigma: 0.5,
            interval: 2 * dims,
            chain_length: 100,
            burn_in: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig(
                "sampling temperature must be > 0".into(),
            ));
        }
        if !(self.proposal_sigma > 0.0 && self.proposal_sigma.is_finite()) {
            return Err(Error::InvalidConfig("proposal sigma must be > 0".into()));
        }
        if self.interval < 1 {
            return Err(Error::InvalidConfig(
                "sampling interval must be >= 1".into(),
            ));
        }
        if self.chain_length < 2 {
            return Err(Error::InvalidConfig("chain length must be >= 2".into()));
        }
        Ok(())
    }
}

/// Runs the chain from `w = 0` and returns a `chain_length x D` matrix of
/// recorded states.
pub fn sample_chain(ds: &RegressionDataset, cfg: &SamplerConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let gram = Gram::new(ds);
    let a = gram.xtx();
    let g = gram.xty();
    let dims = ds.n_params();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let proposal = Normal::new(0.0, cfg.proposal_sigma)
        .map_err(|e| Error::InvalidConfig(format!("proposal: {e}")))?;

    let mut w = DVector::<f64>::zeros(dims);
    // a_w = X^T X w, kept in sync with w
    let mut a_w = DVector::<f64>::zeros(dims);
    let mut samples = DMatrix::<f64>::zeros(cfg.chain_length, dims);

    let step = |w: &mut DVector<f64>, a_w: &mut DVector<f64>, rng: &mut ChaCha8Rng| {
        let d = rng.random_range(0..dims);
        let delta = proposal.sample(rng);
        let dcost = delta * (2.0 * a_w[d] + delta * a[(d, d)] - 2.0 * g[d]);
        if accept(dcost, cfg.temperature, rng) {
            w[d] += delta;
            a_w.axpy(delta, &a.column(d), 1.0);
        }
    };

    for _ in 0..cfg.burn_in * cfg.interval {
        step(&mut w, &mut a_w, &mut rng);
    }
    for row in 0..cfg.chain_length {
        for _ in 0..cfg.interval {
            step(&mut w, &mut a_w, &mut rng);
        }
        samples.row_mut(row).copy_from(&w.transpose());
    }
    Ok(samples)
}

/// Metropolis rule: always accept downhill, otherwise with `exp(-dE/T)`.
#[inline]
pub(crate) fn accept<R: Rng>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp()
}

/// Pearson correlations between the columns of `samples`.
///
/// A column with zero variance is correlated 0 with everything, including
/// itself.
pub fn correlation_matrix(samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = samples.nrows();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "need at least two samples for correlations".into(),
        ));
    }
    let dims = samples.ncols();
    let means: Vec<f64> = samples.column_iter().map(|c| c.mean()).collect();
    let centered = DMatrix::from_fn(n, dims, |i, j| samples[(i, j)] - means[j]);
    let cov = centered.tr_mul(&centered);
    let scale: Vec<f64> = (0..dims).map(|j| cov[(j, j)].sqrt()).collect();

    Ok(DMatrix::from_fn(dims, dims, |i, j| {
        if scale[i] == 0.0 || scale[j] == 0.0 {
            0.0
        } else if i == j {
            1.0
        } else {
            (cov[(i, j)] / (scale[i] * scale[j])).clamp(-1.0, 1.0)
        }
    }))
}

/// A parameter pair chosen for bit sharing, with `first < second`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedPair {
    pub first: usize,
    pub second: usize,
    pub rho: f64,
}

impl SelectedPair {
    pub fn indices(&self) -> (usize, usize) {
        (self.first, self.second)
    }
}

/// Greedy disjoint matching over pairs with signed correlation at or above
/// `threshold`, strongest first. Ties go to the lexicographically smaller
/// pair.
pub fn select_pairs(corr: &DMatrix<f64>, threshold: f64) -> Result<Vec<SelectedPair>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold {threshold} outside (0, 1]"
        )));
    }
    if !corr.is_square() {
        return Err(Error::Dimension {
            context: "correlation matrix",
            expected: corr.nrows(),
            actual: corr.ncols(),
        });
    }
    let dims = corr.nrows();
    let mut candidates: Vec<SelectedPair> = (0..dims)
        .flat_map(|i| ((i + 1)..dims).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let rho = corr[(i, j)];
            (rho >= threshold).then_some(SelectedPair {
                first: i,
                second: j,
                rho,
            })
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.rho
            .partial_cmp(&a.rho)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.indices().cmp(&b.indices()))
    });

    let mut used = vec![false; dims];
    let mut chosen = Vec::new();
    for pair in candidates {
        if !used[pair.first] && !used[pair.second] {
            used[pair.first] = true;
            used[pair.second] = true;
            chosen.push(pair);
        }
    }
    Ok(chosen)
}

/// Correlations and the pairs selected from them.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub corr: DMatrix<f64>,
    pub pairs: Vec<SelectedPair>,
    pub threshold: f64,
}

impl CorrelationReport {
    /// Samples a chain, estimates correlations and selects pairs.
    pub fn estimate(ds: &RegressionDataset, cfg: &SamplerConfig, threshold: f64) -> Result<Self> {
        let samples = sample_chain(ds, cfg)?;
        let corr = correlation_matrix(&samples)?;
        let pairs = select_pairs(&corr, threshold)?;
        Ok(Self {
            corr,
            pairs,
            threshold,
        })
    }

    pub fn pair_indices(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(SelectedPair::indices).collect()
    }

    /// Correlation matrix as CSV with header `param,w0,w1,...`.
    pub fn write_matrix_csv<W: Write>(&self, out: W) -> Result<()> {
        let dims = self.corr.nrows();
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["param".to_string()];
        header.extend((0..dims).map(|j| format!("w{j}")));
        writer.write_record(&header)?;
        for i in 0..dims {
            let mut row = vec![format!("w{i}")];
            row.extend((0..dims).map(|j| self.corr[(i, j)].to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Selected pairs as CSV with header `first,second,rho`.
    pub fn write_pairs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["first", "second", "rho"])?;
        for p in &self.pairs {
            writer.write_record([p.first.to_string(), p.second.to_string(), p.rho.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}
