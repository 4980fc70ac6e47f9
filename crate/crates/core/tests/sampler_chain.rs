mod common;

use common::{analytic_correlation, random_dataset, rng};
use corrqubo::sampler::{correlation_matrix, sample_chain, select_pairs, SelectedPair};
use corrqubo::{RegressionDataset, SamplerConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn cfg(temperature: f64, sigma: f64, dims: usize, length: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        temperature,
        proposal_sigma: sigma,
        interval: 2 * dims,
        chain_length: length,
        burn_in: 50,
        seed,
    }
}

#[test]
fn chain_is_reproducible() {
    let ds = random_dataset(20, 4, &mut rng(41));
    let c = cfg(0.5, 0.3, 4, 200, 9);
    assert_eq!(
        sample_chain(&ds, &c).unwrap(),
        sample_chain(&ds, &c).unwrap()
    );
    let other = SamplerConfig {
        seed: 10,
        ..c.clone()
    };
    assert_ne!(
        sample_chain(&ds, &c).unwrap(),
        sample_chain(&ds, &other).unwrap()
    );
}

#[test]
fn chain_shape_and_start() {
    let ds = random_dataset(20, 3, &mut rng(42));
    let c = SamplerConfig::for_dims(3, 1);
    let s = sample_chain(&ds, &c).unwrap();
    assert_eq!((s.nrows(), s.ncols()), (100, 3));
}

#[test]
fn vanishing_proposal_stays_at_origin() {
    let ds = random_dataset(20, 3, &mut rng(43));
    let c = SamplerConfig {
        proposal_sigma: 1e-12,
        ..SamplerConfig::for_dims(3, 4)
    };
    let s = sample_chain(&ds, &c).unwrap();
    assert!(s.iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn one_dimensional_variance_matches_gaussian() {
    // cost = N w^2 - 2 w sum(y): variance T / (2N)
    let targets: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
    let ds = RegressionDataset::from_features(&vec![vec![]; 10], &targets).unwrap();
    let temperature = 1.0;
    let analytic = temperature / (2.0 * 10.0);
    let c = SamplerConfig {
        temperature,
        proposal_sigma: analytic.sqrt() * 2.0,
        interval: 2,
        chain_length: 10_000,
        burn_in: 20,
        seed: 44,
    };
    let s = sample_chain(&ds, &c).unwrap();
    let col: Vec<f64> = s.column(0).iter().copied().collect();
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
    assert!(
        (var / analytic - 1.0).abs() < 0.2,
        "var {var} vs {analytic}"
    );
    assert!((mean - 0.45).abs() < 0.05, "mean {mean}");
}

#[test]
fn correlations_of_equilibrated_chain() {
    let mut r = rng(45);
    let features: Vec<Vec<f64>> = (0..30)
        .map(|_| {
            let a: f64 = r.random_range(-1.0..1.0);
            vec![a, a + r.random_range(-0.5..0.5)]
        })
        .collect();
    let targets: Vec<f64> = features.iter().map(|x| 1.0 + x[0] - x[1]).collect();
    let ds = RegressionDataset::from_features(&features, &targets).unwrap();
    let temperature = 1.0;
    let c = SamplerConfig {
        temperature,
        proposal_sigma: 0.2,
        interval: 6,
        chain_length: 10_000,
        burn_in: 100,
        seed: 46,
    };
    let emp = correlation_matrix(&sample_chain(&ds, &c).unwrap()).unwrap();
    let exact = analytic_correlation(&ds, temperature);
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                (emp[(i, j)] - exact[i][j]).abs() < 0.15,
                "({i},{j}): {} vs {}",
                emp[(i, j)],
                exact[i][j]
            );
        }
    }
}

#[test]
fn independent_columns_are_uncorrelated() {
    let mut r = rng(47);
    let data: Vec<f64> = (0..20_000).map(|_| r.random::<f64>()).collect();
    let m = DMatrix::from_row_slice(10_000, 2, &data);
    let c = correlation_matrix(&m).unwrap();
    assert!(c[(0, 1)].abs() < 0.05);
}

fn corr_strategy() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..9).prop_flat_map(|d| {
        proptest::collection::vec(-1.0f64..=1.0, d * (d - 1) / 2).prop_map(move |upper| {
            let mut m = DMatrix::identity(d, d);
            let mut it = upper.into_iter();
            for i in 0..d {
                for j in (i + 1)..d {
                    let v = it.next().unwrap();
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        })
    })
}

proptest! {
    #[test]
    fn selection_is_disjoint_sorted_and_stable(
        corr in corr_strategy(),
        threshold in 0.05f64..=1.0,
    ) {
        let picked = select_pairs(&corr, threshold).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for p in &picked {
            prop_assert!(p.first < p.second);
            prop_assert!(p.rho >= threshold);
            prop_assert!(seen.insert(p.first) && seen.insert(p.second));
        }
        prop_assert!(picked.windows(2).all(|w| w[0].rho >= w[1].rho));

        // rerun on the submatrix of chosen variables
        let vars: Vec<usize> = picked.iter().flat_map(|p| [p.first, p.second]).collect();
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        let sub = DMatrix::from_fn(sorted.len(), sorted.len(), |i, j| corr[(sorted[i], sorted[j])]);
        let again: Vec<(usize, usize)> = select_pairs(&sub, threshold)
            .unwrap()
            .iter()
            .map(|p: &SelectedPair| (sorted[p.first], sorted[p.second]))
            .collect();
        let orig: Vec<(usize, usize)> = picked.iter().map(|p| p.indices()).collect();
        prop_assert_eq!(again, orig);
    }

    #[test]
    fn correlations_are_bounded_and_symmetric(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let data: Vec<f64> = (0..50 * d).map(|_| r.random_range(-3.0..3.0)).collect();
        let c = correlation_matrix(&DMatrix::from_row_slice(50, d, &data)).unwrap();
        for i in 0..d {
            prop_assert!((c[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..d {
                prop_assert_eq!(c[(i, j)], c[(j, i)]);
                prop_assert!(c[(i, j)].abs() <= 1.0);
            }
        }
    }
}
