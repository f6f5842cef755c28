//! Planted statistical benchmarks with known ground truth, used as oracles
//! for the selection and decomposition pipelines.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Ten-feature benchmark with a planted synergy:
/// `y = x1 + 0.3 x2 + x2 x3 + 0.05 eps`, where x1 is standard normal, x2 and
/// x3 are uniform signs, and x4..x10 are independent standard normal decoys.
/// x3 carries no marginal information about y but positive conditional
/// information given x2 (and vice versa).
pub fn planted_benchmark(n_samples: usize, seed: u64) -> Result<Dataset> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "planted benchmark needs at least 100 samples, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((n_samples, 10));
    let mut target = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x1: f64 = rng.sample(rand_distr::StandardNormal);
        let x2 = sign(&mut rng);
        let x3 = sign(&mut rng);
        values[(i, 0)] = x1;
        values[(i, 1)] = x2;
        values[(i, 2)] = x3;
        for j in 3..10 {
            values[(i, j)] = rng.sample(rand_distr::StandardNormal);
        }
        let noise: f64 = rng.sample(rand_distr::StandardNormal);
        target.push(x1 + 0.3 * x2 + x2 * x3 + 0.05 * noise);
    }
    let names = (1..=10).map(|j| format!("x{j}")).collect();
    let mut dataset = Dataset::new(values, names, target)?;
    dataset.set_meta("generator", "planted_benchmark");
    dataset.set_meta("seed", &seed.to_string());
    Ok(dataset)
}

/// Pure-synergy benchmark: `y = x2 * x3 + 0.05 eps` with sign-coded x2, x3
/// and three standard normal decoys (x1, x4, x5). No single feature carries
/// marginal information about y.
pub fn pure_synergy_benchmark(n_samples: usize, seed: u64) -> Result<Dataset> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "pure-synergy benchmark needs at least 100 samples, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((n_samples, 5));
    let mut target = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        values[(i, 0)] = rng.sample(rand_distr::StandardNormal);
        let x2 = sign(&mut rng);
        let x3 = sign(&mut rng);
        values[(i, 1)] = x2;
        values[(i, 2)] = x3;
        values[(i, 3)] = rng.sample(rand_distr::StandardNormal);
        values[(i, 4)] = rng.sample(rand_distr::StandardNormal);
        let noise: f64 = rng.sample(rand_distr::StandardNormal);
        target.push(x2 * x3 + 0.05 * noise);
    }
    let names = (1..=5).map(|j| format!("x{j}")).collect();
    let mut dataset = Dataset::new(values, names, target)?;
    dataset.set_meta("generator", "pure_synergy_benchmark");
    dataset.set_meta("seed", &seed.to_string());
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{bin_equal_frequency, BinnedDataset};
    use crate::estimators::{discrete_cmi, discrete_mi, ksg_mi, KsgConfig};
    use ndarray::Array2;

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(&x, &y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let va: f64 = a.iter().map(|&x| (x - ma) * (x - ma)).sum::<f64>() / n;
        let vb: f64 = b.iter().map(|&y| (y - mb) * (y - mb)).sum::<f64>() / n;
        cov / (va * vb).sqrt()
    }

    #[test]
    fn synergy_feature_is_marginally_uncorrelated() {
        let data = planted_benchmark(2000, 1).unwrap();
        let x3 = data.column(2);
        let r = correlation(&x3, data.target());
        assert!(r.abs() <= 0.05, "corr(x3, y) = {r}");
    }

    #[test]
    fn conditioning_on_x2_reveals_x3() {
        let data = planted_benchmark(2000, 2).unwrap();
        let x3 = bin_equal_frequency(&data.column(2), 3).unwrap();
        let x2 = bin_equal_frequency(&data.column(1), 3).unwrap();
        let y = bin_equal_frequency(data.target(), 3).unwrap();
        let marginal = discrete_mi(&x3, &y).unwrap();
        let conditional = discrete_cmi(&x3, &y, &x2).unwrap();
        assert!(
            conditional > marginal + 0.05,
            "conditional {conditional} vs marginal {marginal}"
        );
    }

    #[test]
    fn decoys_carry_no_information() {
        let data = planted_benchmark(2000, 3).unwrap();
        let y = Array2::from_shape_vec((2000, 1), data.target().to_vec()).unwrap();
        for j in 3..10 {
            let x = Array2::from_shape_vec((2000, 1), data.column(j)).unwrap();
            let est = ksg_mi(x.view(), y.view(), &KsgConfig::default()).unwrap();
            assert!(est.value.abs() <= 0.03, "decoy x{} MI = {}", j + 1, est.value);
        }
    }

    #[test]
    fn benchmarks_are_deterministic_and_sized() {
        let a = planted_benchmark(200, 7).unwrap();
        let b = planted_benchmark(200, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_features(), 10);
        assert!(planted_benchmark(50, 0).is_err());

        let s = pure_synergy_benchmark(200, 7).unwrap();
        assert_eq!(s.n_features(), 5);
        assert!(pure_synergy_benchmark(10, 0).is_err());
    }

    #[test]
    fn pure_synergy_target_is_marginally_flat() {
        let data = pure_synergy_benchmark(2000, 11).unwrap();
        let binned = BinnedDataset::from_dataset(&data, 2).unwrap();
        for j in 1..=2 {
            let mi = discrete_mi(&binned.columns[j], &binned.target_codes).unwrap();
            assert!(mi <= 0.02, "x{} marginal MI = {mi}", j + 1);
        }
        let cmi = discrete_cmi(&binned.columns[1], &binned.target_codes, &binned.columns[2])
            .unwrap();
        assert!(cmi > 0.5, "planted pair CMI = {cmi}");
    }
}
