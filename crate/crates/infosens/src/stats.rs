//! Non-parametric permutation testing of CMI estimates with family-wise
//! error-rate control.
//!
//! The null distribution is built by permuting the *target* column: one
//! permutation serves every candidate, and the recorded null statistic is the
//! maximum CMI over all remaining candidates, which controls the family-wise
//! error rate of the repeated tests in iterative selection.

use ndarray::ArrayView2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{KsgCmiBatch, KsgConfig};

/// Smallest surrogate count for which the minimum achievable p-value
/// `1/(n_perm+1)` can fall below 0.05.
pub const MIN_N_PERM: usize = 19;

/// Permutation-test configuration.
#[derive(Debug, Clone)]
pub struct PermTestConfig {
    /// Number of surrogate permutations.
    pub n_perm: usize,
    /// Critical alpha level.
    pub alpha_crit: f64,
    /// Base seed; surrogate `r` permutes with seed `seed + r`.
    pub seed: u64,
}

impl Default for PermTestConfig {
    fn default() -> Self {
        Self {
            n_perm: 200,
            alpha_crit: 0.05,
            seed: 0,
        }
    }
}

/// Outcome of one max-statistic permutation test.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    /// The winning candidate's CMI, in the estimator's configured unit.
    pub statistic: f64,
    /// Add-one randomization p-value: `(1 + #{null >= statistic}) / (1 + n_perm)`.
    pub p_value: f64,
    pub significant: bool,
    /// Null statistics in surrogate order, same unit as `statistic`.
    pub null_distribution: Vec<f64>,
}

/// Uniform random permutation of a column (Fisher-Yates), deterministic given
/// the seed.
pub fn permute(column: &[f64], seed: u64) -> Result<Vec<f64>> {
    let idx = permutation_indices(column.len(), seed)?;
    Ok(idx.iter().map(|&i| column[i]).collect())
}

pub(crate) fn permutation_indices(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "permutation needs at least 2 elements, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        idx.swap(i, j);
    }
    Ok(idx)
}

/// Max-statistic permutation test of the winning candidate's CMI with the
/// target, conditional on `cond`.
///
/// For each surrogate the target is permuted, `I(X; target_perm | cond)` is
/// recomputed for every candidate, and the maximum enters the null
/// distribution. The caller must have established that `winner_index` attains
/// the maximal CMI among `candidates`.
pub fn max_stat_test(
    candidates: &[Vec<f64>],
    winner_index: usize,
    target: &[f64],
    cond: ArrayView2<f64>,
    ksg: &KsgConfig,
    cfg: &PermTestConfig,
) -> Result<TestOutcome> {
    let batch = KsgCmiBatch::new(candidates, target, cond, ksg)?;
    max_stat_test_with_batch(&batch, winner_index, ksg, cfg)
}

/// Same test, but reusing an already-built estimation batch (the selection
/// loop scores candidates and tests the winner on one batch).
pub(crate) fn max_stat_test_with_batch(
    batch: &KsgCmiBatch,
    winner_index: usize,
    ksg: &KsgConfig,
    cfg: &PermTestConfig,
) -> Result<TestOutcome> {
    if winner_index >= batch.n_candidates() {
        return Err(Error::InvalidArgument(format!(
            "winner index {winner_index} out of range for {} candidates",
            batch.n_candidates()
        )));
    }
    if cfg.n_perm < MIN_N_PERM {
        return Err(Error::InvalidArgument(format!(
            "n_perm must be at least {MIN_N_PERM}, got {}",
            cfg.n_perm
        )));
    }
    if !(cfg.alpha_crit > 0.0 && cfg.alpha_crit < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha_crit must lie in (0,1), got {}",
            cfg.alpha_crit
        )));
    }

    let n = batch.n_samples();
    let base = batch.prepare_target(None);
    let statistic_nats = batch.cmi_nats(winner_index, &base);

    let null_nats: Vec<f64> = (1..=cfg.n_perm)
        .into_par_iter()
        .map(|r| {
            let perm = permutation_indices(n, cfg.seed.wrapping_add(r as u64))
                .expect("n validated above");
            let prepared = batch.prepare_target(Some(&perm));
            (0..batch.n_candidates())
                .map(|c| batch.cmi_nats(c, &prepared))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let exceed = null_nats.iter().filter(|&&v| v >= statistic_nats).count();
    let p_value = (1 + exceed) as f64 / (1 + cfg.n_perm) as f64;

    Ok(TestOutcome {
        statistic: ksg.unit.from_nats(statistic_nats),
        p_value,
        significant: p_value < cfg.alpha_crit,
        null_distribution: null_nats.iter().map(|&v| ksg.unit.from_nats(v)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permute_preserves_multiset() {
        let column = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let shuffled = permute(&column, 42).unwrap();
        let mut a = column.clone();
        let mut b = shuffled.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn permute_is_deterministic() {
        let column = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(permute(&column, 7).unwrap(), permute(&column, 7).unwrap());
    }

    #[test]
    fn permute_two_elements_is_identity_or_swap() {
        for seed in 0..20 {
            let out = permute(&[1.0, 2.0], seed).unwrap();
            assert!(out == vec![1.0, 2.0] || out == vec![2.0, 1.0]);
        }
    }

    #[test]
    fn permute_rejects_single_element() {
        assert!(permute(&[1.0], 0).is_err());
    }

    #[test]
    fn copied_target_reaches_minimum_p_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 300;
        let winner: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let decoy: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let target = winner.clone();
        let cond = Array2::<f64>::zeros((n, 0));
        let cfg = PermTestConfig {
            n_perm: 200,
            ..PermTestConfig::default()
        };
        let outcome = max_stat_test(
            &[winner, decoy],
            0,
            &target,
            cond.view(),
            &KsgConfig::default(),
            &cfg,
        )
        .unwrap();
        assert_eq!(outcome.p_value, 1.0 / 201.0);
        assert!(outcome.significant);
        assert_eq!(outcome.null_distribution.len(), 200);
    }

    #[test]
    fn independent_target_is_rarely_significant() {
        // Single check here; the Monte-Carlo FWER bound runs in the
        // acceptance suite.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 200;
        let candidates: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let target: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let cond = Array2::<f64>::zeros((n, 0));
        let winner = best_candidate(&candidates, &target);
        let outcome = max_stat_test(
            &candidates,
            winner,
            &target,
            cond.view(),
            &KsgConfig::default(),
            &PermTestConfig::default(),
        )
        .unwrap();
        assert!(!outcome.significant, "p = {}", outcome.p_value);
    }

    #[test]
    fn outcome_is_deterministic_including_null_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 120;
        let candidates: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let target: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let cond = Array2::<f64>::zeros((n, 0));
        let cfg = PermTestConfig {
            n_perm: 25,
            ..PermTestConfig::default()
        };
        let a = max_stat_test(
            &candidates,
            0,
            &target,
            cond.view(),
            &KsgConfig::default(),
            &cfg,
        )
        .unwrap();
        let b = max_stat_test(
            &candidates,
            0,
            &target,
            cond.view(),
            &KsgConfig::default(),
            &cfg,
        )
        .unwrap();
        assert_eq!(a.statistic.to_bits(), b.statistic.to_bits());
        assert_eq!(a.p_value, b.p_value);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.null_distribution), bits(&b.null_distribution));
    }

    #[test]
    fn p_value_respects_add_one_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 100;
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let target = x.clone();
        let cond = Array2::<f64>::zeros((n, 0));
        let cfg = PermTestConfig {
            n_perm: 19,
            ..PermTestConfig::default()
        };
        let outcome =
            max_stat_test(&[x], 0, &target, cond.view(), &KsgConfig::default(), &cfg).unwrap();
        assert!(outcome.p_value >= 1.0 / 20.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let cond = Array2::<f64>::zeros((50, 0));
        let target: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let cfg = PermTestConfig {
            n_perm: 10,
            ..PermTestConfig::default()
        };
        assert!(max_stat_test(
            &[target.clone()],
            0,
            &target,
            cond.view(),
            &KsgConfig::default(),
            &cfg
        )
        .is_err());
        assert!(max_stat_test(
            &[],
            0,
            &target,
            cond.view(),
            &KsgConfig::default(),
            &PermTestConfig::default()
        )
        .is_err());
    }

    fn best_candidate(candidates: &[Vec<f64>], target: &[f64]) -> usize {
        let cond = Array2::<f64>::zeros((target.len(), 0));
        let batch = KsgCmiBatch::new(candidates, target, cond.view(), &KsgConfig::default())
            .unwrap();
        let prepared = batch.prepare_target(None);
        (0..candidates.len())
            .map(|c| (c, batch.cmi_nats(c, &prepared)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
            .unwrap()
    }
}
