//! Forward feature selection with a conditional-mutual-information criterion.
//!
//! Each iteration scores every remaining feature by `I(X; Y | S)` with the
//! already-selected set `S` as the conditioning block, picks the maximizer and
//! subjects it to the max-statistic permutation test. Selection stops at the
//! first insignificant winner, when candidates run out, or at the size cap.

use ndarray::Array2;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{KsgCmiBatch, KsgConfig};
use crate::stats::{max_stat_test_with_batch, PermTestConfig, TestOutcome};

/// Why the selection loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The best remaining candidate failed the permutation test.
    NoSignificantCandidate,
    /// Every feature was selected.
    ExhaustedCandidates,
    /// The configured maximum set size was reached.
    MaxSetSize,
}

/// One accepted selection step.
#[derive(Debug, Clone)]
pub struct SelectionStep {
    pub index: usize,
    pub name: String,
    /// Winning CMI at this step, in the estimator's configured unit.
    pub cmi: f64,
    pub p_value: f64,
}

/// Result of a selection run: warm-start features (if any), accepted steps in
/// order, and the stop reason.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub initial: Vec<usize>,
    pub steps: Vec<SelectionStep>,
    pub terminated: Termination,
}

impl SelectionResult {
    /// All selected feature indices: warm-start set followed by accepted steps.
    pub fn selected_indices(&self) -> Vec<usize> {
        let mut idx = self.initial.clone();
        idx.extend(self.steps.iter().map(|s| s.index));
        idx
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty() && self.steps.is_empty()
    }
}

/// Select features starting from the empty set.
pub fn select_features(
    data: &Dataset,
    ksg: &KsgConfig,
    test: &PermTestConfig,
    max_set_size: usize,
) -> Result<SelectionResult> {
    select_features_with_initial(data, ksg, test, max_set_size, &[])
}

/// Select features starting from a caller-provided warm-start set. Warm-start
/// features enter the conditioning set untested.
pub fn select_features_with_initial(
    data: &Dataset,
    ksg: &KsgConfig,
    test: &PermTestConfig,
    max_set_size: usize,
    initial: &[usize],
) -> Result<SelectionResult> {
    if max_set_size == 0 {
        return Err(Error::InvalidArgument(
            "max_set_size must be at least 1".into(),
        ));
    }
    let d = data.n_features();
    for &f in initial {
        if f >= d {
            return Err(Error::InvalidArgument(format!(
                "warm-start feature {f} out of range for {d} features"
            )));
        }
        if initial.iter().filter(|&&g| g == f).count() > 1 {
            return Err(Error::InvalidArgument(format!(
                "warm-start feature {f} listed twice"
            )));
        }
    }

    let mut selected: Vec<usize> = initial.to_vec();
    let mut remaining: Vec<usize> = (0..d).filter(|f| !initial.contains(f)).collect();
    let mut steps = Vec::new();
    let mut iteration: u64 = 0;

    let terminated = loop {
        if selected.len() >= max_set_size {
            break Termination::MaxSetSize;
        }
        if remaining.is_empty() {
            break Termination::ExhaustedCandidates;
        }

        let cond = stack_columns(data, &selected);
        let candidates: Vec<Vec<f64>> = remaining.iter().map(|&f| data.column(f)).collect();
        let batch = KsgCmiBatch::new(&candidates, data.target(), cond.view(), ksg)?;
        let base = batch.prepare_target(None);
        let scores: Vec<f64> = (0..candidates.len())
            .into_par_iter()
            .map(|c| batch.cmi_nats(c, &base))
            .collect();

        // `remaining` is ascending, so the first strict maximum breaks ties
        // toward the lowest feature index.
        let mut winner = 0;
        for c in 1..scores.len() {
            if scores[c] > scores[winner] {
                winner = c;
            }
        }

        let outcome = run_step_test(&batch, winner, ksg, test, iteration)?;
        if !outcome.significant {
            break Termination::NoSignificantCandidate;
        }

        let feature = remaining.remove(winner);
        steps.push(SelectionStep {
            index: feature,
            name: data.names()[feature].clone(),
            cmi: outcome.statistic,
            p_value: outcome.p_value,
        });
        selected.push(feature);
        iteration += 1;
    };

    Ok(SelectionResult {
        initial: initial.to_vec(),
        steps,
        terminated,
    })
}

/// Each iteration gets its own surrogate seed stream, offset by a golden-ratio
/// stride so streams never overlap for any n_perm.
fn run_step_test(
    batch: &KsgCmiBatch,
    winner: usize,
    ksg: &KsgConfig,
    test: &PermTestConfig,
    iteration: u64,
) -> Result<TestOutcome> {
    let step_cfg = PermTestConfig {
        seed: test
            .seed
            .wrapping_add(iteration.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        ..test.clone()
    };
    max_stat_test_with_batch(batch, winner, ksg, &step_cfg)
}

fn stack_columns(data: &Dataset, indices: &[usize]) -> Array2<f64> {
    let n = data.n_samples();
    let mut cond = Array2::zeros((n, indices.len()));
    for (slot, &f) in indices.iter().enumerate() {
        cond.column_mut(slot).assign(&data.values().column(f));
    }
    cond
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quick_test_cfg(seed: u64) -> PermTestConfig {
        PermTestConfig {
            n_perm: 99,
            alpha_crit: 0.05,
            seed,
        }
    }

    fn dataset_from_columns(columns: Vec<Vec<f64>>, target: Vec<f64>) -> Dataset {
        let n = target.len();
        let d = columns.len();
        let mut values = Array2::zeros((n, d));
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[(i, j)] = v;
            }
        }
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        Dataset::new(values, names, target).unwrap()
    }

    /// Target driven by x1; x2 is an exact duplicate of x1; x3 is noise.
    fn duplicate_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let x3: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let target: Vec<f64> = x1
            .iter()
            .map(|&v| v + 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        dataset_from_columns(vec![x1.clone(), x1, x3], target)
    }

    #[test]
    fn duplicate_feature_is_never_added_twice() {
        let data = duplicate_dataset(400, 5);
        let result =
            select_features(&data, &KsgConfig::default(), &quick_test_cfg(11), 10).unwrap();
        let picked = result.selected_indices();
        assert!(!picked.is_empty(), "the informative feature must be found");
        assert!(
            !(picked.contains(&0) && picked.contains(&1)),
            "both copies selected: {picked:?}"
        );
        let mut dedup = picked.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), picked.len(), "duplicate entries in {picked:?}");
    }

    #[test]
    fn independent_target_yields_empty_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 250;
        let columns: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let target: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let data = dataset_from_columns(columns, target);
        let result =
            select_features(&data, &KsgConfig::default(), &quick_test_cfg(2), 10).unwrap();
        assert!(result.is_empty(), "selected {:?}", result.selected_indices());
        assert_eq!(result.terminated, Termination::NoSignificantCandidate);
    }

    #[test]
    fn pure_synergy_pair_is_not_detected() {
        // y = xor(x2, x3) in sign coding; no feature carries marginal
        // information, so iterative inclusion cannot start.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 400;
        let x1: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let x2: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let x3: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let target: Vec<f64> = (0..n)
            .map(|i| x2[i] * x3[i] + 0.05 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let data = dataset_from_columns(vec![x1, x2, x3], target);
        let result =
            select_features(&data, &KsgConfig::default(), &quick_test_cfg(4), 10).unwrap();
        assert!(result.is_empty(), "selected {:?}", result.selected_indices());
    }

    #[test]
    fn result_is_deterministic() {
        let data = duplicate_dataset(300, 17);
        let run = || {
            select_features(&data, &KsgConfig::default(), &quick_test_cfg(23), 10).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.selected_indices(), b.selected_indices());
        assert_eq!(a.terminated, b.terminated);
        for (sa, sb) in a.steps.iter().zip(&b.steps) {
            assert_eq!(sa.cmi.to_bits(), sb.cmi.to_bits());
            assert_eq!(sa.p_value, sb.p_value);
        }
    }

    #[test]
    fn reported_cmi_matches_rerun_estimate() {
        let data = duplicate_dataset(300, 41);
        let ksg = KsgConfig::default();
        let result = select_features(&data, &ksg, &quick_test_cfg(7), 10).unwrap();
        assert!(!result.steps.is_empty());

        let mut conditioning: Vec<usize> = Vec::new();
        for step in &result.steps {
            let x = Array2::from_shape_vec(
                (data.n_samples(), 1),
                data.column(step.index),
            )
            .unwrap();
            let y =
                Array2::from_shape_vec((data.n_samples(), 1), data.target().to_vec()).unwrap();
            let cond = stack_columns(&data, &conditioning);
            let again =
                crate::estimators::ksg_cmi(x.view(), y.view(), cond.view(), &ksg).unwrap();
            assert_eq!(again.value.to_bits(), step.cmi.to_bits());
            conditioning.push(step.index);
        }
    }

    #[test]
    fn max_set_size_caps_growth() {
        let data = duplicate_dataset(300, 3);
        let result =
            select_features(&data, &KsgConfig::default(), &quick_test_cfg(1), 1).unwrap();
        assert_eq!(result.steps.len(), 1);
        assert_eq!(result.terminated, Termination::MaxSetSize);
    }

    #[test]
    fn warm_start_excludes_initial_from_candidates() {
        let data = duplicate_dataset(300, 29);
        let result = select_features_with_initial(
            &data,
            &KsgConfig::default(),
            &quick_test_cfg(13),
            10,
            &[0],
        )
        .unwrap();
        // With x1 conditioned away, its duplicate carries nothing new.
        assert!(!result.selected_indices().contains(&1));
        assert_eq!(result.initial, vec![0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let data = duplicate_dataset(100, 1);
        assert!(select_features(&data, &KsgConfig::default(), &quick_test_cfg(0), 0).is_err());
        assert!(select_features_with_initial(
            &data,
            &KsgConfig::default(),
            &quick_test_cfg(0),
            5,
            &[9]
        )
        .is_err());
        assert!(select_features_with_initial(
            &data,
            &KsgConfig::default(),
            &quick_test_cfg(0),
            5,
            &[0, 0]
        )
        .is_err());
    }
}
