//! (mu, lambda)-evolution strategy over the blade shape parameters.
//!
//! Offspring are drawn from uniformly chosen parents with isotropic Gaussian
//! mutation; the step size adapts by the 1/5th-success rule. Parameters live
//! in [-1, 1] (relative units of the maximal allowed variation) and are
//! decoded to physical deformations through fixed per-field scales. Every
//! evaluation is logged with its extracted geometric features.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::geometry::{build_geometry, extract_features, BladeGeometry, BladeParams};
use super::surrogate::{surrogate_fitness, SurrogateConstants};
use crate::error::{Error, Result};

/// Physical scale of one rotation parameter unit, radians.
pub const ROTATION_SCALE: f64 = 0.1;
/// Physical scale of one translation parameter unit, chord-relative.
pub const TRANSLATION_SCALE: f64 = 0.1;
/// Physical scale of one Hicks-Henne amplitude unit, thickness-relative.
pub const HH_SCALE: f64 = 0.02;

/// Number of span stations the optimizer builds per evaluation.
const BUILD_STATIONS: usize = 7;
/// Step-size multiplier of the 1/5th-success rule.
const STEP_ADAPT: f64 = 1.22;

/// Evolution-strategy configuration.
#[derive(Debug, Clone)]
pub struct EsConfig {
    pub lambda: usize,
    pub mu: usize,
    pub generations: usize,
    /// Initial mutation step size in relative parameter units.
    pub sigma0: f64,
    pub seed: u64,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            lambda: 12,
            mu: 4,
            generations: 161,
            sigma0: 0.05,
            seed: 0,
        }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0 || self.generations == 0 {
            return Err(Error::InvalidArgument(
                "lambda and generations must be positive".into(),
            ));
        }
        if self.mu == 0 {
            return Err(Error::InvalidArgument("mu must be positive".into()));
        }
        if self.mu > self.lambda {
            return Err(Error::InvalidArgument(format!(
                "mu exceeds lambda ({} > {})",
                self.mu, self.lambda
            )));
        }
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma0 must be positive, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }
}

/// One logged evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub generation: usize,
    /// Flattened shape parameters in relative units.
    pub params: Vec<f64>,
    /// Extracted geometric features of the evaluated blade.
    pub features: Vec<f64>,
    pub fitness: f64,
}

/// A completed optimization run: `lambda * generations` records plus the
/// feature naming of the extraction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EsRun {
    pub records: Vec<RunRecord>,
    pub feature_names: Vec<String>,
}

/// Decode a relative parameter vector into physical blade deformations.
pub fn decode_params(flat: &[f64], n_hh: usize) -> Result<BladeParams> {
    let mut scaled = Vec::with_capacity(flat.len());
    let stride = n_hh + 3;
    for (i, &v) in flat.iter().enumerate() {
        let scale = match i % stride {
            0 => ROTATION_SCALE,
            1 | 2 => TRANSLATION_SCALE,
            _ => HH_SCALE,
        };
        scaled.push(v * scale);
    }
    BladeParams::from_flat(&scaled, n_hh)
}

fn splitmix64(mut state: u64) -> u64 {
    state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run the optimizer, logging one record per evaluation. Deterministic given
/// the seed: every offspring draws from its own stream keyed on
/// (seed, generation, offspring index).
pub fn run_es(
    cfg: &EsConfig,
    n_hh: usize,
    baseline: &BladeGeometry,
    constants: &SurrogateConstants,
    n_sections: usize,
    n_points: usize,
) -> Result<EsRun> {
    cfg.validate()?;
    if n_hh < 1 {
        return Err(Error::InvalidArgument("n_hh must be at least 1".into()));
    }
    let dim = BladeParams::param_count(n_hh);

    let evaluate = |params: &[f64]| -> Result<(Vec<f64>, f64)> {
        let geometry = build_geometry(baseline, &decode_params(params, n_hh)?, BUILD_STATIONS)?;
        let features = extract_features(&geometry, n_sections, n_points)?;
        Ok((features.values, surrogate_fitness(&geometry, constants)))
    };

    let feature_names = extract_features(baseline, n_sections, n_points)?.names;

    let ancestor = vec![0.0; dim];
    let (_, ancestor_fitness) = evaluate(&ancestor)?;
    let mut parents: Vec<(Vec<f64>, f64)> = vec![(ancestor, ancestor_fitness)];
    let mut sigma = cfg.sigma0;
    let mut records = Vec::with_capacity(cfg.lambda * cfg.generations);

    for generation in 0..cfg.generations {
        let offspring: Vec<Vec<f64>> = (0..cfg.lambda)
            .map(|o| {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(
                    cfg.seed ^ (generation as u64).wrapping_mul(0x1_0000).wrapping_add(o as u64),
                ));
                let parent = &parents[rng.random_range(0..parents.len())].0;
                parent
                    .iter()
                    .map(|&p| {
                        let step: f64 = rng.sample(rand_distr::StandardNormal);
                        (p + sigma * step).clamp(-1.0, 1.0)
                    })
                    .collect()
            })
            .collect();

        let evaluated: Vec<(Vec<f64>, f64)> = offspring
            .par_iter()
            .map(|child| evaluate(child))
            .collect::<Result<Vec<_>>>()?;

        let parent_best = parents
            .iter()
            .map(|(_, f)| *f)
            .fold(f64::INFINITY, f64::min);
        let successes = evaluated.iter().filter(|(_, f)| *f < parent_best).count();

        for (child, (features, fitness)) in offspring.iter().zip(&evaluated) {
            records.push(RunRecord {
                generation,
                params: child.clone(),
                features: features.clone(),
                fitness: *fitness,
            });
        }

        // Comma selection: parents are the best mu offspring of this
        // generation only.
        let mut order: Vec<usize> = (0..cfg.lambda).collect();
        order.sort_by(|&a, &b| evaluated[a].1.total_cmp(&evaluated[b].1));
        parents = order
            .iter()
            .take(cfg.mu)
            .map(|&i| (offspring[i].clone(), evaluated[i].1))
            .collect();

        let rate = successes as f64 / cfg.lambda as f64;
        if rate > 0.2 {
            sigma *= STEP_ADAPT;
        } else if rate < 0.2 {
            sigma /= STEP_ADAPT;
        }
        sigma = sigma.clamp(1e-4, 0.5);
    }

    Ok(EsRun {
        records,
        feature_names,
    })
}
