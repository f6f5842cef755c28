//! Synthetic shape-optimization data: Hicks-Henne-parametrized blade
//! sections, an analytic surrogate fitness with a feasibility penalty, a
//! (mu, lambda)-evolution strategy producing realistically biased run data,
//! geometric feature extraction, and planted statistical benchmarks.

mod benchmarks;
mod es;
mod geometry;
mod surrogate;

pub use benchmarks::{planted_benchmark, pure_synergy_benchmark};
pub use es::{
    decode_params, run_es, EsConfig, EsRun, RunRecord, HH_SCALE, ROTATION_SCALE,
    TRANSLATION_SCALE,
};
pub use geometry::{
    build_geometry, extract_features, hh_maxima_locations, hicks_henne, thickness_at,
    BladeGeometry, BladeParams, FeatureVector, Point, SectionDeform, Station, CONTROL_SPANS,
};
pub use surrogate::{
    geometry_penalty, surrogate_efficiency, surrogate_fitness, surrogate_probes,
    SurrogateConstants, SurrogateProbes,
};

use crate::data::Dataset;
use crate::error::Result;
use ndarray::Array2;

/// Turn a completed optimization run into the tabular dataset the analysis
/// modules consume: one row per evaluation, extracted features as columns,
/// fitness as the target.
pub fn run_to_dataset(run: &EsRun) -> Result<Dataset> {
    let n = run.records.len();
    let d = run.feature_names.len();
    let mut values = Array2::zeros((n, d));
    let mut target = Vec::with_capacity(n);
    for (i, record) in run.records.iter().enumerate() {
        for (j, &v) in record.features.iter().enumerate() {
            values[(i, j)] = v;
        }
        target.push(record.fitness);
    }
    Dataset::new(values, run.feature_names.clone(), target)
}
