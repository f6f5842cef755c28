//! Analytic surrogate for the flow-solver efficiency evaluation.
//!
//! The surrogate efficiency is a smooth function of a handful of geometric
//! probes chosen where real blades are known to be sensitive: tip thickness
//! near 30% chord, the trailing edge close to the tip, hub thickness at
//! mid-chord, plus one multiplicative interaction at mid-span and a linear
//! bias on the hub trailing edge. Fitness is `1 - eta + P` with a penalty `P`
//! for self-intersecting (negative-thickness) profiles.

use super::geometry::{thickness_at, BladeGeometry};

/// Fixed constants of the surrogate; the defaults are the versioned values
/// used by the generator and the test suites.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConstants {
    /// Efficiency at the quadratic optimum with all interaction probes zero.
    pub eta0: f64,
    /// Weight of the tip-thickness probe at 30% chord.
    pub tip_thickness_weight: f64,
    /// Weight of the tip trailing-edge height probe.
    pub tip_te_weight: f64,
    /// Weight of the hub-thickness probe at 50% chord.
    pub hub_thickness_weight: f64,
    /// Weight of the mid-span thickness x trailing-edge interaction.
    pub interaction_weight: f64,
    /// Weight of the linear hub trailing-edge bias.
    pub bias_weight: f64,
    /// Target tip thickness at 30% chord.
    pub tip_thickness_target: f64,
    /// Target tip trailing-edge height.
    pub tip_te_target: f64,
    /// Target hub thickness at 50% chord.
    pub hub_thickness_target: f64,
    /// Penalty slope per unit of negative thickness.
    pub penalty_slope: f64,
}

impl Default for SurrogateConstants {
    fn default() -> Self {
        Self {
            eta0: 0.92,
            tip_thickness_weight: 60.0,
            tip_te_weight: 40.0,
            hub_thickness_weight: 60.0,
            interaction_weight: 4.0,
            bias_weight: 0.3,
            tip_thickness_target: 0.045,
            tip_te_target: 0.04,
            hub_thickness_target: 0.045,
            penalty_slope: 1000.0,
        }
    }
}

impl SurrogateConstants {
    /// Key/value dump for run manifests.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        vec![
            ("surrogate.eta0".into(), format!("{}", self.eta0)),
            (
                "surrogate.tip_thickness_weight".into(),
                format!("{}", self.tip_thickness_weight),
            ),
            ("surrogate.tip_te_weight".into(), format!("{}", self.tip_te_weight)),
            (
                "surrogate.hub_thickness_weight".into(),
                format!("{}", self.hub_thickness_weight),
            ),
            (
                "surrogate.interaction_weight".into(),
                format!("{}", self.interaction_weight),
            ),
            ("surrogate.bias_weight".into(), format!("{}", self.bias_weight)),
            (
                "surrogate.tip_thickness_target".into(),
                format!("{}", self.tip_thickness_target),
            ),
            ("surrogate.tip_te_target".into(), format!("{}", self.tip_te_target)),
            (
                "surrogate.hub_thickness_target".into(),
                format!("{}", self.hub_thickness_target),
            ),
            ("surrogate.penalty_slope".into(), format!("{}", self.penalty_slope)),
        ]
    }
}

/// The geometric probes the surrogate reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateProbes {
    pub tip_thickness_30: f64,
    pub tip_te_y: f64,
    pub hub_thickness_50: f64,
    pub mid_thickness_30: f64,
    pub mid_te_y: f64,
    pub hub_te_y: f64,
}

pub fn surrogate_probes(geometry: &BladeGeometry) -> SurrogateProbes {
    let hub = geometry.station_at(0.0);
    let mid = geometry.station_at(0.5);
    let tip = geometry.station_at(1.0);
    SurrogateProbes {
        tip_thickness_30: thickness_at(&geometry.chord_grid, &tip.thickness, 0.3),
        tip_te_y: tip.te.y,
        hub_thickness_50: thickness_at(&geometry.chord_grid, &hub.thickness, 0.5),
        mid_thickness_30: thickness_at(&geometry.chord_grid, &mid.thickness, 0.3),
        mid_te_y: mid.te.y,
        hub_te_y: hub.te.y,
    }
}

/// Surrogate efficiency of a blade geometry.
pub fn surrogate_efficiency(geometry: &BladeGeometry, c: &SurrogateConstants) -> f64 {
    let p = surrogate_probes(geometry);
    let d_tip = p.tip_thickness_30 - c.tip_thickness_target;
    let d_te = p.tip_te_y - c.tip_te_target;
    let d_hub = p.hub_thickness_50 - c.hub_thickness_target;
    c.eta0
        - c.tip_thickness_weight * d_tip * d_tip
        - c.tip_te_weight * d_te * d_te
        - c.hub_thickness_weight * d_hub * d_hub
        - c.interaction_weight * (p.mid_thickness_30 * p.mid_te_y)
        + c.bias_weight * p.hub_te_y
}

/// Geometric feasibility penalty: accumulated negative thickness across all
/// stations and grid points, scaled by the penalty slope.
pub fn geometry_penalty(geometry: &BladeGeometry, c: &SurrogateConstants) -> f64 {
    let mut deficit = 0.0;
    for station in &geometry.stations {
        for &t in &station.thickness {
            if t < 0.0 {
                deficit += -t;
            }
        }
    }
    c.penalty_slope * deficit
}

/// Fitness to minimize: `1 - eta + P`.
pub fn surrogate_fitness(geometry: &BladeGeometry, c: &SurrogateConstants) -> f64 {
    1.0 - surrogate_efficiency(geometry, c) + geometry_penalty(geometry, c)
}
