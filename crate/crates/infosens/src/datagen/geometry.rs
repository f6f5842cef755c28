//! Blade sections, Hicks-Henne deformations and geometric feature extraction.
//!
//! A blade is a stack of span stations; each station carries its leading and
//! trailing edge points in the axial-meridional plane and a thickness profile
//! (distance from the chord line to the surface) sampled on a shared chord
//! grid. Three control sections (hub, mid, shroud) are deformed independently;
//! stations in between blend the two bracketing deformations linearly.

use crate::error::{Error, Result};

/// Span fractions of the three control sections.
pub const CONTROL_SPANS: [f64; 3] = [0.0, 0.5, 1.0];

/// Hicks-Henne bump function `b(x, x0) = sin(pi * x^(log 0.5 / log x0))^2`
/// on the normalized chord, with its maximum of 1 at `x0`.
pub fn hicks_henne(x: f64, x0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "hicks_henne: x must lie in [0,1], got {x}"
        )));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "hicks_henne: x0 must lie in (0,1), got {x0}"
        )));
    }
    let exponent = 0.5f64.ln() / x0.ln();
    // x = 0 with a positive exponent gives 0, which is the continuous limit.
    let s = (std::f64::consts::PI * x.powf(exponent)).sin();
    Ok(s * s)
}

/// Equally spaced bump maxima `x0(i) = i / (n_hh + 1)` for `i = 1..=n_hh`.
pub fn hh_maxima_locations(n_hh: usize) -> Result<Vec<f64>> {
    if n_hh < 1 {
        return Err(Error::InvalidArgument("need at least one shape function".into()));
    }
    Ok((1..=n_hh)
        .map(|i| i as f64 / (n_hh as f64 + 1.0))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Deformation of one control section: rotation about the leading edge,
/// translation in the axial-meridional plane, and Hicks-Henne thickness
/// amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionDeform {
    pub rotation: f64,
    pub dx: f64,
    pub dy: f64,
    pub hh: Vec<f64>,
}

impl SectionDeform {
    pub fn zero(n_hh: usize) -> Self {
        Self {
            rotation: 0.0,
            dx: 0.0,
            dy: 0.0,
            hh: vec![0.0; n_hh],
        }
    }

    fn blend(a: &Self, b: &Self, w: f64) -> Self {
        Self {
            rotation: a.rotation * (1.0 - w) + b.rotation * w,
            dx: a.dx * (1.0 - w) + b.dx * w,
            dy: a.dy * (1.0 - w) + b.dy * w,
            hh: a
                .hh
                .iter()
                .zip(&b.hh)
                .map(|(&p, &q)| p * (1.0 - w) + q * w)
                .collect(),
        }
    }
}

/// Full shape parameter set: one deformation per control section, for a total
/// of `3 * (n_hh + 3)` free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BladeParams {
    pub hub: SectionDeform,
    pub mid: SectionDeform,
    pub shroud: SectionDeform,
}

impl BladeParams {
    pub fn zero(n_hh: usize) -> Self {
        Self {
            hub: SectionDeform::zero(n_hh),
            mid: SectionDeform::zero(n_hh),
            shroud: SectionDeform::zero(n_hh),
        }
    }

    pub fn n_hh(&self) -> usize {
        self.hub.hh.len()
    }

    /// Total free parameter count `3 * (n_hh + 3)`.
    pub fn param_count(n_hh: usize) -> usize {
        3 * (n_hh + 3)
    }

    /// Flatten as `[rotation, dx, dy, hh...]` per section, hub first.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(Self::param_count(self.n_hh()));
        for s in [&self.hub, &self.mid, &self.shroud] {
            flat.push(s.rotation);
            flat.push(s.dx);
            flat.push(s.dy);
            flat.extend_from_slice(&s.hh);
        }
        flat
    }

    pub fn from_flat(flat: &[f64], n_hh: usize) -> Result<Self> {
        let expected = Self::param_count(n_hh);
        if flat.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} parameters for n_hh={n_hh}, got {}",
                flat.len()
            )));
        }
        let stride = n_hh + 3;
        let section = |offset: usize| SectionDeform {
            rotation: flat[offset],
            dx: flat[offset + 1],
            dy: flat[offset + 2],
            hh: flat[offset + 3..offset + stride].to_vec(),
        };
        Ok(Self {
            hub: section(0),
            mid: section(stride),
            shroud: section(2 * stride),
        })
    }
}

/// One span station: edge points and the thickness profile over the chord grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    /// Span fraction in [0, 1], hub = 0.
    pub span: f64,
    pub le: Point,
    pub te: Point,
    /// Distance from the chord line to the surface at each chord grid point.
    pub thickness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BladeGeometry {
    /// Shared chord grid, ascending in [0, 1].
    pub chord_grid: Vec<f64>,
    /// Stations ordered by ascending span.
    pub stations: Vec<Station>,
}

const BASELINE_HUB_THICKNESS: f64 = 0.12;
const BASELINE_TIP_THICKNESS: f64 = 0.07;

/// Closed-trailing-edge polynomial half-thickness law, scaled to a maximum
/// thickness `t_max`.
fn thickness_law(x: f64, t_max: f64) -> f64 {
    (t_max / 0.2)
        * (0.2969 * x.sqrt() - 0.1260 * x - 0.3516 * x * x + 0.2843 * x.powi(3)
            - 0.1036 * x.powi(4))
}

impl BladeGeometry {
    /// Analytic baseline blade: unit chord along x with the leading edge at
    /// the origin, thickness tapering from hub to shroud.
    pub fn baseline(n_stations: usize, n_chord_points: usize) -> Result<Self> {
        if n_stations < 2 || n_chord_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "baseline needs at least 2 stations and 2 chord points, got {n_stations}/{n_chord_points}"
            )));
        }
        let chord_grid: Vec<f64> = (0..n_chord_points)
            .map(|i| i as f64 / (n_chord_points - 1) as f64)
            .collect();
        let stations = (0..n_stations)
            .map(|s| {
                let span = s as f64 / (n_stations - 1) as f64;
                let t_max = BASELINE_HUB_THICKNESS
                    + span * (BASELINE_TIP_THICKNESS - BASELINE_HUB_THICKNESS);
                Station {
                    span,
                    le: Point { x: 0.0, y: 0.0 },
                    te: Point { x: 1.0, y: 0.0 },
                    thickness: chord_grid.iter().map(|&x| thickness_law(x, t_max)).collect(),
                }
            })
            .collect();
        Ok(Self {
            chord_grid,
            stations,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.stations.len() < 2 || self.chord_grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "geometry needs at least 2 stations and 2 chord points".into(),
            ));
        }
        if self
            .chord_grid
            .windows(2)
            .any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidArgument("chord grid must be ascending".into()));
        }
        if self.stations.windows(2).any(|w| w[1].span <= w[0].span) {
            return Err(Error::InvalidArgument("station spans must be ascending".into()));
        }
        if self
            .stations
            .iter()
            .any(|s| s.thickness.len() != self.chord_grid.len())
        {
            return Err(Error::InvalidArgument(
                "station profile length does not match chord grid".into(),
            ));
        }
        Ok(())
    }

    /// Section at an arbitrary span fraction, linearly interpolated between
    /// the bracketing stations (clamped at the ends).
    pub fn station_at(&self, span: f64) -> Station {
        let stations = &self.stations;
        if span <= stations[0].span {
            return stations[0].clone();
        }
        if span >= stations[stations.len() - 1].span {
            return stations[stations.len() - 1].clone();
        }
        let hi = stations.partition_point(|s| s.span < span);
        let (a, b) = (&stations[hi - 1], &stations[hi]);
        if (b.span - a.span).abs() < f64::EPSILON {
            return b.clone();
        }
        let w = (span - a.span) / (b.span - a.span);
        Station {
            span,
            le: Point {
                x: a.le.x * (1.0 - w) + b.le.x * w,
                y: a.le.y * (1.0 - w) + b.le.y * w,
            },
            te: Point {
                x: a.te.x * (1.0 - w) + b.te.x * w,
                y: a.te.y * (1.0 - w) + b.te.y * w,
            },
            thickness: a
                .thickness
                .iter()
                .zip(&b.thickness)
                .map(|(&p, &q)| p * (1.0 - w) + q * w)
                .collect(),
        }
    }
}

/// Linear interpolation of a station's thickness profile at a chord fraction.
pub fn thickness_at(grid: &[f64], profile: &[f64], x: f64) -> f64 {
    if x <= grid[0] {
        return profile[0];
    }
    let last = grid.len() - 1;
    if x >= grid[last] {
        return profile[last];
    }
    let hi = grid.partition_point(|&g| g < x);
    let w = (x - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
    profile[hi - 1] * (1.0 - w) + profile[hi] * w
}

/// Deformation blend at a span fraction: piecewise linear between hub, mid
/// and shroud control sections.
fn deform_at(params: &BladeParams, span: f64) -> SectionDeform {
    if span <= CONTROL_SPANS[1] {
        let w = span / CONTROL_SPANS[1];
        SectionDeform::blend(&params.hub, &params.mid, w)
    } else {
        let w = (span - CONTROL_SPANS[1]) / (CONTROL_SPANS[2] - CONTROL_SPANS[1]);
        SectionDeform::blend(&params.mid, &params.shroud, w)
    }
}

/// Apply a parameter set to a baseline blade, resampled on `n_stations`
/// equally spaced span stations. Each station receives the blended rotation
/// about its leading edge, translation, and Hicks-Henne thickness bumps.
pub fn build_geometry(
    baseline: &BladeGeometry,
    params: &BladeParams,
    n_stations: usize,
) -> Result<BladeGeometry> {
    baseline.validate()?;
    if n_stations < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 stations, got {n_stations}"
        )));
    }
    let n_hh = params.n_hh();
    if params.mid.hh.len() != n_hh || params.shroud.hh.len() != n_hh {
        return Err(Error::InvalidArgument(
            "sections disagree on shape function count".into(),
        ));
    }
    let maxima = if n_hh > 0 {
        hh_maxima_locations(n_hh)?
    } else {
        Vec::new()
    };

    let stations = (0..n_stations)
        .map(|s| {
            let span = s as f64 / (n_stations - 1) as f64;
            let base = baseline.station_at(span);
            let deform = deform_at(params, span);

            let le = Point {
                x: base.le.x + deform.dx,
                y: base.le.y + deform.dy,
            };
            let (sin_r, cos_r) = deform.rotation.sin_cos();
            let rel = Point {
                x: base.te.x - base.le.x,
                y: base.te.y - base.le.y,
            };
            let te = Point {
                x: le.x + cos_r * rel.x - sin_r * rel.y,
                y: le.y + sin_r * rel.x + cos_r * rel.y,
            };

            let thickness = baseline
                .chord_grid
                .iter()
                .zip(&base.thickness)
                .map(|(&x, &t)| {
                    let mut bump = 0.0;
                    for (amp, &x0) in deform.hh.iter().zip(&maxima) {
                        bump += amp * hicks_henne(x, x0).expect("grid and maxima in domain");
                    }
                    t + bump
                })
                .collect();

            Station {
                span,
                le,
                te,
                thickness,
            }
        })
        .collect();

    Ok(BladeGeometry {
        chord_grid: baseline.chord_grid.clone(),
        stations,
    })
}

/// A named geometric feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

/// Probe a geometry on `n_sections` equally spaced span cuts: `n_points`
/// chord-line distance probes at interior chord fractions plus the x and y
/// coordinates of the leading and trailing edges per cut, for a total of
/// `n_sections * n_points + 4 * n_sections` features. Sections are numbered
/// from the hub.
pub fn extract_features(
    geometry: &BladeGeometry,
    n_sections: usize,
    n_points: usize,
) -> Result<FeatureVector> {
    geometry.validate()?;
    if n_sections < 1 || n_points < 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1 section and 1 point, got {n_sections}/{n_points}"
        )));
    }
    let spans: Vec<f64> = if n_sections == 1 {
        vec![0.5]
    } else {
        (0..n_sections)
            .map(|i| i as f64 / (n_sections - 1) as f64)
            .collect()
    };
    let mut values = Vec::with_capacity(n_sections * (n_points + 4));
    let mut names = Vec::with_capacity(values.capacity());
    for (s, &span) in spans.iter().enumerate() {
        let station = geometry.station_at(span);
        let label = s + 1;
        for p in 1..=n_points {
            let x = p as f64 / (n_points as f64 + 1.0);
            values.push(thickness_at(&geometry.chord_grid, &station.thickness, x));
            names.push(format!("s{label}_p{p}"));
        }
        values.push(station.le.x);
        names.push(format!("s{label}_LEx"));
        values.push(station.le.y);
        names.push(format!("s{label}_LEy"));
        values.push(station.te.x);
        names.push(format!("s{label}_TEx"));
        values.push(station.te.y);
        names.push(format!("s{label}_TEy"));
    }
    Ok(FeatureVector { values, names })
}
