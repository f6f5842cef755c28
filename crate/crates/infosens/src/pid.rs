//! Partial information decomposition of the information two discrete sources
//! carry about a target, using the Williams-Beer minimum of specific
//! informations as the redundancy measure.
//!
//! The four atoms satisfy, exactly up to rounding:
//! `unique_x + redundancy = I(X;Y)`, `unique_z + redundancy = I(Z;Y)`, and
//! `unique_x + unique_z + redundancy + synergy = I(X,Z;Y)`.

use crate::data::{bin_equal_frequency, Dataset};
use crate::error::{Error, Result};

/// Joint probability table p(x, z, y) over finite supports.
#[derive(Debug, Clone)]
pub struct JointPmf {
    probs: Vec<f64>,
    nx: usize,
    nz: usize,
    ny: usize,
}

/// Which source variable a specific-information query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceVar {
    X,
    Z,
}

impl JointPmf {
    /// Build from a flat table indexed `(x * nz + z) * ny + y`. Entries must
    /// be non-negative and sum to one within 1e-12.
    pub fn new(probs: Vec<f64>, nx: usize, nz: usize, ny: usize) -> Result<Self> {
        if nx == 0 || nz == 0 || ny == 0 || probs.len() != nx * nz * ny {
            return Err(Error::InvalidArgument(format!(
                "pmf shape {nx}x{nz}x{ny} does not match {} entries",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("pmf entries must be >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "pmf sums to {total}, expected 1"
            )));
        }
        Ok(Self { probs, nx, nz, ny })
    }

    pub fn support(&self) -> (usize, usize, usize) {
        (self.nx, self.nz, self.ny)
    }

    #[inline]
    pub fn p(&self, x: usize, z: usize, y: usize) -> f64 {
        self.probs[(x * self.nz + z) * self.ny + y]
    }

    fn p_y(&self, y: usize) -> f64 {
        let mut s = 0.0;
        for x in 0..self.nx {
            for z in 0..self.nz {
                s += self.p(x, z, y);
            }
        }
        s
    }

    fn p_xy(&self, x: usize, y: usize) -> f64 {
        (0..self.nz).map(|z| self.p(x, z, y)).sum()
    }

    fn p_zy(&self, z: usize, y: usize) -> f64 {
        (0..self.nx).map(|x| self.p(x, z, y)).sum()
    }

    fn p_xz(&self, x: usize, z: usize) -> f64 {
        (0..self.ny).map(|y| self.p(x, z, y)).sum()
    }

    /// I(X;Y) from the table's marginals, in bits.
    pub fn mi_x(&self) -> f64 {
        let mut mi = 0.0;
        for x in 0..self.nx {
            let px: f64 = (0..self.ny).map(|y| self.p_xy(x, y)).sum();
            for y in 0..self.ny {
                let pxy = self.p_xy(x, y);
                if pxy > 0.0 {
                    mi += pxy * (pxy / (px * self.p_y(y))).log2();
                }
            }
        }
        mi
    }

    /// I(Z;Y) in bits.
    pub fn mi_z(&self) -> f64 {
        let mut mi = 0.0;
        for z in 0..self.nz {
            let pz: f64 = (0..self.ny).map(|y| self.p_zy(z, y)).sum();
            for y in 0..self.ny {
                let pzy = self.p_zy(z, y);
                if pzy > 0.0 {
                    mi += pzy * (pzy / (pz * self.p_y(y))).log2();
                }
            }
        }
        mi
    }

    /// I(X,Z;Y) in bits.
    pub fn joint_mi(&self) -> f64 {
        let mut mi = 0.0;
        for x in 0..self.nx {
            for z in 0..self.nz {
                let pxz = self.p_xz(x, z);
                for y in 0..self.ny {
                    let p = self.p(x, z, y);
                    if p > 0.0 {
                        mi += p * (p / (pxz * self.p_y(y))).log2();
                    }
                }
            }
        }
        mi
    }
}

/// Empirical relative-frequency table from three aligned code columns.
pub fn pmf_from_samples(x: &[usize], z: &[usize], y: &[usize]) -> Result<JointPmf> {
    if x.len() != z.len() || x.len() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "pmf_from_samples: {} vs {} vs {}",
            x.len(),
            z.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("pmf_from_samples: empty input".into()));
    }
    let nx = x.iter().max().unwrap() + 1;
    let nz = z.iter().max().unwrap() + 1;
    let ny = y.iter().max().unwrap() + 1;
    let mut counts = vec![0usize; nx * nz * ny];
    for i in 0..x.len() {
        counts[(x[i] * nz + z[i]) * ny + y[i]] += 1;
    }
    let n = x.len() as f64;
    JointPmf::new(counts.iter().map(|&c| c as f64 / n).collect(), nx, nz, ny)
}

/// Specific information a source provides about one target outcome:
/// `I_spec(Y=y; A) = sum_a p(a|y) [log2 p(y|a) - log2 p(y)]`.
pub fn specific_information(pmf: &JointPmf, source: SourceVar, y: usize) -> Result<f64> {
    let (nx, nz, ny) = pmf.support();
    if y >= ny {
        return Err(Error::InvalidArgument(format!(
            "y value {y} outside support {ny}"
        )));
    }
    let py = pmf.p_y(y);
    if py <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "specific information undefined for zero-probability outcome y={y}"
        )));
    }
    let arity = match source {
        SourceVar::X => nx,
        SourceVar::Z => nz,
    };
    let mut info = 0.0;
    for a in 0..arity {
        let (pay, pa) = match source {
            SourceVar::X => {
                let pay = pmf.p_xy(a, y);
                let pa: f64 = (0..ny).map(|yy| pmf.p_xy(a, yy)).sum();
                (pay, pa)
            }
            SourceVar::Z => {
                let pay = pmf.p_zy(a, y);
                let pa: f64 = (0..ny).map(|yy| pmf.p_zy(a, yy)).sum();
                (pay, pa)
            }
        };
        if pay > 0.0 {
            let p_a_given_y = pay / py;
            let p_y_given_a = pay / pa;
            info += p_a_given_y * (p_y_given_a.log2() - py.log2());
        }
    }
    Ok(info)
}

/// Four-part decomposition of the joint information two sources carry about a
/// target, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidResult {
    pub unique_x: f64,
    pub unique_z: f64,
    pub redundancy: f64,
    pub synergy: f64,
    pub joint_mi: f64,
    pub mi_x: f64,
    pub mi_z: f64,
}

/// Decompose a joint table: redundancy is the expected minimum specific
/// information over the two sources; the remaining atoms follow from the
/// decomposition identities.
pub fn pid_decompose(pmf: &JointPmf) -> Result<PidResult> {
    let (_, _, ny) = pmf.support();
    let mut redundancy = 0.0;
    for y in 0..ny {
        let py = pmf.p_y(y);
        if py > 0.0 {
            let ix = specific_information(pmf, SourceVar::X, y)?;
            let iz = specific_information(pmf, SourceVar::Z, y)?;
            redundancy += py * ix.min(iz);
        }
    }
    let mi_x = pmf.mi_x();
    let mi_z = pmf.mi_z();
    let joint_mi = pmf.joint_mi();
    Ok(PidResult {
        unique_x: mi_x - redundancy,
        unique_z: mi_z - redundancy,
        redundancy,
        synergy: joint_mi - mi_x - mi_z + redundancy,
        joint_mi,
        mi_x,
        mi_z,
    })
}

/// Decomposition of one unordered pair of selected features against the
/// target. `first` and `second` are feature indices into the dataset.
#[derive(Debug, Clone)]
pub struct PairDecomposition {
    pub first: usize,
    pub second: usize,
    pub pid: PidResult,
}

/// All pairwise decompositions over a selected feature set plus the pairs
/// with the highest synergy.
#[derive(Debug, Clone)]
pub struct SynergyMatrix {
    /// One entry per unordered pair, in lexicographic order of positions in
    /// the selected list.
    pub pairs: Vec<PairDecomposition>,
    /// Up to three pairs ranked by synergy, ties broken lexicographically.
    pub top_pairs: Vec<(usize, usize)>,
}

/// Bin each selected feature and the target, then decompose every unordered
/// pair of selected features against the binned target.
pub fn synergy_matrix(data: &Dataset, selected: &[usize], n_bins: usize) -> Result<SynergyMatrix> {
    if selected.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "synergy matrix needs at least 2 selected features, got {}",
            selected.len()
        )));
    }
    for (pos, &f) in selected.iter().enumerate() {
        if f >= data.n_features() {
            return Err(Error::InvalidArgument(format!(
                "selected feature {f} out of range"
            )));
        }
        if selected[..pos].contains(&f) {
            return Err(Error::InvalidArgument(format!(
                "selected feature {f} listed twice"
            )));
        }
    }

    let codes: Vec<Vec<usize>> = selected
        .iter()
        .map(|&f| bin_equal_frequency(&data.column(f), n_bins))
        .collect::<Result<Vec<_>>>()?;
    let target_codes = bin_equal_frequency(data.target(), n_bins)?;

    let mut pairs = Vec::new();
    for a in 0..selected.len() {
        for b in (a + 1)..selected.len() {
            let pmf = pmf_from_samples(&codes[a], &codes[b], &target_codes)?;
            pairs.push(PairDecomposition {
                first: selected[a],
                second: selected[b],
                pid: pid_decompose(&pmf)?,
            });
        }
    }

    let mut ranked: Vec<usize> = (0..pairs.len()).collect();
    // Stable sort keeps lexicographic pair order within synergy ties.
    ranked.sort_by(|&a, &b| pairs[b].pid.synergy.total_cmp(&pairs[a].pid.synergy));
    let top_pairs = ranked
        .iter()
        .take(3)
        .map(|&i| (pairs[i].first, pairs[i].second))
        .collect();

    Ok(SynergyMatrix { pairs, top_pairs })
}
