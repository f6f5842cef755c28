//! Mutual information and conditional mutual information estimators.
//!
//! Two families are provided: a continuous k-nearest-neighbor estimator
//! (Kraskov algorithm 1 for MI, its Frenzel-Pompe extension for CMI) and
//! discrete plug-in estimators on integer codes. Continuous estimates default
//! to nats, discrete estimates are always in bits.

mod ksg;

pub(crate) use ksg::KsgCmiBatch;

use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Output unit for continuous estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub(crate) fn from_nats(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

/// Configuration of the k-nearest-neighbor estimator.
#[derive(Debug, Clone)]
pub struct KsgConfig {
    /// Neighbor count; must satisfy `k < N`.
    pub k: usize,
    /// Tie-breaking noise amplitude, relative to each column's standard
    /// deviation. Applied after standardization.
    pub noise_amplitude: f64,
    /// Base seed for the deterministic noise streams.
    pub seed: u64,
    pub unit: Unit,
}

impl Default for KsgConfig {
    fn default() -> Self {
        Self {
            k: 4,
            noise_amplitude: 1e-8,
            seed: 0,
            unit: Unit::Nats,
        }
    }
}

/// A continuous MI/CMI estimate together with the sample and neighbor counts
/// it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Value in the configured unit.
    pub value: f64,
    pub n_samples: usize,
    pub k: usize,
}

/// Digamma function for positive arguments, absolute error below 1e-10.
///
/// Uses the upward recurrence psi(x) = psi(x+1) - 1/x until x >= 6, then the
/// asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "digamma requires x > 0, got {x}"
        )));
    }
    Ok(psi(x))
}

pub(crate) fn psi(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 6.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // psi(x) ~ ln x - 1/(2x) - sum of Bernoulli terms up to x^-12.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    acc + x.ln() - 0.5 * inv - series
}

/// Kraskov algorithm-1 MI estimate between two (possibly multidimensional)
/// continuous variables given as N x d matrices with one row per sample.
///
/// Each column is standardized and dithered before the max-norm neighbor
/// search; the estimate is `psi(k) + psi(N) - <psi(n_x+1) + psi(n_y+1)>`.
pub fn ksg_mi(x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &KsgConfig) -> Result<MiEstimate> {
    let empty = ndarray::Array2::<f64>::zeros((x.nrows(), 0));
    ksg_cmi(x, y, empty.view(), cfg)
}

/// Frenzel-Pompe conditional MI estimate `I(X;Y|Z)`:
/// `psi(k) - <psi(n_xz+1) + psi(n_yz+1) - psi(n_z+1)>`, with neighbor counts
/// taken strictly within each sample's k-th-neighbor radius in the joint
/// space (max-norm). With an empty `z` this reduces exactly to [`ksg_mi`].
pub fn ksg_cmi(
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    z: ArrayView2<f64>,
    cfg: &KsgConfig,
) -> Result<MiEstimate> {
    ksg::validate_inputs(&[&x, &y], &z, cfg)?;
    let blocks = ksg::Blocks::prepare(x, y, z, cfg);
    let nats = blocks.estimate_nats(cfg.k);
    Ok(MiEstimate {
        value: cfg.unit.from_nats(nats),
        n_samples: blocks.n,
        k: cfg.k,
    })
}

/// Plug-in mutual information between two discrete code columns, in bits.
/// Empty cells contribute exactly zero.
pub fn discrete_mi(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "discrete_mi: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("discrete_mi: empty input".into()));
    }
    let (x, ax) = compact_codes(x);
    let (y, ay) = compact_codes(y);
    let n = x.len();
    let mut joint = vec![0usize; ax * ay];
    let mut mx = vec![0usize; ax];
    let mut my = vec![0usize; ay];
    for i in 0..n {
        joint[x[i] * ay + y[i]] += 1;
        mx[x[i]] += 1;
        my[y[i]] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..ax {
        for b in 0..ay {
            let c = joint[a * ay + b];
            if c > 0 {
                let p = c as f64 / nf;
                mi += p * ((c as f64 * nf) / (mx[a] as f64 * my[b] as f64)).log2();
            }
        }
    }
    Ok(mi)
}

/// Plug-in conditional mutual information `I(X;Y|Z)` on discrete codes, in
/// bits. `z` may carry a tuple of conditioning variables packed into a single
/// code (see [`pack_codes`]).
pub fn discrete_cmi(x: &[usize], y: &[usize], z: &[usize]) -> Result<f64> {
    if x.len() != y.len() || x.len() != z.len() {
        return Err(Error::LengthMismatch(format!(
            "discrete_cmi: {} vs {} vs {}",
            x.len(),
            y.len(),
            z.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("discrete_cmi: empty input".into()));
    }
    let (x, ax) = compact_codes(x);
    let (y, ay) = compact_codes(y);
    let (z, az) = compact_codes(z);
    let n = x.len();
    let mut xyz = vec![0usize; ax * ay * az];
    let mut xz = vec![0usize; ax * az];
    let mut yz = vec![0usize; ay * az];
    let mut mz = vec![0usize; az];
    for i in 0..n {
        xyz[(x[i] * ay + y[i]) * az + z[i]] += 1;
        xz[x[i] * az + z[i]] += 1;
        yz[y[i] * az + z[i]] += 1;
        mz[z[i]] += 1;
    }
    let nf = n as f64;
    let mut cmi = 0.0;
    for a in 0..ax {
        for b in 0..ay {
            for c in 0..az {
                let cnt = xyz[(a * ay + b) * az + c];
                if cnt > 0 {
                    let p = cnt as f64 / nf;
                    let ratio = (cnt as f64 * mz[c] as f64)
                        / (xz[a * az + c] as f64 * yz[b * az + c] as f64);
                    cmi += p * ratio.log2();
                }
            }
        }
    }
    Ok(cmi)
}

/// Plug-in Shannon entropy of a discrete code column, in bits.
pub fn discrete_entropy(codes: &[usize]) -> Result<f64> {
    if codes.is_empty() {
        return Err(Error::InvalidArgument("discrete_entropy: empty input".into()));
    }
    let (codes, arity) = compact_codes(codes);
    let mut counts = vec![0usize; arity];
    for &c in &codes {
        counts[c] += 1;
    }
    let n = codes.len() as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Pack several aligned code columns into one joint code column via
/// mixed-radix encoding (radix = max code + 1 per column).
pub fn pack_codes(columns: &[&[usize]]) -> Result<Vec<usize>> {
    let Some(first) = columns.first() else {
        return Err(Error::InvalidArgument("pack_codes: no columns".into()));
    };
    let n = first.len();
    let mut packed = vec![0usize; n];
    for col in columns {
        if col.len() != n {
            return Err(Error::LengthMismatch(format!(
                "pack_codes: {} vs {n}",
                col.len()
            )));
        }
        let radix = col.iter().max().copied().unwrap_or(0) + 1;
        for (p, &c) in packed.iter_mut().zip(col.iter()) {
            *p = p
                .checked_mul(radix)
                .and_then(|v| v.checked_add(c))
                .ok_or_else(|| Error::InvalidArgument("pack_codes: code overflow".into()))?;
        }
    }
    Ok(packed)
}

/// Remap arbitrary codes to a dense 0..arity range, preserving order.
fn compact_codes(codes: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<usize> = codes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let remapped = codes
        .iter()
        .map(|c| distinct.binary_search(c).unwrap())
        .collect();
    (remapped, distinct.len())
}
