//! Greedy forward feature ranking with classical MI-based criteria on binned
//! data. These criteria only rank; they provide no stopping rule.
//!
//! With `S` the current set, `Y` the target and all informations from the
//! discrete plug-in estimators (bits):
//!
//! - MIM:        `I(X;Y)`
//! - JMI:        `sum_k I(X,S_k; Y)`
//! - MRMR:       `I(X;Y) - (1/|S|) sum_k I(X;S_k)`
//! - CMIM:       `min_k I(X;Y|S_k)`
//! - DISR:       `sum_k I(X,S_k;Y) / H(X,S_k,Y)`
//! - CIFE:       `I(X;Y) - sum_k [I(X;S_k) - I(X;S_k|Y)]`
//! - ICAP:       `I(X;Y) - sum_k max(0, I(X;S_k) - I(X;S_k|Y))`
//! - CONDRED:    `I(X;Y) + sum_k I(X;S_k|Y) - sum_k I(X;S_k)`
//! - CMI_BINNED: `I(X;Y|S)` with the whole set packed into one condition
//!
//! The first step of every criterion reduces to MIM; argmax ties break toward
//! the lowest feature index.

use crate::data::BinnedDataset;
use crate::error::{Error, Result};
use crate::estimators::{discrete_cmi, discrete_entropy, discrete_mi, pack_codes};

/// The implemented ranking criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Mim,
    Jmi,
    Mrmr,
    Cmim,
    Disr,
    Cife,
    Icap,
    CondRed,
    CmiBinned,
}

impl Criterion {
    pub const ALL: [Criterion; 9] = [
        Criterion::Mim,
        Criterion::Jmi,
        Criterion::Mrmr,
        Criterion::Cmim,
        Criterion::Disr,
        Criterion::Cife,
        Criterion::Icap,
        Criterion::CondRed,
        Criterion::CmiBinned,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Mim => "mim",
            Criterion::Jmi => "jmi",
            Criterion::Mrmr => "mrmr",
            Criterion::Cmim => "cmim",
            Criterion::Disr => "disr",
            Criterion::Cife => "cife",
            Criterion::Icap => "icap",
            Criterion::CondRed => "condred",
            Criterion::CmiBinned => "cmi_binned",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mim" => Ok(Criterion::Mim),
            "jmi" => Ok(Criterion::Jmi),
            "mrmr" => Ok(Criterion::Mrmr),
            "cmim" => Ok(Criterion::Cmim),
            "disr" => Ok(Criterion::Disr),
            "cife" => Ok(Criterion::Cife),
            "icap" => Ok(Criterion::Icap),
            "condred" => Ok(Criterion::CondRed),
            "cmi_binned" | "cmi-binned" | "cmibinned" => Ok(Criterion::CmiBinned),
            other => Err(Error::InvalidArgument(format!(
                "unknown criterion \"{other}\""
            ))),
        }
    }
}

impl std::fmt::Display for Criterion {
    fmt_display_via_name!();
}

macro_rules! fmt_display_via_name {
    () => {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            f.write_str(self.name())
        }
    };
}
use fmt_display_via_name;

/// A criterion's greedy ranking with the winning score per step.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub criterion: Criterion,
    pub ordered: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Per-candidate accumulators over the growing selected set.
struct Accumulators {
    relevance: Vec<f64>,
    sum_mi_s: Vec<f64>,
    sum_cmi_given_y: Vec<f64>,
    sum_joint: Vec<f64>,
    sum_disr: Vec<f64>,
    min_cmi: Vec<f64>,
    icap_sum: Vec<f64>,
}

/// Greedy forward ranking of `size` features under one criterion.
pub fn rank(criterion: Criterion, data: &BinnedDataset, size: usize) -> Result<RankingResult> {
    if size < 1 {
        return Err(Error::InvalidArgument("ranking size must be at least 1".into()));
    }
    let d = data.n_features();
    let y = &data.target_codes;

    let relevance = (0..d)
        .map(|f| discrete_mi(&data.columns[f], y))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Accumulators {
        relevance,
        sum_mi_s: vec![0.0; d],
        sum_cmi_given_y: vec![0.0; d],
        sum_joint: vec![0.0; d],
        sum_disr: vec![0.0; d],
        min_cmi: vec![f64::INFINITY; d],
        icap_sum: vec![0.0; d],
    };

    let mut ordered: Vec<usize> = Vec::new();
    let mut scores: Vec<f64> = Vec::new();
    let mut remaining: Vec<usize> = (0..d).collect();

    while ordered.len() < size.min(d) {
        let packed_set = if criterion == Criterion::CmiBinned && !ordered.is_empty() {
            let cols: Vec<&[usize]> = ordered.iter().map(|&f| data.columns[f].as_slice()).collect();
            Some(pack_codes(&cols)?)
        } else {
            None
        };

        let mut winner: Option<(usize, f64)> = None;
        for (pos, &f) in remaining.iter().enumerate() {
            let score = score_candidate(criterion, f, ordered.len(), &acc, data, packed_set.as_deref())?;
            match winner {
                Some((_, best)) if score <= best => {}
                _ => winner = Some((pos, score)),
            }
        }
        let (pos, score) = winner.expect("remaining is non-empty");
        let feature = remaining.remove(pos);
        ordered.push(feature);
        scores.push(score);

        if ordered.len() < size.min(d) {
            update_accumulators(&mut acc, feature, &remaining, data)?;
        }
    }

    Ok(RankingResult {
        criterion,
        ordered,
        scores,
    })
}

fn score_candidate(
    criterion: Criterion,
    f: usize,
    set_len: usize,
    acc: &Accumulators,
    data: &BinnedDataset,
    packed_set: Option<&[usize]>,
) -> Result<f64> {
    // Every criterion's first step is plain relevance.
    if set_len == 0 {
        return Ok(acc.relevance[f]);
    }
    Ok(match criterion {
        Criterion::Mim => acc.relevance[f],
        Criterion::Jmi => acc.sum_joint[f],
        Criterion::Mrmr => acc.relevance[f] - acc.sum_mi_s[f] / set_len as f64,
        Criterion::Cmim => acc.min_cmi[f],
        Criterion::Disr => acc.sum_disr[f],
        Criterion::Cife => acc.relevance[f] - (acc.sum_mi_s[f] - acc.sum_cmi_given_y[f]),
        Criterion::Icap => acc.relevance[f] - acc.icap_sum[f],
        Criterion::CondRed => acc.relevance[f] + acc.sum_cmi_given_y[f] - acc.sum_mi_s[f],
        Criterion::CmiBinned => {
            let packed = packed_set.expect("packed set prepared for non-empty S");
            discrete_cmi(&data.columns[f], &data.target_codes, packed)?
        }
    })
}

fn update_accumulators(
    acc: &mut Accumulators,
    new_member: usize,
    remaining: &[usize],
    data: &BinnedDataset,
) -> Result<()> {
    let s_col = &data.columns[new_member];
    let y = &data.target_codes;
    for &f in remaining {
        let x_col = &data.columns[f];
        let mi_xs = discrete_mi(x_col, s_col)?;
        let cmi_xs_y = discrete_cmi(x_col, s_col, y)?;
        let pair = pack_codes(&[x_col.as_slice(), s_col.as_slice()])?;
        let joint = discrete_mi(&pair, y)?;
        let triple = pack_codes(&[x_col.as_slice(), s_col.as_slice(), y.as_slice()])?;
        let h_triple = discrete_entropy(&triple)?;

        acc.sum_mi_s[f] += mi_xs;
        acc.sum_cmi_given_y[f] += cmi_xs_y;
        acc.sum_joint[f] += joint;
        if h_triple > 0.0 {
            acc.sum_disr[f] += joint / h_triple;
        }
        acc.icap_sum[f] += (mi_xs - cmi_xs_y).max(0.0);
        let cmi_y_given_s = discrete_cmi(x_col, y, s_col)?;
        acc.min_cmi[f] = acc.min_cmi[f].min(cmi_y_given_s);
    }
    Ok(())
}
