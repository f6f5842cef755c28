//! Tabular data model shared by all analysis stages: CSV ingestion/emission,
//! equal-frequency binning, and tie-breaking noise injection.
//!
//! A [`Dataset`] is an N x D matrix of continuous feature columns plus a scalar
//! target ("fitness") per sample. The target column is identified in CSV files
//! by the literal header `fitness`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name of the target column in CSV files.
pub const TARGET_COLUMN: &str = "fitness";

/// An in-memory table of N samples with D continuous features and one scalar
/// target per sample. Immutable after construction; all invariants are checked
/// by [`Dataset::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    names: Vec<String>,
    target: Vec<f64>,
    meta: BTreeMap<String, String>,
}

impl Dataset {
    /// Build a dataset from a feature matrix (rows are samples), feature names
    /// and a target vector.
    ///
    /// Fails if the table is empty, any entry is non-finite, names are not
    /// unique and non-empty, or lengths disagree.
    pub fn new(values: Array2<f64>, names: Vec<String>, target: Vec<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one sample and one feature, got {n} x {d}"
            )));
        }
        if names.len() != d {
            return Err(Error::InvalidDataset(format!(
                "{} names for {d} feature columns",
                names.len()
            )));
        }
        if target.len() != n {
            return Err(Error::InvalidDataset(format!(
                "target length {} does not match {n} samples",
                target.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite target value".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidDataset(format!("empty name for column {i}")));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidDataset(format!("duplicate name \"{name}\"")));
            }
        }
        Ok(Self {
            values,
            names,
            target,
            meta: BTreeMap::new(),
        })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Feature column as an owned vector.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.values.column(index).to_vec()
    }

    /// Position of a feature by name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: &str, value: &str) {
        self.meta.insert(key.to_string(), value.to_string());
    }
}

/// Load a dataset from a CSV file. The header must contain exactly one column
/// named `fitness`; every other column becomes a feature, preserving order.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let fitness_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.as_str() == TARGET_COLUMN)
        .map(|(i, _)| i)
        .collect();
    let target_col = match fitness_cols.as_slice() {
        [] => return Err(Error::MissingTarget),
        [one] => *one,
        [a, b, ..] => return Err(Error::DuplicateTarget(*a, *b)),
    };
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut target = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: row_idx + 1,
                expected: headers.len(),
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (col_idx, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::BadCell {
                row: row_idx + 1,
                column: headers[col_idx].clone(),
                reason: format!("cannot parse \"{cell}\" as a real number"),
            })?;
            if !value.is_finite() {
                return Err(Error::BadCell {
                    row: row_idx + 1,
                    column: headers[col_idx].clone(),
                    reason: format!("non-finite value \"{cell}\""),
                });
            }
            if col_idx == target_col {
                target.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }

    let n = rows.len();
    let d = names.len();
    let mut values = Array2::zeros((n, d));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            values[(i, j)] = *v;
        }
    }
    Dataset::new(values, names, target)
}

/// Write a dataset as CSV: feature columns in order, then `fitness` last.
/// Reals are emitted with 17 significant digits so a round trip is bit-exact.
pub fn emit_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = std::io::BufWriter::new(file);
    let map_io = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };

    let mut header = dataset.names().join(",");
    header.push(',');
    header.push_str(TARGET_COLUMN);
    writeln!(out, "{header}").map_err(map_io)?;

    for i in 0..dataset.n_samples() {
        let mut line = String::new();
        for j in 0..dataset.n_features() {
            line.push_str(&format_real(dataset.values()[(i, j)]));
            line.push(',');
        }
        line.push_str(&format_real(dataset.target()[i]));
        writeln!(out, "{line}").map_err(map_io)?;
    }
    out.flush().map_err(map_io)?;
    Ok(())
}

/// Decimal text with 17 significant digits; round-trips any finite f64.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// A dataset discretized by equal-frequency binning: integer codes in
/// `[0, n_bins)` per feature column and for the target.
///
/// Codes are stored column-major (`columns[feature][sample]`).
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDataset {
    pub columns: Vec<Vec<usize>>,
    pub target_codes: Vec<usize>,
    pub n_bins: usize,
    pub names: Vec<String>,
}

impl BinnedDataset {
    /// Discretize every feature column and the target of a dataset.
    pub fn from_dataset(dataset: &Dataset, n_bins: usize) -> Result<Self> {
        let columns = (0..dataset.n_features())
            .map(|j| bin_equal_frequency(&dataset.column(j), n_bins))
            .collect::<Result<Vec<_>>>()?;
        let target_codes = bin_equal_frequency(dataset.target(), n_bins)?;
        Ok(Self {
            columns,
            target_codes,
            n_bins,
            names: dataset.names().to_vec(),
        })
    }

    pub fn n_samples(&self) -> usize {
        self.target_codes.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

/// Equal-frequency binning by rank: the sample with rank `r` (0-based, ties
/// broken by original index) gets code `floor(r * n_bins / n)`.
pub fn bin_equal_frequency(column: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    let n = column.len();
    if n_bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_bins must be at least 2, got {n_bins}"
        )));
    }
    if n < n_bins {
        return Err(Error::InvalidArgument(format!(
            "need at least {n_bins} samples for {n_bins} bins, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps original index order within ties.
    order.sort_by(|&a, &b| column[a].partial_cmp(&column[b]).unwrap());
    let mut codes = vec![0usize; n];
    for (rank, &idx) in order.iter().enumerate() {
        codes[idx] = rank * n_bins / n;
    }
    Ok(codes)
}

/// Add uniform noise in `[-amplitude*s, +amplitude*s]` to a column, where `s`
/// is the column's (population) standard deviation, or 1 if the column is
/// constant. Deterministic given the seed.
pub fn add_tie_breaking_noise(column: &[f64], amplitude: f64, seed: u64) -> Result<Vec<f64>> {
    if amplitude < 0.0 || !amplitude.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise amplitude must be non-negative, got {amplitude}"
        )));
    }
    if amplitude == 0.0 {
        return Ok(column.to_vec());
    }
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let s = if var > 0.0 { var.sqrt() } else { 1.0 };
    let half_width = amplitude * s;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(column
        .iter()
        .map(|v| v + (rng.random::<f64>() * 2.0 - 1.0) * half_width)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn small_dataset() -> Dataset {
        Dataset::new(
            array![[1.0, 4.0], [2.0, 5.0], [3.0, 6.0]],
            vec!["a".into(), "b".into()],
            vec![0.1, 0.2, 0.3],
        )
        .unwrap()
    }

    #[test]
    fn load_csv_maps_fitness_to_target() {
        let dir = std::env::temp_dir().join("infosens_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("basic.csv");
        std::fs::write(&path, "a,b,fitness\n1,4,0.1\n2,5,0.2\n3,6,0.3\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.target(), &[0.1, 0.2, 0.3]);
        assert_eq!(ds.values()[(2, 1)], 6.0);
    }

    #[test]
    fn load_csv_rejects_missing_fitness() {
        let dir = std::env::temp_dir().join("infosens_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("no_target.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        match load_csv(&path) {
            Err(Error::MissingTarget) => {}
            other => panic!("expected MissingTarget, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_nan_cell_with_location() {
        let dir = std::env::temp_dir().join("infosens_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("nan.csv");
        std::fs::write(&path, "a,fitness\n1,0.5\nNaN,0.7\n").unwrap();
        match load_csv(&path) {
            Err(Error::BadCell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            other => panic!("expected BadCell, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_ragged_rows() {
        let dir = std::env::temp_dir().join("infosens_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ragged.csv");
        std::fs::write(&path, "a,b,fitness\n1,2,3\n4,5\n").unwrap();
        match load_csv(&path) {
            Err(Error::RaggedRow { row, expected, found }) => {
                assert_eq!((row, expected, found), (2, 3, 2));
            }
            other => panic!("expected RaggedRow, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_duplicate_fitness() {
        let dir = std::env::temp_dir().join("infosens_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dup.csv");
        std::fs::write(&path, "fitness,a,fitness\n1,2,3\n").unwrap();
        assert!(matches!(load_csv(&path), Err(Error::DuplicateTarget(0, 2))));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let ds = Dataset::new(
            array![
                [1.0 / 3.0, -7.25e-13],
                [std::f64::consts::PI, 1e300],
                [-0.0, 2.2250738585072014e-308]
            ],
            vec!["a".into(), "b".into()],
            vec![0.1 + 0.2, -3.5, 1.0e-9],
        )
        .unwrap();
        let dir = std::env::temp_dir().join("infosens_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        emit_csv(&ds, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn dataset_rejects_bad_shapes_and_names() {
        assert!(Dataset::new(array![[1.0]], vec![], vec![1.0]).is_err());
        assert!(Dataset::new(
            array![[1.0, 2.0]],
            vec!["a".into(), "a".into()],
            vec![1.0]
        )
        .is_err());
        assert!(Dataset::new(
            array![[1.0, f64::NAN]],
            vec!["a".into(), "b".into()],
            vec![1.0]
        )
        .is_err());
        assert!(Dataset::new(array![[1.0]], vec!["a".into()], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn bin_codes_follow_rank_arithmetic() {
        let codes = bin_equal_frequency(&[5.0, 1.0, 3.0, 2.0, 6.0, 4.0], 3).unwrap();
        assert_eq!(codes, vec![2, 0, 1, 0, 2, 1]);
    }

    #[test]
    fn bin_breaks_ties_by_original_index() {
        let codes = bin_equal_frequency(&[7.0, 7.0, 7.0, 7.0], 2).unwrap();
        assert_eq!(codes, vec![0, 0, 1, 1]);
    }

    #[test]
    fn bin_is_equal_frequency_when_divisible() {
        let column: Vec<f64> = (1..=9).map(f64::from).collect();
        let codes = bin_equal_frequency(&column, 3).unwrap();
        for code in 0..3 {
            assert_eq!(codes.iter().filter(|&&c| c == code).count(), 3);
        }
    }

    #[test]
    fn bin_rejects_degenerate_configs() {
        assert!(bin_equal_frequency(&[1.0, 2.0], 1).is_err());
        assert!(bin_equal_frequency(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let column = vec![1.0, 3.0, 5.0, 7.0];
        let a = add_tie_breaking_noise(&column, 1e-8, 7).unwrap();
        let b = add_tie_breaking_noise(&column, 1e-8, 7).unwrap();
        assert_eq!(a, b);

        // population sd of the column is sqrt(5) ~ 2.236
        let sd = 5.0_f64.sqrt();
        for (orig, noisy) in column.iter().zip(&a) {
            assert!((orig - noisy).abs() <= 1e-8 * sd);
        }
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let column = vec![1.5, -2.5, 0.0];
        assert_eq!(add_tie_breaking_noise(&column, 0.0, 3).unwrap(), column);
    }

    #[test]
    fn distinct_seeds_give_distinct_noise() {
        let column = vec![1.0, 2.0, 3.0, 4.0];
        let a = add_tie_breaking_noise(&column, 1e-8, 1).unwrap();
        let b = add_tie_breaking_noise(&column, 1e-8, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn negative_amplitude_is_rejected() {
        assert!(add_tie_breaking_noise(&[1.0, 2.0], -1e-9, 0).is_err());
    }

    #[test]
    fn binned_dataset_covers_all_columns() {
        let ds = small_dataset();
        let binned = BinnedDataset::from_dataset(&ds, 3).unwrap();
        assert_eq!(binned.n_features(), 2);
        assert_eq!(binned.columns[0], vec![0, 1, 2]);
        assert_eq!(binned.target_codes, vec![0, 1, 2]);
    }

    proptest! {
        // Permuting a column of distinct values permutes the codes the same way.
        #[test]
        fn binning_is_permutation_equivariant(perm_seed in 0u64..1000) {
            let column: Vec<f64> = (0..12).map(|i| (i as f64) * 1.37 - 3.0).collect();
            let permuted_idx = {
                let mut idx: Vec<usize> = (0..column.len()).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
                for i in (1..idx.len()).rev() {
                    let j = rng.random_range(0..=i);
                    idx.swap(i, j);
                }
                idx
            };
            let permuted: Vec<f64> = permuted_idx.iter().map(|&i| column[i]).collect();
            let codes = bin_equal_frequency(&column, 4).unwrap();
            let permuted_codes = bin_equal_frequency(&permuted, 4).unwrap();
            for (pos, &src) in permuted_idx.iter().enumerate() {
                prop_assert_eq!(permuted_codes[pos], codes[src]);
            }
        }

        // Every code appears either floor(n/bins) or ceil(n/bins) times.
        #[test]
        fn bin_sizes_differ_by_at_most_one(n in 5usize..60, bins in 2usize..5) {
            prop_assume!(n >= bins);
            let column: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
            let codes = bin_equal_frequency(&column, bins).unwrap();
            let lo = n / bins;
            let hi = n.div_ceil(bins);
            for code in 0..bins {
                let count = codes.iter().filter(|&&c| c == code).count();
                prop_assert!(count == lo || count == hi, "code {} used {} times", code, count);
            }
        }
    }
}
