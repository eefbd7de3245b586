//! Dataset ingestion and synthetic generators.
//!
//! A [`Dataset`] holds the encoded feature matrix, the target, and the mapping
//! from encoded columns back to the source features they came from (one-hot
//! groups). Selection operates on source features; projection expands back to
//! encoded columns.

use crate::error::{Error, Result};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Learning task, carrying the class count for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification { n_classes: usize },
}

impl Task {
    /// Model output dimension: `C` logits for classification, one value for regression.
    pub fn output_dim(&self) -> usize {
        match self {
            Task::Regression => 1,
            Task::Classification { n_classes } => *n_classes,
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self, Task::Classification { .. })
    }
}

/// Target values for a dataset or a slice of one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Regression(Vec<f64>),
    Classification { labels: Vec<usize>, n_classes: usize },
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Regression(v) => v.len(),
            Target::Classification { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Target::Regression(_) => Task::Regression,
            Target::Classification { n_classes, .. } => Task::Classification {
                n_classes: *n_classes,
            },
        }
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Target {
        match self {
            Target::Regression(v) => Target::Regression(indices.iter().map(|&i| v[i]).collect()),
            Target::Classification { labels, n_classes } => Target::Classification {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
        }
    }

    pub fn regression_values(&self) -> Result<&[f64]> {
        match self {
            Target::Regression(v) => Ok(v),
            _ => Err(Error::TaskMismatch("expected a regression target")),
        }
    }

    pub fn class_labels(&self) -> Result<&[usize]> {
        match self {
            Target::Classification { labels, .. } => Ok(labels),
            _ => Err(Error::TaskMismatch("expected a classification target")),
        }
    }
}

/// A fully ingested dataset: encoded matrix, target, and column metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    /// Feature matrix after one-hot encoding, n×d.
    pub x: Array2<f64>,
    pub y: Target,
    /// Names of the encoded columns (`price`, `cut=Ideal`, ...).
    pub feature_names: Vec<String>,
    /// Names of the source features, the units selection operates on.
    pub source_names: Vec<String>,
    /// Encoded column index → source feature index.
    pub group_of: Vec<usize>,
    /// Source indices of the informative features (synthetic data only).
    pub informative_ground_truth: Option<Vec<usize>>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    /// Encoded dimensionality.
    pub fn n_encoded(&self) -> usize {
        self.x.ncols()
    }

    /// Number of selectable source features.
    pub fn n_sources(&self) -> usize {
        self.source_names.len()
    }

    pub fn task(&self) -> Task {
        self.y.task()
    }

    /// Encoded column indices belonging to one source feature, ascending.
    pub fn encoded_columns_of(&self, source: usize) -> Vec<usize> {
        self.group_of
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == source)
            .map(|(c, _)| c)
            .collect()
    }

    /// Map of source index → member encoded columns, for sources with more than
    /// one encoded column (true one-hot groups).
    pub fn onehot_groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (col, &g) in self.group_of.iter().enumerate() {
            groups.entry(g).or_default().push(col);
        }
        groups.retain(|_, cols| cols.len() > 1);
        groups
    }

    /// Check the structural invariants (finite values, consistent metadata).
    pub fn validate(&self) -> Result<()> {
        let (n, d) = self.x.dim();
        if self.y.len() != n {
            return Err(Error::DimensionMismatch {
                what: "target rows",
                expected: n,
                got: self.y.len(),
            });
        }
        if self.feature_names.len() != d || self.group_of.len() != d {
            return Err(Error::DimensionMismatch {
                what: "feature metadata entries",
                expected: d,
                got: self.feature_names.len().min(self.group_of.len()),
            });
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "non-finite value in feature matrix".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate feature name '{name}'"
                )));
            }
        }
        for &g in &self.group_of {
            if g >= self.source_names.len() {
                return Err(Error::IndexOutOfRange {
                    index: g,
                    len: self.source_names.len(),
                });
            }
        }
        if let Some(truth) = &self.informative_ground_truth {
            for &s in truth {
                if s >= self.source_names.len() {
                    return Err(Error::IndexOutOfRange {
                        index: s,
                        len: self.source_names.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Schema hints for CSV ingestion.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SchemaHints {
    /// Name of the target column (required).
    pub target: String,
    /// Treat the target as classification even if it parses as numeric.
    #[serde(default)]
    pub classification: bool,
    /// Columns forced categorical.
    #[serde(default)]
    pub categorical: Vec<String>,
    /// Columns forced numeric (parse failures become errors).
    #[serde(default)]
    pub numeric: Vec<String>,
    /// Dataset display name; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
}

/// Load an RFC-4180 CSV file (header required, UTF-8) into a [`Dataset`].
///
/// Numeric columns are parsed as `f64`; other columns are one-hot encoded with
/// levels sorted lexicographically. Any row with a missing or unparseable value
/// is rejected with a diagnostic naming the row (1-based, counting the header
/// as row 1).
pub fn load_csv<P: AsRef<Path>>(path: P, hints: &SchemaHints) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path.as_ref())?;
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let n_cols = header.len();
    let target_idx = header
        .iter()
        .position(|h| *h == hints.target)
        .ok_or_else(|| Error::MissingTarget(hints.target.clone()))?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let file_row = i + 2; // header is row 1
        if record.len() != n_cols {
            return Err(Error::InconsistentColumnCount {
                row: file_row,
                expected: n_cols,
                got: record.len(),
            });
        }
        rows.push(record.iter().map(|s| s.trim().to_string()).collect());
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }

    // Missing values are rejected outright; imputation is out of scope.
    for (i, row) in rows.iter().enumerate() {
        for (c, value) in row.iter().enumerate() {
            if value.is_empty() {
                return Err(Error::MalformedValue {
                    row: i + 2,
                    column: header[c].clone(),
                    value: String::new(),
                });
            }
        }
    }

    let forced_cat: Vec<&str> = hints.categorical.iter().map(|s| s.as_str()).collect();
    let forced_num: Vec<&str> = hints.numeric.iter().map(|s| s.as_str()).collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Numeric,
        Categorical,
    }
    let mut kinds = vec![Kind::Numeric; n_cols];
    for (c, name) in header.iter().enumerate() {
        if c == target_idx {
            continue;
        }
        kinds[c] = if forced_cat.contains(&name.as_str()) {
            Kind::Categorical
        } else if forced_num.contains(&name.as_str()) {
            Kind::Numeric
        } else {
            let all_numeric = rows
                .iter()
                .all(|row| row[c].parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));
            if all_numeric {
                Kind::Numeric
            } else {
                Kind::Categorical
            }
        };
    }

    // Parse the target first so its errors carry the right row numbers.
    let target_is_numeric = rows
        .iter()
        .all(|row| row[target_idx].parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));
    let y = if hints.classification || !target_is_numeric {
        let mut levels: Vec<String> = rows.iter().map(|r| r[target_idx].clone()).collect();
        levels.sort();
        levels.dedup();
        let index: BTreeMap<&str, usize> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        Target::Classification {
            labels: rows.iter().map(|r| index[r[target_idx].as_str()]).collect(),
            n_classes: levels.len(),
        }
    } else {
        let mut values = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let v: f64 = row[target_idx].parse().map_err(|_| Error::MalformedValue {
                row: i + 2,
                column: header[target_idx].clone(),
                value: row[target_idx].clone(),
            })?;
            values.push(v);
        }
        Target::Regression(values)
    };

    let mut feature_names = Vec::new();
    let mut source_names = Vec::new();
    let mut group_of = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();

    for (c, name) in header.iter().enumerate() {
        if c == target_idx {
            continue;
        }
        let source = source_names.len();
        source_names.push(name.clone());
        match kinds[c] {
            Kind::Numeric => {
                let mut col = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let v: f64 = row[c].parse().map_err(|_| Error::MalformedValue {
                        row: i + 2,
                        column: name.clone(),
                        value: row[c].clone(),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::MalformedValue {
                            row: i + 2,
                            column: name.clone(),
                            value: row[c].clone(),
                        });
                    }
                    col.push(v);
                }
                feature_names.push(name.clone());
                group_of.push(source);
                columns.push(col);
            }
            Kind::Categorical => {
                let mut levels: Vec<String> = rows.iter().map(|r| r[c].clone()).collect();
                levels.sort();
                levels.dedup();
                for level in &levels {
                    feature_names.push(format!("{name}={level}"));
                    group_of.push(source);
                    columns.push(
                        rows.iter()
                            .map(|r| if &r[c] == level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                }
            }
        }
    }

    let n = rows.len();
    let d = columns.len();
    let mut x = Array2::zeros((n, d));
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            x[[i, j]] = v;
        }
    }

    let name = hints.name.clone().unwrap_or_else(|| {
        path.as_ref()
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });

    let dataset = Dataset {
        name,
        x,
        y,
        feature_names,
        source_names,
        group_of,
        informative_ground_truth: None,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Parameters for the synthetic classification generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationSpec {
    pub n: usize,
    pub d: usize,
    pub n_informative: usize,
    pub n_classes: usize,
    pub class_sep: f64,
    pub seed: u64,
}

impl Default for ClassificationSpec {
    fn default() -> Self {
        Self {
            n: 500,
            d: 10,
            n_informative: 5,
            n_classes: 2,
            class_sep: 2.0,
            seed: 0,
        }
    }
}

/// Parameters for the synthetic regression generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub n: usize,
    pub d: usize,
    pub n_informative: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        Self {
            n: 500,
            d: 10,
            n_informative: 5,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps us independent of distribution-crate API churn.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_informative_subset(d: usize, n_informative: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut chosen: Vec<usize> = idx.into_iter().take(n_informative).collect();
    chosen.sort_unstable();
    chosen
}

/// Class-conditional Gaussian clusters on the informative dimensions; pure
/// standard-normal noise on the rest.
///
/// Class centroids sit at `class_sep` times mutually orthonormal directions in
/// the informative subspace (falling back to random unit directions when there
/// are more classes than informative dimensions), so noise dimensions have zero
/// class-mean separation by construction.
pub fn make_classification(spec: &ClassificationSpec) -> Result<Dataset> {
    if spec.n_informative > spec.d || spec.d == 0 || spec.n_informative == 0 {
        return Err(Error::InvalidConfig(format!(
            "invalid dims: d={}, n_informative={}",
            spec.d, spec.n_informative
        )));
    }
    if spec.n_classes < 2 {
        return Err(Error::InvalidConfig("n_classes must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let informative = random_informative_subset(spec.d, spec.n_informative, &mut rng);

    // Orthonormal-ish centroid directions via Gram-Schmidt on seeded Gaussians.
    let k = spec.n_informative;
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(spec.n_classes);
    for _ in 0..spec.n_classes {
        let mut v: Vec<f64> = (0..k).map(|_| standard_normal(&mut rng)).collect();
        if directions.len() < k {
            for prev in &directions {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= dot * pi;
                }
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
        for vi in &mut v {
            *vi /= norm;
        }
        directions.push(v);
    }

    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.n_classes).collect();
    let mut x = Array2::zeros((spec.n, spec.d));
    for i in 0..spec.n {
        for j in 0..spec.d {
            x[[i, j]] = standard_normal(&mut rng);
        }
        for (slot, &j) in informative.iter().enumerate() {
            x[[i, j]] += spec.class_sep * directions[labels[i]][slot];
        }
    }

    let feature_names: Vec<String> = (0..spec.d).map(|j| format!("f{j}")).collect();
    Ok(Dataset {
        name: "make_classification".into(),
        x,
        y: Target::Classification {
            labels,
            n_classes: spec.n_classes,
        },
        source_names: feature_names.clone(),
        feature_names,
        group_of: (0..spec.d).collect(),
        informative_ground_truth: Some(informative),
    })
}

/// Linear regression data `y = Xw + ε` with `w` nonzero exactly on a recorded
/// random subset of informative dimensions (`|w_j|` uniform in `[1, 3]`).
pub fn make_regression(spec: &RegressionSpec) -> Result<Dataset> {
    if spec.n_informative > spec.d || spec.d == 0 || spec.n_informative == 0 {
        return Err(Error::InvalidConfig(format!(
            "invalid dims: d={}, n_informative={}",
            spec.d, spec.n_informative
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let informative = random_informative_subset(spec.d, spec.n_informative, &mut rng);

    let mut w = vec![0.0; spec.d];
    for &j in &informative {
        let magnitude = rng.random_range(1.0..3.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        w[j] = sign * magnitude;
    }

    let mut x = Array2::zeros((spec.n, spec.d));
    for i in 0..spec.n {
        for j in 0..spec.d {
            x[[i, j]] = standard_normal(&mut rng);
        }
    }
    let y: Vec<f64> = (0..spec.n)
        .map(|i| {
            let signal: f64 = (0..spec.d).map(|j| x[[i, j]] * w[j]).sum();
            signal + spec.noise_sd * standard_normal(&mut rng)
        })
        .collect();

    let feature_names: Vec<String> = (0..spec.d).map(|j| format!("f{j}")).collect();
    Ok(Dataset {
        name: "make_regression".into(),
        x,
        y: Target::Regression(y),
        source_names: feature_names.clone(),
        feature_names,
        group_of: (0..spec.d).collect(),
        informative_ground_truth: Some(informative),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn hints(target: &str) -> SchemaHints {
        SchemaHints {
            target: target.into(),
            ..Default::default()
        }
    }

    #[test]
    fn numeric_csv_parses_exact_values() {
        let f = write_csv("a,b,y\n1.5,2,0.5\n-3,0.25,1\n0,1e2,2\n");
        let ds = load_csv(f.path(), &hints("y")).unwrap();
        assert_eq!(ds.x.dim(), (3, 2));
        assert_eq!(ds.x[[0, 0]], 1.5);
        assert_eq!(ds.x[[2, 1]], 100.0);
        assert_eq!(ds.y, Target::Regression(vec![0.5, 1.0, 2.0]));
        assert_eq!(ds.group_of, vec![0, 1]);
    }

    #[test]
    fn categorical_column_one_hot_with_group_map() {
        let f = write_csv("color,v,y\nred,1,0\nblue,2,1\ngreen,3,0\nred,4,1\n");
        let mut h = hints("y");
        h.classification = true;
        let ds = load_csv(f.path(), &h).unwrap();
        assert_eq!(
            ds.feature_names,
            vec!["color=blue", "color=green", "color=red", "v"]
        );
        assert_eq!(ds.group_of, vec![0, 0, 0, 1]);
        assert_eq!(ds.onehot_groups().get(&0).unwrap(), &vec![0, 1, 2]);
        // Row 0 is "red".
        assert_eq!(ds.x.row(0).to_vec(), vec![0.0, 0.0, 1.0, 1.0]);
        assert!(matches!(ds.y, Target::Classification { n_classes: 2, .. }));
    }

    #[test]
    fn malformed_row_is_named() {
        let f = write_csv("a,y\n1,2\noops,3\n4,5\n");
        let mut h = hints("y");
        h.numeric = vec!["a".into()];
        let err = load_csv(f.path(), &h).unwrap_err();
        match err {
            Error::MalformedValue { row, column, value } => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
                assert_eq!(value, "oops");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn missing_value_is_rejected() {
        let f = write_csv("a,b,y\n1,2,3\n4,,6\n");
        let err = load_csv(f.path(), &hints("y")).unwrap_err();
        assert!(matches!(err, Error::MalformedValue { row: 3, .. }));
    }

    #[test]
    fn inconsistent_column_count_is_rejected() {
        let f = write_csv("a,b,y\n1,2,3\n4,5\n");
        let err = load_csv(f.path(), &hints("y")).unwrap_err();
        assert!(matches!(
            err,
            Error::InconsistentColumnCount {
                row: 3,
                expected: 3,
                got: 2
            }
        ));
    }

    #[test]
    fn missing_target_and_empty_file() {
        let f = write_csv("a,b\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), &hints("y")),
            Err(Error::MissingTarget(_))
        ));
        let f = write_csv("a,y\n");
        assert!(matches!(load_csv(f.path(), &hints("y")), Err(Error::EmptyFile)));
    }

    #[test]
    fn classification_shapes_and_ground_truth() {
        let spec = ClassificationSpec::default();
        let ds = make_classification(&spec).unwrap();
        assert_eq!(ds.x.dim(), (500, 10));
        assert_eq!(ds.n_sources(), 10);
        let truth = ds.informative_ground_truth.as_ref().unwrap();
        assert_eq!(truth.len(), 5);
        assert!(truth.iter().all(|&j| j < 10));
        ds.validate().unwrap();
    }

    #[test]
    fn classification_noise_dims_have_no_separation() {
        let spec = ClassificationSpec {
            n: 2000,
            seed: 11,
            ..Default::default()
        };
        let ds = make_classification(&spec).unwrap();
        let truth = ds.informative_ground_truth.clone().unwrap();
        let labels = ds.y.class_labels().unwrap();
        let bound = 4.0 / (spec.n as f64).sqrt();
        for j in 0..spec.d {
            if truth.contains(&j) {
                continue;
            }
            let mut sums = vec![0.0; spec.n_classes];
            let mut counts = vec![0usize; spec.n_classes];
            for i in 0..spec.n {
                sums[labels[i]] += ds.x[[i, j]];
                counts[labels[i]] += 1;
            }
            let means: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .map(|(s, &c)| s / c as f64)
                .collect();
            for a in 0..spec.n_classes {
                for b in a + 1..spec.n_classes {
                    assert!((means[a] - means[b]).abs() < bound);
                }
            }
        }
    }

    #[test]
    fn regression_is_deterministic_and_linear() {
        let spec = RegressionSpec {
            noise_sd: 0.0,
            seed: 3,
            ..Default::default()
        };
        let a = make_regression(&spec).unwrap();
        let b = make_regression(&spec).unwrap();
        assert_eq!(a, b);

        // Noiseless targets must be an exact linear function of the informative
        // columns: recover w from the normal equations over those columns (small
        // Gaussian elimination here, independent of library code) and check the
        // fit is exact on every row.
        let truth = a.informative_ground_truth.clone().unwrap();
        let y = a.y.regression_values().unwrap();
        let n = a.n_samples();
        let k = truth.len();
        let mut g = vec![vec![0.0; k + 1]; k];
        for (r, &jr) in truth.iter().enumerate() {
            for (c, &jc) in truth.iter().enumerate() {
                g[r][c] = (0..n).map(|i| a.x[[i, jr]] * a.x[[i, jc]]).sum();
            }
            g[r][k] = (0..n).map(|i| a.x[[i, jr]] * y[i]).sum();
        }
        for col in 0..k {
            let pivot = (col..k)
                .max_by(|&p, &q| g[p][col].abs().total_cmp(&g[q][col].abs()))
                .unwrap();
            g.swap(col, pivot);
            let pv = g[col][col];
            for r in 0..k {
                if r != col {
                    let factor = g[r][col] / pv;
                    for c in col..=k {
                        g[r][c] -= factor * g[col][c];
                    }
                }
            }
        }
        let w: Vec<f64> = (0..k).map(|r| g[r][k] / g[r][r]).collect();
        for i in 0..n {
            let pred: f64 = truth.iter().zip(&w).map(|(&j, &wj)| a.x[[i, j]] * wj).sum();
            assert!((pred - y[i]).abs() < 1e-6, "row {i}: {pred} vs {}", y[i]);
        }
    }

    #[test]
    fn generators_reject_invalid_dims() {
        let spec = ClassificationSpec {
            n_informative: 11,
            ..Default::default()
        };
        assert!(make_classification(&spec).is_err());
        let spec = RegressionSpec {
            d: 0,
            n_informative: 0,
            ..Default::default()
        };
        assert!(make_regression(&spec).is_err());
    }

    #[test]
    fn different_seeds_differ() {
        let a = make_regression(&RegressionSpec {
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let b = make_regression(&RegressionSpec {
            seed: 2,
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a.x, b.x);
    }
}
