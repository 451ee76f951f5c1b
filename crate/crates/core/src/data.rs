//! Tabular datasets: ingestion, min-max scaling, train/test splitting and the
//! synthetic illustration dataset.

use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use ndarray::{concatenate, Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed;

/// An n×p real feature matrix with a length-n continuous target.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub features: Array2<f64>,
    pub target: Array1<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    /// Present when the dataset is expressed in min-max scaled units.
    pub scaler: Option<ScalerParams>,
}

impl TabularDataset {
    pub fn new(
        features: Array2<f64>,
        target: Array1<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        let ds = Self {
            features,
            target,
            feature_names,
            target_name: target_name.into(),
            scaler: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let (n, p) = self.features.dim();
        if n != self.target.len() {
            return Err(Error::Shape(format!(
                "{n} feature rows but {} target values",
                self.target.len()
            )));
        }
        if p != self.feature_names.len() {
            return Err(Error::Shape(format!(
                "{p} feature columns but {} names",
                self.feature_names.len()
            )));
        }
        if p < 1 {
            return Err(Error::Data("dataset needs at least one feature".into()));
        }
        if n < 2 {
            return Err(Error::Data(format!("dataset needs at least 2 rows, got {n}")));
        }
        if self.features.iter().chain(self.target.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices` (in that order), keeping names and scaler.
    pub fn select_rows(&self, indices: &[usize]) -> TabularDataset {
        TabularDataset {
            features: self.features.select(Axis(0), indices),
            target: self.target.select(Axis(0), indices),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            scaler: self.scaler.clone(),
        }
    }

    /// Same schema and units, different rows. Allows fewer than 2 rows, which
    /// generators use for empty or tiny synthetic sets.
    pub fn with_rows(&self, features: Array2<f64>, target: Array1<f64>) -> Result<TabularDataset> {
        if features.ncols() != self.n_features() || features.nrows() != target.len() {
            return Err(Error::Shape(format!(
                "rows {}x{} with {} targets do not fit a {}-feature schema",
                features.nrows(),
                features.ncols(),
                target.len(),
                self.n_features()
            )));
        }
        Ok(TabularDataset {
            features,
            target,
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            scaler: self.scaler.clone(),
        })
    }

    /// Feature and target columns side by side, n×(p+1).
    pub fn joint_matrix(&self) -> Array2<f64> {
        let y = self.target.view().insert_axis(Axis(1));
        concatenate(Axis(1), &[self.features.view(), y]).expect("row counts agree")
    }

    /// Split an n×(p+1) joint matrix back into a dataset with this schema.
    pub fn from_joint(&self, joint: &Array2<f64>) -> Result<TabularDataset> {
        let p = self.n_features();
        if joint.ncols() != p + 1 {
            return Err(Error::Shape(format!(
                "joint matrix has {} columns, expected {}",
                joint.ncols(),
                p + 1
            )));
        }
        let features = joint.slice(ndarray::s![.., ..p]).to_owned();
        let target = joint.column(p).to_owned();
        self.with_rows(features, target)
    }

    pub fn same_schema(&self, other: &TabularDataset) -> bool {
        self.feature_names == other.feature_names && self.target_name == other.target_name
    }

    /// Write as CSV with the feature columns followed by the target. If
    /// `origin` is given, a trailing `origin` column is added.
    pub fn write_csv<W: Write>(&self, writer: W, origin: Option<&[Origin]>) -> Result<()> {
        if let Some(o) = origin {
            if o.len() != self.n_rows() {
                return Err(Error::Shape(format!(
                    "{} provenance flags for {} rows",
                    o.len(),
                    self.n_rows()
                )));
            }
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.target_name);
        if origin.is_some() {
            header.push("origin");
        }
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            record.extend(self.features.row(i).iter().map(|v| v.to_string()));
            record.push(self.target[i].to_string());
            if let Some(o) = origin {
                record.push(o[i].as_str().to_string());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path, origin: Option<&[Origin]>) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f), origin)
    }
}

/// Row provenance in augmented training sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Real,
    Synthetic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Real => "real",
            Origin::Synthetic => "synthetic",
        }
    }
}

/// Read a CSV file. The target column is extracted, every other column
/// becomes a feature in header order.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<TabularDataset> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(f, target_column)
}

pub fn read_csv<R: Read>(reader: R, target_column: &str) -> Result<TabularDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "target column '{target_column}' not found; columns are {headers:?}"
            ))
        })?;
    let width = headers.len();
    let mut cells: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let line = row + 2;
        if record.len() != width {
            return Err(Error::Data(format!(
                "line {line}: expected {width} cells, found {}",
                record.len()
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(Error::Data(format!(
                    "line {line}, column '{}': missing value",
                    headers[col]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "line {line}, column '{}': cannot parse '{cell}' as a number",
                    headers[col]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "line {line}, column '{}': non-finite value '{cell}'",
                    headers[col]
                )));
            }
            cells.push(v);
        }
        n += 1;
    }
    let all = Array2::from_shape_vec((n, width), cells).map_err(|e| Error::Shape(e.to_string()))?;
    let feature_cols: Vec<usize> = (0..width).filter(|&c| c != target_idx).collect();
    let features = all.select(Axis(1), &feature_cols);
    let target = all.column(target_idx).to_owned();
    let feature_names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    for (j, name) in headers.iter().enumerate() {
        let col = all.column(j);
        let (lo, hi) = min_max(col.iter().copied());
        if n > 0 && lo == hi {
            warn!("column '{name}' is constant ({lo}); min-max scaling will reject it");
        }
    }
    TabularDataset::new(features, target, feature_names, headers[target_idx].clone())
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Per-column minima and maxima for the p features followed by the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(ds: &TabularDataset) -> Result<Self> {
        let p = ds.n_features();
        let mut min = Vec::with_capacity(p + 1);
        let mut max = Vec::with_capacity(p + 1);
        for j in 0..p {
            let (lo, hi) = min_max(ds.features.column(j).iter().copied());
            min.push(lo);
            max.push(hi);
        }
        let (lo, hi) = min_max(ds.target.iter().copied());
        min.push(lo);
        max.push(hi);
        let params = Self { min, max };
        params.validate()?;
        Ok(params)
    }

    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        let params = Self { min, max };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if self.min.len() != self.max.len() || self.min.len() < 2 {
            return Err(Error::Shape(format!(
                "scaler has {} minima and {} maxima",
                self.min.len(),
                self.max.len()
            )));
        }
        for (j, (lo, hi)) in self.min.iter().zip(&self.max).enumerate() {
            if !(hi > lo) {
                return Err(Error::Data(format!(
                    "column {j} is constant (min {lo}, max {hi}); min-max scaling undefined"
                )));
            }
        }
        Ok(())
    }

    /// Number of scaled columns (features plus target).
    pub fn n_columns(&self) -> usize {
        self.min.len()
    }

    fn check(&self, ds: &TabularDataset) -> Result<()> {
        if ds.n_features() + 1 != self.n_columns() {
            return Err(Error::Shape(format!(
                "scaler covers {} columns, dataset has {} features plus target",
                self.n_columns(),
                ds.n_features()
            )));
        }
        Ok(())
    }

    /// Apply `(v − min) / (max − min)` column-wise.
    pub fn transform(&self, ds: &TabularDataset) -> Result<TabularDataset> {
        self.check(ds)?;
        let p = ds.n_features();
        let mut out = ds.clone();
        for j in 0..p {
            let (lo, span) = (self.min[j], self.max[j] - self.min[j]);
            out.features.column_mut(j).mapv_inplace(|v| (v - lo) / span);
        }
        out.target.mapv_inplace(|v| (v - self.min[p]) / (self.max[p] - self.min[p]));
        out.scaler = Some(self.clone());
        Ok(out)
    }

    pub fn inverse(&self, ds: &TabularDataset) -> Result<TabularDataset> {
        self.check(ds)?;
        let p = ds.n_features();
        let mut out = ds.clone();
        for j in 0..p {
            let (lo, span) = (self.min[j], self.max[j] - self.min[j]);
            out.features.column_mut(j).mapv_inplace(|v| v * span + lo);
        }
        out.target = self.inverse_target(&ds.target);
        out.scaler = None;
        Ok(out)
    }

    pub fn inverse_target(&self, y: &Array1<f64>) -> Array1<f64> {
        let t = self.n_columns() - 1;
        let (lo, span) = (self.min[t], self.max[t] - self.min[t]);
        y.mapv(|v| v * span + lo)
    }
}

/// Fit a min-max scaler on `ds` and return the scaled dataset with it.
pub fn minmax_fit_transform(ds: &TabularDataset) -> Result<(TabularDataset, ScalerParams)> {
    let scaler = ScalerParams::fit(ds)?;
    let scaled = scaler.transform(ds)?;
    Ok((scaled, scaler))
}

pub fn minmax_inverse(ds_scaled: &TabularDataset, scaler: &ScalerParams) -> Result<TabularDataset> {
    scaler.inverse(ds_scaled)
}

fn minmax_column(v: &Array1<f64>) -> Result<Array1<f64>> {
    let (lo, hi) = min_max(v.iter().copied());
    if !(hi > lo) {
        return Err(Error::Data("simulated column is constant; increase n".into()));
    }
    Ok(v.mapv(|x| (x - lo) / (hi - lo)))
}

/// The six-feature nonlinear benchmark:
///
/// ```text
/// X1 ~ N(0, 2)   X2 ~ N(10, 2)   X3 ~ N(0, 5)
/// X4 ~ N(X1³, 1) X5 ~ N((X2 − 10)², 1) X6 ~ N(X3², 2)
/// U  = 11·mm(X4) + 9·mm(X5) + 14·mm(X6) + 10
/// Y  ~ N(U², 10)
/// ```
///
/// The second Gaussian parameter is a standard deviation; `mm` is min-max
/// scaling over the generated sample.
pub fn simulate_illustration(n: usize, rng_seed: u64) -> Result<TabularDataset> {
    if n < 10 {
        return Err(Error::InvalidArgument(format!("simulation needs n >= 10, got {n}")));
    }
    let mut rng = seed::rng(rng_seed);
    let normal = |mean: f64, sd: f64| Normal::new(mean, sd).expect("valid normal");
    let std_normal = normal(0.0, 1.0);
    let mut draw = |mean: f64, sd: f64| mean + sd * std_normal.sample(&mut rng);
    let mut x = Array2::<f64>::zeros((n, 6));
    for i in 0..n {
        let x1 = draw(0.0, 2.0);
        let x2 = draw(10.0, 2.0);
        let x3 = draw(0.0, 5.0);
        let x4 = draw(x1.powi(3), 1.0);
        let x5 = draw((x2 - 10.0).powi(2), 1.0);
        let x6 = draw(x3 * x3, 2.0);
        for (j, v) in [x1, x2, x3, x4, x5, x6].into_iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    let m4 = minmax_column(&x.column(3).to_owned())?;
    let m5 = minmax_column(&x.column(4).to_owned())?;
    let m6 = minmax_column(&x.column(5).to_owned())?;
    let u = 11.0 * &m4 + 9.0 * &m5 + 14.0 * &m6 + 10.0;
    let y = u.mapv(|u| draw(u * u, 10.0));
    let names = (1..=6).map(|j| format!("X{j}")).collect();
    TabularDataset::new(x, y, names, "Y")
}

/// Latent `U` of the simulator, recomputed from features; exposed for tests.
pub fn illustration_latent(ds: &TabularDataset) -> Result<Array1<f64>> {
    let m4 = minmax_column(&ds.features.column(3).to_owned())?;
    let m5 = minmax_column(&ds.features.column(4).to_owned())?;
    let m6 = minmax_column(&ds.features.column(5).to_owned())?;
    Ok(11.0 * &m4 + 9.0 * &m5 + 14.0 * &m6 + 10.0)
}

fn train_size(n: usize, train_fraction: f64) -> Result<usize> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train < 2 || n - n_train < 2 {
        return Err(Error::InvalidArgument(format!(
            "fraction {train_fraction} of {n} rows leaves fewer than 2 rows on one side"
        )));
    }
    Ok(n_train)
}

/// Uniform random partition of `0..n` into sorted (train, test) index sets.
pub fn split_indices(n: usize, train_fraction: f64, rng_seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_train = train_size(n, train_fraction)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(rng_seed));
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_train_test(
    ds: &TabularDataset,
    train_fraction: f64,
    rng_seed: u64,
) -> Result<(TabularDataset, TabularDataset)> {
    let (train, test) = split_indices(ds.n_rows(), train_fraction, rng_seed)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// How folds are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldMode {
    /// k independent random train/test splits at a fixed train fraction.
    #[default]
    RepeatedHoldout,
    /// Classical K-fold: one shuffle, k disjoint test blocks.
    Partition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
    pub fold_count: usize,
    pub rng_seed: u64,
}

/// Build `k` train/test index pairs over `0..n`.
///
/// In [`FoldMode::RepeatedHoldout`] fold `i` depends only on `(rng_seed, i)`.
pub fn kfold(n: usize, k: usize, train_fraction: f64, mode: FoldMode, rng_seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    if n < 2 * k {
        return Err(Error::InvalidArgument(format!("{n} rows are too few for {k} folds")));
    }
    let folds = match mode {
        FoldMode::RepeatedHoldout => (0..k)
            .map(|i| split_indices(n, train_fraction, seed::derive_indexed(rng_seed, "fold", i as u64)))
            .collect::<Result<Vec<_>>>()?,
        FoldMode::Partition => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut seed::rng(seed::derive(rng_seed, "partition")));
            (0..k)
                .map(|i| {
                    let lo = i * n / k;
                    let hi = (i + 1) * n / k;
                    let mut test = idx[lo..hi].to_vec();
                    let mut train: Vec<usize> = idx[..lo].iter().chain(&idx[hi..]).copied().collect();
                    test.sort_unstable();
                    train.sort_unstable();
                    (train, test)
                })
                .collect()
        }
    };
    Ok(FoldPlan {
        folds,
        fold_count: k,
        rng_seed,
    })
}
