//! Downstream regressors, error metrics and the fold-level benchmark runner.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::data::{self, FoldMode, Origin, TabularDataset};
use crate::error::{Error, Result};
use crate::generators::{self, AugmentationPlan, GeneratorKind, ModelFlavor};
use crate::kde::BandwidthRule;
use crate::linalg;
use crate::seed;
use crate::vae::{self, VaeConfig, VaeModel};
use crate::weights;

pub const DEFAULT_MAPE_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressorKind {
    /// Mean target of the `k` nearest rows, Euclidean distance.
    Knn(usize),
    /// Ridge with an unpenalised intercept.
    Ridge(f64),
}

impl RegressorKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegressorKind::Knn(0) => Err(Error::InvalidArgument("kNN needs k >= 1".into())),
            RegressorKind::Ridge(l) if !(l >= 0.0) || !l.is_finite() => {
                Err(Error::InvalidArgument(format!("ridge lambda must be >= 0, got {l}")))
            }
            _ => Ok(()),
        }
    }

    pub fn fit_predict(&self, train: &TabularDataset, test: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        match *self {
            RegressorKind::Knn(k) => knn_fit_predict(train, test, k),
            RegressorKind::Ridge(l) => ridge_fit_predict(train, test, l),
        }
    }
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressorKind::Knn(k) => write!(f, "knn:{k}"),
            RegressorKind::Ridge(l) => write!(f, "ridge:{l}"),
        }
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    /// `knn:5`, `ridge:0.001`; a bare `knn` or `ridge` takes the default parameter.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.as_str(), None),
        };
        let bad = || Error::InvalidArgument(format!("bad regressor spec '{s}'"));
        let kind = match name {
            "knn" => RegressorKind::Knn(arg.map(|a| a.parse().map_err(|_| bad())).transpose()?.unwrap_or(5)),
            "ridge" => RegressorKind::Ridge(arg.map(|a| a.parse().map_err(|_| bad())).transpose()?.unwrap_or(1e-3)),
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

fn check_queries(train: &TabularDataset, test: ArrayView2<'_, f64>) -> Result<()> {
    if train.n_rows() == 0 {
        return Err(Error::InvalidArgument("cannot fit a regressor on an empty training set".into()));
    }
    if test.ncols() != train.n_features() {
        return Err(Error::Shape(format!(
            "queries have {} columns, training rows have {}",
            test.ncols(),
            train.n_features()
        )));
    }
    Ok(())
}

pub fn knn_fit_predict(train: &TabularDataset, test: ArrayView2<'_, f64>, k: usize) -> Result<Array1<f64>> {
    check_queries(train, test)?;
    let n = train.n_rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut out = Array1::zeros(test.nrows());
    for (q, query) in test.outer_iter().enumerate() {
        order.clear();
        for (i, row) in train.features.outer_iter().enumerate() {
            let d: f64 = row.iter().zip(query.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            order.push((d, i));
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < n {
            order.select_nth_unstable_by(k - 1, cmp);
        }
        let nearest = &mut order[..k];
        nearest.sort_unstable_by(cmp);
        out[q] = nearest.iter().map(|&(_, i)| train.target[i]).sum::<f64>() / k as f64;
    }
    Ok(out)
}

pub fn ridge_fit_predict(train: &TabularDataset, test: ArrayView2<'_, f64>, lambda: f64) -> Result<Array1<f64>> {
    check_queries(train, test)?;
    let (n, p) = train.features.dim();
    if n <= p {
        return Err(Error::InvalidArgument(format!("ridge needs more rows than features, got {n} <= {p}")));
    }
    let mut design = Array2::<f64>::ones((n, p + 1));
    design.slice_mut(ndarray::s![.., 1..]).assign(&train.features);
    let mut gram = design.t().dot(&design);
    for j in 1..=p {
        gram[[j, j]] += lambda;
    }
    let rhs = design.t().dot(&train.target);
    let beta = linalg::solve_spd(gram.view(), rhs.view()).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::Numeric(format!(
            "ridge normal equations are singular at lambda = {lambda}; use lambda > 0"
        )),
        other => other,
    })?;
    Ok(test.dot(&beta.slice(ndarray::s![1..])) + beta[0])
}

fn check_len(y: ArrayView1<'_, f64>, y_hat: ArrayView1<'_, f64>) -> Result<()> {
    if y.len() != y_hat.len() || y.is_empty() {
        return Err(Error::Shape(format!("metric inputs have lengths {} and {}", y.len(), y_hat.len())));
    }
    Ok(())
}

pub fn mse(y: ArrayView1<'_, f64>, y_hat: ArrayView1<'_, f64>) -> Result<f64> {
    check_len(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

pub fn mae(y: ArrayView1<'_, f64>, y_hat: ArrayView1<'_, f64>) -> Result<f64> {
    check_len(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

pub fn mape(y: ArrayView1<'_, f64>, y_hat: ArrayView1<'_, f64>, epsilon: f64) -> Result<f64> {
    check_len(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b).abs() / epsilon.max(a.abs())).sum::<f64>() / y.len() as f64)
}

pub fn wmse(y: ArrayView1<'_, f64>, y_hat: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>) -> Result<f64> {
    check_len(y, y_hat)?;
    if w.len() != y.len() {
        return Err(Error::Shape(format!("{} weights for {} predictions", w.len(), y.len())));
    }
    Ok(y.iter()
        .zip(y_hat)
        .zip(w)
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum::<f64>()
        / y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WmseNormalization {
    #[default]
    MeanOne,
    SumOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricOptions {
    pub wmse_alpha: f64,
    pub wmse_normalization: WmseNormalization,
    pub wmse_bandwidth: BandwidthRule,
    pub mape_epsilon: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            wmse_alpha: 1.0,
            wmse_normalization: WmseNormalization::MeanOne,
            wmse_bandwidth: BandwidthRule::Silverman,
            mape_epsilon: DEFAULT_MAPE_EPSILON,
        }
    }
}

/// Relevance weights of the evaluation targets.
pub fn wmse_weights(y: ArrayView1<'_, f64>, opts: &MetricOptions) -> Result<Array1<f64>> {
    let rw = weights::relevance_weights(y, opts.wmse_alpha, opts.wmse_bandwidth)?;
    Ok(match opts.wmse_normalization {
        WmseNormalization::MeanOne => weights::loss_weights(&rw),
        WmseNormalization::SumOne => rw.normalized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub mse: f64,
    pub wmse: f64,
    pub mae: f64,
    pub mape: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 4] = ["mse", "wmse", "mae", "mape"];

    pub fn values(&self) -> [f64; 4] {
        [self.mse, self.wmse, self.mae, self.mape]
    }

    fn from_values(v: [f64; 4]) -> Self {
        Self {
            mse: v[0],
            wmse: v[1],
            mae: v[2],
            mape: v[3],
        }
    }
}

/// All four metrics with precomputed wMSE weights.
pub fn evaluate(y: ArrayView1<'_, f64>, y_hat: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>, opts: &MetricOptions) -> Result<Metrics> {
    let m = Metrics {
        mse: mse(y, y_hat)?,
        wmse: wmse(y, y_hat, w)?,
        mae: mae(y, y_hat)?,
        mape: mape(y, y_hat, opts.mape_epsilon)?,
    };
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite metric {m:?}")));
    }
    Ok(m)
}

/// Everything `run_benchmark` needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub generators: Vec<GeneratorKind>,
    pub regressors: Vec<RegressorKind>,
    pub folds: usize,
    pub train_fraction: f64,
    pub fold_mode: FoldMode,
    /// Base VAE settings; `alpha` and `beta_kl` are overridden per model flavour.
    pub vae: VaeConfig,
    pub plan: AugmentationPlan,
    pub metrics: MetricOptions,
    pub master_seed: u64,
    /// Folds run concurrently; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            generators: GeneratorKind::ALL.to_vec(),
            regressors: vec![RegressorKind::Knn(5), RegressorKind::Ridge(1e-3)],
            folds: 10,
            train_fraction: 0.6,
            fold_mode: FoldMode::RepeatedHoldout,
            vae: VaeConfig::default(),
            plan: AugmentationPlan::default(),
            metrics: MetricOptions::default(),
            master_seed: 0,
            jobs: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() || self.regressors.is_empty() {
            return Err(Error::InvalidArgument("need at least one generator and one regressor".into()));
        }
        for r in &self.regressors {
            r.validate()?;
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 folds, got {}", self.folds)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidArgument("jobs must be >= 1".into()));
        }
        self.vae.validate()?;
        self.plan.validate()?;
        if !(self.metrics.mape_epsilon > 0.0) || !(self.metrics.wmse_alpha >= 0.0) {
            return Err(Error::InvalidArgument("mape epsilon must be > 0 and wmse alpha >= 0".into()));
        }
        Ok(())
    }

    /// Training settings of one model flavour.
    pub fn flavor_config(&self, flavor: ModelFlavor) -> VaeConfig {
        let mut cfg = self.vae.clone();
        match flavor {
            ModelFlavor::Vanilla => cfg.alpha = 0.0,
            ModelFlavor::Balanced => {
                if !(cfg.alpha > 0.0) {
                    cfg.alpha = 1.0;
                }
            }
            ModelFlavor::ZeroKl => {
                cfg.alpha = 0.0;
                cfg.beta_kl = 0.0;
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub generator: GeneratorKind,
    pub regressor: RegressorKind,
    pub fold: usize,
    pub n_train: usize,
    pub n_synthetic: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub generator: GeneratorKind,
    pub regressor: RegressorKind,
    pub n_folds: usize,
    pub mean: Metrics,
    /// Sample standard deviation (denominator `n − 1`).
    pub std: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub master_seed: u64,
    pub split_seed: u64,
    pub config: Vec<(String, String)>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub aggregates: Vec<Aggregate>,
    pub provenance: Provenance,
}

/// Mean and sample std of each metric over `rows`.
pub fn aggregate_rows<'a>(rows: impl IntoIterator<Item = &'a BenchmarkRow>) -> Option<(usize, Metrics, Metrics)> {
    let vals: Vec<[f64; 4]> = rows.into_iter().map(|r| r.metrics.values()).collect();
    let n = vals.len();
    if n == 0 {
        return None;
    }
    let mut mean = [0.0; 4];
    let mut std = [0.0; 4];
    for j in 0..4 {
        mean[j] = vals.iter().map(|v| v[j]).sum::<f64>() / n as f64;
        if n > 1 {
            std[j] = (vals.iter().map(|v| (v[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        }
    }
    Some((n, Metrics::from_values(mean), Metrics::from_values(std)))
}

fn build_aggregates(rows: &[BenchmarkRow], generators: &[GeneratorKind], regressors: &[RegressorKind]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &r in regressors {
        for &g in generators {
            let group = rows.iter().filter(|row| row.generator == g && row.regressor == r);
            if let Some((n_folds, mean, std)) = aggregate_rows(group) {
                out.push(Aggregate {
                    generator: g,
                    regressor: r,
                    n_folds,
                    mean,
                    std,
                });
            }
        }
    }
    out
}

impl BenchmarkReport {
    pub fn aggregate(&self, generator: GeneratorKind, regressor: RegressorKind) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.generator == generator && a.regressor == regressor)
    }

    pub fn rows_for(&self, generator: GeneratorKind, regressor: RegressorKind) -> Vec<&BenchmarkRow> {
        self.rows
            .iter()
            .filter(|r| r.generator == generator && r.regressor == regressor)
            .collect()
    }

    /// One line per (generator, regressor, fold).
    pub fn write_rows_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["generator", "regressor", "fold", "n_train", "n_synthetic", "mse", "wmse", "mae", "mape"])?;
        for r in &self.rows {
            let m = r.metrics;
            out.write_record([
                r.generator.name().to_string(),
                r.regressor.to_string(),
                r.fold.to_string(),
                r.n_train.to_string(),
                r.n_synthetic.to_string(),
                m.mse.to_string(),
                m.wmse.to_string(),
                m.mae.to_string(),
                m.mape.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn write_aggregates_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["generator".to_string(), "regressor".into(), "folds".into()];
        for name in Metrics::NAMES {
            header.push(format!("{name}_mean"));
            header.push(format!("{name}_std"));
        }
        out.write_record(&header)?;
        for a in &self.aggregates {
            let mut rec = vec![a.generator.name().to_string(), a.regressor.to_string(), a.n_folds.to_string()];
            for (m, s) in a.mean.values().iter().zip(a.std.values()) {
                rec.push(m.to_string());
                rec.push(s.to_string());
            }
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    /// Aligned "mean (std)" table, one block per regressor.
    pub fn format_table(&self) -> String {
        let mut regressors: Vec<RegressorKind> = Vec::new();
        for a in &self.aggregates {
            if !regressors.contains(&a.regressor) {
                regressors.push(a.regressor);
            }
        }
        let mut s = String::new();
        for r in regressors {
            let block: Vec<&Aggregate> = self.aggregates.iter().filter(|a| a.regressor == r).collect();
            let mut cells: Vec<Vec<String>> = vec![std::iter::once("generator".to_string())
                .chain(Metrics::NAMES.iter().map(|n| n.to_uppercase().replace("WMSE", "wMSE")))
                .collect()];
            for a in &block {
                let mut line = vec![a.generator.name().to_string()];
                for (m, sd) in a.mean.values().iter().zip(a.std.values()) {
                    line.push(format!("{} ({})", sig(*m), sig(sd)));
                }
                cells.push(line);
            }
            let widths: Vec<usize> = (0..cells[0].len())
                .map(|j| cells.iter().map(|c| c[j].len()).max().unwrap_or(0))
                .collect();
            s.push_str(&format!("regressor {r}, {} folds\n", block.first().map_or(0, |a| a.n_folds)));
            for c in &cells {
                let line: Vec<String> = c
                    .iter()
                    .enumerate()
                    .map(|(j, v)| if j == 0 { format!("{v:<w$}", w = widths[j]) } else { format!("{v:>w$}", w = widths[j]) })
                    .collect();
                s.push_str(line.join("  ").trim_end());
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }
}

fn sig(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if !(1e-3..1e5).contains(&a) {
        format!("{v:.3e}")
    } else {
        let decimals = (3 - a.log10().floor() as i32).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

/// Result of a benchmark that may have failed in some folds.
#[derive(Debug)]
pub struct BenchmarkOutcome {
    /// Rows and aggregates of the folds that completed.
    pub report: BenchmarkReport,
    pub errors: Vec<Error>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// The seed of one purpose within a fold.
pub fn fold_seed(master: u64, purpose: &str, label: &str, fold: usize) -> u64 {
    seed::derive_indexed(seed::derive(seed::derive(master, purpose), label), "fold", fold as u64)
}

fn run_fold(
    ds: &TabularDataset,
    train_idx: &[usize],
    test_idx: &[usize],
    fold: usize,
    cfg: &BenchmarkConfig,
) -> Result<Vec<BenchmarkRow>> {
    let train_raw = ds.select_rows(train_idx);
    let test = ds.select_rows(test_idx);
    let (train_s, scaler) = data::minmax_fit_transform(&train_raw).map_err(|e| e.context(format!("fold {fold}")))?;
    let eval_weights = wmse_weights(test.target.view(), &cfg.metrics).map_err(|e| e.context(format!("fold {fold}")))?;

    let flavors: BTreeSet<ModelFlavor> = cfg.generators.iter().filter_map(|g| g.required_model()).collect();
    let mut models: Vec<(ModelFlavor, VaeModel)> = Vec::new();
    for flavor in flavors {
        let mut vcfg = cfg.flavor_config(flavor);
        vcfg.rng_seed = fold_seed(cfg.master_seed, "train", flavor.name(), fold);
        let (model, report) = vae::train(&train_s, &vcfg)
            .map_err(|e| e.context(format!("training the {} VAE, fold {fold}", flavor.name())))?;
        log::debug!(
            "fold {fold}: {} VAE loss {:.4} -> {:.4}",
            flavor.name(),
            report.epochs.first().map_or(f64::NAN, |e| e.total),
            report.epochs.last().map_or(f64::NAN, |e| e.total)
        );
        models.push((flavor, model));
    }

    let mut rows = Vec::new();
    for &g in &cfg.generators {
        let ctx = |e: Error| e.context(format!("generator {g}, fold {fold}"));
        let model = g
            .required_model()
            .and_then(|f| models.iter().find(|(mf, _)| *mf == f).map(|(_, m)| m));
        let plan = AugmentationPlan {
            rng_seed: fold_seed(cfg.master_seed, "generate", g.name(), fold),
            ..cfg.plan.clone()
        };
        let synthetic = generators::generate(g, &train_s, model, &plan).map_err(ctx)?;
        let (aug_s, origin) = generators::augment(&train_s, &synthetic, &plan).map_err(ctx)?;
        debug_assert_eq!(origin.iter().filter(|o| **o == Origin::Real).count(), train_raw.n_rows());
        let n_synthetic = origin.iter().filter(|o| **o == Origin::Synthetic).count();
        let augmented = data::minmax_inverse(&aug_s, &scaler).map_err(ctx)?;
        if augmented.features.iter().chain(augmented.target.iter()).any(|v| !v.is_finite()) {
            return Err(ctx(Error::Numeric("generator produced non-finite rows".into())));
        }
        let (fit_set, down_scaler) = data::minmax_fit_transform(&augmented).map_err(ctx)?;
        let fit_set = TabularDataset {
            target: augmented.target.clone(),
            ..fit_set
        };
        let test_x = down_scaler.transform(&test).map_err(ctx)?.features;
        for &r in &cfg.regressors {
            let pred = r.fit_predict(&fit_set, test_x.view()).map_err(ctx)?;
            let metrics = evaluate(test.target.view(), pred.view(), eval_weights.view(), &cfg.metrics).map_err(ctx)?;
            rows.push(BenchmarkRow {
                generator: g,
                regressor: r,
                fold,
                n_train: train_raw.n_rows(),
                n_synthetic,
                metrics,
            });
        }
    }
    Ok(rows)
}

/// Run every fold, keeping the rows of folds that succeed.
pub fn run_benchmark_collect(ds: &TabularDataset, cfg: &BenchmarkConfig, config_snapshot: Vec<(String, String)>) -> Result<BenchmarkOutcome> {
    cfg.validate()?;
    let started_unix = unix_now();
    let split_seed = seed::derive(cfg.master_seed, "split");
    let plan = data::kfold(ds.n_rows(), cfg.folds, cfg.train_fraction, cfg.fold_mode, split_seed)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Vec<BenchmarkRow>>> = pool.install(|| {
        plan.folds
            .par_iter()
            .enumerate()
            .map(|(i, (tr, te))| run_fold(ds, tr, te, i, cfg))
            .collect()
    });
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(mut fold_rows) => rows.append(&mut fold_rows),
            Err(e) => errors.push(e),
        }
    }
    let aggregates = build_aggregates(&rows, &cfg.generators, &cfg.regressors);
    Ok(BenchmarkOutcome {
        report: BenchmarkReport {
            rows,
            aggregates,
            provenance: Provenance {
                master_seed: cfg.master_seed,
                split_seed,
                config: config_snapshot,
                started_unix,
                finished_unix: unix_now(),
            },
        },
        errors,
    })
}

/// Run every fold; the first fold failure is returned as the error.
pub fn run_benchmark(ds: &TabularDataset, cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let mut outcome = run_benchmark_collect(ds, cfg, Vec::new())?;
    if outcome.errors.is_empty() {
        Ok(outcome.report)
    } else {
        Err(outcome.errors.swap_remove(0))
    }
}

/// Rows re-grouped into aggregates.
pub fn recompute_aggregates(report: &BenchmarkReport) -> Vec<Aggregate> {
    let mut generators = Vec::new();
    let mut regressors = Vec::new();
    for r in &report.rows {
        if !generators.contains(&r.generator) {
            generators.push(r.generator);
        }
        if !regressors.contains(&r.regressor) {
            regressors.push(r.regressor);
        }
    }
    build_aggregates(&report.rows, &generators, &regressors)
}
