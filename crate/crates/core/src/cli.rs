//! Command-line front end: `simulate`, `train`, `generate`, `benchmark`.
//!
//! Every command reads an optional flat `key = value` config file
//! (`--config`), then applies `--set key=value` overrides, then its own
//! flags. The master seed fans out into per-purpose seeds by label.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{self, FoldMode, Origin, TabularDataset};
use crate::error::{Error, Result};
use crate::eval::{self, BenchmarkConfig, MetricOptions, RegressorKind, WmseNormalization};
use crate::generators::{self, AugmentationPlan, GeneratorKind, MixRule};
use crate::kde::BandwidthConvention;
use crate::seed;
use crate::vae::{self, VaeConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub vae: VaeConfig,
    pub plan: AugmentationPlan,
    pub folds: usize,
    pub train_fraction: f64,
    pub fold_mode: FoldMode,
    pub generators: Vec<GeneratorKind>,
    pub regressors: Vec<RegressorKind>,
    pub metrics: MetricOptions,
    pub data: Option<PathBuf>,
    pub target: String,
    pub simulate_n: usize,
    pub master_seed: u64,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BenchmarkConfig::default();
        Self {
            vae: b.vae,
            plan: b.plan,
            folds: b.folds,
            train_fraction: b.train_fraction,
            fold_mode: b.fold_mode,
            generators: b.generators,
            regressors: b.regressors,
            metrics: b.metrics,
            data: None,
            target: "Y".into(),
            simulate_n: 3000,
            master_seed: 0,
            jobs: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value '{v}' for key '{key}'")))
}

fn list<T: std::str::FromStr<Err = Error>>(v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Apply one key; unknown keys are an error.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        if key == "vae_seed" {
            return Err(Error::InvalidArgument("vae_seed is derived from master_seed".into()));
        }
        if vae::apply_config_pair(&mut self.vae, key, value)? {
            return Ok(());
        }
        match key {
            "n_synthetic" => self.plan.n_synthetic = if value == "auto" { None } else { Some(parse(key, value)?) },
            "sampling_alpha" => self.plan.alpha = parse(key, value)?,
            "rho" => self.plan.rho = parse(key, value)?,
            "bandwidth" => self.plan.bandwidth_rule = vae::parse_bandwidth_rule(value)?,
            "target_bandwidth" => self.plan.target_bandwidth = vae::parse_bandwidth_rule(value)?,
            "convention" => {
                self.plan.convention = match value {
                    "squared" => BandwidthConvention::Squared,
                    "linear" => BandwidthConvention::Linear,
                    _ => return Err(Error::InvalidArgument(format!("convention must be squared or linear, got '{value}'"))),
                }
            }
            "mix" => {
                self.plan.mix = match value {
                    "append" => MixRule::Append,
                    "replace-duplicates" => MixRule::ReplaceDuplicates,
                    _ => return Err(Error::InvalidArgument(format!("mix must be append or replace-duplicates, got '{value}'"))),
                }
            }
            "folds" => self.folds = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "fold_mode" => {
                self.fold_mode = match value {
                    "holdout" => FoldMode::RepeatedHoldout,
                    "partition" => FoldMode::Partition,
                    _ => return Err(Error::InvalidArgument(format!("fold_mode must be holdout or partition, got '{value}'"))),
                }
            }
            "generators" => self.generators = list(value)?,
            "regressors" => self.regressors = list(value)?,
            "wmse_alpha" => self.metrics.wmse_alpha = parse(key, value)?,
            "wmse_normalization" => {
                self.metrics.wmse_normalization = match value {
                    "mean-one" => WmseNormalization::MeanOne,
                    "sum-one" => WmseNormalization::SumOne,
                    _ => return Err(Error::InvalidArgument(format!("wmse_normalization must be mean-one or sum-one, got '{value}'"))),
                }
            }
            "wmse_bandwidth" => self.metrics.wmse_bandwidth = vae::parse_bandwidth_rule(value)?,
            "mape_epsilon" => self.metrics.mape_epsilon = parse(key, value)?,
            "data" => self.data = if value == "none" { None } else { Some(PathBuf::from(value)) },
            "target" => self.target = value.to_string(),
            "simulate_n" => self.simulate_n = parse(key, value)?,
            "master_seed" => self.master_seed = parse(key, value)?,
            "jobs" => self.jobs = if value == "auto" { None } else { Some(parse(key, value)?) },
            _ => return Err(Error::InvalidArgument(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vae::config_to_pairs(&self.vae)
            .into_iter()
            .filter(|(k, _)| k != "vae_seed")
            .collect();
        let p = &self.plan;
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        push("n_synthetic", p.n_synthetic.map_or("auto".into(), |n| n.to_string()));
        push("sampling_alpha", p.alpha.to_string());
        push("rho", p.rho.to_string());
        push("bandwidth", vae::bandwidth_rule_name(p.bandwidth_rule));
        push("target_bandwidth", vae::bandwidth_rule_name(p.target_bandwidth));
        push(
            "convention",
            match p.convention {
                BandwidthConvention::Squared => "squared",
                BandwidthConvention::Linear => "linear",
            }
            .into(),
        );
        push(
            "mix",
            match p.mix {
                MixRule::Append => "append",
                MixRule::ReplaceDuplicates => "replace-duplicates",
            }
            .into(),
        );
        push("folds", self.folds.to_string());
        push("train_fraction", self.train_fraction.to_string());
        push(
            "fold_mode",
            match self.fold_mode {
                FoldMode::RepeatedHoldout => "holdout",
                FoldMode::Partition => "partition",
            }
            .into(),
        );
        push("generators", join(&self.generators.iter().map(|g| g.name()).collect::<Vec<_>>()));
        push("regressors", join(&self.regressors));
        push("wmse_alpha", self.metrics.wmse_alpha.to_string());
        push(
            "wmse_normalization",
            match self.metrics.wmse_normalization {
                WmseNormalization::MeanOne => "mean-one",
                WmseNormalization::SumOne => "sum-one",
            }
            .into(),
        );
        push("wmse_bandwidth", vae::bandwidth_rule_name(self.metrics.wmse_bandwidth));
        push("mape_epsilon", self.metrics.mape_epsilon.to_string());
        push("data", self.data.as_ref().map_or("none".into(), |d| d.display().to_string()));
        push("target", self.target.clone());
        push("simulate_n", self.simulate_n.to_string());
        push("master_seed", self.master_seed.to_string());
        push("jobs", self.jobs.map_or("auto".into(), |j| j.to_string()));
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# effective configuration\n");
        for (k, v) in self.to_pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in vae::parse_key_values(text)? {
            cfg.apply(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    /// VAE settings with the seed derived from the master seed.
    pub fn vae_config(&self) -> VaeConfig {
        VaeConfig {
            rng_seed: seed::derive(self.master_seed, "train"),
            ..self.vae.clone()
        }
    }

    pub fn augmentation_plan(&self) -> AugmentationPlan {
        AugmentationPlan {
            rng_seed: seed::derive(self.master_seed, "generate"),
            ..self.plan.clone()
        }
    }

    pub fn benchmark_config(&self) -> BenchmarkConfig {
        BenchmarkConfig {
            generators: self.generators.clone(),
            regressors: self.regressors.clone(),
            folds: self.folds,
            train_fraction: self.train_fraction,
            fold_mode: self.fold_mode,
            vae: self.vae.clone(),
            plan: self.plan.clone(),
            metrics: self.metrics.clone(),
            master_seed: self.master_seed,
            jobs: self.jobs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.benchmark_config().validate()?;
        if self.simulate_n < 4 {
            return Err(Error::InvalidArgument("simulate_n must be >= 4".into()));
        }
        Ok(())
    }
}

/// Seed of the simulated dataset for a master seed.
pub fn simulation_seed(master: u64) -> u64 {
    seed::derive(master, "simulate")
}

pub fn cmd_simulate(n: usize, master_seed: u64, out: &Path) -> Result<TabularDataset> {
    let ds = data::simulate_illustration(n, simulation_seed(master_seed))?;
    ds.write_csv_path(out, None)?;
    Ok(ds)
}

/// Train on `data_path`; writes `model_out`, its metadata sidecar and `<model_out>.loss.csv`.
pub fn cmd_train(data_path: &Path, cfg: &RunConfig, model_out: &Path) -> Result<vae::TrainReport> {
    cfg.validate()?;
    let ds = data::load_csv(data_path, &cfg.target)?;
    let (scaled, _) = data::minmax_fit_transform(&ds)?;
    let (model, report) = vae::train(&scaled, &cfg.vae_config()).map_err(|e| e.context("training"))?;
    vae::save(&model, model_out)?;
    let loss_path = suffixed(model_out, ".loss.csv");
    let f = fs::File::create(&loss_path).map_err(|e| Error::io(&loss_path, e))?;
    report.write_csv(f)?;
    Ok(report)
}

fn suffixed(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Generate synthetic rows in original units; `augmented` also keeps the real rows.
pub fn cmd_generate(
    model_path: Option<&Path>,
    data_path: &Path,
    kind: GeneratorKind,
    cfg: &RunConfig,
    out: &Path,
    augmented: bool,
) -> Result<TabularDataset> {
    cfg.plan.validate()?;
    let model = model_path.map(vae::load).transpose()?;
    let ds = data::load_csv(data_path, &cfg.target)?;
    let scaler = match &model {
        Some(m) => {
            if m.feature_names != ds.feature_names || m.target_name != ds.target_name {
                return Err(Error::ModelMismatch(format!(
                    "model expects columns {:?} -> '{}', data has {:?} -> '{}'",
                    m.feature_names, m.target_name, ds.feature_names, ds.target_name
                )));
            }
            m.scaler
                .clone()
                .ok_or_else(|| Error::ModelMismatch("checkpoint carries no scaler".into()))?
        }
        None => data::ScalerParams::fit(&ds)?,
    };
    let scaled = scaler.transform(&ds)?;
    let plan = cfg.augmentation_plan();
    let synthetic = generators::generate(kind, &scaled, model.as_ref(), &plan)?;
    let (rows, origin) = if augmented {
        generators::augment(&scaled, &synthetic, &plan)?
    } else {
        let n = synthetic.n_rows();
        (synthetic, vec![Origin::Synthetic; n])
    };
    let rows = scaler.inverse(&rows)?;
    rows.write_csv_path(out, Some(&origin))?;
    Ok(rows)
}

/// Run the benchmark grid and write `rows.csv`, `aggregates.csv`, `table.txt`,
/// `provenance.txt` and `config.effective` into `out_dir`.
pub fn cmd_benchmark(cfg: &RunConfig, out_dir: &Path) -> Result<eval::BenchmarkReport> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let effective = out_dir.join("config.effective");
    fs::write(&effective, cfg.to_text()).map_err(|e| Error::io(&effective, e))?;
    let ds = match &cfg.data {
        Some(p) => data::load_csv(p, &cfg.target)?,
        None => data::simulate_illustration(cfg.simulate_n, simulation_seed(cfg.master_seed))?,
    };
    let outcome = eval::run_benchmark_collect(&ds, &cfg.benchmark_config(), cfg.to_pairs())?;
    write_report(&outcome.report, out_dir)?;
    match outcome.errors.into_iter().next() {
        Some(e) => Err(e.context(format!("benchmark (partial results in {})", out_dir.display()))),
        None => Ok(outcome.report),
    }
}

pub fn write_report(report: &eval::BenchmarkReport, out_dir: &Path) -> Result<()> {
    let create = |name: &str| {
        let p = out_dir.join(name);
        fs::File::create(&p).map_err(|e| Error::io(&p, e))
    };
    report.write_rows_csv(create("rows.csv")?)?;
    report.write_aggregates_csv(create("aggregates.csv")?)?;
    let table = out_dir.join("table.txt");
    fs::write(&table, report.format_table()).map_err(|e| Error::io(&table, e))?;
    let pv = &report.provenance;
    let mut text = format!(
        "master_seed = {}\nsplit_seed = {}\nstarted_unix = {}\nfinished_unix = {}\n",
        pv.master_seed, pv.split_seed, pv.started_unix, pv.finished_unix
    );
    for (k, v) in &pv.config {
        let _ = writeln!(text, "config.{k} = {v}");
    }
    let prov = out_dir.join("provenance.txt");
    fs::write(&prov, text).map_err(|e| Error::io(&prov, e))
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Context { source, .. } => exit_code(source),
        Error::InvalidArgument(_) => EXIT_USAGE,
        e if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

#[derive(Parser, Debug)]
#[command(name = "david", version, about = "Latent smoothed-bootstrap data augmentation for imbalanced regression")]
struct Cli {
    /// Raise log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the simulated illustration dataset as CSV.
    Simulate {
        #[arg(long, default_value_t = 3000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a VAE and save a checkpoint.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta_kl: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate synthetic rows from data (and a checkpoint for VAE generators).
    Generate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        /// baseline, os, csb, 0vae, bvae, kbvae, bvaew, kbvaew (david), kpca
        #[arg(long)]
        kind: GeneratorKind,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "n")]
        n_synthetic: Option<usize>,
        #[arg(long)]
        bandwidth: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the real rows.
        #[arg(long)]
        augmented: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the generator x regressor grid over train/test folds.
    Benchmark {
        #[arg(long, conflicts_with = "simulate")]
        data: Option<PathBuf>,
        /// Use the simulated dataset instead of --data.
        #[arg(long)]
        simulate: bool,
        #[arg(long = "n")]
        simulate_n: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        /// Comma-separated generator names.
        #[arg(long)]
        generators: Option<String>,
        /// Comma-separated regressor specs such as knn:5,ridge:0.001.
        #[arg(long)]
        regressors: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Target column name.
    #[arg(long)]
    target: Option<String>,
}

fn build_config(common: &Common, flags: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.apply(k.trim(), v)?;
    }
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = &common.target {
        cfg.target = t.clone();
    }
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.apply(k, v)?;
        }
    }
    Ok(cfg)
}

fn s<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { n, seed, out } => {
            let ds = cmd_simulate(n, seed, &out)?;
            println!("wrote {} rows to {}", ds.n_rows(), out.display());
        }
        Command::Train {
            data,
            out,
            epochs,
            alpha,
            beta_kl,
            common,
        } => {
            let cfg = build_config(&common, &[("epochs", s(&epochs)), ("alpha", s(&alpha)), ("beta_kl", s(&beta_kl))])?;
            let report = cmd_train(&data, &cfg, &out)?;
            let first = report.epochs.first().map_or(f64::NAN, |e| e.total);
            let last = report.epochs.last().map_or(f64::NAN, |e| e.total);
            println!(
                "trained {} epochs in {:.1?}: loss {first:.5} -> {last:.5}; checkpoint {}",
                report.epochs.len(),
                report.wall_clock,
                out.display()
            );
        }
        Command::Generate {
            model,
            data,
            kind,
            rho,
            n_synthetic,
            bandwidth,
            out,
            augmented,
            common,
        } => {
            let cfg = build_config(
                &common,
                &[("rho", s(&rho)), ("n_synthetic", s(&n_synthetic)), ("bandwidth", bandwidth.clone())],
            )?;
            let rows = cmd_generate(model.as_deref(), &data, kind, &cfg, &out, augmented)?;
            println!("wrote {} rows to {}", rows.n_rows(), out.display());
        }
        Command::Benchmark {
            data,
            simulate,
            simulate_n,
            out_dir,
            folds,
            generators,
            regressors,
            epochs,
            jobs,
            common,
        } => {
            let mut cfg = build_config(
                &common,
                &[
                    ("simulate_n", s(&simulate_n)),
                    ("folds", s(&folds)),
                    ("generators", generators.clone()),
                    ("regressors", regressors.clone()),
                    ("epochs", s(&epochs)),
                    ("jobs", s(&jobs)),
                ],
            )?;
            if simulate {
                cfg.data = None;
            } else if let Some(d) = data {
                cfg.data = Some(d);
            } else if cfg.data.is_none() {
                return Err(Error::InvalidArgument("benchmark needs --data or --simulate".into()));
            }
            let report = cmd_benchmark(&cfg, &out_dir)?;
            print!("{}", report.format_table());
        }
    }
    Ok(())
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
