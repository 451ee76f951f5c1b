//! The regression β-VAE.
//!
//! The encoder reads the joint row `(x, y)` and emits a diagonal Gaussian
//! `(μ, log σ²)` over the latent space; the decoder maps a latent code back to
//! `(x̂, ŷ)`. Training minimises the density-balanced objective
//!
//! ```text
//! L = β_x·(1/b)Σ‖x_i − x̂_i‖² + β_y·(1/b)Σ w_i (y_i − ŷ_i)² + β_KL·(1/b)Σ KL_i
//! KL_i = −½ Σ_j (1 + log σ²_ij − μ²_ij − σ²_ij)
//! ```
//!
//! where `w_i` are mean-one inverse-density weights of the training targets.
//!
//! Layer sizes for `p` features and reduction step `q`:
//! encoder `p+1 → 2p+1 → p−q → p−2q` then two linear heads of size `p−3q`;
//! decoder `p−3q → p−2q → p−q → 2p+1` then linear heads of size `p` and `1`.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::warn;
use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{ScalerParams, TabularDataset};
use crate::error::{Error, Result};
use crate::kde::BandwidthRule;
use crate::nn::{self, Activation, AdamConfig, AdamState, GradientBundle, Mlp, Parameters};
use crate::seed;
use crate::weights;

#[derive(Debug, Clone, PartialEq)]
pub struct VaeConfig {
    pub beta_x: f64,
    pub beta_y: f64,
    pub beta_kl: f64,
    /// Exponent of the inverse-density loss weights; 0 disables balancing.
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Hidden-layer reduction step; `None` means `⌊p/10⌋ + 1`.
    pub q: Option<usize>,
    /// Use `z = μ` instead of sampling (plain autoencoder behaviour).
    pub deterministic_latent: bool,
    /// Bandwidth rule of the target KDE behind the loss weights.
    pub bandwidth_rule: BandwidthRule,
    pub clip_norm: Option<f64>,
    pub rng_seed: u64,
}

impl Default for VaeConfig {
    fn default() -> Self {
        Self {
            beta_x: 1.0,
            beta_y: 10.0,
            beta_kl: 1e-6,
            alpha: 1.0,
            epochs: 2000,
            batch_size: 128,
            lr: 1e-3,
            q: None,
            deterministic_latent: false,
            bandwidth_rule: BandwidthRule::Silverman,
            clip_norm: None,
            rng_seed: 0,
        }
    }
}

impl VaeConfig {
    pub fn reduction_step(&self, p: usize) -> usize {
        self.q.unwrap_or(p / 10 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta_x", self.beta_x), ("beta_y", self.beta_y), ("beta_kl", self.beta_kl), ("alpha", self.alpha)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidArgument(format!("learning rate must be > 0, got {}", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!("clip norm must be > 0, got {c}")));
            }
        }
        if self.q == Some(0) {
            return Err(Error::InvalidArgument("reduction step q must be >= 1".into()));
        }
        Ok(())
    }
}

/// Layer sizes derived from `p` and `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureDims {
    pub encoder_trunk: Vec<usize>,
    pub latent: usize,
    pub decoder_trunk: Vec<usize>,
    pub features: usize,
}

pub fn architecture_dims(p: usize, q: usize) -> Result<ArchitectureDims> {
    if q == 0 {
        return Err(Error::InvalidArgument("reduction step q must be >= 1".into()));
    }
    if p < 3 * q + 1 {
        return Err(Error::InvalidArgument(format!(
            "latent size p - 3q = {p} - {} is below 1; lower q",
            3 * q
        )));
    }
    Ok(ArchitectureDims {
        encoder_trunk: vec![p + 1, 2 * p + 1, p - q, p - 2 * q],
        latent: p - 3 * q,
        decoder_trunk: vec![p - 3 * q, p - 2 * q, p - q, 2 * p + 1],
        features: p,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel {
    pub encoder: Mlp,
    pub mu_head: Mlp,
    pub log_var_head: Mlp,
    pub decoder: Mlp,
    pub x_head: Mlp,
    pub y_head: Mlp,
    pub config: VaeConfig,
    pub scaler: Option<ScalerParams>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub epochs_trained: usize,
}

fn tanh_trunk<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Mlp> {
    nn::init_mlp(dims, Activation::Tanh, rng)
}

/// Untrained model for `p` features, initialised from `config.rng_seed`.
pub fn build_architecture(p: usize, config: &VaeConfig) -> Result<VaeModel> {
    config.validate()?;
    let q = config.reduction_step(p);
    let dims = architecture_dims(p, q)?;
    let mut rng = seed::rng(seed::derive(config.rng_seed, "vae-init"));
    let enc_out = *dims.encoder_trunk.last().expect("non-empty");
    let dec_out = *dims.decoder_trunk.last().expect("non-empty");
    Ok(VaeModel {
        encoder: tanh_trunk(&dims.encoder_trunk, &mut rng)?,
        mu_head: nn::init_mlp(&[enc_out, dims.latent], Activation::Identity, &mut rng)?,
        log_var_head: nn::init_mlp(&[enc_out, dims.latent], Activation::Identity, &mut rng)?,
        decoder: tanh_trunk(&dims.decoder_trunk, &mut rng)?,
        x_head: nn::init_mlp(&[dec_out, p], Activation::Identity, &mut rng)?,
        y_head: nn::init_mlp(&[dec_out, 1], Activation::Identity, &mut rng)?,
        config: config.clone(),
        scaler: None,
        feature_names: (1..=p).map(|j| format!("x{j}")).collect(),
        target_name: "y".into(),
        epochs_trained: 0,
    })
}

impl VaeModel {
    pub fn n_features(&self) -> usize {
        self.x_head.output_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.mu_head.output_dim()
    }

    pub fn is_trained(&self) -> bool {
        self.epochs_trained >= 1
    }

    fn networks(&self) -> [&Mlp; 6] {
        [&self.encoder, &self.mu_head, &self.log_var_head, &self.decoder, &self.x_head, &self.y_head]
    }

    fn networks_mut(&mut self) -> [&mut Mlp; 6] {
        [
            &mut self.encoder,
            &mut self.mu_head,
            &mut self.log_var_head,
            &mut self.decoder,
            &mut self.x_head,
            &mut self.y_head,
        ]
    }

    fn check_rows(&self, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<()> {
        if x.ncols() != self.n_features() || x.nrows() != y.len() {
            return Err(Error::Shape(format!(
                "model expects {} features; got {}x{} with {} targets",
                self.n_features(),
                x.nrows(),
                x.ncols(),
                y.len()
            )));
        }
        Ok(())
    }
}

fn param_split(model: &VaeModel, mut i: usize) -> (usize, usize) {
    for (k, net) in model.networks().iter().enumerate() {
        let n = net.param_count();
        if i < n {
            return (k, i);
        }
        i -= n;
    }
    panic!("parameter index out of range");
}

impl Parameters for VaeModel {
    fn param_count(&self) -> usize {
        self.networks().iter().map(|n| n.param_count()).sum()
    }

    fn param(&self, i: usize) -> f64 {
        let (k, j) = param_split(self, i);
        self.networks()[k].param(j)
    }

    fn set_param(&mut self, i: usize, v: f64) {
        let (k, j) = param_split(self, i);
        self.networks_mut()[k].set_param(j, v);
    }
}

fn joint_input(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Array2<f64> {
    concatenate(Axis(1), &[x, y.insert_axis(Axis(1))]).expect("row counts agree")
}

/// Encoder means and log-variances for scaled rows.
pub fn encode(model: &VaeModel, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    model.check_rows(x, y)?;
    if x.iter().chain(y.iter()).any(|v| !(-1.0..=2.0).contains(v)) {
        warn!("encoder input lies far outside [0, 1]; was it min-max scaled with the model's scaler?");
    }
    let h = model.encoder.predict(joint_input(x, y).view())?;
    Ok((model.mu_head.predict(h.view())?, model.log_var_head.predict(h.view())?))
}

/// `z = μ + exp(log σ²/2) ⊙ ε`, or `z = μ` when `deterministic`.
pub fn reparameterize<R: Rng + ?Sized>(
    mu: ArrayView2<'_, f64>,
    log_var: ArrayView2<'_, f64>,
    deterministic: bool,
    rng: &mut R,
) -> Result<Array2<f64>> {
    if mu.dim() != log_var.dim() {
        return Err(Error::Shape(format!("mu {:?} vs log-variance {:?}", mu.dim(), log_var.dim())));
    }
    if deterministic {
        return Ok(mu.to_owned());
    }
    let eps = standard_normal(mu.dim(), rng);
    Ok(apply_noise(mu, log_var, eps.view()))
}

fn standard_normal<R: Rng + ?Sized>(dim: (usize, usize), rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn(dim, || StandardNormal.sample(rng))
}

fn apply_noise(mu: ArrayView2<'_, f64>, log_var: ArrayView2<'_, f64>, eps: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut z = mu.to_owned();
    ndarray::Zip::from(&mut z)
        .and(log_var)
        .and(eps)
        .for_each(|z, &lv, &e| *z += (0.5 * lv).exp() * e);
    z
}

/// Decoded features and targets (scaled space).
pub fn decode(model: &VaeModel, z: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    if z.ncols() != model.latent_dim() {
        return Err(Error::Shape(format!(
            "latent codes have {} columns, model latent size is {}",
            z.ncols(),
            model.latent_dim()
        )));
    }
    let h = model.decoder.predict(z)?;
    let x_hat = model.x_head.predict(h.view())?;
    let y_hat = model.y_head.predict(h.view())?.column(0).to_owned();
    Ok((x_hat, y_hat))
}

/// `decode(encode(x, y).μ)`.
pub fn reconstruct(model: &VaeModel, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    let (mu, _) = encode(model, x, y)?;
    decode(model, mu.view())
}

/// Batch loss terms. `recon_x`, `recon_y` and `kl` are batch means before
/// the β factors; `total` is the weighted objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub recon_x: f64,
    pub recon_y: f64,
    pub kl: f64,
    pub kl_per_example: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeGradients {
    pub encoder: GradientBundle,
    pub mu_head: GradientBundle,
    pub log_var_head: GradientBundle,
    pub decoder: GradientBundle,
    pub x_head: GradientBundle,
    pub y_head: GradientBundle,
}

impl VaeGradients {
    fn bundles(&self) -> [&GradientBundle; 6] {
        [&self.encoder, &self.mu_head, &self.log_var_head, &self.decoder, &self.x_head, &self.y_head]
    }

    fn bundles_mut(&mut self) -> [&mut GradientBundle; 6] {
        [
            &mut self.encoder,
            &mut self.mu_head,
            &mut self.log_var_head,
            &mut self.decoder,
            &mut self.x_head,
            &mut self.y_head,
        ]
    }

    /// Gradients in [`Parameters`] order.
    pub fn flatten(&self) -> Vec<f64> {
        self.bundles().iter().flat_map(|b| b.flatten()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.bundles().iter().all(|b| b.is_finite())
    }
}

/// Balanced loss with fresh reparameterisation noise drawn from `rng`.
pub fn balanced_loss<R: Rng + ?Sized>(
    model: &VaeModel,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    loss_weights: ArrayView1<'_, f64>,
    rng: &mut R,
) -> Result<(LossBreakdown, VaeGradients)> {
    let eps = if model.config.deterministic_latent {
        Array2::zeros((x.nrows(), model.latent_dim()))
    } else {
        standard_normal((x.nrows(), model.latent_dim()), rng)
    };
    balanced_loss_with_noise(model, x, y, loss_weights, eps.view())
}

/// Balanced loss and its exact gradient for a fixed noise matrix `eps`.
pub fn balanced_loss_with_noise(
    model: &VaeModel,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    loss_weights: ArrayView1<'_, f64>,
    eps: ArrayView2<'_, f64>,
) -> Result<(LossBreakdown, VaeGradients)> {
    model.check_rows(x, y)?;
    let b = x.nrows();
    let dz = model.latent_dim();
    if loss_weights.len() != b {
        return Err(Error::Shape(format!("{} loss weights for a batch of {b}", loss_weights.len())));
    }
    if eps.dim() != (b, dz) {
        return Err(Error::Shape(format!("noise {:?}, expected ({b}, {dz})", eps.dim())));
    }
    if b == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let cfg = &model.config;
    let inv_b = 1.0 / b as f64;

    // forward
    let (h, enc_cache) = model.encoder.forward(joint_input(x, y).view())?;
    let (mu, mu_cache) = model.mu_head.forward(h.view())?;
    let (log_var, lv_cache) = model.log_var_head.forward(h.view())?;
    let z = if cfg.deterministic_latent {
        mu.clone()
    } else {
        apply_noise(mu.view(), log_var.view(), eps)
    };
    let (h2, dec_cache) = model.decoder.forward(z.view())?;
    let (x_hat, xh_cache) = model.x_head.forward(h2.view())?;
    let (y_hat, yh_cache) = model.y_head.forward(h2.view())?;

    let x_res = &x - &x_hat;
    let y_res = &y - &y_hat.column(0);
    let recon_x = x_res.iter().map(|r| r * r).sum::<f64>() * inv_b;
    let recon_y = y_res
        .iter()
        .zip(loss_weights.iter())
        .map(|(r, w)| w * r * r)
        .sum::<f64>()
        * inv_b;
    let mut kl_per_example = Array1::<f64>::zeros(b);
    for i in 0..b {
        let mut s = 0.0;
        for j in 0..dz {
            let (m, lv) = (mu[[i, j]], log_var[[i, j]]);
            s += 1.0 + lv - m * m - lv.exp();
        }
        kl_per_example[i] = -0.5 * s;
    }
    let kl = kl_per_example.sum() * inv_b;
    let total = cfg.beta_x * recon_x + cfg.beta_y * recon_y + cfg.beta_kl * kl;

    // backward
    let g_xhat = x_res.mapv(|r| -2.0 * cfg.beta_x * inv_b * r);
    let mut g_yhat = Array2::<f64>::zeros((b, 1));
    for i in 0..b {
        g_yhat[[i, 0]] = -2.0 * cfg.beta_y * inv_b * loss_weights[i] * y_res[i];
    }
    let (gx_head, dh2_x) = model.x_head.backward(&xh_cache, g_xhat.view())?;
    let (gy_head, dh2_y) = model.y_head.backward(&yh_cache, g_yhat.view())?;
    let dh2 = dh2_x + dh2_y;
    let (g_decoder, g_z) = model.decoder.backward(&dec_cache, dh2.view())?;

    let kl_scale = cfg.beta_kl * inv_b;
    let mut g_mu = g_z.clone();
    let mut g_lv = Array2::<f64>::zeros((b, dz));
    for i in 0..b {
        for j in 0..dz {
            let (m, lv) = (mu[[i, j]], log_var[[i, j]]);
            g_mu[[i, j]] += kl_scale * m;
            let through_z = if cfg.deterministic_latent {
                0.0
            } else {
                g_z[[i, j]] * eps[[i, j]] * 0.5 * (0.5 * lv).exp()
            };
            g_lv[[i, j]] = through_z + kl_scale * 0.5 * (lv.exp() - 1.0);
        }
    }
    let (g_mu_head, dh_mu) = model.mu_head.backward(&mu_cache, g_mu.view())?;
    let (g_lv_head, dh_lv) = model.log_var_head.backward(&lv_cache, g_lv.view())?;
    let dh = dh_mu + dh_lv;
    let (g_encoder, _) = model.encoder.backward(&enc_cache, dh.view())?;

    Ok((
        LossBreakdown {
            total,
            recon_x,
            recon_y,
            kl,
            kl_per_example,
        },
        VaeGradients {
            encoder: g_encoder,
            mu_head: g_mu_head,
            log_var_head: g_lv_head,
            decoder: g_decoder,
            x_head: gx_head,
            y_head: gy_head,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub total: f64,
    pub recon_x: f64,
    pub recon_y: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochLoss>,
    pub wall_clock: Duration,
    pub final_epoch: usize,
}

impl TrainReport {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["epoch", "total", "recon_x", "recon_y", "kl"])?;
        for (e, l) in self.epochs.iter().enumerate() {
            w.write_record([
                (e + 1).to_string(),
                l.total.to_string(),
                l.recon_x.to_string(),
                l.recon_y.to_string(),
                l.kl.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<loss csv>", e))?;
        Ok(())
    }
}

/// Train on a min-max scaled dataset.
pub fn train(ds: &TabularDataset, cfg: &VaeConfig) -> Result<(VaeModel, TrainReport)> {
    let scaler = ds
        .scaler
        .clone()
        .ok_or_else(|| Error::InvalidArgument("training data must be min-max scaled".into()))?;
    let mut model = build_architecture(ds.n_features(), cfg)?;
    model.scaler = Some(scaler);
    model.feature_names = ds.feature_names.clone();
    model.target_name = ds.target_name.clone();
    let report = fit(&mut model, ds)?;
    Ok((model, report))
}

/// Run `model.config.epochs` epochs of mini-batch Adam on `ds`.
pub fn fit(model: &mut VaeModel, ds: &TabularDataset) -> Result<TrainReport> {
    let cfg = model.config.clone();
    cfg.validate()?;
    let n = ds.n_rows();
    if cfg.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be >= 1; an untrained model cannot generate".into()));
    }
    if cfg.batch_size > n {
        return Err(Error::InvalidArgument(format!("batch size {} exceeds {n} training rows", cfg.batch_size)));
    }
    model.check_rows(ds.features.view(), ds.target.view())?;
    let rw = weights::relevance_weights(ds.target.view(), cfg.alpha, cfg.bandwidth_rule)?;
    let loss_w = weights::loss_weights(&rw);

    let adam = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let mut states: Vec<AdamState> = model.networks().iter().map(|m| AdamState::new(m, adam)).collect();
    let mut rng = seed::rng(seed::derive(cfg.rng_seed, "vae-train"));
    let mut order: Vec<usize> = (0..n).collect();
    let start = Instant::now();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut acc = EpochLoss {
            total: 0.0,
            recon_x: 0.0,
            recon_y: 0.0,
            kl: 0.0,
        };
        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            let xb = ds.features.select(Axis(0), batch);
            let yb = ds.target.select(Axis(0), batch);
            let wb = loss_w.select(Axis(0), batch);
            let (loss, mut grads) = balanced_loss(model, xb.view(), yb.view(), wb.view(), &mut rng)?;
            if !loss.total.is_finite() || !grads.is_finite() {
                return Err(Error::Numeric(format!(
                    "training diverged at epoch {}, batch {batch_no} (loss {})",
                    epoch + 1,
                    loss.total
                )));
            }
            if let Some(c) = cfg.clip_norm {
                nn::clip_global_norm(&mut grads.bundles_mut(), c);
            }
            let grads_ref = grads.bundles();
            for ((net, g), st) in model.networks_mut().into_iter().zip(grads_ref).zip(states.iter_mut()) {
                nn::adam_step(net, g, st)?;
            }
            let bw = batch.len() as f64;
            acc.total += loss.total * bw;
            acc.recon_x += loss.recon_x * bw;
            acc.recon_y += loss.recon_y * bw;
            acc.kl += loss.kl * bw;
        }
        let nf = n as f64;
        epochs.push(EpochLoss {
            total: acc.total / nf,
            recon_x: acc.recon_x / nf,
            recon_y: acc.recon_y / nf,
            kl: acc.kl / nf,
        });
        model.epochs_trained += 1;
    }
    Ok(TrainReport {
        final_epoch: epochs.len(),
        epochs,
        wall_clock: start.elapsed(),
    })
}

/// Classical VAE generation: for each seed row, sample `z ~ N(μ_i, diag σ²_i)`
/// and decode. Output is in scaled units.
pub fn natural_generate<R: Rng + ?Sized>(
    model: &VaeModel,
    seed_indices: &[usize],
    train: &TabularDataset,
    rng: &mut R,
) -> Result<TabularDataset> {
    if !model.is_trained() {
        return Err(Error::ModelMismatch("model is untrained".into()));
    }
    if let Some(&bad) = seed_indices.iter().find(|&&i| i >= train.n_rows()) {
        return Err(Error::InvalidArgument(format!(
            "seed index {bad} out of range for {} rows",
            train.n_rows()
        )));
    }
    let seeds = train.select_rows(seed_indices);
    if seed_indices.is_empty() {
        return train.with_rows(Array2::zeros((0, train.n_features())), Array1::zeros(0));
    }
    let (mu, log_var) = encode(model, seeds.features.view(), seeds.target.view())?;
    let z = reparameterize(mu.view(), log_var.view(), model.config.deterministic_latent, rng)?;
    let (x, y) = decode(model, z.view())?;
    train.with_rows(x, y)
}

pub const META_FORMAT: &str = "david-vae-meta";
pub const META_VERSION: u32 = 1;

/// Sidecar path for a checkpoint: `<checkpoint>.meta`.
pub fn meta_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn rule_to_string(rule: BandwidthRule) -> String {
    match rule {
        BandwidthRule::Silverman => "silverman".into(),
        BandwidthRule::Scott => "scott".into(),
        BandwidthRule::Fixed(f) => format!("fixed:{f}"),
    }
}

pub fn parse_bandwidth_rule(s: &str) -> Result<BandwidthRule> {
    match s.trim().to_ascii_lowercase().as_str() {
        "silverman" => Ok(BandwidthRule::Silverman),
        "scott" => Ok(BandwidthRule::Scott),
        other => match other.strip_prefix("fixed:") {
            Some(f) => f
                .parse::<f64>()
                .ok()
                .filter(|f| *f >= 0.0 && f.is_finite())
                .map(BandwidthRule::Fixed)
                .ok_or_else(|| Error::InvalidArgument(format!("bad fixed bandwidth '{s}'"))),
            None => Err(Error::InvalidArgument(format!(
                "unknown bandwidth rule '{s}' (silverman, scott, fixed:<factor>)"
            ))),
        },
    }
}

pub fn bandwidth_rule_name(rule: BandwidthRule) -> String {
    rule_to_string(rule)
}

/// Key-value metadata written next to a checkpoint.
pub fn config_to_pairs(cfg: &VaeConfig) -> Vec<(String, String)> {
    vec![
        ("beta_x".into(), cfg.beta_x.to_string()),
        ("beta_y".into(), cfg.beta_y.to_string()),
        ("beta_kl".into(), cfg.beta_kl.to_string()),
        ("alpha".into(), cfg.alpha.to_string()),
        ("epochs".into(), cfg.epochs.to_string()),
        ("batch_size".into(), cfg.batch_size.to_string()),
        ("lr".into(), cfg.lr.to_string()),
        ("q".into(), cfg.q.map_or("auto".into(), |q| q.to_string())),
        ("deterministic_latent".into(), cfg.deterministic_latent.to_string()),
        ("vae_bandwidth".into(), rule_to_string(cfg.bandwidth_rule)),
        ("clip_norm".into(), cfg.clip_norm.map_or("none".into(), |c| c.to_string())),
        ("vae_seed".into(), cfg.rng_seed.to_string()),
    ]
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value '{v}' for key '{key}'")))
}

/// Apply one key of the VAE configuration. Returns `false` for unknown keys.
pub fn apply_config_pair(cfg: &mut VaeConfig, key: &str, value: &str) -> Result<bool> {
    match key {
        "beta_x" => cfg.beta_x = parse_num(key, value)?,
        "beta_y" => cfg.beta_y = parse_num(key, value)?,
        "beta_kl" => cfg.beta_kl = parse_num(key, value)?,
        "alpha" => cfg.alpha = parse_num(key, value)?,
        "epochs" => cfg.epochs = parse_num(key, value)?,
        "batch_size" => cfg.batch_size = parse_num(key, value)?,
        "lr" => cfg.lr = parse_num(key, value)?,
        "q" => cfg.q = if value.trim() == "auto" { None } else { Some(parse_num(key, value)?) },
        "deterministic_latent" => cfg.deterministic_latent = parse_num(key, value)?,
        "vae_bandwidth" => cfg.bandwidth_rule = parse_bandwidth_rule(value)?,
        "clip_norm" => cfg.clip_norm = if value.trim() == "none" { None } else { Some(parse_num(key, value)?) },
        "vae_seed" => cfg.rng_seed = parse_num(key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Write the tensor checkpoint to `path` and its metadata sidecar to `path.meta`.
pub fn save(model: &VaeModel, path: &Path) -> Result<()> {
    let mut tensors = Vec::new();
    for (name, net) in ["encoder", "mu_head", "log_var_head", "decoder", "x_head", "y_head"]
        .iter()
        .zip(model.networks())
    {
        tensors.extend(net.named_tensors(name));
    }
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    nn::write_tensors(std::io::BufWriter::new(f), &tensors).map_err(|e| Error::io(path, e))?;

    let mut meta = String::new();
    meta.push_str(&format!("format = {META_FORMAT}\nversion = {META_VERSION}\n"));
    meta.push_str(&format!("p = {}\n", model.n_features()));
    for (k, v) in config_to_pairs(&model.config) {
        meta.push_str(&format!("{k} = {v}\n"));
    }
    meta.push_str(&format!("epochs_trained = {}\n", model.epochs_trained));
    meta.push_str(&format!("feature_names = {}\n", model.feature_names.join(",")));
    meta.push_str(&format!("target_name = {}\n", model.target_name));
    if let Some(s) = &model.scaler {
        meta.push_str(&format!("scaler.min = {}\nscaler.max = {}\n", join_floats(&s.min), join_floats(&s.max)));
    }
    let mp = meta_path(path);
    std::fs::write(&mp, meta).map_err(|e| Error::io(&mp, e))
}

/// Parse `key = value` lines; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected 'key = value'", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_floats(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_num(key, x)).collect()
}

pub fn load(path: &Path) -> Result<VaeModel> {
    let mp = meta_path(path);
    let text = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let pairs: BTreeMap<String, String> = parse_key_values(&text)?.into_iter().collect();
    let get = |k: &str| pairs.get(k).ok_or_else(|| Error::Format(format!("metadata lacks '{k}'")));
    if get("format")? != META_FORMAT {
        return Err(Error::Format(format!("{} is not a VAE metadata file", mp.display())));
    }
    let version: u32 = parse_num("version", get("version")?)?;
    if version != META_VERSION {
        return Err(Error::Format(format!("unsupported metadata version {version}")));
    }
    let mut cfg = VaeConfig::default();
    for (k, v) in &pairs {
        apply_config_pair(&mut cfg, k, v)?;
    }
    let p: usize = parse_num("p", get("p")?)?;
    let mut model = build_architecture(p, &cfg)?;
    model.epochs_trained = parse_num("epochs_trained", get("epochs_trained")?)?;
    model.feature_names = get("feature_names")?.split(',').map(|s| s.to_string()).collect();
    model.target_name = get("target_name")?.clone();
    if let (Some(lo), Some(hi)) = (pairs.get("scaler.min"), pairs.get("scaler.max")) {
        model.scaler = Some(ScalerParams::new(parse_floats("scaler.min", lo)?, parse_floats("scaler.max", hi)?)?);
    }
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let tensors = nn::read_tensors(BufReader::new(f))?;
    for (name, net) in ["encoder", "mu_head", "log_var_head", "decoder", "x_head", "y_head"]
        .iter()
        .zip(model.networks_mut())
    {
        net.load_tensors(name, &tensors)?;
    }
    Ok(model)
}
