//! Synthetic-row generators and the augmentation assembler.
//!
//! Every generator draws its seeds from the inverse-density weights of the
//! training targets, so the variants differ only in the space where noise is
//! added:
//!
//! | kind      | noise                                                   |
//! |-----------|---------------------------------------------------------|
//! | `Baseline`| no synthetic rows                                       |
//! | `Os`      | none: seed rows are duplicated                          |
//! | `Csb`     | smoothed bootstrap on the scaled `(x, y)` rows          |
//! | `ZeroVae`, `Bvae`, `Bvaew` | `z ~ N(μ_i, σ²_i)` then decode         |
//! | `Kbvae`, `Kbvaew` | smoothed bootstrap on the latent means, then decode |
//! | `Kpca`    | smoothed bootstrap on principal-component scores        |
//!
//! `Kbvaew` is DAVID; see [`david_generate`].

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;

use crate::data::{Origin, TabularDataset};
use crate::error::{Error, Result};
use crate::kde::{fit_kde_with, BandwidthConvention, BandwidthRule, KdeModel};
use crate::linalg;
use crate::seed;
use crate::vae::{self, VaeModel};
use crate::weights::{self, RelevanceWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    Baseline,
    Os,
    Csb,
    ZeroVae,
    Bvae,
    Kbvae,
    Bvaew,
    Kbvaew,
    Kpca,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 9] = [
        GeneratorKind::Baseline,
        GeneratorKind::Os,
        GeneratorKind::Csb,
        GeneratorKind::ZeroVae,
        GeneratorKind::Bvae,
        GeneratorKind::Kbvae,
        GeneratorKind::Bvaew,
        GeneratorKind::Kbvaew,
        GeneratorKind::Kpca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Baseline => "Baseline",
            GeneratorKind::Os => "OS",
            GeneratorKind::Csb => "CSB",
            GeneratorKind::ZeroVae => "0VAE",
            GeneratorKind::Bvae => "BVAE",
            GeneratorKind::Kbvae => "kBVAE",
            GeneratorKind::Bvaew => "BVAEw",
            GeneratorKind::Kbvaew => "kBVAEw",
            GeneratorKind::Kpca => "kPCA",
        }
    }

    /// The VAE flavour this generator needs, if any.
    pub fn required_model(self) -> Option<ModelFlavor> {
        match self {
            GeneratorKind::ZeroVae => Some(ModelFlavor::ZeroKl),
            GeneratorKind::Bvae | GeneratorKind::Kbvae => Some(ModelFlavor::Vanilla),
            GeneratorKind::Bvaew | GeneratorKind::Kbvaew => Some(ModelFlavor::Balanced),
            _ => None,
        }
    }

    /// Check that `model` was trained the way this generator expects.
    pub fn check_model(self, model: &VaeModel) -> Result<()> {
        let cfg = &model.config;
        match self.required_model() {
            None => Ok(()),
            Some(ModelFlavor::ZeroKl) if cfg.beta_kl != 0.0 => Err(Error::ModelMismatch(format!(
                "{} needs a model trained with beta_kl = 0, got {}",
                self.name(),
                cfg.beta_kl
            ))),
            Some(ModelFlavor::Vanilla) if cfg.alpha != 0.0 => Err(Error::ModelMismatch(format!(
                "{} needs a model trained without loss balancing (alpha = 0), got alpha = {}",
                self.name(),
                cfg.alpha
            ))),
            Some(ModelFlavor::Balanced) if !(cfg.alpha > 0.0) => Err(Error::ModelMismatch(format!(
                "{} needs a model trained with the balanced loss (alpha > 0), got alpha = {}",
                self.name(),
                cfg.alpha
            ))),
            Some(_) => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => GeneratorKind::Baseline,
            "os" => GeneratorKind::Os,
            "csb" => GeneratorKind::Csb,
            "0vae" | "zerovae" => GeneratorKind::ZeroVae,
            "bvae" => GeneratorKind::Bvae,
            "kbvae" => GeneratorKind::Kbvae,
            "bvaew" => GeneratorKind::Bvaew,
            "kbvaew" | "david" => GeneratorKind::Kbvaew,
            "kpca" => GeneratorKind::Kpca,
            other => return Err(Error::InvalidArgument(format!("unknown generator '{other}'"))),
        })
    }
}

/// The three VAE trainings a full benchmark needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelFlavor {
    /// `alpha = 0`, default `beta_kl`.
    Vanilla,
    /// `alpha > 0`, default `beta_kl`.
    Balanced,
    /// `beta_kl = 0`, `alpha = 0`.
    ZeroKl,
}

impl ModelFlavor {
    pub fn name(self) -> &'static str {
        match self {
            ModelFlavor::Vanilla => "vanilla",
            ModelFlavor::Balanced => "balanced",
            ModelFlavor::ZeroKl => "zero-kl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixRule {
    /// Keep every original and every synthetic row.
    #[default]
    Append,
    /// Like `Append`, but synthetic rows that exactly repeat a row already in
    /// the set are dropped.
    ReplaceDuplicates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPlan {
    /// Rows to generate; `None` means as many as the training set has.
    pub n_synthetic: Option<usize>,
    /// Exponent of the seed-drawing weights.
    pub alpha: f64,
    /// Multiplier on the bandwidth matrix.
    pub rho: f64,
    /// Bandwidth of the smoothing kernel.
    pub bandwidth_rule: BandwidthRule,
    /// Bandwidth of the target density behind the drawing weights.
    pub target_bandwidth: BandwidthRule,
    pub convention: BandwidthConvention,
    pub mix: MixRule,
    pub rng_seed: u64,
}

impl Default for AugmentationPlan {
    fn default() -> Self {
        Self {
            n_synthetic: None,
            alpha: 1.0,
            rho: 0.1,
            bandwidth_rule: BandwidthRule::Silverman,
            target_bandwidth: BandwidthRule::Silverman,
            convention: BandwidthConvention::Squared,
            mix: MixRule::Append,
            rng_seed: 0,
        }
    }
}

impl AugmentationPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidArgument(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn synthetic_count(&self, train_rows: usize) -> usize {
        self.n_synthetic.unwrap_or(train_rows)
    }
}

/// `m` independent categorical draws from `weights.normalized`.
pub fn draw_seeds<R: Rng + ?Sized>(weights: &RelevanceWeights, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let dist = WeightedIndex::new(weights.normalized.iter().copied())
        .map_err(|e| Error::InvalidArgument(format!("invalid drawing weights: {e}")))?;
    Ok((0..m).map(|_| dist.sample(rng)).collect())
}

/// Principal axes of a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// Orthonormal eigenvectors of the covariance as columns, by descending eigenvalue.
    pub components: Array2<f64>,
    pub eigenvalues: Array1<f64>,
    pub retained: usize,
}

/// Full-retention PCA of the sample covariance (denominator `n − 1`).
pub fn pca_fit(points: ArrayView2<'_, f64>) -> Result<PcaModel> {
    let (n, d) = points.dim();
    if d < 1 || n < d || n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs n >= d >= 1 and n >= 2, got {n}x{d}")));
    }
    let mean = points.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &points - &mean;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    let (eigenvalues, components) = linalg::symmetric_eigen(cov.view())?;
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        retained: d,
    })
}

pub fn pca_project(model: &PcaModel, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if points.ncols() != model.mean.len() {
        return Err(Error::Shape(format!(
            "points have {} columns, PCA was fit on {}",
            points.ncols(),
            model.mean.len()
        )));
    }
    let basis = model.components.slice(ndarray::s![.., ..model.retained]);
    Ok((&points - &model.mean).dot(&basis))
}

pub fn pca_inverse(model: &PcaModel, scores: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if scores.ncols() != model.retained {
        return Err(Error::Shape(format!(
            "scores have {} columns, PCA retains {}",
            scores.ncols(),
            model.retained
        )));
    }
    let basis = model.components.slice(ndarray::s![.., ..model.retained]);
    Ok(scores.dot(&basis.t()) + &model.mean)
}

fn check_model_fits(model: &VaeModel, train: &TabularDataset) -> Result<()> {
    if !model.is_trained() {
        return Err(Error::ModelMismatch("model is untrained".into()));
    }
    if model.n_features() != train.n_features() {
        return Err(Error::ModelMismatch(format!(
            "model has {} features, data has {}",
            model.n_features(),
            train.n_features()
        )));
    }
    Ok(())
}

fn bootstrap_rows<R: Rng + ?Sized>(kde: &KdeModel, seeds: &[usize], rng: &mut R) -> Result<Array2<f64>> {
    let mut out = Array2::<f64>::zeros((seeds.len(), kde.dim()));
    for (mut row, &s) in out.axis_iter_mut(Axis(0)).zip(seeds) {
        row.assign(&kde.sample_from_seed(s, rng)?);
    }
    Ok(out)
}

struct Streams {
    seeds: rand_chacha::ChaCha8Rng,
    noise: rand_chacha::ChaCha8Rng,
}

fn streams(plan: &AugmentationPlan) -> Streams {
    Streams {
        seeds: seed::rng(seed::derive(plan.rng_seed, "seeds")),
        noise: seed::rng(seed::derive(plan.rng_seed, "noise")),
    }
}

/// Synthetic rows (scaled units) from generator `kind`.
pub fn generate(
    kind: GeneratorKind,
    train: &TabularDataset,
    model: Option<&VaeModel>,
    plan: &AugmentationPlan,
) -> Result<TabularDataset> {
    plan.validate()?;
    let m = plan.synthetic_count(train.n_rows());
    let empty = || train.with_rows(Array2::zeros((0, train.n_features())), Array1::zeros(0));
    if kind == GeneratorKind::Baseline {
        return empty();
    }
    let model = match kind.required_model() {
        Some(_) => {
            let model = model.ok_or_else(|| Error::ModelMismatch(format!("{kind} needs a trained VAE")))?;
            kind.check_model(model)?;
            check_model_fits(model, train)?;
            Some(model)
        }
        None => None,
    };
    if m == 0 {
        return empty();
    }
    let omega = weights::relevance_weights(train.target.view(), plan.alpha, plan.target_bandwidth)?;
    let mut rngs = streams(plan);
    let seeds = draw_seeds(&omega, m, &mut rngs.seeds)?;
    match kind {
        GeneratorKind::Baseline => unreachable!(),
        GeneratorKind::Os => Ok(train.select_rows(&seeds)),
        GeneratorKind::Csb => {
            let kde = fit_kde_with(train.joint_matrix(), omega.normalized.view(), plan.bandwidth_rule, plan.rho, plan.convention)?;
            train.from_joint(&bootstrap_rows(&kde, &seeds, &mut rngs.noise)?)
        }
        GeneratorKind::Kpca => {
            let joint = train.joint_matrix();
            let pca = pca_fit(joint.view())?;
            let scores = pca_project(&pca, joint.view())?;
            let kde = fit_kde_with(scores, omega.normalized.view(), plan.bandwidth_rule, plan.rho, plan.convention)?;
            let sampled = bootstrap_rows(&kde, &seeds, &mut rngs.noise)?;
            train.from_joint(&pca_inverse(&pca, sampled.view())?)
        }
        GeneratorKind::ZeroVae | GeneratorKind::Bvae | GeneratorKind::Bvaew => {
            vae::natural_generate(model.expect("checked"), &seeds, train, &mut rngs.noise)
        }
        GeneratorKind::Kbvae | GeneratorKind::Kbvaew => {
            Ok(latent_bootstrap(model.expect("checked"), train, &omega, &seeds, plan, &mut rngs.noise)?.synthetic)
        }
    }
}

/// Everything produced by one latent smoothed-bootstrap run.
#[derive(Debug, Clone)]
pub struct DavidOutput {
    pub synthetic: TabularDataset,
    /// Latent samples `z*`, one row per synthetic row.
    pub latent: Array2<f64>,
    pub seeds: Vec<usize>,
    /// KDE over the latent means of the training rows.
    pub kde: KdeModel,
}

fn latent_bootstrap<R: Rng + ?Sized>(
    model: &VaeModel,
    train: &TabularDataset,
    omega: &RelevanceWeights,
    seeds: &[usize],
    plan: &AugmentationPlan,
    rng: &mut R,
) -> Result<DavidOutput> {
    let (mu, _) = vae::encode(model, train.features.view(), train.target.view())?;
    let kde = fit_kde_with(mu, omega.normalized.view(), plan.bandwidth_rule, plan.rho, plan.convention)?;
    let latent = bootstrap_rows(&kde, seeds, rng)?;
    let (x, y) = vae::decode(model, latent.view())?;
    Ok(DavidOutput {
        synthetic: train.with_rows(x, y)?,
        latent,
        seeds: seeds.to_vec(),
        kde,
    })
}

/// DAVID generation:
///
/// 1. draw seeds from the inverse-density weights of the training targets;
/// 2. fit a weighted Gaussian KDE on the encoder means of all training rows
///    and sample `z*` from the kernel centred on each seed's mean;
/// 3. decode `z*` into `(x*, y*)`.
///
/// With a model trained without balancing (`alpha = 0`) this is kBVAE.
pub fn david_generate(model: &VaeModel, train: &TabularDataset, plan: &AugmentationPlan) -> Result<DavidOutput> {
    plan.validate()?;
    check_model_fits(model, train)?;
    let m = plan.synthetic_count(train.n_rows());
    let omega = weights::relevance_weights(train.target.view(), plan.alpha, plan.target_bandwidth)?;
    let mut rngs = streams(plan);
    let seeds = draw_seeds(&omega, m, &mut rngs.seeds)?;
    latent_bootstrap(model, train, &omega, &seeds, plan, &mut rngs.noise)
}

/// Original rows followed by synthetic rows, with provenance flags.
pub fn augment(
    train: &TabularDataset,
    synthetic: &TabularDataset,
    plan: &AugmentationPlan,
) -> Result<(TabularDataset, Vec<Origin>)> {
    if !train.same_schema(synthetic) || train.n_features() != synthetic.n_features() {
        return Err(Error::Shape("synthetic rows do not share the training schema".into()));
    }
    let synthetic = match plan.mix {
        MixRule::Append => synthetic.clone(),
        MixRule::ReplaceDuplicates => {
            let key = |ds: &TabularDataset, i: usize| -> Vec<u64> {
                ds.features
                    .row(i)
                    .iter()
                    .chain(std::iter::once(&ds.target[i]))
                    .map(|v| v.to_bits())
                    .collect()
            };
            let mut seen: HashSet<Vec<u64>> = (0..train.n_rows()).map(|i| key(train, i)).collect();
            let keep: Vec<usize> = (0..synthetic.n_rows()).filter(|&i| seen.insert(key(synthetic, i))).collect();
            synthetic.select_rows(&keep)
        }
    };
    let features = concatenate(Axis(0), &[train.features.view(), synthetic.features.view()])
        .map_err(|e| Error::Shape(e.to_string()))?;
    let target = concatenate(Axis(0), &[train.target.view(), synthetic.target.view()])
        .map_err(|e| Error::Shape(e.to_string()))?;
    let mut origin = vec![Origin::Real; train.n_rows()];
    origin.extend(std::iter::repeat(Origin::Synthetic).take(synthetic.n_rows()));
    Ok((train.with_rows(features, target)?, origin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{minmax_fit_transform, minmax_inverse, simulate_illustration};
    use crate::vae::{train as train_vae, VaeConfig};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn scaled_sim(n: usize) -> TabularDataset {
        minmax_fit_transform(&simulate_illustration(n, 11).unwrap()).unwrap().0
    }

    fn quick_model(ds: &TabularDataset, alpha: f64, beta_kl: f64) -> VaeModel {
        let cfg = VaeConfig {
            epochs: 3,
            batch_size: 32,
            alpha,
            beta_kl,
            ..VaeConfig::default()
        };
        train_vae(ds, &cfg).unwrap().0
    }

    #[test]
    fn kind_names_round_trip() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
        assert_eq!("david".parse::<GeneratorKind>().unwrap(), GeneratorKind::Kbvaew);
        assert!("kkpca".parse::<GeneratorKind>().is_err());
    }

    #[test]
    fn seed_draws() {
        let onehot = weights::from_density(array![1.0, 1.0, 1.0].view(), 0.0, BandwidthRule::Silverman).unwrap();
        let onehot = RelevanceWeights {
            normalized: array![0.0, 1.0, 0.0],
            ..onehot
        };
        assert!(draw_seeds(&onehot, 50, &mut seed::rng(1)).unwrap().iter().all(|&i| i == 1));
        assert!(draw_seeds(&onehot, 0, &mut seed::rng(1)).unwrap().is_empty());

        let uniform = weights::from_density(array![1.0, 1.0, 1.0, 1.0].view(), 0.0, BandwidthRule::Silverman).unwrap();
        let draws = draw_seeds(&uniform, 100_000, &mut seed::rng(2)).unwrap();
        for k in 0..4 {
            let f = draws.iter().filter(|&&i| i == k).count() as f64 / 1e5;
            assert!((f - 0.25).abs() < 0.01, "{k}: {f}");
        }
        assert_eq!(draws, draw_seeds(&uniform, 100_000, &mut seed::rng(2)).unwrap());
    }

    #[test]
    fn baseline_and_os() {
        let ds = scaled_sim(60);
        let plan = AugmentationPlan::default();
        assert_eq!(generate(GeneratorKind::Baseline, &ds, None, &plan).unwrap().n_rows(), 0);
        let os = generate(GeneratorKind::Os, &ds, None, &plan).unwrap();
        assert_eq!(os.n_rows(), 60);
        let rows: HashSet<Vec<u64>> = (0..60)
            .map(|i| ds.joint_matrix().row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        let joint = os.joint_matrix();
        for r in joint.outer_iter() {
            assert!(rows.contains(&r.iter().map(|v| v.to_bits()).collect::<Vec<_>>()));
        }
        let none = AugmentationPlan {
            n_synthetic: Some(0),
            ..plan
        };
        assert_eq!(generate(GeneratorKind::Csb, &ds, None, &none).unwrap().n_rows(), 0);
    }

    #[test]
    fn os_with_one_dominant_weight_copies_one_row() {
        // alpha large enough that the isolated target dominates the drawing weights
        let x = Array2::from_shape_fn((6, 2), |(i, j)| (i * 2 + j) as f64);
        let y = array![0.0, 0.01, 0.02, 0.03, 0.04, 100.0];
        let ds = TabularDataset::new(x, y, vec!["a".into(), "b".into()], "y").unwrap();
        let plan = AugmentationPlan {
            alpha: 50.0,
            n_synthetic: Some(20),
            ..AugmentationPlan::default()
        };
        let os = generate(GeneratorKind::Os, &ds, None, &plan).unwrap();
        assert!(os.target.iter().all(|&v| v == 100.0));
    }

    #[test]
    fn csb_and_kpca_shapes_and_determinism() {
        let ds = scaled_sim(80);
        let plan = AugmentationPlan {
            n_synthetic: Some(33),
            rng_seed: 4,
            ..AugmentationPlan::default()
        };
        for kind in [GeneratorKind::Csb, GeneratorKind::Kpca] {
            let a = generate(kind, &ds, None, &plan).unwrap();
            assert_eq!(a.n_rows(), 33);
            assert_eq!(a, generate(kind, &ds, None, &plan).unwrap());
            assert!(a.features.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn vae_kinds_check_their_models() {
        let ds = scaled_sim(64);
        let balanced = quick_model(&ds, 1.0, 1e-6);
        let vanilla = quick_model(&ds, 0.0, 1e-6);
        let zero = quick_model(&ds, 0.0, 0.0);
        let plan = AugmentationPlan::default();
        assert!(matches!(generate(GeneratorKind::Kbvaew, &ds, Some(&vanilla), &plan), Err(Error::ModelMismatch(_))));
        assert!(matches!(generate(GeneratorKind::Bvae, &ds, Some(&balanced), &plan), Err(Error::ModelMismatch(_))));
        assert!(matches!(generate(GeneratorKind::ZeroVae, &ds, Some(&vanilla), &plan), Err(Error::ModelMismatch(_))));
        assert!(matches!(generate(GeneratorKind::Bvaew, &ds, None, &plan), Err(Error::ModelMismatch(_))));
        for (kind, model) in [
            (GeneratorKind::ZeroVae, &zero),
            (GeneratorKind::Bvae, &vanilla),
            (GeneratorKind::Kbvae, &vanilla),
            (GeneratorKind::Bvaew, &balanced),
            (GeneratorKind::Kbvaew, &balanced),
        ] {
            let out = generate(kind, &ds, Some(model), &plan).unwrap();
            assert_eq!(out.n_rows(), 64);
            assert_eq!(out, generate(kind, &ds, Some(model), &plan).unwrap());
        }
        // kBVAE is the latent bootstrap of an unbalanced model
        let k = david_generate(&vanilla, &ds, &plan).unwrap();
        assert_eq!(k.synthetic, generate(GeneratorKind::Kbvae, &ds, Some(&vanilla), &plan).unwrap());
    }

    #[test]
    fn david_zero_bandwidth_returns_seed_reconstructions() {
        let ds = scaled_sim(64);
        let model = quick_model(&ds, 1.0, 1e-6);
        let plan = AugmentationPlan {
            bandwidth_rule: BandwidthRule::Fixed(0.0),
            n_synthetic: Some(40),
            ..AugmentationPlan::default()
        };
        let out = david_generate(&model, &ds, &plan).unwrap();
        assert!(out.kde.is_degenerate());
        let seeds = ds.select_rows(&out.seeds);
        let (xr, yr) = vae::reconstruct(&model, seeds.features.view(), seeds.target.view()).unwrap();
        assert_eq!(out.synthetic.features, xr);
        assert_eq!(out.synthetic.target, yr);
    }

    #[test]
    fn pca_examples() {
        let pts = array![[-2.0, 0.0], [-1.0, 0.0], [0.5, 0.0], [2.5, 0.0]];
        let m = pca_fit(pts.view()).unwrap();
        assert_abs_diff_eq!(m.components[[0, 0]].abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.components[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.eigenvalues[1], 0.0, epsilon = 1e-12);

        let mut rng = seed::rng(3);
        let x = Array2::from_shape_simple_fn((30, 4), || rng.random_range(-1.0..1.0));
        let m = pca_fit(x.view()).unwrap();
        let gram = m.components.t().dot(&m.components);
        for (a, b) in gram.iter().zip(Array2::<f64>::eye(4).iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
        let back = pca_inverse(&m, pca_project(&m, x.view()).unwrap().view()).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
        assert!(pca_fit(array![[1.0, 2.0]].view()).is_err());
    }

    #[test]
    fn augmentation_appends_and_flags() {
        let ds = scaled_sim(30);
        let plan = AugmentationPlan {
            n_synthetic: Some(12),
            ..AugmentationPlan::default()
        };
        let syn = generate(GeneratorKind::Csb, &ds, None, &plan).unwrap();
        let (aug, origin) = augment(&ds, &syn, &plan).unwrap();
        assert_eq!(aug.n_rows(), 42);
        assert_eq!(origin.iter().filter(|o| **o == Origin::Synthetic).count(), 12);
        let empty = generate(GeneratorKind::Baseline, &ds, None, &plan).unwrap();
        let (same, _) = augment(&ds, &empty, &plan).unwrap();
        assert_eq!(same, ds);

        let os = generate(GeneratorKind::Os, &ds, None, &plan).unwrap();
        let dedup = AugmentationPlan {
            mix: MixRule::ReplaceDuplicates,
            ..plan.clone()
        };
        assert_eq!(augment(&ds, &os, &dedup).unwrap().0.n_rows(), 30);

        // augmented rows go back to original units through the training scaler
        let raw = simulate_illustration(30, 11).unwrap();
        let scaler = ds.scaler.clone().unwrap();
        let back = minmax_inverse(&aug, &scaler).unwrap();
        for (a, b) in back.features.slice(ndarray::s![..30, ..]).iter().zip(raw.features.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
        let other = TabularDataset::new(Array2::zeros((2, 6)), Array1::zeros(2), (0..6).map(|j| format!("z{j}")).collect(), "Y").unwrap();
        assert!(augment(&ds, &other, &plan).is_err());
    }
}
