//! Weighted Gaussian kernel density estimation and smoothed-bootstrap
//! sampling.
//!
//! A fitted [`KdeModel`] is the mixture `Σ_i w_i N(p_i, H)` whose bandwidth
//! matrix is a scaled weighted covariance of the support points,
//! `H = ρ · η² · Cov_w(points)` under the default [`BandwidthConvention::Squared`].
//! Sampling from it is a smoothed bootstrap: draw a seed index from the weights,
//! then add `N(0, H)` noise to that seed.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative diagonal jitter used when the bandwidth matrix fails Cholesky.
pub const JITTER_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    Silverman,
    Scott,
    /// A fixed factor η. Zero gives a degenerate kernel that returns seeds unchanged.
    Fixed(f64),
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule::Silverman
    }
}

/// How the factor η enters the bandwidth matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthConvention {
    /// `H = η² · Cov`, the usual covariance-scaled Gaussian KDE.
    #[default]
    Squared,
    /// `H = η · Cov`.
    Linear,
}

/// The bandwidth factor η for `m` points in `d` dimensions.
pub fn bandwidth_factor(rule: BandwidthRule, m: usize, d: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("bandwidth needs at least 2 points, got {m}")));
    }
    if d < 1 {
        return Err(Error::InvalidArgument("bandwidth needs dimension >= 1".into()));
    }
    let expo = -1.0 / (d as f64 + 4.0);
    Ok(match rule {
        BandwidthRule::Scott => (m as f64).powf(expo),
        BandwidthRule::Silverman => {
            (4.0 / (d as f64 + 2.0)).powf(1.0 / (d as f64 + 4.0)) * (m as f64).powf(expo)
        }
        BandwidthRule::Fixed(f) => {
            if !(f >= 0.0) || !f.is_finite() {
                return Err(Error::InvalidArgument(format!("fixed bandwidth must be >= 0, got {f}")));
            }
            f
        }
    })
}

/// `Σ_i w_i (p_i − p̄)(p_i − p̄)ᵀ` with `p̄ = Σ_i w_i p_i`. Weights must sum to one.
pub fn weighted_covariance(points: ArrayView2<'_, f64>, weights: ArrayView1<'_, f64>) -> Result<Array2<f64>> {
    let (m, d) = points.dim();
    if weights.len() != m {
        return Err(Error::Shape(format!("{} weights for {m} points", weights.len())));
    }
    let mean = weighted_mean(points, weights);
    let mut cov = Array2::<f64>::zeros((d, d));
    let mut centered = vec![0.0; d];
    for (row, &w) in points.outer_iter().zip(weights.iter()) {
        for k in 0..d {
            centered[k] = row[k] - mean[k];
        }
        for a in 0..d {
            let wa = w * centered[a];
            for b in a..d {
                cov[[a, b]] += wa * centered[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[[a, b]] = cov[[b, a]];
        }
    }
    Ok(cov)
}

pub fn weighted_mean(points: ArrayView2<'_, f64>, weights: ArrayView1<'_, f64>) -> Array1<f64> {
    let mut mean = Array1::<f64>::zeros(points.ncols());
    for (row, &w) in points.outer_iter().zip(weights.iter()) {
        mean.scaled_add(w, &row);
    }
    mean
}

/// Normalise nonnegative weights to sum one.
pub fn normalize_weights(weights: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("weights sum to zero".into()));
    }
    Ok(weights.mapv(|w| w / total))
}

/// A weighted Gaussian mixture with a shared bandwidth matrix.
#[derive(Debug, Clone)]
pub struct KdeModel {
    pub points: Array2<f64>,
    pub weights: Array1<f64>,
    pub bandwidth_cov: Array2<f64>,
    pub chol_lower: Array2<f64>,
    chol_inv: Array2<f64>,
    log_norm: f64,
    degenerate: bool,
    seed_dist: Option<WeightedIndex<f64>>,
}

/// Fit with the default squared-factor convention.
pub fn fit_kde(points: Array2<f64>, weights: ArrayView1<'_, f64>, rule: BandwidthRule, rho: f64) -> Result<KdeModel> {
    fit_kde_with(points, weights, rule, rho, BandwidthConvention::default())
}

pub fn fit_kde_with(
    points: Array2<f64>,
    weights: ArrayView1<'_, f64>,
    rule: BandwidthRule,
    rho: f64,
    convention: BandwidthConvention,
) -> Result<KdeModel> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("noise scale must lie in (0, 1], got {rho}")));
    }
    let (m, d) = points.dim();
    if weights.len() != m {
        return Err(Error::Shape(format!("{} weights for {m} points", weights.len())));
    }
    let weights = normalize_weights(weights)?;
    let eta = bandwidth_factor(rule, m, d)?;
    let factor = match convention {
        BandwidthConvention::Squared => eta * eta,
        BandwidthConvention::Linear => eta,
    } * rho;

    let (bandwidth_cov, chol_lower, degenerate) = if factor == 0.0 {
        let zero = Array2::<f64>::zeros((d, d));
        (zero.clone(), zero, true)
    } else {
        let cov = weighted_covariance(points.view(), weights.view())? * factor;
        let (l, h) = linalg::cholesky_jittered(cov.view(), JITTER_REL).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, value } => Error::Numeric(format!(
                "bandwidth matrix is not positive definite after jitter (pivot {pivot}, value {value:e})"
            )),
            e => e,
        })?;
        (h, l, false)
    };

    let (chol_inv, log_norm) = if degenerate {
        (Array2::zeros((d, d)), f64::NAN)
    } else {
        let mut inv = Array2::<f64>::zeros((d, d));
        for j in 0..d {
            let mut e = Array1::<f64>::zeros(d);
            e[j] = 1.0;
            inv.column_mut(j).assign(&linalg::forward_substitute(chol_lower.view(), e.view()));
        }
        let log_det_sqrt: f64 = chol_lower.diag().iter().map(|v| v.ln()).sum();
        (inv, -0.5 * d as f64 * (2.0 * PI).ln() - log_det_sqrt)
    };
    let seed_dist = Some(
        WeightedIndex::new(weights.iter().copied())
            .map_err(|e| Error::InvalidArgument(format!("invalid seed weights: {e}")))?,
    );
    Ok(KdeModel {
        points,
        weights,
        bandwidth_cov,
        chol_lower,
        chol_inv,
        log_norm,
        degenerate,
        seed_dist,
    })
}

impl KdeModel {
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// True when the bandwidth is exactly zero (samples equal their seeds).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Mixture density `Σ_i w_i φ_H(point − p_i)`.
    pub fn density_at(&self, point: ArrayView1<'_, f64>) -> Result<f64> {
        let d = self.dim();
        if point.len() != d {
            return Err(Error::Shape(format!("point has dimension {}, model {d}", point.len())));
        }
        if self.degenerate {
            return Err(Error::Numeric("density of a zero-bandwidth kernel is undefined".into()));
        }
        let mut diff = vec![0.0; d];
        let mut total = 0.0;
        for (p, &w) in self.points.outer_iter().zip(self.weights.iter()) {
            for k in 0..d {
                diff[k] = point[k] - p[k];
            }
            let mut q = 0.0;
            for r in 0..d {
                let mut v = 0.0;
                for c in 0..=r {
                    v += self.chol_inv[[r, c]] * diff[c];
                }
                q += v * v;
            }
            total += w * (self.log_norm - 0.5 * q).exp();
        }
        Ok(total)
    }

    /// `points[seed_index] + L ε`, ε standard normal.
    pub fn sample_from_seed<R: Rng + ?Sized>(&self, seed_index: usize, rng: &mut R) -> Result<Array1<f64>> {
        if seed_index >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "seed index {seed_index} out of range for {} points",
                self.len()
            )));
        }
        let d = self.dim();
        let eps: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let mut out = self.points.row(seed_index).to_owned();
        for r in 0..d {
            let mut v = 0.0;
            for c in 0..=r {
                v += self.chol_lower[[r, c]] * eps[c];
            }
            out[r] += v;
        }
        Ok(out)
    }

    /// Draw a seed index from the mixture weights.
    pub fn draw_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.seed_dist.as_ref().expect("fitted model has seed weights").sample(rng)
    }

    /// Smoothed bootstrap of `count` rows, returning the seeds alongside.
    pub fn sample_with_seeds<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> (Array2<f64>, Vec<usize>) {
        let mut out = Array2::<f64>::zeros((count, self.dim()));
        let mut seeds = Vec::with_capacity(count);
        for mut row in out.axis_iter_mut(Axis(0)) {
            let s = self.draw_seed(rng);
            row.assign(&self.sample_from_seed(s, rng).expect("drawn seed is in range"));
            seeds.push(s);
        }
        (out, seeds)
    }

    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Array2<f64> {
        self.sample_with_seeds(count, rng).0
    }
}
