//! Inverse-density relevance weights over a continuous target.
//!
//! `raw_i = f̂(y_i)^(−α)` where `f̂` is a univariate Gaussian KDE of the
//! targets. The same weights drive loss weighting, seed drawing and the
//! weighted MSE metric.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::kde::{fit_kde, BandwidthRule, KdeModel};

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceWeights {
    pub raw: Array1<f64>,
    pub normalized: Array1<f64>,
    pub alpha: f64,
    pub bandwidth_rule: BandwidthRule,
}

/// Univariate target density with uniform weights and unit noise scale.
pub fn target_density(y: ArrayView1<'_, f64>, rule: BandwidthRule) -> Result<KdeModel> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 targets, got {n}")));
    }
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Data("target is constant; its density cannot be estimated".into()));
    }
    let points = Array2::from_shape_vec((n, 1), y.to_vec()).expect("n x 1");
    let uniform = Array1::from_elem(n, 1.0 / n as f64);
    fit_kde(points, uniform.view(), rule, 1.0)
}

pub fn relevance_weights(y: ArrayView1<'_, f64>, alpha: f64, rule: BandwidthRule) -> Result<RelevanceWeights> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let kde = target_density(y, rule)?;
    let density = y
        .iter()
        .map(|&v| kde.density_at(ndarray::aview1(&[v])))
        .collect::<Result<Array1<f64>>>()?;
    from_density(density.view(), alpha, rule)
}

/// Weights from already-evaluated densities `f̂(y_i)`.
pub fn from_density(density: ArrayView1<'_, f64>, alpha: f64, rule: BandwidthRule) -> Result<RelevanceWeights> {
    assert!(
        density.iter().all(|&f| f > 0.0 && f.is_finite()),
        "Gaussian kernel densities are strictly positive"
    );
    let raw = if alpha == 0.0 {
        Array1::ones(density.len())
    } else {
        density.mapv(|f| f.powf(-alpha))
    };
    if raw.iter().any(|r| !r.is_finite()) {
        return Err(Error::Numeric(format!("relevance weights overflow at alpha = {alpha}")));
    }
    let total: f64 = raw.sum();
    let normalized = raw.mapv(|r| r / total);
    Ok(RelevanceWeights {
        raw,
        normalized,
        alpha,
        bandwidth_rule: rule,
    })
}

/// Raw weights rescaled to mean one.
pub fn loss_weights(rw: &RelevanceWeights) -> Array1<f64> {
    let mean = rw.raw.sum() / rw.raw.len() as f64;
    rw.raw.mapv(|r| r / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn alpha_zero_is_uniform() {
        let y = array![1.0, 2.0, 2.5, 10.0];
        let w = relevance_weights(y.view(), 0.0, BandwidthRule::Silverman).unwrap();
        assert!(w.normalized.iter().all(|&v| v == 0.25));
        assert!(loss_weights(&w).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn inverse_proportionality() {
        let w = from_density(array![0.2, 0.1].view(), 1.0, BandwidthRule::Scott).unwrap();
        assert_abs_diff_eq!(w.normalized[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.normalized[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn isolated_point_gets_larger_weight() {
        let y = array![0.0, 0.0, 0.0, 10.0];
        let w = relevance_weights(y.view(), 1.0, BandwidthRule::Silverman).unwrap();
        // direct evaluation: mixture of N(y_j, h²·var(y)) at 0 and at 10
        let var = 18.75;
        let h2 = (4.0f64 / 3.0).powf(2.0 / 5.0) * 4f64.powf(-2.0 / 5.0) * var;
        let phi = |t: f64| (-t * t / (2.0 * h2)).exp() / (2.0 * std::f64::consts::PI * h2).sqrt();
        let f0 = 0.75 * phi(0.0) + 0.25 * phi(10.0);
        let f10 = 0.75 * phi(10.0) + 0.25 * phi(0.0);
        assert_relative_eq!(w.raw[0], 1.0 / f0, max_relative = 1e-12);
        assert_relative_eq!(w.raw[3], 1.0 / f10, max_relative = 1e-12);
        assert!(w.normalized[3] > w.normalized[0]);
    }

    #[test]
    fn constant_target_rejected() {
        assert!(relevance_weights(array![3.0, 3.0, 3.0].view(), 1.0, BandwidthRule::Silverman).is_err());
        assert!(relevance_weights(array![3.0].view(), 1.0, BandwidthRule::Silverman).is_err());
        assert!(relevance_weights(array![1.0, 3.0].view(), -1.0, BandwidthRule::Silverman).is_err());
    }

    #[test]
    fn equally_spaced_interior_weights_are_flat() {
        let y = Array1::from_shape_fn(401, |i| i as f64 * 0.25);
        let w = relevance_weights(y.view(), 1.0, BandwidthRule::Silverman).unwrap();
        let interior = w.raw.slice(ndarray::s![80..321]);
        let lo = interior.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = interior.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi / lo < 1.05, "spread {}", hi / lo);
    }

    proptest! {
        #[test]
        fn weight_laws(y in prop::collection::vec(-50.0f64..50.0, 3..40)) {
            let y = Array1::from(y);
            let Ok(w1) = relevance_weights(y.view(), 1.0, BandwidthRule::Silverman) else {
                return Ok(());
            };
            let w2 = relevance_weights(y.view(), 2.0, BandwidthRule::Silverman).unwrap();
            for (a, b) in w2.raw.iter().zip(w1.raw.iter()) {
                prop_assert!(((a - b * b) / a).abs() < 1e-10);
            }
            prop_assert!((w1.normalized.sum() - 1.0).abs() < 1e-12);
            let lw = loss_weights(&w1);
            prop_assert!((lw.mean().unwrap() - 1.0).abs() < 1e-12);
            for i in 0..y.len() {
                for j in 0..y.len() {
                    if w1.raw[i] < w1.raw[j] {
                        prop_assert!(lw[i] < lw[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn strictly_monotone_in_density() {
        let y = array![0.0, 0.1, 0.3, 5.0];
        let kde = target_density(y.view(), BandwidthRule::Silverman).unwrap();
        let w = relevance_weights(y.view(), 1.0, BandwidthRule::Silverman).unwrap();
        let f: Vec<f64> = y.iter().map(|&v| kde.density_at(ndarray::aview1(&[v])).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                if f[i] < f[j] {
                    assert!(w.normalized[i] > w.normalized[j]);
                }
            }
        }
    }
}
