//! Density-balanced β-VAE for imbalanced regression, with smoothed-bootstrap
//! generation of rare observations in the latent space.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`]: tabular datasets, CSV ingestion, min-max scaling, splits and a
//!   synthetic benchmark simulator.
//! * [`kde`]: weighted Gaussian kernel density estimation and smoothed-bootstrap
//!   sampling.
//! * [`weights`]: inverse-density relevance weights over the target.
//! * [`nn`]: the small dense-network substrate (Tanh MLPs, Adam, gradient checks).
//! * [`vae`]: the regression β-VAE and its density-balanced loss.
//! * [`generators`]: the augmentation generators, including [`generators::david_generate`].
//! * [`eval`]: downstream regressors, metrics and the benchmark runner.
//! * [`cli`]: configuration files and the command-line entry points.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod generators;
pub mod kde;
pub mod linalg;
pub mod nn;
pub mod seed;
pub mod vae;
pub mod weights;

pub use error::{Error, Result};
