//! Bayesian quantile regression for longitudinal (panel) count data.
//!
//! Counts are jittered with uniform noise and mapped to a continuous latent
//! response `z = ln(y + u - p)` (floored at `ln ζ`). The latent response is
//! modelled with an asymmetric Laplace working likelihood, written as a
//! normal-exponential mixture so that every full conditional is a standard
//! family. Fixed effects carry a Bayesian-lasso prior, random effects a
//! Gaussian prior. Estimates are averaged over `M` independently jittered
//! chains.
//!
//! The numerical core is generic over the floating-point type through
//! [`Scalar`]; the `*64` aliases at the crate root fix it to `f64`, which is
//! what the command-line driver uses.

pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod gibbs;
pub mod jitter;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod simgen;

pub use distributions::{RngStream, StreamKey, StreamPhase};
pub use error::{Error, Result};
pub use estimator::{FitOptions, JitterFit, PosteriorSummary};
pub use gibbs::{ChainOutput, GibbsConfig, SigmaRule};
pub use model::{
    ChainState, MixtureConstants, PanelDataset, PriorConfig, QuantileSpec, SubjectBlock,
};
pub use scalar::Scalar;

pub type PanelDataset64 = model::PanelDataset<f64>;
pub type SubjectBlock64 = model::SubjectBlock<f64>;
pub type ChainState64 = model::ChainState<f64>;
pub type PriorConfig64 = model::PriorConfig<f64>;
pub type QuantileSpec64 = model::QuantileSpec<f64>;
pub type ChainOutput64 = gibbs::ChainOutput<f64>;
pub type PosteriorSummary64 = estimator::PosteriorSummary<f64>;
pub type JitterFit64 = estimator::JitterFit<f64>;
pub type ModelComparison64 = diagnostics::ModelComparison<f64>;

pub type PanelDataset32 = model::PanelDataset<f32>;
pub type ChainState32 = model::ChainState<f32>;
