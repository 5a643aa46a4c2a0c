//! Counts to continuous responses to latent responses, and back to integer
//! quantile predictions.

use crate::distributions::{sample_uniform01, RngStream};
use crate::error::{Error, Result};
use crate::model::{dot, PanelDataset};
use crate::scalar::Scalar;

/// Latent responses of one jitter pass, shaped like the dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct JitteredLatent<T> {
    pub z: Vec<Vec<T>>,
    /// Replicate index `h` (1-based).
    pub jitter_index: usize,
}

/// `y* = y + u` with fresh `u ~ U[0, 1)` for every count.
pub fn jitter_counts<T: Scalar>(y: &[i64], rng: &mut RngStream) -> Vec<T> {
    y.iter()
        .map(|&count| T::of(count as f64) + sample_uniform01::<T>(rng))
        .collect()
}

/// `z = ln(y* - p)` for `y* > p`, otherwise `ln ζ`.
#[inline]
pub fn latent_transform<T: Scalar>(y_star: T, p: T, zeta: T) -> T {
    if y_star > p {
        (y_star - p).ln()
    } else {
        zeta.ln()
    }
}

/// One full jitter pass over the dataset.
pub fn jitter_latent<T: Scalar>(
    data: &PanelDataset<T>,
    p: T,
    zeta: T,
    rng: &mut RngStream,
) -> Vec<Vec<T>> {
    let floor = zeta.ln();
    data.subjects
        .iter()
        .map(|block| {
            block
                .y
                .iter()
                .map(|&count| {
                    let y_star = T::of(count as f64) + sample_uniform01::<T>(rng);
                    if y_star > p {
                        (y_star - p).ln()
                    } else {
                        floor
                    }
                })
                .collect()
        })
        .collect()
}

/// `⌈p + exp(x'β + s'α) - 1⌉`, clamped below at zero.
pub fn predict_count_quantile<T: Scalar>(
    beta: &[T],
    alpha_i: &[T],
    x: &[T],
    s: &[T],
    p: T,
) -> Result<u64> {
    if beta.len() != x.len() || alpha_i.len() != s.len() {
        return Err(Error::param(format!(
            "covariate lengths ({}, {}) do not match coefficients ({}, {})",
            x.len(),
            s.len(),
            beta.len(),
            alpha_i.len()
        )));
    }
    predict_from_linear_predictor(dot(x, beta) + dot(s, alpha_i), p)
}

pub fn predict_from_linear_predictor<T: Scalar>(eta: T, p: T) -> Result<u64> {
    let eta = eta.as_f64();
    let p = p.as_f64();
    let mu = eta.exp();
    let q = (p + mu - 1.0).ceil();
    if !mu.is_finite() || q >= u64::MAX as f64 {
        return Err(Error::Overflow {
            linear_predictor: eta,
        });
    }
    Ok(q.max(0.0) as u64)
}
