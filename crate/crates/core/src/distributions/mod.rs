//! Seeded random variates and log-densities for every family the sampler
//! touches.
//!
//! All parameters are in the `Scalar` type of the caller; draws are produced
//! in `f64` by `rand_distr` (or by hand for GIG and the precision-form
//! Gaussian) and narrowed afterwards.

mod gig;
mod mvn;

pub use gig::{sample_gig_half, GigHalfParams};
pub use mvn::sample_gaussian_from_precision;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{check_loss, check_quantile};
use crate::scalar::Scalar;

/// What a stream is used for inside one replicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamPhase {
    /// The Gibbs sweeps of one chain.
    Chain = 0,
    /// The single post-hoc jitter used for plug-in deviances.
    Refresh = 1,
    /// Data generation.
    Simulation = 2,
}

/// Coordinates of an independent substream under one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    /// Identifies the quantile level; see [`StreamKey::quantile_slot`].
    pub slot: u64,
    /// Jitter replicate index `h`.
    pub replicate: u64,
    pub phase: StreamPhase,
}

impl StreamKey {
    pub fn new(master_seed: u64, slot: u64, replicate: u64, phase: StreamPhase) -> Self {
        Self {
            master_seed,
            slot,
            replicate,
            phase,
        }
    }

    /// Slot derived from the quantile level itself, so that the stream a
    /// fit uses does not depend on the order quantiles were requested in.
    pub fn quantile_slot<T: Scalar>(p: T) -> u64 {
        (p.as_f64() * 1e6).round() as u64
    }

    pub fn with_phase(self, phase: StreamPhase) -> Self {
        Self { phase, ..self }
    }

    /// 64-bit ChaCha stream id: `slot << 24 | replicate << 4 | phase`.
    pub fn stream_id(&self) -> u64 {
        debug_assert!(self.replicate < (1 << 20));
        (self.slot << 24) | ((self.replicate & 0xF_FFFF) << 4) | self.phase as u64
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(self.master_seed, self.stream_id())
    }
}

/// A single-owner ChaCha8 stream addressed by `(seed, stream_id)`.
///
/// Distinct stream ids under one seed select non-overlapping ChaCha
/// streams, so replicates never share state.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn sample_uniform01<T: Scalar>(rng: &mut RngStream) -> T {
    T::of(rng.random::<f64>())
}

#[inline]
pub fn sample_standard_normal<T: Scalar>(rng: &mut RngStream) -> T {
    T::of(StandardNormal.sample(rng))
}

/// Exponential with the given rate.
pub fn sample_exponential<T: Scalar>(rate: T, rng: &mut RngStream) -> Result<T> {
    if !(rate > T::zero()) || !rate.is_finite() {
        return Err(Error::param(format!("exponential rate {rate} must be positive")));
    }
    let e: f64 = Exp1.sample(rng);
    Ok(T::of(e / rate.as_f64()))
}

/// Gamma with density `∝ x^(shape-1) exp(-rate x)`.
pub fn sample_gamma<T: Scalar>(shape: T, rate: T, rng: &mut RngStream) -> Result<T> {
    let (shape, rate) = (shape.as_f64(), rate.as_f64());
    if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
        return Err(Error::param(format!(
            "gamma(shape {shape}, rate {rate}) needs positive finite parameters"
        )));
    }
    let gamma = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::param(format!("gamma(shape {shape}, rate {rate}): {e}")))?;
    Ok(T::of(gamma.sample(rng)))
}

/// Inverse gamma with density `∝ x^(-shape-1) exp(-scale / x)`.
pub fn sample_inverse_gamma<T: Scalar>(shape: T, scale: T, rng: &mut RngStream) -> Result<T> {
    if !(shape > T::zero() && scale > T::zero()) {
        return Err(Error::param(format!(
            "inverse gamma(shape {shape}, scale {scale}) needs positive parameters"
        )));
    }
    let g: T = sample_gamma(shape, scale, rng)?;
    Ok(T::one() / g)
}

/// Poisson count with the given mean.
pub fn sample_poisson(mean: f64, rng: &mut RngStream) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::param(format!("poisson({mean}): {e}")))?;
    let draw: f64 = dist.sample(rng);
    Ok(draw as u64)
}

/// Log-density of `ALD(μ, σ, p)`:
/// `ln(p(1-p)/σ) - ρ_p((y-μ)/σ)`.
pub fn ald_logpdf<T: Scalar>(y: T, mu: T, sigma: T, p: T) -> Result<T> {
    check_quantile(p)?;
    if !(sigma > T::zero()) {
        return Err(Error::param(format!("ALD scale {sigma} must be positive")));
    }
    Ok(ald_logpdf_unchecked(y, mu, sigma, p))
}

#[inline]
pub(crate) fn ald_logpdf_unchecked<T: Scalar>(y: T, mu: T, sigma: T, p: T) -> T {
    (p * (T::one() - p) / sigma).ln() - check_loss((y - mu) / sigma, p)
}
