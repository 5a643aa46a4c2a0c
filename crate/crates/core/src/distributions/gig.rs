use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{sample_gamma, sample_standard_normal, sample_uniform01, RngStream};

/// Generalized inverse Gaussian with index 1/2: density kernel
/// `x^(-1/2) exp(-(rho1 / x + rho2 x) / 2)` on `x > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GigHalfParams<T> {
    /// Coefficient of `1/x`.
    pub rho1: T,
    /// Coefficient of `x`.
    pub rho2: T,
}

impl<T: Scalar> GigHalfParams<T> {
    pub fn new(rho1: T, rho2: T) -> Self {
        Self { rho1, rho2 }
    }

    /// `E[X] = √(rho1/rho2) + 1/rho2`.
    pub fn mean(&self) -> T {
        (self.rho1 / self.rho2).sqrt() + T::one() / self.rho2
    }
}

/// Draws `X ~ GIG(1/2, rho1, rho2)`.
///
/// `1/X` is inverse Gaussian with mean `√(rho2/rho1)` and shape `rho2`,
/// sampled with the Michael-Schucany-Haas transformation. The smaller root
/// of the transformation is evaluated in its cancellation-free form so that
/// tiny `rho1` (near-zero residuals, near-zero coefficients) stays accurate.
/// `rho1 = 0` is the `Gamma(1/2, rate rho2/2)` limit and is sampled directly.
pub fn sample_gig_half<T: Scalar>(params: GigHalfParams<T>, rng: &mut RngStream) -> Result<T> {
    let rho1 = params.rho1.as_f64();
    let rho2 = params.rho2.as_f64();
    if !(rho2 > 0.0) || !rho2.is_finite() {
        return Err(Error::param(format!("GIG rho2 = {rho2} must be positive")));
    }
    if !(rho1 >= 0.0) || !rho1.is_finite() {
        return Err(Error::param(format!("GIG rho1 = {rho1} must be non-negative")));
    }
    let mu = (rho2 / rho1).sqrt();
    if rho1 == 0.0 || !mu.is_finite() {
        return sample_gamma(T::of(0.5), T::of(rho2 / 2.0), rng);
    }
    let n: f64 = sample_standard_normal(rng);
    let t = mu * n * n / (2.0 * rho2);
    let denom = 1.0 + t + (t * (t + 2.0)).sqrt();
    // smaller root of the MSH quadratic is mu / denom
    let u: f64 = sample_uniform01(rng);
    let x = if u * (1.0 + 1.0 / denom) <= 1.0 {
        denom / mu
    } else {
        1.0 / (mu * denom)
    };
    Ok(T::of(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(rho1: f64, rho2: f64, n: usize, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 0);
        let p = GigHalfParams::new(rho1, rho2);
        (0..n)
            .map(|_| sample_gig_half::<f64>(p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn closed_form_means() {
        assert!((GigHalfParams::new(1.0, 1.0).mean() - 2.0f64).abs() < 1e-15);
        assert!((GigHalfParams::new(4.0, 1.0).mean() - 3.0f64).abs() < 1e-15);
        assert!((GigHalfParams::new(1.0, 4.0).mean() - 0.75f64).abs() < 1e-15);
    }

    #[test]
    fn sample_means_match() {
        for (r1, r2, want) in [(1.0, 1.0, 2.0), (4.0, 1.0, 3.0), (1.0, 4.0, 0.75)] {
            let m = mean_of(r1, r2, 1_000_000, 11);
            assert!((m / want - 1.0).abs() < 0.01, "({r1},{r2}) mean {m}");
        }
    }

    #[test]
    fn degenerate_rho1_is_gamma_half() {
        // Gamma(1/2, rate 2/2) has mean 0.5
        let m = mean_of(0.0, 2.0, 400_000, 3);
        assert!((m - 0.5).abs() < 0.01, "{m}");
    }

    #[test]
    fn tiny_rho1_stays_finite_and_positive() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..10_000 {
            let x: f64 = sample_gig_half(GigHalfParams::new(1e-290, 3.0), &mut rng).unwrap();
            assert!(x > 0.0 && x.is_finite());
        }
    }

    #[test]
    fn invalid_rho2() {
        let mut rng = RngStream::new(5, 0);
        assert!(sample_gig_half(GigHalfParams::new(1.0f64, 0.0), &mut rng).is_err());
        assert!(sample_gig_half(GigHalfParams::new(-1.0f64, 1.0), &mut rng).is_err());
    }
}
