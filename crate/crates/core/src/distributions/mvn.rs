use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::Scalar;

use super::{sample_standard_normal, RngStream};

/// Draws from `N(P⁻¹ c, P⁻¹)` given the precision `P` and linear term `c`.
///
/// One Cholesky factorization `P = L Lᵀ`; the mean solves `L Lᵀ m = c` and
/// the noise solves `Lᵀ e = ε` with `ε ~ N(0, I)`, so `Cov(e) = P⁻¹`.
pub fn sample_gaussian_from_precision<T: Scalar>(
    precision: &SquareMatrix<T>,
    linear_term: &[T],
    rng: &mut RngStream,
) -> Result<Vec<T>> {
    if linear_term.len() != precision.dim() {
        return Err(Error::param(format!(
            "linear term has length {} but precision is {}x{}",
            linear_term.len(),
            precision.dim(),
            precision.dim()
        )));
    }
    let chol = precision.cholesky()?;
    let mean = chol.solve(linear_term);
    let eps: Vec<T> = (0..precision.dim())
        .map(|_| sample_standard_normal(rng))
        .collect();
    let noise = chol.solve_upper(&eps);
    Ok(mean.into_iter().zip(noise).map(|(m, e)| m + e).collect())
}
