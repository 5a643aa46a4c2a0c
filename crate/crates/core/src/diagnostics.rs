//! Model comparison (plug-in NLL and DIC) and plot-ready exports.

use crate::distributions::{ald_logpdf_unchecked, RngStream};
use crate::error::{Error, Result};
use crate::estimator::quantile_sorted;
use crate::gibbs::{deviance, ChainOutput};
use crate::jitter::jitter_latent;
use crate::model::{ChainState, PanelDataset};
use crate::scalar::Scalar;

/// Deviance-based comparison of one fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelComparison<T> {
    pub quantile: T,
    /// Negative AL log-likelihood at the posterior means.
    pub nll: T,
    pub dic: T,
    /// `D̄ - D(θ̄)`; may be negative.
    pub p_d: T,
    /// Mean recorded deviance `D̄`.
    pub mean_deviance: T,
    /// `D(θ̄)`.
    pub deviance_at_mean: T,
}

impl<T: Scalar> ModelComparison<T> {
    /// `DIC = D(θ̄) + 2 p_D` with `p_D = D̄ - D(θ̄)`.
    pub fn from_deviances(quantile: T, mean_deviance: T, deviance_at_mean: T) -> Self {
        let p_d = mean_deviance - deviance_at_mean;
        Self {
            quantile,
            nll: deviance_at_mean / (T::one() + T::one()),
            dic: deviance_at_mean + (T::one() + T::one()) * p_d,
            p_d,
            mean_deviance,
            deviance_at_mean,
        }
    }
}

/// `-Σ ln ALD(z_ij | x'β + s'α_i, σ, p)` for a single parameter state.
pub fn plugin_nll<T: Scalar>(state: &ChainState<T>, data: &PanelDataset<T>, z: &[Vec<T>], p: T) -> T {
    let mut nll = T::zero();
    for (i, block) in data.subjects.iter().enumerate() {
        for j in 0..block.len() {
            let mu = state.linear_predictor(data, i, j);
            nll = nll - ald_logpdf_unchecked(z[i][j], mu, state.sigma, p);
        }
    }
    nll
}

/// DIC of one chain. `D(θ̄)` uses the posterior means and one fresh jitter
/// drawn from `refresh`; `D̄` averages the recorded per-sweep deviances.
pub fn compute_dic<T: Scalar>(
    output: &ChainOutput<T>,
    data: &PanelDataset<T>,
    p: T,
    zeta: T,
    refresh: &mut RngStream,
) -> Result<ModelComparison<T>> {
    if output.deviances.is_empty() {
        return Err(Error::param("chain has no recorded deviances"));
    }
    let mean = output.posterior_mean().expect("non-empty chain");
    let z = jitter_latent(data, p, zeta, refresh);
    let d_hat = deviance(&mean, data, &z, p);
    let d_bar =
        output.deviances.iter().copied().sum::<T>() / T::of(output.deviances.len() as f64);
    Ok(ModelComparison::from_deviances(p, d_bar, d_hat))
}

/// Plug-in NLL averaged over replicates; `refresh(h)` supplies the single
/// jitter stream of replicate `h`.
pub fn compute_nll<T: Scalar>(
    outputs: &[ChainOutput<T>],
    data: &PanelDataset<T>,
    p: T,
    zeta: T,
    mut refresh: impl FnMut(usize) -> RngStream,
) -> Result<T> {
    if outputs.is_empty() {
        return Err(Error::param("no chains"));
    }
    let mut total = T::zero();
    for out in outputs {
        let mean = out
            .posterior_mean()
            .ok_or_else(|| Error::param("chain has no draws"))?;
        let mut rng = refresh(out.jitter_index);
        let z = jitter_latent(data, p, zeta, &mut rng);
        total = total + plugin_nll(&mean, data, &z, p);
    }
    Ok(total / T::of(outputs.len() as f64))
}

/// A parameter addressable in a trace export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coefficient {
    /// 1-based fixed-effect index.
    Beta(usize),
    Sigma,
    Phi2,
    Lambda2,
    /// 1-based index into `g²`.
    G2(usize),
    /// 1-based subject and random-effect indices.
    Alpha(usize, usize),
}

impl Coefficient {
    /// Parses `beta[2]`, `beta2`, `sigma`, `phi2`, `lambda2`, `g2[1]`,
    /// `alpha[3]` or `alpha[3,2]`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        let lookup = || Error::Lookup(name.to_string());
        let (head, args) = match name.find('[') {
            Some(open) => {
                let inner = name[open..]
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(lookup)?;
                let args: Vec<usize> = inner
                    .split(',')
                    .map(|a| a.trim().parse::<usize>().map_err(|_| lookup()))
                    .collect::<Result<_>>()?;
                (&name[..open], args)
            }
            None => match name {
                "sigma" | "phi2" | "lambda2" => (name, Vec::new()),
                _ => {
                    let split = name
                        .find(|c: char| c.is_ascii_digit())
                        .ok_or_else(lookup)?;
                    let idx = name[split..].parse::<usize>().map_err(|_| lookup())?;
                    (&name[..split], vec![idx])
                }
            },
        };
        if args.contains(&0) {
            return Err(lookup());
        }
        match (head, args.as_slice()) {
            ("beta", [h]) => Ok(Coefficient::Beta(*h)),
            ("g2", [h]) => Ok(Coefficient::G2(*h)),
            ("alpha", [i]) => Ok(Coefficient::Alpha(*i, 1)),
            ("alpha", [i, j]) => Ok(Coefficient::Alpha(*i, *j)),
            ("sigma", []) => Ok(Coefficient::Sigma),
            ("phi2", []) => Ok(Coefficient::Phi2),
            ("lambda2", []) => Ok(Coefficient::Lambda2),
            _ => Err(lookup()),
        }
    }

    /// File-name friendly label, e.g. `beta1`, `alpha3_2`.
    pub fn label(&self) -> String {
        match self {
            Coefficient::Beta(h) => format!("beta{h}"),
            Coefficient::Sigma => "sigma".into(),
            Coefficient::Phi2 => "phi2".into(),
            Coefficient::Lambda2 => "lambda2".into(),
            Coefficient::G2(h) => format!("g2_{h}"),
            Coefficient::Alpha(i, j) => format!("alpha{i}_{j}"),
        }
    }

    fn get<T: Scalar>(&self, state: &ChainState<T>) -> Option<T> {
        match *self {
            Coefficient::Beta(h) => state.beta.get(h - 1).copied(),
            Coefficient::Sigma => Some(state.sigma),
            Coefficient::Phi2 => Some(state.phi2),
            Coefficient::Lambda2 => Some(state.lambda2),
            Coefficient::G2(h) => state.g2.get(h - 1).copied(),
            Coefficient::Alpha(i, j) => state.alpha.get(i - 1).and_then(|a| a.get(j - 1)).copied(),
        }
    }
}

/// Parameter values of the selected coefficient.
pub fn coefficient_series<T: Scalar>(output: &ChainOutput<T>, selector: &str) -> Result<Vec<T>> {
    let coef = Coefficient::parse(selector)?;
    output
        .draws
        .iter()
        .map(|d| coef.get(d).ok_or_else(|| Error::Lookup(selector.to_string())))
        .collect()
}

/// `(iteration, value)` rows of the selected coefficient, in sweep order.
pub fn export_trace<T: Scalar>(output: &ChainOutput<T>, selector: &str) -> Result<Vec<(usize, T)>> {
    if output.is_empty() {
        return Err(Error::param("chain has no recorded draws"));
    }
    let values = coefficient_series(output, selector)?;
    Ok(output.iterations.iter().copied().zip(values).collect())
}

/// Silverman's rule `0.9 min(sd, IQR/1.34) n^(-1/5)`, falling back to the
/// standard deviation when the IQR is zero.
pub fn silverman_bandwidth<T: Scalar>(values: &[T]) -> Result<T> {
    if values.len() < 2 {
        return Err(Error::param("bandwidth needs at least two values"));
    }
    let n = values.len() as f64;
    let xs: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::param("all values are equal; density is degenerate"));
    }
    let mut sorted = xs;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(T::of(0.9 * spread * n.powf(-0.2)))
}

/// Gaussian-kernel density on `grid_size` equispaced points spanning the
/// data range widened by three bandwidths on each side.
pub fn kde_density<T: Scalar>(values: &[T], grid_size: usize) -> Result<Vec<(T, T)>> {
    if grid_size < 2 {
        return Err(Error::param("grid needs at least two points"));
    }
    let h = silverman_bandwidth(values)?.as_f64();
    let xs: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let norm = 1.0 / (xs.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok((0..grid_size)
        .map(|g| {
            let x = lo + g as f64 * step;
            let d: f64 = xs
                .iter()
                .map(|&xi| {
                    let u = (x - xi) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm;
            (T::of(x), T::of(d))
        })
        .collect())
}

/// Lag-1 autocorrelation of a trace.
pub fn lag1_autocorrelation<T: Scalar>(values: &[T]) -> Option<T> {
    if values.len() < 3 {
        return None;
    }
    let n = T::of(values.len() as f64);
    let mean = values.iter().copied().sum::<T>() / n;
    let denom: T = values.iter().map(|&x| (x - mean) * (x - mean)).sum();
    if denom == T::zero() {
        return None;
    }
    let num: T = values
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum();
    Some(num / denom)
}
