//! Jitter-averaged estimation: `M` chains on independently jittered data,
//! averaged posterior means, pooled variances and averaged credible
//! intervals.

use rayon::prelude::*;

use crate::diagnostics::{compute_dic, ModelComparison};
use crate::distributions::{RngStream, StreamKey, StreamPhase};
use crate::error::{Error, Result};
use crate::gibbs::{run_chain, ChainOutput, GibbsConfig};
use crate::model::{PanelDataset, PriorConfig, QuantileSpec};
use crate::scalar::Scalar;

/// Pooled variance of a jitter-averaged estimate:
/// `(1 - 1/r) W + B/r` with `W` the mean within-replicate variance and
/// `B = r/(M-1) Σ (m_h - m̄)²`.
pub fn pooled_variance<T: Scalar>(means: &[T], vars: &[T], r: usize) -> Result<T> {
    let m = means.len();
    if m < 2 {
        return Err(Error::param(format!(
            "pooled variance needs at least 2 replicates, got {m}"
        )));
    }
    if vars.len() != m {
        return Err(Error::param(format!(
            "{m} replicate means but {} variances",
            vars.len()
        )));
    }
    if r == 0 {
        return Err(Error::param("retained draw count must be positive"));
    }
    if vars.iter().any(|&v| v < T::zero()) {
        return Err(Error::param("replicate variances must be non-negative"));
    }
    let mf = T::of(m as f64);
    let rf = T::of(r as f64);
    let grand = means.iter().copied().sum::<T>() / mf;
    let within = vars.iter().copied().sum::<T>() / mf;
    let ss: T = means.iter().map(|&x| (x - grand) * (x - grand)).sum();
    let between = rf / (mf - T::one()) * ss;
    Ok((T::one() - T::one() / rf) * within + between / rf)
}

/// Linearly interpolated empirical quantile of sorted data (the
/// `(n - 1) q` order-statistic convention).
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::of(pos - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Equal-tailed interval at `(1-level)/2` and `1-(1-level)/2`.
pub fn credible_interval<T: Scalar>(draws: &[T], level: f64) -> Result<(T, T)> {
    if draws.len() < 10 {
        return Err(Error::param(format!(
            "credible interval needs at least 10 draws, got {}",
            draws.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("level {level} outside (0, 1)")));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("draws are finite"));
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&sorted, tail), quantile_sorted(&sorted, 1.0 - tail)))
}

fn mean_var<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::of(xs.len() as f64);
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - T::one()))
}

/// Settings that are not part of [`QuantileSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Thinning, latent recording and the `σ` rule. Its `iterations` and
    /// `burn_in` are overridden by the quantile spec.
    pub gibbs: GibbsConfig,
    /// Credible level, 0.95 by default.
    pub level: f64,
    /// Upper bound on concurrently running chains.
    pub threads: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            gibbs: GibbsConfig::default(),
            level: 0.95,
            threads: 1,
        }
    }
}

/// Jitter-averaged summary of one scalar parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSummary<T> {
    pub name: String,
    pub avg_post_mean: T,
    pub pooled_sd: T,
    pub avg_ci_low: T,
    pub avg_ci_high: T,
    /// Per-replicate posterior means, ordered by replicate.
    pub replicate_means: Vec<T>,
    /// Per-replicate interval widths, ordered by replicate.
    pub replicate_ci_widths: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary<T> {
    pub p: T,
    pub m_jitter: usize,
    /// Retained draws per replicate (`r`).
    pub retained: usize,
    pub level: f64,
    /// `β_1 .. β_k`.
    pub coefficients: Vec<CoefficientSummary<T>>,
    /// `σ`, `φ²`, `λ²`.
    pub hyperparameters: Vec<CoefficientSummary<T>>,
    /// Replicate-averaged posterior mean of each subject's `α_i`.
    pub alpha_means: Vec<Vec<T>>,
    pub avg_nll: T,
    pub avg_dic: T,
    pub avg_p_d: T,
}

/// Everything one jitter-averaged fit produces.
#[derive(Clone, Debug)]
pub struct JitterFit<T> {
    pub summary: PosteriorSummary<T>,
    /// Chains ordered by replicate index `h = 1..M`.
    pub chains: Vec<ChainOutput<T>>,
    /// Per-replicate DIC and plug-in NLL, same order as `chains`.
    pub comparisons: Vec<ModelComparison<T>>,
}

/// Runs `M` chains with streams derived from `(master_seed, p, h)` and
/// aggregates them.
pub fn average_jitter_fit<T: Scalar>(
    data: &PanelDataset<T>,
    spec: &QuantileSpec<T>,
    priors: &PriorConfig<T>,
    options: &FitOptions,
) -> Result<JitterFit<T>> {
    let slot = StreamKey::quantile_slot(spec.p);
    let seed = spec.master_seed;
    average_jitter_fit_with_streams(data, spec, priors, options, |h| {
        let key = StreamKey::new(seed, slot, h as u64, StreamPhase::Chain);
        (key.stream(), key.with_phase(StreamPhase::Refresh).stream())
    })
}

/// As [`average_jitter_fit`], with caller-chosen `(chain, refresh)` streams
/// for replicate `h`.
pub fn average_jitter_fit_with_streams<T, F>(
    data: &PanelDataset<T>,
    spec: &QuantileSpec<T>,
    priors: &PriorConfig<T>,
    options: &FitOptions,
    streams: F,
) -> Result<JitterFit<T>>
where
    T: Scalar,
    F: Fn(usize) -> (RngStream, RngStream) + Sync,
{
    spec.validate()?;
    let config = GibbsConfig {
        iterations: spec.iterations,
        burn_in: spec.burn_in,
        ..options.gibbs
    };
    config.validate()?;
    if config.retained() < 10 {
        return Err(Error::param(format!(
            "only {} retained draws; credible intervals need at least 10",
            config.retained()
        )));
    }

    let run_one = |h: usize| -> Result<(ChainOutput<T>, ModelComparison<T>)> {
        let (chain_rng, mut refresh_rng) = streams(h);
        let out = run_chain(data, spec.p, spec.zeta, priors, &config, h, chain_rng)?;
        let cmp = compute_dic(&out, data, spec.p, spec.zeta, &mut refresh_rng)?;
        Ok((out, cmp))
    };
    let wrap = |h: usize, r: Result<_>| {
        r.map_err(|e| Error::Replicate {
            replicate: h,
            source: Box::new(e),
        })
    };

    let results: Vec<Result<(ChainOutput<T>, ModelComparison<T>)>> = if options.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            (1..=spec.m_jitter)
                .into_par_iter()
                .map(|h| wrap(h, run_one(h)))
                .collect()
        })
    } else {
        (1..=spec.m_jitter).map(|h| wrap(h, run_one(h))).collect()
    };

    let mut chains = Vec::with_capacity(spec.m_jitter);
    let mut comparisons = Vec::with_capacity(spec.m_jitter);
    for r in results {
        let (c, m) = r?;
        chains.push(c);
        comparisons.push(m);
    }
    let summary = summarize(spec.p, &chains, &comparisons, options.level)?;
    Ok(JitterFit {
        summary,
        chains,
        comparisons,
    })
}

fn summarize_series<T: Scalar>(
    name: String,
    series: &[Vec<T>],
    retained: usize,
    level: f64,
) -> Result<CoefficientSummary<T>> {
    let mut means = Vec::with_capacity(series.len());
    let mut vars = Vec::with_capacity(series.len());
    let mut lows = Vec::with_capacity(series.len());
    let mut highs = Vec::with_capacity(series.len());
    for draws in series {
        let (m, v) = mean_var(draws);
        let (lo, hi) = credible_interval(draws, level)?;
        means.push(m);
        vars.push(v);
        lows.push(lo);
        highs.push(hi);
    }
    let mf = T::of(series.len() as f64);
    let pooled = pooled_variance(&means, &vars, retained)?;
    Ok(CoefficientSummary {
        name,
        avg_post_mean: means.iter().copied().sum::<T>() / mf,
        pooled_sd: pooled.sqrt(),
        avg_ci_low: lows.iter().copied().sum::<T>() / mf,
        avg_ci_high: highs.iter().copied().sum::<T>() / mf,
        replicate_ci_widths: lows.iter().zip(&highs).map(|(&l, &h)| h - l).collect(),
        replicate_means: means,
    })
}

/// Aggregates replicate chains (ordered by `h`) into a summary.
pub fn summarize<T: Scalar>(
    p: T,
    chains: &[ChainOutput<T>],
    comparisons: &[ModelComparison<T>],
    level: f64,
) -> Result<PosteriorSummary<T>> {
    let first = chains
        .first()
        .ok_or_else(|| Error::param("no chains to summarize"))?;
    let retained = first.len();
    if chains.iter().any(|c| c.len() != retained) {
        return Err(Error::param("replicate chains differ in length"));
    }
    let k = first.draws.first().map_or(0, |d| d.beta.len());
    let mf = T::of(chains.len() as f64);

    let mut coefficients = Vec::with_capacity(k);
    for h in 0..k {
        let series: Vec<Vec<T>> = chains
            .iter()
            .map(|c| c.draws.iter().map(|d| d.beta[h]).collect())
            .collect();
        coefficients.push(summarize_series(format!("beta{}", h + 1), &series, retained, level)?);
    }
    type Getter<T> = fn(&crate::model::ChainState<T>) -> T;
    let hyper: [(&str, Getter<T>); 3] = [
        ("sigma", |d| d.sigma),
        ("phi2", |d| d.phi2),
        ("lambda2", |d| d.lambda2),
    ];
    let mut hyperparameters = Vec::with_capacity(3);
    for (name, get) in hyper {
        let series: Vec<Vec<T>> = chains
            .iter()
            .map(|c| c.draws.iter().map(get).collect())
            .collect();
        hyperparameters.push(summarize_series(name.to_string(), &series, retained, level)?);
    }

    let mut alpha_means: Vec<Vec<T>> = Vec::new();
    for c in chains {
        let m = c.posterior_mean().expect("chains are non-empty");
        if alpha_means.is_empty() {
            alpha_means = m.alpha.iter().map(|a| vec![T::zero(); a.len()]).collect();
        }
        for (acc, a) in alpha_means.iter_mut().zip(&m.alpha) {
            for (x, &y) in acc.iter_mut().zip(a) {
                *x = *x + y / mf;
            }
        }
    }

    let avg = |f: fn(&ModelComparison<T>) -> T| {
        if comparisons.is_empty() {
            T::nan()
        } else {
            comparisons.iter().map(f).sum::<T>() / T::of(comparisons.len() as f64)
        }
    };
    Ok(PosteriorSummary {
        p,
        m_jitter: chains.len(),
        retained,
        level,
        coefficients,
        hyperparameters,
        alpha_means,
        avg_nll: avg(|c| c.nll),
        avg_dic: avg(|c| c.dic),
        avg_p_d: avg(|c| c.p_d),
    })
}
