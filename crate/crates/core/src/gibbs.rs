//! Blocked Gibbs sampler for the jittered asymmetric-Laplace panel model.
//!
//! One sweep runs, in order:
//!
//! 1. `z | y`: fresh jitter and latent transform,
//! 2. `v_ij | z, β, α_i, σ ~ GIG(1/2, ρ1, ρ2)`,
//! 3. `σ | z, v, β, α ~ IG`,
//! 4. `β | z, v, α, σ, g² ~ N`,
//! 5. `g²_h | β_h, λ² ~ GIG(1/2, β_h², λ²)`,
//! 6. `λ² | g² ~ Gamma(k + a1, Σg²/2 + a2)`,
//! 7. `α_i | z, v, β, σ, φ² ~ N`,
//! 8. `φ² | α ~ IG(N l/2 + b1, Σ α_i'α_i/2 + b2)`.
//!
//! The likelihood factor of every observation is `N(θ v, τ² σ v)`, so each
//! observation contributes precision `1/(τ² σ v_ij)` to the Gaussian blocks.

use crate::distributions::{
    ald_logpdf_unchecked, sample_gamma, sample_gaussian_from_precision, sample_gig_half,
    sample_inverse_gamma, GigHalfParams, RngStream,
};
use crate::error::{Error, Result};
use crate::jitter::jitter_latent;
use crate::linalg::SquareMatrix;
use crate::model::{dot, mixture_constants, ChainState, MixtureConstants, PanelDataset, PriorConfig};
use crate::scalar::Scalar;

/// Which full conditional is used for `σ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SigmaRule {
    /// Conditional of the full joint posterior, including the `(σv)^(-1/2)`
    /// likelihood normalization and the exponential prior on `v`:
    /// shape `3n/2 + c1`, scale `Σ(r - θv)²/(2τ²v) + Σv + c2`.
    #[default]
    JointConsistent,
    /// Shape `n/2 + c1`, scale `Σ(r - θv)²/(2τ²v) + c2`.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Keep `v` and `z` in recorded draws.
    pub record_latents: bool,
    pub sigma_rule: SigmaRule,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            iterations: 12_000,
            burn_in: 2_000,
            thin: 1,
            record_latents: false,
            sigma_rule: SigmaRule::JointConsistent,
        }
    }
}

impl GibbsConfig {
    pub fn new(iterations: usize, burn_in: usize) -> Self {
        Self {
            iterations,
            burn_in,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::param(format!(
                "burn-in {} must be smaller than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::param("thin must be at least 1"));
        }
        Ok(())
    }

    /// `floor((iterations - burn_in) / thin)`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Recorded post-burn-in draws of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput<T> {
    pub draws: Vec<ChainState<T>>,
    /// 1-based sweep number of each recorded draw.
    pub iterations: Vec<usize>,
    /// `-2 Σ ln ALD(z_ij | x'β + s'α_i, σ, p)` of each recorded draw, using
    /// that sweep's `z`.
    pub deviances: Vec<T>,
    pub jitter_index: usize,
}

impl<T: Scalar> ChainOutput<T> {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Averages `β, α, σ, φ², g², λ²` over the recorded draws. Latents are
    /// left empty.
    pub fn posterior_mean(&self) -> Option<ChainState<T>> {
        let first = self.draws.first()?;
        let n = T::of(self.draws.len() as f64);
        let mut mean = ChainState {
            beta: vec![T::zero(); first.beta.len()],
            alpha: first.alpha.iter().map(|a| vec![T::zero(); a.len()]).collect(),
            v: Vec::new(),
            sigma: T::zero(),
            phi2: T::zero(),
            g2: vec![T::zero(); first.g2.len()],
            lambda2: T::zero(),
            z: Vec::new(),
        };
        for d in &self.draws {
            add_assign(&mut mean.beta, &d.beta);
            for (m, a) in mean.alpha.iter_mut().zip(&d.alpha) {
                add_assign(m, a);
            }
            add_assign(&mut mean.g2, &d.g2);
            mean.sigma = mean.sigma + d.sigma;
            mean.phi2 = mean.phi2 + d.phi2;
            mean.lambda2 = mean.lambda2 + d.lambda2;
        }
        let scale = |v: &mut Vec<T>| v.iter_mut().for_each(|x| *x = *x / n);
        scale(&mut mean.beta);
        mean.alpha.iter_mut().for_each(scale);
        scale(&mut mean.g2);
        mean.sigma = mean.sigma / n;
        mean.phi2 = mean.phi2 / n;
        mean.lambda2 = mean.lambda2 / n;
        Some(mean)
    }
}

fn add_assign<T: Scalar>(acc: &mut [T], x: &[T]) {
    for (a, &b) in acc.iter_mut().zip(x) {
        *a = *a + b;
    }
}

/// Resamples once if a draw lands below the variance floor, then gives up.
fn floored<T: Scalar>(what: &'static str, mut draw: impl FnMut() -> Result<T>) -> Result<T> {
    for _ in 0..2 {
        let x = draw()?;
        if x >= T::variance_floor() && x.is_finite() {
            return Ok(x);
        }
    }
    Err(Error::Underflow { what })
}

/// Step 1: fresh jitter and latent transform of every count.
pub fn update_latent_z<T: Scalar>(
    data: &PanelDataset<T>,
    p: T,
    zeta: T,
    rng: &mut RngStream,
) -> Vec<Vec<T>> {
    jitter_latent(data, p, zeta, rng)
}

/// `(ρ1, ρ2)` of the `v_ij` conditional for residual `r = z - x'β - s'α`.
pub fn v_conditional<T: Scalar>(residual: T, sigma: T, constants: &MixtureConstants<T>) -> GigHalfParams<T> {
    let t2s = constants.tau2() * sigma;
    GigHalfParams::new(
        residual * residual / t2s,
        constants.theta * constants.theta / t2s + (T::one() + T::one()) / sigma,
    )
}

/// Step 2.
pub fn update_v<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
    rng: &mut RngStream,
) -> Result<Vec<Vec<T>>> {
    data.subjects
        .iter()
        .enumerate()
        .map(|(i, block)| {
            (0..block.len())
                .map(|j| {
                    let r = state.z[i][j] - state.linear_predictor(data, i, j);
                    let params = v_conditional(r, state.sigma, constants);
                    floored("v", || sample_gig_half(params, rng))
                })
                .collect()
        })
        .collect()
}

/// `(shape, scale)` of the inverse-gamma `σ` conditional.
pub fn sigma_conditional<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
    priors: &PriorConfig<T>,
    rule: SigmaRule,
) -> Result<(T, T)> {
    let mut quad = T::zero();
    let mut sum_v = T::zero();
    for (i, block) in data.subjects.iter().enumerate() {
        for j in 0..block.len() {
            let v = state.v[i][j];
            let e = state.z[i][j] - state.linear_predictor(data, i, j) - constants.theta * v;
            quad = quad + e * e / v;
            sum_v = sum_v + v;
        }
    }
    let n = T::of(data.n_total() as f64);
    let two = T::one() + T::one();
    let quad = quad / (two * constants.tau2());
    let (shape, scale) = match rule {
        SigmaRule::JointConsistent => (T::of(1.5) * n + priors.c1, quad + sum_v + priors.c2),
        SigmaRule::Literal => (n / two + priors.c1, quad + priors.c2),
    };
    if !(shape > T::zero()) {
        return Err(Error::Config(format!(
            "sigma posterior shape {shape} is not positive"
        )));
    }
    Ok((shape, scale))
}

/// Step 3.
pub fn update_sigma<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
    priors: &PriorConfig<T>,
    rule: SigmaRule,
    rng: &mut RngStream,
) -> Result<T> {
    let (shape, scale) = sigma_conditional(state, data, constants, priors, rule)?;
    floored("sigma", || sample_inverse_gamma(shape, scale, rng))
}

/// Precision and linear term of the `β` conditional:
/// `P = D_g²⁻¹ + Σ x x'/(τ²σv)`, `c = Σ x (z - s'α - θv)/(τ²σv)`.
pub fn beta_conditional<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
) -> (SquareMatrix<T>, Vec<T>) {
    let inv_g2: Vec<T> = state.g2.iter().map(|&g| T::one() / g).collect();
    let mut precision = SquareMatrix::from_diagonal(&inv_g2);
    let mut linear = vec![T::zero(); data.k];
    let t2s = constants.tau2() * state.sigma;
    for (i, block) in data.subjects.iter().enumerate() {
        for j in 0..block.len() {
            let v = state.v[i][j];
            let w = T::one() / (t2s * v);
            let x = &block.x[j];
            precision.add_outer(x, w);
            let target = state.z[i][j] - dot(&block.s[j], &state.alpha[i]) - constants.theta * v;
            for (c, &xh) in linear.iter_mut().zip(x) {
                *c = *c + w * xh * target;
            }
        }
    }
    (precision, linear)
}

/// Step 4.
pub fn update_beta<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
    rng: &mut RngStream,
) -> Result<Vec<T>> {
    let (precision, linear) = beta_conditional(state, data, constants);
    sample_gaussian_from_precision(&precision, &linear, rng)
}

/// Step 5.
pub fn update_g2<T: Scalar>(state: &ChainState<T>, rng: &mut RngStream) -> Result<Vec<T>> {
    state
        .beta
        .iter()
        .map(|&b| {
            let params = GigHalfParams::new(b * b, state.lambda2);
            floored("g2", || sample_gig_half(params, rng))
        })
        .collect()
}

/// `(shape, rate)` of the `λ²` conditional: `(k + a1, Σ g²/2 + a2)`.
pub fn lambda2_conditional<T: Scalar>(state: &ChainState<T>, priors: &PriorConfig<T>) -> (T, T) {
    let k = T::of(state.g2.len() as f64);
    let half_sum = state.g2.iter().copied().sum::<T>() / (T::one() + T::one());
    (k + priors.a1, half_sum + priors.a2)
}

/// Step 6.
pub fn update_lambda2<T: Scalar>(
    state: &ChainState<T>,
    priors: &PriorConfig<T>,
    rng: &mut RngStream,
) -> Result<T> {
    let (shape, rate) = lambda2_conditional(state, priors);
    floored("lambda2", || sample_gamma(shape, rate, rng))
}

/// Precision and linear term of the `α_i` conditional:
/// `P = I_l/φ² + Σ_j s s'/(τ²σv)`, `c = Σ_j s (z - x'β - θv)/(τ²σv)`.
pub fn alpha_conditional<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
    subject: usize,
) -> (SquareMatrix<T>, Vec<T>) {
    let block = &data.subjects[subject];
    let mut precision = SquareMatrix::from_diagonal(&vec![T::one() / state.phi2; data.l]);
    let mut linear = vec![T::zero(); data.l];
    let t2s = constants.tau2() * state.sigma;
    for j in 0..block.len() {
        let v = state.v[subject][j];
        let w = T::one() / (t2s * v);
        let s = &block.s[j];
        precision.add_outer(s, w);
        let target = state.z[subject][j] - dot(&block.x[j], &state.beta) - constants.theta * v;
        for (c, &sh) in linear.iter_mut().zip(s) {
            *c = *c + w * sh * target;
        }
    }
    (precision, linear)
}

/// Step 7.
pub fn update_alpha<T: Scalar>(
    state: &ChainState<T>,
    data: &PanelDataset<T>,
    constants: &MixtureConstants<T>,
    rng: &mut RngStream,
) -> Result<Vec<Vec<T>>> {
    (0..data.n_subjects())
        .map(|i| {
            let (precision, linear) = alpha_conditional(state, data, constants, i);
            sample_gaussian_from_precision(&precision, &linear, rng)
        })
        .collect()
}

/// `(shape, scale)` of the `φ²` conditional: `(N l/2 + b1, Σ α_i'α_i/2 + b2)`.
pub fn phi2_conditional<T: Scalar>(state: &ChainState<T>, priors: &PriorConfig<T>) -> Result<(T, T)> {
    let two = T::one() + T::one();
    let count = T::of(state.alpha.iter().map(Vec::len).sum::<usize>() as f64);
    let shape = count / two + priors.b1;
    if !(shape > T::zero()) {
        return Err(Error::Config(format!(
            "phi2 posterior shape {shape} is not positive"
        )));
    }
    let ss: T = state.alpha.iter().map(|a| dot(a, a)).sum();
    Ok((shape, ss / two + priors.b2))
}

/// Step 8.
pub fn update_phi2<T: Scalar>(
    state: &ChainState<T>,
    priors: &PriorConfig<T>,
    rng: &mut RngStream,
) -> Result<T> {
    let (shape, scale) = phi2_conditional(state, priors)?;
    floored("phi2", || sample_inverse_gamma(shape, scale, rng))
}

/// `-2 Σ ln ALD(z_ij | x'β + s'α_i, σ, p)` for the latents in `z`.
pub fn deviance<T: Scalar>(state: &ChainState<T>, data: &PanelDataset<T>, z: &[Vec<T>], p: T) -> T {
    let mut ll = T::zero();
    for (i, block) in data.subjects.iter().enumerate() {
        for j in 0..block.len() {
            let mu = state.linear_predictor(data, i, j);
            ll = ll + ald_logpdf_unchecked(z[i][j], mu, state.sigma, p);
        }
    }
    -(T::one() + T::one()) * ll
}

fn check_inputs<T: Scalar>(data: &PanelDataset<T>, priors: &PriorConfig<T>) -> Result<()> {
    let report = crate::model::validate_dataset(data);
    if !report.is_valid() {
        return Err(Error::InvalidDataset(report.to_string()));
    }
    priors.validate()?;
    let n = T::of(data.n_total() as f64);
    let nl = T::of((data.n_subjects() * data.l) as f64);
    let half = T::of(0.5);
    if !(n * half + priors.c1 > T::zero()) || !(nl * half + priors.b1 > T::zero()) {
        return Err(Error::Config(
            "dataset too small for the chosen inverse-gamma shapes".into(),
        ));
    }
    Ok(())
}

/// One full sweep, steps 1 to 8 in order, mutating `state` in place.
pub fn sweep<T: Scalar>(
    state: &mut ChainState<T>,
    data: &PanelDataset<T>,
    p: T,
    zeta: T,
    constants: &MixtureConstants<T>,
    priors: &PriorConfig<T>,
    rule: SigmaRule,
    rng: &mut RngStream,
) -> Result<()> {
    state.z = update_latent_z(data, p, zeta, rng);
    state.v = update_v(state, data, constants, rng)?;
    state.sigma = update_sigma(state, data, constants, priors, rule, rng)?;
    state.beta = update_beta(state, data, constants, rng)?;
    state.g2 = update_g2(state, rng)?;
    state.lambda2 = update_lambda2(state, priors, rng)?;
    state.alpha = update_alpha(state, data, constants, rng)?;
    state.phi2 = update_phi2(state, priors, rng)?;
    debug_assert!(state.satisfies_invariants(), "chain state left its support");
    Ok(())
}

/// Runs one chain on one jitter replicate.
pub fn run_chain<T: Scalar>(
    data: &PanelDataset<T>,
    p: T,
    zeta: T,
    priors: &PriorConfig<T>,
    config: &GibbsConfig,
    jitter_index: usize,
    mut rng: RngStream,
) -> Result<ChainOutput<T>> {
    crate::model::check_quantile(p)?;
    config.validate()?;
    check_inputs(data, priors)?;
    let constants = mixture_constants(p);
    let mut state = ChainState::initial(data);
    let retained = config.retained();
    let mut out = ChainOutput {
        draws: Vec::with_capacity(retained),
        iterations: Vec::with_capacity(retained),
        deviances: Vec::with_capacity(retained),
        jitter_index,
    };
    for iteration in 1..=config.iterations {
        sweep(
            &mut state,
            data,
            p,
            zeta,
            &constants,
            priors,
            config.sigma_rule,
            &mut rng,
        )
        .map_err(|e| Error::Chain {
            iteration,
            source: Box::new(e),
        })?;
        if iteration > config.burn_in && (iteration - config.burn_in) % config.thin == 0 {
            out.deviances.push(deviance(&state, data, &state.z, p));
            out.iterations.push(iteration);
            let snapshot = if config.record_latents {
                state.clone()
            } else {
                ChainState {
                    beta: state.beta.clone(),
                    alpha: state.alpha.clone(),
                    v: Vec::new(),
                    sigma: state.sigma,
                    phi2: state.phi2,
                    g2: state.g2.clone(),
                    lambda2: state.lambda2,
                    z: Vec::new(),
                }
            };
            out.draws.push(snapshot);
        }
    }
    Ok(out)
}
