//! Numerical oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

/// Normalized CDF of an unnormalized log-density, tabulated on a grid.
pub struct GridCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
    log_axis: bool,
}

impl GridCdf {
    /// Grid uniform in `x` over `[lo, hi]`.
    pub fn linear(log_kernel: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let logs: Vec<f64> = xs.iter().map(|&x| log_kernel(x)).collect();
        Self::build(xs, logs, false)
    }

    /// Grid uniform in `ln x` over `[lo, hi]`, `lo > 0`; integrates `f(x) x d(ln x)`.
    pub fn logarithmic(log_kernel: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        let (a, b) = (lo.ln(), hi.ln());
        let ts: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let logs: Vec<f64> = ts.iter().map(|&t| log_kernel(t.exp()) + t).collect();
        Self::build(ts, logs, true)
    }

    fn build(xs: Vec<f64>, logs: Vec<f64>, log_axis: bool) -> Self {
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let dens: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let mut cdf = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let total = cdf[xs.len() - 1];
        for c in &mut cdf {
            *c /= total;
        }
        Self { xs, cdf, log_axis }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = if self.log_axis {
            if x <= 0.0 {
                return 0.0;
            }
            x.ln()
        } else {
            x
        };
        let n = self.xs.len();
        if t <= self.xs[0] {
            return 0.0;
        }
        if t >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&g| g <= t);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let w = (t - x0) / (x1 - x0);
        self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
    }

    /// `E[g(X)]` under the tabulated law.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.xs.len() {
            let mid = 0.5 * (self.xs[i] + self.xs[i - 1]);
            let x = if self.log_axis { mid.exp() } else { mid };
            acc += g(x) * (self.cdf[i] - self.cdf[i - 1]);
        }
        acc
    }
}

/// One-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean of an autocorrelated series by batch means.
pub fn batch_means_se(series: &[f64], batches: usize) -> f64 {
    let size = series.len() / batches;
    let means: Vec<f64> = series.chunks_exact(size).map(mean).collect();
    (variance(&means) / means.len() as f64).sqrt()
}

/// Scalar instance of the model: one subject, one observation, `k = l = 1`.
#[derive(Clone, Copy, Debug)]
pub struct ScalarPoint {
    pub z: f64,
    pub x: f64,
    pub s: f64,
    pub beta: f64,
    pub alpha: f64,
    pub v: f64,
    pub sigma: f64,
    pub g2: f64,
    pub lambda2: f64,
    pub phi2: f64,
}

/// Hyperparameters `(a1, a2, b1, b2, c1, c2)`.
#[derive(Clone, Copy, Debug)]
pub struct Hyper {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Log of the hierarchical joint density, written out factor by factor:
/// `z | .  ~ N(xβ + sα + θv, τ²σv)`, `v | σ ~ Exp(mean σ)`, `β | g² ~ N(0, g²)`,
/// `g² | λ² ~ Exp(rate λ²/2)`, `λ² ~ Gamma(a1, a2)`, `α | φ² ~ N(0, φ²)`,
/// `φ² ~ IG(b1, b2)`, `σ ~ IG(c1, c2)`.
pub fn log_joint(q: &ScalarPoint, h: &Hyper, p: f64) -> f64 {
    let theta = (1.0 - 2.0 * p) / (p * (1.0 - p));
    let tau2 = 2.0 / (p * (1.0 - p));
    let e = q.z - q.x * q.beta - q.s * q.alpha - theta * q.v;
    -0.5 * (tau2 * q.sigma * q.v).ln() - e * e / (2.0 * tau2 * q.sigma * q.v)
        - q.sigma.ln() - q.v / q.sigma
        - 0.5 * q.g2.ln() - q.beta * q.beta / (2.0 * q.g2)
        + (q.lambda2 / 2.0).ln() - q.lambda2 * q.g2 / 2.0
        + (h.a1 - 1.0) * q.lambda2.ln() - h.a2 * q.lambda2
        - 0.5 * q.phi2.ln() - q.alpha * q.alpha / (2.0 * q.phi2)
        - (h.b1 + 1.0) * q.phi2.ln() - h.b2 / q.phi2
        - (h.c1 + 1.0) * q.sigma.ln() - h.c2 / q.sigma
}

/// Geweke successive-conditional check on the tiny proper-prior instance
/// (`N = 3`, `n_i = 2`, `k = l = 1`): alternate Gibbs steps 2 to 8 given `z`
/// with a forward draw of `z` given everything else, and compare the
/// long-run moments with their exact prior values. Returns `(label, z-score)`.
pub fn geweke_z_scores(rule: alq_panel::SigmaRule, sweeps: usize, seed: u64) -> Vec<(&'static str, f64)> {
    use alq_panel::distributions::{
        sample_exponential, sample_gamma, sample_inverse_gamma, sample_standard_normal,
    };
    use alq_panel::gibbs::{
        update_alpha, update_beta, update_g2, update_lambda2, update_phi2, update_sigma, update_v,
    };
    use alq_panel::model::{mixture_constants, ChainState, PanelDataset, PriorConfig, SubjectBlock};

    let p = 0.25;
    let h = Hyper { a1: 3.0, a2: 2.0, b1: 3.0, b2: 2.0, c1: 3.0, c2: 2.0 };
    let priors = PriorConfig { a1: h.a1, a2: h.a2, b1: h.b1, b2: h.b2, c1: h.c1, c2: h.c2 };
    let xs = [[0.4, 1.1], [0.2, 0.8], [1.5, 0.9]];
    let data = PanelDataset::new(
        xs.iter()
            .enumerate()
            .map(|(i, x)| SubjectBlock {
                subject_id: (i + 1).to_string(),
                y: vec![0, 0],
                x: x.iter().map(|&v| vec![v]).collect(),
                s: vec![vec![1.0]; 2],
            })
            .collect(),
        1,
        1,
    );
    let c = mixture_constants(p);
    let mut rng = alq_panel::RngStream::new(seed, 0x6e_7e);
    let r = &mut rng;

    // exact draw from the prior and the forward model
    let mut s = ChainState::initial(&data);
    s.lambda2 = sample_gamma(h.a1, h.a2, r).unwrap();
    s.g2 = vec![sample_gamma(1.0, s.lambda2 / 2.0, r).unwrap()];
    let n0: f64 = sample_standard_normal(r);
    s.beta = vec![s.g2[0].sqrt() * n0];
    s.sigma = sample_inverse_gamma(h.c1, h.c2, r).unwrap();
    s.phi2 = sample_inverse_gamma(h.b1, h.b2, r).unwrap();
    for a in &mut s.alpha {
        let n: f64 = sample_standard_normal(r);
        a[0] = s.phi2.sqrt() * n;
    }
    let forward_z = |s: &mut ChainState<f64>, r: &mut alq_panel::RngStream, fresh_v: bool| {
        for (i, block) in data.subjects.iter().enumerate() {
            for j in 0..block.len() {
                if fresh_v {
                    s.v[i][j] = sample_exponential(1.0 / s.sigma, r).unwrap();
                }
                let u: f64 = sample_standard_normal(r);
                let mu = block.x[j][0] * s.beta[0] + block.s[j][0] * s.alpha[i][0];
                s.z[i][j] = mu + c.theta * s.v[i][j] + c.tau * (s.sigma * s.v[i][j]).sqrt() * u;
            }
        }
    };
    forward_z(&mut s, r, true);

    let mut series: Vec<(&'static str, f64, Vec<f64>)> = vec![
        ("beta", 0.0, Vec::new()),
        ("beta^2", 2.0 * h.a2 / (h.a1 - 1.0), Vec::new()),
        ("sigma", h.c2 / (h.c1 - 1.0), Vec::new()),
        ("phi2", h.b2 / (h.b1 - 1.0), Vec::new()),
        ("lambda2", h.a1 / h.a2, Vec::new()),
        ("alpha1", 0.0, Vec::new()),
        ("alpha1^2", h.b2 / (h.b1 - 1.0), Vec::new()),
    ];
    for _ in 0..sweeps {
        s.v = update_v(&s, &data, &c, r).unwrap();
        s.sigma = update_sigma(&s, &data, &c, &priors, rule, r).unwrap();
        s.beta = update_beta(&s, &data, &c, r).unwrap();
        s.g2 = update_g2(&s, r).unwrap();
        s.lambda2 = update_lambda2(&s, &priors, r).unwrap();
        s.alpha = update_alpha(&s, &data, &c, r).unwrap();
        s.phi2 = update_phi2(&s, &priors, r).unwrap();
        forward_z(&mut s, r, false);
        let vals = [
            s.beta[0],
            s.beta[0] * s.beta[0],
            s.sigma,
            s.phi2,
            s.lambda2,
            s.alpha[0][0],
            s.alpha[0][0] * s.alpha[0][0],
        ];
        for (entry, v) in series.iter_mut().zip(vals) {
            entry.2.push(v);
        }
    }
    series
        .into_iter()
        .map(|(name, expected, xs)| (name, (mean(&xs) - expected) / batch_means_se(&xs, 50)))
        .collect()
}

/// Monotonicity and round-trip contracts of the latent transform and the
/// ceiling prediction rule, each checked over `cases` random inputs.
pub fn transform_properties(cases: u32) -> Result<(), String> {
    use alq_panel::jitter::{latent_transform, predict_count_quantile, predict_from_linear_predictor};
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};

    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let p_range = 0.001f64..0.999;
    let zeta_range = 1e-12f64..0.5;

    let mut runner = TestRunner::new_with_rng(config.clone(), proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm));
    runner
        .run(
            &(p_range.clone(), zeta_range.clone(), 0.0f64..1e6, 0.0f64..1e6),
            |(p, zeta, a, b)| {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(latent_transform(lo, p, zeta) <= latent_transform(hi, p, zeta));
                Ok(())
            },
        )
        .map_err(|e| format!("monotonicity: {e}"))?;

    let mut runner = TestRunner::new_with_rng(config.clone(), proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm));
    runner
        .run(&(p_range.clone(), zeta_range, 0.0f64..1e6), |(p, zeta, y)| {
            let y_star = y + p + 1e-9 * (1.0 + y);
            let z = latent_transform(y_star, p, zeta);
            let back = z.exp() + p;
            prop_assert!((back - y_star).abs() <= 1e-12 * y_star.max(1.0), "{} vs {}", back, y_star);
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;

    let mut runner = TestRunner::new_with_rng(config.clone(), proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm));
    runner
        .run(
            &(p_range, -30.0f64..10.0, 0.0f64..5.0, 0.0f64..2.0, 0.0f64..3.0, 0.0f64..1.0),
            |(p, b, db, x, a, s)| {
                let base = predict_count_quantile(&[b], &[a], &[x], &[s], p).unwrap();
                let up_beta = predict_count_quantile(&[b + db], &[a], &[x], &[s], p).unwrap();
                let up_alpha = predict_count_quantile(&[b], &[a + db], &[x], &[s], p).unwrap();
                prop_assert!(base <= up_beta && base <= up_alpha);
                let eta = b * x + a * s;
                prop_assert!(predict_from_linear_predictor(eta, p).unwrap() <= predict_from_linear_predictor(eta + db, p).unwrap());
                Ok(())
            },
        )
        .map_err(|e| format!("prediction monotonicity: {e}"))?;
    Ok(())
}

/// Point at which the seven scalar conditionals are checked.
pub const SCALAR_POINT: ScalarPoint = ScalarPoint {
    z: 1.1,
    x: 1.3,
    s: 0.7,
    beta: 0.4,
    alpha: 0.2,
    v: 0.9,
    sigma: 0.6,
    g2: 1.5,
    lambda2: 0.8,
    phi2: 1.2,
};

pub const SCALAR_HYPER: Hyper = Hyper { a1: 2.0, a2: 1.5, b1: 3.0, b2: 2.0, c1: 3.0, c2: 2.0 };

/// Quantile level of the scalar instance.
pub const SCALAR_P: f64 = 0.25;

pub fn priors(h: &Hyper) -> alq_panel::PriorConfig<f64> {
    alq_panel::PriorConfig { a1: h.a1, a2: h.a2, b1: h.b1, b2: h.b2, c1: h.c1, c2: h.c2 }
}

pub fn scalar_model(
    q: &ScalarPoint,
) -> (alq_panel::model::PanelDataset<f64>, alq_panel::model::ChainState<f64>) {
    use alq_panel::model::{ChainState, PanelDataset, SubjectBlock};
    let data = PanelDataset::new(
        vec![SubjectBlock {
            subject_id: "1".into(),
            y: vec![2],
            x: vec![vec![q.x]],
            s: vec![vec![q.s]],
        }],
        1,
        1,
    );
    let state = ChainState {
        beta: vec![q.beta],
        alpha: vec![vec![q.alpha]],
        v: vec![vec![q.v]],
        sigma: q.sigma,
        phi2: q.phi2,
        g2: vec![q.g2],
        lambda2: q.lambda2,
        z: vec![vec![q.z]],
    };
    (data, state)
}

/// Conditional of one coordinate of the scalar instance, from the joint.
pub fn conditional_grid(positive: bool, set: impl Fn(&mut ScalarPoint, f64)) -> GridCdf {
    let kernel = |x| {
        let mut r = SCALAR_POINT;
        set(&mut r, x);
        log_joint(&r, &SCALAR_HYPER, SCALAR_P)
    };
    if positive {
        GridCdf::logarithmic(kernel, 1e-10, 1e5, 80_001)
    } else {
        GridCdf::linear(kernel, -30.0, 30.0, 120_001)
    }
}

fn redraw(seed: u64, stream: u64, n: usize, mut f: impl FnMut(&mut alq_panel::RngStream) -> f64) -> Vec<f64> {
    let mut rng = alq_panel::RngStream::new(seed, stream);
    (0..n).map(|_| f(&mut rng)).collect()
}

/// KS distance between `n` redraws of each update at the scalar point and
/// its grid conditional, in sweep order.
pub fn conditional_ks(n: usize, seed: u64) -> Vec<(&'static str, f64)> {
    use alq_panel::gibbs::{
        update_alpha, update_beta, update_g2, update_lambda2, update_phi2, update_sigma, update_v,
    };
    use alq_panel::model::mixture_constants;
    use alq_panel::SigmaRule;

    let (data, state) = scalar_model(&SCALAR_POINT);
    let c = mixture_constants(SCALAR_P);
    let pr = priors(&SCALAR_HYPER);
    let ks = |draws: Vec<f64>, grid: GridCdf| ks_distance(&draws, |x| grid.cdf(x));
    vec![
        (
            "v",
            ks(
                redraw(seed, 1, n, |r| update_v(&state, &data, &c, r).unwrap()[0][0]),
                conditional_grid(true, |q, x| q.v = x),
            ),
        ),
        (
            "sigma",
            ks(
                redraw(seed, 2, n, |r| {
                    update_sigma(&state, &data, &c, &pr, SigmaRule::JointConsistent, r).unwrap()
                }),
                conditional_grid(true, |q, x| q.sigma = x),
            ),
        ),
        (
            "beta",
            ks(
                redraw(seed, 3, n, |r| update_beta(&state, &data, &c, r).unwrap()[0]),
                conditional_grid(false, |q, x| q.beta = x),
            ),
        ),
        (
            "g2",
            ks(
                redraw(seed, 4, n, |r| update_g2(&state, r).unwrap()[0]),
                conditional_grid(true, |q, x| q.g2 = x),
            ),
        ),
        (
            "lambda2",
            ks(
                redraw(seed, 5, n, |r| update_lambda2(&state, &pr, r).unwrap()),
                conditional_grid(true, |q, x| q.lambda2 = x),
            ),
        ),
        (
            "alpha",
            ks(
                redraw(seed, 6, n, |r| update_alpha(&state, &data, &c, r).unwrap()[0][0]),
                conditional_grid(false, |q, x| q.alpha = x),
            ),
        ),
        (
            "phi2",
            ks(
                redraw(seed, 7, n, |r| update_phi2(&state, &pr, r).unwrap()),
                conditional_grid(true, |q, x| q.phi2 = x),
            ),
        ),
    ]
}

/// Fraction of `n` composite draws `θv + τ√(σv)u` that are `<= 0`.
pub fn mixture_below_fraction(p: f64, sigma: f64, n: usize, seed: u64, stream: u64) -> f64 {
    use alq_panel::distributions::{sample_exponential, sample_standard_normal};
    let c = alq_panel::model::mixture_constants(p);
    let mut rng = alq_panel::RngStream::new(seed, stream);
    let mut below = 0usize;
    for _ in 0..n {
        let v = sample_exponential(1.0 / sigma, &mut rng).unwrap();
        let u: f64 = sample_standard_normal(&mut rng);
        if c.theta * v + c.tau * (sigma * v).sqrt() * u <= 0.0 {
            below += 1;
        }
    }
    below as f64 / n as f64
}
