//! Panel data, configuration, and the formulas shared by every other module:
//! the check loss and the normal-exponential mixture constants.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Check (quantile) loss `ρ_p(u) = u (p - 1{u < 0})`.
#[inline]
pub fn check_loss<T: Scalar>(u: T, p: T) -> T {
    if u < T::zero() {
        u * (p - T::one())
    } else {
        u * p
    }
}

/// Constants of the mixture `ε = θ v + τ √(σ v) u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureConstants<T> {
    pub theta: T,
    pub tau: T,
}

impl<T: Scalar> MixtureConstants<T> {
    #[inline]
    pub fn tau2(&self) -> T {
        self.tau * self.tau
    }
}

/// `θ = (1 - 2p) / (p(1 - p))`, `τ = √(2 / (p(1 - p)))`.
pub fn mixture_constants<T: Scalar>(p: T) -> MixtureConstants<T> {
    let one = T::one();
    let pq = p * (one - p);
    MixtureConstants {
        theta: (one - (one + one) * p) / pq,
        tau: ((one + one) / pq).sqrt(),
    }
}

pub(crate) fn check_quantile<T: Scalar>(p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::param(format!("quantile level {p} outside (0, 1)")))
    }
}

/// Repeated measurements for one subject. Row `j` of `x` and `s` belongs to
/// count `y[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectBlock<T> {
    pub subject_id: String,
    pub y: Vec<i64>,
    pub x: Vec<Vec<T>>,
    pub s: Vec<Vec<T>>,
}

impl<T: Scalar> SubjectBlock<T> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Long-format panel grouped by subject.
///
/// No intercept column is ever inserted: callers put a constant column in
/// `x` and/or `s` themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelDataset<T> {
    pub subjects: Vec<SubjectBlock<T>>,
    /// Fixed-effect dimension.
    pub k: usize,
    /// Random-effect dimension.
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    EmptySubject {
        subject: String,
    },
    RowCountMismatch {
        subject: String,
        y: usize,
        x: usize,
        s: usize,
    },
    FixedEffectWidth {
        subject: String,
        row: usize,
        found: usize,
        expected: usize,
    },
    RandomEffectWidth {
        subject: String,
        row: usize,
        found: usize,
        expected: usize,
    },
    NegativeCount {
        subject: String,
        row: usize,
        value: i64,
    },
    NonFiniteCovariate {
        subject: String,
        row: usize,
    },
    TooFewObservations {
        total: usize,
        k: usize,
    },
    NoSubjects,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            EmptySubject { subject } => write!(f, "subject {subject} has no observations"),
            RowCountMismatch { subject, y, x, s } => write!(
                f,
                "subject {subject}: {y} counts but {x} fixed-effect rows and {s} random-effect rows"
            ),
            FixedEffectWidth {
                subject,
                row,
                found,
                expected,
            } => write!(
                f,
                "subject {subject}, row {row}: fixed-effect row has {found} entries, expected {expected}"
            ),
            RandomEffectWidth {
                subject,
                row,
                found,
                expected,
            } => write!(
                f,
                "subject {subject}, row {row}: random-effect row has {found} entries, expected {expected}"
            ),
            NegativeCount {
                subject,
                row,
                value,
            } => write!(f, "subject {subject}, row {row}: negative count {value}"),
            NonFiniteCovariate { subject, row } => {
                write!(f, "subject {subject}, row {row}: non-finite covariate")
            }
            TooFewObservations { total, k } => write!(
                f,
                "{total} observations cannot identify {k} fixed effects"
            ),
            NoSubjects => write!(f, "dataset has no subjects"),
        }
    }
}

/// Every invariant violation found; empty iff the dataset is usable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks every dataset invariant. Never fails; callers decide what to do
/// with the report.
pub fn validate_dataset<T: Scalar>(data: &PanelDataset<T>) -> ValidationReport {
    let mut issues = Vec::new();
    if data.subjects.is_empty() {
        issues.push(ValidationIssue::NoSubjects);
    }
    for block in &data.subjects {
        let subject = block.subject_id.clone();
        if block.y.is_empty() {
            issues.push(ValidationIssue::EmptySubject {
                subject: subject.clone(),
            });
        }
        if block.x.len() != block.y.len() || block.s.len() != block.y.len() {
            issues.push(ValidationIssue::RowCountMismatch {
                subject: subject.clone(),
                y: block.y.len(),
                x: block.x.len(),
                s: block.s.len(),
            });
        }
        for (row, x) in block.x.iter().enumerate() {
            if x.len() != data.k {
                issues.push(ValidationIssue::FixedEffectWidth {
                    subject: subject.clone(),
                    row,
                    found: x.len(),
                    expected: data.k,
                });
            }
        }
        for (row, s) in block.s.iter().enumerate() {
            if s.len() != data.l {
                issues.push(ValidationIssue::RandomEffectWidth {
                    subject: subject.clone(),
                    row,
                    found: s.len(),
                    expected: data.l,
                });
            }
        }
        for (row, &value) in block.y.iter().enumerate() {
            if value < 0 {
                issues.push(ValidationIssue::NegativeCount {
                    subject: subject.clone(),
                    row,
                    value,
                });
            }
        }
        let rows = block.x.len().max(block.s.len());
        for row in 0..rows {
            let bad = block
                .x
                .get(row)
                .into_iter()
                .chain(block.s.get(row))
                .flatten()
                .any(|v| !v.is_finite());
            if bad {
                issues.push(ValidationIssue::NonFiniteCovariate {
                    subject: subject.clone(),
                    row,
                });
            }
        }
    }
    let total = data.n_total();
    if !data.subjects.is_empty() && total < data.k {
        issues.push(ValidationIssue::TooFewObservations { total, k: data.k });
    }
    ValidationReport { issues }
}

impl<T: Scalar> PanelDataset<T> {
    pub fn new(subjects: Vec<SubjectBlock<T>>, k: usize, l: usize) -> Self {
        Self { subjects, k, l }
    }

    /// Builds and validates in one step.
    pub fn validated(subjects: Vec<SubjectBlock<T>>, k: usize, l: usize) -> Result<Self> {
        let data = Self::new(subjects, k, l);
        let report = validate_dataset(&data);
        if report.is_valid() {
            Ok(data)
        } else {
            Err(Error::InvalidDataset(report.to_string()))
        }
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    /// `Σ_i n_i`.
    pub fn n_total(&self) -> usize {
        self.subjects.iter().map(|s| s.y.len()).sum()
    }

    /// Zero-filled storage with the dataset's ragged shape.
    pub fn zeros_like(&self) -> Vec<Vec<T>> {
        self.subjects.iter().map(|s| vec![T::zero(); s.len()]).collect()
    }

    pub fn filled_like(&self, value: T) -> Vec<Vec<T>> {
        self.subjects.iter().map(|s| vec![value; s.len()]).collect()
    }
}

/// Quantile level, jitter settings, chain length and the master seed.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileSpec<T> {
    pub p: T,
    /// Floor of the latent transform; `z = ln ζ` for `y* ≤ p`.
    pub zeta: T,
    pub m_jitter: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub master_seed: u64,
}

impl<T: Scalar> QuantileSpec<T> {
    pub const DEFAULT_ZETA: f64 = 1e-5;

    /// Twenty jitter replicates, 10 000 retained sweeps after 2 000 of burn-in.
    pub fn new(p: T, master_seed: u64) -> Self {
        Self {
            p,
            zeta: T::of(Self::DEFAULT_ZETA),
            m_jitter: 20,
            iterations: 12_000,
            burn_in: 2_000,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_quantile(self.p)?;
        if !(self.zeta > T::zero() && self.zeta < T::one()) {
            return Err(Error::param(format!("zeta {} outside (0, 1)", self.zeta)));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::param(format!(
                "burn-in {} must be smaller than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.m_jitter < 2 {
            return Err(Error::param(format!(
                "m_jitter = {} but pooling needs at least 2 replicates",
                self.m_jitter
            )));
        }
        Ok(())
    }
}

/// Hyperparameters: `λ² ~ Gamma(a1, rate a2)`, `φ² ~ IG(b1, b2)`,
/// `σ ~ IG(c1, c2)`. The inverse-gamma pairs may be the improper `(-0.5, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorConfig<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Scalar> Default for PriorConfig<T> {
    /// `Gamma(0.01, 0.01)` on `λ²` and the flat `IG(-0.5, 0)` on `σ` and `φ²`.
    fn default() -> Self {
        Self {
            a1: T::of(0.01),
            a2: T::of(0.01),
            b1: T::of(-0.5),
            b2: T::zero(),
            c1: T::of(-0.5),
            c2: T::zero(),
        }
    }
}

impl<T: Scalar> PriorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.a1 > T::zero() && self.a2 > T::zero()) {
            return Err(Error::param(format!(
                "Gamma hyperparameters ({}, {}) must be positive",
                self.a1, self.a2
            )));
        }
        for (name, shape, scale) in [("phi2", self.b1, self.b2), ("sigma", self.c1, self.c2)] {
            let ok = shape.is_finite()
                && scale.is_finite()
                && scale >= T::zero()
                && (shape > T::zero() || scale == T::zero());
            if !ok {
                return Err(Error::param(format!(
                    "inverse-gamma prior on {name} ({shape}, {scale}) is neither proper nor flat"
                )));
            }
        }
        Ok(())
    }
}

/// Full parameter set of one Gibbs sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<T> {
    pub beta: Vec<T>,
    /// One row of length `l` per subject.
    pub alpha: Vec<Vec<T>>,
    /// Mixture latents, shaped like the dataset. Empty in recorded draws
    /// unless latents are retained.
    pub v: Vec<Vec<T>>,
    pub sigma: T,
    pub phi2: T,
    pub g2: Vec<T>,
    pub lambda2: T,
    /// Latent responses, shaped like the dataset.
    pub z: Vec<Vec<T>>,
}

impl<T: Scalar> ChainState<T> {
    /// `β = 0, α = 0, σ = φ² = λ² = 1, g² = 1, v = 1`, `z = 0` until the first
    /// sweep draws it.
    pub fn initial(data: &PanelDataset<T>) -> Self {
        Self {
            beta: vec![T::zero(); data.k],
            alpha: vec![vec![T::zero(); data.l]; data.n_subjects()],
            v: data.filled_like(T::one()),
            sigma: T::one(),
            phi2: T::one(),
            g2: vec![T::one(); data.k],
            lambda2: T::one(),
            z: data.zeros_like(),
        }
    }

    /// Positivity of the scale parameters and finiteness of `z`.
    pub fn satisfies_invariants(&self) -> bool {
        let pos = |x: T| x > T::zero() && x.is_finite();
        pos(self.sigma)
            && pos(self.phi2)
            && pos(self.lambda2)
            && self.g2.iter().all(|&g| pos(g))
            && self.v.iter().flatten().all(|&v| pos(v))
            && self.z.iter().flatten().all(|z| z.is_finite())
            && self.beta.iter().all(|b| b.is_finite())
            && self.alpha.iter().flatten().all(|a| a.is_finite())
    }

    /// `x_ij'β + s_ij'α_i`.
    #[inline]
    pub fn linear_predictor(&self, data: &PanelDataset<T>, i: usize, j: usize) -> T {
        let block = &data.subjects[i];
        dot(&block.x[j], &self.beta) + dot(&block.s[j], &self.alpha[i])
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
