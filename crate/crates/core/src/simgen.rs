//! Simulated panels with Poisson counts and the covariate construction for
//! the epilepsy (Progabide) trial layout.

use crate::distributions::{sample_poisson, sample_standard_normal, sample_uniform01, RngStream, StreamKey, StreamPhase};
use crate::error::{Error, Result};
use crate::model::{PanelDataset, SubjectBlock};
use crate::scalar::Scalar;

/// Largest count the generators will emit.
pub const MAX_COUNT: u64 = i32::MAX as u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    /// `μ = exp(x'β + α_i)`, `s = (1)`.
    RandomIntercept,
    /// `μ = exp(x'β + α_1i + s1 α_2i)`, `s = (1, s1)` with `s1 ~ U[0, 1)`.
    RandomInterceptSlope,
}

/// Parameters the data were generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct SimTruth<T> {
    pub beta_true: Vec<T>,
    pub alpha_true: Vec<Vec<T>>,
    pub design: Design,
}

/// Fixed effects used by both simulation studies.
pub const STUDY_BETA: [f64; 3] = [1.0, 3.0, 5.0];

/// Generic generator: `x ~ U[0,1)^k`, `α_i ~ N(0, alpha_sd² I)`, Poisson
/// counts with log-mean `x'β + s'α_i`.
pub fn generate<T: Scalar>(
    design: Design,
    n_subjects: usize,
    n_per: usize,
    beta: &[T],
    alpha_sd: T,
    seed: u64,
) -> Result<(PanelDataset<T>, SimTruth<T>)> {
    if n_subjects == 0 || n_per == 0 {
        return Err(Error::param("need at least one subject and one observation"));
    }
    let mut rng: RngStream = StreamKey::new(seed, 0, 0, StreamPhase::Simulation).stream();
    let l = match design {
        Design::RandomIntercept => 1,
        Design::RandomInterceptSlope => 2,
    };
    let k = beta.len();
    let mut subjects = Vec::with_capacity(n_subjects);
    let mut alpha_true = Vec::with_capacity(n_subjects);
    for i in 0..n_subjects {
        let alpha: Vec<T> = (0..l)
            .map(|_| alpha_sd * sample_standard_normal::<T>(&mut rng))
            .collect();
        let mut block = SubjectBlock {
            subject_id: (i + 1).to_string(),
            y: Vec::with_capacity(n_per),
            x: Vec::with_capacity(n_per),
            s: Vec::with_capacity(n_per),
        };
        for _ in 0..n_per {
            let x: Vec<T> = (0..k).map(|_| sample_uniform01(&mut rng)).collect();
            let s: Vec<T> = match design {
                Design::RandomIntercept => vec![T::one()],
                Design::RandomInterceptSlope => vec![T::one(), sample_uniform01(&mut rng)],
            };
            let eta = crate::model::dot(&x, beta) + crate::model::dot(&s, &alpha);
            let count = sample_poisson(eta.as_f64().exp(), &mut rng)?;
            if count > MAX_COUNT {
                return Err(Error::param(format!(
                    "simulated count {count} exceeds {MAX_COUNT}"
                )));
            }
            block.y.push(count as i64);
            block.x.push(x);
            block.s.push(s);
        }
        subjects.push(block);
        alpha_true.push(alpha);
    }
    Ok((
        PanelDataset::new(subjects, k, l),
        SimTruth {
            beta_true: beta.to_vec(),
            alpha_true,
            design,
        },
    ))
}

/// Random-intercept study: `β = (1, 3, 5)`, `α_i ~ N(0, 1)`.
pub fn gen_study1<T: Scalar>(
    n_subjects: usize,
    n_per: usize,
    seed: u64,
) -> Result<(PanelDataset<T>, SimTruth<T>)> {
    let beta: Vec<T> = STUDY_BETA.iter().map(|&b| T::of(b)).collect();
    generate(Design::RandomIntercept, n_subjects, n_per, &beta, T::one(), seed)
}

/// Random intercept and slope: as study 1 plus `s1 α_2i`, with
/// `(α_1i, α_2i) ~ N(0, I_2)`.
pub fn gen_study2<T: Scalar>(
    n_subjects: usize,
    n_per: usize,
    seed: u64,
) -> Result<(PanelDataset<T>, SimTruth<T>)> {
    let beta: Vec<T> = STUDY_BETA.iter().map(|&b| T::of(b)).collect();
    generate(
        Design::RandomInterceptSlope,
        n_subjects,
        n_per,
        &beta,
        T::one(),
        seed,
    )
}

/// One post-randomization visit of the epilepsy trial.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgabideRecord {
    pub subject: String,
    pub seizures: i64,
    /// Seizure count over the 8-week baseline period.
    pub baseline: f64,
    pub age: f64,
    pub treatment: bool,
    /// Visit number 1 to 4.
    pub visit: u8,
}

/// Random-effect structure for the trial models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProgabideModel {
    /// `s = (1)`.
    RandomIntercept,
    /// `s = (1, Visit4)`.
    RandomVisit,
}

/// Fixed-effect row `(1, Base, Trt, LnAge, Visit4, Base·Trt)` with
/// `Base = ln(baseline/4)`, grouped by subject in first-seen order.
pub fn progabide_covariates<T: Scalar>(
    records: &[ProgabideRecord],
    model: ProgabideModel,
) -> Result<PanelDataset<T>> {
    let mut subjects: Vec<SubjectBlock<T>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (n, rec) in records.iter().enumerate() {
        if !(rec.baseline > 0.0) {
            return Err(Error::Ingestion {
                index: n,
                message: format!("baseline count {} must be positive", rec.baseline),
            });
        }
        if !(rec.age > 0.0) {
            return Err(Error::Ingestion {
                index: n,
                message: format!("age {} must be positive", rec.age),
            });
        }
        if !(1..=4).contains(&rec.visit) {
            return Err(Error::Ingestion {
                index: n,
                message: format!("visit {} outside 1..4", rec.visit),
            });
        }
        let base = (rec.baseline / 4.0).ln();
        let trt = if rec.treatment { 1.0 } else { 0.0 };
        let visit4 = if rec.visit == 4 { 1.0 } else { 0.0 };
        let x = [1.0, base, trt, rec.age.ln(), visit4, base * trt]
            .iter()
            .map(|&v| T::of(v))
            .collect();
        let s = match model {
            ProgabideModel::RandomIntercept => vec![T::one()],
            ProgabideModel::RandomVisit => vec![T::one(), T::of(visit4)],
        };
        let slot = *index.entry(rec.subject.clone()).or_insert_with(|| {
            subjects.push(SubjectBlock {
                subject_id: rec.subject.clone(),
                y: Vec::new(),
                x: Vec::new(),
                s: Vec::new(),
            });
            subjects.len() - 1
        });
        let block = &mut subjects[slot];
        block.y.push(rec.seizures);
        block.x.push(x);
        block.s.push(s);
    }
    let l = match model {
        ProgabideModel::RandomIntercept => 1,
        ProgabideModel::RandomVisit => 2,
    };
    Ok(PanelDataset::new(subjects, 6, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(baseline: f64, age: f64, treatment: bool, visit: u8) -> ProgabideRecord {
        ProgabideRecord {
            subject: "1".into(),
            seizures: 3,
            baseline,
            age,
            treatment,
            visit,
        }
    }

    #[test]
    fn covariate_row() {
        let age = 3f64.exp();
        let data: PanelDataset<f64> =
            progabide_covariates(&[record(8.0, age, true, 4)], ProgabideModel::RandomVisit).unwrap();
        let x = &data.subjects[0].x[0];
        let want = [1.0, 2f64.ln(), 1.0, 3.0, 1.0, 2f64.ln()];
        for (a, b) in x.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{x:?}");
        }
        assert_eq!(data.subjects[0].s[0], vec![1.0, 1.0]);
    }

    #[test]
    fn untreated_and_early_visits() {
        let data: PanelDataset<f64> = progabide_covariates(
            &[record(40.0, 30.0, false, 2)],
            ProgabideModel::RandomIntercept,
        )
        .unwrap();
        let x = &data.subjects[0].x[0];
        assert_eq!(x[5], 0.0);
        assert_eq!(x[4], 0.0);
        assert_eq!(data.l, 1);
    }

    #[test]
    fn bad_records_name_their_index() {
        let recs = [record(8.0, 30.0, true, 1), record(0.0, 30.0, true, 2)];
        match progabide_covariates::<f64>(&recs, ProgabideModel::RandomIntercept) {
            Err(Error::Ingestion { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(progabide_covariates::<f64>(&[record(8.0, -1.0, true, 1)], ProgabideModel::RandomIntercept).is_err());
        assert!(progabide_covariates::<f64>(&[record(8.0, 30.0, true, 5)], ProgabideModel::RandomIntercept).is_err());
    }
}
