mod common;

use alq_panel::jitter::{jitter_latent, latent_transform, predict_from_linear_predictor};
use alq_panel::model::{PanelDataset, SubjectBlock};
use alq_panel::distributions::{sample_poisson, RngStream};

#[test]
fn transform_contracts_hold_on_random_inputs() {
    common::transform_properties(100_000).unwrap();
}

#[test]
fn boundary_and_floor() {
    assert_eq!(latent_transform(0.25f64, 0.25, 1e-5), 1e-5f64.ln());
    assert_eq!(latent_transform(0.0f64, 0.9, 1e-5), 1e-5f64.ln());
    assert_eq!(predict_from_linear_predictor(-40.0f64, 0.25).unwrap(), 0);
    assert!(predict_from_linear_predictor(1e4f64, 0.5).is_err());
}

#[test]
fn two_jitter_passes_have_the_same_law() {
    let mut rng = RngStream::new(5, 0);
    let y: Vec<i64> = (0..20_000).map(|_| sample_poisson(4.0, &mut rng).unwrap() as i64).collect();
    let data = PanelDataset::new(
        vec![SubjectBlock {
            subject_id: "1".into(),
            x: vec![vec![1.0f64]; y.len()],
            s: vec![vec![1.0]; y.len()],
            y,
        }],
        1,
        1,
    );
    let a = jitter_latent(&data, 0.5, 1e-5, &mut RngStream::new(5, 1));
    let b = jitter_latent(&data, 0.5, 1e-5, &mut RngStream::new(5, 2));
    let d = common::ks_two_sample(&a[0], &b[0]);
    assert!(d < 0.02, "{d}");
    assert_ne!(a, b);
}
