mod common;

use alq_panel::gibbs::{
    update_alpha, update_beta, update_g2, update_lambda2, update_phi2, update_sigma, update_v,
    SigmaRule,
};
use alq_panel::model::{mixture_constants, ChainState, PanelDataset, SubjectBlock};
use alq_panel::RngStream;
use common::{
    batch_means_se, conditional_grid, conditional_ks, ks_distance, mean, priors, scalar_model, Hyper,
    SCALAR_HYPER, SCALAR_P, SCALAR_POINT,
};

#[test]
fn each_conditional_matches_joint() {
    for (name, ks) in conditional_ks(100_000, 31) {
        assert!(ks < 0.02, "{name}: KS {ks}");
    }
}

#[test]
fn literal_sigma_rule_is_not_the_joint_conditional() {
    let (data, state) = scalar_model(&SCALAR_POINT);
    let c = mixture_constants(SCALAR_P);
    let pr = priors(&SCALAR_HYPER);
    let mut rng = RngStream::new(31, 8);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| update_sigma(&state, &data, &c, &pr, SigmaRule::Literal, &mut rng).unwrap())
        .collect();
    let grid = conditional_grid(true, |q, x| q.sigma = x);
    assert!(ks_distance(&draws, |x| grid.cdf(x)) > 0.05);
}

// Order of steps 4 to 8 is a valid scan choice and must not move the target.
#[test]
fn permuted_scan_has_same_stationary_moments() {
    use alq_panel::gibbs::update_latent_z;
    let block = |id: &str, y: Vec<i64>, x: [f64; 2]| SubjectBlock {
        subject_id: id.into(),
        y,
        x: x.iter().map(|&v| vec![v]).collect(),
        s: vec![vec![1.0]; 2],
    };
    let data = PanelDataset::new(
        vec![
            block("1", vec![2, 5], [0.4, 1.1]),
            block("2", vec![0, 3], [0.2, 0.8]),
            block("3", vec![7, 4], [1.5, 0.9]),
        ],
        1,
        1,
    );
    let h = Hyper { a1: 3.0, a2: 2.0, b1: 3.0, b2: 2.0, c1: 3.0, c2: 2.0 };
    let pr = priors(&h);
    let c = mixture_constants(0.5);
    let run = |reverse: bool, stream: u64| {
        let mut rng = RngStream::new(77, stream);
        let mut s = ChainState::initial(&data);
        let mut out = (Vec::new(), Vec::new(), Vec::new());
        for it in 0..102_000 {
            s.z = update_latent_z(&data, 0.5, 1e-5, &mut rng);
            s.v = update_v(&s, &data, &c, &mut rng).unwrap();
            s.sigma = update_sigma(&s, &data, &c, &pr, SigmaRule::JointConsistent, &mut rng).unwrap();
            if reverse {
                s.phi2 = update_phi2(&s, &pr, &mut rng).unwrap();
                s.alpha = update_alpha(&s, &data, &c, &mut rng).unwrap();
                s.lambda2 = update_lambda2(&s, &pr, &mut rng).unwrap();
                s.g2 = update_g2(&s, &mut rng).unwrap();
                s.beta = update_beta(&s, &data, &c, &mut rng).unwrap();
            } else {
                s.beta = update_beta(&s, &data, &c, &mut rng).unwrap();
                s.g2 = update_g2(&s, &mut rng).unwrap();
                s.lambda2 = update_lambda2(&s, &pr, &mut rng).unwrap();
                s.alpha = update_alpha(&s, &data, &c, &mut rng).unwrap();
                s.phi2 = update_phi2(&s, &pr, &mut rng).unwrap();
            }
            if it >= 2000 {
                out.0.push(s.beta[0]);
                out.1.push(s.sigma);
                out.2.push(s.phi2);
            }
        }
        out
    };
    let a = run(false, 1);
    let b = run(true, 2);
    for (name, x, y) in [("beta", &a.0, &b.0), ("sigma", &a.1, &b.1), ("phi2", &a.2, &b.2)] {
        let se = (batch_means_se(x, 50).powi(2) + batch_means_se(y, 50).powi(2)).sqrt();
        let z = (mean(x) - mean(y)) / se;
        assert!(z.abs() < 4.0, "{name}: z = {z}");
    }
}
