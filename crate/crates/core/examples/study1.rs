//! Simulation study 1 at the three quartiles.
//!
//! `cargo run --release -p alq-panel --example study1 -- [seed] [m_jitter] [literal]`

use alq_panel::estimator::average_jitter_fit;
use alq_panel::simgen::gen_study1;
use alq_panel::{FitOptions, SigmaRule, PriorConfig64, QuantileSpec64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    let m: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let literal = args.next().as_deref() == Some("literal");
    let mut options = FitOptions::default();
    if literal {
        options.gibbs.sigma_rule = SigmaRule::Literal;
    }
    let (data, truth) = gen_study1::<f64>(20, 5, seed)?;
    println!("true beta {:?}", truth.beta_true);
    for p in [0.25, 0.5, 0.75] {
        let mut spec = QuantileSpec64::new(p, seed);
        spec.m_jitter = m;
        let start = std::time::Instant::now();
        let fit = average_jitter_fit(&data, &spec, &PriorConfig64::default(), &options)?;
        let s = &fit.summary;
        println!("p = {p}  ({:.1?})", start.elapsed());
        for c in s.coefficients.iter().chain(&s.hyperparameters) {
            println!(
                "  {:8} mean {:9.4}  sd {:7.4}  ci [{:8.4}, {:8.4}]",
                c.name, c.avg_post_mean, c.pooled_sd, c.avg_ci_low, c.avg_ci_high
            );
        }
        println!("  nll {:.2}  dic {:.2}  p_d {:.2}", s.avg_nll, s.avg_dic, s.avg_p_d);
    }
    Ok(())
}
