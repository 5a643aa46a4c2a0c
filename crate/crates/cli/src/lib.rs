//! Command-line driver for `alq-panel`: simulate panels, fit jitter-averaged
//! quantile models, predict count quantiles and summarize columns.
//!
//! Exit codes: 0 success, 2 bad input or configuration, 3 numerical failure.

pub mod args;
pub mod io;

use std::path::{Path, PathBuf};

use alq_panel::diagnostics::{coefficient_series, export_trace, kde_density, lag1_autocorrelation};
use alq_panel::estimator::{average_jitter_fit, quantile_sorted};
use alq_panel::jitter::predict_count_quantile;
use alq_panel::model::validate_dataset;
use alq_panel::simgen::{gen_study1, gen_study2, progabide_covariates, ProgabideModel};
use alq_panel::{FitOptions, PanelDataset64, PriorConfig64, QuantileSpec64, SigmaRule};

pub use args::{Cli, Command, DiagnoseArgs, FitArgs, ModelChoice, PredictArgs, SimulateArgs, TrialModel};
use io::{ComparisonRow, RunSettings, SummaryFile, TruthFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<alq_panel::Error> for CliError {
    fn from(e: alq_panel::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Fit(a) => fit(&a),
        Command::Predict(a) => predict(&a),
        Command::Diagnose(a) => diagnose(&a),
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let (data, truth) = match a.design {
        args::Design::Study1 => gen_study1::<f64>(a.subjects, a.per, a.seed)?,
        args::Design::Study2 => gen_study2::<f64>(a.subjects, a.per, a.seed)?,
    };
    let out = io::create(&a.output)?;
    io::write_panel_csv(&data, out)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", a.output.display())))?;
    let truth_path = a.truth.clone().unwrap_or_else(|| a.output.with_extension("truth.json"));
    let truth = TruthFile::new(&truth, a.design.name());
    let mut w = io::create(&truth_path)?;
    serde_json::to_writer_pretty(&mut w, &truth)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", truth_path.display())))?;
    std::io::Write::flush(&mut w)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", truth_path.display())))?;
    Ok(())
}

/// Loads the fitting dataset as selected by the model flags.
pub fn load_dataset(a: &FitArgs) -> Result<PanelDataset64, CliError> {
    let data = if a.progabide_covariates {
        let records = io::parse_progabide_csv(io::open(&a.input)?)?;
        let model = match a.progabide_model {
            TrialModel::Intercept => ProgabideModel::RandomIntercept,
            TrialModel::Visit => ProgabideModel::RandomVisit,
        };
        progabide_covariates(&records, model)?
    } else {
        let mut data = io::parse_panel_file(&a.input)?;
        if a.model == ModelChoice::RandomIntercept {
            for block in &mut data.subjects {
                block.s = vec![vec![1.0]; block.len()];
            }
            data.l = 1;
        }
        data
    };
    let report = validate_dataset(&data);
    if !report.is_valid() {
        return Err(CliError::input(format!("invalid dataset:\n{report}")));
    }
    Ok(data)
}

/// Directory of one quantile's artifacts, e.g. `q0.5`.
pub fn quantile_dir(output: &Path, p: f64) -> PathBuf {
    output.join(format!("q{p}"))
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    if a.quantiles.is_empty() {
        return Err(CliError::input("no quantiles given"));
    }
    if let Some(p) = a.quantiles.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(CliError::input(format!("quantile {p} is outside (0, 1)")));
    }
    let data = load_dataset(a)?;
    let priors = PriorConfig64 {
        a1: a.a1,
        a2: a.a2,
        b1: a.b1,
        b2: a.b2,
        c1: a.c1,
        c2: a.c2,
    };
    priors.validate()?;
    let rule = if a.paper_literal_sigma {
        SigmaRule::Literal
    } else {
        SigmaRule::JointConsistent
    };
    let mut options = FitOptions {
        level: a.level,
        threads: a.threads.max(1),
        ..FitOptions::default()
    };
    options.gibbs.thin = a.thin;
    options.gibbs.sigma_rule = rule;
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::input(format!("level {} is outside (0, 1)", a.level)));
    }

    // validate every quantile's spec before running anything
    let specs: Vec<QuantileSpec64> = a
        .quantiles
        .iter()
        .map(|&p| {
            let spec = QuantileSpec64 {
                zeta: a.zeta,
                m_jitter: a.m_jitter,
                iterations: a.iterations,
                burn_in: a.burn_in,
                ..QuantileSpec64::new(p, a.seed)
            };
            spec.validate().map(|_| spec)
        })
        .collect::<Result<_, _>>()?;
    let mut probe = options.gibbs;
    probe.iterations = a.iterations;
    probe.burn_in = a.burn_in;
    probe.validate()?;

    std::fs::create_dir_all(&a.output)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", a.output.display())))?;
    let settings = RunSettings {
        seed: a.seed,
        iterations: a.iterations,
        burn_in: a.burn_in,
        thin: a.thin,
        zeta: a.zeta,
        sigma_rule: match rule {
            SigmaRule::JointConsistent => "joint".into(),
            SigmaRule::Literal => "literal".into(),
        },
        priors: [a.a1, a.a2, a.b1, a.b2, a.c1, a.c2],
    };

    let mut comparison = Vec::with_capacity(specs.len());
    for spec in &specs {
        let fit = average_jitter_fit(&data, spec, &priors, &options)?;
        let dir = quantile_dir(&a.output, spec.p);
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        SummaryFile::new(&fit.summary, &data, settings.clone()).write(&dir.join("summary.json"))?;

        let first = &fit.chains[0];
        let mut params: Vec<String> = (1..=data.k).map(|h| format!("beta{h}")).collect();
        params.extend(["sigma", "phi2", "lambda2"].map(String::from));
        for name in &params {
            let rows = export_trace(first, name)?;
            io::write_columns_to(&dir.join(format!("trace_{name}.csv")), ("iter", "value"), rows)?;
            let values = coefficient_series(first, name)?;
            // a constant series has no density; leave only the header
            let density = kde_density(&values, a.grid).unwrap_or_default();
            io::write_columns_to(&dir.join(format!("density_{name}.csv")), ("x", "density"), density)?;
        }
        comparison.push(ComparisonRow {
            quantile: spec.p,
            nll: fit.summary.avg_nll,
            dic: fit.summary.avg_dic,
            p_d: fit.summary.avg_p_d,
        });
    }
    io::write_comparison(&a.output.join("comparison.csv"), &comparison)
}

pub fn predict(a: &PredictArgs) -> Result<(), CliError> {
    let summary = SummaryFile::read(&a.summary)?;
    let (layout, rows) = match io::read_rows(io::open(&a.input)?, false) {
        Ok(r) => r,
        Err(_) if std::fs::metadata(&a.input).map(|m| m.len() == 0).unwrap_or(false) => {
            return io::write_columns_to(&a.output, ("row", "prediction"), Vec::<(usize, u64)>::new());
        }
        Err(e) => return Err(e),
    };
    if layout.x.len() != summary.k {
        return Err(CliError::input(format!(
            "input has {} fixed-effect columns, the fit has {}",
            layout.x.len(),
            summary.k
        )));
    }
    let l = if layout.s.is_empty() { 1 } else { layout.s.len() };
    if l != summary.l {
        return Err(CliError::input(format!(
            "input has {l} random-effect columns, the fit has {}",
            summary.l
        )));
    }
    let beta = summary.beta();
    let zero = vec![0.0; summary.l];
    let mut out = Vec::with_capacity(rows.len());
    for r in &rows {
        let alpha = summary
            .subjects
            .iter()
            .find(|s| s.id == r.subject)
            .map_or(&zero, |s| &s.alpha_mean);
        let q = predict_count_quantile(&beta, alpha, &r.x, &r.s, summary.p)?;
        out.push((r.row, q));
    }
    io::write_columns_to(&a.output, ("row", "prediction"), out)
}

pub fn diagnose(a: &DiagnoseArgs) -> Result<(), CliError> {
    let mut values = io::read_column(&a.input, &a.column)?;
    let density = kde_density(&values, a.grid)?;
    if let Some(path) = &a.output {
        io::write_columns_to(path, ("x", "density"), density)?;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let lag1 = lag1_autocorrelation(&values);
    values.sort_by(|x, y| x.total_cmp(y));
    println!("column,n,mean,sd,q025,median,q975,lag1");
    println!(
        "{},{},{},{},{},{},{},{}",
        a.column,
        values.len(),
        mean,
        sd,
        quantile_sorted(&values, 0.025),
        quantile_sorted(&values, 0.5),
        quantile_sorted(&values, 0.975),
        lag1.map_or(String::from("NA"), |v| v.to_string())
    );
    Ok(())
}
