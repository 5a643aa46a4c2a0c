//! File formats: the long-format panel CSV, the trial CSV, summaries and
//! plot-ready tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use alq_panel::estimator::CoefficientSummary;
use alq_panel::simgen::{ProgabideRecord, SimTruth};
use alq_panel::{PanelDataset64, PosteriorSummary64, SubjectBlock64};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Column layout of a panel CSV header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PanelLayout {
    pub subject: usize,
    pub y: Option<usize>,
    pub x: Vec<usize>,
    pub s: Vec<usize>,
}

impl PanelLayout {
    /// `subject`, optionally `y`, then `x1..xk` and optional `s1..sl`, in any
    /// column order. Numbered columns must be contiguous from 1.
    pub fn from_header(header: &csv::StringRecord, require_y: bool) -> Result<Self, CliError> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let subject = find("subject").ok_or_else(|| CliError::input("missing column `subject`"))?;
        let y = find("y");
        if require_y && y.is_none() {
            return Err(CliError::input("missing column `y`"));
        }
        let numbered = |prefix: &str| -> Result<Vec<usize>, CliError> {
            let mut cols = Vec::new();
            while let Some(c) = find(&format!("{prefix}{}", cols.len() + 1)) {
                cols.push(c);
            }
            let stray = header.iter().find(|h| {
                h.trim()
                    .strip_prefix(prefix)
                    .and_then(|n| n.parse::<usize>().ok())
                    .is_some_and(|n| n == 0 || n > cols.len())
            });
            if let Some(h) = stray {
                return Err(CliError::input(format!(
                    "column `{h}` breaks the {prefix}1..{prefix}n sequence"
                )));
            }
            Ok(cols)
        };
        let x = numbered("x")?;
        if x.is_empty() {
            return Err(CliError::input("missing column `x1`"));
        }
        let s = numbered("s")?;
        Ok(Self { subject, y, x, s })
    }
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn real(record: &csv::StringRecord, col: usize, name: &str) -> Result<f64, CliError> {
    let raw = &record[col];
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::input(format!("line {}: {name} value `{raw}` is not a finite number", line_of(record))))
}

fn count(record: &csv::StringRecord, col: usize) -> Result<i64, CliError> {
    let raw = &record[col];
    raw.parse::<i64>().map_err(|_| {
        CliError::input(format!("line {}: y value `{raw}` is not an integer count", line_of(record)))
    })
}

/// One parsed covariate row, tagged with its subject and 1-based data row.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariateRow {
    pub row: usize,
    pub subject: String,
    pub y: Option<i64>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
}

/// Reads every row of a panel CSV without grouping. Without s-columns each
/// row gets `s = (1)`.
pub fn read_rows<R: Read>(source: R, require_y: bool) -> Result<(PanelLayout, Vec<CovariateRow>), CliError> {
    let mut rdr = reader(source);
    let header = match rdr.headers() {
        Ok(h) if h.iter().all(|c| c.is_empty()) => {
            return Err(CliError::input("empty input: no header line"))
        }
        Ok(h) => h.clone(),
        Err(e) => return Err(CliError::input(format!("cannot read header: {e}"))),
    };
    let layout = PanelLayout::from_header(&header, require_y)?;
    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::input(format!("line {line}: {e}"))
        })?;
        let y = layout.y.map(|c| count(&record, c)).transpose()?;
        let x = layout
            .x
            .iter()
            .enumerate()
            .map(|(h, &c)| real(&record, c, &format!("x{}", h + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let s = if layout.s.is_empty() {
            vec![1.0]
        } else {
            layout
                .s
                .iter()
                .enumerate()
                .map(|(h, &c)| real(&record, c, &format!("s{}", h + 1)))
                .collect::<Result<Vec<_>, _>>()?
        };
        let subject = record[layout.subject].to_string();
        if subject.is_empty() {
            return Err(CliError::input(format!("line {}: empty subject id", line_of(&record))));
        }
        rows.push(CovariateRow { row: n + 1, subject, y, x, s });
    }
    Ok((layout, rows))
}

/// Groups rows by subject in first-seen order.
pub fn group_rows(rows: Vec<CovariateRow>, k: usize, l: usize) -> PanelDataset64 {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut subjects: Vec<SubjectBlock64> = Vec::new();
    for r in rows {
        let slot = *index.entry(r.subject.clone()).or_insert_with(|| {
            subjects.push(SubjectBlock64 {
                subject_id: r.subject.clone(),
                y: Vec::new(),
                x: Vec::new(),
                s: Vec::new(),
            });
            subjects.len() - 1
        });
        let block = &mut subjects[slot];
        block.y.push(r.y.unwrap_or(0));
        block.x.push(r.x);
        block.s.push(r.s);
    }
    PanelDataset64::new(subjects, k, l)
}

/// Parses and groups a panel CSV: header `subject,y,x1..xk[,s1..sl]`.
pub fn parse_panel_csv<R: Read>(source: R) -> Result<PanelDataset64, CliError> {
    let (layout, rows) = read_rows(source, true)?;
    let l = layout.s.len().max(1);
    Ok(group_rows(rows, layout.x.len(), l))
}

pub fn parse_panel_file(path: &Path) -> Result<PanelDataset64, CliError> {
    parse_panel_csv(open(path)?)
}

/// Trial CSV: `subject,seizures,baseline,age,treatment,visit`.
pub fn parse_progabide_csv<R: Read>(source: R) -> Result<Vec<ProgabideRecord>, CliError> {
    let mut rdr = reader(source);
    let header = rdr
        .headers()
        .map_err(|e| CliError::input(format!("cannot read header: {e}")))?
        .clone();
    let mut cols = [0usize; 6];
    for (slot, name) in ["subject", "seizures", "baseline", "age", "treatment", "visit"].iter().enumerate() {
        cols[slot] = header
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| CliError::input(format!("missing column `{name}`")))?;
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::input(e.to_string()))?;
        let line = line_of(&record);
        let int = |c: usize, name: &str| {
            record[c]
                .parse::<i64>()
                .map_err(|_| CliError::input(format!("line {line}: {name} `{}` is not an integer", &record[c])))
        };
        let treatment = match int(cols[4], "treatment")? {
            0 => false,
            1 => true,
            other => return Err(CliError::input(format!("line {line}: treatment {other} is not 0 or 1"))),
        };
        let visit = u8::try_from(int(cols[5], "visit")?)
            .map_err(|_| CliError::input(format!("line {line}: visit out of range")))?;
        out.push(ProgabideRecord {
            subject: record[cols[0]].to_string(),
            seizures: int(cols[1], "seizures")?,
            baseline: real(&record, cols[2], "baseline")?,
            age: real(&record, cols[3], "age")?,
            treatment,
            visit,
        });
    }
    Ok(out)
}

pub fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::input(format!("cannot write {}: {e}", path.display()))
}

/// Writes a dataset in the panel schema, subjects in order.
pub fn write_panel_csv<W: Write>(data: &PanelDataset64, mut out: W) -> std::io::Result<()> {
    let mut header = vec!["subject".to_string(), "y".to_string()];
    header.extend((1..=data.k).map(|h| format!("x{h}")));
    header.extend((1..=data.l).map(|h| format!("s{h}")));
    writeln!(out, "{}", header.join(","))?;
    for block in &data.subjects {
        for j in 0..block.len() {
            write!(out, "{},{}", block.subject_id, block.y[j])?;
            for v in block.x[j].iter().chain(&block.s[j]) {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
    }
    out.flush()
}

/// Two-column numeric table with the given header.
pub fn write_columns<W: Write, A: std::fmt::Display, B: std::fmt::Display>(
    header: (&str, &str),
    rows: impl IntoIterator<Item = (A, B)>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (a, b) in rows {
        writeln!(out, "{a},{b}")?;
    }
    out.flush()
}

pub fn write_columns_to<A: std::fmt::Display, B: std::fmt::Display>(
    path: &Path,
    header: (&str, &str),
    rows: impl IntoIterator<Item = (A, B)>,
) -> Result<(), CliError> {
    write_columns(header, rows, create(path)?).map_err(io_err(path))
}

/// Reads one numeric column of a CSV file by name.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = reader(open(path)?);
    let header = rdr
        .headers()
        .map_err(|e| CliError::input(format!("cannot read header: {e}")))?
        .clone();
    let col = header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::input(format!("missing column `{column}`")))?;
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| CliError::input(e.to_string()))?;
            real(&r, col, column)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub name: String,
    pub avg_post_mean: f64,
    pub pooled_sd: f64,
    pub avg_ci_low: f64,
    pub avg_ci_high: f64,
    pub replicate_means: Vec<f64>,
    pub replicate_ci_widths: Vec<f64>,
}

impl From<&CoefficientSummary<f64>> for CoefficientRecord {
    fn from(c: &CoefficientSummary<f64>) -> Self {
        Self {
            name: c.name.clone(),
            avg_post_mean: c.avg_post_mean,
            pooled_sd: c.pooled_sd,
            avg_ci_low: c.avg_ci_low,
            avg_ci_high: c.avg_ci_high,
            replicate_means: c.replicate_means.clone(),
            replicate_ci_widths: c.replicate_ci_widths.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub alpha_mean: Vec<f64>,
}

/// Sampler settings echoed into the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub zeta: f64,
    pub sigma_rule: String,
    pub priors: [f64; 6],
}

/// Serialized form of a jitter-averaged fit at one quantile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub p: f64,
    pub k: usize,
    pub l: usize,
    pub m_jitter: usize,
    pub retained: usize,
    pub level: f64,
    pub coefficients: Vec<CoefficientRecord>,
    pub hyperparameters: Vec<CoefficientRecord>,
    pub subjects: Vec<SubjectRecord>,
    pub avg_nll: f64,
    pub avg_dic: f64,
    pub avg_p_d: f64,
    pub settings: RunSettings,
}

impl SummaryFile {
    pub fn new(summary: &PosteriorSummary64, data: &PanelDataset64, settings: RunSettings) -> Self {
        Self {
            p: summary.p,
            k: data.k,
            l: data.l,
            m_jitter: summary.m_jitter,
            retained: summary.retained,
            level: summary.level,
            coefficients: summary.coefficients.iter().map(Into::into).collect(),
            hyperparameters: summary.hyperparameters.iter().map(Into::into).collect(),
            subjects: data
                .subjects
                .iter()
                .zip(&summary.alpha_means)
                .map(|(b, a)| SubjectRecord {
                    id: b.subject_id.clone(),
                    alpha_mean: a.clone(),
                })
                .collect(),
            avg_nll: summary.avg_nll,
            avg_dic: summary.avg_dic,
            avg_p_d: summary.avg_p_d,
            settings,
        }
    }

    pub fn beta(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.avg_post_mean).collect()
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        serde_json::from_reader(std::io::BufReader::new(open(path)?))
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, self)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        writeln!(out).and_then(|_| out.flush()).map_err(io_err(path))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub design: String,
    pub beta_true: Vec<f64>,
    pub alpha_true: Vec<Vec<f64>>,
}

impl TruthFile {
    pub fn new(truth: &SimTruth<f64>, design: &str) -> Self {
        Self {
            design: design.to_string(),
            beta_true: truth.beta_true.clone(),
            alpha_true: truth.alpha_true.clone(),
        }
    }
}

/// One row of `comparison.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantile: f64,
    pub nll: f64,
    pub dic: f64,
    pub p_d: f64,
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<(), CliError> {
    let mut out = create(path)?;
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "quantile,nll,dic,p_d")?;
        for r in rows {
            writeln!(out, "{},{},{},{}", r.quantile, r.nll, r.dic, r.p_d)?;
        }
        out.flush()
    };
    body().map_err(io_err(path))
}

pub fn read_comparison(path: &Path) -> Result<Vec<ComparisonRow>, CliError> {
    let mut rdr = reader(open(path)?);
    rdr.deserialize()
        .map(|r| r.map_err(|e| CliError::input(format!("{}: {e}", path.display()))))
        .collect()
}
