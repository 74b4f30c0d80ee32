//! Delimiter-separated report tables: per-carrier fits, consolidated triples,
//! fit curves, and sample dumps.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::derive::{consolidate, Deviation};
use crate::error::{Error, Result, Violation};
use crate::model::{B1Spec, Frequency, LognormalFit, RcsTriple};
use crate::pipeline::GroupFit;
use crate::sampler::RcsDraw;
use crate::statfit::CurvePoint;

/// One row of the per-(target, carrier) fit table. Only the identifying
/// columns and (mu, sigma) are required when reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub target: String,
    pub freq_ghz: f64,
    pub mu: f64,
    pub sigma: f64,
    #[serde(default)]
    pub ks_e2: Option<f64>,
    #[serde(default)]
    pub mse_e3: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub discarded: Option<usize>,
    #[serde(default)]
    pub a_dbsm: Option<f64>,
    #[serde(default)]
    pub b2_db: Option<f64>,
}

impl From<&GroupFit> for FitRow {
    fn from(g: &GroupFit) -> Self {
        FitRow {
            target: g.target.clone(),
            freq_ghz: g.freq.ghz(),
            mu: g.fit.mu,
            sigma: g.fit.sigma,
            ks_e2: Some(g.fit.ks * 1e2),
            mse_e3: Some(g.fit.mse * 1e3),
            n: Some(g.fit.n),
            discarded: Some(g.discarded),
            a_dbsm: g.terms.map(|t| t.a_dbsm),
            b2_db: g.terms.map(|t| t.b2_db),
        }
    }
}

/// Consolidated triple row; B1 is reported as its constant dB value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRow {
    pub target: String,
    pub a_dbsm: f64,
    pub b1_db: f64,
    pub b2_db: f64,
    pub cap_k: f64,
}

impl TripleRow {
    pub fn triple(&self) -> RcsTriple {
        RcsTriple::new(
            self.a_dbsm,
            B1Spec::Constant { db: self.b1_db },
            self.b2_db,
            self.cap_k,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub target: String,
    pub freq_ghz: f64,
    pub x: f64,
    pub empirical_pdf: f64,
    pub fitted_pdf: f64,
    pub empirical_cdf: f64,
    pub fitted_cdf: f64,
}

impl CurveRow {
    pub fn new(target: &str, freq: Frequency, p: &CurvePoint) -> Self {
        CurveRow {
            target: target.to_string(),
            freq_ghz: freq.ghz(),
            x: p.x,
            empirical_pdf: p.empirical_pdf,
            fitted_pdf: p.fitted_pdf,
            empirical_cdf: p.empirical_cdf,
            fitted_cdf: p.fitted_cdf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: usize,
    pub b2_linear: f64,
    pub rcs_m2: f64,
    pub rcs_dbsm: f64,
}

pub fn sample_rows(draws: &[RcsDraw]) -> Vec<SampleRow> {
    draws
        .iter()
        .enumerate()
        .map(|(index, d)| SampleRow {
            index,
            b2_linear: d.b2_linear,
            rcs_m2: d.rcs_m2,
            rcs_dbsm: d.rcs_dbsm(),
        })
        .collect()
}

/// Serializes `rows` as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Parses CSV rows; every malformed row is reported with its 1-based line.
pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(input: R, what: &str) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for rec in reader.deserialize::<T>() {
        match rec {
            Ok(r) => rows.push(r),
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize);
                let msg = format!("{what}: {}", e.kind_message());
                violations.push(match line {
                    Some(l) => Violation::at_line(l, msg),
                    None => Violation::new(msg),
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(rows)
    } else {
        Err(Error::Validation(violations))
    }
}

trait KindMessage {
    fn kind_message(&self) -> String;
}

impl KindMessage for csv::Error {
    fn kind_message(&self) -> String {
        match self.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
            _ => self.to_string(),
        }
    }
}

pub fn read_fit_table(path: impl AsRef<Path>) -> Result<Vec<FitRow>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, "fit table")
}

pub fn read_triple_table(path: impl AsRef<Path>) -> Result<Vec<TripleRow>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, "triple table")
}

/// Groups fit rows by target and consolidates each target's carriers.
/// Zero-spread rows are all reported, by line, before any consolidation.
pub fn derive_triples(rows: &[FitRow], cap_k: f64) -> Result<Vec<TripleRow>> {
    if rows.is_empty() {
        return Err(Error::invalid("fit table has no rows"));
    }
    let mut violations = Vec::new();
    let mut by_target: BTreeMap<&str, BTreeMap<Frequency, LognormalFit>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        // Header is line 1.
        let line = i + 2;
        let freq = match Frequency::from_ghz(r.freq_ghz) {
            Ok(f) => f,
            Err(e) => {
                violations.push(Violation::at_line(line, e.to_string()));
                continue;
            }
        };
        if r.sigma == 0.0 {
            violations.push(Violation::at_line(
                line,
                format!("{} at {freq} is degenerate (sigma = 0)", r.target),
            ));
            continue;
        }
        if !r.mu.is_finite() || !(r.sigma > 0.0) || !r.sigma.is_finite() {
            violations.push(Violation::at_line(
                line,
                format!("{} at {freq}: need finite mu and sigma > 0", r.target),
            ));
            continue;
        }
        let fit = LognormalFit {
            n: r.n.unwrap_or(0),
            ks: r.ks_e2.map_or(0.0, |k| k * 1e-2),
            mse: r.mse_e3.map_or(0.0, |m| m * 1e-3),
            ..LognormalFit::from_params(r.mu, r.sigma)
        };
        if by_target
            .entry(&r.target)
            .or_default()
            .insert(freq, fit)
            .is_some()
        {
            violations.push(Violation::at_line(
                line,
                format!("{} at {freq} appears more than once", r.target),
            ));
        }
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    by_target
        .into_iter()
        .map(|(target, fits)| {
            let t = consolidate(&fits, B1Spec::default(), cap_k)
                .map_err(|e| Error::invalid(format!("{target}: {e}")))?;
            Ok(TripleRow {
                target: target.to_string(),
                a_dbsm: t.a_dbsm,
                b1_db: 0.0,
                b2_db: t.b2_db,
                cap_k: t.cap_k,
            })
        })
        .collect()
}

/// Plain-text comparison report, one `key: value` per line.
pub fn format_deviation(label: &str, standard: &str, d: &Deviation) -> String {
    let verdict = |x: f64| {
        if x <= d.tolerance_db {
            "within"
        } else {
            "outside"
        }
    };
    format!(
        "target: {label}\nstandard: {standard}\ndelta_a_db: {:.4}\ndelta_b2_db: {:.4}\ntolerance_db: {}\na_verdict: {}\nb2_verdict: {}\nverdict: {}\n",
        d.delta_a_db,
        d.delta_b2_db,
        d.tolerance_db,
        verdict(d.delta_a_db),
        verdict(d.delta_b2_db),
        if d.within { "within" } else { "outside" },
    )
}
