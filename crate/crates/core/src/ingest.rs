//! Reading and writing sweep datasets, run configuration, and calibration
//! sidecars.
//!
//! A dataset file holds one JSON object per line:
//!
//! ```text
//! {"freq_ghz":28,"kind":"target","target":"small_uav","snapshot":0,"taps_re":[..],"taps_im":[..]}
//! ```
//!
//! `kind` is one of `reference`, `target`, `calibration`; `target` is required
//! exactly when `kind` is `target`. Blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::model::{
    CirRecord, Frequency, Geometry, SweepKind, Validate, DEFAULT_BASELINE_M, DEFAULT_CAP_K,
    DEFAULT_MAX_OFFSET_DEG, DEFAULT_TARGET_DISTANCE_M,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    freq_ghz: f64,
    kind: SweepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    snapshot: u64,
    taps_re: Vec<f64>,
    taps_im: Vec<f64>,
}

/// A validated collection of reference, target, and calibration sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    /// Sorted by (frequency, kind, target, snapshot).
    records: Vec<CirRecord>,
    pub geometry: Geometry,
}

fn record_key(r: &CirRecord) -> (Frequency, SweepKind, Option<&str>, u64) {
    (r.freq, r.kind, r.target_id.as_deref(), r.snapshot_index)
}

impl SweepDataset {
    /// Builds and validates a dataset. All violations are reported together.
    pub fn new(mut records: Vec<CirRecord>, geometry: Geometry) -> Result<Self> {
        records.sort_by(|a, b| record_key(a).cmp(&record_key(b)));
        let ds = Self { records, geometry };
        ds.validate()?;
        Ok(ds)
    }

    pub fn records(&self) -> &[CirRecord] {
        &self.records
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Result<Self> {
        geometry.validate()?;
        self.geometry = geometry;
        Ok(self)
    }

    pub fn frequencies(&self) -> BTreeSet<Frequency> {
        self.records.iter().map(|r| r.freq).collect()
    }

    pub fn targets(&self) -> BTreeSet<String> {
        self.records
            .iter()
            .filter_map(|r| r.target_id.clone())
            .collect()
    }

    /// Records of one kind at one frequency, in snapshot order. `target` is
    /// only consulted for [`SweepKind::Target`].
    pub fn select<'a>(
        &'a self,
        freq: Frequency,
        kind: SweepKind,
        target: Option<&'a str>,
    ) -> impl Iterator<Item = &'a CirRecord> + 'a {
        self.records.iter().filter(move |r| {
            r.freq == freq
                && r.kind == kind
                && (kind != SweepKind::Target || r.target_id.as_deref() == target)
        })
    }

    /// (target, frequency) pairs that have target sweeps.
    pub fn target_groups(&self) -> BTreeSet<(String, Frequency)> {
        self.records
            .iter()
            .filter(|r| r.kind == SweepKind::Target)
            .filter_map(|r| r.target_id.clone().map(|t| (t, r.freq)))
            .collect()
    }
}

impl Validate for SweepDataset {
    fn violations(&self) -> Vec<Violation> {
        let mut v: Vec<Violation> = self.records.iter().flat_map(|r| r.violations()).collect();
        v.extend(self.geometry.violations());

        for w in self.records.windows(2) {
            if record_key(&w[0]) == record_key(&w[1]) {
                v.push(Violation::new(format!(
                    "duplicate {} snapshot {} at {}{}",
                    w[0].kind.as_str(),
                    w[0].snapshot_index,
                    w[0].freq,
                    w[0].target_id
                        .as_deref()
                        .map(|t| format!(" for {t}"))
                        .unwrap_or_default()
                )));
            }
        }

        let with_reference: BTreeSet<Frequency> = self
            .records
            .iter()
            .filter(|r| r.kind == SweepKind::Reference)
            .map(|r| r.freq)
            .collect();
        let missing: BTreeSet<Frequency> = self
            .records
            .iter()
            .filter(|r| r.kind == SweepKind::Target && !with_reference.contains(&r.freq))
            .map(|r| r.freq)
            .collect();
        if !missing.is_empty() {
            let list = missing
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ");
            v.push(Violation::new(format!(
                "target sweeps without a reference sweep at: {list}"
            )));
        }
        v
    }
}

fn parse_line(line: &str) -> std::result::Result<CirRecord, String> {
    let raw: RecordLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.taps_re.len() != raw.taps_im.len() {
        return Err(format!(
            "taps_re has {} entries but taps_im has {}",
            raw.taps_re.len(),
            raw.taps_im.len()
        ));
    }
    let freq = Frequency::from_ghz(raw.freq_ghz).map_err(|e| e.to_string())?;
    match (raw.kind, &raw.target) {
        (SweepKind::Target, None) => return Err("target record without a `target` label".into()),
        (SweepKind::Reference | SweepKind::Calibration, Some(_)) => {
            return Err(format!(
                "`target` is only allowed on target records, found on {}",
                raw.kind.as_str()
            ))
        }
        _ => {}
    }
    let rec = CirRecord {
        freq,
        kind: raw.kind,
        target_id: raw.target,
        taps: raw
            .taps_re
            .iter()
            .zip(&raw.taps_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect(),
        snapshot_index: raw.snapshot,
    };
    let problems = rec.violations();
    if problems.is_empty() {
        Ok(rec)
    } else {
        Err(problems
            .iter()
            .map(|p| p.message.clone())
            .collect::<Vec<_>>()
            .join("; "))
    }
}

/// Parses dataset text. Line-level problems carry 1-based line numbers.
pub fn parse_dataset_str(text: &str, geometry: Geometry) -> Result<SweepDataset> {
    let mut records = Vec::new();
    let mut violations = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(r) => records.push(r),
            Err(msg) => violations.push(Violation::at_line(i + 1, msg)),
        }
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    SweepDataset::new(records, geometry)
}

/// Reads a dataset file with the default measurement geometry; pair it with a
/// run configuration through [`SweepDataset::with_geometry`].
pub fn parse_dataset(path: impl AsRef<Path>) -> Result<SweepDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_str(&text, Geometry::default())
}

pub fn write_dataset_to<W: Write>(ds: &SweepDataset, mut out: W) -> std::io::Result<()> {
    for r in ds.records() {
        write_record(r, &mut out)?;
    }
    out.flush()
}

pub(crate) fn write_record<W: Write>(r: &CirRecord, out: &mut W) -> std::io::Result<()> {
    let line = RecordLine {
        freq_ghz: r.freq.ghz(),
        kind: r.kind,
        target: r.target_id.clone(),
        snapshot: r.snapshot_index,
        taps_re: r.taps.iter().map(|t| t.re).collect(),
        taps_im: r.taps.iter().map(|t| t.im).collect(),
    };
    serde_json::to_writer(&mut *out, &line)?;
    out.write_all(b"\n")
}

pub fn write_dataset(ds: &SweepDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_to(ds, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_tx_tar_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_rx_tar_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    baseline_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_offset_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequencies_ghz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calibration_sidecar: Option<PathBuf>,
}

/// Geometry plus the options that steer a fitting run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    /// Restricts processing to these carriers when present.
    pub frequencies: Option<Vec<Frequency>>,
    pub cap_k: f64,
    /// Resolved relative to the configuration file's directory.
    pub calibration_sidecar: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            frequencies: None,
            cap_k: DEFAULT_CAP_K,
            calibration_sidecar: None,
        }
    }
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        let file = ConfigFile {
            d_tx_tar_m: Some(self.geometry.d_tx_tar),
            d_rx_tar_m: Some(self.geometry.d_rx_tar),
            baseline_m: Some(self.geometry.baseline),
            max_offset_deg: Some(self.geometry.max_offset_deg),
            frequencies_ghz: self
                .frequencies
                .as_ref()
                .map(|f| f.iter().map(|f| f.ghz()).collect()),
            cap_k: Some(self.cap_k),
            calibration_sidecar: self.calibration_sidecar.clone(),
        };
        serde_json::to_string_pretty(&file).expect("config serializes")
    }
}

/// Parses configuration text. `base_dir` anchors a relative sidecar path.
pub fn parse_config_str(text: &str, base_dir: Option<&Path>) -> Result<RunConfig> {
    let file: ConfigFile = if text.trim().is_empty() {
        ConfigFile::default()
    } else {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?
    };

    let geometry = Geometry {
        d_tx_tar: file.d_tx_tar_m.unwrap_or(DEFAULT_TARGET_DISTANCE_M),
        d_rx_tar: file.d_rx_tar_m.unwrap_or(DEFAULT_TARGET_DISTANCE_M),
        baseline: file.baseline_m.unwrap_or(DEFAULT_BASELINE_M),
        max_offset_deg: file.max_offset_deg.unwrap_or(DEFAULT_MAX_OFFSET_DEG),
    };
    let mut violations = geometry.violations();

    let cap_k = file.cap_k.unwrap_or(DEFAULT_CAP_K);
    if !(cap_k > 0.0) || !cap_k.is_finite() {
        violations.push(Violation::new(format!("cap_k must be > 0, got {cap_k}")));
    }

    let frequencies = match file.frequencies_ghz {
        None => None,
        Some(list) => {
            let mut out = Vec::with_capacity(list.len());
            for f in list {
                match Frequency::from_ghz(f) {
                    Ok(f) => out.push(f),
                    Err(_) => violations.push(Violation::new(format!(
                        "frequencies_ghz entry must be > 0, got {f}"
                    ))),
                }
            }
            Some(out)
        }
    };

    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }

    let calibration_sidecar = file.calibration_sidecar.map(|p| match base_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    });

    Ok(RunConfig {
        geometry,
        frequencies,
        cap_k,
        calibration_sidecar,
    })
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path.parent())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarEntry {
    freq_ghz: f64,
    p_r: f64,
}

/// Received calibration power per carrier, Rx placed at the target point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationSidecar {
    pub received_power: BTreeMap<Frequency, f64>,
}

impl CalibrationSidecar {
    pub fn parse_str(text: &str) -> Result<Self> {
        let entries: Vec<SidecarEntry> = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("calibration sidecar: {e}")))?;
        let mut received_power = BTreeMap::new();
        let mut violations = Vec::new();
        for (i, e) in entries.into_iter().enumerate() {
            let freq = match Frequency::from_ghz(e.freq_ghz) {
                Ok(f) => f,
                Err(err) => {
                    violations.push(Violation::new(format!("sidecar entry {i}: {err}")));
                    continue;
                }
            };
            if !(e.p_r > 0.0) || !e.p_r.is_finite() {
                violations.push(Violation::new(format!(
                    "sidecar entry {i}: p_r must be > 0 at {freq}, got {}",
                    e.p_r
                )));
            }
            if received_power.insert(freq, e.p_r).is_some() {
                violations.push(Violation::new(format!(
                    "sidecar lists {freq} more than once"
                )));
            }
        }
        if violations.is_empty() {
            Ok(Self { received_power })
        } else {
            Err(Error::Validation(violations))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<SidecarEntry> = self
            .received_power
            .iter()
            .map(|(f, p)| SidecarEntry {
                freq_ghz: f.ghz(),
                p_r: *p,
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("sidecar serializes")
    }
}
