//! Synthetic sounding campaigns with known ground-truth RCS.
//!
//! A campaign places a fixed clutter profile in every CIR, adds one target
//! path whose power follows the monostatic radar equation for an RCS drawn
//! from the target's triple, and passes each CIR through Zadoff–Chu sounding
//! and correlation recovery. The output uses the same dataset, sidecar, and
//! configuration formats as real measurements.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::{forward_radar_power, free_space_power, system_factor, LinkBudget};
use crate::derive::standard;
use crate::error::{Error, Result, Violation};
use crate::ingest::{write_record, CalibrationSidecar, RunConfig, SweepDataset};
use crate::model::{
    db_to_linear, CirRecord, Frequency, Geometry, RcsTriple, SweepKind, Validate,
    DEFAULT_BASELINE_M, DEFAULT_MAX_OFFSET_DEG, DEFAULT_TARGET_DISTANCE_M,
};
use crate::sampler::{sample_rcs, seeded_rng, SampleGeometry, SamplerOptions};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff–Chu sequence of `length` with root `root`.
///
/// Even length: `exp(−jπ·u·n²/N)`; odd length: `exp(−jπ·u·n(n+1)/N)`. The
/// phase numerator is reduced modulo 2N in integer arithmetic so long
/// sequences keep full precision.
pub fn zc_sequence(length: usize, root: i64) -> Result<Vec<Complex64>> {
    if length < 2 {
        return Err(Error::domain(format!(
            "ZC length must be >= 2, got {length}"
        )));
    }
    let n_len = length as u64;
    if gcd(root.unsigned_abs(), n_len) != 1 {
        return Err(Error::domain(format!(
            "ZC root {root} is not coprime to length {length}"
        )));
    }
    let modulus = 2 * length as i128;
    let odd = length % 2 == 1;
    Ok((0..length as i128)
        .map(|n| {
            let q = if odd { n * (n + 1) } else { n * n };
            let r = (root as i128 * q).rem_euclid(modulus);
            let phase = -std::f64::consts::PI * r as f64 / length as f64;
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// CIR with the given complex gains placed at their delay indices.
pub fn synth_cir(paths: &[(usize, Complex64)], length: usize) -> Result<Vec<Complex64>> {
    if length == 0 {
        return Err(Error::domain("CIR length must be >= 1"));
    }
    let mut taps = vec![Complex64::new(0.0, 0.0); length];
    for &(delay, gain) in paths {
        if delay >= length {
            return Err(Error::domain(format!(
                "path delay {delay} outside CIR of length {length}"
            )));
        }
        taps[delay] += gain;
    }
    Ok(taps)
}

/// Circularly convolves the ZC probe with `taps`, adds complex white noise of
/// `noise_power` per sample, and estimates the taps by circular
/// cross-correlation with the probe normalized by its length.
pub fn sound_and_recover<R: Rng + ?Sized>(
    taps: &[Complex64],
    zc: &[Complex64],
    noise_power: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let n = zc.len();
    let l = taps.len();
    if l == 0 || n < l {
        return Err(Error::domain(format!(
            "probe length {n} must be >= CIR length {l} >= 1"
        )));
    }
    if !(noise_power >= 0.0) || !noise_power.is_finite() {
        return Err(Error::domain(format!(
            "noise power must be >= 0, got {noise_power}"
        )));
    }
    let mut rx = vec![Complex64::new(0.0, 0.0); n];
    for (i, y) in rx.iter_mut().enumerate() {
        for (k, h) in taps.iter().enumerate() {
            *y += h * zc[(i + n - k) % n];
        }
    }
    if noise_power > 0.0 {
        let scale = (0.5 * noise_power).sqrt();
        for y in rx.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *y += Complex64::new(re, im) * scale;
        }
    }
    let inv_n = 1.0 / n as f64;
    Ok((0..l)
        .map(|k| {
            rx.iter()
                .enumerate()
                .map(|(i, y)| y * zc[(i + n - k) % n].conj())
                .sum::<Complex64>()
                * inv_n
        })
        .collect())
}

/// A target's generating model: either a builtin standard name or a triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetModel {
    Standard(String),
    Triple(RcsTriple),
}

impl TargetModel {
    pub fn triple(&self) -> Result<RcsTriple> {
        match self {
            TargetModel::Standard(name) => standard(name)
                .ok_or_else(|| Error::invalid(format!("no builtin standard named `{name}`"))),
            TargetModel::Triple(t) => Ok(t.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub p_t: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub loss: f64,
}

impl From<LinkSpec> for LinkBudget {
    fn from(l: LinkSpec) -> Self {
        LinkBudget {
            p_t: l.p_t,
            g_t: l.g_t,
            g_r: l.g_r,
            loss: l.loss,
        }
    }
}

/// Campaign description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub targets: BTreeMap<String, TargetModel>,
    pub frequencies_ghz: Vec<f64>,
    pub snapshots_per_freq: usize,
    pub reference_snapshots: usize,
    pub d_tx_tar_m: f64,
    pub d_rx_tar_m: f64,
    pub baseline_m: f64,
    pub link: LinkSpec,
    pub cir_length: usize,
    pub zc_length: usize,
    pub zc_root: i64,
    /// Complex noise power per received sample, same unit as tap power.
    pub noise_power: f64,
    /// Total clutter power relative to the return of a 1 m² target, dB.
    pub clutter_to_signal_db: f64,
    /// Relative amplitude jitter applied to clutter taps in target snapshots.
    pub clutter_jitter: f64,
    pub target_delay_tap: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            targets: BTreeMap::from([(
                "small_uav".to_string(),
                TargetModel::Standard("small_uav".to_string()),
            )]),
            frequencies_ghz: vec![25.0, 26.0, 27.0, 28.0],
            snapshots_per_freq: 10_000,
            reference_snapshots: 4,
            d_tx_tar_m: DEFAULT_TARGET_DISTANCE_M,
            d_rx_tar_m: DEFAULT_TARGET_DISTANCE_M,
            baseline_m: DEFAULT_BASELINE_M,
            link: LinkSpec {
                p_t: 1.0,
                g_t: 100.0,
                g_r: 100.0,
                loss: 0.5,
            },
            cir_length: 16,
            zc_length: 128,
            zc_root: 1,
            noise_power: 0.0,
            clutter_to_signal_db: 0.0,
            clutter_jitter: 0.0,
            target_delay_tap: 9,
        }
    }
}

/// Static clutter paths as (delay tap, relative power dB).
const CLUTTER_PROFILE: [(usize, f64); 4] = [(0, 0.0), (3, -3.0), (6, -6.0), (13, -10.0)];

impl Scenario {
    pub fn parse_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::invalid(format!("scenario.{}: {}", e.path(), e.inner())))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            d_tx_tar: self.d_tx_tar_m,
            d_rx_tar: self.d_rx_tar_m,
            baseline: self.baseline_m,
            max_offset_deg: DEFAULT_MAX_OFFSET_DEG,
        }
    }

    fn clutter_paths(&self) -> Vec<(usize, f64)> {
        let kept: Vec<(usize, f64)> = CLUTTER_PROFILE
            .iter()
            .filter(|(d, _)| *d < self.cir_length && *d != self.target_delay_tap)
            .map(|&(d, db)| (d, 10f64.powf(db / 10.0)))
            .collect();
        let total: f64 = kept.iter().map(|(_, p)| p).sum();
        kept.into_iter().map(|(d, p)| (d, p / total)).collect()
    }
}

impl Validate for Scenario {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut bad =
            |field: &str, msg: String| v.push(Violation::new(format!("scenario.{field}: {msg}")));
        for (name, model) in &self.targets {
            match model.triple() {
                Ok(t) => {
                    for p in t.violations() {
                        bad(&format!("targets.{name}"), p.message);
                    }
                }
                Err(e) => bad(&format!("targets.{name}"), e.to_string()),
            }
        }
        if self.frequencies_ghz.is_empty() {
            bad("frequencies_ghz", "must list at least one carrier".into());
        }
        for (i, f) in self.frequencies_ghz.iter().enumerate() {
            if !(*f > 0.0) || !f.is_finite() {
                bad(
                    &format!("frequencies_ghz[{i}]"),
                    format!("must be > 0, got {f}"),
                );
            }
            if self.frequencies_ghz[..i].contains(f) {
                bad(
                    &format!("frequencies_ghz[{i}]"),
                    format!("duplicate carrier {f}"),
                );
            }
        }
        if self.snapshots_per_freq < 2 {
            bad(
                "snapshots_per_freq",
                format!("must be >= 2, got {}", self.snapshots_per_freq),
            );
        }
        if self.reference_snapshots < 1 {
            bad("reference_snapshots", "must be >= 1".into());
        }
        for (field, val) in [
            ("d_tx_tar_m", self.d_tx_tar_m),
            ("d_rx_tar_m", self.d_rx_tar_m),
            ("baseline_m", self.baseline_m),
            ("link.p_t", self.link.p_t),
            ("link.g_t", self.link.g_t),
            ("link.g_r", self.link.g_r),
            ("link.loss", self.link.loss),
        ] {
            if !(val > 0.0) || !val.is_finite() {
                bad(field, format!("must be > 0, got {val}"));
            }
        }
        if self.d_tx_tar_m != self.d_rx_tar_m {
            bad(
                "d_rx_tar_m",
                "must equal d_tx_tar_m for monostatic inversion".into(),
            );
        }
        if self.cir_length < 2 {
            bad(
                "cir_length",
                format!("must be >= 2, got {}", self.cir_length),
            );
        }
        if self.zc_length < self.cir_length {
            bad(
                "zc_length",
                format!("must be >= cir_length ({})", self.cir_length),
            );
        }
        if self.zc_length >= 2 && gcd(self.zc_root.unsigned_abs(), self.zc_length as u64) != 1 {
            bad(
                "zc_root",
                format!("must be coprime to zc_length {}", self.zc_length),
            );
        }
        if self.target_delay_tap >= self.cir_length {
            bad(
                "target_delay_tap",
                format!("must be < cir_length ({})", self.cir_length),
            );
        }
        if !(self.noise_power >= 0.0) || !self.noise_power.is_finite() {
            bad(
                "noise_power",
                format!("must be >= 0, got {}", self.noise_power),
            );
        }
        if !self.clutter_to_signal_db.is_finite() {
            bad("clutter_to_signal_db", "must be finite".into());
        }
        if !(self.clutter_jitter >= 0.0) || !self.clutter_jitter.is_finite() {
            bad(
                "clutter_jitter",
                format!("must be >= 0, got {}", self.clutter_jitter),
            );
        }
        v
    }
}

/// Ground truth for one target snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub target: String,
    pub freq_ghz: f64,
    pub snapshot: u64,
    pub sigma_true_m2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub dataset: SweepDataset,
    pub sidecar: CalibrationSidecar,
    pub config: RunConfig,
    pub ledger: Vec<LedgerEntry>,
}

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const SIDECAR_FILE: &str = "calibration.json";
pub const CONFIG_FILE: &str = "config.json";
pub const LEDGER_FILE: &str = "ledger.csv";

/// Independent generator for a (purpose, target, carrier) stream.
fn stream_rng(seed: u64, purpose: u64, target_index: usize, freq_index: usize) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream((purpose << 48) | ((target_index as u64) << 24) | freq_index as u64);
    rng
}

const STREAM_CLUTTER: u64 = 1;
const STREAM_REFERENCE: u64 = 2;
const STREAM_TARGET: u64 = 3;

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn generate_campaign(scenario: &Scenario, seed: u64) -> Result<Campaign> {
    scenario.validate()?;
    let geom = scenario.geometry();
    let d = geom.monostatic_range()?;
    let link: LinkBudget = scenario.link.into();
    let zc = zc_sequence(scenario.zc_length, scenario.zc_root)?;
    let clutter_shape = scenario.clutter_paths();
    let sampler_geom = SampleGeometry::monostatic(0.0);

    let triples = scenario
        .targets
        .iter()
        .map(|(name, m)| Ok((name.clone(), m.triple()?)))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut ledger = Vec::new();
    let mut sidecar = CalibrationSidecar::default();

    for (fi, &ghz) in scenario.frequencies_ghz.iter().enumerate() {
        let freq = Frequency::from_ghz(ghz)?;
        let p_r = free_space_power(freq, d, &link)?;
        sidecar.received_power.insert(freq, p_r.value());
        let k = system_factor(freq, p_r, d)?;

        let clutter_power = k.k_cal * db_to_linear(scenario.clutter_to_signal_db)?;
        let mut rng = stream_rng(seed, STREAM_CLUTTER, 0, fi);
        let clutter: Vec<(usize, Complex64)> = clutter_shape
            .iter()
            .map(|&(delay, frac)| {
                (
                    delay,
                    random_phase(&mut rng) * (clutter_power * frac).sqrt(),
                )
            })
            .collect();

        let mut rng = stream_rng(seed, STREAM_REFERENCE, 0, fi);
        for snap in 0..scenario.reference_snapshots {
            let taps = synth_cir(&clutter, scenario.cir_length)?;
            records.push(CirRecord {
                freq,
                kind: SweepKind::Reference,
                target_id: None,
                taps: sound_and_recover(&taps, &zc, scenario.noise_power, &mut rng)?,
                snapshot_index: snap as u64,
            });
        }

        for (ti, (name, triple)) in triples.iter().enumerate() {
            let mut rng = stream_rng(seed, STREAM_TARGET, ti, fi);
            let draws = sample_rcs(
                triple,
                &sampler_geom,
                &mut rng,
                scenario.snapshots_per_freq,
                &SamplerOptions::default(),
            )?;
            for (snap, draw) in draws.iter().enumerate() {
                let p_tar = forward_radar_power(draw.rcs_m2, freq, &geom, &link)?;
                let mut paths: Vec<(usize, Complex64)> = clutter
                    .iter()
                    .map(|&(delay, g)| {
                        if scenario.clutter_jitter > 0.0 {
                            let j: f64 = rng.sample(StandardNormal);
                            (delay, g * (1.0 + scenario.clutter_jitter * j))
                        } else {
                            (delay, g)
                        }
                    })
                    .collect();
                paths.push((
                    scenario.target_delay_tap,
                    random_phase(&mut rng) * p_tar.value().sqrt(),
                ));
                let taps = synth_cir(&paths, scenario.cir_length)?;
                records.push(CirRecord {
                    freq,
                    kind: SweepKind::Target,
                    target_id: Some(name.clone()),
                    taps: sound_and_recover(&taps, &zc, scenario.noise_power, &mut rng)?,
                    snapshot_index: snap as u64,
                });
                ledger.push(LedgerEntry {
                    target: name.clone(),
                    freq_ghz: ghz,
                    snapshot: snap as u64,
                    sigma_true_m2: draw.rcs_m2,
                });
            }
        }
    }

    let config = RunConfig {
        geometry: geom,
        frequencies: None,
        cap_k: triples
            .first()
            .map(|(_, t)| t.cap_k)
            .unwrap_or(crate::model::DEFAULT_CAP_K),
        calibration_sidecar: Some(SIDECAR_FILE.into()),
    };
    Ok(Campaign {
        dataset: SweepDataset::new(records, geom)?,
        sidecar,
        config,
        ledger,
    })
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut std::io::BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes dataset, sidecar, run configuration, and ledger into `dir`.
pub fn write_campaign(c: &Campaign, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join(DATASET_FILE), |w| {
        c.dataset
            .records()
            .iter()
            .try_for_each(|r| write_record(r, w))
    })?;
    write_file(&dir.join(SIDECAR_FILE), |w| {
        writeln!(w, "{}", c.sidecar.to_json())
    })?;
    write_file(&dir.join(CONFIG_FILE), |w| {
        writeln!(w, "{}", c.config.to_json())
    })?;
    write_file(&dir.join(LEDGER_FILE), |w| {
        let mut csv = csv::Writer::from_writer(w);
        for e in &c.ledger {
            csv.serialize(e)?;
        }
        csv.flush()
    })
}
