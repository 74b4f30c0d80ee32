//! Domain types and unit conventions shared by every stage of the pipeline.
//!
//! Power and RCS values are carried in linear units throughout; decibels only
//! appear at file and report boundaries. The RCS of a target (m²) and the
//! log-domain spread of a fitted log-normal are deliberately different types
//! ([`RcsSampleSet`] and [`LognormalFit`]) even though both are commonly
//! written as sigma.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 10·log10(e): converts a natural-log quantity to decibels.
pub const DB_PER_NEPER_POWER: f64 = 4.342_944_819_032_518;

/// Types whose invariants can be checked. Implementations report every
/// violation, not only the first one.
pub trait Validate {
    fn violations(&self) -> Vec<Violation>;

    fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

pub fn db_to_linear(x_db: f64) -> Result<f64> {
    if !x_db.is_finite() {
        return Err(Error::domain(format!(
            "cannot convert non-finite dB value {x_db}"
        )));
    }
    Ok(10f64.powf(x_db / 10.0))
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "linear value must be positive and finite, got {x}"
        )));
    }
    Ok(10.0 * x.log10())
}

/// Carrier frequency in GHz.
///
/// Frequencies are compared and hashed by exact value; datasets are expected
/// to label a given carrier identically everywhere.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_ghz(ghz: f64) -> Result<Self> {
        if ghz.is_finite() && ghz > 0.0 {
            Ok(Self(ghz))
        } else {
            Err(Error::domain(format!(
                "frequency must be positive and finite, got {ghz} GHz"
            )))
        }
    }

    pub fn ghz(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 * 1e9
    }

    pub fn wavelength_m(self) -> f64 {
        SPEED_OF_LIGHT / self.hz()
    }
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Frequency {}

impl Hash for Frequency {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} GHz", self.0)
    }
}

/// Linear received power in whatever consistent unit the dataset taps imply.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerValue(f64);

impl PowerValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!(
                "power must be non-negative and finite, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Reference,
    Target,
    Calibration,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Reference => "reference",
            SweepKind::Target => "target",
            SweepKind::Calibration => "calibration",
        }
    }
}

/// One complex channel-impulse-response snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct CirRecord {
    pub freq: Frequency,
    pub kind: SweepKind,
    pub target_id: Option<String>,
    pub taps: Vec<Complex64>,
    pub snapshot_index: u64,
}

impl Validate for CirRecord {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.taps.is_empty() {
            v.push(Violation::new(format!(
                "{} record at {} snapshot {} has no taps",
                self.kind.as_str(),
                self.freq,
                self.snapshot_index
            )));
        }
        if self
            .taps
            .iter()
            .any(|t| !t.re.is_finite() || !t.im.is_finite())
        {
            v.push(Violation::new(format!(
                "{} record at {} snapshot {} has non-finite taps",
                self.kind.as_str(),
                self.freq,
                self.snapshot_index
            )));
        }
        match (self.kind, &self.target_id) {
            (SweepKind::Target, None) => v.push(Violation::new(format!(
                "target record at {} snapshot {} is missing a target label",
                self.freq, self.snapshot_index
            ))),
            (SweepKind::Target, Some(t)) if t.is_empty() => v.push(Violation::new(format!(
                "target record at {} snapshot {} has an empty target label",
                self.freq, self.snapshot_index
            ))),
            _ => {}
        }
        v
    }
}

/// Linear RCS samples (m²) for one target at one carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct RcsSampleSet {
    pub target_id: String,
    pub freq: Frequency,
    pub samples: Vec<f64>,
    /// Snapshots whose differential power fell below the rejection floor.
    pub discarded_count: usize,
}

impl Validate for RcsSampleSet {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.samples.is_empty() {
            v.push(Violation::new(format!(
                "no RCS samples for {} at {}",
                self.target_id, self.freq
            )));
        }
        let bad = self
            .samples
            .iter()
            .filter(|s| !(s.is_finite() && **s > 0.0))
            .count();
        if bad > 0 {
            v.push(Violation::new(format!(
                "{bad} non-positive or non-finite RCS sample(s) for {} at {}",
                self.target_id, self.freq
            )));
        }
        v
    }
}

/// Maximum-likelihood log-normal fit with goodness-of-fit scores.
///
/// `mu` and `sigma` are the mean and standard deviation of ln(RCS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    pub ks: f64,
    pub mse: f64,
    /// All samples shared one value; `sigma` is zero and B2 is undefined.
    pub degenerate: bool,
}

impl LognormalFit {
    /// A fit known only by its parameters, e.g. one read back from a table.
    pub fn from_params(mu: f64, sigma: f64) -> Self {
        Self {
            mu,
            sigma,
            n: 1,
            ks: 0.0,
            mse: 0.0,
            degenerate: sigma == 0.0,
        }
    }
}

impl Validate for LognormalFit {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !self.mu.is_finite() {
            v.push(Violation::new(format!(
                "mu must be finite, got {}",
                self.mu
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            v.push(Violation::new(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.ks) {
            v.push(Violation::new(format!(
                "KS must lie in [0, 1], got {}",
                self.ks
            )));
        }
        if !(self.mse >= 0.0) {
            v.push(Violation::new(format!(
                "MSE must be >= 0, got {}",
                self.mse
            )));
        }
        if self.n < 1 {
            v.push(Violation::new("fit must cover at least one sample"));
        }
        v
    }
}

/// Deterministic angle-dependent RCS component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum B1Spec {
    Constant {
        db: f64,
    },
    /// `peak_db + 10·exponent·log10(cos(angle − boresight))`, bounded below by
    /// `peak_db + floor_db` (`floor_db` ≤ 0); angles more than 90° off
    /// boresight sit at the floor.
    Analytic {
        peak_db: f64,
        boresight_deg: f64,
        exponent: f64,
        floor_db: f64,
    },
    /// Gain in dB on a strictly increasing angle grid, linearly interpolated.
    /// With `wrap` the grid is periodic over 360° and must lie in [0, 360).
    Table {
        angles_deg: Vec<f64>,
        gains_db: Vec<f64>,
        #[serde(default)]
        wrap: bool,
    },
}

impl Default for B1Spec {
    fn default() -> Self {
        B1Spec::Constant { db: 0.0 }
    }
}

impl B1Spec {
    pub fn is_constant(&self) -> bool {
        matches!(self, B1Spec::Constant { .. })
    }

    pub fn constant_db(&self) -> Option<f64> {
        match self {
            B1Spec::Constant { db } => Some(*db),
            _ => None,
        }
    }
}

impl Validate for B1Spec {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        match self {
            B1Spec::Constant { db } => {
                if !db.is_finite() {
                    v.push(Violation::new("constant B1 must be finite"));
                }
            }
            B1Spec::Analytic {
                peak_db,
                boresight_deg,
                exponent,
                floor_db,
            } => {
                if ![*peak_db, *boresight_deg, *exponent, *floor_db]
                    .iter()
                    .all(|x| x.is_finite())
                {
                    v.push(Violation::new("analytic B1 parameters must be finite"));
                }
                if *exponent < 0.0 {
                    v.push(Violation::new("analytic B1 exponent must be >= 0"));
                }
            }
            B1Spec::Table {
                angles_deg,
                gains_db,
                wrap,
            } => {
                if angles_deg.len() != gains_db.len() {
                    v.push(Violation::new(format!(
                        "B1 table has {} angles but {} gains",
                        angles_deg.len(),
                        gains_db.len()
                    )));
                }
                if angles_deg.is_empty() {
                    v.push(Violation::new("B1 table is empty"));
                }
                if angles_deg.windows(2).any(|w| !(w[1] > w[0])) {
                    v.push(Violation::new(
                        "B1 table angles must be strictly increasing",
                    ));
                }
                if angles_deg.iter().chain(gains_db).any(|x| !x.is_finite()) {
                    v.push(Violation::new("B1 table entries must be finite"));
                }
                if *wrap && angles_deg.iter().any(|a| !(0.0..360.0).contains(a)) {
                    v.push(Violation::new(
                        "wrapping B1 table angles must lie in [0, 360)",
                    ));
                }
            }
        }
        v
    }
}

/// Default upper-bound factor applied to B2 draws.
pub const DEFAULT_CAP_K: f64 = 3.0;

fn default_cap_k() -> f64 {
    DEFAULT_CAP_K
}

/// The three-component model RCS = A × B1 × B2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcsTriple {
    /// Mean RCS in dBsm.
    pub a_dbsm: f64,
    #[serde(default)]
    pub b1: B1Spec,
    /// Fluctuation parameter of the unit-mean log-normal B2, in dB.
    pub b2_db: f64,
    #[serde(default = "default_cap_k")]
    pub cap_k: f64,
}

impl RcsTriple {
    pub fn new(a_dbsm: f64, b1: B1Spec, b2_db: f64, cap_k: f64) -> Self {
        Self {
            a_dbsm,
            b1,
            b2_db,
            cap_k,
        }
    }

    /// Angle-invariant triple with B1 = 0 dB and the default cap.
    pub fn flat(a_dbsm: f64, b2_db: f64) -> Self {
        Self::new(a_dbsm, B1Spec::default(), b2_db, DEFAULT_CAP_K)
    }
}

impl Validate for RcsTriple {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !self.a_dbsm.is_finite() {
            v.push(Violation::new(format!(
                "A must be finite, got {}",
                self.a_dbsm
            )));
        }
        if !(self.cap_k > 0.0) || !self.cap_k.is_finite() {
            v.push(Violation::new(format!(
                "cap_k must be > 0, got {}",
                self.cap_k
            )));
        }
        v.extend(self.b1.violations());
        v
    }
}

/// Calibration constant linking target power to RCS: P_tar = k_cal · RCS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemFactor {
    pub freq: Frequency,
    pub k_cal: f64,
}

impl Validate for SystemFactor {
    fn violations(&self) -> Vec<Violation> {
        if self.k_cal > 0.0 && self.k_cal.is_finite() {
            Vec::new()
        } else {
            vec![Violation::new(format!(
                "system factor at {} must be positive, got {}",
                self.freq, self.k_cal
            ))]
        }
    }
}

/// Quasi-monostatic measurement geometry. Distances in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub d_tx_tar: f64,
    pub d_rx_tar: f64,
    pub baseline: f64,
    /// Largest bistatic angle still treated as monostatic, degrees.
    pub max_offset_deg: f64,
}

pub const DEFAULT_TARGET_DISTANCE_M: f64 = 3.0;
pub const DEFAULT_BASELINE_M: f64 = 0.55;
pub const DEFAULT_MAX_OFFSET_DEG: f64 = 15.0;

impl Default for Geometry {
    fn default() -> Self {
        Self {
            d_tx_tar: DEFAULT_TARGET_DISTANCE_M,
            d_rx_tar: DEFAULT_TARGET_DISTANCE_M,
            baseline: DEFAULT_BASELINE_M,
            max_offset_deg: DEFAULT_MAX_OFFSET_DEG,
        }
    }
}

impl Geometry {
    /// Angle subtended at the target by the Tx–Rx baseline, degrees.
    pub fn theta_offset_deg(&self) -> f64 {
        let d = 0.5 * (self.d_tx_tar + self.d_rx_tar);
        (2.0 * (0.5 * self.baseline / d).atan()).to_degrees()
    }

    pub fn is_quasi_monostatic(&self) -> bool {
        self.theta_offset_deg() <= self.max_offset_deg
    }

    /// The common Tx/Rx–target range required by the monostatic radar equation.
    pub fn monostatic_range(&self) -> Result<f64> {
        if self.d_tx_tar == self.d_rx_tar {
            Ok(self.d_tx_tar)
        } else {
            Err(Error::domain(format!(
                "monostatic radar equation needs equal Tx/Rx ranges, got {} m and {} m",
                self.d_tx_tar, self.d_rx_tar
            )))
        }
    }
}

impl Validate for Geometry {
    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for (name, val) in [
            ("d_tx_tar_m", self.d_tx_tar),
            ("d_rx_tar_m", self.d_rx_tar),
            ("baseline_m", self.baseline),
            ("max_offset_deg", self.max_offset_deg),
        ] {
            if !(val > 0.0) || !val.is_finite() {
                v.push(Violation::new(format!("{name} must be > 0, got {val}")));
            }
        }
        v
    }
}
