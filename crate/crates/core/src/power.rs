//! Clutter-differenced power extraction.
//!
//! The reference sweep captures the static environment. Each target snapshot's
//! total power minus the mean reference power at the same carrier is the
//! power scattered by the target.

use crate::error::{Error, Result};
use crate::model::{CirRecord, PowerValue, SweepKind};

/// Differentials at or below `max(ABSOLUTE_FLOOR, RELATIVE_FLOOR · P_ref)`
/// are rejected rather than clamped.
pub const ABSOLUTE_FLOOR: f64 = 1e-12;
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Total energy of a CIR snapshot, Σ|h(n)|².
pub fn cir_power(record: &CirRecord) -> PowerValue {
    let p = compensated_sum(record.taps.iter().map(|t| t.norm_sqr()));
    PowerValue::new(p).expect("sum of squared magnitudes is non-negative")
}

pub fn mean_reference_power<'a, I>(refs: I) -> Result<PowerValue>
where
    I: IntoIterator<Item = &'a CirRecord>,
{
    let mut powers = Vec::new();
    let mut freq = None;
    for r in refs {
        if r.kind != SweepKind::Reference {
            return Err(Error::invalid(format!(
                "expected reference records, got a {} record",
                r.kind.as_str()
            )));
        }
        match freq {
            None => freq = Some(r.freq),
            Some(f) if f != r.freq => {
                return Err(Error::invalid(format!(
                    "reference records mix {f} and {}",
                    r.freq
                )))
            }
            _ => {}
        }
        powers.push(cir_power(r).value());
    }
    if powers.is_empty() {
        return Err(Error::invalid("no reference records to average"));
    }
    let n = powers.len() as f64;
    PowerValue::new(compensated_sum(powers) / n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetPower {
    Accepted(PowerValue),
    /// The differential was negative or too small to carry an RCS sample.
    Rejected,
}

impl TargetPower {
    pub fn accepted(self) -> Option<PowerValue> {
        match self {
            TargetPower::Accepted(p) => Some(p),
            TargetPower::Rejected => None,
        }
    }
}

pub fn rejection_floor(p_ref: PowerValue) -> f64 {
    ABSOLUTE_FLOOR.max(RELATIVE_FLOOR * p_ref.value())
}

/// P_tar = P_tot − P_ref, or [`TargetPower::Rejected`] below the floor.
pub fn target_power(p_tot: PowerValue, p_ref: PowerValue) -> TargetPower {
    let diff = p_tot.value() - p_ref.value();
    if diff > rejection_floor(p_ref) {
        TargetPower::Accepted(PowerValue::new(diff).expect("positive differential"))
    } else {
        TargetPower::Rejected
    }
}

/// Differential target powers for a run of target snapshots, in input order,
/// together with the number of rejected snapshots.
pub fn differential_powers<'a, I>(targets: I, p_ref: PowerValue) -> (Vec<PowerValue>, usize)
where
    I: IntoIterator<Item = &'a CirRecord>,
{
    let mut accepted = Vec::new();
    let mut rejected = 0;
    for r in targets {
        match target_power(cir_power(r), p_ref) {
            TargetPower::Accepted(p) => accepted.push(p),
            TargetPower::Rejected => rejected += 1,
        }
    }
    (accepted, rejected)
}
