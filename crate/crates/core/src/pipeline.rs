//! End-to-end processing of a sweep dataset into per-(target, carrier) fits.

use std::collections::{BTreeMap, BTreeSet};

use crate::calibration::{rcs_from_power, system_factor};
use crate::derive::{frequency_terms, FrequencyTerms};
use crate::error::{Error, Result, Violation};
use crate::ingest::{CalibrationSidecar, RunConfig, SweepDataset};
use crate::model::{Frequency, LognormalFit, PowerValue, RcsSampleSet, SweepKind, SystemFactor};
use crate::power::{cir_power, differential_powers, mean_reference_power};
use crate::statfit::fit_lognormal;

/// Carriers the run will process: every target carrier, narrowed by the
/// configuration's frequency list when one is given.
pub fn active_frequencies(ds: &SweepDataset, cfg: &RunConfig) -> BTreeSet<Frequency> {
    let with_targets: BTreeSet<Frequency> =
        ds.target_groups().into_iter().map(|(_, f)| f).collect();
    match &cfg.frequencies {
        Some(list) => list
            .iter()
            .copied()
            .filter(|f| with_targets.contains(f))
            .collect(),
        None => with_targets,
    }
}

/// One system factor per carrier, taken from calibration sweeps or from the
/// sidecar. A carrier with both sources, or with neither, is a violation.
pub fn system_factors(
    ds: &SweepDataset,
    sidecar: Option<&CalibrationSidecar>,
    freqs: &BTreeSet<Frequency>,
) -> Result<BTreeMap<Frequency, SystemFactor>> {
    let d = ds.geometry.monostatic_range()?;
    let mut out = BTreeMap::new();
    let mut violations = Vec::new();
    for &freq in freqs {
        let cal: Vec<_> = ds.select(freq, SweepKind::Calibration, None).collect();
        let from_sidecar = sidecar.and_then(|s| s.received_power.get(&freq).copied());
        let p_r = match (cal.is_empty(), from_sidecar) {
            (false, Some(_)) => {
                violations.push(Violation::new(format!(
                    "{freq} has both calibration sweeps and a sidecar entry"
                )));
                continue;
            }
            (true, None) => {
                violations.push(Violation::new(format!("no calibration power for {freq}")));
                continue;
            }
            (true, Some(p)) => PowerValue::new(p)?,
            (false, None) => {
                let total: f64 = cal.iter().map(|r| cir_power(r).value()).sum();
                PowerValue::new(total / cal.len() as f64)?
            }
        };
        match system_factor(freq, p_r, d) {
            Ok(k) => {
                out.insert(freq, k);
            }
            Err(e) => violations.push(Violation::new(e.to_string())),
        }
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(violations))
    }
}

/// RCS samples for every (target, carrier) group on the active carriers.
pub fn extract_rcs_samples(
    ds: &SweepDataset,
    factors: &BTreeMap<Frequency, SystemFactor>,
) -> Result<Vec<RcsSampleSet>> {
    let mut sets = Vec::new();
    let mut p_ref_cache = BTreeMap::new();
    for (target, freq) in ds.target_groups() {
        let Some(k) = factors.get(&freq) else {
            continue;
        };
        let p_ref = match p_ref_cache.get(&freq) {
            Some(p) => *p,
            None => {
                let p = mean_reference_power(ds.select(freq, SweepKind::Reference, None))?;
                p_ref_cache.insert(freq, p);
                p
            }
        };
        let (accepted, discarded) =
            differential_powers(ds.select(freq, SweepKind::Target, Some(&target)), p_ref);
        let samples = accepted
            .into_iter()
            .map(|p| rcs_from_power(p, k))
            .collect::<Result<Vec<_>>>()?;
        sets.push(RcsSampleSet {
            target_id: target,
            freq,
            samples,
            discarded_count: discarded,
        });
    }
    Ok(sets)
}

/// Fit and derived terms for one (target, carrier) group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFit {
    pub target: String,
    pub freq: Frequency,
    pub fit: LognormalFit,
    pub discarded: usize,
    /// Absent for degenerate fits.
    pub terms: Option<FrequencyTerms>,
}

pub fn fit_groups(sets: &[RcsSampleSet]) -> Result<Vec<GroupFit>> {
    let mut out = Vec::with_capacity(sets.len());
    let mut violations = Vec::new();
    for set in sets {
        match fit_lognormal(set) {
            Ok(fit) => out.push(GroupFit {
                target: set.target_id.clone(),
                freq: set.freq,
                fit,
                discarded: set.discarded_count,
                terms: frequency_terms(set.freq, &fit).ok(),
            }),
            Err(e) => violations.push(Violation::new(format!(
                "{} at {} ({} accepted, {} discarded): {e}",
                set.target_id,
                set.freq,
                set.samples.len(),
                set.discarded_count
            ))),
        }
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(violations))
    }
}

/// Loads the sidecar named by the configuration, if any.
pub fn load_sidecar(cfg: &RunConfig) -> Result<Option<CalibrationSidecar>> {
    cfg.calibration_sidecar
        .as_ref()
        .map(CalibrationSidecar::load)
        .transpose()
}

/// Dataset plus configuration to fitted groups.
pub fn run(ds: &SweepDataset, cfg: &RunConfig) -> Result<Vec<GroupFit>> {
    run_with_sidecar(ds, cfg, load_sidecar(cfg)?.as_ref())
}

/// Calibrated RCS samples for every group on the configured carriers.
pub fn sample_sets(
    ds: &SweepDataset,
    cfg: &RunConfig,
    sidecar: Option<&CalibrationSidecar>,
) -> Result<Vec<RcsSampleSet>> {
    let freqs = active_frequencies(ds, cfg);
    if freqs.is_empty() {
        return Err(Error::invalid(
            "dataset has no target sweeps on the configured carriers",
        ));
    }
    let factors = system_factors(ds, sidecar, &freqs)?;
    extract_rcs_samples(ds, &factors)
}

pub fn run_with_sidecar(
    ds: &SweepDataset,
    cfg: &RunConfig,
    sidecar: Option<&CalibrationSidecar>,
) -> Result<Vec<GroupFit>> {
    fit_groups(&sample_sets(ds, cfg, sidecar)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CirRecord, Geometry};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn f(ghz: f64) -> Frequency {
        Frequency::from_ghz(ghz).unwrap()
    }

    fn rec(freq: f64, kind: SweepKind, target: Option<&str>, snap: u64, taps: &[f64]) -> CirRecord {
        CirRecord {
            freq: f(freq),
            kind,
            target_id: target.map(str::to_string),
            taps: taps.iter().map(|&t| Complex64::new(t, 0.0)).collect(),
            snapshot_index: snap,
        }
    }

    fn sidecar(entries: &[(f64, f64)]) -> CalibrationSidecar {
        CalibrationSidecar {
            received_power: entries.iter().map(|&(g, p)| (f(g), p)).collect(),
        }
    }

    #[test]
    fn small_dataset_end_to_end() {
        // P_ref = 1, target differentials 1, 4 → with K = 1 the RCS samples are 1 and 4.
        let records = vec![
            rec(28.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(28.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
            rec(28.0, SweepKind::Target, Some("x"), 1, &[1.0, 2.0]),
            rec(28.0, SweepKind::Target, Some("x"), 2, &[0.5]),
        ];
        let geom = Geometry {
            d_tx_tar: 1.0,
            d_rx_tar: 1.0,
            ..Geometry::default()
        };
        let ds = SweepDataset::new(records, geom).unwrap();
        let sc = sidecar(&[(28.0, 4.0 * PI)]);
        let fits = run_with_sidecar(&ds, &RunConfig::default(), Some(&sc)).unwrap();
        assert_eq!(fits.len(), 1);
        let g = &fits[0];
        assert_eq!(g.discarded, 1);
        assert!((g.fit.mu - 0.5 * 4f64.ln()).abs() < 1e-12);
        assert!((g.fit.sigma - 0.5 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn calibration_records_feed_system_factor() {
        let records = vec![
            rec(25.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(25.0, SweepKind::Calibration, None, 0, &[2.0]),
            rec(25.0, SweepKind::Calibration, None, 1, &[0.0, 2.0]),
            rec(25.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
        ];
        let ds = SweepDataset::new(records, Geometry::default()).unwrap();
        let freqs = BTreeSet::from([f(25.0)]);
        let k = system_factors(&ds, None, &freqs).unwrap();
        assert!((k[&f(25.0)].k_cal - 4.0 / (4.0 * PI * 9.0)).abs() < 1e-15);

        // Both sources for one carrier is ambiguous.
        assert!(system_factors(&ds, Some(&sidecar(&[(25.0, 1.0)])), &freqs).is_err());
    }

    #[test]
    fn missing_calibration_lists_every_carrier() {
        let records = vec![
            rec(25.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(26.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(25.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
            rec(26.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
        ];
        let ds = SweepDataset::new(records, Geometry::default()).unwrap();
        match run_with_sidecar(&ds, &RunConfig::default(), None) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn frequency_filter_narrows_run() {
        let records = vec![
            rec(25.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(26.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(25.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
            rec(26.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
        ];
        let ds = SweepDataset::new(records, Geometry::default()).unwrap();
        let cfg = RunConfig {
            frequencies: Some(vec![f(26.0)]),
            ..RunConfig::default()
        };
        assert_eq!(active_frequencies(&ds, &cfg), BTreeSet::from([f(26.0)]));
    }

    #[test]
    fn too_few_accepted_samples_is_reported() {
        let records = vec![
            rec(28.0, SweepKind::Reference, None, 0, &[1.0]),
            rec(28.0, SweepKind::Target, Some("x"), 0, &[1.0, 1.0]),
            rec(28.0, SweepKind::Target, Some("x"), 1, &[0.1]),
        ];
        let ds = SweepDataset::new(records, Geometry::default()).unwrap();
        let err = run_with_sidecar(&ds, &RunConfig::default(), Some(&sidecar(&[(28.0, 1.0)])))
            .unwrap_err();
        assert!(err.to_string().contains("1 discarded"), "{err}");
    }
}
