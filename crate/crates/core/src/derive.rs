//! From log-normal fits to the (A, B1, B2) model parameters.
//!
//! For X ~ Lognormal(mu, sigma²):
//! - A = 10·log10(E[X]) = 10·log10(e)·(mu + sigma²/2) dBsm
//! - B2 = 10·log10(Var(X)/E[X]²) = 10·log10(e^{sigma²} − 1) dB
//!
//! Per-carrier values are averaged in the dB domain when consolidating a
//! target across frequencies.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    B1Spec, Frequency, LognormalFit, RcsTriple, Validate, DB_PER_NEPER_POWER, DEFAULT_CAP_K,
};

/// Mean RCS in dBsm of a log-normal with log-domain parameters (mu, sigma).
pub fn a_dbsm(mu: f64, sigma: f64) -> Result<f64> {
    if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::domain(format!(
            "need finite mu and sigma >= 0, got ({mu}, {sigma})"
        )));
    }
    Ok(DB_PER_NEPER_POWER * (mu + 0.5 * sigma * sigma))
}

/// Squared coefficient of variation of the log-normal, in dB.
pub fn b2_db(sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Err(Error::Degenerate(
            "B2 is -inf dB for a zero-spread fit".into(),
        ));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(10.0 * (sigma * sigma).exp_m1().log10())
}

/// A and B2 evaluated at a single carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyTerms {
    pub freq: Frequency,
    pub a_dbsm: f64,
    pub b2_db: f64,
}

pub fn frequency_terms(freq: Frequency, fit: &LognormalFit) -> Result<FrequencyTerms> {
    if fit.degenerate || fit.sigma == 0.0 {
        return Err(Error::Degenerate(format!("fit at {freq} has zero spread")));
    }
    Ok(FrequencyTerms {
        freq,
        a_dbsm: a_dbsm(fit.mu, fit.sigma)?,
        b2_db: b2_db(fit.sigma)?,
    })
}

/// Averages per-carrier A and B2 in dB and attaches `b1` and `cap_k`.
pub fn consolidate(
    per_freq: &BTreeMap<Frequency, LognormalFit>,
    b1: B1Spec,
    cap_k: f64,
) -> Result<RcsTriple> {
    if per_freq.is_empty() {
        return Err(Error::invalid("no per-frequency fits to consolidate"));
    }
    let degenerate: Vec<String> = per_freq
        .iter()
        .filter(|(_, f)| f.degenerate || f.sigma == 0.0)
        .map(|(freq, _)| freq.to_string())
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::Degenerate(format!(
            "zero-spread fit(s) at {}",
            degenerate.join(", ")
        )));
    }
    let terms = per_freq
        .iter()
        .map(|(f, fit)| frequency_terms(*f, fit))
        .collect::<Result<Vec<_>>>()?;
    let n = terms.len() as f64;
    let triple = RcsTriple {
        a_dbsm: terms.iter().map(|t| t.a_dbsm).sum::<f64>() / n,
        b1,
        b2_db: terms.iter().map(|t| t.b2_db).sum::<f64>() / n,
        cap_k,
    };
    triple.validate()?;
    Ok(triple)
}

/// Absolute deviation of a measured triple from a reference triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub delta_a_db: f64,
    pub delta_b2_db: f64,
    pub tolerance_db: f64,
    /// Both deviations are within `tolerance_db`.
    pub within: bool,
}

pub fn compare_to_standard(
    triple: &RcsTriple,
    standard: &RcsTriple,
    tolerance_db: f64,
) -> Result<Deviation> {
    if !triple.b1.is_constant() || !standard.b1.is_constant() {
        return Err(Error::Unsupported(
            "comparison is defined only for constant-B1 triples".into(),
        ));
    }
    if !(tolerance_db >= 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be >= 0, got {tolerance_db}"
        )));
    }
    let delta_a_db = (triple.a_dbsm - standard.a_dbsm).abs();
    let delta_b2_db = (triple.b2_db - standard.b2_db).abs();
    Ok(Deviation {
        delta_a_db,
        delta_b2_db,
        tolerance_db,
        within: delta_a_db <= tolerance_db && delta_b2_db <= tolerance_db,
    })
}

/// Default comparison tolerance, dB.
pub const DEFAULT_TOLERANCE_DB: f64 = 1.0;

/// Standardized triples for the target classes that have agreed values.
pub fn builtin_standards() -> BTreeMap<&'static str, RcsTriple> {
    BTreeMap::from([
        (
            "small_uav",
            RcsTriple::new(-12.81, B1Spec::Constant { db: 0.0 }, 3.74, DEFAULT_CAP_K),
        ),
        (
            "human",
            RcsTriple::new(-1.37, B1Spec::Constant { db: 0.0 }, 3.94, DEFAULT_CAP_K),
        ),
    ])
}

pub fn standard(name: &str) -> Option<RcsTriple> {
    builtin_standards().remove(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(ghz: f64) -> Frequency {
        Frequency::from_ghz(ghz).unwrap()
    }

    #[test]
    fn a_dbsm_examples() {
        assert!(a_dbsm(-0.5, 1.0).unwrap().abs() < 1e-15);
        assert!((a_dbsm(-3.79, 0.61).unwrap() - -15.65).abs() < 0.005);
        assert!((a_dbsm(-3.9, 1.4).unwrap() - -12.68).abs() < 0.005);
        assert!(a_dbsm(0.0, -1.0).is_err());
    }

    #[test]
    fn b2_db_examples() {
        assert!(b2_db(2f64.ln().sqrt()).unwrap().abs() < 1e-14);
        assert!((b2_db(1.4).unwrap() - 7.85).abs() < 0.005);
        assert!((b2_db(0.52).unwrap() - -5.08).abs() < 0.005);
        assert!(matches!(b2_db(0.0), Err(Error::Degenerate(_))));
        assert!(b2_db(-1.0).is_err());
    }

    #[test]
    fn consolidate_singleton_is_identity() {
        let fit = LognormalFit::from_params(-3.79, 0.61);
        let map = BTreeMap::from([(f(28.0), fit)]);
        let t = consolidate(&map, B1Spec::default(), 3.0).unwrap();
        assert_eq!(t.a_dbsm, a_dbsm(-3.79, 0.61).unwrap());
        assert_eq!(t.b2_db, b2_db(0.61).unwrap());
        assert_eq!(t.cap_k, 3.0);
    }

    #[test]
    fn consolidate_errors() {
        assert!(consolidate(&BTreeMap::new(), B1Spec::default(), 3.0).is_err());
        let map = BTreeMap::from([
            (f(25.0), LognormalFit::from_params(-3.0, 1.0)),
            (f(27.0), LognormalFit::from_params(-3.0, 0.0)),
        ]);
        let err = consolidate(&map, B1Spec::default(), 3.0).unwrap_err();
        assert!(err.to_string().contains("27 GHz"), "{err}");
    }

    #[test]
    fn compare_examples() {
        let measured = RcsTriple::flat(-13.57, 3.065);
        let std = standard("small_uav").unwrap();
        let d = compare_to_standard(&measured, &std, 1.0).unwrap();
        assert!((d.delta_a_db - 0.76).abs() < 1e-9);
        assert!((d.delta_b2_db - 0.675).abs() < 1e-9);
        assert!(d.within);

        let human = standard("human").unwrap();
        let d = compare_to_standard(&human, &human, 1e-9).unwrap();
        assert_eq!((d.delta_a_db, d.delta_b2_db), (0.0, 0.0));
        assert!(d.within);

        let angular = RcsTriple::new(
            -10.0,
            B1Spec::Table {
                angles_deg: vec![0.0, 90.0],
                gains_db: vec![0.0, -6.0],
                wrap: false,
            },
            3.0,
            3.0,
        );
        assert!(matches!(
            compare_to_standard(&angular, &std, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn builtin_standard_values() {
        let s = standard("small_uav").unwrap();
        assert_eq!((s.a_dbsm, s.b2_db, s.cap_k), (-12.81, 3.74, 3.0));
        assert_eq!(s.b1, B1Spec::Constant { db: 0.0 });
        let h = standard("human").unwrap();
        assert_eq!((h.a_dbsm, h.b2_db, h.cap_k), (-1.37, 3.94, 3.0));
        assert!(standard("agv").is_none());
        assert!(standard("mid_uav").is_none());
    }

    proptest! {
        #[test]
        fn unit_mean_gives_zero_dbsm(sigma in 0.0f64..4.0) {
            prop_assert!(a_dbsm(-0.5 * sigma * sigma, sigma).unwrap().abs() < 1e-12);
        }

        #[test]
        fn b2_strictly_increasing(a in 1e-3f64..4.0, b in 1e-3f64..4.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(b2_db(lo).unwrap() < b2_db(hi).unwrap());
        }

        #[test]
        fn self_comparison_is_zero(a in -40.0f64..20.0, b2 in -10.0f64..20.0) {
            let t = RcsTriple::flat(a, b2);
            let d = compare_to_standard(&t, &t, 0.0).unwrap();
            prop_assert_eq!((d.delta_a_db, d.delta_b2_db, d.within), (0.0, 0.0, true));
        }
    }
}
