//! System-factor calibration and radar-equation inversion.
//!
//! With the receiver placed at the target point, the free-space link gives
//! `P_r = P_t·G_t·G_r·λ²·L / ((4π)²·d²)`. Normalizing by `4π·d²` yields
//! `K = P_r / (4π·d²)`, which equals `P_t·G_t·G_r·λ²·L / ((4π)³·d⁴)`: exactly
//! the factor multiplying RCS in the monostatic radar equation. The unknown
//! gains and losses therefore cancel and RCS = P_tar / K.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Frequency, Geometry, PowerValue, SystemFactor};

/// Transmit chain parameters. Only the synthetic measurement generator needs
/// these; real measurements fold them into [`SystemFactor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Transmit power, linear.
    pub p_t: f64,
    /// Transmit antenna gain, linear.
    pub g_t: f64,
    /// Receive antenna gain, linear.
    pub g_r: f64,
    /// System loss factor, linear (≤ 1 for a loss).
    pub loss: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            p_t: 1.0,
            g_t: 1.0,
            g_r: 1.0,
            loss: 1.0,
        }
    }
}

impl LinkBudget {
    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("p_t", self.p_t),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("loss", self.loss),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("link {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    fn product(&self) -> f64 {
        self.p_t * self.g_t * self.g_r * self.loss
    }
}

pub fn system_factor(freq: Frequency, p_r: PowerValue, d: f64) -> Result<SystemFactor> {
    if !(p_r.value() > 0.0) {
        return Err(Error::domain(format!(
            "calibration power at {freq} must be > 0, got {}",
            p_r.value()
        )));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!(
            "calibration distance must be > 0, got {d}"
        )));
    }
    Ok(SystemFactor {
        freq,
        k_cal: p_r.value() / (4.0 * PI * d * d),
    })
}

/// RCS (m²) from differential target power: σ = P_tar / K.
pub fn rcs_from_power(p_tar: PowerValue, k: &SystemFactor) -> Result<f64> {
    if !(p_tar.value() > 0.0) {
        return Err(Error::domain(format!(
            "target power must be > 0, got {}",
            p_tar.value()
        )));
    }
    if !(k.k_cal > 0.0) || !k.k_cal.is_finite() {
        return Err(Error::domain(format!(
            "system factor must be > 0, got {}",
            k.k_cal
        )));
    }
    Ok(p_tar.value() / k.k_cal)
}

/// Monostatic radar equation: `P_t·G_t·G_r·λ²·σ·L / ((4π)³·d⁴)`.
pub fn forward_radar_power(
    rcs_m2: f64,
    freq: Frequency,
    geom: &Geometry,
    link: &LinkBudget,
) -> Result<PowerValue> {
    if !(rcs_m2 > 0.0) || !rcs_m2.is_finite() {
        return Err(Error::domain(format!("RCS must be > 0, got {rcs_m2}")));
    }
    link.check()?;
    let d = geom.monostatic_range()?;
    let lambda = freq.wavelength_m();
    let four_pi = 4.0 * PI;
    PowerValue::new(link.product() * lambda * lambda * rcs_m2 / (four_pi.powi(3) * d.powi(4)))
}

/// One-way free-space received power at range `d`:
/// `P_t·G_t·G_r·λ²·L / ((4π)²·d²)`.
pub fn free_space_power(freq: Frequency, d: f64, link: &LinkBudget) -> Result<PowerValue> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("range must be > 0, got {d}")));
    }
    link.check()?;
    let lambda = freq.wavelength_m();
    let four_pi = 4.0 * PI;
    PowerValue::new(link.product() * lambda * lambda / (four_pi.powi(2) * d * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(ghz: f64) -> Frequency {
        Frequency::from_ghz(ghz).unwrap()
    }

    fn pw(x: f64) -> PowerValue {
        PowerValue::new(x).unwrap()
    }

    fn at_range(d: f64) -> Geometry {
        Geometry {
            d_tx_tar: d,
            d_rx_tar: d,
            ..Geometry::default()
        }
    }

    /// Frequency whose wavelength is exactly representable as 1 m.
    fn unit_wavelength() -> Frequency {
        f(crate::model::SPEED_OF_LIGHT / 1e9)
    }

    #[test]
    fn system_factor_examples() {
        let k = system_factor(f(28.0), pw(1.0), 3.0).unwrap();
        assert!((k.k_cal - 1.0 / (36.0 * PI)).abs() < 1e-15);
        assert!((k.k_cal - 8.8419e-3).abs() < 1e-7);
        let k = system_factor(f(28.0), pw(4.0 * PI), 1.0).unwrap();
        assert!((k.k_cal - 1.0).abs() < 1e-15);
        assert!(system_factor(f(28.0), pw(0.0), 3.0).is_err());
        assert!(system_factor(f(28.0), pw(1.0), 0.0).is_err());
    }

    #[test]
    fn system_factor_recovers_free_space_expression() {
        let link = LinkBudget {
            p_t: 0.1,
            g_t: 100.0,
            g_r: 50.0,
            loss: 0.3,
        };
        let freq = f(26.0);
        let d = 3.0;
        let p_r = free_space_power(freq, d, &link).unwrap();
        let k = system_factor(freq, p_r, d).unwrap();
        let lambda = freq.wavelength_m();
        let expected =
            link.product() * lambda * lambda / ((4.0 * PI).powi(2) * d * d) / (4.0 * PI * d * d);
        assert!(((k.k_cal - expected) / expected).abs() < 1e-14);
    }

    #[test]
    fn rcs_from_power_examples() {
        let k = SystemFactor {
            freq: f(28.0),
            k_cal: 3.7e-7,
        };
        assert!((rcs_from_power(pw(3.7e-7), &k).unwrap() - 1.0).abs() < 1e-15);
        assert!((rcs_from_power(pw(7.4e-7), &k).unwrap() - 2.0).abs() < 1e-15);
        assert!(rcs_from_power(pw(0.0), &k).is_err());
        assert!(rcs_from_power(
            pw(1.0),
            &SystemFactor {
                freq: f(28.0),
                k_cal: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn forward_radar_power_examples() {
        let unit = LinkBudget::default();
        let p = forward_radar_power(1.0, unit_wavelength(), &at_range(1.0), &unit).unwrap();
        assert!((p.value() - 1.0 / (4.0 * PI).powi(3)).abs() < 1e-15);
        assert!((p.value() - 5.0393e-4).abs() < 1e-8);

        let p1 = forward_radar_power(0.3, f(27.0), &at_range(2.0), &unit)
            .unwrap()
            .value();
        let p2 = forward_radar_power(0.3, f(27.0), &at_range(4.0), &unit)
            .unwrap()
            .value();
        assert!((p1 / p2 - 16.0).abs() < 1e-12);

        let uneven = Geometry {
            d_tx_tar: 3.0,
            d_rx_tar: 3.1,
            ..Geometry::default()
        };
        assert!(forward_radar_power(1.0, f(28.0), &uneven, &unit).is_err());
        assert!(forward_radar_power(0.0, f(28.0), &at_range(3.0), &unit).is_err());
    }

    #[test]
    fn synthetic_end_to_end_point() {
        let link = LinkBudget {
            p_t: 1.0,
            g_t: 100.0,
            g_r: 100.0,
            loss: 0.5,
        };
        let geom = Geometry::default();
        let freq = f(28.0);
        let p_tar = forward_radar_power(0.05, freq, &geom, &link).unwrap();
        let k = system_factor(freq, free_space_power(freq, 3.0, &link).unwrap(), 3.0).unwrap();
        assert!((rcs_from_power(p_tar, &k).unwrap() - 0.05).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn per_unit_rcs_power_equals_system_factor(
            sigma in 1e-4f64..1e2,
            ghz in prop::sample::select(vec![25.0, 26.0, 27.0, 28.0]),
            d in 0.5f64..20.0,
            p_t in 1e-3f64..10.0,
            g in 1.0f64..1e3,
            loss in 1e-3f64..1.0,
        ) {
            let link = LinkBudget { p_t, g_t: g, g_r: g * 0.5, loss };
            let freq = f(ghz);
            let p = forward_radar_power(sigma, freq, &at_range(d), &link).unwrap().value();
            let k = system_factor(freq, free_space_power(freq, d, &link).unwrap(), d).unwrap();
            prop_assert!(((p / sigma - k.k_cal) / k.k_cal).abs() < 1e-12);
        }

        #[test]
        fn forward_power_is_linear(sigma in 1e-3f64..10.0, scale in 0.1f64..10.0) {
            let unit = LinkBudget::default();
            let g = Geometry::default();
            let base = forward_radar_power(sigma, f(28.0), &g, &unit).unwrap().value();
            let by_rcs = forward_radar_power(sigma * scale, f(28.0), &g, &unit).unwrap().value();
            let by_pt = forward_radar_power(sigma, f(28.0), &g, &LinkBudget { p_t: scale, ..unit }).unwrap().value();
            let by_loss = forward_radar_power(sigma, f(28.0), &g, &LinkBudget { loss: scale, ..unit }).unwrap().value();
            for v in [by_rcs, by_pt, by_loss] {
                prop_assert!(((v / base - scale) / scale).abs() < 1e-12);
            }
        }
    }
}
