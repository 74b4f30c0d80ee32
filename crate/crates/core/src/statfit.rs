//! Log-normal maximum-likelihood fitting and goodness-of-fit scores.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::model::{LognormalFit, RcsSampleSet};

fn check_shape(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::domain(format!("mu must be finite, got {mu}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(())
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "log-normal support is x > 0, got {x}"
        )))
    }
}

/// Standard normal CDF via the complementary error function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_positive(x)?;
    check_shape(mu, sigma)?;
    let z = (x.ln() - mu) / sigma;
    Ok((-0.5 * z * z).exp() / (x * sigma * (2.0 * PI).sqrt()))
}

pub fn lognormal_cdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_shape(mu, sigma)?;
    check_positive(x)?;
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(std_normal_cdf((x.ln() - mu) / sigma))
}

/// Right-continuous empirical CDF over a sorted copy of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::domain("samples contain NaN"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples ≤ x.
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&s| s <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Runs of equal values as (value, first rank, last rank), ranks 1-based.
    fn tie_blocks(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.sorted.len() {
                return None;
            }
            let v = self.sorted[i];
            let start = i;
            while i < self.sorted.len() && self.sorted[i] == v {
                i += 1;
            }
            Some((v, start + 1, i))
        })
    }
}

/// Kolmogorov–Smirnov distance between the empirical CDF and a continuous
/// log-normal, evaluated on both sides of every step.
pub fn ks_statistic(samples: &[f64], mu: f64, sigma: f64) -> Result<f64> {
    check_shape(mu, sigma)?;
    let ecdf = EmpiricalCdf::new(samples)?;
    ks_against(&ecdf, |x| lognormal_cdf(x, mu, sigma))
}

fn ks_against(ecdf: &EmpiricalCdf, model: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let n = ecdf.len() as f64;
    let mut d = 0.0f64;
    for (x, first, last) in ecdf.tie_blocks() {
        let f = model(x)?;
        d = d.max((last as f64 / n - f).abs());
        d = d.max(((first - 1) as f64 / n - f).abs());
    }
    Ok(d.min(1.0))
}

/// Mean squared gap between empirical and model CDF at the samples, using the
/// upper step value (i/n at the i-th order statistic, ties share the top rank).
pub fn cdf_mse(samples: &[f64], mu: f64, sigma: f64) -> Result<f64> {
    check_shape(mu, sigma)?;
    let ecdf = EmpiricalCdf::new(samples)?;
    let n = ecdf.len() as f64;
    let mut total = 0.0;
    for (x, first, last) in ecdf.tie_blocks() {
        let gap = last as f64 / n - lognormal_cdf(x, mu, sigma)?;
        total += (last - first + 1) as f64 * gap * gap;
    }
    Ok(total / n)
}

/// ML estimate of (mu, sigma) of ln X with divisor n, plus KS and CDF-MSE.
///
/// When every sample is identical the fit is flagged degenerate with
/// sigma = 0; KS and MSE are then 0 because the point mass matches the data.
pub fn fit_lognormal(set: &RcsSampleSet) -> Result<LognormalFit> {
    fit_samples(&set.samples).map_err(|e| match e {
        Error::Domain(msg) => Error::Domain(format!("{} at {}: {msg}", set.target_id, set.freq)),
        other => other,
    })
}

pub fn fit_samples(samples: &[f64]) -> Result<LognormalFit> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "need at least 2 samples to fit, got {n}"
        )));
    }
    if let Some(bad) = samples.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::domain(format!(
            "samples must be positive and finite, found {bad}"
        )));
    }
    let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let first = logs[0];
    if logs.iter().all(|&l| l == first) {
        return Ok(LognormalFit {
            mu: first,
            sigma: 0.0,
            n,
            ks: 0.0,
            mse: 0.0,
            degenerate: true,
        });
    }
    let nf = n as f64;
    let mu = logs.iter().sum::<f64>() / nf;
    let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / nf;
    let sigma = var.sqrt();
    Ok(LognormalFit {
        mu,
        sigma,
        n,
        ks: ks_statistic(samples, mu, sigma)?,
        mse: cdf_mse(samples, mu, sigma)?,
        degenerate: false,
    })
}

/// Empirical-vs-fitted curves on a logarithmic grid spanning the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub empirical_pdf: f64,
    pub fitted_pdf: f64,
    pub empirical_cdf: f64,
    pub fitted_cdf: f64,
}

pub const CURVE_POINTS: usize = 200;

/// Plot-ready PDF/CDF comparison. The empirical PDF is a histogram density
/// over log-spaced bins centred (geometrically) on each grid point.
pub fn fit_curves(samples: &[f64], fit: &LognormalFit, points: usize) -> Result<Vec<CurvePoint>> {
    if fit.degenerate {
        return Err(Error::Degenerate(
            "cannot draw curves for a zero-spread fit".into(),
        ));
    }
    if points < 2 {
        return Err(Error::domain("need at least 2 curve points"));
    }
    let ecdf = EmpiricalCdf::new(samples)?;
    let lo = ecdf.sorted()[0].ln();
    let hi = ecdf.sorted()[ecdf.len() - 1].ln();
    let span = (hi - lo).max(f64::EPSILON);
    let step = span / (points - 1) as f64;
    let n = ecdf.len() as f64;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let lx = lo + step * i as f64;
        let x = match i {
            0 => ecdf.sorted()[0],
            i if i == points - 1 => ecdf.sorted()[ecdf.len() - 1],
            _ => lx.exp(),
        };
        let left = (lx - 0.5 * step).exp();
        let right = (lx + 0.5 * step).exp();
        let count = ecdf.sorted().partition_point(|&s| s <= right)
            - ecdf.sorted().partition_point(|&s| s <= left);
        out.push(CurvePoint {
            x,
            empirical_pdf: count as f64 / (n * (right - left)),
            fitted_pdf: lognormal_pdf(x, fit.mu, fit.sigma)?,
            empirical_cdf: ecdf.eval(x),
            fitted_cdf: lognormal_cdf(x, fit.mu, fit.sigma)?,
        });
    }
    Ok(out)
}
