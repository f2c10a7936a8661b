use serde::{Deserialize, Serialize};

use crate::scattering::DiagnosticSeries;
use crate::{Error, Result};

pub const MIN_FIT_POINTS: usize = 5;

/// Least-squares line through `(log t, log value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log deviations
    pub residual: f64,
    pub points: usize,
    pub window: (f64, f64),
}

impl PowerLawFit {
    /// `e^{intercept} t^{slope}`
    pub fn eval(&self, t: f64) -> f64 {
        (self.intercept + self.slope * t.ln()).exp()
    }
}

fn in_window(t: f64, (a, b): (f64, f64)) -> bool {
    let tol = 1e-9 * a.abs().max(b.abs()).max(1.0);
    t >= a - tol && t <= b + tol
}

/// Fits `value ≈ C t^{slope}` over the samples with `t ∈ [a, b]`.
pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    if times.len() != values.len() {
        return Err(Error::param("times and values differ in length"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if !in_window(t, window) {
            continue;
        }
        if !(v > 0.0 && v.is_finite() && t > 0.0) {
            return Err(Error::param(format!("value {v} at t = {t} is not positive")));
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientSamples(format!(
            "{n} points in window [{}, {}], need {MIN_FIT_POINTS}",
            window.0, window.1
        )));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientSamples("window holds a single time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit { slope, intercept, residual: (ss / n as f64).sqrt(), points: n, window })
}

/// Fits a series over `window` and returns `(slope, intercept, residual)`.
pub fn fit_exponent(series: &DiagnosticSeries, window: (f64, f64)) -> Result<(f64, f64, f64)> {
    let f = fit_power_law(&series.times, &series.values, window)?;
    Ok((f.slope, f.intercept, f.residual))
}
