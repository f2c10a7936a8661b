use serde::{Deserialize, Serialize};

use crate::harness::{fit_power_law, PowerLawFit};
use crate::{Error, Result};

/// How a fitted exponent is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// `slope ≤ bound`
    AtMost { bound: f64 },
    /// `|slope − target| ≤ tol`
    Within { target: f64, tol: f64 },
    ReportOnly,
}

/// A time-indexed diagnostic with an optional power-law fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// additional named columns, same length as `times`
    pub extra: Vec<(String, Vec<f64>)>,
    pub reference_exponent: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub fit: Option<PowerLawFit>,
    pub verdict: Verdict,
}

impl DiagnosticSeries {
    pub fn new(label: impl Into<String>) -> Self {
        DiagnosticSeries {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
            extra: Vec::new(),
            reference_exponent: None,
            window: None,
            fit: None,
            verdict: Verdict::ReportOnly,
        }
    }

    pub fn with_reference(mut self, exponent: f64) -> Self {
        self.reference_exponent = Some(exponent);
        self
    }

    pub fn push(&mut self, t: f64, value: f64) {
        self.times.push(t);
        self.values.push(value);
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::param("extra column length differs from the series"));
        }
        self.extra.push((name.into(), values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.extra.iter().find(|(n, _)| n == name).map(|(_, v)| &v[..])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Times strictly increasing, values finite, window inside the sampled range.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len() {
            return Err(Error::param(format!("{}: times and values differ in length", self.label)));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param(format!("{}: times are not strictly increasing", self.label)));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{}: value at t = {}", self.label, self.times[i])));
        }
        if let (Some((a, b)), Some(&lo), Some(&hi)) = (self.window, self.times.first(), self.times.last()) {
            let tol = 1e-9 * hi.abs().max(1.0);
            if a < lo - tol || b > hi + tol {
                return Err(Error::param(format!("{}: fit window [{a}, {b}] outside [{lo}, {hi}]", self.label)));
            }
        }
        Ok(())
    }

    /// Fits over `window` and keeps the result.
    pub fn fit_window(&mut self, window: (f64, f64)) -> Result<PowerLawFit> {
        let f = fit_power_law(&self.times, &self.values, window)?;
        self.window = Some(window);
        self.fit = Some(f);
        Ok(f)
    }

    pub fn judge(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    /// Signed distance to failure; positive passes. `None` without a fit or in report-only mode.
    pub fn margin(&self) -> Option<f64> {
        let slope = self.fit?.slope;
        match self.verdict {
            Verdict::AtMost { bound } => Some(bound - slope),
            Verdict::Within { target, tol } => Some(tol - (slope - target).abs()),
            Verdict::ReportOnly => None,
        }
    }

    pub fn passes(&self) -> Option<bool> {
        self.margin().map(|m| m >= 0.0)
    }

    /// Whether the values never increase after index `from`, allowing `rel` relative slack.
    pub fn nonincreasing_from(&self, from: usize, rel: f64) -> bool {
        self.values[from.min(self.values.len())..].windows(2).all(|w| w[1] <= w[0] * (1.0 + rel))
    }

    /// Index of the first time `≥ t`.
    pub fn index_at_or_after(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s >= t * (1.0 - 1e-12))
    }

    /// JSON summary: label, fit, reference, verdict and margin.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label,
            "points": self.times.len(),
            "reference_exponent": self.reference_exponent,
            "fit_window": self.window.map(|(a, b)| [a, b]),
            "fitted_exponent": self.fit.map(|f| f.slope),
            "fit_intercept": self.fit.map(|f| f.intercept),
            "fit_residual": self.fit.map(|f| f.residual),
            "verdict": self.verdict,
            "margin": self.margin(),
            "pass": self.passes(),
            "final_value": self.last().map(|p| p.1),
        })
    }
}
