use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::interaction::InteractionSpec;
use crate::harness::{validate_params, TheoremMode};
use crate::phase::smooth_step;
use crate::spectral::{ComplexField, GridSpec};
use crate::{Error, Result};

/// `A e^{iξ·(x−c)} e^{−|x−c|²/(2w²)}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: Vec<f64>,
    pub width: f64,
    pub carrier: Vec<f64>,
    pub amplitude: f64,
}

impl GaussianPacket {
    pub fn centred(dim: usize, width: f64) -> Self {
        GaussianPacket { center: vec![0.0; dim], width, carrier: vec![0.0; dim], amplitude: 1.0 }
    }
}

/// Gaussian packets band-limited by the envelope `1 − S(|q|/q₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub packets: Vec<GaussianPacket>,
    pub q0: f64,
}

// packets are treated as supported within this many widths of their centre
const SUPPORT_WIDTHS: f64 = 4.0;

impl InitialData {
    pub fn support_radius(&self) -> f64 {
        self.packets
            .iter()
            .map(|p| p.center.iter().map(|c| c * c).sum::<f64>().sqrt() + SUPPORT_WIDTHS * p.width)
            .fold(0.0, f64::max)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.packets.is_empty() {
            return Err(Error::param("initial data needs at least one packet"));
        }
        if !(self.q0 > 0.0 && self.q0.is_finite()) {
            return Err(Error::param(format!("spectral envelope radius {} must be positive", self.q0)));
        }
        for (i, p) in self.packets.iter().enumerate() {
            if p.center.len() != dim || p.carrier.len() != dim {
                return Err(Error::param(format!("packet {i} does not have {dim} components")));
            }
            if !(p.width > 0.0) || !p.amplitude.is_finite() {
                return Err(Error::param(format!("packet {i} needs a positive width")));
            }
        }
        Ok(())
    }

    /// The state at `t = 1`: packets summed in position, then enveloped in spectrum
    /// with every Nyquist mode zeroed.
    pub fn prepare(&self, grid: &GridSpec) -> Result<ComplexField> {
        self.validate(grid.dim())?;
        let f = ComplexField::from_position_fn(*grid, |x| {
            self.packets.iter().map(|p| packet_value(p, x)).sum()
        });
        Ok(band_limit(f, self.q0).into_position())
    }
}

fn packet_value(p: &GaussianPacket, x: &[f64]) -> Complex64 {
    let mut r2 = 0.0;
    let mut phase = 0.0;
    for a in 0..x.len() {
        let d = x[a] - p.center[a];
        r2 += d * d;
        phase += p.carrier[a] * d;
    }
    Complex64::from_polar(p.amplitude * (-r2 / (2.0 * p.width * p.width)).exp(), phase)
}

/// Multiplies the spectrum by `1 − S(|q|/q₀)` and zeroes the Nyquist modes.
pub fn band_limit(f: ComplexField, q0: f64) -> ComplexField {
    let grid = *f.grid();
    let env = grid.map_wavevectors(|q| envelope(q, q0));
    let nyq = grid.nyquist_mask();
    let mut s = f.into_spectrum().mul_real(&env);
    for (z, &n) in s.samples_mut().iter_mut().zip(&nyq) {
        if n {
            *z = Complex64::default();
        }
    }
    s
}

pub fn envelope(q: &[f64], q0: f64) -> f64 {
    let r = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    1.0 - smooth_step(r / q0)
}

/// `2·(r₀ + 8 q₀³ T)`: twice the distance a wave of speed `4q₀³` covers after `2T`
/// beyond the initial support.
pub fn required_box_length(r0: f64, q0: f64, t_end: f64) -> f64 {
    2.0 * (r0 + 8.0 * q0.powi(3) * t_end)
}

/// Which steps are observed and which are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// observe at `t = 2^k`
    pub dyadic: bool,
    /// observe every `stride` steps
    pub stride: u64,
    /// store (in memory or on disk) every `store_every` steps, plus dyadic times
    pub store_every: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { dyadic: true, stride: 1, store_every: u64::MAX }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringParams {
    pub alpha: f64,
    pub b: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    /// α used for the weakly localized part, in `[1/4, 1/4 + ε)`
    pub alpha_weak: Option<f64>,
    pub mode: TheoremMode,
}

impl Default for ScatteringParams {
    fn default() -> Self {
        ScatteringParams {
            alpha: 0.2,
            b: 0.1,
            epsilon: 0.1,
            delta: None,
            alpha_weak: None,
            mode: TheoremMode::Thm1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub interaction: InteractionSpec,
    pub initial: InitialData,
    pub dt: f64,
    pub t_end: f64,
    pub schedule: Schedule,
    pub scattering: ScatteringParams,
    /// where checkpoints go; `None` keeps stored samples in memory
    pub output: Option<PathBuf>,
    pub seed: u64,
    /// weight exponent of the a-posteriori localization check on power nonlinearities
    pub check_sigma: f64,
    /// relative mass drift that aborts a run with a real interaction
    pub drift_tolerance: f64,
}

impl RunConfig {
    pub fn new(grid: GridSpec, interaction: InteractionSpec, initial: InitialData, dt: f64, t_end: f64) -> Self {
        RunConfig {
            grid,
            interaction,
            initial,
            dt,
            t_end,
            schedule: Schedule::default(),
            scattering: ScatteringParams::default(),
            output: None,
            seed: 0x5EED,
            check_sigma: interaction.sigma().unwrap_or(2.0),
            drift_tolerance: 1e-6,
        }
    }

    /// Steps per unit time; `dt` must be the reciprocal of an integer so dyadic times are exact.
    pub fn steps_per_unit(&self) -> Result<u64> {
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::param(format!("time step {} must lie in (0, 1]", self.dt)));
        }
        let m = (1.0 / self.dt).round();
        if (m * self.dt - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("time step {} is not 1/m for an integer m", self.dt)));
        }
        Ok(m as u64)
    }

    pub fn total_steps(&self) -> Result<u64> {
        let m = self.steps_per_unit()?;
        let n = (self.t_end - 1.0) * m as f64;
        if !(self.t_end > 1.0) || (n - n.round()).abs() > 1e-9 {
            return Err(Error::param(format!("horizon {} is not a positive whole number of steps past t = 1", self.t_end)));
        }
        Ok(n.round() as u64)
    }

    /// `t_n = 1 + n/m`, computed without accumulation.
    pub fn time_of(&self, step: u64) -> f64 {
        let m = (1.0 / self.dt).round();
        1.0 + step as f64 / m
    }

    pub fn is_dyadic(&self, step: u64) -> bool {
        let m = (1.0 / self.dt).round() as u64;
        step % m == 0 && (step / m + 1).is_power_of_two()
    }

    pub fn is_sample(&self, step: u64, last: u64) -> bool {
        step == 0
            || step == last
            || (self.schedule.stride > 0 && step % self.schedule.stride == 0)
            || (self.schedule.dyadic && self.is_dyadic(step))
    }

    pub fn is_stored(&self, step: u64, last: u64) -> bool {
        step == 0
            || step == last
            || (self.schedule.store_every > 0 && step % self.schedule.store_every == 0)
            || (self.schedule.dyadic && self.is_dyadic(step))
    }

    pub fn required_box_length(&self) -> f64 {
        required_box_length(self.initial.support_radius(), self.initial.q0, self.t_end)
    }

    pub fn validate(&self) -> Result<()> {
        self.interaction.validate()?;
        self.initial.validate(self.grid.dim())?;
        self.total_steps()?;
        if self.schedule.stride == 0 {
            return Err(Error::param("sample stride must be at least one step"));
        }
        let need = self.required_box_length();
        for (a, &l) in self.grid.box_length().iter().enumerate() {
            if l < need {
                return Err(Error::param(format!(
                    "axis {a}: box length {l} is below the sizing rule 2(r0 + 8 q0^3 T) = {need:.3}"
                )));
            }
        }
        let s = &self.scattering;
        let report = validate_params(
            s.alpha,
            s.b,
            s.epsilon,
            s.delta,
            self.interaction.sigma(),
            self.grid.dim(),
            s.mode,
        );
        if !report.admissible() {
            return Err(Error::Inadmissible(report.violations().join("; ")));
        }
        if let Some(aw) = s.alpha_weak {
            let bw = 0.25 - s.epsilon / 3.0;
            let weak = validate_params(aw, bw, s.epsilon, None, None, self.grid.dim(), TheoremMode::WeakLocalization);
            if !weak.admissible() {
                return Err(Error::Inadmissible(weak.violations().join("; ")));
            }
        }
        Ok(())
    }
}
