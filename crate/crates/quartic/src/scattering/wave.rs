use super::series::DiagnosticSeries;
use crate::dynamics::Trajectory;
use crate::phase::CutoffSpec;
use crate::spectral::{free_propagate, ComplexField, Rep};
use crate::{Error, Result};

fn check_t(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::param(format!("time {t} must be >= 1")));
    }
    Ok(())
}

/// `F_c(|x|/t^α ≤ 1) F₁(t^b|P| > 1) e^{i(t−1)H₀} ψ(t)`, in position.
///
/// Requires `0 < b < α < 1`, the range in which both cutoffs tend to the identity
/// and the spatial window outgrows the spectral one.
pub fn free_channel_state(psi_t: &ComplexField, t: f64, alpha: f64, b: f64) -> Result<ComplexField> {
    check_t(t)?;
    if !(0.0 < b && b < alpha && alpha < 1.0) {
        return Err(Error::Inadmissible(format!("need 0 < b = {b} < alpha = {alpha} < 1")));
    }
    let grid = *psi_t.grid();
    let mut s = psi_t.to_rep(Rep::Spectrum);
    crate::spectral::free_propagate_spectrum(&mut s, -(t - 1.0))?;
    let s = CutoffSpec::spectral_outer(b).profile(&grid, t)?.apply_owned(s);
    Ok(CutoffSpec::spatial_inner(alpha).profile(&grid, t)?.apply_owned(s.into_position()))
}

/// `F_c(|x|/t^α ≤ 1) e^{i(t−1)H₀} ψ(t)`, in position. Any `α ∈ (0, 1)` is accepted;
/// the convergence guarantee needs `n ≥ 5` and `α < 1/2 − 2/n`.
pub fn free_channel_state_spatial_only(psi_t: &ComplexField, t: f64, alpha: f64) -> Result<ComplexField> {
    check_t(t)?;
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Inadmissible(format!("need 0 < alpha = {alpha} < 1")));
    }
    let phi = free_propagate(psi_t, -(t - 1.0))?.into_position();
    Ok(CutoffSpec::spatial_inner(alpha).profile(psi_t.grid(), t)?.apply_owned(phi))
}

/// `ψ_d(t) = ψ(t) − e^{−i(t−1)H₀} ψ(1)`.
pub fn scattered_remainder(traj: &Trajectory, t: f64) -> Result<ComplexField> {
    let psi = traj.state_at(t)?;
    let free = free_propagate(&traj.initial()?, t - 1.0)?.into_position();
    psi.into_position().sub(&free)
}

/// Which free channel operator a Cauchy series uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveOperator {
    /// `F_c F₁ e^{i(t−1)H₀}`
    Full { alpha: f64, b: f64 },
    /// `F_c e^{i(t−1)H₀}`
    SpatialOnly { alpha: f64 },
}

impl WaveOperator {
    pub fn apply(&self, psi_t: &ComplexField, t: f64) -> Result<ComplexField> {
        match *self {
            WaveOperator::Full { alpha, b } => free_channel_state(psi_t, t, alpha, b),
            WaveOperator::SpatialOnly { alpha } => free_channel_state_spatial_only(psi_t, t, alpha),
        }
    }
}

/// `‖W*(2t)ψ₀ − W*(t)ψ₀‖₂ / ‖ψ₀‖₂` at consecutive dyadic samples, labelled by the earlier `t`.
///
/// The extra column `partial_sum` holds the running sum of residuals.
pub fn wave_operator_residuals(traj: &Trajectory, op: WaveOperator) -> Result<DiagnosticSeries> {
    let label = match op {
        WaveOperator::Full { .. } => "wave_operator_residual",
        WaveOperator::SpatialOnly { .. } => "spatial_wave_operator_residual",
    };
    let mut series = DiagnosticSeries::new(label);
    let idx = traj.dyadic_indices();
    if idx.len() < 2 {
        return Err(Error::InsufficientSamples("fewer than two dyadic samples".into()));
    }
    let n0 = traj.initial_norm();
    let times = traj.times();
    let mut prev = op.apply(&traj.state(idx[0])?, times[idx[0]])?;
    let mut partial = Vec::new();
    let mut acc = 0.0;
    for w in idx.windows(2) {
        let cur = op.apply(&traj.state(w[1])?, times[w[1]])?;
        let r = cur.sub(&prev)?.norm() / n0;
        acc += r;
        series.push(times[w[0]], r);
        partial.push(acc);
        prev = cur;
    }
    series.add_column("partial_sum", partial)?;
    Ok(series)
}

/// `‖W*(t)ψ₀ − ψ₀‖₂ / ‖ψ₀‖₂` at the last sample; for `V = 0` this is the cutoff tail of `ψ₀`.
pub fn wave_operator_recovery(traj: &Trajectory, op: WaveOperator) -> Result<f64> {
    let last = traj.len() - 1;
    let t = traj.times()[last];
    let w = op.apply(&traj.state(last)?, t)?;
    let psi0 = traj.initial()?.into_position();
    Ok(w.sub(&psi0)?.norm() / psi0.norm())
}

/// The free profile `φ₊ ≈ ψ₀ + F_c F₁ e^{i(t−1)H₀} ψ_d(t)` and its Cauchy residuals.
#[derive(Debug, Clone)]
pub struct FreeProfile {
    pub t: f64,
    pub phi_plus: ComplexField,
    /// `‖ψ_{+,α,d}(2t) − ψ_{+,α,d}(t)‖₂ / ‖ψ₀‖₂` on dyadic samples of `times`
    pub residuals: DiagnosticSeries,
}

/// Evaluates the profile estimator at each of `times` (stored samples) and returns
/// the estimate at the last one together with the Cauchy residual series.
pub fn asymptotic_free_profile(traj: &Trajectory, alpha: f64, b: f64, times: &[f64]) -> Result<FreeProfile> {
    if times.is_empty() {
        return Err(Error::InsufficientSamples("empty schedule".into()));
    }
    let psi0 = traj.initial()?.into_position();
    let n0 = psi0.norm();
    let mut residuals = DiagnosticSeries::new("free_profile_residual");
    let mut prev: Option<(f64, ComplexField)> = None;
    for &t in times {
        let d = scattered_remainder(traj, t)?;
        let est = free_channel_state(&d, t, alpha, b)?;
        if let Some((tp, p)) = &prev {
            residuals.push(*tp, est.sub(p)?.norm() / n0);
        }
        prev = Some((t, est));
    }
    let (t, est) = prev.expect("non-empty schedule");
    Ok(FreeProfile { t, phi_plus: psi0.add(&est)?, residuals })
}

/// `‖ψ(t) − e^{−i(t−1)H₀}φ₊‖₂`.
pub fn profile_defect(traj: &Trajectory, profile: &FreeProfile, t: f64) -> Result<f64> {
    let psi = traj.state_at(t)?.into_position();
    let free = free_propagate(&profile.phi_plus, t - 1.0)?.into_position();
    Ok(psi.sub(&free)?.norm())
}
