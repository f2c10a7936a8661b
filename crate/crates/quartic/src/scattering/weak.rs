use super::series::DiagnosticSeries;
use super::wave::scattered_remainder;
use crate::dynamics::Trajectory;
use crate::harness::{validate_params, TheoremMode};
use crate::phase::{directional_partition, CutoffSpec, Sign};
use crate::spectral::{free_propagate, norms_and_moments, ComplexField, NormKind};
use crate::{Error, Result};

/// One leakage field `ψ_{ε,j,±}`.
#[derive(Debug, Clone)]
pub struct Leakage {
    pub axis: usize,
    pub sign: Sign,
    pub field: ComplexField,
}

/// `ψ_{w,ε}(t)` with its leakage companions and the field they partition.
#[derive(Debug, Clone)]
pub struct WeakDecomposition {
    pub t: f64,
    /// `e^{−i(t−1)H₀} F̄_c(|x|/t^α > 1) e^{i(t−1)H₀} ψ_d(t)`
    pub base: ComplexField,
    pub weak: ComplexField,
    pub leakage: Vec<Leakage>,
}

impl WeakDecomposition {
    /// `‖base − ψ_w − Σ ψ_{ε,j,±}‖₂`
    pub fn partition_defect(&self) -> Result<f64> {
        let mut r = self.base.sub(&self.weak)?;
        for l in &self.leakage {
            r = r.sub(&l.field)?;
        }
        Ok(r.norm())
    }
}

fn check_weak(alpha: f64, eps: f64, n: usize) -> Result<()> {
    let report = validate_params(alpha, 0.25 - eps / 3.0, eps, None, None, n, TheoremMode::WeakLocalization);
    if !report.admissible() {
        return Err(Error::Inadmissible(report.violations().join("; ")));
    }
    Ok(())
}

/// Splits `ψ_d` at `t` into the directional box part and the outgoing legs, with
/// box half-width `t^{1/4+ε}`.
pub fn weak_decomposition(psi_d: &ComplexField, t: f64, alpha: f64, eps: f64) -> Result<WeakDecomposition> {
    let grid = *psi_d.grid();
    check_weak(alpha, eps, grid.dim())?;
    let phi = free_propagate(psi_d, -(t - 1.0))?.into_position();
    let phi = CutoffSpec::spatial_outer(alpha).profile(&grid, t)?.apply_owned(phi);
    let base = free_propagate(&phi, t - 1.0)?.into_position();
    let (box_profile, legs) = directional_partition(&grid, 0.25 + eps, t)?;
    let weak = box_profile.apply(&base);
    let mut leakage = Vec::with_capacity(2 * legs.len());
    for (axis, (plus, minus)) in legs.iter().enumerate() {
        leakage.push(Leakage { axis, sign: Sign::Plus, field: plus.apply(&base) });
        leakage.push(Leakage { axis, sign: Sign::Minus, field: minus.apply(&base) });
    }
    Ok(WeakDecomposition { t, base, weak, leakage })
}

/// `ψ_{w,ε}(t) = ∏ₗ F̄₂(|xₗ| ≤ t^{1/4+ε}) e^{−i(t−1)H₀} F̄_c(|x|/t^α > 1) e^{i(t−1)H₀} ψ_d(t)`.
pub fn weakly_localized_part(traj: &Trajectory, t: f64, alpha: f64, eps: f64) -> Result<ComplexField> {
    Ok(weak_decomposition(&scattered_remainder(traj, t)?, t, alpha, eps)?.weak)
}

/// The weak decomposition at each of `times`, reduced to scalars.
#[derive(Debug, Clone)]
pub struct WeakLocalizationSeries {
    /// `(ψ_w, |x| ψ_w)`
    pub moment: DiagnosticSeries,
    /// `max_{j,±} ‖ψ_{ε,j,±}‖₂`, with one extra column per leg
    pub leakage: DiagnosticSeries,
    /// `‖ψ_d‖₂`, `Σ‖ψ_{ε,j,±}‖²` and the partition defect
    pub bookkeeping: DiagnosticSeries,
}

pub fn weak_localization_series(
    traj: &Trajectory,
    alpha: f64,
    eps: f64,
    times: &[f64],
) -> Result<WeakLocalizationSeries> {
    let mut moment = DiagnosticSeries::new("weak_part_abs_x_moment").with_reference(0.25 + eps);
    let mut leakage = DiagnosticSeries::new("directional_leakage");
    let mut book = DiagnosticSeries::new("weak_part_bookkeeping");
    let mut legs: Vec<(String, Vec<f64>)> = Vec::new();
    let (mut sq, mut defect, mut weak_norm) = (Vec::new(), Vec::new(), Vec::new());
    for &t in times {
        let d = scattered_remainder(traj, t)?;
        let dec = weak_decomposition(&d, t, alpha, eps)?;
        moment.push(t, norms_and_moments(&dec.weak, NormKind::AbsXMoment)?);
        let norms: Vec<f64> = dec.leakage.iter().map(|l| l.field.norm()).collect();
        if legs.is_empty() {
            legs = dec
                .leakage
                .iter()
                .map(|l| (format!("axis{}_{}", l.axis, if l.sign == Sign::Plus { "plus" } else { "minus" }), Vec::new()))
                .collect();
        }
        for (c, v) in legs.iter_mut().zip(&norms) {
            c.1.push(*v);
        }
        leakage.push(t, norms.iter().copied().fold(0.0, f64::max));
        book.push(t, d.norm());
        sq.push(norms.iter().map(|v| v * v).sum());
        defect.push(dec.partition_defect()?);
        weak_norm.push(dec.weak.norm());
    }
    for (name, v) in legs {
        leakage.add_column(name, v)?;
    }
    book.add_column("leakage_sq_sum", sq)?;
    book.add_column("partition_defect", defect)?;
    book.add_column("weak_norm", weak_norm)?;
    Ok(WeakLocalizationSeries { moment, leakage, bookkeeping: book })
}

/// Per-direction leakage norms `‖ψ_{ε,j,±}(t)‖₂`; the value column is their maximum.
pub fn directional_leakage_probe(traj: &Trajectory, alpha: f64, eps: f64, times: &[f64]) -> Result<DiagnosticSeries> {
    Ok(weak_localization_series(traj, alpha, eps, times)?.leakage)
}

/// Final leakage over peak leakage, the decay ratio the probe is judged by.
pub fn leakage_decay_ratio(series: &DiagnosticSeries) -> Option<f64> {
    let peak = series.max_value();
    let (_, last) = series.last()?;
    (peak > 0.0).then(|| last / peak)
}
