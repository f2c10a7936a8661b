use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::series::{DiagnosticSeries, Verdict};
use crate::dynamics::{band_limit, envelope, InteractionSpec, Trajectory};
use crate::harness::{validate_params, TheoremMode};
use crate::phase::{op_norm_estimate, Chain, CutoffSpec, Diagonal, Multiplier, Sign};
use crate::spectral::{free_propagate, ComplexField, GridSpec, Rep};
use crate::{Error, Result};

/// `‖F_c F₁ e^{i(t−1)H₀} V ψ(t)‖₂` at the stored samples `times`, against `−(eδ − 1)`.
pub fn interaction_decay_probe(
    traj: &Trajectory,
    alpha: f64,
    b: f64,
    delta: f64,
    times: &[f64],
) -> Result<DiagnosticSeries> {
    let spec = traj.config().interaction;
    let pot = spec
        .potential
        .ok_or_else(|| Error::param("interaction decay needs a localized potential"))?;
    let report = validate_params(alpha, b, 0.0, Some(delta), Some(pot.sigma), traj.config().grid.dim(), TheoremMode::Prop21);
    if !report.admissible() {
        return Err(Error::Inadmissible(report.violations().join("; ")));
    }
    let decay = report.derived.decay.expect("prop21 derives the decay");
    let linear = InteractionSpec::linear(pot);
    let mut s = DiagnosticSeries::new("interaction_decay").with_reference(-decay);
    for &t in times {
        let psi = traj.state_at(t)?;
        let v = crate::dynamics::interaction_field(&linear, None, &psi, t)?;
        s.push(t, interaction_decay_value(&v, t, alpha, b)?);
    }
    Ok(s)
}

/// `‖F_c F₁ e^{i(t−1)H₀} f‖₂` for one field `f = Vψ(t)`.
pub fn interaction_decay_value(v_psi: &ComplexField, t: f64, alpha: f64, b: f64) -> Result<f64> {
    let grid = *v_psi.grid();
    let mut s = v_psi.to_rep(Rep::Spectrum);
    crate::spectral::free_propagate_spectrum(&mut s, -(t - 1.0))?;
    let s = CutoffSpec::spectral_outer(b).profile(&grid, t)?.apply_owned(s);
    Ok(CutoffSpec::spatial_inner(alpha).profile(&grid, t)?.apply_owned(s.into_position()).norm())
}

/// Smallest `C` with `value ≤ C t^{p}` on the series.
pub fn envelope_constant(series: &DiagnosticSeries, p: f64, window: (f64, f64)) -> f64 {
    series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= window.0 * (1.0 - 1e-12) && **t <= window.1 * (1.0 + 1e-12))
        .map(|(t, v)| v / t.powf(p))
        .fold(0.0, f64::max)
}

/// Band-limited near-delta data: spectrum `1 − S(|q|/q₀)`, Nyquist zeroed.
pub fn near_delta(grid: &GridSpec, q0: f64) -> ComplexField {
    let f = ComplexField::from_spectrum_fn(*grid, |q| Complex64::new(envelope(q, q0), 0.0));
    band_limit(f, 2.0 * q0)
}

// fraction of the mass allowed within 5% of the box edge before the series aborts
const EDGE_MASS_LIMIT: f64 = 1e-8;

/// `sup_x |D^γ e^{−i(t−1)H₀} ψ_δ|` at each of `times`, against `−(n + |γ|)/4`.
///
/// The times here are free-flow durations, so the state at `t` is `e^{−itH₀}ψ_δ`.
pub fn kernel_decay_probe(grid: &GridSpec, gamma: &[usize], q0: f64, times: &[f64]) -> Result<DiagnosticSeries> {
    let n = grid.dim();
    if gamma.len() != n {
        return Err(Error::param(format!("multi-index has {} entries on a {n}-d grid", gamma.len())));
    }
    let order: usize = gamma.iter().sum();
    if order > n {
        return Err(Error::param(format!("|gamma| = {order} exceeds the dimension {n}")));
    }
    let psi = near_delta(grid, q0);
    let deriv: Vec<Complex64> = grid.map_wavevectors(|q| {
        let mut z = Complex64::new(1.0, 0.0);
        for (a, &g) in gamma.iter().enumerate() {
            z *= Complex64::new(0.0, q[a]).powu(g as u32);
        }
        z
    });
    let d0 = psi.clone().mul_complex(&deriv);
    let edge = grid.map_positions(|x| {
        let near = (0..n).any(|a| x[a].abs() > 0.45 * grid.box_length()[a]);
        if near { 1.0 } else { 0.0 }
    });
    let total = psi.norm_sqr();
    let label = format!("kernel_decay_{n}d_g{order}");
    let mut s = DiagnosticSeries::new(label).with_reference(-((n + order) as f64) / 4.0);
    for &t in times {
        let mut f = psi.clone();
        crate::spectral::free_propagate_spectrum(&mut f, t)?;
        let x = f.into_position();
        let edge_mass: f64 =
            x.samples().iter().zip(&edge).map(|(z, e)| e * z.norm_sqr()).sum::<f64>() * x.measure();
        if edge_mass > EDGE_MASS_LIMIT * total {
            return Err(Error::WrapAround { t });
        }
        let mut g = d0.clone();
        crate::spectral::free_propagate_spectrum(&mut g, t)?;
        let sup = g.into_position().samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        s.push(t, sup);
    }
    Ok(s)
}

/// The operator families of the velocity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VelocityBound {
    /// `F₂(x₁ > t^{1/4+ε}) F₁(t^{1/4−ε/3}P₁ > 1/10) e^{iaH₀} ⟨x₁⟩^{−σ}`
    Mmvb1,
    /// `F₂(±x₁ > t^{1/4+ε}) F̄₁(±t^{1/4−ε/3}P₁ ≤ 1/10) e^{−iaH₀} ⟨x₁⟩^{−σ}`
    Mmvb2(Sign),
}

impl VelocityBound {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mmvb1" => Some(VelocityBound::Mmvb1),
            "mmvb2+" | "mmvb2_plus" => Some(VelocityBound::Mmvb2(Sign::Plus)),
            "mmvb2-" | "mmvb2_minus" => Some(VelocityBound::Mmvb2(Sign::Minus)),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            VelocityBound::Mmvb1 => "mmvb1",
            VelocityBound::Mmvb2(Sign::Plus) => "mmvb2_plus",
            VelocityBound::Mmvb2(Sign::Minus) => "mmvb2_minus",
        }
    }
}

/// Parameters shared by every point of a velocity-bound series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityParams {
    pub kind: VelocityBound,
    pub t: f64,
    pub sigma: f64,
    pub eps: f64,
    /// spectral band limit `1 − S(|q|/q₀)` inserted next to the free flow
    pub q0: f64,
}

/// The composed velocity-bound operator at flow parameter `a`.
///
/// The band limit keeps the free flow from wrapping fast modes around the
/// periodic box; it commutes with every spectral factor.
pub fn velocity_operator(grid: &GridSpec, p: &VelocityParams, a: f64) -> Result<Chain> {
    if !(p.sigma > 0.0) {
        return Err(Error::param(format!("sigma = {} must be positive", p.sigma)));
    }
    let s_exp = 0.25 + p.eps;
    let beta = 0.25 - p.eps / 3.0;
    let (sign, momentum, flow) = match p.kind {
        VelocityBound::Mmvb1 => (Sign::Plus, CutoffSpec::momentum_outer(0, Sign::Plus, beta, 0.1), -a),
        VelocityBound::Mmvb2(sign) => (sign, CutoffSpec::momentum_inner(0, sign, beta, 0.1), a),
    };
    let f2 = Diagonal::cutoff(*grid, &CutoffSpec::axis_outer(0, sign, s_exp), p.t)?;
    let f1 = momentum.profile(grid, p.t)?;
    let phases = crate::spectral::free_phases(grid, flow);
    let values: Vec<Complex64> = grid
        .map_wavevectors(|q| envelope(q, p.q0))
        .iter()
        .zip(&f1.values)
        .zip(&phases)
        .map(|((e, f), z)| z * (e * f))
        .collect();
    let spectral = Multiplier::new(*grid, values)?;
    let sigma = p.sigma;
    let weight = Diagonal::weight(*grid, move |x| (1.0 + x[0] * x[0]).powf(-sigma / 2.0));
    Chain::new(vec![Box::new(f2), Box::new(spectral), Box::new(weight)])
}

/// Operator norms over `a_schedule`, indexed by the scale `t^{1/4+ε} + |a|^{1/4}`.
///
/// The series times are the scale values; the column `a` holds the flow parameter.
pub fn velocity_bound_probe(
    grid: &GridSpec,
    p: &VelocityParams,
    a_schedule: &[f64],
    iters: usize,
    tol: f64,
) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new(format!("velocity_{}", p.kind.label())).with_reference(-p.sigma);
    let (mut a_col, mut it_col, mut conv) = (Vec::new(), Vec::new(), Vec::new());
    for &a in a_schedule {
        let op = velocity_operator(grid, p, a)?;
        let est = op_norm_estimate(&op, iters, tol)?;
        s.push(p.t.powf(0.25 + p.eps) + a.abs().powf(0.25), est.norm);
        a_col.push(a);
        it_col.push(est.iterations as f64);
        conv.push(if est.converged { 1.0 } else { 0.0 });
    }
    s.add_column("a", a_col)?;
    s.add_column("iterations", it_col)?;
    s.add_column("converged", conv)?;
    s.validate()?;
    Ok(s.judge(Verdict::AtMost { bound: -p.sigma + 0.5 }))
}

/// The same grid with twice the points per axis and the same box.
pub fn refined_grid(grid: &GridSpec) -> Result<GridSpec> {
    let n = grid.dim();
    let pts: Vec<usize> = grid.points()[..n].iter().map(|p| 2 * p).collect();
    GridSpec::new(&pts, &grid.box_length()[..n])
}

/// `|slope(a) − slope(b)|`, the resolution-doubling gate of a fitted exponent.
pub fn exponent_shift(a: &DiagnosticSeries, b: &DiagnosticSeries) -> Option<f64> {
    Some((a.fit?.slope - b.fit?.slope).abs())
}

/// `‖[F_c(|x|/t^α ≤ 1), F₁(t^b|P| > 1)]‖` at each of `times`, against `−(α − b)`.
pub fn commutator_norm_series(
    grid: &GridSpec,
    alpha: f64,
    b: f64,
    times: &[f64],
    iters: usize,
    tol: f64,
) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new("commutator_norm").with_reference(-(alpha - b));
    let mut its = Vec::new();
    for &t in times {
        let op = commutator_operator(grid, alpha, b, t)?;
        let est = op_norm_estimate(&op, iters, tol)?;
        s.push(t, est.norm);
        its.push(est.iterations as f64);
    }
    s.add_column("iterations", its)?;
    Ok(s.judge(Verdict::AtMost { bound: -(alpha - b) + 0.05 }))
}

pub fn commutator_operator(grid: &GridSpec, alpha: f64, b: f64, t: f64) -> Result<crate::phase::Commutator<Diagonal, Diagonal>> {
    Ok(crate::phase::Commutator {
        a: Diagonal::cutoff(*grid, &CutoffSpec::spatial_inner(alpha), t)?,
        b: Diagonal::cutoff(*grid, &CutoffSpec::spectral_outer(b), t)?,
    })
}

/// A fixed bank of unit-norm test fields.
#[derive(Debug, Clone)]
pub struct TestBank {
    pub names: Vec<String>,
    pub fields: Vec<ComplexField>,
}

impl TestBank {
    /// Gaussians of several centres and widths, Hermite functions along the first
    /// axis, and seeded random band-limited fields.
    pub fn standard(grid: &GridSpec, seed: u64) -> Self {
        let n = grid.dim();
        let mut bank = TestBank { names: Vec::new(), fields: Vec::new() };
        for (c, w) in [(0.0, 1.0), (4.0, 2.0), (-10.0, 3.0), (20.0, 5.0)] {
            bank.push(format!("gauss_c{c}_w{w}"), ComplexField::from_position_fn(*grid, |x| {
                let r2: f64 = (0..n).map(|a| if a == 0 { (x[a] - c).powi(2) } else { x[a] * x[a] }).sum();
                Complex64::new((-r2 / (2.0 * w * w)).exp(), 0.0)
            }));
        }
        for k in 1..=3usize {
            bank.push(format!("hermite_{k}"), ComplexField::from_position_fn(*grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::new(hermite(k, x[0]) * (-r2 / 2.0).exp(), 0.0)
            }));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..3 {
            let f = ComplexField::from_position_fn(*grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let env = (-r2 / 200.0).exp();
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * env
            });
            bank.push(format!("random_{k}"), band_limit(f, 1.0).into_position());
        }
        bank
    }

    fn push(&mut self, name: String, f: ComplexField) {
        let n = f.norm();
        if n > 0.0 {
            self.names.push(name);
            self.fields.push(f.scale(Complex64::new(1.0 / n, 0.0)));
        }
    }
}

/// Physicists' Hermite polynomial `H_k`.
fn hermite(k: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = 2.0 * x * h1 - 2.0 * j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `max_k |⟨test_k, (1 − F_c F₁) e^{i(t−1)H₀} ψ(t)⟩|` over the bank.
///
/// Column `bound` is `max_k ‖(1 − F₁F_c) test_k‖ ‖ψ(t)‖` and `bound_ratio` the
/// largest per-test ratio of value to bound, which must stay at or below one.
pub fn weak_vanishing_probe(
    traj: &Trajectory,
    bank: &TestBank,
    alpha: f64,
    b: f64,
    times: &[f64],
) -> Result<DiagnosticSeries> {
    let mut s = DiagnosticSeries::new("weak_vanishing");
    let (mut bounds, mut ratios) = (Vec::new(), Vec::new());
    for &t in times {
        let grid = traj.config().grid;
        let pc = CutoffSpec::spatial_inner(alpha).profile(&grid, t)?;
        let p1 = CutoffSpec::spectral_outer(b).profile(&grid, t)?;
        let psi = traj.state_at(t)?;
        let phi = free_propagate(&psi, -(t - 1.0))?.into_position();
        let cut = pc.apply_owned(p1.apply(&phi));
        let rest = phi.sub(&cut)?;
        let norm = psi.norm();
        let (mut vmax, mut bmax, mut rmax) = (0.0f64, 0.0f64, 0.0f64);
        for f in &bank.fields {
            let v = f.inner(&rest)?.norm();
            let adj = p1.apply_owned(pc.apply(f));
            let bound = f.sub(&adj)?.norm() * norm;
            vmax = vmax.max(v);
            bmax = bmax.max(bound);
            if bound > 0.0 {
                rmax = rmax.max(v / bound);
            } else if v > 1e-14 {
                rmax = f64::INFINITY;
            }
        }
        s.push(t, vmax);
        bounds.push(bmax);
        ratios.push(rmax);
    }
    s.add_column("bound", bounds)?;
    s.add_column("bound_ratio", ratios)?;
    Ok(s)
}

/// Log-spaced stored sample times in `[t_min, t_max]`, `per_octave` per doubling,
/// each snapped to the nearest stored sample.
pub fn log_spaced_times(traj: &Trajectory, t_min: f64, t_max: f64, per_octave: usize) -> Vec<f64> {
    let stored = traj.times();
    let mut out: Vec<f64> = Vec::new();
    let octaves = (t_max / t_min).log2();
    let steps = (octaves * per_octave as f64).round() as usize;
    for k in 0..=steps {
        let target = t_min * 2f64.powf(k as f64 / per_octave as f64);
        let nearest = stored
            .iter()
            .copied()
            .filter(|&t| t >= t_min * (1.0 - 1e-12) && t <= t_max * (1.0 + 1e-12))
            .min_by(|a, b| (a.ln() - target.ln()).abs().total_cmp(&(b.ln() - target.ln()).abs()));
        if let Some(t) = nearest {
            if out.last().is_none_or(|&l| t > l) {
                out.push(t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite(1, 0.5), 1.0);
        assert_eq!(hermite(2, 0.5), 4.0 * 0.25 - 2.0);
        assert_eq!(hermite(3, 1.0), 8.0 - 12.0);
    }

    #[test]
    fn zero_flow_velocity_bound_is_pure_localization() {
        let g = make_grid(1, 256, 256.0).unwrap();
        let p = VelocityParams { kind: VelocityBound::Mmvb1, t: 64.0, sigma: 2.0, eps: 0.1, q0: 0.6 };
        let op = velocity_operator(&g, &p, 0.0).unwrap();
        let n = op_norm_estimate(&op, 200, 1e-10).unwrap().norm;
        // F₂ vanishes below s/2, so ⟨x⟩^{−σ} is at most its value there
        let s = 64f64.powf(0.35);
        assert!(n <= (1.0 + s * s / 4.0).powf(-1.0) + 1e-9, "{n}");
    }

    #[test]
    fn kernel_probe_rejects_bad_multi_index() {
        let g = make_grid(1, 64, 64.0).unwrap();
        assert!(kernel_decay_probe(&g, &[2], 1.0, &[1.0]).is_err());
        assert!(kernel_decay_probe(&g, &[0, 0], 1.0, &[1.0]).is_err());
    }

    #[test]
    fn kernel_probe_detects_wrap() {
        let g = make_grid(1, 256, 64.0).unwrap();
        assert!(matches!(kernel_decay_probe(&g, &[0], 1.0, &[100.0]), Err(Error::WrapAround { .. })));
    }
}
