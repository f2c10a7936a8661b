use num_complex::Complex64;

use super::evolve::{Observer, ObserverState, Sample, Trajectory};
use super::strang::interaction_field;
use crate::spectral::{free_propagate, ComplexField};
use crate::{Error, Result};

/// `e^{i(s−1)H₀} 𝒩ψ(s)`, the Duhamel integrand pulled back to `t = 1`.
fn pulled_back(traj_spec: &crate::dynamics::InteractionSpec, psi: &ComplexField, s: f64) -> Result<ComplexField> {
    let n = interaction_field(traj_spec, None, psi, s)?;
    free_propagate(&n, -(s - 1.0))
}

/// `‖ψ(t) − e^{−i(t−1)H₀}ψ(1) + i∫₁ᵗ e^{−i(t−s)H₀}𝒩ψ(s) ds‖₂ / ‖ψ(1)‖₂`, with the
/// integral by the trapezoid rule over the stored samples in `[1, t]`.
pub fn duhamel_residual(traj: &Trajectory, t: f64) -> Result<f64> {
    let end = traj
        .index_of(t)
        .ok_or_else(|| Error::InsufficientSamples(format!("no stored sample at t = {t}")))?;
    if end < 2 {
        return Err(Error::InsufficientSamples(format!("{} stored samples in [1, {t}], need 3", end + 1)));
    }
    let spec = traj.config().interaction;
    let psi0 = traj.initial()?;
    let times = traj.times();
    let mut integral = ComplexField::zeros(*psi0.grid(), psi0.rep());
    let mut prev = pulled_back(&spec, &psi0, times[0])?;
    for i in 1..=end {
        let cur = pulled_back(&spec, &traj.state(i)?, times[i])?;
        let h = 0.5 * (times[i] - times[i - 1]);
        integral = integral.axpy(Complex64::new(h, 0.0), &prev)?.axpy(Complex64::new(h, 0.0), &cur)?;
        prev = cur;
    }
    let phi = free_propagate(&traj.state(end)?, -(t - 1.0))?;
    let r = phi.sub(&psi0)?.axpy(Complex64::i(), &integral)?;
    Ok(r.norm() / psi0.norm())
}

/// Streams the Duhamel residual at every sample, for runs that store only a few states.
#[derive(Debug, Default)]
pub struct DuhamelObserver {
    initial: Option<ComplexField>,
    integral: Option<ComplexField>,
    last: Option<(f64, ComplexField)>,
    pub residuals: Vec<(f64, f64)>,
}

impl DuhamelObserver {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Observer for DuhamelObserver {
    fn name(&self) -> &str {
        "duhamel"
    }

    fn observe(&mut self, sample: &Sample<'_>) -> Result<()> {
        let cur = pulled_back(&sample.config.interaction, sample.psi, sample.t)?;
        let (initial, integral) = match (&self.initial, self.integral.take(), self.last.take()) {
            (Some(i), Some(acc), Some((tp, prev))) => {
                let h = Complex64::new(0.5 * (sample.t - tp), 0.0);
                (i, acc.axpy(h, &prev)?.axpy(h, &cur)?)
            }
            _ => {
                self.initial = Some(sample.psi.clone());
                let zero = ComplexField::zeros(*sample.psi.grid(), sample.psi.rep());
                (self.initial.as_ref().expect("just set"), zero)
            }
        };
        let phi = free_propagate(sample.psi, -(sample.t - 1.0))?;
        let r = phi.sub(initial)?.axpy(Complex64::i(), &integral)?;
        self.residuals.push((sample.t, r.norm() / initial.norm()));
        self.integral = Some(integral);
        self.last = Some((sample.t, cur));
        Ok(())
    }

    fn save_state(&self) -> ObserverState {
        let mut st = ObserverState::default();
        let (t, r): (Vec<f64>, Vec<f64>) = self.residuals.iter().copied().unzip();
        st.scalars.insert("t".into(), t);
        st.scalars.insert("residual".into(), r);
        if let (Some(i), Some(acc), Some((tp, prev))) = (&self.initial, &self.integral, &self.last) {
            st.scalars.insert("last_t".into(), vec![*tp]);
            st.fields.insert("initial".into(), i.clone());
            st.fields.insert("integral".into(), acc.clone());
            st.fields.insert("last".into(), prev.clone());
        }
        st
    }

    fn load_state(&mut self, st: &ObserverState) -> Result<()> {
        let t = st.scalars.get("t").cloned().unwrap_or_default();
        let r = st.scalars.get("residual").cloned().unwrap_or_default();
        self.residuals = t.into_iter().zip(r).collect();
        self.initial = st.fields.get("initial").cloned();
        self.integral = st.fields.get("integral").cloned();
        self.last = match (st.scalars.get("last_t"), st.fields.get("last")) {
            (Some(tp), Some(f)) if !tp.is_empty() => Some((tp[0], f.clone())),
            _ => None,
        };
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, GaussianPacket, InitialData, InteractionSpec, LocalizedPotential, RunConfig};
    use crate::spectral::make_grid;

    fn config(spec: InteractionSpec, stride: u64) -> RunConfig {
        let g = make_grid(1, 64, 160.0).unwrap();
        let init = InitialData { packets: vec![GaussianPacket::centred(1, 1.0)], q0: 1.0 };
        let mut c = RunConfig::new(g, spec, init, 1.0 / 64.0, 5.0);
        c.schedule.stride = stride;
        c.schedule.store_every = stride;
        c
    }

    #[test]
    fn free_residual_vanishes() {
        let traj = evolve(&config(InteractionSpec::none(), 16), &mut []).unwrap();
        assert!(duhamel_residual(&traj, 5.0).unwrap() <= 1e-12);
    }

    #[test]
    fn observer_matches_stored_quadrature() {
        let mut r = Vec::new();
        for stride in [1, 4, 8, 16] {
            let c = config(InteractionSpec::linear(LocalizedPotential::real(1.0, 5.0)), stride);
            let mut obs = DuhamelObserver::new();
            let traj = evolve(&c, &mut [&mut obs]).unwrap();
            let direct = duhamel_residual(&traj, 5.0).unwrap();
            let streamed = obs.residuals.last().unwrap().1;
            assert!((direct - streamed).abs() <= 1e-12, "{direct} vs {streamed}");
            r.push(direct);
        }
        assert!(r[0] < 1e-4);
        // trapezoid is second order once the stride resolves the lattice frequencies
        for w in r[1..].windows(2) {
            let ratio = w[1] / w[0];
            assert!((3.5..4.5).contains(&ratio), "{r:?}");
        }
    }

    #[test]
    fn too_few_samples() {
        let mut c = config(InteractionSpec::none(), 16);
        c.schedule.store_every = u64::MAX;
        c.schedule.dyadic = false;
        let traj = evolve(&c, &mut []).unwrap();
        assert!(matches!(duhamel_residual(&traj, 5.0), Err(Error::InsufficientSamples(_))));
    }
}
