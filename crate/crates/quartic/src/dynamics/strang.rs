use num_complex::Complex64;

use super::interaction::InteractionSpec;
use crate::spectral::{free_phases, ComplexField, GridSpec, Rep};
use crate::{Error, Result};

// exponent beyond which a growing interaction phase is treated as blowup
const MAX_GROWTH_EXPONENT: f64 = 600.0;

/// Strang splitting `K(dt/2) · e^{−i dt H₀} · K(dt/2)` with precomputed tables.
///
/// `K(τ) = e^{−iτ𝒩(x, t + dt/2, |ψ|)}` with `|ψ|` read at the start of each kick;
/// for real `𝒩` the kick leaves `|ψ|` unchanged, so the substep is exact.
pub struct Stepper {
    grid: GridSpec,
    spec: InteractionSpec,
    dt: f64,
    phases: Vec<Complex64>,
    envelope: Option<Vec<f64>>,
}

impl Stepper {
    pub fn new(grid: GridSpec, spec: InteractionSpec, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("time step {dt} must be positive")));
        }
        spec.validate()?;
        let envelope = spec.potential.map(|v| grid.map_positions(|x| v.envelope(x)));
        Ok(Stepper { grid, spec, dt, phases: free_phases(&grid, dt), envelope })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances a position-space state from `t` to `t + dt`.
    pub fn step(&self, state: ComplexField, t: f64) -> Result<ComplexField> {
        state.expect_rep(Rep::Position)?;
        state.expect_same_grid_spec(&self.grid)?;
        let tm = t + 0.5 * self.dt;
        let mut s = state;
        self.kick(&mut s, tm)?;
        let mut s = s.into_spectrum();
        for (z, p) in s.samples_mut().iter_mut().zip(&self.phases) {
            *z *= p;
        }
        let mut s = s.into_position();
        self.kick(&mut s, tm)?;
        Ok(s)
    }

    fn kick(&self, s: &mut ComplexField, tm: f64) -> Result<()> {
        let half = 0.5 * self.dt;
        let vm = self.spec.potential.map(|v| v.v0 * v.modulation.at(tm));
        let nl = self.spec.nonlinearity;
        if vm.is_none() && nl.is_none() {
            return Ok(());
        }
        for (i, z) in s.samples_mut().iter_mut().enumerate() {
            let mut n = Complex64::default();
            if let (Some(vm), Some(env)) = (vm, &self.envelope) {
                n += vm * env[i];
            }
            if let Some(p) = nl {
                n += p.lambda * z.norm().powf(p.power - 1.0);
            }
            // e^{−iτn} = e^{τ Im n} e^{−iτ Re n}
            let growth = half * n.im;
            if !(growth < MAX_GROWTH_EXPONENT) || !n.re.is_finite() {
                return Err(Error::Blowup { t: tm, detail: format!("interaction phase {n} at site {i}") });
            }
            *z *= Complex64::from_polar(growth.exp(), -half * n.re);
        }
        if !s.is_finite() {
            return Err(Error::Blowup { t: tm, detail: "non-finite amplitude after kick".into() });
        }
        Ok(())
    }

    /// `𝒩(x, t, |ψ|) ψ` on the lattice.
    pub fn interaction_field(&self, psi: &ComplexField, t: f64) -> Result<ComplexField> {
        interaction_field(&self.spec, self.envelope.as_deref(), psi, t)
    }
}

/// `𝒩(x, t, |ψ|) ψ`, optionally reusing a precomputed `⟨x⟩^{−σ}` table.
pub fn interaction_field(
    spec: &InteractionSpec,
    envelope: Option<&[f64]>,
    psi: &ComplexField,
    t: f64,
) -> Result<ComplexField> {
    psi.expect_rep(Rep::Position)?;
    let mut out = psi.clone();
    let owned;
    let env = match (spec.potential, envelope) {
        (Some(_), Some(e)) => Some(e),
        (Some(v), None) => {
            owned = psi.grid().map_positions(|x| v.envelope(x));
            Some(&owned[..])
        }
        (None, _) => None,
    };
    let vm = spec.potential.map(|v| v.v0 * v.modulation.at(t));
    for (i, z) in out.samples_mut().iter_mut().enumerate() {
        let mut n = Complex64::default();
        if let (Some(vm), Some(env)) = (vm, env) {
            n += vm * env[i];
        }
        if let Some(p) = spec.nonlinearity {
            n += p.lambda * z.norm().powf(p.power - 1.0);
        }
        *z *= n;
    }
    Ok(out)
}

/// One Strang step of `state` from `t` to `t + dt`.
pub fn step_strang(state: &ComplexField, t: f64, dt: f64, spec: &InteractionSpec) -> Result<ComplexField> {
    Stepper::new(*state.grid(), *spec, dt)?.step(state.clone(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::LocalizedPotential;
    use crate::spectral::{free_propagate, make_grid};

    fn packet(g: GridSpec) -> ComplexField {
        ComplexField::from_position_fn(g, |x| Complex64::from_polar((-x[0] * x[0] / 4.0).exp(), 0.7 * x[0]))
    }

    #[test]
    fn free_case_is_the_free_flow() {
        let g = make_grid(1, 256, 60.0).unwrap();
        let f = packet(g);
        let a = step_strang(&f, 1.0, 0.1, &InteractionSpec::none()).unwrap();
        let b = free_propagate(&f, 0.1).unwrap();
        assert!(a.sub(&b).unwrap().norm() <= 1e-13 * f.norm());
    }

    #[test]
    fn real_potential_keeps_mass() {
        let g = make_grid(1, 256, 60.0).unwrap();
        let f = packet(g);
        let spec = InteractionSpec::linear(LocalizedPotential::real(3.0, 2.0));
        let a = step_strang(&f, 1.0, 0.1, &spec).unwrap();
        assert!((a.norm() - f.norm()).abs() <= 1e-12 * f.norm());
    }

    #[test]
    fn growth_aborts() {
        let g = make_grid(1, 64, 20.0).unwrap();
        let mut v = LocalizedPotential::real(0.0, 2.0);
        v.v0 = Complex64::new(0.0, 1e6);
        let r = step_strang(&packet(g), 1.0, 0.01, &InteractionSpec::linear(v));
        assert!(matches!(r, Err(Error::Blowup { .. })));
    }
}
