use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phase::smooth_step;
use crate::{Error, Result};

/// Time modulation `m(t)` of a localized potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    Constant,
    Cosine { omega: f64 },
    /// `S(t / t_on)`: off before `t_on/2`, fully on after `t_on`
    SwitchOn { t_on: f64 },
}

impl Modulation {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Modulation::Constant => 1.0,
            Modulation::Cosine { omega } => (omega * t).cos(),
            Modulation::SwitchOn { t_on } => smooth_step(t / t_on),
        }
    }

    pub fn sup(&self) -> f64 {
        1.0
    }
}

/// `V₀·m(t)·⟨x⟩^{−σ}`; a non-zero imaginary part of `V₀` makes it non-real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedPotential {
    pub v0: Complex64,
    pub sigma: f64,
    pub modulation: Modulation,
}

impl LocalizedPotential {
    pub fn real(v0: f64, sigma: f64) -> Self {
        LocalizedPotential { v0: Complex64::new(v0, 0.0), sigma, modulation: Modulation::Constant }
    }

    pub fn envelope(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 + r2).powf(-self.sigma / 2.0)
    }

    /// `‖⟨x⟩^σ V‖_{L^∞_{t,x}}`, finite by construction.
    pub fn weighted_bound(&self) -> f64 {
        self.v0.norm() * self.modulation.sup()
    }

    /// Short-range condition `⟨x⟩^σ V ∈ L^∞` with `σ > 1`.
    pub fn is_short_range(&self) -> bool {
        self.sigma > 1.0
    }
}

/// `λ|ψ|^{p−1}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerNonlinearity {
    pub lambda: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    None,
    LinearLocalized,
    PowerNonlinear,
    Sum,
}

/// `𝒩(x, t, |ψ|)`: a localized potential, a power nonlinearity, both, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub potential: Option<LocalizedPotential>,
    pub nonlinearity: Option<PowerNonlinearity>,
}

impl InteractionSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn linear(v: LocalizedPotential) -> Self {
        InteractionSpec { potential: Some(v), nonlinearity: None }
    }

    pub fn power(lambda: f64, power: f64) -> Self {
        InteractionSpec { potential: None, nonlinearity: Some(PowerNonlinearity { lambda, power }) }
    }

    pub fn kind(&self) -> InteractionKind {
        match (self.potential.is_some(), self.nonlinearity.is_some()) {
            (false, false) => InteractionKind::None,
            (true, false) => InteractionKind::LinearLocalized,
            (false, true) => InteractionKind::PowerNonlinear,
            (true, true) => InteractionKind::Sum,
        }
    }

    pub fn is_real(&self) -> bool {
        self.potential.is_none_or(|v| v.v0.im == 0.0)
    }

    pub fn sigma(&self) -> Option<f64> {
        self.potential.map(|v| v.sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = &self.potential {
            if !(v.sigma >= 0.0 && v.sigma.is_finite()) {
                return Err(Error::param(format!("localization exponent {} must be >= 0", v.sigma)));
            }
            if !(v.v0.re.is_finite() && v.v0.im.is_finite()) {
                return Err(Error::NonFinite("potential amplitude".into()));
            }
            match v.modulation {
                Modulation::SwitchOn { t_on } if !(t_on > 0.0) => {
                    return Err(Error::param("switch-on time must be positive"))
                }
                Modulation::Cosine { omega } if !omega.is_finite() => {
                    return Err(Error::NonFinite("modulation frequency".into()))
                }
                _ => {}
            }
        }
        if let Some(n) = &self.nonlinearity {
            if !(n.power >= 1.0) {
                return Err(Error::param(format!("nonlinearity power {} must be >= 1", n.power)));
            }
            if !n.lambda.is_finite() {
                return Err(Error::NonFinite("nonlinear coupling".into()));
            }
        }
        Ok(())
    }

    /// The linear part `V(x, t)` only.
    pub fn potential_at(&self, x: &[f64], t: f64) -> Complex64 {
        match &self.potential {
            Some(v) => v.v0 * (v.modulation.at(t) * v.envelope(x)),
            None => Complex64::default(),
        }
    }
}

/// `𝒩(x, t, |ψ|)` at one point.
pub fn interaction_eval(spec: &InteractionSpec, x: &[f64], t: f64, amplitude: f64) -> Result<Complex64> {
    if !(t >= 1.0) {
        return Err(Error::param(format!("interaction time {t} must be >= 1")));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::NonFinite(format!("amplitude {amplitude}")));
    }
    spec.validate()?;
    let mut value = spec.potential_at(x, t);
    if let Some(n) = &spec.nonlinearity {
        value += n.lambda * amplitude.powf(n.power - 1.0);
    }
    Ok(value)
}
