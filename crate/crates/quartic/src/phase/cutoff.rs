use serde::{Deserialize, Serialize};

use super::smooth::{smooth_step, smooth_step_derivative};
use crate::spectral::{ComplexField, GridSpec, Rep};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Spatial,
    Spectral,
}

impl Domain {
    pub fn rep(self) -> Rep {
        match self {
            Domain::Spatial => Rep::Position,
            Domain::Spectral => Rep::Spectrum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The scalar the cutoff looks at: `|v|`, or a signed component `±v_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Radial,
    Axis { axis: usize, sign: Sign },
    /// `|v_j|`
    AbsAxis { axis: usize },
}

/// Threshold `a(t)` the coordinate is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    /// `a(t) = t^p`
    Power(f64),
    Constant(f64),
}

impl Threshold {
    pub fn at(self, t: f64) -> f64 {
        match self {
            Threshold::Power(p) => t.powf(p),
            Threshold::Constant(a) => a,
        }
    }

    /// `d log a / d log t`
    fn log_rate(self) -> f64 {
        match self {
            Threshold::Power(p) => p,
            Threshold::Constant(_) => 0.0,
        }
    }
}

/// Which side of the threshold the cutoff keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `1 − S(λ)`: one inside, zero outside
    Leq,
    /// `S(λ)`: zero inside, one outside
    Gt,
}

/// A smooth phase-space cutoff `F(ξ / (c·a(t)))`.
///
/// The argument is `λ = ξ/(c·a(t))` where `ξ` is selected by the geometry and
/// `c` is the constant offset, so `F₁(t^b|P| > 1)` is a spectral radial `Gt`
/// cutoff with `a(t) = t^{−b}`, and `F₁(s·P_j > 1/10)` uses `a = 1/s`, `c = 1/10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub domain: Domain,
    pub geometry: Geometry,
    pub threshold: Threshold,
    pub orientation: Orientation,
    pub offset: f64,
}

impl CutoffSpec {
    /// `F_c(|x|/t^α ≤ 1)`
    pub fn spatial_inner(alpha: f64) -> Self {
        Self::new(Domain::Spatial, Geometry::Radial, Threshold::Power(alpha), Orientation::Leq)
    }

    /// `F̄_c(|x|/t^α > 1)`
    pub fn spatial_outer(alpha: f64) -> Self {
        Self::new(Domain::Spatial, Geometry::Radial, Threshold::Power(alpha), Orientation::Gt)
    }

    /// `F₁(t^b|P| > 1)`
    pub fn spectral_outer(b: f64) -> Self {
        Self::new(Domain::Spectral, Geometry::Radial, Threshold::Power(-b), Orientation::Gt)
    }

    /// `F̄₁(t^b|P| ≤ 1)`
    pub fn spectral_inner(b: f64) -> Self {
        Self::new(Domain::Spectral, Geometry::Radial, Threshold::Power(-b), Orientation::Leq)
    }

    /// `F₂(±x_j > t^p)`
    pub fn axis_outer(axis: usize, sign: Sign, p: f64) -> Self {
        Self::new(Domain::Spatial, Geometry::Axis { axis, sign }, Threshold::Power(p), Orientation::Gt)
    }

    /// `F̄₂(|x_j| ≤ t^p)`
    pub fn axis_inner(axis: usize, p: f64) -> Self {
        Self::new(Domain::Spatial, Geometry::AbsAxis { axis }, Threshold::Power(p), Orientation::Leq)
    }

    /// `F₁(t^β (±P_j) > c)` with signed momentum.
    pub fn momentum_outer(axis: usize, sign: Sign, beta: f64, c: f64) -> Self {
        Self {
            offset: c,
            ..Self::new(
                Domain::Spectral,
                Geometry::Axis { axis, sign },
                Threshold::Power(-beta),
                Orientation::Gt,
            )
        }
    }

    /// `F̄₁(t^β (±P_j) ≤ c)`
    pub fn momentum_inner(axis: usize, sign: Sign, beta: f64, c: f64) -> Self {
        Self { orientation: Orientation::Leq, ..Self::momentum_outer(axis, sign, beta, c) }
    }

    pub fn new(
        domain: Domain,
        geometry: Geometry,
        threshold: Threshold,
        orientation: Orientation,
    ) -> Self {
        CutoffSpec { domain, geometry, threshold, orientation, offset: 1.0 }
    }

    pub fn complement(self) -> Self {
        let orientation = match self.orientation {
            Orientation::Leq => Orientation::Gt,
            Orientation::Gt => Orientation::Leq,
        };
        CutoffSpec { orientation, ..self }
    }

    pub fn depends_on_time(&self) -> bool {
        matches!(self.threshold, Threshold::Power(p) if p != 0.0)
    }

    fn check(&self, grid: &GridSpec) -> Result<()> {
        match self.geometry {
            Geometry::Axis { axis, .. } | Geometry::AbsAxis { axis } if axis >= grid.dim() => {
                Err(Error::param(format!("cutoff axis {axis} on a {}-d grid", grid.dim())))
            }
            _ if !(self.offset > 0.0 && self.offset.is_finite()) => {
                Err(Error::param(format!("cutoff offset {} must be positive", self.offset)))
            }
            Geometry::Radial | Geometry::Axis { .. } | Geometry::AbsAxis { .. } => Ok(()),
        }
    }

    fn coordinate(&self, v: &[f64]) -> f64 {
        match self.geometry {
            Geometry::Radial => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Geometry::Axis { axis, sign } => sign.factor() * v[axis],
            Geometry::AbsAxis { axis } => v[axis].abs(),
        }
    }

    /// The scalar profile as a function of `λ`.
    pub fn profile_at(&self, lambda: f64) -> f64 {
        match self.orientation {
            Orientation::Leq => 1.0 - smooth_step(lambda),
            Orientation::Gt => smooth_step(lambda),
        }
    }

    fn lambda(&self, v: &[f64], t: f64) -> f64 {
        self.coordinate(v) / (self.offset * self.threshold.at(t))
    }

    /// Lattice values of the cutoff at time `t`.
    pub fn profile(&self, grid: &GridSpec, t: f64) -> Result<Profile> {
        check_time(t)?;
        self.check(grid)?;
        let values = self.map(grid, |v| self.profile_at(self.lambda(v, t)));
        Ok(Profile { domain: self.domain, values })
    }

    /// Lattice values of `∂ₜ F` at time `t`, by the chain rule through `λ`.
    pub fn time_derivative(&self, grid: &GridSpec, t: f64) -> Result<Profile> {
        check_time(t)?;
        self.check(grid)?;
        let rate = self.threshold.log_rate();
        let values = if rate == 0.0 {
            vec![0.0; grid.len()]
        } else {
            self.map(grid, |v| {
                let lam = self.lambda(v, t);
                // dλ/dt = −p λ / t
                let dlam = -rate * lam / t;
                let ds = smooth_step_derivative(lam) * dlam;
                match self.orientation {
                    Orientation::Leq => -ds,
                    Orientation::Gt => ds,
                }
            })
        };
        Ok(Profile { domain: self.domain, values })
    }

    fn map(&self, grid: &GridSpec, f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        match self.domain {
            Domain::Spatial => grid.map_positions(f),
            Domain::Spectral => grid.map_wavevectors(f),
        }
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::param(format!("cutoff time {t} must be >= 1")));
    }
    Ok(())
}

/// A real diagonal operator, acting by multiplication in position or spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub domain: Domain,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn ones(grid: &GridSpec, domain: Domain) -> Self {
        Profile { domain, values: vec![1.0; grid.len()] }
    }

    /// Applies the operator and returns the result in the representation of `f`.
    pub fn apply(&self, f: &ComplexField) -> ComplexField {
        self.apply_owned(f.clone())
    }

    pub fn apply_owned(&self, f: ComplexField) -> ComplexField {
        let rep = f.rep();
        f.into_rep(self.domain.rep()).mul_real(&self.values).into_rep(rep)
    }

    pub fn sqrt(&self) -> Profile {
        Profile { domain: self.domain, values: self.values.iter().map(|v| v.sqrt()).collect() }
    }

    pub fn complement(&self) -> Profile {
        Profile { domain: self.domain, values: self.values.iter().map(|v| 1.0 - v).collect() }
    }

    /// Pointwise product; both factors must act in the same domain.
    pub fn product(&self, other: &Profile) -> Result<Profile> {
        if self.domain != other.domain || self.values.len() != other.values.len() {
            return Err(Error::param("profile product across domains or grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Profile { domain: self.domain, values })
    }

    pub fn sum(&self, other: &Profile) -> Result<Profile> {
        if self.domain != other.domain || self.values.len() != other.values.len() {
            return Err(Error::param("profile sum across domains or grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Profile { domain: self.domain, values })
    }
}

/// `F(t) f` for one cutoff.
pub fn apply_cutoff(f: &ComplexField, spec: &CutoffSpec, t: f64) -> Result<ComplexField> {
    Ok(spec.profile(f.grid(), t)?.apply(f))
}

/// Lattice values of `∂ₜ F(t)`; constant thresholds give the zero profile.
pub fn ddt_cutoff(spec: &CutoffSpec, grid: &GridSpec, t: f64) -> Result<Profile> {
    spec.time_derivative(grid, t)
}

/// The directional partition `∏F̄₂ + Σⱼ F₂,t(xⱼ > s) + F₂,t(−xⱼ > s)` as separate profiles.
///
/// Returns the box factor `∏ₗ F̄₂(|xₗ| ≤ t^p)` and, for each axis `j`, the pair
/// `(∏_{l<j} F̄₂)·F₂(±xⱼ > t^p)`.
pub fn directional_partition(
    grid: &GridSpec,
    p: f64,
    t: f64,
) -> Result<(Profile, Vec<(Profile, Profile)>)> {
    let mut prefix = Profile::ones(grid, Domain::Spatial);
    let mut legs = Vec::with_capacity(grid.dim());
    for j in 0..grid.dim() {
        let plus = CutoffSpec::axis_outer(j, Sign::Plus, p).profile(grid, t)?;
        let minus = CutoffSpec::axis_outer(j, Sign::Minus, p).profile(grid, t)?;
        legs.push((prefix.product(&plus)?, prefix.product(&minus)?));
        prefix = prefix.product(&CutoffSpec::axis_inner(j, p).profile(grid, t)?)?;
    }
    Ok((prefix, legs))
}
