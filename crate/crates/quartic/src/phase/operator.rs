use num_complex::Complex64;

use super::cutoff::{CutoffSpec, Domain, Profile};
use crate::spectral::{apply_symbol, free_phases, ComplexField, GridSpec, Rep};
use crate::{Error, Result};

/// A bounded linear map on fields of one grid, with its adjoint.
pub trait LinearOp {
    fn grid(&self) -> &GridSpec;
    fn apply(&self, f: &ComplexField) -> Result<ComplexField>;
    fn apply_adjoint(&self, f: &ComplexField) -> Result<ComplexField>;
}

pub struct Identity(pub GridSpec);

impl LinearOp for Identity {
    fn grid(&self) -> &GridSpec {
        &self.0
    }
    fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        Ok(f.clone())
    }
    fn apply_adjoint(&self, f: &ComplexField) -> Result<ComplexField> {
        Ok(f.clone())
    }
}

/// A real diagonal operator bound to its grid.
pub struct Diagonal {
    grid: GridSpec,
    profile: Profile,
}

impl Diagonal {
    pub fn new(grid: GridSpec, profile: Profile) -> Result<Self> {
        if profile.values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Diagonal { grid, profile })
    }

    pub fn cutoff(grid: GridSpec, spec: &CutoffSpec, t: f64) -> Result<Self> {
        Diagonal::new(grid, spec.profile(&grid, t)?)
    }

    /// Multiplication by `w(x)` in position space.
    pub fn weight(grid: GridSpec, w: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.map_positions(w);
        Diagonal { grid, profile: Profile { domain: Domain::Spatial, values } }
    }

    /// Real Fourier multiplier `m(P)`.
    pub fn symbol(grid: GridSpec, m: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.map_wavevectors(m);
        Diagonal { grid, profile: Profile { domain: Domain::Spectral, values } }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

impl LinearOp for Diagonal {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        f.expect_same_grid_spec(&self.grid)?;
        Ok(self.profile.apply(f))
    }
    fn apply_adjoint(&self, f: &ComplexField) -> Result<ComplexField> {
        self.apply(f)
    }
}

/// Complex Fourier multiplier, e.g. `e^{iaH₀}` or `(iq)^γ`.
pub struct Multiplier {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Multiplier { grid, values })
    }

    /// `e^{−iΔt H₀}`
    pub fn free_flow(grid: GridSpec, dt: f64) -> Self {
        Multiplier { values: free_phases(&grid, dt), grid }
    }
}

impl LinearOp for Multiplier {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        f.expect_same_grid_spec(&self.grid)?;
        Ok(apply_symbol(f.clone(), &self.values))
    }
    fn apply_adjoint(&self, f: &ComplexField) -> Result<ComplexField> {
        f.expect_same_grid_spec(&self.grid)?;
        let conj: Vec<Complex64> = self.values.iter().map(|z| z.conj()).collect();
        Ok(apply_symbol(f.clone(), &conj))
    }
}

/// Composition `A₁ A₂ ⋯ A_k`; the last factor acts first.
pub struct Chain {
    grid: GridSpec,
    factors: Vec<Box<dyn LinearOp>>,
}

impl Chain {
    pub fn new(factors: Vec<Box<dyn LinearOp>>) -> Result<Self> {
        let grid = *factors
            .first()
            .ok_or_else(|| Error::param("empty operator chain"))?
            .grid();
        if factors.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Chain { grid, factors })
    }
}

impl LinearOp for Chain {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        let mut g = f.clone();
        for op in self.factors.iter().rev() {
            g = op.apply(&g)?;
        }
        Ok(g)
    }
    fn apply_adjoint(&self, f: &ComplexField) -> Result<ComplexField> {
        let mut g = f.clone();
        for op in &self.factors {
            g = op.apply_adjoint(&g)?;
        }
        Ok(g)
    }
}

/// `[A, B] = AB − BA`; its adjoint is `[B*, A*]`.
pub struct Commutator<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: LinearOp, B: LinearOp> LinearOp for Commutator<A, B> {
    fn grid(&self) -> &GridSpec {
        self.a.grid()
    }
    fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        let ab = self.a.apply(&self.b.apply(f)?)?;
        let ba = self.b.apply(&self.a.apply(f)?)?;
        ab.sub(&ba.into_rep(ab.rep()))
    }
    fn apply_adjoint(&self, f: &ComplexField) -> Result<ComplexField> {
        let ba = self.b.apply_adjoint(&self.a.apply_adjoint(f)?)?;
        let ab = self.a.apply_adjoint(&self.b.apply_adjoint(f)?)?;
        ba.sub(&ab.into_rep(ba.rep()))
    }
}

/// `[A, B] f` for a spatial cutoff `A` and a spectral cutoff `B` at time `t`.
pub fn commutator_apply(
    f: &ComplexField,
    spatial: &CutoffSpec,
    spectral: &CutoffSpec,
    t: f64,
) -> Result<ComplexField> {
    let grid = *f.grid();
    let c = Commutator {
        a: Diagonal::cutoff(grid, spatial, t)?,
        b: Diagonal::cutoff(grid, spectral, t)?,
    };
    c.apply(f)
}

/// Dense matrix of an operator in the position basis, one column per lattice site.
///
/// Intended for small oracle grids; the `(i, j)` entry is `(A e_j)(x_i)`.
pub fn dense_matrix(op: &dyn LinearOp) -> Result<Vec<Vec<Complex64>>> {
    let grid = *op.grid();
    let n = grid.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = ComplexField::zeros(grid, Rep::Position);
        e.samples_mut()[j] = Complex64::new(1.0, 0.0);
        cols.push(op.apply(&e)?.into_position().into_samples());
    }
    Ok(cols)
}
