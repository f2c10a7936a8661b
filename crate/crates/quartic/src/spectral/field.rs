use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::fft::{centre_phase, transform};
use super::grid::GridSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rep {
    Position,
    Spectrum,
}

impl Rep {
    pub fn as_str(self) -> &'static str {
        match self {
            Rep::Position => "position",
            Rep::Spectrum => "spectrum",
        }
    }
}

/// Complex samples on a grid, either at lattice positions or lattice wavevectors.
///
/// The spectrum representation approximates the continuum transform
/// `f̂(q) = ∫ f(x) e^{−iq·x} dx`, so that
/// `Σ|f|² ∏dx = Σ|f̂|² ∏dq/2π`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    rep: Rep,
    samples: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, rep: Rep, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.len()
            )));
        }
        Ok(ComplexField { grid, rep, samples })
    }

    pub fn zeros(grid: GridSpec, rep: Rep) -> Self {
        ComplexField { grid, rep, samples: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_position_fn(grid: GridSpec, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        ComplexField { grid, rep: Rep::Position, samples: grid.map_positions(f) }
    }

    pub fn from_spectrum_fn(grid: GridSpec, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        ComplexField { grid, rep: Rep::Spectrum, samples: grid.map_wavevectors(f) }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn expect_rep(&self, rep: Rep) -> Result<()> {
        if self.rep != rep {
            return Err(Error::RepMismatch { expected: rep, found: self.rep });
        }
        Ok(())
    }

    pub fn expect_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn expect_same_grid_spec(&self, grid: &GridSpec) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn to_spectrum(&self) -> Result<ComplexField> {
        self.expect_rep(Rep::Position)?;
        Ok(self.clone().into_spectrum())
    }

    pub fn from_spectrum(&self) -> Result<ComplexField> {
        self.expect_rep(Rep::Spectrum)?;
        Ok(self.clone().into_position())
    }

    /// Forward transform, consuming the field; a no-op when already in spectrum.
    pub fn into_spectrum(mut self) -> ComplexField {
        if self.rep == Rep::Spectrum {
            return self;
        }
        transform(&self.grid, &mut self.samples, FftDirection::Forward);
        let scale = self.grid.cell_volume();
        let sign = centre_phase(self.grid);
        for (k, z) in self.samples.iter_mut().enumerate() {
            *z *= scale * sign(k);
        }
        self.rep = Rep::Spectrum;
        self
    }

    /// Inverse transform, consuming the field; a no-op when already in position.
    pub fn into_position(mut self) -> ComplexField {
        if self.rep == Rep::Position {
            return self;
        }
        let scale = self.grid.spectral_cell();
        let sign = centre_phase(self.grid);
        for (k, z) in self.samples.iter_mut().enumerate() {
            *z *= scale * sign(k);
        }
        transform(&self.grid, &mut self.samples, FftDirection::Inverse);
        self.rep = Rep::Position;
        self
    }

    pub fn into_rep(self, rep: Rep) -> ComplexField {
        match rep {
            Rep::Position => self.into_position(),
            Rep::Spectrum => self.into_spectrum(),
        }
    }

    pub fn to_rep(&self, rep: Rep) -> ComplexField {
        self.clone().into_rep(rep)
    }

    /// Quadrature weight of the current representation.
    pub fn measure(&self) -> f64 {
        match self.rep {
            Rep::Position => self.grid.cell_volume(),
            Rep::Spectrum => self.grid.spectral_cell(),
        }
    }

    /// `⟨self, other⟩`, antilinear in the first slot.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.expect_same_grid(other)?;
        self.expect_rep(other.rep)?;
        let s: Complex64 =
            self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.measure())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(mut self, c: Complex64) -> ComplexField {
        self.samples.iter_mut().for_each(|z| *z *= c);
        self
    }

    /// `self + c·other`, both in the same representation.
    pub fn axpy(mut self, c: Complex64, other: &ComplexField) -> Result<ComplexField> {
        self.expect_same_grid(other)?;
        self.expect_rep(other.rep)?;
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += c * b;
        }
        Ok(self)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.clone().axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &ComplexField) -> Result<ComplexField> {
        self.clone().axpy(Complex64::new(1.0, 0.0), other)
    }

    /// Pointwise product with real values in the current representation.
    pub fn mul_real(mut self, values: &[f64]) -> ComplexField {
        debug_assert_eq!(values.len(), self.samples.len());
        for (z, &v) in self.samples.iter_mut().zip(values) {
            *z *= v;
        }
        self
    }

    pub fn mul_complex(mut self, values: &[Complex64]) -> ComplexField {
        debug_assert_eq!(values.len(), self.samples.len());
        for (z, v) in self.samples.iter_mut().zip(values) {
            *z *= v;
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_lives_on_zero_mode() {
        let g = make_grid(1, 64, 10.0).unwrap();
        let f = ComplexField::from_position_fn(g, |_| Complex64::new(1.0, 0.0));
        let s = f.to_spectrum().unwrap();
        assert!((s.samples()[0].re - 10.0).abs() < 1e-12);
        for z in &s.samples()[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_matches_continuum_transform() {
        let g = make_grid(1, 1024, 80.0).unwrap();
        let f = ComplexField::from_position_fn(g, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
        let s = f.to_spectrum().unwrap();
        for (q, z) in g.q_axis(0).iter().zip(s.samples()) {
            if q.abs() <= 3.0 {
                let exact = (2.0 * PI).sqrt() * (-q * q / 2.0).exp();
                assert!((z - exact).norm() <= 1e-8 * exact, "q={q}");
            }
        }
    }

    #[test]
    fn rep_checks() {
        let g = make_grid(1, 16, 1.0).unwrap();
        let f = ComplexField::zeros(g, Rep::Spectrum);
        assert!(matches!(f.to_spectrum(), Err(Error::RepMismatch { .. })));
        assert!(f.from_spectrum().is_ok());
    }

    #[test]
    fn multi_axis_roundtrip() {
        let g = crate::spectral::GridSpec::new(&[16, 32, 64], &[3.0, 5.0, 7.0]).unwrap();
        let f = ComplexField::from_position_fn(g, |x| {
            Complex64::new((x[0] - 0.3 * x[1]).sin(), x[2].cos() * x[0])
        });
        let back = f.to_spectrum().unwrap().from_spectrum().unwrap();
        let err = back.sub(&f).unwrap().norm() / f.norm();
        assert!(err < 1e-13, "{err}");
        assert!((f.norm() - f.to_spectrum().unwrap().norm()).abs() < 1e-12 * f.norm());
    }
}
