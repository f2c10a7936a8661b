use num_complex::Complex64;

use super::field::{ComplexField, Rep};
use super::grid::GridSpec;
use crate::{Error, Result};

/// Samples a symbol `m(q)` on the wavevector lattice, rejecting non-finite values.
pub fn symbol_values(
    grid: &GridSpec,
    m: impl Fn(&[f64]) -> Complex64,
) -> Result<Vec<Complex64>> {
    let vals = grid.map_wavevectors(|q| m(q));
    if let Some(i) = vals.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(format!("multiplier symbol at lattice index {i}")));
    }
    Ok(vals)
}

/// `m(P) f`, returned in the representation of `f`.
pub fn apply_multiplier(
    f: &ComplexField,
    m: impl Fn(&[f64]) -> Complex64,
) -> Result<ComplexField> {
    let vals = symbol_values(f.grid(), m)?;
    Ok(apply_symbol(f.clone(), &vals))
}

/// Multiplies the spectrum of `f` by precomputed lattice values.
pub fn apply_symbol(f: ComplexField, values: &[Complex64]) -> ComplexField {
    let rep = f.rep();
    f.into_spectrum().mul_complex(values).into_rep(rep)
}

pub fn quartic_symbol(q: &[f64]) -> f64 {
    let q2: f64 = q.iter().map(|v| v * v).sum();
    q2 * q2
}

/// Lattice values of `e^{−iΔt|q|⁴}`.
pub fn free_phases(grid: &GridSpec, dt: f64) -> Vec<Complex64> {
    grid.map_wavevectors(|q| Complex64::from_polar(1.0, -dt * quartic_symbol(q)))
}

/// `e^{−iΔt H₀} f` with `H₀ = Δ²`; negative `Δt` runs the flow backwards.
pub fn free_propagate(f: &ComplexField, dt: f64) -> Result<ComplexField> {
    if !dt.is_finite() {
        return Err(Error::NonFinite(format!("propagation time {dt}")));
    }
    Ok(apply_symbol(f.clone(), &free_phases(f.grid(), dt)))
}

/// In-place free flow on a field already in spectrum representation.
pub fn free_propagate_spectrum(f: &mut ComplexField, dt: f64) -> Result<()> {
    f.expect_rep(Rep::Spectrum)?;
    let phases = free_phases(f.grid(), dt);
    for (z, p) in f.samples_mut().iter_mut().zip(&phases) {
        *z *= p;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let g = make_grid(1, 64, std::f64::consts::TAU * 4.0).unwrap();
        // q0 = 1 sits on the lattice since dq = 1/4
        let f = ComplexField::from_position_fn(g, |x| Complex64::from_polar(1.0, x[0]));
        let m = apply_multiplier(&f, |q| Complex64::new(q[0].abs(), 0.0)).unwrap();
        assert!(m.sub(&f).unwrap().norm() < 1e-12);
        let p = free_propagate(&f, 0.5).unwrap();
        let expect = f.clone().scale(Complex64::from_polar(1.0, -0.5));
        assert!(p.sub(&expect).unwrap().norm() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_symbols() {
        let g = make_grid(1, 16, 1.0).unwrap();
        let f = ComplexField::zeros(g, Rep::Position);
        let r = apply_multiplier(&f, |q| Complex64::new(1.0 / q[0], 0.0));
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn keeps_representation() {
        let g = make_grid(1, 16, 1.0).unwrap();
        let f = ComplexField::zeros(g, Rep::Spectrum);
        assert_eq!(free_propagate(&f, 1.0).unwrap().rep(), Rep::Spectrum);
    }
}
