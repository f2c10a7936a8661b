use std::f64::consts::PI;

use proptest::prelude::*;
use quartic::spectral::{
    decode_checkpoint, encode_checkpoint, free_propagate, make_grid, read_checkpoint, write_checkpoint, ComplexField,
    GridSpec, Rep,
};
use quartic::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: GridSpec, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_position_fn(grid, |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn rel(a: &ComplexField, b: &ComplexField) -> f64 {
    a.sub(b).unwrap().norm() / b.norm()
}

#[test]
fn shifted_gaussian_spectrum_matches_transform() {
    // f(x) = e^{−(x−1)²/2} e^{i x/2}, f̂(q) = √(2π) e^{−(q−1/2)²/2} e^{−i(q−1/2)}
    let grid = make_grid(1, 256, 40.0).unwrap();
    let f = ComplexField::from_position_fn(grid, |x| {
        Complex64::from_polar((-(x[0] - 1.0).powi(2) / 2.0).exp(), 0.5 * x[0])
    });
    let xs = grid.x_axis(0);
    let dx = grid.dx(0);
    let s = f.to_rep(Rep::Spectrum);
    for (k, &q) in grid.q_axis(0).iter().enumerate() {
        let exact = Complex64::from_polar((2.0 * PI).sqrt() * (-(q - 0.5).powi(2) / 2.0).exp(), -(q - 0.5));
        // direct Riemann sum, independent of the FFT path
        let direct: Complex64 =
            xs.iter().zip(f.samples()).map(|(&x, z)| z * Complex64::from_polar(dx, -q * x)).sum();
        assert!((s.samples()[k] - exact).norm() < 1e-12, "q = {q}");
        assert!((s.samples()[k] - direct).norm() < 1e-11, "q = {q}");
    }
}

#[test]
fn two_dimensional_gaussian_spectrum() {
    let grid = GridSpec::new(&[128, 128], &[30.0, 24.0]).unwrap();
    let f = ComplexField::from_position_fn(grid, |x| Complex64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 2.0).exp(), 0.0));
    let s = f.into_spectrum();
    let exact = grid.map_wavevectors(|q| 2.0 * PI / 2f64.sqrt() * (-(q[0] * q[0] + q[1] * q[1] / 2.0) / 2.0).exp());
    let qs = grid.map_wavevectors(|q| (q[0], q[1]));
    for ((z, e), q) in s.samples().iter().zip(&exact).zip(&qs) {
        assert!((z - e).norm() < 1e-10, "{q:?}: {z} vs {e}");
    }
}

#[test]
fn plane_waves_are_eigenfunctions() {
    let grid = make_grid(1, 64, 2.0 * PI * 4.0).unwrap();
    for m in [-7i32, -1, 0, 3, 12] {
        let k = m as f64 / 4.0;
        let f = ComplexField::from_position_fn(grid, |x| Complex64::from_polar(1.0, k * x[0]));
        let t = 3.7;
        let g = free_propagate(&f, t).unwrap().into_position();
        let expect = f.clone().scale(Complex64::from_polar(1.0, -t * k.powi(4)));
        assert!(rel(&g, &expect) < 1e-12, "k = {k}");
    }
}

#[test]
fn free_flow_round_trip_long_times() {
    let grid = make_grid(1, 4096, 400.0).unwrap();
    let f = random_field(grid, 3);
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let g = free_propagate(&f, t).unwrap();
        assert!(((g.norm() - f.norm()) / f.norm()).abs() < 1e-12);
        let back = free_propagate(&g, -t).unwrap().into_position();
        assert!(rel(&back, &f) < 1e-12, "t = {t}");
    }
}

#[test]
fn checkpoint_file_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::new(&[16, 32], &[5.0, 7.5]).unwrap();
    let f = random_field(grid, 11).into_spectrum();
    let p = dir.path().join("f.bin");
    write_checkpoint(&p, &f, 17.25).unwrap();
    let cp = read_checkpoint(&p).unwrap();
    assert_eq!(cp.time, 17.25);
    assert_eq!(cp.field, f);
    let bytes = encode_checkpoint(&f, 1.0);
    assert!(decode_checkpoint(&bytes[..bytes.len() - 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(seed in any::<u64>(), dim in 1usize..=3, log_n in 4u32..=6, l in 5.0f64..80.0) {
        let n = 1usize << if dim == 3 { 4 } else { log_n };
        let grid = make_grid(dim, n, l).unwrap();
        let f = random_field(grid, seed);
        let s = f.to_rep(Rep::Spectrum);
        prop_assert!(((s.norm() - f.norm()) / f.norm()).abs() < 1e-12);
        let back = s.into_position();
        prop_assert!(rel(&back, &f) < 1e-13);
    }

    #[test]
    fn free_group_law(seed in any::<u64>(), s in -50.0f64..50.0, t in -50.0f64..50.0) {
        let grid = make_grid(1, 128, 30.0).unwrap();
        let f = random_field(grid, seed);
        let a = free_propagate(&free_propagate(&f, s).unwrap(), t).unwrap().into_position();
        let b = free_propagate(&f, s + t).unwrap().into_position();
        // phases reach t·q_max⁴ radians, so roundoff grows with both
        let q4 = grid.q_max(0).powi(4);
        prop_assert!(rel(&a, &b) < 1e-15 * (s.abs() + t.abs() + (s + t).abs()) * q4 + 1e-13);
        prop_assert!(((a.norm() - f.norm()) / f.norm()).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let grid = make_grid(2, 16, 9.0).unwrap();
        let f = random_field(grid, a);
        let g = random_field(grid, b);
        let fg = f.inner(&g).unwrap();
        let gf = g.inner(&f).unwrap();
        prop_assert!((fg - gf.conj()).norm() < 1e-12 * f.norm() * g.norm());
        // the pairing is the same in either representation
        let sp = f.to_rep(Rep::Spectrum).inner(&g.to_rep(Rep::Spectrum)).unwrap();
        prop_assert!((fg - sp).norm() < 1e-12 * f.norm() * g.norm());
    }
}
