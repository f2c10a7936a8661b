use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use quartic::dynamics::{
    envelope, evolve, GaussianPacket, InitialData, InteractionSpec, LocalizedPotential, RunConfig, Trajectory,
};
use quartic::phase::{dense_matrix, op_norm_estimate, smooth_step, LinearOp};
use quartic::scattering::{
    free_channel_state, interaction_decay_probe, kernel_decay_probe, ledger_terms, propagation_ledger,
    scattered_remainder, velocity_operator, wave_operator_recovery, weak_decomposition, weak_localization_series,
    weak_vanishing_probe, LedgerKind, TestBank, VelocityBound, VelocityParams, WaveOperator,
};
use quartic::spectral::{make_grid, ComplexField, GridSpec, Rep};
use quartic::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: GridSpec, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_position_fn(grid, |x| {
        let env = (-x[0] * x[0] / 50.0).exp();
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * env
    })
}

fn short_run(spec: InteractionSpec, stride: u64) -> Trajectory {
    run_with_step(spec, stride, 0.125)
}

fn run_with_step(spec: InteractionSpec, stride: u64, dt: f64) -> Trajectory {
    let grid = make_grid(1, 256, 320.0).unwrap();
    let initial = InitialData { packets: vec![GaussianPacket::centred(1, 1.0)], q0: 1.0 };
    let mut c = RunConfig::new(grid, spec, initial, dt, 9.0);
    c.schedule.stride = stride;
    c.schedule.store_every = stride;
    evolve(&c, &mut []).unwrap()
}

#[test]
fn null_interaction_leaves_nothing_to_scatter() {
    let traj = short_run(InteractionSpec::none(), 4);
    let n0 = traj.initial_norm();
    for t in traj.times() {
        assert!(scattered_remainder(&traj, t).unwrap().norm() <= 1e-12 * n0, "t = {t}");
    }
    let times: Vec<f64> = traj.times().into_iter().filter(|&t| t >= 2.0).collect();
    let weak = weak_localization_series(&traj, 0.3, 0.1, &times).unwrap();
    assert!(weak.moment.values.iter().all(|&v| v <= 1e-12));
    assert!(weak.leakage.values.iter().all(|&v| v <= 1e-12));

    let ledger = propagation_ledger(&traj, LedgerKind::F1FcF1, 0.2, 0.1, &times).unwrap();
    assert!(ledger.records.iter().all(|r| r.terms.g_interaction == 0.0));

    // a vanishing amplitude still exercises the potential path
    let zero = short_run(InteractionSpec::linear(LocalizedPotential::real(0.0, 2.4)), 4);
    let decay = interaction_decay_probe(&zero, 0.2, 0.1, 4.0, &times).unwrap();
    assert!(decay.values.iter().all(|&v| v <= 1e-14));
    assert_eq!(decay.reference_exponent, Some(-1.5));
}

#[test]
fn free_run_recovers_initial_data_up_to_cutoff_tails() {
    let traj = short_run(InteractionSpec::none(), 8);
    let psi0 = traj.initial().unwrap().into_position();
    let t = *traj.times().last().unwrap();
    // the spatial-only operator leaves exactly F_c ψ₀
    let tail = {
        let x = ComplexField::from_position_fn(*psi0.grid(), |x| x[0].into());
        let outside: f64 = psi0
            .samples()
            .iter()
            .zip(x.samples())
            .map(|(z, x)| (1.0 - (1.0 - smooth_step(x.re.abs() / t.powf(0.3)))).powi(2) * z.norm_sqr())
            .sum::<f64>()
            * psi0.measure();
        outside.sqrt() / psi0.norm()
    };
    let r = wave_operator_recovery(&traj, WaveOperator::SpatialOnly { alpha: 0.3 }).unwrap();
    assert!((r - tail).abs() < 1e-10, "{r} vs {tail}");
}

#[test]
fn weak_partition_is_exact() {
    let grid = make_grid(2, 64, 60.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi = ComplexField::from_position_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        Complex64::new(rng.random::<f64>(), rng.random::<f64>()) * (-r2 / 100.0).exp()
    });
    for t in [1.0, 7.0, 40.0] {
        let dec = weak_decomposition(&psi, t, 0.3, 0.1).unwrap();
        assert_eq!(dec.leakage.len(), 4);
        assert!(dec.partition_defect().unwrap() <= 1e-12 * dec.base.norm().max(1e-300), "t = {t}");
    }
}

#[test]
fn weak_decomposition_rejects_bad_eps() {
    let grid = make_grid(1, 64, 60.0).unwrap();
    let psi = random_field(grid, 1);
    assert!(weak_decomposition(&psi, 2.0, 0.3, 0.01).is_err());
}

/// `sup_x |(1/2π) ∫ (1 − S(|q|/q₀)) e^{i(qx − tq⁴)} dq|` at the grid points, by
/// direct trapezoid quadrature on a fine q mesh.
fn kernel_sup_direct(xs: &[f64], q0: f64, t: f64) -> f64 {
    let m = 40000;
    let h = 2.0 * q0 / m as f64;
    let weights: Vec<(f64, f64)> = (0..=m)
        .map(|j| {
            let q = -q0 + j as f64 * h;
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            (q, w * h * envelope(&[q], q0))
        })
        .filter(|(_, w)| *w != 0.0)
        .collect();
    xs.iter()
        .map(|&x| {
            let z: Complex64 = weights.iter().map(|&(q, w)| Complex64::from_polar(w, q * x - t * q.powi(4))).sum();
            z.norm() / (2.0 * PI)
        })
        .fold(0.0, f64::max)
}

#[test]
fn kernel_probe_matches_direct_quadrature() {
    let q0 = 1.0;
    let grid = make_grid(1, 8192, 2.0 * (8.0 * 100.0 + 20.0)).unwrap();
    let s = kernel_decay_probe(&grid, &[0], q0, &[10.0, 100.0]).unwrap();
    let xs = grid.x_axis(0);
    for (t, v) in s.times.iter().zip(&s.values) {
        // the peak sits where the group velocity 4q³ carries the envelope
        let near: Vec<f64> = xs.iter().copied().filter(|x| x.abs() <= 8.0 * t + 20.0).collect();
        let direct = kernel_sup_direct(&near, q0, *t);
        assert!((v - direct).abs() < 1e-6 * direct, "t = {t}: {v} vs {direct}");
    }
}

/// Largest singular value of the dense lattice matrix.
fn dense_norm(op: &dyn LinearOp) -> f64 {
    let cols = dense_matrix(op).unwrap();
    let n = cols.len();
    DMatrix::from_fn(n, n, |i, j| cols[j][i]).singular_values().max()
}

#[test]
fn velocity_norm_matches_dense_svd() {
    let grid = make_grid(1, 128, 60.0).unwrap();
    for kind in [VelocityBound::Mmvb1, VelocityBound::parse("mmvb2-").unwrap()] {
        for a in [0.0, 8.0] {
            let p = VelocityParams { kind, t: 4.0, sigma: 2.0, eps: 0.1, q0: 2.0 };
            let op = velocity_operator(&grid, &p, a).unwrap();
            let est = op_norm_estimate(&op, 400, 1e-12).unwrap();
            let exact = dense_norm(&op);
            assert!((est.norm - exact).abs() <= 1e-3 * exact, "{kind:?} a = {a}: {} vs {exact}", est.norm);
        }
    }
}

#[test]
fn ledger_derivative_matches_cutoff_time_difference() {
    // with φ frozen the ledger derivative is the pure cutoff derivative
    let grid = make_grid(1, 512, 120.0).unwrap();
    let phi = random_field(grid, 9);
    let zero = ComplexField::zeros(grid, Rep::Position);
    for kind in [LedgerKind::F1FcF1, LedgerKind::FcF1Fc] {
        for t in [2.0, 9.0, 30.0] {
            let h = 1e-4 * t;
            let e = |s: f64| ledger_terms(kind, &phi, &zero, s, 0.2, 0.1).unwrap().expectation;
            let fd = (e(t + h) - e(t - h)) / (2.0 * h);
            let terms = ledger_terms(kind, &phi, &zero, t, 0.2, 0.1).unwrap();
            assert_eq!(terms.g_interaction, 0.0);
            assert!((terms.derivative() - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{kind:?} t = {t}");
        }
    }
}

#[test]
fn ledger_interaction_term_is_the_flow_derivative() {
    // i∂ₜφ = χ in the interaction picture, so d⟨B⟩ along φ − ihχ is g_interaction
    let grid = make_grid(1, 512, 120.0).unwrap();
    let phi = random_field(grid, 2);
    let chi = random_field(grid, 3);
    let zero = ComplexField::zeros(grid, Rep::Position);
    let t = 5.0;
    for kind in [LedgerKind::F1FcF1, LedgerKind::FcF1Fc] {
        let h = 1e-5;
        let e = |s: f64| {
            let moved = phi.add(&chi.clone().scale(Complex64::new(0.0, -s))).unwrap();
            ledger_terms(kind, &moved, &zero, t, 0.2, 0.1).unwrap().expectation
        };
        let fd = (e(h) - e(-h)) / (2.0 * h);
        let g = ledger_terms(kind, &phi, &chi, t, 0.2, 0.1).unwrap().g_interaction;
        assert!((g - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{kind:?}: {g} vs {fd}");
    }
}

/// Worst gap between the ledger derivative and the finite difference of ⟨B⟩,
/// and the largest integrated defect.
fn ledger_gaps(kind: LedgerKind, dt: f64) -> (f64, f64) {
    let traj = run_with_step(InteractionSpec::linear(LocalizedPotential::real(1.0, 5.0)), 1, dt);
    let acc = propagation_ledger(&traj, kind, 0.2, 0.1, &traj.times()).unwrap();
    let sum = acc.summary();
    assert!(sum.min_c1 >= 0.0 && sum.min_c2 >= 0.0);
    assert!(sum.propagation_inequality());
    let s = acc.to_series("ledger").unwrap();
    let fd = s.column("dbdt_fd").unwrap();
    let n = acc.records.len();
    let worst = acc.records[1..n - 1]
        .iter()
        .zip(&fd[1..n - 1])
        .map(|(r, f)| (r.terms.derivative() - f).abs())
        .fold(0.0, f64::max);
    (worst, sum.max_defect)
}

#[test]
fn ledger_balance_converges_at_second_order() {
    for kind in [LedgerKind::F1FcF1, LedgerKind::FcF1Fc] {
        let (g1, d1) = ledger_gaps(kind, 1.0 / 64.0);
        let (g2, d2) = ledger_gaps(kind, 1.0 / 128.0);
        assert!((3.5..4.5).contains(&(g1 / g2)), "{kind:?}: {g1} {g2}");
        assert!((3.5..4.5).contains(&(d1 / d2)), "{kind:?}: {d1} {d2}");
        assert!(d2 < 1e-5);
    }
}

#[test]
fn weak_vanishing_stays_below_its_bound() {
    let traj = short_run(InteractionSpec::linear(LocalizedPotential::real(1.0, 5.0)), 4);
    let bank = TestBank::standard(&traj.config().grid, 7);
    let times: Vec<f64> = traj.times().into_iter().filter(|&t| t >= 2.0).collect();
    let s = weak_vanishing_probe(&traj, &bank, 0.2, 0.1, &times).unwrap();
    let ratios = s.column("bound_ratio").unwrap();
    assert!(ratios.iter().all(|&r| r <= 1.0 + 1e-12), "{ratios:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn free_channel_state_is_a_contraction(seed in any::<u64>(), t in 1.0f64..500.0, alpha in 0.15f64..0.9) {
        let grid = make_grid(1, 256, 100.0).unwrap();
        let psi = random_field(grid, seed);
        let w = free_channel_state(&psi, t, alpha, 0.1).unwrap();
        prop_assert!(w.norm() <= psi.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn ledger_expectation_and_positive_terms(seed in any::<u64>(), t in 1.0f64..200.0) {
        let grid = make_grid(1, 256, 100.0).unwrap();
        let phi = random_field(grid, seed);
        let chi = random_field(grid, seed ^ 1);
        for kind in [LedgerKind::F1FcF1, LedgerKind::FcF1Fc] {
            let terms = ledger_terms(kind, &phi, &chi, t, 0.3, 0.1).unwrap();
            let m = phi.norm_sqr();
            prop_assert!(terms.expectation >= 0.0 && terms.expectation <= m * (1.0 + 1e-12));
            prop_assert!(terms.c1 >= 0.0 && terms.c2 >= 0.0);
        }
    }
}
