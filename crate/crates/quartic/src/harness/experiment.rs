use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, Probe};
use super::csv::write_csv_blocks;
use super::manifest::{ExperimentManifest, MANIFEST_FILE};
use crate::dynamics::{
    evolve_with, latest_checkpoint, DuhamelObserver, EvolveOptions, InteractionSpec, LocalizedPotential, Observer,
    Trajectory,
};
use crate::scattering::{
    asymptotic_free_profile, envelope_constant, interaction_decay_probe, leakage_decay_ratio, log_spaced_times,
    profile_defect, propagation_ledger, wave_operator_recovery, wave_operator_residuals, weak_localization_series,
    weak_vanishing_probe, weakly_localized_part, DiagnosticSeries, LedgerAccumulator, LedgerObserver, TestBank,
    Verdict, WaveOperator,
};
use crate::{Error, Result};

pub const CONFIG_FILE: &str = "config.txt";
pub const PROBES_FILE: &str = "probes.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Rows kept per series in the CSV output; summaries use every sample.
const CSV_ROWS: usize = 2048;
/// Values at or below this are treated as identically zero.
const TRIVIAL: f64 = 1e-12;

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub checkpoint_every: Option<u64>,
    /// stop after this many steps, leaving an incomplete manifest
    pub stop_after: Option<u64>,
}

impl RunOptions {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(d) = &self.out {
            cfg.run.output = Some(d.clone());
        }
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(n) = self.checkpoint_every {
            cfg.run.schedule.store_every = n;
        }
    }
}

/// A named scalar test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value <= bound }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub series: Vec<DiagnosticSeries>,
    pub checks: Vec<Check>,
    pub skipped: Vec<(Probe, String)>,
    pub summary: Value,
}

impl ProbeReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.series.iter().all(|s| s.passes() != Some(false))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn series(&self, label: &str) -> Option<&DiagnosticSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

/// Observer results carried from the evolution into the analysis.
#[derive(Debug, Default)]
pub struct Streamed {
    pub ledger: Option<LedgerAccumulator>,
    pub duhamel: Option<Vec<(f64, f64)>>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub manifest: ExperimentManifest,
    /// `None` while the run is incomplete
    pub report: Option<ProbeReport>,
}

impl ExperimentOutcome {
    pub fn passes(&self) -> bool {
        self.report.as_ref().is_some_and(ProbeReport::passes)
    }
}

/// The V = 0 control of `cfg`: a zero potential of the same decay, no nonlinearity.
pub fn null_config(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut out = cfg.clone();
    let mut pot = cfg.run.interaction.potential.unwrap_or(LocalizedPotential::real(0.0, 2.4));
    pot.v0 = Complex64::new(0.0, 0.0);
    out.run.interaction = InteractionSpec::linear(pot);
    out.run.check_sigma = pot.sigma;
    out
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Validates, evolves and analyses `cfg`, writing into its output directory.
///
/// Validation happens before anything is written.
pub fn run_experiment(mut cfg: ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    opts.apply(&mut cfg);
    cfg.run.validate()?;
    let dir = cfg.run.output.clone().ok_or_else(|| Error::param("no output directory (output.dir or --out)"))?;
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    fs::write(dir.join(CONFIG_FILE), cfg.to_text()).map_err(|e| Error::io(dir.join(CONFIG_FILE), e))?;
    let mut manifest = ExperimentManifest {
        config_hash: cfg.hash(),
        config_file: CONFIG_FILE.into(),
        created: now(),
        seed: cfg.run.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        complete: false,
        last_step: 0,
        artifacts: Vec::new(),
    };
    manifest.record(&dir, CONFIG_FILE)?;
    manifest.write(&dir)?;
    execute(&cfg, &dir, manifest, None, opts.stop_after)
}

/// Continues the run in `dir` from its latest complete checkpoint. A complete run
/// is returned as it stands.
pub fn resume_experiment(dir: &Path, stop_after: Option<u64>) -> Result<ExperimentOutcome> {
    let manifest = ExperimentManifest::read(dir)?;
    let mut cfg = ExperimentConfig::read(&dir.join(&manifest.config_file))?;
    if cfg.hash() != manifest.config_hash {
        return Err(Error::Manifest("config file does not match the manifest hash".into()));
    }
    cfg.run.output = Some(dir.to_path_buf());
    if manifest.complete {
        manifest.verify(dir)?;
        return Ok(ExperimentOutcome { dir: dir.to_path_buf(), manifest, report: None });
    }
    let step = latest_checkpoint(&cfg.run, dir)?
        .ok_or_else(|| Error::Checkpoint("no checkpoint with observer state to resume from".into()))?;
    execute(&cfg, dir, manifest, Some(step), stop_after)
}

fn execute(
    cfg: &ExperimentConfig,
    dir: &Path,
    mut manifest: ExperimentManifest,
    resume: Option<u64>,
    stop_after: Option<u64>,
) -> Result<ExperimentOutcome> {
    let want = |p: Probe| cfg.probes.probes.contains(&p);
    let s = &cfg.run.scattering;
    let mut ledger = want(Probe::Ledger).then(|| LedgerObserver::new(cfg.probes.ledger_kind, s.alpha, s.b));
    let mut duhamel = want(Probe::Duhamel).then(DuhamelObserver::new);
    let traj = {
        let mut observers: Vec<&mut dyn Observer> = Vec::new();
        if let Some(o) = ledger.as_mut() {
            observers.push(o);
        }
        if let Some(o) = duhamel.as_mut() {
            observers.push(o);
        }
        evolve_with(&cfg.run, &mut observers, resume, EvolveOptions { stop_after })?
    };
    for sample in traj.samples() {
        if let Some(p) = sample.path() {
            record_file(&mut manifest, dir, p)?;
        }
    }
    // observer state of superseded checkpoints is pruned by the run
    manifest.artifacts.retain(|a| !a.name.starts_with("observers_") || dir.join(&a.name).exists());
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.starts_with("observers_") && !n.ends_with(".tmp"))
        .collect();
    names.sort();
    for n in names {
        manifest.record(dir, &n)?;
    }
    manifest.last_step = traj.samples().last().map_or(0, |s| s.step);
    if !traj.is_complete() {
        manifest.write(dir)?;
        return Ok(ExperimentOutcome { dir: dir.to_path_buf(), manifest, report: None });
    }

    let streamed = Streamed { ledger: ledger.map(|o| o.acc), duhamel: duhamel.map(|o| o.residuals) };
    let report = analyze(cfg, &traj, &cfg.probes.probes, &streamed)?;
    write_report(dir, &mut manifest, cfg, &traj, &report)?;
    manifest.complete = true;
    manifest.write(dir)?;
    Ok(ExperimentOutcome { dir: dir.to_path_buf(), manifest, report: Some(report) })
}

fn record_file(manifest: &mut ExperimentManifest, dir: &Path, p: &Path) -> Result<()> {
    let rel = p.strip_prefix(dir).unwrap_or(p);
    manifest.record(dir, &rel.to_string_lossy())
}

fn write_report(
    dir: &Path,
    manifest: &mut ExperimentManifest,
    cfg: &ExperimentConfig,
    traj: &Trajectory,
    report: &ProbeReport,
) -> Result<()> {
    let thinned: Vec<DiagnosticSeries> = report.series.iter().map(|s| thin(s, CSV_ROWS)).collect();
    let csv = dir.join(PROBES_FILE);
    fs::write(&csv, write_csv_blocks(&thinned)).map_err(|e| Error::io(&csv, e))?;
    manifest.record(dir, PROBES_FILE)?;
    let summary = json!({
        "config_hash": cfg.hash(),
        "seed": cfg.run.seed,
        "run": {
            "samples": traj.len(),
            "max_mass_drift": traj.max_mass_drift(),
            "nonlinear_stays_localized": traj.nonlinear_stays_localized(),
        },
        "pass": report.passes(),
        "probes": report.summary,
    });
    let js = dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::param(e.to_string()))?;
    fs::write(&js, text).map_err(|e| Error::io(&js, e))?;
    manifest.record(dir, SUMMARY_FILE)
}

/// Every `k`-th row plus the last, at most about `max_rows` rows.
fn thin(s: &DiagnosticSeries, max_rows: usize) -> DiagnosticSeries {
    let n = s.len();
    if n <= max_rows {
        return s.clone();
    }
    let k = n.div_ceil(max_rows);
    let keep: Vec<usize> = (0..n).filter(|i| i % k == 0 || *i == n - 1).collect();
    let mut out = s.clone();
    out.times = keep.iter().map(|&i| s.times[i]).collect();
    out.values = keep.iter().map(|&i| s.values[i]).collect();
    for (_, c) in &mut out.extra {
        *c = keep.iter().map(|&i| c[i]).collect();
    }
    out
}

/// Re-runs the probes on a finished experiment directory. The streamed probes are
/// recomputed from the stored samples.
pub fn analyze_dir(dir: &Path, probes: Option<&[Probe]>) -> Result<ProbeReport> {
    let manifest = ExperimentManifest::read(dir)?;
    if !manifest.complete {
        return Err(Error::Manifest(format!("{} is incomplete; resume it first", dir.join(MANIFEST_FILE).display())));
    }
    let cfg = ExperimentConfig::read(&dir.join(&manifest.config_file))?;
    let traj = Trajectory::open(&cfg.run, dir, manifest.last_step)?;
    analyze(&cfg, &traj, probes.unwrap_or(&cfg.probes.probes), &Streamed::default())
}

/// Times of the log-spaced probes: the configured window clipped to the run.
fn probe_times(cfg: &ExperimentConfig, traj: &Trajectory) -> Vec<f64> {
    let t_end = cfg.run.t_end;
    let (mut lo, hi) = (cfg.probes.window.0, cfg.probes.window.1.min(t_end));
    if lo >= hi {
        lo = 1.0;
    }
    log_spaced_times(traj, lo, hi, cfg.probes.per_octave)
}

fn fit_window(cfg: &ExperimentConfig, times: &[f64]) -> (f64, f64) {
    let (a, b) = cfg.probes.window;
    let last = times.last().copied().unwrap_or(b);
    let first = times.first().copied().unwrap_or(a);
    (a.max(first), b.min(last))
}

/// Fits over `window`; too few samples becomes a failed check instead of an abort.
fn try_fit(s: &mut DiagnosticSeries, window: (f64, f64), checks: &mut Vec<Check>) -> Result<bool> {
    match s.fit_window(window) {
        Ok(_) => Ok(true),
        Err(Error::InsufficientSamples(_)) => {
            let n = s.times.iter().filter(|&&t| t >= window.0 && t <= window.1).count();
            checks.push(Check {
                name: format!("{}_fit_points", s.label),
                value: n as f64,
                bound: super::fit::MIN_FIT_POINTS as f64,
                pass: false,
            });
            Ok(false)
        }
        Err(e) => Err(e),
    }
}

/// Monotone nonincreasing up to `rel`, ignoring values below the zero floor.
fn nonincreasing(values: &[f64], rel: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel) || w[1] <= TRIVIAL)
}

/// Runs `probes` on `traj`; streamed ledger or Duhamel data is used when given,
/// otherwise those probes are evaluated on the stored samples.
pub fn analyze(cfg: &ExperimentConfig, traj: &Trajectory, probes: &[Probe], streamed: &Streamed) -> Result<ProbeReport> {
    let run = &cfg.run;
    let sp = &run.scattering;
    let n0 = traj.initial_norm();
    let times = probe_times(cfg, traj);
    let window = fit_window(cfg, &times);
    let dyadic: Vec<f64> = traj.dyadic_indices().iter().map(|&i| traj.samples()[i].t).collect();
    let mut rep = ProbeReport { series: Vec::new(), checks: Vec::new(), skipped: Vec::new(), summary: json!({}) };
    let mut summary = serde_json::Map::new();

    for &probe in probes {
        let name = probe.as_str();
        let (before, first) = (rep.checks.len(), rep.series.len());
        let mut extra = serde_json::Map::new();
        match probe {
            Probe::Wave => {
                let op = WaveOperator::Full { alpha: sp.alpha, b: sp.b };
                let s = wave_operator_residuals(traj, op)?;
                let from = s.index_at_or_after(cfg.probes.window.0.min(run.t_end / 4.0)).unwrap_or(0);
                rep.checks.push(Check {
                    name: "wave_residual_decreasing".into(),
                    value: s.values.len() as f64,
                    bound: from as f64,
                    pass: nonincreasing(&s.values[from.min(s.len())..], 0.0),
                });
                if let Some((_, v)) = s.last() {
                    rep.checks.push(Check::at_most("wave_residual_final", v, 1e-3));
                }
                extra.insert("recovery".into(), json!(wave_operator_recovery(traj, op)?));
                rep.series.push(s);
            }
            Probe::SpatialWave => {
                let op = WaveOperator::SpatialOnly { alpha: sp.alpha };
                let mut s = wave_operator_residuals(traj, op)?;
                s.label = "spatial_wave_residual".into();
                extra.insert("recovery".into(), json!(wave_operator_recovery(traj, op)?));
                extra.insert("mode".into(), json!("report_only"));
                rep.series.push(s.judge(Verdict::ReportOnly));
            }
            Probe::Profile => {
                let profile = asymptotic_free_profile(traj, sp.alpha, sp.b, &dyadic)?;
                let defect = profile_defect(traj, &profile, run.t_end)? / n0;
                extra.insert("defect".into(), json!(defect));
                match sp.alpha_weak {
                    Some(aw) => {
                        let w = weakly_localized_part(traj, run.t_end, aw, sp.epsilon)?.norm() / n0;
                        extra.insert("weak_norm".into(), json!(w));
                        rep.checks.push(Check::at_most("profile_defect", defect, w + 5e-2));
                    }
                    None => {
                        extra.insert("weak_norm".into(), Value::Null);
                    }
                }
                rep.series.push(profile.residuals);
            }
            Probe::Weak => {
                let Some(aw) = sp.alpha_weak else {
                    rep.skipped.push((probe, "scattering.alpha_weak is not set".into()));
                    continue;
                };
                let mut w = weak_localization_series(traj, aw, sp.epsilon, &times)?;
                let ceiling = 0.25 + sp.epsilon + 0.1;
                if w.moment.max_value() > TRIVIAL {
                    if try_fit(&mut w.moment, window, &mut rep.checks)? {
                        w.moment = w.moment.judge(Verdict::AtMost { bound: ceiling });
                    }
                } else {
                    extra.insert("moment_trivial".into(), json!(true));
                }
                let peak = w.leakage.max_value();
                let ratio = if peak > TRIVIAL { leakage_decay_ratio(&w.leakage).unwrap_or(0.0) } else { 0.0 };
                rep.checks.push(Check::at_most("leakage_final_over_peak", ratio, 0.1));
                let defect = w.bookkeeping.column("partition_defect").unwrap_or(&[]).iter().copied().fold(0.0, f64::max);
                rep.checks.push(Check::at_most("partition_defect", defect / n0.max(f64::MIN_POSITIVE), 1e-12));
                let bessel = w
                    .bookkeeping
                    .column("leakage_sq_sum")
                    .unwrap_or(&[])
                    .iter()
                    .zip(&w.bookkeeping.values)
                    .map(|(s, d)| s - d * d * (1.0 + 1e-12))
                    .fold(f64::NEG_INFINITY, f64::max);
                rep.checks.push(Check::at_most("leakage_bessel_excess", bessel.max(0.0), 0.0));
                rep.series.extend([w.moment, w.leakage, w.bookkeeping]);
            }
            Probe::InteractionDecay => {
                let Some(delta) = sp.delta else {
                    rep.skipped.push((probe, "scattering.delta is not set".into()));
                    continue;
                };
                if run.interaction.potential.is_none() {
                    rep.skipped.push((probe, "no localized potential".into()));
                    continue;
                }
                let mut s = interaction_decay_probe(traj, sp.alpha, sp.b, delta, &times)?;
                let reference = s.reference_exponent.expect("set by the probe");
                if s.max_value() > TRIVIAL {
                    if try_fit(&mut s, window, &mut rep.checks)? {
                        let bound = reference + 0.3;
                        extra.insert("envelope_constant".into(), json!(envelope_constant(&s, bound, window)));
                        s = s.judge(Verdict::AtMost { bound });
                    }
                } else {
                    rep.checks.push(Check::at_most("interaction_decay_trivial", s.max_value(), TRIVIAL));
                }
                rep.series.push(s);
            }
            Probe::WeakVanishing => {
                let bank = TestBank::standard(&run.grid, run.seed);
                let s = weak_vanishing_probe(traj, &bank, sp.alpha, sp.b, &times)?;
                if let (Some(&first), Some((_, last))) = (s.values.first(), s.last()) {
                    let ratio = if first > TRIVIAL { last / first } else { 0.0 };
                    rep.checks.push(Check::at_most("weak_vanishing_final_over_initial", ratio, 0.05));
                }
                let worst = s.column("bound_ratio").unwrap_or(&[]).iter().copied().fold(0.0, f64::max);
                rep.checks.push(Check::at_most("weak_vanishing_bound_ratio", worst, 1.0 + 1e-9));
                rep.series.push(s);
            }
            Probe::Ledger => {
                let acc = match &streamed.ledger {
                    Some(a) => a.clone(),
                    None => propagation_ledger(traj, cfg.probes.ledger_kind, sp.alpha, sp.b, &traj.times())?,
                };
                let sum = acc.summary();
                let m = n0 * n0;
                rep.checks.push(Check::at_most("ledger_c1_negativity", (-sum.min_c1).max(0.0) / m, 1e-12));
                rep.checks.push(Check::at_most("ledger_c2_negativity", (-sum.min_c2).max(0.0) / m, 1e-12));
                rep.checks.push(Check::at_most("ledger_budget_defect", sum.max_defect / m, 1e-6));
                rep.checks.push(Check::at_most(
                    "ledger_propagation_inequality",
                    sum.int_c1,
                    sum.sup_expectation + sum.int_abs_g,
                ));
                extra.insert("kind".into(), json!(cfg.probes.ledger_kind.as_str()));
                extra.insert("int_c1".into(), json!(sum.int_c1));
                extra.insert("sup_expectation".into(), json!(sum.sup_expectation));
                extra.insert("int_abs_g".into(), json!(sum.int_abs_g));
                rep.series.push(acc.to_series(&format!("ledger_{}", cfg.probes.ledger_kind.as_str()))?);
            }
            Probe::Duhamel => {
                let pairs = match &streamed.duhamel {
                    Some(r) => r.clone(),
                    None => {
                        let mut out = Vec::new();
                        for &t in times.iter().filter(|&&t| traj.index_of(t).is_some_and(|i| i >= 2)) {
                            out.push((t, crate::dynamics::duhamel_residual(traj, t)?));
                        }
                        out
                    }
                };
                let mut s = DiagnosticSeries::new("duhamel_residual");
                for (t, r) in pairs.into_iter().filter(|p| p.0 > 1.0) {
                    s.push(t, r);
                }
                if let Some((_, v)) = s.last() {
                    rep.checks.push(Check::at_most("duhamel_residual_final", v, 1e-4));
                }
                rep.series.push(s);
            }
        }
        for s in &rep.series[first..] {
            extra.insert(s.label.clone(), s.summary());
        }
        extra.insert("checks".into(), json!(rep.checks[before..]));
        summary.insert(name.into(), Value::Object(extra));
    }
    for (p, why) in &rep.skipped {
        summary.insert(p.as_str().into(), json!({ "skipped": why }));
    }
    rep.summary = Value::Object(summary);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_ends() {
        let mut s = DiagnosticSeries::new("x");
        for i in 0..10 {
            s.push(i as f64 + 1.0, i as f64);
        }
        s.add_column("c", (0..10).map(|i| -(i as f64)).collect()).unwrap();
        let t = thin(&s, 4);
        assert_eq!(t.times.first(), Some(&1.0));
        assert_eq!(t.times.last(), Some(&10.0));
        assert!(t.len() <= 5);
        assert_eq!(t.column("c").unwrap().len(), t.len());
    }

    #[test]
    fn monotone_floor() {
        assert!(nonincreasing(&[3.0, 2.0, 2.0, 1e-13, 2e-13], 0.0));
        assert!(!nonincreasing(&[1.0, 1.5], 0.0));
    }
}
