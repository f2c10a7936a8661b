use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use quartic::harness::{
    analyze_dir, fit_power_law, parse_csv_blocks, parse_probe_list, parse_window, resume_experiment, run_experiment,
    write_csv_block, write_csv_blocks, ExperimentConfig, ExperimentOutcome, ProbeReport, RunOptions,
};
use quartic::scattering::{
    commutator_norm_series, kernel_decay_probe, velocity_bound_probe, DiagnosticSeries, VelocityBound, VelocityParams,
    Verdict,
};
use quartic::spectral::GridSpec;
use quartic::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_THRESHOLD: u8 = 3;

#[derive(Parser)]
#[command(name = "quartic", version, about = "Bi-laplacian Schrödinger scattering experiments")]
struct Cli {
    /// Output directory; overrides output.dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Store a checkpoint every N steps
    #[arg(long, global = true)]
    checkpoint_every: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve a config and run its probes
    Simulate {
        config: PathBuf,
        /// Stop after this step, leaving a resumable incomplete run
        #[arg(long)]
        stop_after: Option<u64>,
    },
    /// Re-run probes on a finished experiment (directory or its manifest)
    Analyze {
        manifest: PathBuf,
        #[arg(long)]
        probes: Option<String>,
    },
    /// Continue an incomplete experiment
    Resume {
        manifest: PathBuf,
        #[arg(long)]
        stop_after: Option<u64>,
    },
    /// Check a config without running it
    Validate { config: PathBuf },
    /// Fit every block of a probe CSV over a window
    Fit {
        csv: PathBuf,
        #[arg(long)]
        window: String,
    },
    /// Free kernel decay of band-limited near-delta data
    ProbeKernel {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 131072)]
        points: usize,
        #[arg(long)]
        box_length: Option<f64>,
        /// derivative multi-index, comma separated
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        q0: f64,
        #[arg(long, default_value = "10:1000")]
        window: String,
        #[arg(long, default_value_t = 8)]
        per_octave: usize,
        /// target exponent tolerance
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Commutator norm of the spatial and spectral cutoffs
    ProbeCommutator {
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(long, default_value_t = 256.0)]
        box_length: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        b: f64,
        #[arg(long, default_value = "16,32,64,128,256,512,1024")]
        times: String,
        #[arg(long, default_value_t = 300)]
        iters: usize,
    },
    /// Velocity-bound operator norms over a flow schedule
    ProbeVelocity {
        #[arg(long, default_value = "mmvb1")]
        kind: String,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long, default_value_t = 200.0)]
        box_length: f64,
        #[arg(long, default_value_t = 16.0)]
        t: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        q0: f64,
        #[arg(long, default_value = "0,1,4,16,64,256,1024")]
        a: String,
        #[arg(long, default_value_t = 300)]
        iters: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_THRESHOLD),
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.downcast_ref::<Error>().is_some_and(is_validation) || e.downcast_ref::<clap::Error>().is_some();
            ExitCode::from(if validation { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}

fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::Inadmissible(_) | Error::Parse { .. }
    )
}

/// `Ok(true)` when every threshold passes.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let opts = RunOptions { out: cli.out.clone(), seed: cli.seed, checkpoint_every: cli.checkpoint_every, stop_after: None };
    match cli.cmd {
        Cmd::Simulate { config, stop_after } => {
            let cfg = ExperimentConfig::read(&config)?;
            let outcome = run_experiment(cfg, &RunOptions { stop_after, ..opts })?;
            Ok(report_outcome(&outcome))
        }
        Cmd::Resume { manifest, stop_after } => {
            let outcome = resume_experiment(&experiment_dir(&manifest), stop_after)?;
            Ok(report_outcome(&outcome))
        }
        Cmd::Analyze { manifest, probes } => {
            let list = probes.as_deref().map(parse_probe_list).transpose()?;
            let report = analyze_dir(&experiment_dir(&manifest), list.as_deref())?;
            emit(&cli.out, "analysis.csv", &write_csv_blocks(&report.series))?;
            print_report(&report);
            Ok(report.passes())
        }
        Cmd::Validate { config } => {
            let mut cfg = ExperimentConfig::read(&config)?;
            opts.apply(&mut cfg);
            cfg.run.validate()?;
            println!("valid: hash {}", cfg.hash());
            Ok(true)
        }
        Cmd::Fit { csv, window } => {
            let window = parse_window(&window)?;
            let text = fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let mut ok = true;
            for s in parse_csv_blocks(&text)? {
                match fit_power_law(&s.times, &s.values, window) {
                    Ok(f) => println!(
                        "{}: exponent {:.4} intercept {:.4} residual {:.3e} points {} reference {}",
                        s.label,
                        f.slope,
                        f.intercept,
                        f.residual,
                        f.points,
                        s.reference_exponent.map_or("none".into(), |r| format!("{r:.4}"))
                    ),
                    Err(e) => {
                        ok = false;
                        println!("{}: {e}", s.label);
                    }
                }
            }
            if !ok {
                bail!(Error::InsufficientSamples("some blocks could not be fitted".into()));
            }
            Ok(true)
        }
        Cmd::ProbeKernel { dim, points, box_length, gamma, q0, window, per_octave, tol } => {
            let (t0, t1) = parse_window(&window)?;
            let l = box_length.unwrap_or_else(|| 2.0 * (8.0 * q0.powi(3) * t1 + 20.0));
            let grid = GridSpec::new(&vec![points; dim], &vec![l; dim])?;
            let gamma: Vec<usize> = match gamma {
                Some(g) => g.split(',').map(|v| v.trim().parse()).collect::<Result<_, _>>().context("gamma")?,
                None => vec![0; dim],
            };
            let times = geometric(t0, t1, per_octave);
            let mut s = kernel_decay_probe(&grid, &gamma, q0, &times)?;
            let target = s.reference_exponent.expect("kernel probe sets a reference");
            s.fit_window((t0, t1))?;
            let s = s.judge(Verdict::Within { target, tol });
            finish_series(&cli.out, "kernel.csv", s)
        }
        Cmd::ProbeCommutator { points, box_length, alpha, b, times, iters } => {
            let grid = GridSpec::new(&[points], &[box_length])?;
            let times = parse_floats(&times)?;
            let mut s = commutator_norm_series(&grid, alpha, b, &times, iters, 1e-10)?;
            s.fit_window((times[0], *times.last().expect("non-empty")))?;
            finish_series(&cli.out, "commutator.csv", s)
        }
        Cmd::ProbeVelocity { kind, points, box_length, t, sigma, eps, q0, a, iters } => {
            let kind = VelocityBound::parse(&kind)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown velocity bound {kind:?} (mmvb1, mmvb2+, mmvb2-)")))?;
            let grid = GridSpec::new(&[points], &[box_length])?;
            let schedule = parse_floats(&a)?;
            let p = VelocityParams { kind, t, sigma, eps, q0 };
            let mut s = velocity_bound_probe(&grid, &p, &schedule, iters, 1e-10)?;
            let w = (s.times[0], *s.times.last().expect("non-empty"));
            s.fit_window(w)?;
            finish_series(&cli.out, "velocity.csv", s)
        }
    }
}

fn experiment_dir(p: &Path) -> PathBuf {
    if p.is_file() {
        p.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
    } else {
        p.to_path_buf()
    }
}

fn geometric(t0: f64, t1: f64, per_octave: usize) -> Vec<f64> {
    let n = ((t1 / t0).log2() * per_octave as f64).round() as usize;
    (0..=n).map(|k| t0 * (t1 / t0).powf(k as f64 / n.max(1) as f64)).collect()
}

fn parse_floats(s: &str) -> anyhow::Result<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().context("number list")?;
    if v.is_empty() {
        bail!(Error::InvalidParameter("empty list".into()));
    }
    Ok(v)
}

fn emit(out: &Option<PathBuf>, name: &str, text: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn finish_series(out: &Option<PathBuf>, name: &str, s: DiagnosticSeries) -> anyhow::Result<bool> {
    emit(out, name, &write_csv_block(&s))?;
    println!("{}", serde_json::to_string_pretty(&s.summary())?);
    Ok(s.passes() != Some(false))
}

fn print_report(r: &ProbeReport) {
    for c in &r.checks {
        println!("{} {}: {:.4e} (bound {:.4e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
    }
    for s in &r.series {
        if let Some(p) = s.passes() {
            let slope = s.fit.map_or(f64::NAN, |f| f.slope);
            println!("{} {}: exponent {slope:.4}", if p { "PASS" } else { "FAIL" }, s.label);
        }
    }
    for (p, why) in &r.skipped {
        println!("SKIP {}: {why}", p.as_str());
    }
}

fn report_outcome(o: &ExperimentOutcome) -> bool {
    match &o.report {
        Some(r) => {
            print_report(r);
            println!("complete: {}", o.dir.display());
            o.passes()
        }
        None if o.manifest.complete => {
            println!("already complete: {}", o.dir.display());
            let summary = fs::read_to_string(o.dir.join(quartic::harness::SUMMARY_FILE)).unwrap_or_default();
            serde_json::from_str::<serde_json::Value>(&summary)
                .ok()
                .and_then(|v| v["pass"].as_bool())
                .unwrap_or(false)
        }
        None => {
            println!("incomplete at step {}: {}", o.manifest.last_step, o.dir.display());
            true
        }
    }
}
