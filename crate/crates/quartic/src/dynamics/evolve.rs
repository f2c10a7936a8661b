use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::RunConfig;
use super::strang::Stepper;
use crate::spectral::{read_checkpoint, write_checkpoint, ComplexField};
use crate::{Error, Result};

/// One observed sample of a running trajectory.
pub struct Sample<'a> {
    pub step: u64,
    pub t: f64,
    pub psi: &'a ComplexField,
    pub config: &'a RunConfig,
    pub stepper: &'a Stepper,
}

/// Serializable running state of an observer, saved next to each checkpoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObserverState {
    pub scalars: BTreeMap<String, Vec<f64>>,
    pub fields: BTreeMap<String, ComplexField>,
}

/// A streaming consumer of samples, for diagnostics that need every stride sample.
pub trait Observer {
    fn name(&self) -> &str;
    fn observe(&mut self, sample: &Sample<'_>) -> Result<()>;
    fn save_state(&self) -> ObserverState {
        ObserverState::default()
    }
    fn load_state(&mut self, _state: &ObserverState) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Memory(ComplexField),
    Disk(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredSample {
    pub step: u64,
    pub t: f64,
    slot: Slot,
}

impl StoredSample {
    pub fn path(&self) -> Option<&Path> {
        match &self.slot {
            Slot::Disk(p) => Some(p),
            Slot::Memory(_) => None,
        }
    }
}

/// Stored samples of one run plus run-level bookkeeping.
#[derive(Debug, Clone)]
pub struct Trajectory {
    config: RunConfig,
    samples: Vec<StoredSample>,
    complete: bool,
    initial_norm: f64,
    max_drift: f64,
    localization: Vec<(f64, f64)>,
}

impl Trajectory {
    /// A trajectory over states held in memory, keyed by step.
    pub fn from_states(config: RunConfig, states: Vec<(u64, ComplexField)>) -> Result<Self> {
        let initial_norm = states
            .first()
            .ok_or_else(|| Error::InsufficientSamples("empty trajectory".into()))?
            .1
            .norm();
        let samples = states
            .into_iter()
            .map(|(step, f)| StoredSample { step, t: config.time_of(step), slot: Slot::Memory(f) })
            .collect();
        Ok(Trajectory { config, samples, complete: true, initial_norm, max_drift: 0.0, localization: Vec::new() })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn samples(&self) -> &[StoredSample] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn state(&self, i: usize) -> Result<ComplexField> {
        let s = self
            .samples
            .get(i)
            .ok_or_else(|| Error::InsufficientSamples(format!("sample {i} of {}", self.samples.len())))?;
        match &s.slot {
            Slot::Memory(f) => Ok(f.clone()),
            Slot::Disk(p) => Ok(read_checkpoint(p)?.field),
        }
    }

    /// ψ(1).
    pub fn initial(&self) -> Result<ComplexField> {
        self.state(0)
    }

    pub fn initial_norm(&self) -> f64 {
        self.initial_norm
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.samples.iter().position(|s| (s.t - t).abs() <= 1e-9 * t.max(1.0))
    }

    pub fn state_at(&self, t: f64) -> Result<ComplexField> {
        let i = self
            .index_of(t)
            .ok_or_else(|| Error::InsufficientSamples(format!("no stored sample at t = {t}")))?;
        self.state(i)
    }

    /// Indices of the stored samples at `t = 2^k`, in order.
    pub fn dyadic_indices(&self) -> Vec<usize> {
        (0..self.samples.len()).filter(|&i| self.config.is_dyadic(self.samples[i].step)).collect()
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.max_drift
    }

    /// `(t, sup ⟨x⟩^σ |𝒩_nl|)` for power nonlinearities.
    pub fn nonlinear_localization(&self) -> &[(f64, f64)] {
        &self.localization
    }

    /// Whether the weighted nonlinearity stayed bounded: the second half of the
    /// series never exceeds the maximum of the first half by more than 10%.
    pub fn nonlinear_stays_localized(&self) -> Option<bool> {
        if self.localization.len() < 2 {
            return None;
        }
        let mid = self.localization.len() / 2;
        let early = self.localization[..mid].iter().map(|p| p.1).fold(0.0, f64::max);
        let late = self.localization[mid..].iter().map(|p| p.1).fold(0.0, f64::max);
        Some(late <= 1.1 * early)
    }
}

fn stored_on_disk(config: &RunConfig, dir: &Path, upto: u64) -> Result<Vec<StoredSample>> {
    let last = config.total_steps()?;
    let mut out = Vec::new();
    for k in 0..=upto.min(last) {
        if config.is_stored(k, last) {
            let p = checkpoint_path(dir, k);
            if !p.exists() {
                return Err(Error::InsufficientSamples(format!("missing checkpoint {}", p.display())));
            }
            out.push(StoredSample { step: k, t: config.time_of(k), slot: Slot::Disk(p) });
        }
    }
    Ok(out)
}

/// The latest stored step whose state and observer files are both on disk.
pub fn latest_checkpoint(config: &RunConfig, dir: &Path) -> Result<Option<u64>> {
    let last = config.total_steps()?;
    let mut best = None;
    for k in 0..=last {
        if config.is_stored(k, last) && checkpoint_path(dir, k).exists() && observer_path(dir, k).exists() {
            best = Some(k);
        }
    }
    Ok(best)
}

impl Trajectory {
    /// The stored samples of a run in `dir` up to step `upto`, read lazily.
    pub fn open(config: &RunConfig, dir: &Path, upto: u64) -> Result<Trajectory> {
        let samples = stored_on_disk(config, dir, upto)?;
        let first = samples.first().ok_or_else(|| Error::InsufficientSamples("no checkpoints".into()))?;
        let initial_norm = read_checkpoint(first.path().expect("on disk"))?.field.norm();
        let mut traj = Trajectory {
            config: config.clone(),
            complete: samples.last().is_some_and(|s| Some(s.step) == config.total_steps().ok()),
            samples,
            initial_norm,
            max_drift: 0.0,
            localization: Vec::new(),
        };
        let last = traj.samples.last().expect("non-empty").step;
        if let Ok(text) = fs::read_to_string(observer_path(dir, last)) {
            restore_run_state(&text, &mut traj)?;
        }
        Ok(traj)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    /// stop (leaving the run incomplete) once this step has been stored
    pub stop_after: Option<u64>,
}

/// Runs `config` from `t = 1` to `t_end`, feeding every scheduled sample to the observers.
pub fn evolve(config: &RunConfig, observers: &mut [&mut dyn Observer]) -> Result<Trajectory> {
    evolve_with(config, observers, None, EvolveOptions::default())
}

pub fn checkpoint_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("psi_{step:010}.bin"))
}

fn observer_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("observers_{step:010}.txt"))
}

fn observer_field_path(dir: &Path, step: u64, name: &str, key: &str) -> PathBuf {
    dir.join(format!("observers_{step:010}_{name}_{key}.bin"))
}

/// Evolves from `t = 1`, or continues from the stored sample at `resume_step`.
pub fn evolve_with(
    config: &RunConfig,
    observers: &mut [&mut dyn Observer],
    resume_step: Option<u64>,
    options: EvolveOptions,
) -> Result<Trajectory> {
    config.validate()?;
    let last = config.total_steps()?;
    let stepper = Stepper::new(config.grid, config.interaction, config.dt)?;
    let dir = config.output.as_deref();
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let psi0 = config.initial.prepare(&config.grid)?;
    let initial_norm = psi0.norm();
    let mut traj = Trajectory {
        config: config.clone(),
        samples: Vec::new(),
        complete: false,
        initial_norm,
        max_drift: 0.0,
        localization: Vec::new(),
    };

    let (mut step, mut psi) = match resume_step {
        None => (0, psi0),
        Some(s) => {
            let d = dir.ok_or_else(|| Error::param("resuming needs an output directory"))?;
            if s > last || !config.is_stored(s, last) {
                return Err(Error::param(format!("step {s} is not a stored step of this run")));
            }
            traj.samples = stored_on_disk(config, d, s)?;
            load_observer_states(d, s, observers)?;
            let header = fs::read_to_string(observer_path(d, s)).map_err(|e| Error::io(observer_path(d, s), e))?;
            restore_run_state(&header, &mut traj)?;
            let cp = read_checkpoint(&checkpoint_path(d, s))?;
            (s, cp.field)
        }
    };

    let fresh = resume_step.is_none();
    let mut saved = resume_step;
    loop {
        let t = config.time_of(step);
        let observe = config.is_sample(step, last) && (step > 0 || fresh) && !(resume_step == Some(step));
        if observe {
            record_run_state(&mut traj, config, &psi, t)?;
            let sample = Sample { step, t, psi: &psi, config, stepper: &stepper };
            for o in observers.iter_mut() {
                o.observe(&sample)?;
            }
        }
        if config.is_stored(step, last) && resume_step != Some(step) {
            let slot = match dir {
                Some(d) => {
                    let p = checkpoint_path(d, step);
                    write_atomic(&p, |tmp| write_checkpoint(tmp, &psi, t).map(|_| ()))?;
                    save_observer_states(d, step, observers, &traj)?;
                    if let Some(prev) = saved.replace(step) {
                        remove_observer_states(d, prev)?;
                    }
                    Slot::Disk(p)
                }
                None => Slot::Memory(psi.clone()),
            };
            traj.samples.push(StoredSample { step, t, slot });
            if options.stop_after.is_some_and(|s| step >= s) && step < last {
                return Ok(traj);
            }
        }
        if step == last {
            break;
        }
        psi = stepper.step(psi, t)?;
        step += 1;
    }
    traj.complete = true;
    Ok(traj)
}

fn record_run_state(traj: &mut Trajectory, config: &RunConfig, psi: &ComplexField, t: f64) -> Result<()> {
    let n = psi.norm();
    if !n.is_finite() {
        return Err(Error::Blowup { t, detail: "non-finite norm".into() });
    }
    let drift = (n - traj.initial_norm).abs() / traj.initial_norm;
    if config.interaction.is_real() {
        traj.max_drift = traj.max_drift.max(drift);
        if drift > config.drift_tolerance {
            return Err(Error::Instability { t, drift });
        }
    }
    if let Some(p) = config.interaction.nonlinearity {
        let sigma = config.check_sigma;
        let w = psi.grid().map_positions(|x| (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(sigma / 2.0));
        let sup = psi
            .samples()
            .iter()
            .zip(&w)
            .map(|(z, w)| w * p.lambda.abs() * z.norm().powf(p.power - 1.0))
            .fold(0.0, f64::max);
        traj.localization.push((t, sup));
    }
    Ok(())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Checkpoint(format!("bad number {x:?}"))))
        .collect()
}

fn save_observer_states(dir: &Path, step: u64, observers: &[&mut dyn Observer], traj: &Trajectory) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("run.max_drift: {}\n", traj.max_drift));
    let (lt, lv): (Vec<f64>, Vec<f64>) = traj.localization.iter().copied().unzip();
    text.push_str(&format!("run.localization_t: {}\n", fmt_list(&lt)));
    text.push_str(&format!("run.localization_v: {}\n", fmt_list(&lv)));
    for o in observers {
        let st = o.save_state();
        for (k, v) in &st.scalars {
            text.push_str(&format!("{}.{}: {}\n", o.name(), k, fmt_list(v)));
        }
        for (k, f) in &st.fields {
            let p = observer_field_path(dir, step, o.name(), k);
            write_atomic(&p, |tmp| write_checkpoint(tmp, f, 0.0).map(|_| ()))?;
            text.push_str(&format!("{}.field.{}: {}\n", o.name(), k, p.file_name().unwrap_or_default().to_string_lossy()));
        }
    }
    let p = observer_path(dir, step);
    write_atomic(&p, |tmp| fs::write(tmp, &text).map_err(|e| Error::io(tmp, e)))
}

/// Drops the observer files of an older checkpoint; only the newest is needed to resume.
fn remove_observer_states(dir: &Path, step: u64) -> Result<()> {
    let prefix = format!("observers_{step:010}");
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.file_name().to_string_lossy().starts_with(&prefix) {
            fs::remove_file(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        }
    }
    Ok(())
}

/// Writes through a temporary sibling and renames, so a killed run never leaves a
/// truncated file under the final name.
fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    write(&tmp)?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn restore_run_state(text: &str, traj: &mut Trajectory) -> Result<()> {
    let mut lt = Vec::new();
    let mut lv = Vec::new();
    for line in text.lines() {
        let Some((k, v)) = line.split_once(": ") else { continue };
        match k {
            "run.max_drift" => traj.max_drift = parse_list(v)?.first().copied().unwrap_or(0.0),
            "run.localization_t" => lt = parse_list(v)?,
            "run.localization_v" => lv = parse_list(v)?,
            _ => {}
        }
    }
    traj.localization = lt.into_iter().zip(lv).collect();
    Ok(())
}

fn load_observer_states(dir: &Path, step: u64, observers: &mut [&mut dyn Observer]) -> Result<()> {
    let p = observer_path(dir, step);
    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    for o in observers.iter_mut() {
        let prefix = format!("{}.", o.name());
        let mut st = ObserverState::default();
        for line in text.lines() {
            let Some((k, v)) = line.split_once(": ") else { continue };
            let Some(key) = k.strip_prefix(&prefix) else { continue };
            if let Some(fkey) = key.strip_prefix("field.") {
                st.fields.insert(fkey.to_string(), read_checkpoint(&dir.join(v.trim()))?.field);
            } else {
                st.scalars.insert(key.to_string(), parse_list(v)?);
            }
        }
        o.load_state(&st)?;
    }
    Ok(())
}
