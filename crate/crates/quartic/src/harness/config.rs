use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::validate::TheoremMode;
use crate::dynamics::{
    GaussianPacket, InitialData, InteractionSpec, LocalizedPotential, Modulation, PowerNonlinearity,
    RunConfig, ScatteringParams, Schedule,
};
use crate::scattering::LedgerKind;
use crate::spectral::GridSpec;
use crate::{Error, Result};

/// Probes run after the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Probe {
    Wave,
    SpatialWave,
    Profile,
    Weak,
    InteractionDecay,
    WeakVanishing,
    Ledger,
    Duhamel,
}

impl Probe {
    pub const ALL: [Probe; 8] = [
        Probe::Wave,
        Probe::SpatialWave,
        Probe::Profile,
        Probe::Weak,
        Probe::InteractionDecay,
        Probe::WeakVanishing,
        Probe::Ledger,
        Probe::Duhamel,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Probe::ALL.into_iter().find(|p| p.as_str() == s)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Probe::Wave => "wave",
            Probe::SpatialWave => "spatial_wave",
            Probe::Profile => "profile",
            Probe::Weak => "weak",
            Probe::InteractionDecay => "interaction_decay",
            Probe::WeakVanishing => "weak_vanishing",
            Probe::Ledger => "ledger",
            Probe::Duhamel => "duhamel",
        }
    }
}

/// Parses a comma list of probe names; `all` selects every probe.
pub fn parse_probe_list(s: &str) -> Result<Vec<Probe>> {
    if s.trim() == "all" {
        return Ok(Probe::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let p = Probe::parse(name).ok_or_else(|| Error::param(format!("unknown probe {name:?}")))?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSettings {
    pub probes: Vec<Probe>,
    pub ledger_kind: LedgerKind,
    /// window of the exponent fits and of the log-spaced probe times
    pub window: (f64, f64),
    pub per_octave: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { probes: Probe::ALL.to_vec(), ledger_kind: LedgerKind::F1FcF1, window: (16.0, 512.0), per_octave: 4 }
    }
}

/// One experiment: the run and the probes applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub probes: ProbeSettings,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| Error::param(format!("{key}: {v:?} is not a number")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    match v.trim() {
        "never" => Ok(u64::MAX),
        s => s.parse::<u64>().map_err(|_| Error::param(format!("{key}: {v:?} is not a whole number"))),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::param(format!("{key}: {v:?} is not true or false"))),
    }
}

fn parse_list<T>(key: &str, v: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(|s| f(key, s)).collect()
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_u64(v: u64) -> String {
    if v == u64::MAX { "never".into() } else { v.to_string() }
}

/// `key: value` lines; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key: value, got {line:?}") })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "empty key".into() });
        }
        if map.insert(k.to_string(), (i + 1, v.trim().to_string())).is_some() {
            return Err(Error::Parse { line: i + 1, msg: format!("duplicate key {k}") });
        }
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, (usize, String)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn wrap<T>(line: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::Parse { line, msg },
            other => other,
        })
    }

    fn req<T>(&mut self, key: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<T> {
        let (line, v) = self.take(key).ok_or_else(|| Error::param(format!("missing key {key}")))?;
        Self::wrap(line, f(key, &v))
    }

    fn opt<T>(&mut self, key: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => Self::wrap(line, f(key, &v)).map(Some),
        }
    }
}

fn broadcast<T: Copy>(v: Vec<T>, dim: usize, what: &str) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0]; dim]),
        n if n == dim => Ok(v),
        n => Err(Error::param(format!("{what} has {n} entries for dim {dim}"))),
    }
}

impl ExperimentConfig {
    pub fn new(run: RunConfig) -> Self {
        ExperimentConfig { run, probes: ProbeSettings::default() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader { map: parse_key_values(text)? };
        let dim = r.req("grid.dim", |k, v| parse_u64(k, v))? as usize;
        let points = r.req("grid.points", |k, v| parse_list(k, v, |k, v| parse_u64(k, v).map(|p| p as usize)))?;
        let lengths = r.req("grid.box_length", |k, v| parse_list(k, v, parse_f64))?;
        let grid = GridSpec::new(&broadcast(points, dim, "grid.points")?, &broadcast(lengths, dim, "grid.box_length")?)?;

        let kind = r.req("interaction.kind", |_, v| Ok(v.to_string()))?;
        let (with_v, with_n) = match kind.as_str() {
            "none" => (false, false),
            "linear_localized" => (true, false),
            "power_nonlinear" => (false, true),
            "sum" => (true, true),
            other => return Err(Error::param(format!("interaction.kind {other:?} is not none, linear_localized, power_nonlinear or sum"))),
        };
        let potential = if with_v {
            let re = r.req("interaction.v0", parse_f64)?;
            let im = r.opt("interaction.v0_imag", parse_f64)?.unwrap_or(0.0);
            let sigma = r.req("interaction.sigma", parse_f64)?;
            let modulation = match r.opt("interaction.modulation", |_, v| Ok(v.to_string()))?.as_deref() {
                None | Some("constant") => Modulation::Constant,
                Some("cosine") => Modulation::Cosine { omega: r.req("interaction.omega", parse_f64)? },
                Some("switch_on") => Modulation::SwitchOn { t_on: r.req("interaction.t_on", parse_f64)? },
                Some(other) => return Err(Error::param(format!("interaction.modulation {other:?} is unknown"))),
            };
            Some(LocalizedPotential { v0: Complex64::new(re, im), sigma, modulation })
        } else {
            None
        };
        let nonlinearity = if with_n {
            Some(PowerNonlinearity {
                lambda: r.req("interaction.lambda", parse_f64)?,
                power: r.req("interaction.power", parse_f64)?,
            })
        } else {
            None
        };
        let interaction = InteractionSpec { potential, nonlinearity };

        let q0 = r.req("initial.q0", parse_f64)?;
        let count = r.req("initial.packets", |k, v| parse_u64(k, v))? as usize;
        let mut packets = Vec::with_capacity(count);
        for i in 0..count {
            let p = format!("initial.packet{i}.");
            let zero = vec![0.0; dim];
            packets.push(GaussianPacket {
                center: r.opt(&format!("{p}center"), |k, v| parse_list(k, v, parse_f64))?.unwrap_or(zero.clone()),
                width: r.req(&format!("{p}width"), parse_f64)?,
                carrier: r.opt(&format!("{p}carrier"), |k, v| parse_list(k, v, parse_f64))?.unwrap_or(zero),
                amplitude: r.opt(&format!("{p}amplitude"), parse_f64)?.unwrap_or(1.0),
            });
        }
        let initial = InitialData { packets, q0 };

        let dt = r.req("time.dt", parse_f64)?;
        let t_end = r.req("time.t_end", parse_f64)?;
        let mut run = RunConfig::new(grid, interaction, initial, dt, t_end);
        let d = Schedule::default();
        run.schedule = Schedule {
            dyadic: r.opt("schedule.dyadic", parse_bool)?.unwrap_or(d.dyadic),
            stride: r.opt("schedule.stride", parse_u64)?.unwrap_or(d.stride),
            store_every: r.opt("schedule.store_every", parse_u64)?.unwrap_or(d.store_every),
        };
        let sd = ScatteringParams::default();
        run.scattering = ScatteringParams {
            alpha: r.opt("scattering.alpha", parse_f64)?.unwrap_or(sd.alpha),
            b: r.opt("scattering.b", parse_f64)?.unwrap_or(sd.b),
            epsilon: r.opt("scattering.epsilon", parse_f64)?.unwrap_or(sd.epsilon),
            delta: r.opt("scattering.delta", parse_f64)?,
            alpha_weak: r.opt("scattering.alpha_weak", parse_f64)?,
            mode: r
                .opt("scattering.mode", |k, v| {
                    TheoremMode::parse(v).ok_or_else(|| Error::param(format!("{k}: unknown mode {v:?}")))
                })?
                .unwrap_or(sd.mode),
        };
        if let Some(s) = r.opt("seed", parse_u64)? {
            run.seed = s;
        }
        if let Some(s) = r.opt("check.sigma", parse_f64)? {
            run.check_sigma = s;
        }
        if let Some(s) = r.opt("check.drift_tolerance", parse_f64)? {
            run.drift_tolerance = s;
        }
        run.output = r.opt("output.dir", |_, v| Ok(PathBuf::from(v)))?;

        let pd = ProbeSettings::default();
        let probes = ProbeSettings {
            probes: r.opt("probes.list", |_, v| parse_probe_list(v))?.unwrap_or(pd.probes),
            ledger_kind: r
                .opt("probes.ledger_kind", |k, v| {
                    LedgerKind::parse(v).ok_or_else(|| Error::param(format!("{k}: unknown ledger {v:?}")))
                })?
                .unwrap_or(pd.ledger_kind),
            window: r.opt("probes.window", |k, v| parse_window(v).map_err(|_| Error::param(format!("{k}: bad window {v:?}"))))?.unwrap_or(pd.window),
            per_octave: r.opt("probes.per_octave", parse_u64)?.map(|v| v as usize).unwrap_or(pd.per_octave),
        };

        if let Some((k, (line, _))) = r.map.into_iter().next() {
            return Err(Error::Parse { line, msg: format!("unknown key {k}") });
        }
        Ok(ExperimentConfig { run, probes })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The physics part, one key per line in a fixed order.
    fn physics_lines(&self) -> Vec<(String, String)> {
        let c = &self.run;
        let n = c.grid.dim();
        let mut v: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, val: String| v.push((k.to_string(), val));
        put("grid.dim", n.to_string());
        put("grid.points", fmt_list(&c.grid.points()[..n]));
        put("grid.box_length", fmt_list(&c.grid.box_length()[..n]));
        let kind = match (c.interaction.potential.is_some(), c.interaction.nonlinearity.is_some()) {
            (false, false) => "none",
            (true, false) => "linear_localized",
            (false, true) => "power_nonlinear",
            (true, true) => "sum",
        };
        put("interaction.kind", kind.into());
        if let Some(p) = c.interaction.potential {
            put("interaction.v0", p.v0.re.to_string());
            put("interaction.v0_imag", p.v0.im.to_string());
            put("interaction.sigma", p.sigma.to_string());
            match p.modulation {
                Modulation::Constant => put("interaction.modulation", "constant".into()),
                Modulation::Cosine { omega } => {
                    put("interaction.modulation", "cosine".into());
                    put("interaction.omega", omega.to_string());
                }
                Modulation::SwitchOn { t_on } => {
                    put("interaction.modulation", "switch_on".into());
                    put("interaction.t_on", t_on.to_string());
                }
            }
        }
        if let Some(nl) = c.interaction.nonlinearity {
            put("interaction.lambda", nl.lambda.to_string());
            put("interaction.power", nl.power.to_string());
        }
        put("initial.q0", c.initial.q0.to_string());
        put("initial.packets", c.initial.packets.len().to_string());
        for (i, p) in c.initial.packets.iter().enumerate() {
            put(&format!("initial.packet{i}.center"), fmt_list(&p.center));
            put(&format!("initial.packet{i}.width"), p.width.to_string());
            put(&format!("initial.packet{i}.carrier"), fmt_list(&p.carrier));
            put(&format!("initial.packet{i}.amplitude"), p.amplitude.to_string());
        }
        put("time.dt", c.dt.to_string());
        put("time.t_end", c.t_end.to_string());
        put("schedule.dyadic", c.schedule.dyadic.to_string());
        put("schedule.stride", fmt_u64(c.schedule.stride));
        put("schedule.store_every", fmt_u64(c.schedule.store_every));
        let s = &c.scattering;
        put("scattering.alpha", s.alpha.to_string());
        put("scattering.b", s.b.to_string());
        put("scattering.epsilon", s.epsilon.to_string());
        if let Some(d) = s.delta {
            put("scattering.delta", d.to_string());
        }
        if let Some(a) = s.alpha_weak {
            put("scattering.alpha_weak", a.to_string());
        }
        put("scattering.mode", s.mode.as_str().into());
        put("seed", c.seed.to_string());
        put("check.sigma", c.check_sigma.to_string());
        put("check.drift_tolerance", c.drift_tolerance.to_string());
        let p = &self.probes;
        put("probes.list", p.probes.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(","));
        put("probes.ledger_kind", p.ledger_kind.as_str().into());
        put("probes.window", format!("{}:{}", p.window.0, p.window.1));
        put("probes.per_octave", p.per_octave.to_string());
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.physics_lines() {
            let _ = writeln!(out, "{k}: {v}");
        }
        if let Some(dir) = &self.run.output {
            let _ = writeln!(out, "output.dir: {}", dir.display());
        }
        out
    }

    /// SHA-256 over every key except `output.*`.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.physics_lines() {
            h.update(k.as_bytes());
            h.update(b"\x1f");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// `a:b` with `a < b`.
pub fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| Error::param(format!("window {s:?} is not a:b")))?;
    let a = parse_f64("window", a)?;
    let b = parse_f64("window", b)?;
    if !(a < b) {
        return Err(Error::param(format!("window {s:?} is empty")));
    }
    Ok((a, b))
}
