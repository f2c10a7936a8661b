use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    /// path relative to the manifest directory
    pub name: String,
    pub bytes: u64,
}

/// Record of one experiment directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentManifest {
    pub config_hash: String,
    pub config_file: String,
    /// seconds since the Unix epoch
    pub created: u64,
    pub seed: u64,
    pub version: String,
    pub complete: bool,
    /// last step whose state and observer files are on disk
    pub last_step: u64,
    pub artifacts: Vec<Artifact>,
}

impl ExperimentManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "manifest_version: {MANIFEST_VERSION}");
        let _ = writeln!(s, "config_hash: {}", self.config_hash);
        let _ = writeln!(s, "config_file: {}", self.config_file);
        let _ = writeln!(s, "created: {}", self.created);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "module.quartic: {}", self.version);
        let _ = writeln!(s, "status: {}", if self.complete { "complete" } else { "incomplete" });
        let _ = writeln!(s, "last_step: {}", self.last_step);
        for a in &self.artifacts {
            let _ = writeln!(s, "artifact: {} {}", a.bytes, a.name);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Manifest(format!("line {line}: {msg}"));
        let mut m = ExperimentManifest {
            config_hash: String::new(),
            config_file: String::new(),
            created: 0,
            seed: 0,
            version: String::new(),
            complete: false,
            last_step: 0,
            artifacts: Vec::new(),
        };
        let mut seen_version = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let (k, v) = raw.split_once(':').ok_or_else(|| err(line, format!("expected key: value, got {raw:?}")))?;
            let v = v.trim();
            let num = |v: &str| v.parse::<u64>().map_err(|_| err(line, format!("{v:?} is not a whole number")));
            match k.trim() {
                "manifest_version" => {
                    if num(v)? != MANIFEST_VERSION as u64 {
                        return Err(err(line, format!("unsupported manifest version {v}")));
                    }
                    seen_version = true;
                }
                "config_hash" => m.config_hash = v.to_string(),
                "config_file" => m.config_file = v.to_string(),
                "created" => m.created = num(v)?,
                "seed" => m.seed = num(v)?,
                "module.quartic" => m.version = v.to_string(),
                "status" => {
                    m.complete = match v {
                        "complete" => true,
                        "incomplete" => false,
                        _ => return Err(err(line, format!("status {v:?}"))),
                    }
                }
                "last_step" => m.last_step = num(v)?,
                "artifact" => {
                    let (bytes, name) =
                        v.split_once(' ').ok_or_else(|| err(line, "artifact needs a size and a name".into()))?;
                    let name = name.trim();
                    if name.is_empty() || Path::new(name).is_absolute() || name.split('/').any(|c| c == "..") {
                        return Err(err(line, format!("artifact name {name:?} must be relative")));
                    }
                    m.artifacts.push(Artifact { name: name.to_string(), bytes: num(bytes)? });
                }
                other => return Err(err(line, format!("unknown key {other}"))),
            }
        }
        if !seen_version || m.config_hash.is_empty() || m.config_file.is_empty() {
            return Err(Error::Manifest("manifest lacks version, config hash or config file".into()));
        }
        Ok(m)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let p = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        Self::parse(&text)
    }

    /// Writes atomically, with artifacts sorted by name.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        self.artifacts.sort_by(|a, b| a.name.cmp(&b.name));
        let p = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, self.to_text()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &p).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    /// Records `name` (relative to `dir`) with its current size.
    pub fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        let p = dir.join(name);
        let bytes = fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
        match self.artifacts.iter_mut().find(|a| a.name == name) {
            Some(a) => a.bytes = bytes,
            None => self.artifacts.push(Artifact { name: name.to_string(), bytes }),
        }
        Ok(())
    }

    /// Every artifact exists with its recorded length.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for a in &self.artifacts {
            let p = dir.join(&a.name);
            let len = fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
            if len != a.bytes {
                return Err(Error::Manifest(format!("{} has {len} bytes, manifest says {}", a.name, a.bytes)));
            }
        }
        Ok(())
    }
}
