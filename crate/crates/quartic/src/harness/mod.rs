//! Parameter-region validation, exponent fits, configuration, persistence and
//! experiment orchestration.

mod config;
mod csv;
mod experiment;
mod fit;
mod manifest;
mod validate;

pub use config::{
    parse_key_values, parse_probe_list, parse_window, ExperimentConfig, Probe, ProbeSettings,
};
pub use csv::{parse_csv_blocks, write_csv_block, write_csv_blocks};
pub use experiment::{
    analyze, analyze_dir, null_config, resume_experiment, run_experiment, Check, ExperimentOutcome,
    ProbeReport, RunOptions, Streamed, CONFIG_FILE, PROBES_FILE, SUMMARY_FILE,
};
pub use fit::{fit_exponent, fit_power_law, PowerLawFit, MIN_FIT_POINTS};
pub use manifest::{Artifact, ExperimentManifest, MANIFEST_FILE, MANIFEST_VERSION};
pub use validate::{
    prop21_relations, validate_params, AdmissibilityReport, Constraint, Derived, TheoremMode,
};
