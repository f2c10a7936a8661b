//! Free channel wave operators, the weakly localized part, the propagation
//! ledger and the decay probes.

mod ledger;
mod probes;
mod series;
mod wave;
mod weak;

pub use ledger::{
    ledger_terms, ledger_terms_at, propagation_ledger, LedgerAccumulator, LedgerKind,
    LedgerObserver, LedgerRecord, LedgerSummary, LedgerTerms,
};
pub use probes::{
    commutator_norm_series, commutator_operator, envelope_constant, exponent_shift,
    interaction_decay_probe, interaction_decay_value, kernel_decay_probe, log_spaced_times,
    near_delta, refined_grid, velocity_bound_probe, velocity_operator, weak_vanishing_probe,
    TestBank, VelocityBound, VelocityParams,
};
pub use series::{DiagnosticSeries, Verdict};
pub use wave::{
    asymptotic_free_profile, free_channel_state, free_channel_state_spatial_only, profile_defect,
    scattered_remainder, wave_operator_recovery, wave_operator_residuals, FreeProfile,
    WaveOperator,
};
pub use weak::{
    directional_leakage_probe, leakage_decay_ratio, weak_decomposition, weak_localization_series,
    weakly_localized_part, Leakage, WeakDecomposition, WeakLocalizationSeries,
};
