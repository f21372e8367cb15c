//! Monte-Carlo harness: configuration, per-trial runner, sweeps and
//! persistence of aggregated results.

pub mod config;
pub mod metrics;
pub mod sweep;
pub mod trial;

pub use config::{Ablation, Budgets, PriorConfig, SimConfig, SparsityRule, SweepAxis, SweepConfig};
pub use metrics::{correlation, mean_stderr, snr_to_noise_power};
pub use sweep::{
    persist, persist_traces, read_report_csv, run_ablation, run_sweep, write_plot_data,
    write_report_csv, write_trials_csv, PersistOptions, PointSummary, SweepReport,
};
pub use trial::{
    method_label, run_method, run_trial, run_trial_detailed, trial_channel, MethodOutput,
    TrialDetail, TrialResult, TrialTraces,
};
