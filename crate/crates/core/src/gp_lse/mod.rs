//! Stage I support discovery: a Gaussian-process level-set bandit over the
//! 2D DFT grid, driven by debiased amplitude feedback.

pub mod kernel;
pub mod lse;
pub mod noise;
pub mod posterior;
pub mod stage1;

pub use kernel::{kernel_eval, lengthscales_from_prior, GridKernel, KernelParams};
pub use lse::{finalize_support, lse_step, Class, LseState, StepOutcome, SupportSelection};
pub use noise::{
    bounded_noise_threshold, debias_power, info_gain_greedy, BetaMode, BetaSchedule, InfoGain,
    NoiseModel,
};
pub use posterior::GpPosterior;
pub use stage1::{
    run_stage1, write_stage1_trace, KernelConfig, KernelKind, NoiseRegularization, Stage1Config,
    Stage1Result, Stage1TraceRow,
};
