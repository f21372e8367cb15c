//! Stage II: Gaussian-masked sensing on the discovered support, Rician
//! denoising of the amplitude feedback, and sparse phase retrieval.

pub mod sensing;
pub mod sparta;

pub use sensing::{
    identity_denoise, observe, observe_lowdim, pseudo_amplitude_bound_check, rician_denoise,
    PseudoAmplitudes, SensingSet,
};
pub use sparta::{
    amplitude_loss, intensity_loss, solve, solve_flow, sparta_iterate, spectral_init, swf_iterate,
    write_stage2_trace, Estimate, Flow, IterOutcome, SolveOutput, SpartaConfig, Stage2TraceRow,
};
