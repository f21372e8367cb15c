use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baselines::{exhaustive_dft_beamspace, full_beamspace_pr, pseudo_amplitudes, Method};
use crate::beamspace::Codebook;
use crate::channel::{generate_channel, sample_scenario_with_user_range, Channel, ScenarioPrior};
use crate::error::{Error, Result};
use crate::gp_lse::{run_stage1, KernelKind, Stage1Result, Stage1TraceRow};
use crate::linalg::{complex_normal, CVec};
use crate::phase_retrieval::{
    observe_lowdim, solve, Flow, SensingSet, SpartaConfig, Stage2TraceRow,
};
use crate::rng::{name_key, purpose, stream};

use super::config::SimConfig;
use super::metrics::{correlation, snr_to_noise_power};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// method name, with ablation suffixes for the proposed method
    pub method: String,
    pub axis_value: f64,
    pub trial: usize,
    pub rho: f64,
    /// the estimate was the zero vector; `rho` is recorded as 0
    pub degenerate: bool,
    /// error message when the trial failed; `rho` is recorded as 0
    pub error: Option<String>,
    pub probes_used: usize,
    pub support_size: usize,
    pub stage1_steps: usize,
    pub stage2_iters: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrialTraces {
    pub stage1: Vec<Stage1TraceRow>,
    pub stage2: Vec<Stage2TraceRow>,
}

/// Everything one trial produced, for inspection beyond the summary row.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub result: TrialResult,
    pub channel: Channel,
    pub h_hat: Vec<Complex64>,
    pub sigma_sq: f64,
    pub stage1: Option<Stage1Result>,
    pub traces: TrialTraces,
}

/// Result label for `method` under the config's ablation switches.
pub fn method_label(cfg: &SimConfig, method: Method) -> String {
    if method != Method::LseRSparta {
        return method.name().to_string();
    }
    let mut s = if cfg.ablation.disable_rician {
        "lse_sparta".to_string()
    } else {
        method.name().to_string()
    };
    if cfg.stage1().kernel.kind == KernelKind::LaplaceProduct {
        s.push_str("_laplace");
    }
    s
}

/// The channel for `(axis_value, trial)`. It depends only on the scenario
/// parameters at that point, so every method and every SNR sees the same draw.
pub fn trial_channel(cfg: &SimConfig, axis_value: f64, trial: usize) -> Result<Channel> {
    let (prior, pin) = cfg.prior_at(axis_value)?;
    let mut rng = stream(&[
        cfg.global_seed,
        purpose::SCENARIO,
        trial as u64,
        prior.num_paths as u64,
        pin.map_or(0, f64::to_bits),
    ]);
    let paths = sample_scenario_with_user_range(&prior, pin, &mut rng)?;
    generate_channel(&cfg.array, &paths)
}

/// Runs one trial; failures are recorded in the result instead of returned.
pub fn run_trial(cfg: &SimConfig, method: Method, axis_value: f64, trial: usize) -> TrialResult {
    let start = Instant::now();
    match run_trial_detailed(cfg, method, axis_value, trial) {
        Ok(d) => d.result,
        Err(e) => TrialResult {
            method: method_label(cfg, method),
            axis_value,
            trial,
            rho: 0.0,
            degenerate: false,
            error: Some(e.to_string()),
            probes_used: 0,
            support_size: 0,
            stage1_steps: 0,
            stage2_iters: 0,
            wall_time: start.elapsed().as_secs_f64(),
        },
    }
}

pub fn run_trial_detailed(
    cfg: &SimConfig,
    method: Method,
    axis_value: f64,
    trial: usize,
) -> Result<TrialDetail> {
    let start = Instant::now();
    let (prior, _) = cfg.prior_at(axis_value)?;
    let channel = trial_channel(cfg, axis_value, trial)?;
    let sigma_sq = snr_to_noise_power(&channel.h, cfg.snr_at(axis_value))?;
    let keys = [cfg.global_seed, trial as u64, axis_value.to_bits()];
    let out = run_method(cfg, method, &prior, &channel.h, sigma_sq, &keys)?;
    let (rho, degenerate) = match correlation(&channel.h, &out.h_hat) {
        Ok(r) => (r, false),
        Err(Error::ZeroChannel) => (0.0, true),
        Err(e) => return Err(e),
    };
    let result = TrialResult {
        method: method_label(cfg, method),
        axis_value,
        trial,
        rho,
        degenerate,
        error: None,
        probes_used: out.probes_used,
        support_size: out.support_size,
        stage1_steps: out.stage1.as_ref().map_or(0, |s| s.lse_steps),
        stage2_iters: out.stage2_iters,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(TrialDetail {
        result,
        channel,
        h_hat: out.h_hat,
        sigma_sq,
        stage1: out.stage1,
        traces: out.traces,
    })
}

#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub h_hat: CVec,
    pub probes_used: usize,
    pub support_size: usize,
    pub stage2_iters: usize,
    pub stage1: Option<Stage1Result>,
    pub traces: TrialTraces,
}

/// Runs `method` on a given channel. Random streams are derived from
/// `keys`, a purpose tag and the method label.
pub fn run_method(
    cfg: &SimConfig,
    method: Method,
    prior: &ScenarioPrior,
    h: &[Complex64],
    sigma_sq: f64,
    keys: &[u64],
) -> Result<MethodOutput> {
    let cb = Codebook::new(&cfg.array)?;
    let s = cb.to_beamspace(h)?;
    let n = cb.len();
    let nz = cfg.array.n_z;
    let (t1, m2) = cfg.budgets.resolve(n);
    let label_key = name_key(&method_label(cfg, method));
    let key = |p: u64| {
        let mut k = keys.to_vec();
        k.extend([p, label_key]);
        stream(&k)
    };
    match method {
        Method::LseRSparta => {
            let mut noise1 = key(purpose::STAGE1_NOISE);
            let st1 = run_stage1(&cfg.array, prior, &cfg.stage1(), t1, sigma_sq, |idx| {
                // h^H f_i = conj(s_i)
                (s[idx.linear(nz)].conj() + complex_normal(&mut noise1, sigma_sq)).norm()
            })?;
            let m2_eff = if cfg.budgets.rollover {
                m2 + (t1 - st1.probes_used)
            } else {
                m2
            };
            let set = SensingSet::build(&st1.support, m2_eff, &mut key(purpose::STAGE2_MASKS))?;
            let y = observe_lowdim(
                &set.restrict(&s, nz),
                &set,
                sigma_sq,
                &mut key(purpose::STAGE2_NOISE),
            )?;
            let pa = pseudo_amplitudes(&y, sigma_sq, !cfg.ablation.disable_rician)?;
            let k = cfg.stage2_sparsity.resolve(&cfg.array, prior, set.dim())?;
            let out = solve(
                &cb,
                &set,
                &pa,
                &SpartaConfig {
                    k: Some(k),
                    ..cfg.sparta
                },
            )?;
            let traces = TrialTraces {
                stage1: st1.trace.clone(),
                stage2: out.trace,
            };
            Ok(MethodOutput {
                h_hat: out.estimate.h_hat,
                probes_used: st1.probes_used + set.len(),
                support_size: set.dim(),
                stage2_iters: out.estimate.iters_used,
                stage1: Some(st1),
                traces,
            })
        }
        Method::ExhaustiveDft => {
            let r = exhaustive_dft_beamspace(&s, &cb, sigma_sq, &mut key(purpose::BASELINE_NOISE))?;
            Ok(MethodOutput {
                h_hat: r.h_hat,
                probes_used: r.probes_used,
                support_size: 1,
                stage2_iters: 0,
                stage1: None,
                traces: TrialTraces::default(),
            })
        }
        Method::RSparta | Method::RSwf => {
            let (flow, base) = match method {
                Method::RSparta => (Flow::Amplitude, cfg.baseline_sparta),
                _ => (Flow::Intensity, cfg.baseline_swf),
            };
            let k = cfg.baseline_sparsity.resolve(&cfg.array, prior, n)?;
            let sc = SpartaConfig { k: Some(k), ..base };
            let r = full_beamspace_pr(
                &s,
                &cb,
                sigma_sq,
                t1 + m2,
                &sc,
                flow,
                true,
                &mut key(purpose::STAGE2_MASKS),
                &mut key(purpose::STAGE2_NOISE),
            )?;
            let iters = r.estimate.as_ref().map_or(0, |e| e.iters_used);
            Ok(MethodOutput {
                h_hat: r.h_hat,
                probes_used: r.probes_used,
                support_size: n,
                stage2_iters: iters,
                stage1: None,
                traces: TrialTraces::default(),
            })
        }
    }
}
