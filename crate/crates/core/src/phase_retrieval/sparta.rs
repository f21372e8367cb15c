use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamspace::Codebook;
use crate::error::{Error, Result};
use crate::linalg::{hard_threshold, inner, norm, norm_sqr, power_iteration, top_k_indices, CVec};

use super::sensing::{PseudoAmplitudes, SensingSet};

/// Which loss the gradient iterations descend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    /// truncated amplitude flow (SPARTA)
    #[default]
    Amplitude,
    /// intensity flow (SWF)
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpartaConfig {
    /// sparsity level; `None` keeps all `K` entries
    pub k: Option<usize>,
    pub mu: f64,
    pub trunc_gamma: f64,
    /// `None` uses `⌈M₂/6⌉`
    pub init_card: Option<usize>,
    pub max_iters: usize,
    pub tol: f64,
    pub power_iters: usize,
    pub power_tol: f64,
    /// halvings allowed per iteration before declaring a stall
    pub max_halvings: usize,
    /// restrict the initial eigenvector to the `k` coordinates whose masks
    /// best fit the amplitudes, scored by `(Σ_p ψ_p |g_pj|)² / Σ_p |g_pj|²`
    pub support_screening: bool,
}

impl Default for SpartaConfig {
    fn default() -> Self {
        Self {
            k: None,
            mu: 1.0,
            trunc_gamma: 0.7,
            init_card: None,
            max_iters: 400,
            tol: 1e-7,
            power_iters: 50,
            power_tol: 1e-8,
            max_halvings: 30,
            support_screening: true,
        }
    }
}

impl SpartaConfig {
    /// SWF defaults: intensity flow with `μ = 0.2`.
    pub fn swf() -> Self {
        Self {
            mu: 0.2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(self.trunc_gamma >= 0.0) || !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter(
                "mu must be positive, trunc_gamma and tol nonnegative".into(),
            ));
        }
        if self.k == Some(0) || self.init_card == Some(0) {
            return Err(Error::InvalidParameter(
                "k and init_card must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn sparsity(&self, dim: usize) -> usize {
        self.k.unwrap_or(dim).clamp(1, dim)
    }

    pub fn init_card_for(&self, m: usize) -> usize {
        self.init_card.unwrap_or(m.div_ceil(6)).clamp(1, m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub s_hat: CVec,
    pub h_hat: CVec,
    pub iters_used: usize,
    pub converged: bool,
    /// all pseudo-amplitudes were zero
    pub no_signal: bool,
    /// an iteration hit an empty truncation set
    pub empty_truncation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2TraceRow {
    pub iter: usize,
    pub loss: f64,
    pub trunc_size: usize,
    pub step: f64,
}

/// `g_p^H z` for every mask.
fn projections(set: &SensingSet, z: &[Complex64]) -> CVec {
    set.masks().iter().map(|g| inner(g, z)).collect()
}

/// `(1/M) Σ (ψ_p - |g_p^H z|)²`
pub fn amplitude_loss(set: &SensingSet, psi: &[f64], z: &[Complex64]) -> f64 {
    let a = projections(set, z);
    a.iter()
        .zip(psi)
        .map(|(a, p)| (p - a.norm()).powi(2))
        .sum::<f64>()
        / psi.len() as f64
}

/// `(1/M) Σ (|g_p^H z|² - ψ_p²)²`
pub fn intensity_loss(set: &SensingSet, psi: &[f64], z: &[Complex64]) -> f64 {
    let a = projections(set, z);
    a.iter()
        .zip(psi)
        .map(|(a, p)| (a.norm_sqr() - p * p).powi(2))
        .sum::<f64>()
        / psi.len() as f64
}

/// Principal eigenvector of `(1/|T|) Σ_{p∈T} g_p g_p^H` over the
/// `init_card` largest `ψ_p`, hard-thresholded to `k` entries and then scaled
/// to the norm estimate. With `support_screening` the eigenvector is computed
/// on the `k` strongest marginal coordinates only.
///
/// The masks have covariance `I/K`, so `E ψ² = ‖s‖²/K` and the norm estimate
/// is `sqrt(K · mean ψ²)`. Returns `None` when every `ψ_p` is zero.
pub fn spectral_init(set: &SensingSet, psi: &[f64], cfg: &SpartaConfig) -> Result<Option<CVec>> {
    if psi.len() != set.len() {
        return Err(Error::LengthMismatch {
            expected: set.len(),
            got: psi.len(),
        });
    }
    let dim = set.dim();
    let mean_sq = psi.iter().map(|p| p * p).sum::<f64>() / psi.len() as f64;
    if mean_sq <= 0.0 {
        return Ok(None);
    }
    let masks = set.masks();
    let k = cfg.sparsity(dim);
    let coords: Vec<usize> = if cfg.support_screening && k < dim {
        // per-coordinate amplitude fit: (Σ ψ_p |g_pj|)² / Σ |g_pj|²
        let mut corr = vec![0.0; dim];
        let mut energy = vec![0.0; dim];
        for (g, p) in masks.iter().zip(psi) {
            for ((c, e), x) in corr.iter_mut().zip(energy.iter_mut()).zip(g) {
                *c += p * x.norm();
                *e += x.norm_sqr();
            }
        }
        let score: Vec<f64> = corr
            .iter()
            .zip(&energy)
            .map(|(c, e)| if *e > 0.0 { c * c / e } else { 0.0 })
            .collect();
        let mut c = top_k_indices(&score, k);
        c.sort_unstable();
        c
    } else {
        (0..dim).collect()
    };
    let chosen = top_k_indices(psi, cfg.init_card_for(psi.len()));
    let scale = 1.0 / chosen.len() as f64;
    let sub = |p: usize| -> CVec { coords.iter().map(|&j| masks[p][j]).collect() };
    let sub_masks: Vec<CVec> = chosen.iter().map(|&p| sub(p)).collect();
    let apply = |v: &[Complex64]| {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for g in &sub_masks {
            let c = inner(g, v) * scale;
            for (o, gi) in out.iter_mut().zip(g) {
                *o += gi * c;
            }
        }
        out
    };
    let diag: Vec<f64> = (0..coords.len())
        .map(|j| sub_masks.iter().map(|g| g[j].norm_sqr()).sum())
        .collect();
    let mut e = vec![Complex64::new(0.0, 0.0); coords.len()];
    e[top_k_indices(&diag, 1)[0]] = Complex64::new(1.0, 0.0);
    let start = apply(&e);
    let v = power_iteration(apply, start, cfg.power_iters, cfg.power_tol);
    let mut z = vec![Complex64::new(0.0, 0.0); dim];
    for (&j, x) in coords.iter().zip(&v) {
        z[j] = *x;
    }
    hard_threshold(&mut z, k);
    let target = (dim as f64 * mean_sq).sqrt() / norm(&z);
    z.iter_mut().for_each(|x| *x *= target);
    Ok(Some(z))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterOutcome {
    pub z: CVec,
    pub trunc_size: usize,
}

/// One truncated amplitude-flow step with step size `μ·K`, then `H_k`.
///
/// Keeps `p` with `|g_p^H z| >= ψ_p/(1+γ)`; terms with `g_p^H z = 0` are
/// dropped. An empty truncation set returns `z` unchanged with size 0.
pub fn sparta_iterate(
    z: &[Complex64],
    set: &SensingSet,
    psi: &[f64],
    cfg: &SpartaConfig,
) -> IterOutcome {
    sparta_step(z, set, psi, cfg, cfg.mu)
}

fn sparta_step(
    z: &[Complex64],
    set: &SensingSet,
    psi: &[f64],
    cfg: &SpartaConfig,
    mu: f64,
) -> IterOutcome {
    let dim = set.dim();
    let mut grad = vec![Complex64::new(0.0, 0.0); dim];
    let mut count = 0usize;
    for (g, &p) in set.masks().iter().zip(psi) {
        let a = inner(g, z);
        let mag = a.norm();
        if mag == 0.0 || mag < p / (1.0 + cfg.trunc_gamma) {
            continue;
        }
        count += 1;
        let c = a * ((mag - p) / mag);
        for (gr, gi) in grad.iter_mut().zip(g) {
            *gr += gi * c;
        }
    }
    if count == 0 {
        return IterOutcome {
            z: z.to_vec(),
            trunc_size: 0,
        };
    }
    let step = mu * dim as f64 / count as f64;
    let mut out: CVec = z.iter().zip(&grad).map(|(a, b)| a - b * step).collect();
    hard_threshold(&mut out, cfg.sparsity(dim));
    IterOutcome {
        z: out,
        trunc_size: count,
    }
}

/// One intensity-flow step `z - (μ K²/‖z₀‖²)(1/M) Σ (|g^H z|² - ψ²) g g^H z`, then `H_k`.
pub fn swf_iterate(
    z: &[Complex64],
    set: &SensingSet,
    psi: &[f64],
    cfg: &SpartaConfig,
    z0_norm_sq: f64,
) -> IterOutcome {
    swf_step(z, set, psi, cfg, cfg.mu, z0_norm_sq)
}

fn swf_step(
    z: &[Complex64],
    set: &SensingSet,
    psi: &[f64],
    cfg: &SpartaConfig,
    mu: f64,
    z0_norm_sq: f64,
) -> IterOutcome {
    let dim = set.dim();
    let mut grad = vec![Complex64::new(0.0, 0.0); dim];
    for (g, &p) in set.masks().iter().zip(psi) {
        let a = inner(g, z);
        let c = a * (a.norm_sqr() - p * p);
        for (gr, gi) in grad.iter_mut().zip(g) {
            *gr += gi * c;
        }
    }
    let k = dim as f64;
    let step = if z0_norm_sq > 0.0 {
        mu * k * k / (z0_norm_sq * psi.len() as f64)
    } else {
        0.0
    };
    let mut out: CVec = z.iter().zip(&grad).map(|(a, b)| a - b * step).collect();
    hard_threshold(&mut out, cfg.sparsity(dim));
    IterOutcome {
        z: out,
        trunc_size: psi.len(),
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub estimate: Estimate,
    pub trace: Vec<Stage2TraceRow>,
}

/// Spectral initialization followed by gradient iterations with
/// step halving whenever the loss would increase.
pub fn solve(
    cb: &Codebook,
    set: &SensingSet,
    pa: &PseudoAmplitudes,
    cfg: &SpartaConfig,
) -> Result<SolveOutput> {
    solve_flow(cb, set, pa, cfg, Flow::Amplitude)
}

pub fn solve_flow(
    cb: &Codebook,
    set: &SensingSet,
    pa: &PseudoAmplitudes,
    cfg: &SpartaConfig,
    flow: Flow,
) -> Result<SolveOutput> {
    cfg.validate()?;
    let psi = &pa.psi;
    let dim = set.dim();
    let finish =
        |s_hat: CVec, iters_used, converged, no_signal, empty_truncation| -> Result<Estimate> {
            let h_hat = cb.synthesize(set.support(), &s_hat)?;
            Ok(Estimate {
                s_hat,
                h_hat,
                iters_used,
                converged,
                no_signal,
                empty_truncation,
            })
        };
    let Some(mut z) = spectral_init(set, psi, cfg)? else {
        let estimate = finish(vec![Complex64::new(0.0, 0.0); dim], 0, true, true, false)?;
        return Ok(SolveOutput {
            estimate,
            trace: Vec::new(),
        });
    };
    let z0_norm_sq = norm_sqr(&z);
    let loss = |z: &[Complex64]| match flow {
        Flow::Amplitude => amplitude_loss(set, psi, z),
        Flow::Intensity => intensity_loss(set, psi, z),
    };
    let mut cur_loss = loss(&z);
    let mut mu = cfg.mu;
    let mut trace = vec![Stage2TraceRow {
        iter: 0,
        loss: cur_loss,
        trunc_size: 0,
        step: mu,
    }];
    let mut converged = false;
    let mut empty_truncation = false;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let out = match flow {
                Flow::Amplitude => sparta_step(&z, set, psi, cfg, mu),
                Flow::Intensity => swf_step(&z, set, psi, cfg, mu, z0_norm_sq),
            };
            if out.trunc_size == 0 {
                empty_truncation = true;
                break;
            }
            let l = loss(&out.z);
            if l <= cur_loss {
                accepted = Some((out, l));
                break;
            }
            mu *= 0.5;
        }
        let Some((out, l)) = accepted else { break };
        let change = out
            .z
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let rel = change / norm(&z).max(f64::MIN_POSITIVE);
        trace.push(Stage2TraceRow {
            iter: iters,
            loss: l,
            trunc_size: out.trunc_size,
            step: mu,
        });
        z = out.z;
        cur_loss = l;
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }
    let estimate = finish(z, iters, converged, false, empty_truncation)?;
    Ok(SolveOutput { estimate, trace })
}

pub fn write_stage2_trace<W: Write>(rows: &[Stage2TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
