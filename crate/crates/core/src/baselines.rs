//! Comparison methods: exhaustive DFT sweep and full-beamspace phase retrieval.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamspace::{BeamIndex, Codebook};
use crate::error::{Error, Result};
use crate::linalg::{complex_normal, CVec};
use crate::phase_retrieval::{
    identity_denoise, observe_lowdim, rician_denoise, solve_flow, Estimate, Flow, PseudoAmplitudes,
    SensingSet, SpartaConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LseRSparta,
    ExhaustiveDft,
    RSparta,
    RSwf,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::LseRSparta,
        Method::ExhaustiveDft,
        Method::RSparta,
        Method::RSwf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::LseRSparta => "lse_r_sparta",
            Method::ExhaustiveDft => "exhaustive_dft",
            Method::RSparta => "r_sparta",
            Method::RSwf => "r_swf",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub method: Method,
    pub h_hat: CVec,
    pub probes_used: usize,
    pub best_index: Option<BeamIndex>,
    pub estimate: Option<Estimate>,
}

/// Probes every DFT beam once and returns the strongest codeword.
/// Ties go to the lowest linear index.
pub fn exhaustive_dft<R: Rng + ?Sized>(
    h: &[Complex64],
    cb: &Codebook,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<BaselineResult> {
    let s = cb.to_beamspace(h)?;
    exhaustive_dft_beamspace(&s, cb, sigma_sq, rng)
}

/// Same as [`exhaustive_dft`] with `s = F h` precomputed.
pub fn exhaustive_dft_beamspace<R: Rng + ?Sized>(
    s: &[Complex64],
    cb: &Codebook,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<BaselineResult> {
    if s.len() != cb.len() {
        return Err(Error::LengthMismatch {
            expected: cb.len(),
            got: s.len(),
        });
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, si) in s.iter().enumerate() {
        // h^H f_i = conj(s_i)
        let y = (si.conj() + complex_normal(rng, sigma_sq)).norm();
        if y > best.1 {
            best = (i, y);
        }
    }
    let idx = cb.index(best.0);
    Ok(BaselineResult {
        method: Method::ExhaustiveDft,
        h_hat: cb.codeword(idx)?,
        probes_used: s.len(),
        best_index: Some(idx),
        estimate: None,
    })
}

pub fn pseudo_amplitudes(y: &[f64], sigma_sq: f64, rician: bool) -> Result<PseudoAmplitudes> {
    if rician {
        rician_denoise(y, sigma_sq)
    } else {
        Ok(identity_denoise(y, sigma_sq))
    }
}

/// Masked sensing over the whole grid (`K = N`) with `budget` measurements,
/// then sparse phase retrieval with the given flow.
#[allow(clippy::too_many_arguments)]
pub fn full_beamspace_pr<R: Rng + ?Sized, Q: Rng + ?Sized>(
    s: &[Complex64],
    cb: &Codebook,
    sigma_sq: f64,
    budget: usize,
    cfg: &SpartaConfig,
    flow: Flow,
    rician: bool,
    mask_rng: &mut R,
    noise_rng: &mut Q,
) -> Result<BaselineResult> {
    if s.len() != cb.len() {
        return Err(Error::LengthMismatch {
            expected: cb.len(),
            got: s.len(),
        });
    }
    let support: Vec<BeamIndex> = (0..cb.len()).map(|l| cb.index(l)).collect();
    let set = SensingSet::build(&support, budget, mask_rng)?;
    let y = observe_lowdim(s, &set, sigma_sq, noise_rng)?;
    let pa = pseudo_amplitudes(&y, sigma_sq, rician)?;
    let out = solve_flow(cb, &set, &pa, cfg, flow)?;
    Ok(BaselineResult {
        method: match flow {
            Flow::Amplitude => Method::RSparta,
            Flow::Intensity => Method::RSwf,
        },
        h_hat: out.estimate.h_hat.clone(),
        probes_used: y.len(),
        best_index: None,
        estimate: Some(out.estimate),
    })
}

pub fn r_sparta_full<R: Rng + ?Sized, Q: Rng + ?Sized>(
    h: &[Complex64],
    cb: &Codebook,
    sigma_sq: f64,
    budget: usize,
    cfg: &SpartaConfig,
    mask_rng: &mut R,
    noise_rng: &mut Q,
) -> Result<BaselineResult> {
    let s = cb.to_beamspace(h)?;
    full_beamspace_pr(
        &s,
        cb,
        sigma_sq,
        budget,
        cfg,
        Flow::Amplitude,
        true,
        mask_rng,
        noise_rng,
    )
}

pub fn r_swf_full<R: Rng + ?Sized, Q: Rng + ?Sized>(
    h: &[Complex64],
    cb: &Codebook,
    sigma_sq: f64,
    budget: usize,
    cfg: &SpartaConfig,
    mask_rng: &mut R,
    noise_rng: &mut Q,
) -> Result<BaselineResult> {
    let s = cb.to_beamspace(h)?;
    full_beamspace_pr(
        &s,
        cb,
        sigma_sq,
        budget,
        cfg,
        Flow::Intensity,
        true,
        mask_rng,
        noise_rng,
    )
}
