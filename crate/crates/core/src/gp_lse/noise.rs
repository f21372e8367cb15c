use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::kernel::GridKernel;
use super::posterior::GpPosterior;

/// Noise description used by the bounded-noise thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_sq: f64,
    pub f_max: f64,
    pub delta_bd: f64,
    pub c1: f64,
}

impl NoiseModel {
    pub fn new(sigma_sq: f64, f_max: f64, delta_bd: f64) -> Self {
        Self {
            sigma_sq,
            f_max,
            delta_bd,
            c1: 1.0,
        }
    }

    /// Variance of the debiased power at true power `f`: `σ⁴ + 2σ² f`.
    pub fn power_variance(&self, f: f64) -> f64 {
        self.sigma_sq * self.sigma_sq + 2.0 * self.sigma_sq * f
    }
}

/// `|y|² - σ²`. Negative values are kept.
pub fn debias_power(y: f64, sigma_sq: f64) -> f64 {
    y * y - sigma_sq
}

/// `B_t = c₁ (σ² log(π²t²/(12δ)) + sqrt((σ⁴ + 2σ² f_max) log(π²t²/(12δ))))`.
pub fn bounded_noise_threshold(noise: &NoiseModel, t: usize) -> Result<f64> {
    if !(noise.delta_bd > 0.0 && noise.delta_bd < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_bd = {} not in (0, 1)",
            noise.delta_bd
        )));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("B_t needs t >= 1".into()));
    }
    let t = t as f64;
    let log_term = (PI * PI * t * t / (12.0 * noise.delta_bd)).ln();
    let var = noise.power_variance(noise.f_max).max(0.0);
    Ok(noise.c1 * (noise.sigma_sq * log_term + (var * log_term).sqrt()))
}

/// Greedy estimate of the maximum information gain
/// `γ_t = max_A ½ log det(I + σ_ε⁻² K_A)`.
///
/// The greedy step picks the index of largest posterior variance, whose log-det
/// increment is `½ log(1 + σ²_t(i)/σ_ε²)`. Repeated indices are allowed, so the
/// estimate is defined for any `t`.
#[derive(Debug, Clone)]
pub struct InfoGain {
    post: GpPosterior,
    gamma: Vec<f64>,
}

impl InfoGain {
    pub fn new(kernel: GridKernel, sigma_eps_sq: f64) -> Result<Self> {
        if !(sigma_eps_sq > 0.0) {
            return Err(Error::InvalidParameter(
                "information gain needs sigma_eps_sq > 0".into(),
            ));
        }
        Ok(Self {
            post: GpPosterior::new(kernel, sigma_eps_sq)?,
            gamma: vec![0.0],
        })
    }

    /// `γ̂_t`, extending the greedy sequence as needed. `γ̂_0 = 0`.
    pub fn gamma(&mut self, t: usize) -> Result<f64> {
        while self.gamma.len() <= t {
            let vars = self.post.variances();
            let mut best = 0;
            for (i, v) in vars.iter().enumerate() {
                if *v > vars[best] {
                    best = i;
                }
            }
            let inc = 0.5 * (1.0 + vars[best] / self.post.sigma_eps_sq()).ln();
            self.post.update(best, 0.0)?;
            let last = *self.gamma.last().expect("nonempty");
            self.gamma.push(last + inc);
        }
        Ok(self.gamma[t])
    }

    /// Greedily selected indices so far.
    pub fn selected(&self) -> Vec<usize> {
        self.post.probes().iter().map(|p| p.0).collect()
    }
}

pub fn info_gain_greedy(kernel: &GridKernel, sigma_eps_sq: f64, t: usize) -> Result<f64> {
    InfoGain::new(kernel.clone(), sigma_eps_sq)?.gamma(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaMode {
    Constant { beta: f64 },
    Theorem6 { b_f: f64, delta: f64 },
}

impl Default for BetaMode {
    fn default() -> Self {
        BetaMode::Constant { beta: 9.0 }
    }
}

/// Confidence multiplier sequence `t ↦ β_t`.
#[derive(Debug, Clone)]
pub enum BetaSchedule {
    Constant(f64),
    /// `β_t = 2 B_f² + 300 γ_{t-1} log³(t/δ)`
    Theorem6 {
        b_f: f64,
        delta: f64,
        gain: Box<InfoGain>,
    },
}

impl BetaSchedule {
    pub fn constant(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta}")));
        }
        Ok(BetaSchedule::Constant(beta))
    }

    pub fn theorem6(b_f: f64, delta: f64, kernel: GridKernel, sigma_eps_sq: f64) -> Result<Self> {
        if !(b_f > 0.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theorem6 schedule needs b_f > 0, delta in (0,1); got {b_f}, {delta}"
            )));
        }
        Ok(BetaSchedule::Theorem6 {
            b_f,
            delta,
            gain: Box::new(InfoGain::new(kernel, sigma_eps_sq)?),
        })
    }

    pub fn from_mode(mode: BetaMode, kernel: &GridKernel, sigma_eps_sq: f64) -> Result<Self> {
        match mode {
            BetaMode::Constant { beta } => Self::constant(beta),
            BetaMode::Theorem6 { b_f, delta } => {
                Self::theorem6(b_f, delta, kernel.clone(), sigma_eps_sq)
            }
        }
    }

    /// `β_t` for `t >= 1`.
    pub fn beta(&mut self, t: usize) -> Result<f64> {
        let t = t.max(1);
        match self {
            BetaSchedule::Constant(b) => Ok(*b),
            BetaSchedule::Theorem6 { b_f, delta, gain } => {
                let g = gain.gamma(t - 1)?;
                let l = (t as f64 / *delta).ln().max(0.0);
                Ok(2.0 * *b_f * *b_f + 300.0 * g * l.powi(3))
            }
        }
    }
}
