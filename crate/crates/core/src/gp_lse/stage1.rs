use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::beamspace::BeamIndex;
use crate::channel::{ArrayConfig, ScenarioPrior};
use crate::error::{Error, Result};

use super::kernel::{lengthscales_from_prior, GridKernel, KernelParams};
use super::lse::{finalize_support, lse_step, Class, LseState, StepOutcome, SupportSelection};
use super::noise::{bounded_noise_threshold, debias_power, BetaMode, BetaSchedule, NoiseModel};
use super::posterior::GpPosterior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Cross,
    LaplaceProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub alpha: f64,
    pub kappa_u: f64,
    pub kappa_v: f64,
    /// Lower bound on each lengthscale, in DFT grid spacings.
    pub min_lengthscale_cells: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: KernelKind::Cross,
            alpha: 0.5,
            kappa_u: 1.0,
            kappa_v: 1.0,
            min_lengthscale_cells: 1.0,
        }
    }
}

impl KernelConfig {
    pub fn params(&self, cfg: &ArrayConfig, prior: &ScenarioPrior) -> Result<KernelParams> {
        let (lu, lv) = lengthscales_from_prior(cfg, prior, self.kappa_u, self.kappa_v)?;
        let floor_u = self.min_lengthscale_cells * 2.0 / cfg.n_y as f64;
        let floor_v = self.min_lengthscale_cells * 2.0 / cfg.n_z as f64;
        let alpha = match self.kind {
            KernelKind::Cross => self.alpha,
            KernelKind::LaplaceProduct => 0.0,
        };
        KernelParams::new(alpha, lu.max(floor_u), lv.max(floor_v))
    }
}

/// How the GP regularization `σ_ε²` is chosen after warm-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRegularization {
    /// `σ⁴ + 2σ² f̂_max`, the debiased-power variance at the strongest warm-up probe
    #[default]
    Variance,
    /// `max(B_{T₁}², σ⁴ + 2σ² f̂_max)`
    BoundedNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage1Config {
    pub warmup_frac: f64,
    pub tau_quantile: f64,
    /// `τ >= tau_noise_floor · σ²`
    pub tau_noise_floor: f64,
    pub epsilon_frac: f64,
    pub beta: BetaMode,
    pub kernel: KernelConfig,
    pub noise_reg: NoiseRegularization,
    pub delta_bd: f64,
    pub c1: f64,
    /// Largest Top-K size when the run ends with undecided indices; `None` uses `8 L`.
    pub k_cap: Option<usize>,
    /// Smallest Top-K size; `None` uses `L`.
    pub k_min: Option<usize>,
    /// The Top-K size is the number of candidates whose posterior mean power
    /// is at least `patch_power_floor · σ²`, clamped to `[k_min, k_cap]`.
    /// Zero always uses `k_cap`.
    pub patch_power_floor: f64,
    /// subtract `σ²` from each squared amplitude before it enters the GP
    pub debias: bool,
}

impl Default for Stage1Config {
    fn default() -> Self {
        Self {
            warmup_frac: 0.1,
            tau_quantile: 0.9,
            tau_noise_floor: 3.0,
            epsilon_frac: 0.1,
            beta: BetaMode::default(),
            kernel: KernelConfig::default(),
            noise_reg: NoiseRegularization::Variance,
            delta_bd: 0.05,
            c1: 1.0,
            k_cap: None,
            k_min: None,
            patch_power_floor: 4.0,
            debias: true,
        }
    }
}

impl Stage1Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.warmup_frac > 0.0 && self.warmup_frac <= 1.0) {
            return bad("warmup_frac must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.tau_quantile) {
            return bad("tau_quantile must be in [0, 1]");
        }
        if !(self.epsilon_frac >= 0.0) || !(self.tau_noise_floor >= 0.0) {
            return bad("epsilon_frac and tau_noise_floor must be nonnegative");
        }
        if !(self.delta_bd > 0.0 && self.delta_bd < 1.0) || !(self.c1 > 0.0) {
            return bad("delta_bd must be in (0, 1) and c1 positive");
        }
        if self.k_cap == Some(0) || self.k_min == Some(0) {
            return bad("k_cap and k_min must be at least 1");
        }
        if !(self.patch_power_floor >= 0.0) {
            return bad("patch_power_floor must be nonnegative");
        }
        Ok(())
    }

    pub fn k_cap_for(&self, prior: &ScenarioPrior, grid_len: usize) -> usize {
        self.k_cap.unwrap_or(8 * prior.num_paths).clamp(1, grid_len)
    }

    pub fn k_min_for(&self, prior: &ScenarioPrior, grid_len: usize) -> usize {
        self.k_min
            .unwrap_or(prior.num_paths)
            .clamp(1, self.k_cap_for(prior, grid_len))
    }

    /// Top-K size given the raw posterior mean powers of the candidates.
    pub fn patch_size(
        &self,
        prior: &ScenarioPrior,
        grid_len: usize,
        candidate_means: &[f64],
        sigma_sq: f64,
    ) -> usize {
        let cap = self.k_cap_for(prior, grid_len);
        if self.patch_power_floor == 0.0 {
            return cap;
        }
        let level = self.patch_power_floor * sigma_sq;
        let strong = candidate_means.iter().filter(|m| **m >= level).count();
        strong.clamp(self.k_min_for(prior, grid_len), cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Warmup,
    Lse,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage1TraceRow {
    pub step: usize,
    pub phase: Phase,
    pub n: usize,
    pub m: usize,
    pub z_tilde: f64,
    pub high: usize,
    pub low: usize,
    pub undecided: usize,
    pub max_ambiguity: f64,
}

#[derive(Debug, Clone)]
pub struct Stage1Result {
    pub support: Vec<BeamIndex>,
    pub selection: SupportSelection,
    pub probes_used: usize,
    pub lse_steps: usize,
    pub tau: f64,
    pub epsilon: f64,
    /// power scale the GP works in (`z̃ / scale`)
    pub scale: f64,
    pub sigma_eps_sq: f64,
    pub high: usize,
    pub low: usize,
    pub undecided: usize,
    pub trace: Vec<Stage1TraceRow>,
    pub posterior_means: Vec<f64>,
}

/// Warm-up positions on a coarse sub-grid with roughly the array aspect ratio.
pub fn warmup_grid(n_y: usize, n_z: usize, count: usize) -> Vec<BeamIndex> {
    if count == 0 {
        return Vec::new();
    }
    let gy =
        ((count as f64 * n_y as f64 / n_z as f64).sqrt().round() as usize).clamp(1, n_y.min(count));
    let gz = (count / gy).clamp(1, n_z);
    let mut out = Vec::with_capacity(gy * gz);
    for a in 0..gy {
        let n = ((a as f64 + 0.5) * n_y as f64 / gy as f64) as usize;
        for b in 0..gz {
            let m = ((b as f64 + 0.5) * n_z as f64 / gz as f64) as usize;
            out.push(BeamIndex::new(n.min(n_y - 1), m.min(n_z - 1)));
        }
    }
    out
}

/// Nearest-rank quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Stage I: warm-up, then GP-LSE over DFT beams until `U` empties or the
/// probe budget runs out, then support selection.
///
/// `probe` returns the amplitude fed back for one DFT codeword.
pub fn run_stage1<F>(
    cfg: &ArrayConfig,
    prior: &ScenarioPrior,
    s1: &Stage1Config,
    budget: usize,
    sigma_sq: f64,
    mut probe: F,
) -> Result<Stage1Result>
where
    F: FnMut(BeamIndex) -> f64,
{
    s1.validate()?;
    if budget == 0 {
        return Err(Error::InvalidParameter(
            "stage I budget must be at least 1".into(),
        ));
    }
    let n = cfg.num_elements();
    let nz = cfg.n_z;
    let kernel = GridKernel::new(s1.kernel.params(cfg, prior)?, cfg.n_y, nz)?;

    let noise_power = if s1.debias { sigma_sq } else { 0.0 };
    let observe = |y: f64| debias_power(y, noise_power);
    let warm_count = ((s1.warmup_frac * budget as f64).ceil() as usize).min(budget);
    let warm = warmup_grid(cfg.n_y, nz, warm_count);
    let mut trace = Vec::with_capacity(budget);
    let mut warm_obs = Vec::with_capacity(warm.len());
    for (step, idx) in warm.iter().enumerate() {
        let z = observe(probe(*idx));
        warm_obs.push((idx.linear(nz), z));
        trace.push(Stage1TraceRow {
            step,
            phase: Phase::Warmup,
            n: idx.n,
            m: idx.m,
            z_tilde: z,
            high: 0,
            low: 0,
            undecided: n,
            max_ambiguity: f64::NAN,
        });
    }
    let powers: Vec<f64> = warm_obs.iter().map(|p| p.1).collect();
    let f_hat = powers.iter().copied().fold(sigma_sq, f64::max);
    let tau_raw = quantile(&powers, s1.tau_quantile).max(s1.tau_noise_floor * sigma_sq);
    let scale = if f_hat > 0.0 { f_hat } else { 1.0 };
    let tau = tau_raw / scale;
    let epsilon = s1.epsilon_frac * tau;

    let noise = NoiseModel {
        sigma_sq,
        f_max: f_hat,
        delta_bd: s1.delta_bd,
        c1: s1.c1,
    };
    let var = noise.power_variance(f_hat);
    let reg = match s1.noise_reg {
        NoiseRegularization::Variance => var,
        NoiseRegularization::BoundedNoise => {
            bounded_noise_threshold(&noise, budget)?.powi(2).max(var)
        }
    };
    let sigma_eps_sq = (reg / (scale * scale)).max(1e-8);

    let mut post = GpPosterior::new(kernel.clone(), sigma_eps_sq)?;
    for &(i, z) in &warm_obs {
        post.update(i, z / scale)?;
    }
    let mut beta = BetaSchedule::from_mode(s1.beta, &kernel, sigma_eps_sq)?;
    let mut state = LseState::new(n, tau, epsilon)?;
    let mut used = warm.len();
    let mut lse_steps = 0;
    loop {
        let b = beta.beta(post.num_probes() + 1)?;
        let outcome = lse_step(&mut state, &post, b);
        lse_steps += 1;
        let StepOutcome::Probe(i) = outcome else {
            break;
        };
        if used >= budget {
            break;
        }
        let idx = BeamIndex::from_linear(i, nz);
        let z = observe(probe(idx));
        used += 1;
        post.update(i, z / scale)?;
        trace.push(Stage1TraceRow {
            step: used - 1,
            phase: Phase::Lse,
            n: idx.n,
            m: idx.m,
            z_tilde: z,
            high: state.count(Class::High),
            low: state.count(Class::Low),
            undecided: state.count(Class::Undecided),
            max_ambiguity: *state.max_ambiguity.last().unwrap_or(&f64::NAN) * scale,
        });
    }

    let means = post.means();
    let candidates: Vec<f64> = (0..n)
        .filter(|&i| state.class()[i] != Class::Low)
        .map(|i| means[i] * scale)
        .collect();
    let k = s1.patch_size(prior, n, &candidates, sigma_sq);
    let selection = finalize_support(&state, &post, k);
    Ok(Stage1Result {
        support: selection
            .indices
            .iter()
            .map(|&i| BeamIndex::from_linear(i, nz))
            .collect(),
        probes_used: used,
        lse_steps,
        tau: tau_raw,
        epsilon: epsilon * scale,
        scale,
        sigma_eps_sq,
        high: state.count(Class::High),
        low: state.count(Class::Low),
        undecided: state.count(Class::Undecided),
        posterior_means: means.iter().map(|m| m * scale).collect(),
        selection,
        trace,
    })
}

pub fn write_stage1_trace<W: Write>(rows: &[Stage1TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
