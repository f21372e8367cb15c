//! Invariant suites run by the `validate` subcommand.
//!
//! Each suite draws its inputs from keyed streams, compares the library
//! against an independent computation and returns a [`CheckOutcome`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::beamspace::{
    expected_sparsity, measure_lobe_width, sparsity_monte_carlo, Axis, BeamIndex, Codebook,
    DEFAULT_LOBE_RESOLUTION,
};
use crate::channel::{ArrayConfig, ScenarioPrior, SphericalPoint};
use crate::error::Result;
use crate::gp_lse::{
    bounded_noise_threshold, debias_power, lse_step, Class, GpPosterior, GridKernel, KernelParams,
    LseState, NoiseModel, StepOutcome,
};
use crate::harness::correlation;
use crate::linalg::{complex_normal, complex_normal_vec, norm_sqr, phase_aligned_distance, CVec};
use crate::phase_retrieval::{
    observe_lowdim, pseudo_amplitude_bound_check, rician_denoise, solve, SensingSet, SpartaConfig,
};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn z0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `F Fᴴ = I` from the dense codebook and `F⁻¹ F h = h` through the fast transforms.
pub fn dft_unitarity(cfg: &ArrayConfig, seed: u64) -> Result<CheckOutcome> {
    let cb = Codebook::new(cfg)?;
    let f = cb.dense();
    let n = cb.len();
    let mut dev: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let g: Complex64 = f[a].iter().zip(&f[b]).map(|(x, y)| x * y.conj()).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((g - want).norm());
        }
    }
    let h = complex_normal_vec(&mut stream(&[seed, 1]), n, 1.0);
    let back = cb.from_beamspace(&cb.to_beamspace(&h)?)?;
    let rt = h
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(CheckOutcome::new(
        "dft_unitarity",
        dev < 1e-10 && rt < 1e-10,
        format!(
            "{}x{}: max |FF^H - I| = {dev:.2e}, round trip {rt:.2e}",
            cfg.n_y, cfg.n_z
        ),
    ))
}

/// Posterior mean and variance by direct conditioning of the joint Gaussian.
pub fn dense_posterior(
    kernel: &GridKernel,
    probes: &[(usize, f64)],
    sigma_eps_sq: f64,
) -> (Vec<f64>, Vec<f64>) {
    let t = probes.len();
    let n = kernel.len();
    if t == 0 {
        return (vec![0.0; n], vec![1.0; n]);
    }
    let kt = DMatrix::from_fn(t, t, |a, b| {
        kernel.k(probes[a].0, probes[b].0) + if a == b { sigma_eps_sq } else { 0.0 }
    });
    let z = DVector::from_iterator(t, probes.iter().map(|p| p.1));
    let inv = kt
        .try_inverse()
        .expect("regularized Gram matrix is invertible");
    let weights = &inv * &z;
    let mut mu = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    for i in 0..n {
        let ki = DVector::from_iterator(t, probes.iter().map(|p| kernel.k(i, p.0)));
        mu.push(ki.dot(&weights));
        var.push(1.0 - ki.dot(&(&inv * &ki)));
    }
    (mu, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpOracleReport {
    pub cases: usize,
    pub max_mean_dev: f64,
    pub max_var_dev: f64,
}

/// Incremental posterior against [`dense_posterior`] on random grids up to
/// 10×10 with up to 40 probes, repeats included.
pub fn gp_oracle(cases: usize, seed: u64) -> Result<GpOracleReport> {
    let mut rep = GpOracleReport {
        cases,
        max_mean_dev: 0.0,
        max_var_dev: 0.0,
    };
    for c in 0..cases {
        let mut rng = stream(&[seed, 2, c as u64]);
        let ny = rng.random_range(2..=10);
        let nz = rng.random_range(2..=10);
        let params = KernelParams::new(
            rng.random_range(0.0..=1.0),
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
        )?;
        let kernel = GridKernel::new(params, ny, nz)?;
        let s2 = 10f64.powf(rng.random_range(-3.0..0.0));
        let t = rng.random_range(1..=40);
        let probes: Vec<(usize, f64)> = (0..t)
            .map(|_| (rng.random_range(0..ny * nz), rng.random_range(-0.5..2.0)))
            .collect();
        let mut post = GpPosterior::new(kernel.clone(), s2)?;
        for &(i, z) in &probes {
            post.update(i, z)?;
        }
        let (mu, var) = dense_posterior(&kernel, &probes, s2);
        for i in 0..kernel.len() {
            rep.max_mean_dev = rep.max_mean_dev.max((post.mean(i) - mu[i]).abs());
            rep.max_var_dev = rep
                .max_var_dev
                .max((post.variance(i) - var[i].clamp(0.0, 1.0)).abs());
        }
    }
    Ok(rep)
}

pub fn gp_oracle_check(cases: usize, seed: u64) -> Result<CheckOutcome> {
    let r = gp_oracle(cases, seed)?;
    Ok(CheckOutcome::new(
        "gp_oracle",
        r.max_mean_dev < 1e-8 && r.max_var_dev < 1e-8,
        format!(
            "{} cases: max |dmu| = {:.2e}, max |dvar| = {:.2e}",
            r.cases, r.max_mean_dev, r.max_var_dev
        ),
    ))
}

/// Outcome of one LSE run on a planted power map with bounded noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticLseRun {
    pub steps: usize,
    pub done: bool,
    /// `{f ≥ τ+ε} ⊆ H ⊆ {f ≥ τ−ε}`
    pub inclusion: bool,
    pub variance_violations: usize,
    pub bound_violations: usize,
    pub partition_violations: usize,
    pub ambiguity_violations: usize,
}

impl SyntheticLseRun {
    pub fn violations(&self) -> usize {
        self.variance_violations
            + self.bound_violations
            + self.partition_violations
            + self.ambiguity_violations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticLseConfig {
    pub n_y: usize,
    pub n_z: usize,
    pub bumps: usize,
    pub tau: f64,
    pub epsilon: f64,
    /// observations are `f(i) + e` with `e ~ U[-b, b]`
    pub noise_bound: f64,
    pub sigma_eps_sq: f64,
    pub beta: f64,
    pub max_steps: usize,
}

impl Default for SyntheticLseConfig {
    fn default() -> Self {
        Self {
            n_y: 8,
            n_z: 6,
            bumps: 3,
            tau: 0.5,
            epsilon: 0.1,
            noise_bound: 0.05,
            sigma_eps_sq: 0.01,
            beta: 9.0,
            max_steps: 3000,
        }
    }
}

/// Draws `f = Σ_j a_j k(·, c_j)` normalized to peak 1, so `f` lies in the
/// kernel's RKHS, then runs LSE until it reports done or `max_steps` elapse.
pub fn synthetic_lse_run(cfg: &SyntheticLseConfig, seed: u64) -> Result<SyntheticLseRun> {
    let mut rng = stream(&[seed, 3]);
    let n = cfg.n_y * cfg.n_z;
    let kernel = GridKernel::new(KernelParams::new(0.5, 0.3, 0.3)?, cfg.n_y, cfg.n_z)?;
    let mut f = vec![0.0; n];
    for _ in 0..cfg.bumps {
        let c = rng.random_range(0..n);
        let a = rng.random_range(0.3..1.0);
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += a * kernel.k(i, c);
        }
    }
    let peak = f.iter().copied().fold(f64::MIN, f64::max);
    f.iter_mut().for_each(|x| *x /= peak);

    let mut post = GpPosterior::new(kernel, cfg.sigma_eps_sq)?;
    let mut st = LseState::new(n, cfg.tau, cfg.epsilon)?;
    let mut run = SyntheticLseRun {
        steps: 0,
        done: false,
        inclusion: false,
        variance_violations: 0,
        bound_violations: 0,
        partition_violations: 0,
        ambiguity_violations: 0,
    };
    let mut prev_var = post.variances();
    let (mut prev_lo, mut prev_hi) = (st.lower().to_vec(), st.upper().to_vec());
    let mut prev_class = st.class().to_vec();
    loop {
        let outcome = lse_step(&mut st, &post, cfg.beta);
        for i in 0..n {
            if st.lower()[i] < prev_lo[i] || st.upper()[i] > prev_hi[i] {
                run.bound_violations += 1;
            }
            let was = prev_class[i];
            if was != Class::Undecided && st.class()[i] != was {
                run.partition_violations += 1;
            }
        }
        prev_lo = st.lower().to_vec();
        prev_hi = st.upper().to_vec();
        prev_class = st.class().to_vec();
        match outcome {
            StepOutcome::Done => {
                run.done = true;
                break;
            }
            StepOutcome::Probe(i) => {
                if run.steps >= cfg.max_steps {
                    break;
                }
                let e = rng.random_range(-cfg.noise_bound..=cfg.noise_bound);
                post.update(i, f[i] + e)?;
                run.steps += 1;
                let var = post.variances();
                run.variance_violations += var
                    .iter()
                    .zip(&prev_var)
                    .filter(|(a, b)| **a > **b + 1e-12)
                    .count();
                prev_var = var;
            }
        }
    }
    let amb: Vec<f64> = st
        .max_ambiguity
        .iter()
        .copied()
        .filter(|a| a.is_finite())
        .collect();
    run.ambiguity_violations = amb.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    let high = st.class();
    run.inclusion = (0..n).all(|i| {
        let in_h = high[i] == Class::High;
        (f[i] < cfg.tau + cfg.epsilon || in_h) && (!in_h || f[i] >= cfg.tau - cfg.epsilon)
    });
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LseSuiteReport {
    pub runs: usize,
    pub done: usize,
    pub inclusion: usize,
    pub violations: usize,
}

pub fn lse_suite(runs: usize, seed: u64, cfg: &SyntheticLseConfig) -> Result<LseSuiteReport> {
    let mut rep = LseSuiteReport {
        runs,
        done: 0,
        inclusion: 0,
        violations: 0,
    };
    for r in 0..runs {
        let run = synthetic_lse_run(cfg, seed.wrapping_add(r as u64))?;
        rep.done += run.done as usize;
        rep.inclusion += (run.done && run.inclusion) as usize;
        rep.violations += run.violations();
    }
    Ok(rep)
}

pub fn lse_checks(runs: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let r = lse_suite(runs, seed, &SyntheticLseConfig::default())?;
    Ok(vec![
        CheckOutcome::new(
            "lse_monotonicity",
            r.violations == 0,
            format!(
                "{} runs: {} violations of variance, bound, partition or ambiguity monotonicity",
                r.runs, r.violations
            ),
        ),
        CheckOutcome::new(
            "lse_inclusion",
            r.inclusion as f64 >= 0.95 * r.runs as f64,
            format!(
                "{}/{} runs done with inclusion ({} done)",
                r.inclusion, r.runs, r.done
            ),
        ),
    ])
}

/// `‖ĥ − h‖² = ‖ŝ_Ŝ − s_Ŝ‖² + ‖s_Ŝᶜ‖²` on planted cases. Returns the largest
/// absolute deviation for unit-norm channels.
pub fn error_decomposition(cfg: &ArrayConfig, cases: usize, seed: u64) -> Result<f64> {
    let cb = Codebook::new(cfg)?;
    let n = cb.len();
    let mut worst: f64 = 0.0;
    for c in 0..cases {
        let mut rng = stream(&[seed, 4, c as u64]);
        let mut s = complex_normal_vec(&mut rng, n, 1.0);
        let scale = norm_sqr(&s).sqrt();
        s.iter_mut().for_each(|x| *x /= scale);
        let k = rng.random_range(1..n);
        let mut lin = sample(&mut rng, n, k).into_vec();
        lin.sort_unstable();
        let support: Vec<BeamIndex> = lin.iter().map(|&l| cb.index(l)).collect();
        let s_hat: CVec = lin
            .iter()
            .map(|&l| s[l] + complex_normal(&mut rng, 0.1))
            .collect();
        let h = cb.from_beamspace(&s)?;
        let h_hat = cb.synthesize(&support, &s_hat)?;
        let lhs: f64 = h.iter().zip(&h_hat).map(|(a, b)| (a - b).norm_sqr()).sum();
        let inside: f64 = lin
            .iter()
            .zip(&s_hat)
            .map(|(&l, e)| (e - s[l]).norm_sqr())
            .sum();
        let outside: f64 = (0..n)
            .filter(|l| lin.binary_search(l).is_err())
            .map(|l| s[l].norm_sqr())
            .sum();
        worst = worst.max((lhs - inside - outside).abs());
    }
    Ok(worst)
}

pub fn error_decomposition_check(
    cfg: &ArrayConfig,
    cases: usize,
    seed: u64,
) -> Result<CheckOutcome> {
    let w = error_decomposition(cfg, cases, seed)?;
    Ok(CheckOutcome::new(
        "error_decomposition",
        w < 1e-9,
        format!("{cases} cases: max deviation {w:.2e}"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DebiasReport {
    pub signal_power: f64,
    pub sigma_sq: f64,
    pub mean: f64,
    pub mean_band: f64,
    pub variance: f64,
    pub variance_formula: f64,
    pub variance_band: f64,
}

impl DebiasReport {
    pub fn passed(&self) -> bool {
        (self.mean - self.signal_power).abs() <= self.mean_band
            && (self.variance - self.variance_formula).abs() <= self.variance_band
    }
}

/// Sample mean and variance of `|s + w|² − σ²` with their 3-sigma bands.
pub fn debias_statistics(s: Complex64, sigma_sq: f64, draws: usize, seed: u64) -> DebiasReport {
    let mut rng = stream(&[seed, 5]);
    let z: Vec<f64> = (0..draws)
        .map(|_| debias_power((s + complex_normal(&mut rng, sigma_sq)).norm(), sigma_sq))
        .collect();
    let n = draws as f64;
    let mean = z.iter().sum::<f64>() / n;
    let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    let formula = sigma_sq * sigma_sq + 2.0 * sigma_sq * s.norm_sqr();
    DebiasReport {
        signal_power: s.norm_sqr(),
        sigma_sq,
        mean,
        mean_band: 3.0 * (formula / n).sqrt(),
        variance,
        variance_formula: formula,
        variance_band: 3.0 * ((m4 - m2 * m2).max(0.0) / n).sqrt(),
    }
}

pub fn debias_check(draws: usize, seed: u64) -> CheckOutcome {
    let cases = [
        (Complex64::new(0.0, 0.0), 1.0),
        (Complex64::new(1.0, 0.5), 0.5),
        (Complex64::new(-2.0, 1.0), 2.0),
    ];
    let reps: Vec<DebiasReport> = cases
        .iter()
        .enumerate()
        .map(|(c, &(s, s2))| debias_statistics(s, s2, draws, seed + c as u64))
        .collect();
    let detail = reps
        .iter()
        .map(|r| {
            format!(
                "|s|^2={:.2} mean {:.4} var {:.4}/{:.4}",
                r.signal_power, r.mean, r.variance, r.variance_formula
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    CheckOutcome::new(
        "debias_statistics",
        reps.iter().all(DebiasReport::passed),
        detail,
    )
}

/// Fraction of `t ∈ 1..=draws` with `|ε̃_t| > B_t`, where `ε̃_t` is the
/// debiased-power residual of the `t`-th probe at `f = f_max`.
pub fn bounded_noise_coverage(sigma_sq: f64, f_max: f64, draws: usize, seed: u64) -> Result<f64> {
    let noise = NoiseModel::new(sigma_sq, f_max, 0.05);
    let s = Complex64::new(f_max.sqrt(), 0.0);
    let mut rng = stream(&[seed, 6]);
    let mut bad = 0usize;
    for t in 1..=draws {
        let resid = debias_power((s + complex_normal(&mut rng, sigma_sq)).norm(), sigma_sq) - f_max;
        if resid.abs() > bounded_noise_threshold(&noise, t)? {
            bad += 1;
        }
    }
    Ok(bad as f64 / draws as f64)
}

pub fn bounded_noise_check(draws: usize, seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (c, (s2, fm)) in [(1.0, 1.0), (0.1, 4.0), (1.0, 0.0)].into_iter().enumerate() {
        worst = worst.max(bounded_noise_coverage(s2, fm, draws, seed + c as u64)?);
    }
    Ok(CheckOutcome::new(
        "bounded_noise_coverage",
        worst <= 0.05,
        format!("{draws} residuals: worst exceedance fraction {worst:.4}"),
    ))
}

/// Violations of the pseudo-amplitude bound over random `(a, ε)` with `|ε| ≤ a²/2`.
pub fn pseudo_amplitude_violations(pairs: usize, seed: u64) -> usize {
    let mut rng = stream(&[seed, 7]);
    (0..pairs)
        .filter(|_| {
            let a = 10f64.powf(rng.random_range(-3.0..3.0));
            let eps = rng.random_range(-0.5..=0.5) * a * a;
            !pseudo_amplitude_bound_check(a, eps)
        })
        .count()
}

pub fn pseudo_amplitude_check(pairs: usize, seed: u64) -> CheckOutcome {
    let v = pseudo_amplitude_violations(pairs, seed);
    CheckOutcome::new(
        "pseudo_amplitude_bound",
        v == 0,
        format!("{pairs} pairs: {v} violations"),
    )
}

/// The 128×16, 28 GHz array used for the closed-form examples.
pub fn reference_array() -> ArrayConfig {
    ArrayConfig::new(128, 16, 28e9).expect("valid array")
}

/// `v, s ~ U[−½, ½]`, `r ~ U[r_F, r_R/20]`, six paths.
pub fn reference_prior(cfg: &ArrayConfig) -> ScenarioPrior {
    ScenarioPrior {
        v_range: [-0.5, 0.5],
        s_range: [-0.5, 0.5],
        r_range: [cfg.fresnel_distance(), cfg.rayleigh_distance() / 20.0],
        num_paths: 6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparsityCheck {
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub mc_stderr: f64,
    pub relative_gap: f64,
}

pub fn sparsity_agreement(
    cfg: &ArrayConfig,
    prior: &ScenarioPrior,
    samples: usize,
    seed: u64,
) -> Result<SparsityCheck> {
    let est = expected_sparsity(cfg, prior)?;
    let (mc, se) = sparsity_monte_carlo(cfg, prior, samples, &mut stream(&[seed, 8]))?;
    Ok(SparsityCheck {
        closed_form: est.expected_k,
        monte_carlo: mc,
        mc_stderr: se,
        relative_gap: (est.expected_k - mc).abs() / mc,
    })
}

pub fn sparsity_check(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let cfg = reference_array();
    let r = sparsity_agreement(&cfg, &reference_prior(&cfg), samples, seed)?;
    Ok(CheckOutcome::new(
        "sparsity_closed_form",
        r.relative_gap <= 0.02,
        format!(
            "closed form {:.4}, Monte-Carlo {:.4} ± {:.4} ({samples} samples)",
            r.closed_form, r.monte_carlo, r.mc_stderr
        ),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamwidthReport {
    pub configs: usize,
    pub within: usize,
    pub median_ratio: f64,
}

/// Measured vs predicted 6-dB width on the long axis for random interior
/// directions `|u|, |v| ≤ 0.6` and `r ~ U[r_F, r_R/5]`.
pub fn beamwidth_law(
    cfg: &ArrayConfig,
    configs: usize,
    tol: f64,
    seed: u64,
) -> Result<BeamwidthReport> {
    let mut rng = stream(&[seed, 9]);
    let (r1, r2) = (cfg.fresnel_distance(), cfg.rayleigh_distance() / 5.0);
    let mut ratios = Vec::with_capacity(configs);
    let mut within = 0;
    for _ in 0..configs {
        let u = rng.random_range(-0.6..=0.6);
        let v = rng.random_range(-0.6..=0.6);
        let r = rng.random_range(r1..r2);
        let rep = measure_lobe_width(
            cfg,
            &SphericalPoint::from_uvr(u, v, r),
            Axis::Y,
            DEFAULT_LOBE_RESOLUTION,
        )?;
        let ratio = rep.b_measured / rep.b_predicted;
        if (ratio - 1.0).abs() <= tol {
            within += 1;
        }
        ratios.push(ratio);
    }
    ratios.sort_by(f64::total_cmp);
    Ok(BeamwidthReport {
        configs,
        within,
        median_ratio: ratios[configs / 2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub measurements: usize,
    pub trials: usize,
    pub successes: usize,
}

/// Noiseless `k`-sparse recovery on a `dim`-dimensional support with `M`
/// Gaussian masks. Success is a phase-aligned relative error below `1e-5`.
pub fn sparta_recovery(
    dim: usize,
    k: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<RecoveryReport> {
    let cfg = ArrayConfig::new(dim, 1, 28e9)?;
    let cb = Codebook::new(&cfg)?;
    let support: Vec<BeamIndex> = (0..dim).map(|l| BeamIndex::from_linear(l, 1)).collect();
    let mut successes = 0;
    for t in 0..trials {
        let mut rng = stream(&[seed, 10, t as u64]);
        let mut s = vec![z0(); dim];
        for i in sample(&mut rng, dim, k) {
            s[i] = complex_normal(&mut rng, 1.0);
        }
        let set = SensingSet::build(&support, m, &mut rng)?;
        let y = observe_lowdim(&s, &set, 0.0, &mut rng)?;
        let out = solve(
            &cb,
            &set,
            &rician_denoise(&y, 0.0)?,
            &SpartaConfig {
                k: Some(k),
                ..Default::default()
            },
        )?;
        if phase_aligned_distance(&out.estimate.s_hat, &s) < 1e-5 {
            successes += 1;
        }
    }
    Ok(RecoveryReport {
        measurements: m,
        trials,
        successes,
    })
}

/// `⌈c k² ln K⌉`.
pub fn recovery_measurements(c: f64, dim: usize, k: usize) -> usize {
    (c * (k * k) as f64 * (dim as f64).ln()).ceil() as usize
}

pub fn sparta_check(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let m = recovery_measurements(8.0, 32, 4);
    let r = sparta_recovery(32, 4, m, trials, seed)?;
    Ok(CheckOutcome::new(
        "sparta_recovery",
        r.successes as f64 >= 0.9 * trials as f64,
        format!("K=32 k=4 M={m}: {}/{} exact", r.successes, r.trials),
    ))
}

/// ρ is invariant to a global complex scale, symmetric, and bounded by one.
pub fn correlation_check(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut bounded = true;
    for t in 0..trials {
        let mut rng = stream(&[seed, 11, t as u64]);
        let h = complex_normal_vec(&mut rng, 16, 1.0);
        let g = complex_normal_vec(&mut rng, 16, 1.0);
        let c = complex_normal(&mut rng, 1.0);
        let gs: CVec = g.iter().map(|x| x * c).collect();
        let base = correlation(&h, &g)?;
        bounded &= (0.0..=1.0).contains(&base);
        worst = worst.max((correlation(&h, &gs)? - base).abs());
        worst = worst.max((correlation(&g, &h)? - base).abs());
        worst = worst.max((correlation(&h, &h)? - 1.0).abs());
    }
    Ok(CheckOutcome::new(
        "correlation_invariances",
        worst < 1e-12 && bounded,
        format!("{trials} cases: max deviation {worst:.2e}"),
    ))
}

/// Sizes for [`run_all`]. `quick` shrinks every suite for smoke runs.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub gp_cases: usize,
    pub lse_runs: usize,
    pub decomposition_cases: usize,
    pub debias_draws: usize,
    pub coverage_draws: usize,
    pub bound_pairs: usize,
    pub sparsity_samples: usize,
    pub sparta_trials: usize,
}

impl SuiteSizes {
    pub fn full() -> Self {
        Self {
            gp_cases: 20,
            lse_runs: 200,
            decomposition_cases: 50,
            debias_draws: 100_000,
            coverage_draws: 10_000,
            bound_pairs: 10_000,
            sparsity_samples: 1_000_000,
            sparta_trials: 100,
        }
    }

    pub fn quick() -> Self {
        Self {
            gp_cases: 5,
            lse_runs: 20,
            decomposition_cases: 10,
            debias_draws: 20_000,
            coverage_draws: 2_000,
            bound_pairs: 2_000,
            sparsity_samples: 100_000,
            sparta_trials: 10,
        }
    }
}

/// Every invariant suite, in a fixed order.
pub fn run_all(sizes: &SuiteSizes, seed: u64) -> Result<Vec<CheckOutcome>> {
    let small = ArrayConfig::new(8, 4, 28e9)?;
    let mut out = vec![
        dft_unitarity(&small, seed)?,
        dft_unitarity(&ArrayConfig::new(32, 8, 28e9)?, seed)?,
        gp_oracle_check(sizes.gp_cases, seed)?,
    ];
    out.extend(lse_checks(sizes.lse_runs, seed)?);
    out.push(error_decomposition_check(
        &small,
        sizes.decomposition_cases,
        seed,
    )?);
    out.push(debias_check(sizes.debias_draws, seed));
    out.push(bounded_noise_check(sizes.coverage_draws, seed)?);
    out.push(pseudo_amplitude_check(sizes.bound_pairs, seed));
    out.push(sparsity_check(sizes.sparsity_samples, seed)?);
    out.push(sparta_check(sizes.sparta_trials, seed)?);
    out.push(correlation_check(50, seed)?);
    Ok(out)
}
