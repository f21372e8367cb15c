use crate::error::{Error, Result};

use super::kernel::GridKernel;

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// GP posterior over a DFT grid with unit prior variance and zero prior mean.
///
/// The Cholesky factor `L` of `K_t + σ_ε² I` is extended by one row per probe.
/// For every grid index `i` the solve `w_i = L⁻¹ k_t(i)` is kept as well, so
/// that `μ(i) = w_iᵀ L⁻¹ z` and `σ²(i) = 1 - ‖w_i‖²` cost nothing to query and
/// each update costs `O(N t)`.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: GridKernel,
    sigma_eps_sq: f64,
    probes: Vec<(usize, f64)>,
    /// rows of `L`, row `t` has `t + 1` entries
    chol: Vec<Vec<f64>>,
    /// `w[i]` is `L⁻¹ k_t(i)`
    w: Vec<Vec<f64>>,
    w_norm_sq: Vec<f64>,
    /// `L⁻¹ z`
    alpha: Vec<f64>,
    jitter_used: f64,
}

impl GpPosterior {
    pub fn new(kernel: GridKernel, sigma_eps_sq: f64) -> Result<Self> {
        if !(sigma_eps_sq >= 0.0) || !sigma_eps_sq.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_eps_sq = {sigma_eps_sq}"
            )));
        }
        let n = kernel.len();
        Ok(Self {
            kernel,
            sigma_eps_sq,
            probes: Vec::new(),
            chol: Vec::new(),
            w: vec![Vec::new(); n],
            w_norm_sq: vec![0.0; n],
            alpha: Vec::new(),
            jitter_used: 0.0,
        })
    }

    pub fn kernel(&self) -> &GridKernel {
        &self.kernel
    }

    pub fn sigma_eps_sq(&self) -> f64 {
        self.sigma_eps_sq
    }

    pub fn probes(&self) -> &[(usize, f64)] {
        &self.probes
    }

    pub fn num_probes(&self) -> usize {
        self.probes.len()
    }

    pub fn grid_len(&self) -> usize {
        self.kernel.len()
    }

    /// Largest diagonal jitter that had to be added to keep the factor positive.
    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Appends a probe of grid index `idx` with debiased value `z`.
    pub fn update(&mut self, idx: usize, z: f64) -> Result<()> {
        if idx >= self.grid_len() {
            return Err(Error::InvalidParameter(format!(
                "grid index {idx} out of range"
            )));
        }
        let row = self.w[idx].clone();
        let base = 1.0 + self.sigma_eps_sq - self.w_norm_sq[idx];
        let mut jitter = 0.0;
        let mut pivot = base;
        while !(pivot > 0.0) || pivot < 1e-14 {
            jitter = if jitter == 0.0 {
                JITTER_START
            } else {
                jitter * 2.0
            };
            if jitter > JITTER_MAX {
                return Err(Error::Factorization(JITTER_MAX));
            }
            pivot = base + jitter;
        }
        self.jitter_used = self.jitter_used.max(jitter);
        let diag = pivot.sqrt();

        for i in 0..self.grid_len() {
            let wi = &mut self.w[i];
            let dot: f64 = wi.iter().zip(&row).map(|(a, b)| a * b).sum();
            let entry = (self.kernel.k(i, idx) - dot) / diag;
            wi.push(entry);
            self.w_norm_sq[i] += entry * entry;
        }
        let dot: f64 = self.alpha.iter().zip(&row).map(|(a, b)| a * b).sum();
        self.alpha.push((z - dot) / diag);

        let mut new_row = row;
        new_row.push(diag);
        self.chol.push(new_row);
        self.probes.push((idx, z));
        Ok(())
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.w[i].iter().zip(&self.alpha).map(|(a, b)| a * b).sum()
    }

    pub fn variance(&self, i: usize) -> f64 {
        (1.0 - self.w_norm_sq[i]).clamp(0.0, 1.0)
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.grid_len()).map(|i| self.mean(i)).collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.grid_len()).map(|i| self.variance(i)).collect()
    }

    /// Row-major lower-triangular Cholesky factor of `K_t + σ_ε² I`.
    pub fn cholesky_rows(&self) -> &[Vec<f64>] {
        &self.chol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp_lse::kernel::KernelParams;
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    use crate::rng::stream;

    fn kernel(ny: usize, nz: usize) -> GridKernel {
        GridKernel::new(KernelParams::new(0.5, 0.3, 0.4).unwrap(), ny, nz).unwrap()
    }

    fn dense(k: &GridKernel, probes: &[(usize, f64)], s2: f64) -> (Vec<f64>, Vec<f64>) {
        let t = probes.len();
        let kt = DMatrix::from_fn(t, t, |a, b| {
            k.k(probes[a].0, probes[b].0) + if a == b { s2 } else { 0.0 }
        });
        let z = DVector::from_iterator(t, probes.iter().map(|p| p.1));
        let inv = kt.try_inverse().unwrap();
        let mut mu = Vec::new();
        let mut var = Vec::new();
        for i in 0..k.len() {
            let ki = DVector::from_iterator(t, probes.iter().map(|p| k.k(i, p.0)));
            mu.push((ki.transpose() * &inv * &z)[0]);
            var.push(1.0 - (ki.transpose() * &inv * &ki)[0]);
        }
        (mu, var)
    }

    #[test]
    fn prior_is_zero_mean_unit_variance() {
        let post = GpPosterior::new(kernel(3, 3), 0.1).unwrap();
        assert!(post.means().iter().all(|&m| m == 0.0));
        assert!(post.variances().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn single_probe_scalar_formula() {
        let s2 = 0.25;
        let mut post = GpPosterior::new(kernel(4, 2), s2).unwrap();
        post.update(5, 3.0).unwrap();
        assert!((post.mean(5) - 3.0 / (1.0 + s2)).abs() < 1e-14);
        assert!((post.variance(5) - (1.0 - 1.0 / (1.0 + s2))).abs() < 1e-14);
    }

    #[test]
    fn matches_dense_conditioning_with_repeats() {
        let k = kernel(6, 6);
        let mut post = GpPosterior::new(k.clone(), 0.05).unwrap();
        let mut rng = stream(&[21]);
        for step in 0..10 {
            let idx = if step == 7 {
                post.probes()[2].0
            } else {
                rng.random_range(0..36)
            };
            post.update(idx, rng.random_range(-1.0..3.0)).unwrap();
        }
        let (mu, var) = dense(&k, post.probes(), 0.05);
        for i in 0..36 {
            assert!((post.mean(i) - mu[i]).abs() < 1e-8);
            assert!((post.variance(i) - var[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn variance_non_increasing() {
        let mut post = GpPosterior::new(kernel(5, 4), 0.01).unwrap();
        let mut rng = stream(&[4]);
        let mut prev = post.variances();
        for _ in 0..30 {
            post.update(rng.random_range(0..20), rng.random()).unwrap();
            let cur = post.variances();
            assert!(cur.iter().zip(&prev).all(|(c, p)| *c <= p + 1e-12));
            prev = cur;
        }
    }

    #[test]
    fn noiseless_repeat_needs_jitter() {
        let mut post = GpPosterior::new(kernel(2, 2), 0.0).unwrap();
        post.update(1, 1.0).unwrap();
        post.update(1, 1.0).unwrap();
        assert!(post.jitter_used() > 0.0);
        assert!(post.update(9, 0.0).is_err());
    }
}
