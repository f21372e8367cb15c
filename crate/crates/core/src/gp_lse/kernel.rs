use serde::{Deserialize, Serialize};

use crate::beamspace::{grid_point, BeamIndex};
use crate::channel::{ArrayConfig, ScenarioPrior};
use crate::error::{Error, Result};

/// Cross-pattern kernel `α (k_u + k_v)/2 + (1-α) k_u k_v` with 1D Laplace factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub ell_u: f64,
    pub ell_v: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, ell_u: f64, ell_v: f64) -> Result<Self> {
        let p = Self {
            alpha,
            ell_u,
            ell_v,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "kernel alpha {} not in [0, 1]",
                self.alpha
            )));
        }
        if !(self.ell_u > 0.0 && self.ell_v > 0.0)
            || !self.ell_u.is_finite()
            || !self.ell_v.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "lengthscales must be positive, got ({}, {})",
                self.ell_u, self.ell_v
            )));
        }
        Ok(())
    }

    pub fn combine(&self, ku: f64, kv: f64) -> f64 {
        self.alpha * 0.5 * (ku + kv) + (1.0 - self.alpha) * ku * kv
    }

    pub fn eval_uv(&self, du: f64, dv: f64) -> f64 {
        self.combine(
            (-du.abs() / self.ell_u).exp(),
            (-dv.abs() / self.ell_v).exp(),
        )
    }
}

pub fn kernel_eval(
    params: &KernelParams,
    cfg: &ArrayConfig,
    i: BeamIndex,
    j: BeamIndex,
) -> Result<f64> {
    params.validate()?;
    i.check(cfg)?;
    j.check(cfg)?;
    Ok(params.eval_uv(i.u(cfg.n_y) - j.u(cfg.n_y), i.v(cfg.n_z) - j.v(cfg.n_z)))
}

/// Kernel restricted to a DFT grid, with the 1D factors tabulated.
#[derive(Debug, Clone)]
pub struct GridKernel {
    params: KernelParams,
    n_y: usize,
    n_z: usize,
    ku: Vec<f64>,
    kv: Vec<f64>,
}

impl GridKernel {
    pub fn new(params: KernelParams, n_y: usize, n_z: usize) -> Result<Self> {
        params.validate()?;
        let table = |len: usize, ell: f64| {
            let mut t = vec![0.0; len * len];
            for a in 0..len {
                for b in 0..len {
                    t[a * len + b] = (-(grid_point(a, len) - grid_point(b, len)).abs() / ell).exp();
                }
            }
            t
        };
        Ok(Self {
            ku: table(n_y, params.ell_u),
            kv: table(n_z, params.ell_v),
            params,
            n_y,
            n_z,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn len(&self) -> usize {
        self.n_y * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `k(i, j)` on linear indices.
    #[inline]
    pub fn k(&self, i: usize, j: usize) -> f64 {
        let (ni, mi) = (i / self.n_z, i % self.n_z);
        let (nj, mj) = (j / self.n_z, j % self.n_z);
        self.params
            .combine(self.ku[ni * self.n_y + nj], self.kv[mi * self.n_z + mj])
    }

    /// Column `k(·, j)` over the whole grid.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.k(i, j)).collect()
    }
}

/// `E[1/r]` for `r ~ U[r1, r2]`.
fn mean_inverse_range([r1, r2]: [f64; 2]) -> f64 {
    if (r2 - r1).abs() < 1e-15 * r1 {
        1.0 / r1
    } else {
        (r2 / r1).ln() / (r2 - r1)
    }
}

fn uniform_second_moment([a, b]: [f64; 2]) -> f64 {
    if (b - a).abs() < 1e-15 {
        a * a
    } else {
        (b.powi(3) - a.powi(3)) / (3.0 * (b - a))
    }
}

/// Physics-guided lengthscales
/// `ℓ_u = κ_u N_y d E[(1-u²)/r]` and `ℓ_v = κ_v N_z d E[(1-v²)/r]`,
/// evaluated in closed form under the independent uniform prior.
pub fn lengthscales_from_prior(
    cfg: &ArrayConfig,
    prior: &ScenarioPrior,
    kappa_u: f64,
    kappa_v: f64,
) -> Result<(f64, f64)> {
    prior.validate()?;
    if !(kappa_u > 0.0 && kappa_v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lengthscale multipliers must be positive, got ({kappa_u}, {kappa_v})"
        )));
    }
    let inv_r = mean_inverse_range(prior.r_range);
    let mu2 = uniform_second_moment(prior.v_range);
    let nu2 = uniform_second_moment(prior.s_range);
    let d = cfg.spacing();
    let ell_u = kappa_u * cfg.n_y as f64 * d * (1.0 - (1.0 - mu2) * nu2) * inv_r;
    let ell_v = kappa_v * cfg.n_z as f64 * d * (1.0 - mu2) * inv_r;
    Ok((ell_u, ell_v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::rng::stream;

    #[test]
    fn diagonal_is_one() {
        let p = KernelParams::new(0.4, 0.1, 0.3).unwrap();
        let g = GridKernel::new(p, 5, 3).unwrap();
        for i in 0..15 {
            assert!((g.k(i, i) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn additive_plug_in() {
        let cfg = ArrayConfig::new(4, 4, 28e9).unwrap();
        // adjacent v grid points are 0.5 apart
        let p = KernelParams::new(1.0, 0.2, 0.5).unwrap();
        let k = kernel_eval(&p, &cfg, BeamIndex::new(1, 1), BeamIndex::new(1, 2)).unwrap();
        assert!((k - (1.0 + (-1.0f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn product_kernel_matches_direct() {
        let cfg = ArrayConfig::new(10, 6, 28e9).unwrap();
        let p = KernelParams::new(0.0, 0.17, 0.4).unwrap();
        let g = GridKernel::new(p, 10, 6).unwrap();
        let mut rng = stream(&[11]);
        for _ in 0..100 {
            let (a, b) = (rng.random_range(0..60), rng.random_range(0..60));
            let (i, j) = (BeamIndex::from_linear(a, 6), BeamIndex::from_linear(b, 6));
            let ku = (-(i.u(10) - j.u(10)).abs() / 0.17).exp();
            let kv = (-(i.v(6) - j.v(6)).abs() / 0.4).exp();
            assert!((kernel_eval(&p, &cfg, i, j).unwrap() - ku * kv).abs() < 1e-14);
            assert!((g.k(a, b) - ku * kv).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(KernelParams::new(0.5, 0.0, 1.0).is_err());
        assert!(KernelParams::new(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn point_mass_lengthscale() {
        let cfg = ArrayConfig::new(32, 8, 28e9).unwrap();
        let r0 = 2.5;
        let prior = ScenarioPrior {
            v_range: [0.0, 0.0],
            s_range: [0.0, 0.0],
            r_range: [r0, r0],
            num_paths: 1,
        };
        let (lu, lv) = lengthscales_from_prior(&cfg, &prior, 1.5, 2.0).unwrap();
        assert!((lu - 1.5 * 32.0 * cfg.spacing() / r0).abs() < 1e-15);
        assert!((lv - 2.0 * 8.0 * cfg.spacing() / r0).abs() < 1e-15);
        assert!(lengthscales_from_prior(&cfg, &prior, 0.0, 1.0).is_err());
    }
}
