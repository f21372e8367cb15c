//! 2D DFT codebook, beamspace transforms and near-field beam-pattern laws.
//!
//! Grid points are `u_n = (2n - n_y + 1)/n_y` and `v_m = (2m - n_z + 1)/n_z`,
//! and the codeword for `(n, m)` is `a_y(u_n) ⊗ a_z(v_m)` with
//! `[a_y(u)]_i = exp(-j 2π/λ d u δ_i) / sqrt(n_y)`.
//!
//! The steering vector carries the phase `exp(-j 2π/λ (‖r q - r_ij‖ - r))`,
//! which in the far field is `exp(+j 2π/λ d (u δ_i + v δ_j))`. Combined with
//! the codeword sign above, `|b(u, v)^H a(u', v')|` peaks at `(u', v') = (-u, -v)`.
//! [`matched_index`] and the lobe measurements account for this mirroring;
//! widths and sparsity are unaffected because the grid is symmetric.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::channel::{steering_vector, ArrayConfig, ScenarioPrior, SphericalPoint};
use crate::error::{Error, Result};
use crate::linalg::{inner, CVec};

/// Coordinate on the 2D DFT grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BeamIndex {
    pub n: usize,
    pub m: usize,
}

impl BeamIndex {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    pub fn linear(&self, n_z: usize) -> usize {
        self.n * n_z + self.m
    }

    pub fn from_linear(idx: usize, n_z: usize) -> Self {
        Self {
            n: idx / n_z,
            m: idx % n_z,
        }
    }

    pub fn u(&self, n_y: usize) -> f64 {
        grid_point(self.n, n_y)
    }

    pub fn v(&self, n_z: usize) -> f64 {
        grid_point(self.m, n_z)
    }

    pub fn check(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.n >= cfg.n_y || self.m >= cfg.n_z {
            return Err(Error::IndexOutOfRange(self.n, self.m, cfg.n_y, cfg.n_z));
        }
        Ok(())
    }
}

/// `(2n - N + 1) / N`.
pub fn grid_point(n: usize, len: usize) -> f64 {
    (2.0 * n as f64 - len as f64 + 1.0) / len as f64
}

/// Nearest grid index to a continuous coordinate.
pub fn nearest_grid_index(x: f64, len: usize) -> usize {
    let n = ((x * len as f64 + len as f64 - 1.0) / 2.0).round();
    n.clamp(0.0, len as f64 - 1.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    Y,
    Z,
}

/// 1D DFT vector `a(x)` for an axis with `len` elements.
pub fn axis_dft_vector(len: usize, spacing_over_lambda: f64, x: f64) -> CVec {
    let scale = 1.0 / (len as f64).sqrt();
    (0..len)
        .map(|i| {
            let delta = ArrayConfig::offset(i, len);
            Complex64::from_polar(scale, -2.0 * PI * spacing_over_lambda * x * delta)
        })
        .collect()
}

/// Axis-wise Fresnel-approximated steering vector:
/// `[b(ξ, r)]_i = exp(-j 2π/λ (-d ξ δ_i + d²/(2r) (1-ξ²) δ_i²)) / sqrt(len)`.
pub fn axis_fresnel_vector(len: usize, d: f64, lambda: f64, xi: f64, r: f64) -> CVec {
    let k = 2.0 * PI / lambda;
    let scale = 1.0 / (len as f64).sqrt();
    (0..len)
        .map(|i| {
            let delta = ArrayConfig::offset(i, len);
            let phase = -d * xi * delta + d * d / (2.0 * r) * (1.0 - xi * xi) * delta * delta;
            Complex64::from_polar(scale, -k * phase)
        })
        .collect()
}

fn kron(a: &[Complex64], b: &[Complex64]) -> CVec {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// 2D DFT codeword `a_y(u_n) ⊗ a_z(v_m)`.
pub fn dft_codeword(cfg: &ArrayConfig, idx: BeamIndex) -> Result<CVec> {
    idx.check(cfg)?;
    let ratio = cfg.spacing() / cfg.wavelength();
    let ay = axis_dft_vector(cfg.n_y, ratio, idx.u(cfg.n_y));
    let az = axis_dft_vector(cfg.n_z, ratio, idx.v(cfg.n_z));
    Ok(kron(&ay, &az))
}

/// The unitary 2D DFT transform `F` (rows are conjugated codewords),
/// evaluated matrix-free through its two separable axis factors.
#[derive(Debug, Clone)]
pub struct Codebook {
    cfg: ArrayConfig,
    /// `ay[n][i] = [a_y(u_n)]_i`
    ay: Vec<CVec>,
    az: Vec<CVec>,
}

impl Codebook {
    /// Fails unless the spacing is half a wavelength, the only spacing for
    /// which the DFT grid is orthogonal.
    pub fn new(cfg: &ArrayConfig) -> Result<Self> {
        cfg.validate()?;
        let ratio = cfg.spacing() / cfg.wavelength();
        if (ratio - 0.5).abs() > 1e-9 {
            return Err(Error::InvalidArray(format!(
                "DFT codebook needs half-wavelength spacing, got d/λ = {ratio}"
            )));
        }
        let ay = (0..cfg.n_y)
            .map(|n| axis_dft_vector(cfg.n_y, ratio, grid_point(n, cfg.n_y)))
            .collect();
        let az = (0..cfg.n_z)
            .map(|m| axis_dft_vector(cfg.n_z, ratio, grid_point(m, cfg.n_z)))
            .collect();
        Ok(Self { cfg: *cfg, ay, az })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.cfg.num_elements()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, linear: usize) -> BeamIndex {
        BeamIndex::from_linear(linear, self.cfg.n_z)
    }

    pub fn codeword(&self, idx: BeamIndex) -> Result<CVec> {
        idx.check(&self.cfg)?;
        Ok(kron(&self.ay[idx.n], &self.az[idx.m]))
    }

    /// Single beamspace coefficient `f_i^H h`.
    pub fn coefficient(&self, h: &[Complex64], idx: BeamIndex) -> Complex64 {
        let nz = self.cfg.n_z;
        let az = &self.az[idx.m];
        self.ay[idx.n]
            .iter()
            .enumerate()
            .map(|(i, ayi)| {
                let row: Complex64 = az
                    .iter()
                    .zip(&h[i * nz..(i + 1) * nz])
                    .map(|(a, x)| a.conj() * x)
                    .sum();
                ayi.conj() * row
            })
            .sum()
    }

    /// `s = F h`.
    pub fn to_beamspace(&self, h: &[Complex64]) -> Result<CVec> {
        let (ny, nz) = (self.cfg.n_y, self.cfg.n_z);
        if h.len() != ny * nz {
            return Err(Error::LengthMismatch {
                expected: ny * nz,
                got: h.len(),
            });
        }
        // t[i][m] = sum_j conj(az[m][j]) h[i][j]
        let mut t = vec![Complex64::new(0.0, 0.0); ny * nz];
        for i in 0..ny {
            let hrow = &h[i * nz..(i + 1) * nz];
            for m in 0..nz {
                t[i * nz + m] = inner(&self.az[m], hrow);
            }
        }
        let mut s = vec![Complex64::new(0.0, 0.0); ny * nz];
        for n in 0..ny {
            let ay = &self.ay[n];
            for i in 0..ny {
                let w = ay[i].conj();
                let trow = &t[i * nz..(i + 1) * nz];
                for m in 0..nz {
                    s[n * nz + m] += w * trow[m];
                }
            }
        }
        Ok(s)
    }

    /// `h = F^H s`.
    pub fn from_beamspace(&self, s: &[Complex64]) -> Result<CVec> {
        let (ny, nz) = (self.cfg.n_y, self.cfg.n_z);
        if s.len() != ny * nz {
            return Err(Error::LengthMismatch {
                expected: ny * nz,
                got: s.len(),
            });
        }
        // t[n][j] = sum_m az[m][j] s[n][m]
        let mut t = vec![Complex64::new(0.0, 0.0); ny * nz];
        for n in 0..ny {
            for m in 0..nz {
                let c = s[n * nz + m];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (tj, a) in t[n * nz..(n + 1) * nz].iter_mut().zip(&self.az[m]) {
                    *tj += a * c;
                }
            }
        }
        let mut h = vec![Complex64::new(0.0, 0.0); ny * nz];
        for n in 0..ny {
            let trow = &t[n * nz..(n + 1) * nz];
            for i in 0..ny {
                let w = self.ay[n][i];
                for (hj, tj) in h[i * nz..(i + 1) * nz].iter_mut().zip(trow) {
                    *hj += w * tj;
                }
            }
        }
        Ok(h)
    }

    /// `F_S^H c` for coefficients `c` on the ordered support `support`.
    pub fn synthesize(&self, support: &[BeamIndex], coeffs: &[Complex64]) -> Result<CVec> {
        if support.len() != coeffs.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: coeffs.len(),
            });
        }
        let mut s = vec![Complex64::new(0.0, 0.0); self.len()];
        for (idx, c) in support.iter().zip(coeffs) {
            idx.check(&self.cfg)?;
            s[idx.linear(self.cfg.n_z)] += c;
        }
        self.from_beamspace(&s)
    }

    /// Dense `N x N` matrix `F`, row-major. Only for tests and small arrays.
    pub fn dense(&self) -> Vec<CVec> {
        (0..self.len())
            .map(|l| {
                self.codeword(self.index(l))
                    .expect("index in range")
                    .into_iter()
                    .map(|x| x.conj())
                    .collect()
            })
            .collect()
    }
}

/// Grid index whose codeword is matched to a path arriving from `p`.
pub fn matched_index(cfg: &ArrayConfig, p: &SphericalPoint) -> BeamIndex {
    BeamIndex::new(
        nearest_grid_index(-p.u(), cfg.n_y),
        nearest_grid_index(-p.v(), cfg.n_z),
    )
}

/// Exact beam gain `|b(θ, φ, r)^H a(u_n, v_m)|`.
pub fn beam_gain(cfg: &ArrayConfig, p: &SphericalPoint, idx: BeamIndex) -> Result<f64> {
    let b = steering_vector(cfg, p)?;
    let a = dft_codeword(cfg, idx)?;
    Ok(inner(&b, &a).norm())
}

/// Product of the axis-wise Fresnel-approximated gains.
pub fn separable_beam_gain(cfg: &ArrayConfig, p: &SphericalPoint, idx: BeamIndex) -> Result<f64> {
    idx.check(cfg)?;
    if !(p.r > 0.0) {
        return Err(Error::NonPositiveRange(p.r));
    }
    let (d, lam) = (cfg.spacing(), cfg.wavelength());
    let gy = inner(
        &axis_fresnel_vector(cfg.n_y, d, lam, p.u(), p.r),
        &axis_dft_vector(cfg.n_y, d / lam, idx.u(cfg.n_y)),
    )
    .norm();
    let gz = inner(
        &axis_fresnel_vector(cfg.n_z, d, lam, p.v(), p.r),
        &axis_dft_vector(cfg.n_z, d / lam, idx.v(cfg.n_z)),
    )
    .norm();
    Ok(gy * gz)
}

/// Predicted 6-dB width `N_axis d (1 - ξ²) / r`.
pub fn predicted_lobe_width(cfg: &ArrayConfig, axis: Axis, xi: f64, r: f64) -> f64 {
    let len = match axis {
        Axis::Y => cfg.n_y,
        Axis::Z => cfg.n_z,
    };
    len as f64 * cfg.spacing() * (1.0 - xi * xi) / r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LobeWidthReport {
    pub axis: Axis,
    pub b_measured: f64,
    pub b_predicted: f64,
    /// Samples per unit of `u` (or `v`).
    pub grid_resolution: f64,
    /// The superlevel set has more than one connected run.
    pub disconnected: bool,
    /// The predicted width is below one DFT grid spacing, so the measured
    /// width is set by the aperture rather than by near-field spreading.
    pub far_field: bool,
}

pub const DEFAULT_LOBE_RESOLUTION: usize = 4096;

/// Measures the axis-wise 6-dB lobe width of a path on a fine grid over `[-1, 1]`.
pub fn measure_lobe_width(
    cfg: &ArrayConfig,
    p: &SphericalPoint,
    axis: Axis,
    resolution: usize,
) -> Result<LobeWidthReport> {
    if resolution < 256 {
        return Err(Error::InvalidParameter(format!(
            "lobe resolution {resolution} < 256"
        )));
    }
    if !(p.r > 0.0) {
        return Err(Error::NonPositiveRange(p.r));
    }
    let (len, xi0) = match axis {
        Axis::Y => (cfg.n_y, p.u()),
        Axis::Z => (cfg.n_z, p.v()),
    };
    let (d, lam) = (cfg.spacing(), cfg.wavelength());
    let b = axis_fresnel_vector(len, d, lam, xi0, p.r);
    let response = |x: f64| inner(&b, &axis_dft_vector(len, d / lam, x)).norm();
    // matched direction is mirrored, see module docs
    let center = response(-xi0);
    if !(center > 0.0) {
        return Err(Error::EmptyLobe);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut runs = 0usize;
    let mut inside = false;
    for k in 0..resolution {
        let x = -1.0 + 2.0 * k as f64 / (resolution - 1) as f64;
        let above = response(x) / center >= 0.5;
        if above {
            lo = lo.min(x);
            hi = hi.max(x);
            if !inside {
                runs += 1;
            }
        }
        inside = above;
    }
    if runs == 0 {
        return Err(Error::EmptyLobe);
    }
    let b_predicted = predicted_lobe_width(cfg, axis, xi0, p.r);
    Ok(LobeWidthReport {
        axis,
        b_measured: hi - lo,
        b_predicted,
        grid_resolution: (resolution - 1) as f64 / 2.0,
        disconnected: runs > 1,
        far_field: b_predicted < 2.0 / len as f64,
    })
}

/// DFT indices inside the rectangle of predicted 6-dB widths around the
/// matched peak. Each half-width is floored at one grid spacing.
pub fn lobe_rectangle(cfg: &ArrayConfig, p: &SphericalPoint) -> Vec<BeamIndex> {
    let (dy, dz) = (2.0 / cfg.n_y as f64, 2.0 / cfg.n_z as f64);
    let hy = (predicted_lobe_width(cfg, Axis::Y, p.u(), p.r) / 2.0).max(dy);
    let hz = (predicted_lobe_width(cfg, Axis::Z, p.v(), p.r) / 2.0).max(dz);
    let (cu, cv) = (-p.u(), -p.v());
    let mut out = Vec::new();
    for n in 0..cfg.n_y {
        if (grid_point(n, cfg.n_y) - cu).abs() > hy + 1e-12 {
            continue;
        }
        for m in 0..cfg.n_z {
            if (grid_point(m, cfg.n_z) - cv).abs() <= hz + 1e-12 {
                out.push(BeamIndex::new(n, m));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparsityEstimate {
    pub expected_k: f64,
    pub xi_r: f64,
    pub xi_vs: f64,
    pub mu2: f64,
    pub mu4: f64,
    pub nu2: f64,
}

/// `E[x^p]` for `x ~ U[a, b]`, with the point-mass limit when `a == b`.
fn uniform_moment(a: f64, b: f64, p: i32) -> f64 {
    if (b - a).abs() < 1e-15 {
        a.powi(p)
    } else {
        (b.powi(p + 1) - a.powi(p + 1)) / ((p + 1) as f64 * (b - a))
    }
}

/// Closed-form expected number of active DFT coefficients.
pub fn expected_sparsity(cfg: &ArrayConfig, prior: &ScenarioPrior) -> Result<SparsityEstimate> {
    prior.validate()?;
    let [v1, v2] = prior.v_range;
    let [s1, s2] = prior.s_range;
    let [r1, r2] = prior.r_range;
    let mu2 = uniform_moment(v1, v2, 2);
    let mu4 = uniform_moment(v1, v2, 4);
    let nu2 = uniform_moment(s1, s2, 2);
    let xi_vs = (1.0 - mu2) - nu2 * (1.0 - 2.0 * mu2 + mu4);
    let xi_r = if (r2 - r1).abs() < 1e-15 * r1 {
        1.0 / (r1 * r1)
    } else {
        (1.0 / r1 - 1.0 / r2) / (r2 - r1)
    };
    Ok(SparsityEstimate {
        expected_k: sparsity_prefactor(cfg, prior.num_paths) * xi_vs * xi_r,
        xi_r,
        xi_vs,
        mu2,
        mu4,
        nu2,
    })
}

/// `L N_y N_z d² / (Δ_y Δ_z)`.
fn sparsity_prefactor(cfg: &ArrayConfig, num_paths: usize) -> f64 {
    let d = cfg.spacing();
    let (dy, dz) = (2.0 / cfg.n_y as f64, 2.0 / cfg.n_z as f64);
    num_paths as f64 * (cfg.n_y * cfg.n_z) as f64 * d * d / (dy * dz)
}

/// Monte-Carlo estimate of the same expectation by sampling `(v, s, r)`.
/// Returns `(mean, standard error)`.
pub fn sparsity_monte_carlo<R: Rng + ?Sized>(
    cfg: &ArrayConfig,
    prior: &ScenarioPrior,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    prior.validate()?;
    let draw = |rng: &mut R, [a, b]: [f64; 2]| if a == b { a } else { rng.random_range(a..b) };
    let pre = sparsity_prefactor(cfg, prior.num_paths);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let v = draw(rng, prior.v_range);
        let s = draw(rng, prior.s_range);
        let r = draw(rng, prior.r_range);
        let u = (1.0 - v * v).sqrt() * s;
        let x = pre * (1.0 - u * u) * (1.0 - v * v) / (r * r);
        sum += x;
        sum2 += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
