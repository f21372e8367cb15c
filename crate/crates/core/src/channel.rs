//! Near-field multipath channel for a uniform planar array (UPA).
//!
//! The array lies in the y-z plane, centered at the origin. Element `(i, j)`
//! sits at `(0, δ_i d, δ_j d)` with `δ_i = (2i - n_y + 1) / 2`. Channel and
//! steering vectors are flattened row-major with the y index outer and the z
//! index inner (`i * n_z + j`), which matches the Kronecker order `a_y ⊗ a_z`
//! used by the beamspace codebook.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_normal, CVec};

/// Speed of light [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_y: usize,
    pub n_z: usize,
    /// Carrier frequency [Hz].
    pub f_c: f64,
    /// Element spacing [m]. `None` means half a wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

impl ArrayConfig {
    /// Half-wavelength UPA.
    pub fn new(n_y: usize, n_z: usize, f_c: f64) -> Result<Self> {
        let cfg = Self {
            n_y,
            n_z,
            f_c,
            d: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_spacing(n_y: usize, n_z: usize, f_c: f64, d: f64) -> Result<Self> {
        let cfg = Self {
            n_y,
            n_z,
            f_c,
            d: Some(d),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y == 0 || self.n_z == 0 {
            return Err(Error::InvalidArray("antenna counts must be >= 1".into()));
        }
        if !(self.f_c.is_finite() && self.f_c > 0.0) {
            return Err(Error::InvalidArray(
                "carrier frequency must be positive".into(),
            ));
        }
        if let Some(d) = self.d {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidArray(
                    "element spacing must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    pub fn spacing(&self) -> f64 {
        self.d.unwrap_or_else(|| self.wavelength() / 2.0)
    }

    pub fn num_elements(&self) -> usize {
        self.n_y * self.n_z
    }

    /// Diagonal of the element grid, `sqrt(((n_y-1)d)^2 + ((n_z-1)d)^2)`.
    pub fn aperture(&self) -> f64 {
        let d = self.spacing();
        let ly = (self.n_y as f64 - 1.0) * d;
        let lz = (self.n_z as f64 - 1.0) * d;
        ly.hypot(lz)
    }

    pub fn fresnel_distance(&self) -> f64 {
        let big_d = self.aperture();
        0.62 * (big_d.powi(3) / self.wavelength()).sqrt()
    }

    pub fn rayleigh_distance(&self) -> f64 {
        let big_d = self.aperture();
        2.0 * big_d * big_d / self.wavelength()
    }

    /// Centered offset `δ_i` along an axis with `n` elements.
    pub fn offset(i: usize, n: usize) -> f64 {
        (2.0 * i as f64 - n as f64 + 1.0) / 2.0
    }

    pub fn element_position(&self, i: usize, j: usize) -> Result<[f64; 3]> {
        if i >= self.n_y || j >= self.n_z {
            return Err(Error::IndexOutOfRange(i, j, self.n_y, self.n_z));
        }
        let d = self.spacing();
        Ok([
            0.0,
            Self::offset(i, self.n_y) * d,
            Self::offset(j, self.n_z) * d,
        ])
    }
}

/// A point given by range, elevation and azimuth relative to the array center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    /// Builds the point from `v = cos θ`, `s = sin φ` and range; the azimuth
    /// is taken in the front half-space (`cos φ >= 0`).
    pub fn from_vsr(v: f64, s: f64, r: f64) -> Self {
        Self {
            r,
            theta: v.clamp(-1.0, 1.0).acos(),
            phi: s.clamp(-1.0, 1.0).asin(),
        }
    }

    /// Builds the point from the beamspace coordinates `(u, v)` and range.
    /// Requires `u^2 + v^2 <= 1`.
    pub fn from_uvr(u: f64, v: f64, r: f64) -> Self {
        let st = (1.0 - v * v).max(0.0).sqrt();
        let s = if st > 0.0 { u / st } else { 0.0 };
        Self::from_vsr(v, s, r)
    }

    pub fn u(&self) -> f64 {
        self.theta.sin() * self.phi.sin()
    }

    pub fn v(&self) -> f64 {
        self.theta.cos()
    }

    pub fn direction(&self) -> [f64; 3] {
        let st = self.theta.sin();
        [st * self.phi.cos(), st * self.phi.sin(), self.theta.cos()]
    }

    pub fn position(&self) -> [f64; 3] {
        let q = self.direction();
        [self.r * q[0], self.r * q[1], self.r * q[2]]
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Near-field steering vector `b(θ, φ, r)`, unit norm.
pub fn steering_vector(cfg: &ArrayConfig, p: &SphericalPoint) -> Result<CVec> {
    if !(p.r > 0.0) {
        return Err(Error::NonPositiveRange(p.r));
    }
    let k = 2.0 * PI / cfg.wavelength();
    let d = cfg.spacing();
    let q = p.direction();
    let scale = 1.0 / (cfg.num_elements() as f64).sqrt();
    let mut out = Vec::with_capacity(cfg.num_elements());
    for i in 0..cfg.n_y {
        let y = ArrayConfig::offset(i, cfg.n_y) * d;
        for j in 0..cfg.n_z {
            let z = ArrayConfig::offset(j, cfg.n_z) * d;
            // ||r q - p|| - r without cancellation at large r
            let num = y * y + z * z - 2.0 * p.r * (q[1] * y + q[2] * z);
            let den = ((p.r * q[0]).powi(2) + (p.r * q[1] - y).powi(2) + (p.r * q[2] - z).powi(2))
                .sqrt()
                + p.r;
            let excess = num / den;
            out.push(Complex64::from_polar(scale, -k * excess));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathKind {
    LoS,
    NLoS {
        /// Scatterer-to-user distance `r_{ℓ,1}` [m].
        scatter_to_user: f64,
        /// Reflection coefficient `p_ℓ`.
        reflection: Complex64,
    },
}

/// One propagation path. For NLoS paths `point` is the scatterer position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub kind: PathKind,
    pub point: SphericalPoint,
}

impl PathSpec {
    pub fn los(point: SphericalPoint) -> Self {
        Self {
            kind: PathKind::LoS,
            point,
        }
    }

    pub fn nlos(point: SphericalPoint, scatter_to_user: f64, reflection: Complex64) -> Self {
        Self {
            kind: PathKind::NLoS {
                scatter_to_user,
                reflection,
            },
            point,
        }
    }

    /// Complex large-scale gain `g_ℓ` (real positive for LoS).
    pub fn gain(&self, wavelength: f64) -> Complex64 {
        match self.kind {
            PathKind::LoS => Complex64::new(wavelength / (4.0 * PI * self.point.r), 0.0),
            PathKind::NLoS {
                scatter_to_user,
                reflection,
            } => reflection * (wavelength / (4.0 * PI * self.point.r * scatter_to_user)),
        }
    }

    /// Total propagation length.
    pub fn path_length(&self) -> f64 {
        match self.kind {
            PathKind::LoS => self.point.r,
            PathKind::NLoS {
                scatter_to_user, ..
            } => self.point.r + scatter_to_user,
        }
    }

    /// Per-path channel vector `h_ℓ`.
    pub fn contribution(&self, cfg: &ArrayConfig) -> Result<CVec> {
        let lambda = cfg.wavelength();
        let b = steering_vector(cfg, &self.point)?;
        let coef = self.gain(lambda)
            * (cfg.num_elements() as f64).sqrt()
            * Complex64::from_polar(1.0, -2.0 * PI * self.path_length() / lambda);
        Ok(b.into_iter().map(|x| x * coef).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub h: CVec,
    pub paths: Vec<PathSpec>,
}

impl Channel {
    pub fn norm_sqr(&self) -> f64 {
        crate::linalg::norm_sqr(&self.h)
    }
}

pub fn generate_channel(cfg: &ArrayConfig, paths: &[PathSpec]) -> Result<Channel> {
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    let mut h = vec![Complex64::new(0.0, 0.0); cfg.num_elements()];
    for p in paths {
        for (acc, x) in h.iter_mut().zip(p.contribution(cfg)?) {
            *acc += x;
        }
    }
    Ok(Channel {
        h,
        paths: paths.to_vec(),
    })
}

/// Independent uniform priors on `v = cos θ`, `s = sin φ` and range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioPrior {
    pub v_range: [f64; 2],
    pub s_range: [f64; 2],
    pub r_range: [f64; 2],
    pub num_paths: usize,
}

impl ScenarioPrior {
    /// Checks ranges; point masses (`lo == hi`) are accepted here, sampling
    /// additionally needs a nondegenerate range interval.
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("v", self.v_range), ("s", self.s_range)] {
            if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo > hi {
                return Err(Error::DegeneratePrior(format!("{name} range [{lo}, {hi}]")));
            }
        }
        let [r1, r2] = self.r_range;
        if !(r1 > 0.0 && r1 <= r2 && r2.is_finite()) {
            return Err(Error::DegeneratePrior(format!("r range [{r1}, {r2}]")));
        }
        if self.num_paths == 0 {
            return Err(Error::DegeneratePrior("num_paths must be >= 1".into()));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn draw_point<R: Rng + ?Sized>(prior: &ScenarioPrior, rng: &mut R) -> SphericalPoint {
    let v = uniform(rng, prior.v_range);
    let s = uniform(rng, prior.s_range);
    let r = uniform(rng, prior.r_range);
    SphericalPoint::from_vsr(v, s, r)
}

/// Draws one scenario: a LoS path to the user and `L - 1` single-bounce
/// scatterers, all positions from the same prior.
pub fn sample_scenario<R: Rng + ?Sized>(
    prior: &ScenarioPrior,
    rng: &mut R,
) -> Result<Vec<PathSpec>> {
    sample_scenario_with_user_range(prior, None, rng)
}

/// Like [`sample_scenario`] but optionally pins the user (LoS) range.
pub fn sample_scenario_with_user_range<R: Rng + ?Sized>(
    prior: &ScenarioPrior,
    user_range: Option<f64>,
    rng: &mut R,
) -> Result<Vec<PathSpec>> {
    prior.validate()?;
    if prior.r_range[0] >= prior.r_range[1] {
        return Err(Error::DegeneratePrior("sampling needs r1 < r2".into()));
    }
    if let Some(r) = user_range {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRange(r));
        }
    }
    let mut user = draw_point(prior, rng);
    if let Some(r) = user_range {
        user.r = r;
    }
    let user_pos = user.position();
    let mut paths = Vec::with_capacity(prior.num_paths);
    paths.push(PathSpec::los(user));
    for _ in 1..prior.num_paths {
        let sc = draw_point(prior, rng);
        let r1 = dist(user_pos, sc.position());
        let p = complex_normal(rng, 1.0);
        paths.push(PathSpec::nlos(sc, r1, p));
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, norm};
    use crate::rng::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn element_position_examples() {
        let cfg = ArrayConfig::with_spacing(2, 1, 28e9, 1.0).unwrap();
        assert_eq!(cfg.element_position(0, 0).unwrap(), [0.0, -0.5, 0.0]);
        let cfg = ArrayConfig::with_spacing(3, 3, 28e9, 0.005).unwrap();
        let p = cfg.element_position(2, 1).unwrap();
        assert!((p[1] - 0.005).abs() < 1e-15 && p[2].abs() < 1e-15);
        assert!(cfg.element_position(3, 0).is_err());
    }

    #[test]
    fn array_is_centered() {
        let cfg = ArrayConfig::new(128, 16, 28e9).unwrap();
        let mut sum = [0.0; 3];
        for i in 0..128 {
            for j in 0..16 {
                let p = cfg.element_position(i, j).unwrap();
                (0..3).for_each(|k| sum[k] += p[k]);
            }
        }
        assert!(sum.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn fresnel_and_rayleigh() {
        let cfg = ArrayConfig::new(128, 16, 28e9).unwrap();
        let d = cfg.spacing();
        let big_d = ((127.0 * d).powi(2) + (15.0 * d).powi(2)).sqrt();
        let lam = cfg.wavelength();
        let rf = 0.62 * (big_d.powi(3) / lam).sqrt();
        let rr = 2.0 * big_d * big_d / lam;
        assert!((cfg.fresnel_distance() - rf).abs() < 1e-12 * rf);
        assert!((cfg.rayleigh_distance() - rr).abs() < 1e-12 * rr);
        assert!(cfg.fresnel_distance() < cfg.rayleigh_distance());
    }

    #[test]
    fn steering_single_element_and_far_field() {
        let cfg = ArrayConfig::new(1, 1, 28e9).unwrap();
        let b = steering_vector(&cfg, &SphericalPoint::new(3.0, 1.0, 0.2)).unwrap();
        assert!((b[0] - c(1.0, 0.0)).norm() < 1e-15);

        let cfg = ArrayConfig::new(8, 1, 28e9).unwrap();
        let p = SphericalPoint::from_uvr(0.0, 0.0, 1e6);
        let b = steering_vector(&cfg, &p).unwrap();
        let a = vec![c(1.0 / 8f64.sqrt(), 0.0); 8];
        assert!((inner(&b, &a).norm() - 1.0).abs() < 1e-6);
        assert!(steering_vector(&cfg, &SphericalPoint::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn single_los_unit_gain() {
        let cfg = ArrayConfig::new(1, 1, 28e9).unwrap();
        let lam = cfg.wavelength();
        let r0 = lam / (4.0 * PI);
        let ch =
            generate_channel(&cfg, &[PathSpec::los(SphericalPoint::new(r0, 1.0, 0.3))]).unwrap();
        let expected = Complex64::from_polar(1.0, -2.0 * PI * r0 / lam);
        assert!((ch.h[0] - expected).norm() < 1e-12);
        assert!((ch.h[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_reflections_cancel() {
        let cfg = ArrayConfig::new(4, 2, 28e9).unwrap();
        let los = PathSpec::los(SphericalPoint::from_uvr(0.1, 0.2, 2.0));
        let sc = SphericalPoint::from_uvr(-0.3, 0.1, 1.5);
        let p = c(0.3, -0.8);
        let a = PathSpec::nlos(sc, 1.2, p);
        let b = PathSpec::nlos(sc, 1.2, -p);
        let h0 = generate_channel(&cfg, &[los]).unwrap().h;
        let h = generate_channel(&cfg, &[los, a, b]).unwrap().h;
        let diff: f64 = h.iter().zip(&h0).map(|(x, y)| (x - y).norm()).sum();
        assert!(diff < 1e-15);
        assert_eq!(generate_channel(&cfg, &[]).unwrap_err(), Error::EmptyPaths);
    }

    #[test]
    fn scenario_shapes_and_determinism() {
        let prior = ScenarioPrior {
            v_range: [-0.5, 0.5],
            s_range: [-0.5, 0.5],
            r_range: [1.0, 5.0],
            num_paths: 1,
        };
        let paths = sample_scenario(&prior, &mut stream(&[1])).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].kind, PathKind::LoS);

        let prior = ScenarioPrior {
            num_paths: 4,
            ..prior
        };
        let a = sample_scenario(&prior, &mut stream(&[9, 2])).unwrap();
        let b = sample_scenario(&prior, &mut stream(&[9, 2])).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a[1].kind, PathKind::NLoS { .. }));

        let bad = ScenarioPrior {
            r_range: [2.0, 2.0],
            ..prior
        };
        assert!(sample_scenario(&bad, &mut stream(&[0])).is_err());
        let bad = ScenarioPrior {
            v_range: [0.5, -0.5],
            ..prior
        };
        assert!(sample_scenario(&bad, &mut stream(&[0])).is_err());
    }

    #[test]
    fn scatter_to_user_distance_matches_geometry() {
        let prior = ScenarioPrior {
            v_range: [-0.5, 0.5],
            s_range: [-0.5, 0.5],
            r_range: [1.0, 5.0],
            num_paths: 3,
        };
        let paths = sample_scenario(&prior, &mut stream(&[4])).unwrap();
        let user = paths[0].point.position();
        for p in &paths[1..] {
            let PathKind::NLoS {
                scatter_to_user, ..
            } = p.kind
            else {
                panic!()
            };
            assert!((scatter_to_user - dist(user, p.point.position())).abs() < 1e-12);
        }
    }

    #[test]
    fn uv_round_trip() {
        let p = SphericalPoint::from_uvr(0.3, -0.4, 7.0);
        assert!((p.u() - 0.3).abs() < 1e-12 && (p.v() + 0.4).abs() < 1e-12);
        let b = steering_vector(&ArrayConfig::new(5, 3, 28e9).unwrap(), &p).unwrap();
        assert!((norm(&b) - 1.0).abs() < 1e-12);
    }
}
