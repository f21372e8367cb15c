use num_complex::Complex64;
use rand::Rng;

use crate::beamspace::{BeamIndex, Codebook};
use crate::error::{Error, Result};
use crate::linalg::{complex_normal, complex_normal_vec, inner, CVec};

/// Gaussian masks over an ordered DFT support.
#[derive(Debug, Clone)]
pub struct SensingSet {
    support: Vec<BeamIndex>,
    masks: Vec<CVec>,
}

impl SensingSet {
    /// Draws `m2` masks `g_p ~ CN(0, I/K)`.
    pub fn build<R: Rng + ?Sized>(support: &[BeamIndex], m2: usize, rng: &mut R) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if m2 == 0 {
            return Err(Error::InvalidParameter(
                "need at least one measurement".into(),
            ));
        }
        let k = support.len();
        let masks = (0..m2)
            .map(|_| complex_normal_vec(rng, k, 1.0 / k as f64))
            .collect();
        Ok(Self {
            support: support.to_vec(),
            masks,
        })
    }

    /// Uses caller-provided masks, each of length `|support|`.
    pub fn from_masks(support: &[BeamIndex], masks: Vec<CVec>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if masks.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one measurement".into(),
            ));
        }
        if let Some(bad) = masks.iter().find(|g| g.len() != support.len()) {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: bad.len(),
            });
        }
        Ok(Self {
            support: support.to_vec(),
            masks,
        })
    }

    pub fn support(&self) -> &[BeamIndex] {
        &self.support
    }

    pub fn masks(&self) -> &[CVec] {
        &self.masks
    }

    /// `K = |Ŝ|`
    pub fn dim(&self) -> usize {
        self.support.len()
    }

    /// `M₂`
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Probing beam `v_p = F_Ŝ^H g_p`.
    pub fn beam(&self, cb: &Codebook, p: usize) -> Result<CVec> {
        cb.synthesize(&self.support, &self.masks[p])
    }

    /// `s_Ŝ`, the restriction of a full beamspace vector to the support.
    pub fn restrict(&self, s: &[Complex64], n_z: usize) -> CVec {
        self.support.iter().map(|i| s[i.linear(n_z)]).collect()
    }
}

/// `y_p = |h^H v_p + w_p|`, with each probing beam synthesized explicitly.
pub fn observe<R: Rng + ?Sized>(
    h: &[Complex64],
    cb: &Codebook,
    set: &SensingSet,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if h.len() != cb.len() {
        return Err(Error::LengthMismatch {
            expected: cb.len(),
            got: h.len(),
        });
    }
    (0..set.len())
        .map(|p| {
            let v = set.beam(cb, p)?;
            Ok((inner(h, &v) + complex_normal(rng, sigma_sq)).norm())
        })
        .collect()
}

/// `y_p = |s_Ŝ^H g_p + w_p|`. Equal to [`observe`] for the same noise draws,
/// since `h^H F_Ŝ^H g = (F_Ŝ h)^H g`.
pub fn observe_lowdim<R: Rng + ?Sized>(
    s_support: &[Complex64],
    set: &SensingSet,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if s_support.len() != set.dim() {
        return Err(Error::LengthMismatch {
            expected: set.dim(),
            got: s_support.len(),
        });
    }
    Ok(set
        .masks
        .iter()
        .map(|g| (inner(s_support, g) + complex_normal(rng, sigma_sq)).norm())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoAmplitudes {
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
    pub sigma_sq: f64,
}

/// `ψ_p = sqrt([y_p² - σ²]₊)`.
pub fn rician_denoise(y: &[f64], sigma_sq: f64) -> Result<PseudoAmplitudes> {
    if !(sigma_sq >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise power {sigma_sq} is negative"
        )));
    }
    if let Some(bad) = y.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "amplitude {bad} is negative"
        )));
    }
    let psi = y
        .iter()
        .map(|v| (v * v - sigma_sq).max(0.0).sqrt())
        .collect();
    Ok(PseudoAmplitudes {
        y: y.to_vec(),
        psi,
        sigma_sq,
    })
}

/// Pass-through used when denoising is ablated.
pub fn identity_denoise(y: &[f64], sigma_sq: f64) -> PseudoAmplitudes {
    PseudoAmplitudes {
        y: y.to_vec(),
        psi: y.to_vec(),
        sigma_sq,
    }
}

/// `|sqrt([a² + ε]₊) - a| <= |ε|/a` whenever `|ε| <= a²/2`.
pub fn pseudo_amplitude_bound_check(a: f64, eps: f64) -> bool {
    if !(a > 0.0) || eps.abs() > a * a / 2.0 {
        return true;
    }
    ((a * a + eps).max(0.0).sqrt() - a).abs() <= eps.abs() / a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ArrayConfig;
    use crate::linalg::norm;
    use crate::rng::stream;

    fn cb() -> Codebook {
        Codebook::new(&ArrayConfig::new(8, 4, 28e9).unwrap()).unwrap()
    }

    #[test]
    fn single_index_beam_is_scaled_codeword() {
        let cb = cb();
        let idx = BeamIndex::new(3, 1);
        let set = SensingSet::build(&[idx], 4, &mut stream(&[1])).unwrap();
        let v = set.beam(&cb, 2).unwrap();
        let g = set.masks()[2][0];
        let f = cb.codeword(idx).unwrap();
        assert!(v.iter().zip(&f).all(|(a, b)| (a - g * b).norm() < 1e-12));
        assert!((norm(&v) - g.norm()).abs() < 1e-12);
    }

    #[test]
    fn beams_confined_to_support_span() {
        let cb = cb();
        let support = [
            BeamIndex::new(0, 0),
            BeamIndex::new(5, 2),
            BeamIndex::new(7, 3),
        ];
        let set = SensingSet::build(&support, 6, &mut stream(&[2])).unwrap();
        let lin: Vec<usize> = support.iter().map(|i| i.linear(4)).collect();
        for p in 0..6 {
            let s = cb.to_beamspace(&set.beam(&cb, p).unwrap()).unwrap();
            let outside: f64 = s
                .iter()
                .enumerate()
                .filter(|(l, _)| !lin.contains(l))
                .map(|(_, x)| x.norm_sqr())
                .sum();
            assert!(outside.sqrt() < 1e-10);
        }
    }

    #[test]
    fn out_of_support_energy_is_invisible() {
        let cb = cb();
        let support = [BeamIndex::new(1, 1), BeamIndex::new(2, 3)];
        let set = SensingSet::build(&support, 5, &mut stream(&[3])).unwrap();
        let mut rng = stream(&[4]);
        let h = complex_normal_vec(&mut rng, 32, 1.0);
        let mut s = cb.to_beamspace(&h).unwrap();
        s[0] += Complex64::new(3.0, -1.0);
        let h2 = cb.from_beamspace(&s).unwrap();
        for p in 0..5 {
            let v = set.beam(&cb, p).unwrap();
            assert!((inner(&h, &v) - inner(&h2, &v)).norm() < 1e-10);
        }
    }

    #[test]
    fn mask_energy_is_one_on_average() {
        let support: Vec<BeamIndex> = (0..8).map(|l| BeamIndex::from_linear(l, 4)).collect();
        let set = SensingSet::build(&support, 10_000, &mut stream(&[5])).unwrap();
        let mean: f64 = set.masks().iter().map(|g| norm(g).powi(2)).sum::<f64>() / 10_000.0;
        assert!((mean - 1.0).abs() < 0.03);
        assert!(SensingSet::build(&[], 3, &mut stream(&[0])).is_err());
    }

    #[test]
    fn full_and_lowdim_models_agree() {
        let cb = cb();
        let support = [
            BeamIndex::new(1, 1),
            BeamIndex::new(6, 0),
            BeamIndex::new(4, 2),
        ];
        let set = SensingSet::build(&support, 7, &mut stream(&[6])).unwrap();
        let mut s = vec![Complex64::new(0.0, 0.0); 32];
        for (k, idx) in support.iter().enumerate() {
            s[idx.linear(4)] = Complex64::new(1.0 + k as f64, -0.5);
        }
        let h = cb.from_beamspace(&s).unwrap();
        let full = observe(&h, &cb, &set, 0.3, &mut stream(&[9])).unwrap();
        let low = observe_lowdim(&set.restrict(&s, 4), &set, 0.3, &mut stream(&[9])).unwrap();
        assert!(full.iter().zip(&low).all(|(a, b)| (a - b).abs() < 1e-10));
        let clean = observe_lowdim(&set.restrict(&s, 4), &set, 0.0, &mut stream(&[9])).unwrap();
        for (p, y) in clean.iter().enumerate() {
            assert_eq!(*y, inner(&set.restrict(&s, 4), &set.masks()[p]).norm());
        }
    }

    #[test]
    fn rayleigh_mean_for_zero_channel() {
        let set = SensingSet::build(&[BeamIndex::new(0, 0)], 100_000, &mut stream(&[7])).unwrap();
        let s2: f64 = 2.0;
        let y = observe_lowdim(&[Complex64::new(0.0, 0.0)], &set, s2, &mut stream(&[8])).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let want = s2.sqrt() * std::f64::consts::PI.sqrt() / 2.0;
        assert!((mean - want).abs() / want < 0.02);
    }

    #[test]
    fn denoise_clips_and_passes_through() {
        let pa = rician_denoise(&[0.5, 2.0], 1.0).unwrap();
        assert_eq!(pa.psi[0], 0.0);
        assert!((pa.psi[1] - 3f64.sqrt()).abs() < 1e-15);
        assert!(pa.psi.iter().zip(&pa.y).all(|(p, y)| p <= y));
        assert_eq!(
            rician_denoise(&[0.5, 2.0], 0.0).unwrap().psi,
            vec![0.5, 2.0]
        );
        assert!(rician_denoise(&[1.0], -1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert!(pseudo_amplitude_bound_check(1.0, 0.0));
        assert!(((5f64.sqrt() - 2.0) - 0.236).abs() < 1e-3);
        assert!(pseudo_amplitude_bound_check(2.0, 1.0));
        assert!(((0.5f64.sqrt() - 1.0).abs() - 0.293).abs() < 1e-3);
        assert!(pseudo_amplitude_bound_check(1.0, -0.5));
    }
}
