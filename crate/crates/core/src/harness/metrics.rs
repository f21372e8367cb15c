use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, norm_sqr};

/// `σ² = ‖h‖² / (N · 10^{snr_db/10})`.
pub fn snr_to_noise_power(h: &[Complex64], snr_db: f64) -> Result<f64> {
    let e = norm_sqr(h);
    if !(e > 0.0) {
        return Err(Error::ZeroChannel);
    }
    Ok(e / (h.len() as f64 * 10f64.powf(snr_db / 10.0)))
}

/// `ρ = |h^H ĥ| / (‖h‖ ‖ĥ‖)`, clamped to `[0, 1]`. Zero vectors are an error.
pub fn correlation(h: &[Complex64], h_hat: &[Complex64]) -> Result<f64> {
    if h.len() != h_hat.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            got: h_hat.len(),
        });
    }
    let d = norm(h) * norm(h_hat);
    if !(d > 0.0) {
        return Err(Error::ZeroChannel);
    }
    Ok((inner(h, h_hat).norm() / d).min(1.0))
}

/// Sample mean and standard error (`s / √n`, `s` with `n - 1` denominator).
pub fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}
