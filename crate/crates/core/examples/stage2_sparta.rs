//! Stage II alone: Gaussian-masked probes on a known support, Rician
//! denoising and sparse amplitude flow.

use nfbt::beamspace::{BeamIndex, Codebook};
use nfbt::channel::ArrayConfig;
use nfbt::harness::correlation;
use nfbt::linalg::{complex_normal, top_k_indices};
use nfbt::phase_retrieval::{observe_lowdim, rician_denoise, solve, SensingSet, SpartaConfig};
use nfbt::rng::stream;

fn main() -> nfbt::Result<()> {
    let array = ArrayConfig::new(16, 4, 28e9)?;
    let cb = Codebook::new(&array)?;
    let mut rng = stream(&[6]);
    let mut s = vec![num_complex::Complex64::new(0.0, 0.0); cb.len()];
    for l in [5, 9, 22, 40] {
        s[l] = complex_normal(&mut rng, 1.0);
    }
    let h = cb.from_beamspace(&s)?;
    let power: Vec<f64> = s.iter().map(|x| x.norm_sqr()).collect();
    let support: Vec<BeamIndex> = top_k_indices(&power, 8)
        .into_iter()
        .map(|l| cb.index(l))
        .collect();

    for sigma_sq in [0.0, 0.01, 0.1] {
        for m2 in [32, 64, 128] {
            let set = SensingSet::build(&support, m2, &mut stream(&[7, m2 as u64]))?;
            let y = observe_lowdim(
                &set.restrict(&s, array.n_z),
                &set,
                sigma_sq,
                &mut stream(&[8]),
            )?;
            let out = solve(
                &cb,
                &set,
                &rician_denoise(&y, sigma_sq)?,
                &SpartaConfig::default(),
            )?;
            let rho = correlation(&h, &out.estimate.h_hat)?;
            println!(
                "sigma^2 = {sigma_sq:<5} M2 = {m2:<4} rho = {rho:.5} iters = {}",
                out.estimate.iters_used
            );
        }
    }
    Ok(())
}
