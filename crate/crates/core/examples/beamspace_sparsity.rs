//! Expected number of active DFT coefficients: closed form, Monte Carlo,
//! and the count on one sampled channel.

use nfbt::beamspace::{expected_sparsity, sparsity_monte_carlo, Codebook};
use nfbt::channel::{generate_channel, sample_scenario, ArrayConfig};
use nfbt::harness::PriorConfig;
use nfbt::rng::stream;
use nfbt::validation::{reference_array, reference_prior};

fn main() -> nfbt::Result<()> {
    let big = reference_array();
    let prior = reference_prior(&big);
    let est = expected_sparsity(&big, &prior)?;
    let (mc, se) = sparsity_monte_carlo(&big, &prior, 200_000, &mut stream(&[3]))?;
    println!(
        "128x16, r in [r_F, r_R/20]: E[K] = {:.3} (Monte Carlo {mc:.3} ± {se:.3})",
        est.expected_k
    );

    let desk = ArrayConfig::new(32, 8, 28e9)?;
    let prior = PriorConfig::default().resolve(&desk)?;
    println!(
        "32x8, r in [r_F, r_R]: E[K] = {:.3}",
        expected_sparsity(&desk, &prior)?.expected_k
    );

    let ch = generate_channel(&desk, &sample_scenario(&prior, &mut stream(&[4]))?)?;
    let s = Codebook::new(&desk)?.to_beamspace(&ch.h)?;
    let mut power: Vec<f64> = s.iter().map(|x| x.norm_sqr()).collect();
    power.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = power.iter().sum();
    let mut acc = 0.0;
    let k90 = power.iter().take_while(|p| {
        acc += *p;
        acc - *p < 0.9 * total
    });
    println!(
        "sampled channel: {} of {} beams hold 90% of the energy",
        k90.count(),
        s.len()
    );
    Ok(())
}
