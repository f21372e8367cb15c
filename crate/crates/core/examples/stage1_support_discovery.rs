//! Stage I on one desk channel: which beams the level-set search keeps and
//! how much channel energy they hold.

use nfbt::beamspace::Codebook;
use nfbt::gp_lse::{run_stage1, Stage1Config};
use nfbt::harness::{snr_to_noise_power, trial_channel, SimConfig};
use nfbt::linalg::complex_normal;
use nfbt::rng::stream;

fn main() -> nfbt::Result<()> {
    let cfg = SimConfig::desk();
    let prior = cfg.prior.resolve(&cfg.array)?;
    let ch = trial_channel(&cfg, 0.0, 0)?;
    let cb = Codebook::new(&cfg.array)?;
    let s = cb.to_beamspace(&ch.h)?;
    let nz = cfg.array.n_z;

    for snr_db in [-10.0, 0.0, 10.0] {
        let sigma_sq = snr_to_noise_power(&ch.h, snr_db)?;
        let mut rng = stream(&[5, snr_db.to_bits()]);
        let st = run_stage1(
            &cfg.array,
            &prior,
            &Stage1Config::default(),
            cb.len(),
            sigma_sq,
            |idx| (s[idx.linear(nz)].conj() + complex_normal(&mut rng, sigma_sq)).norm(),
        )?;
        let kept: f64 = st.support.iter().map(|i| s[i.linear(nz)].norm_sqr()).sum();
        let total: f64 = s.iter().map(|x| x.norm_sqr()).sum();
        println!(
            "SNR {snr_db:>5} dB: |S| = {:>2}, probes = {}, H/L/U = {}/{}/{}, energy kept = {:.3}",
            st.support.len(),
            st.probes_used,
            st.high,
            st.low,
            st.undecided,
            kept / total
        );
    }
    Ok(())
}
