//! Every method on the same channel and noise level.

use nfbt::baselines::Method;
use nfbt::harness::{run_trial, SimConfig};

fn main() {
    let cfg = SimConfig::desk();
    for snr_db in [-10.0, 0.0, 10.0] {
        for m in Method::ALL {
            let r = run_trial(&cfg, m, snr_db, 0);
            println!(
                "SNR {snr_db:>5} dB {:<14} rho = {:.4} probes = {} support = {}",
                r.method, r.rho, r.probes_used, r.support_size
            );
        }
    }
}
