//! A short SNR sweep on the desk array. The CLI runs the full version.

use nfbt::baselines::Method;
use nfbt::harness::{run_sweep, SimConfig};

fn main() -> nfbt::Result<()> {
    let mut cfg = SimConfig::desk();
    cfg.trials = 10;
    cfg.methods = vec![Method::LseRSparta, Method::ExhaustiveDft, Method::RSparta];
    cfg.sweep.snr_grid_db = vec![-10.0, 0.0, 10.0];
    let report = run_sweep(&cfg)?;
    for p in &report.points {
        println!(
            "{:>6} dB {:<14} {:.4} ± {:.4}",
            p.axis, p.method, p.mean_rho, p.stderr
        );
    }
    Ok(())
}
