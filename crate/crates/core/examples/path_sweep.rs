//! A short sweep over the number of paths at 0 dB.

use nfbt::baselines::Method;
use nfbt::harness::{run_sweep, SimConfig, SweepAxis};

fn main() -> nfbt::Result<()> {
    let mut cfg = SimConfig::desk();
    cfg.trials = 10;
    cfg.methods = vec![Method::LseRSparta, Method::ExhaustiveDft];
    cfg.sweep.axis = SweepAxis::NumPaths;
    cfg.sweep.path_grid = vec![2, 6, 12];
    let report = run_sweep(&cfg)?;
    for m in ["lse_r_sparta", "exhaustive_dft"] {
        let row: Vec<String> = report
            .series(m)
            .iter()
            .map(|(l, r)| format!("L={l}: {r:.3}"))
            .collect();
        println!("{m:<14} {}", row.join("  "));
    }
    Ok(())
}
