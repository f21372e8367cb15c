//! Both stages on one desk trial, with the traces they leave behind.

use nfbt::baselines::Method;
use nfbt::harness::{run_trial_detailed, SimConfig};

fn main() -> nfbt::Result<()> {
    let cfg = SimConfig::desk();
    let d = run_trial_detailed(&cfg, Method::LseRSparta, 0.0, 3)?;
    let st = d.stage1.as_ref().expect("proposed method runs stage I");
    println!(
        "paths = {}, sigma^2 = {:.3e}",
        d.channel.paths.len(),
        d.sigma_sq
    );
    println!("tau = {:.3e}, epsilon = {:.3e}", st.tau, st.epsilon);
    println!(
        "stage I: {} probes, {} LSE steps, |S| = {}",
        st.probes_used,
        st.lse_steps,
        st.support.len()
    );
    println!(
        "stage II: {} probes, {} iterations",
        d.result.probes_used - st.probes_used,
        d.result.stage2_iters
    );
    if let (Some(first), Some(last)) = (d.traces.stage2.first(), d.traces.stage2.last()) {
        println!("stage II loss {:.4e} -> {:.4e}", first.loss, last.loss);
    }
    println!("rho = {:.4}", d.result.rho);
    Ok(())
}
