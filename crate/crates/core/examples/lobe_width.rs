//! Measured 6-dB lobe width along the long axis against `N d (1 - u²) / r`.

use nfbt::beamspace::{measure_lobe_width, Axis, DEFAULT_LOBE_RESOLUTION};
use nfbt::channel::SphericalPoint;
use nfbt::validation::reference_array;

fn main() -> nfbt::Result<()> {
    let cfg = reference_array();
    let r_r = cfg.rayleigh_distance();
    println!(
        "{:>8} {:>6} {:>10} {:>10} {:>9}",
        "r [m]", "u", "measured", "predicted", "far"
    );
    for frac in [50.0, 20.0, 10.0, 5.0, 1.0] {
        for u in [0.0, 0.4] {
            let p = SphericalPoint::from_uvr(u, 0.0, r_r / frac);
            let rep = measure_lobe_width(&cfg, &p, Axis::Y, DEFAULT_LOBE_RESOLUTION)?;
            println!(
                "{:>8.3} {:>6.2} {:>10.4} {:>10.4} {:>9}",
                p.r, u, rep.b_measured, rep.b_predicted, rep.far_field
            );
        }
    }
    Ok(())
}
