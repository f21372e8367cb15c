//! Draws one multipath scenario on the desk array and prints its paths.

use nfbt::channel::{generate_channel, sample_scenario, ArrayConfig, PathKind};
use nfbt::harness::PriorConfig;
use nfbt::rng::stream;

fn main() -> nfbt::Result<()> {
    let array = ArrayConfig::new(32, 8, 28e9)?;
    println!(
        "N = {}, aperture = {:.4} m",
        array.num_elements(),
        array.aperture()
    );
    println!(
        "r_F = {:.3} m, r_R = {:.3} m",
        array.fresnel_distance(),
        array.rayleigh_distance()
    );

    let prior = PriorConfig::default().resolve(&array)?;
    let paths = sample_scenario(&prior, &mut stream(&[1]))?;
    let ch = generate_channel(&array, &paths)?;
    for (l, p) in ch.paths.iter().enumerate() {
        let kind = match p.kind {
            PathKind::LoS => "LoS ",
            PathKind::NLoS { .. } => "NLoS",
        };
        println!(
            "path {l} {kind} u = {:+.3} v = {:+.3} r = {:.3} m |g| = {:.3e}",
            p.point.u(),
            p.point.v(),
            p.point.r,
            p.gain(array.wavelength()).norm()
        );
    }
    println!("||h||^2 = {:.4e}", ch.norm_sqr());
    Ok(())
}
