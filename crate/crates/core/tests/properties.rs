use num_complex::Complex64;
use proptest::prelude::*;

use nfbt::beamspace::Codebook;
use nfbt::channel::ArrayConfig;
use nfbt::gp_lse::{debias_power, GpPosterior, GridKernel, KernelParams};
use nfbt::harness::correlation;
use nfbt::phase_retrieval::{pseudo_amplitude_bound_check, rician_denoise};

fn cvec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im)),
        len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_is_scale_and_phase_invariant(
        h in cvec(16),
        g in cvec(16),
        scale in 0.01f64..100.0,
        phase in -3.2f64..3.2,
    ) {
        prop_assume!(h.iter().any(|x| x.norm() > 1e-3) && g.iter().any(|x| x.norm() > 1e-3));
        let rho = correlation(&h, &g).unwrap();
        let c = Complex64::from_polar(scale, phase);
        let g2: Vec<Complex64> = g.iter().map(|x| c * x).collect();
        prop_assert!((0.0..=1.0).contains(&rho));
        prop_assert!((correlation(&h, &g2).unwrap() - rho).abs() < 1e-12);
    }

    #[test]
    fn beamspace_round_trip(h in cvec(32)) {
        let cb = Codebook::new(&ArrayConfig::new(8, 4, 28e9).unwrap()).unwrap();
        let back = cb.from_beamspace(&cb.to_beamspace(&h).unwrap()).unwrap();
        for (a, b) in h.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn debias_is_unbiased_shift(y in 0.0f64..10.0, s2 in 0.0f64..5.0) {
        prop_assert!((debias_power(y, s2) + s2 - y * y).abs() < 1e-12);
    }

    #[test]
    fn denoised_amplitude_is_nonnegative_and_below_observation(
        y in prop::collection::vec(0.0f64..5.0, 1..20),
        s2 in 0.0f64..2.0,
    ) {
        let pa = rician_denoise(&y, s2).unwrap();
        for (p, v) in pa.psi.iter().zip(&y) {
            prop_assert!(*p >= 0.0 && *p <= *v + 1e-12);
        }
    }

    #[test]
    fn pseudo_amplitude_perturbation_bound(a in 0.01f64..10.0, frac in -0.5f64..0.5) {
        prop_assert!(pseudo_amplitude_bound_check(a, frac * a * a));
    }

    #[test]
    fn gp_variance_stays_in_unit_interval(
        alpha in 0.0f64..1.0,
        ell in 0.1f64..5.0,
        probes in prop::collection::vec((0usize..24, -1.0f64..2.0), 1..30),
        s2 in 1e-4f64..1.0,
    ) {
        let k = GridKernel::new(KernelParams::new(alpha, ell, ell).unwrap(), 6, 4).unwrap();
        let mut gp = GpPosterior::new(k, s2).unwrap();
        for (i, z) in probes {
            gp.update(i, z).unwrap();
        }
        for v in gp.variances() {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&v), "variance {}", v);
        }
    }
}
