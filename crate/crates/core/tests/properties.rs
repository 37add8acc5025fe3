use num_complex::Complex64;
use proptest::prelude::*;
use toa_core::detectors::{AbsorptionCoefficient, CouplingFunction, CouplingShape, DetectorModel};
use toa_core::hilbert::models::random_four_level;
use toa_core::linalg::{max_abs_diff, CMatrix};
use toa_core::oscillations::{
    fit_wavenumber, nonstandard_wavenumber_equal_momentum, oscillation_probability, standard_wavenumber_equal_momentum,
    DecoherenceKernel, OscillationScenario, Quadrature,
};
use toa_core::toa::{kijowski_density, time_integrated, toa_density_absorption, TimeGrid};
use toa_core::wavepacket::{gaussian_packet, Dispersion, MomentumGrid, WavePacket};

fn dispersion() -> impl Strategy<Value = Dispersion> {
    prop_oneof![
        (0.5f64..3.0).prop_map(|m| Dispersion::Nonrelativistic { m }),
        (0.1f64..3.0).prop_map(|m| Dispersion::Relativistic { m }),
    ]
}

fn detector() -> impl Strategy<Value = DetectorModel> {
    let u = (0.01f64..1.0, 1.0f64..6.0, 0.5f64..4.0, -1.0f64..1.0).prop_map(|(a, c, w, slope)| {
        CouplingFunction::new(CouplingShape::Gaussian { amplitude: a, center: c, width: w }).with_phase_slope(slope)
    });
    (0usize..3, 0.1f64..3.0, 0.01f64..0.5, 1.0f64..50.0, 1.0f64..100.0, u).prop_map(|(k, mu, delta, d, l, u)| match k {
        0 => DetectorModel::coherent(mu, 0.0, delta, u, l).unwrap(),
        1 => DetectorModel::decoherent(mu, d, delta, u, l).unwrap(),
        _ => DetectorModel::energy(toa_core::detectors::DensityOfStates::Constant { value: mu }, delta, u, l).unwrap(),
    })
}

fn packet() -> impl Strategy<Value = WavePacket> {
    (3.0f64..7.0, 0.15f64..0.4, -5.0f64..5.0).prop_map(|(p0, dp, x0)| {
        let g = MomentumGrid::new(0.0, 10.0, 1024).unwrap();
        gaussian_packet(&g, p0, dp, x0).unwrap().with_positive_support().unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolution_preserves_norm_and_inner_products(psi in packet(), d in dispersion(), t in -20.0f64..20.0) {
        let later = psi.evolve(&d, t);
        prop_assert!((later.norm() - 1.0).abs() < 1e-12);
        let phi = gaussian_packet(psi.grid(), 5.0, 0.3, 1.0).unwrap();
        let before = psi.inner(&phi).unwrap();
        let after = later.inner(&phi.evolve(&d, t)).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn position_round_trip(psi in packet(), centre in -20.0f64..20.0) {
        let s = psi.to_position(centre);
        let back = WavePacket::amplitudes_from_position(psi.grid(), &s).unwrap();
        let err = back.iter().zip(psi.amplitudes()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        prop_assert!(err < 1e-9);
    }

    #[test]
    fn detector_kernels_are_hermitian_with_real_nonnegative_diagonal(
        m in detector(), d in dispersion(), p in 0.5f64..8.0, q in 0.5f64..8.0,
    ) {
        let a = m.kernel(p, q, &d).unwrap();
        let b = m.kernel(q, p, &d).unwrap();
        prop_assert_eq!(a, b.conj());
        let diag = m.kernel(p, p, &d).unwrap();
        prop_assert!(diag.im == 0.0 && diag.re >= 0.0);
        let alpha = m.absorption_at(p, &d).unwrap();
        prop_assert!(alpha >= 0.0);
        prop_assert!((diag.re / d.velocity(p).abs() - alpha).abs() <= 1e-10 * alpha.max(f64::MIN_POSITIVE));
        prop_assert_eq!(m.at_distance(m.distance() + 17.0).kernel(p, p, &d).unwrap(), diag);
    }

    #[test]
    fn kijowski_density_is_normalized(psi in packet()) {
        let d = Dispersion::Nonrelativistic { m: 1.0 };
        let grid = TimeGrid::new(-10.0, 60.0, 1401).unwrap();
        let k = kijowski_density(&psi, &d, 40.0, &grid).unwrap();
        prop_assert!(k.diagnostics.min_value >= 0.0);
        prop_assert!((time_integrated(&k).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn absorption_density_is_linear_in_constant_alpha(psi in packet(), c in 0.01f64..10.0) {
        let d = Dispersion::Nonrelativistic { m: 1.0 };
        let grid = TimeGrid::new(0.0, 20.0, 81).unwrap();
        let a = toa_density_absorption(&psi, &AbsorptionCoefficient::constant(c).unwrap(), &d, 30.0, &grid).unwrap();
        let k = kijowski_density(&psi, &d, 30.0, &grid).unwrap();
        for (x, y) in a.values.iter().zip(&k.values) {
            prop_assert!((x - c * y).abs() <= 1e-12 * c * k.peak().max(1e-300));
        }
    }

    #[test]
    fn restricted_propagator_is_a_contraction(seed in 0u64..1000, eps in 0.0f64..0.5, t in 0.0f64..3.0) {
        let sys = random_four_level(seed, eps).unwrap();
        let s = sys.restricted_propagator(t, 256).unwrap().matrix;
        let norm = s.clone().svd(false, false).singular_values.max();
        prop_assert!(norm <= 1.0 + 1e-10);
        let q = sys.projector_q();
        prop_assert!(max_abs_diff(&(q * &s * q), &s) < 1e-12);
    }

    #[test]
    fn interval_probabilities_are_nonnegative(seed in 0u64..1000, t1 in 0.0f64..1.0, w in 0.05f64..1.0) {
        let sys = random_four_level(seed, 0.2).unwrap();
        for label in ["a", "b"] {
            let p = sys.detection_probability(label, t1, t1 + w, 1024, 41).unwrap().value;
            prop_assert!(p >= -1e-12);
        }
    }

    #[test]
    fn two_flavor_probabilities_are_bounded_and_conserved(
        theta in 0.0f64..1.5, m1 in 0.1f64..2.0, m2 in 0.1f64..2.0, l in 1000.0f64..3000.0,
    ) {
        let s = OscillationScenario::two_flavor([m1, m2], theta, 10.0, 50.0, 0.0, DecoherenceKernel::Delta).unwrap();
        let stay = oscillation_probability(&s, 0, 0, l, Quadrature::ClosedForm).unwrap();
        let flip = oscillation_probability(&s, 0, 1, l, Quadrature::ClosedForm).unwrap();
        prop_assert!((stay.value + flip.value - 1.0).abs() < 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&flip.value));
        prop_assert!(flip.imag.abs() <= 1e-8 * flip.value.abs().max(1e-6));
    }

    #[test]
    fn nonstandard_is_twice_standard_without_threshold(mi in 0.0f64..3.0, mj in 0.0f64..3.0, p in 0.5f64..100.0) {
        prop_assume!((mi - mj).abs() > 1e-3);
        let r = nonstandard_wavenumber_equal_momentum(mi, mj, p, 0.0) / standard_wavenumber_equal_momentum(mi, mj, p);
        prop_assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_synthetic_wavenumbers(k in 0.05f64..0.6, phase in 0.0f64..6.28, amp in 0.05f64..0.5) {
        let samples: Vec<(f64, f64)> = (0..4096)
            .map(|j| {
                let l = 800.0 * j as f64 / 4095.0;
                (l, 0.5 + amp * (k * l + phase).cos())
            })
            .collect();
        let fit = fit_wavenumber(&samples).unwrap();
        prop_assert!(((fit.k - k) / k).abs() < 5e-3);
        prop_assert!(((fit.amplitude - amp) / amp).abs() < 0.05);
    }

    #[test]
    fn unitary_mixing_required(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        prop_assume!((a * a + b * b - 1.0).abs() > 1e-3);
        let u = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(a, 0.0), Complex64::new(b, 0.0), Complex64::new(-b, 0.0), Complex64::new(a, 0.0),
        ]);
        prop_assert!(OscillationScenario::new(vec![1.0, 0.5], u, vec![10.0; 2], 50.0, 0.0, DecoherenceKernel::Delta).is_err());
    }
}
