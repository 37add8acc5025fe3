use num_complex::Complex64;
use toa_core::wavepacket::{gaussian_packet, wigner, wigner_rows, Dispersion, MixedState, MomentumGrid, WavePacket};

fn grid() -> MomentumGrid {
    MomentumGrid::new(0.0, 10.0, 1024).unwrap()
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
}

#[test]
fn gaussian_moments_and_position() {
    let w = gaussian_packet(&grid(), 5.0, 0.3, -2.5).unwrap();
    assert!((w.norm() - 1.0).abs() < 1e-12);
    assert!((w.mean_momentum() - 5.0).abs() < 1e-10);
    assert!((w.momentum_variance() - 0.09).abs() < 1e-10);
    assert!((w.position_mean(0.0) + 2.5).abs() < 1e-8);
    assert!((w.inner(&w).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn position_density_matches_closed_form() {
    // |ψ(x)|² for a Gaussian is normal with spread 1/(2Δp)
    let dp = 0.25;
    let w = gaussian_packet(&grid(), 5.0, dp, 1.0).unwrap();
    let sx = 1.0 / (2.0 * dp);
    for x in [-1.0, 0.0, 1.0, 2.5, 4.0] {
        let expected = (-(x - 1.0f64).powi(2) / (2.0 * sx * sx)).exp() / (2.0 * std::f64::consts::PI * sx * sx).sqrt();
        assert!((w.value_at(x).norm_sqr() - expected).abs() < 1e-10, "x = {x}");
    }
}

#[test]
fn free_evolution() {
    let w = gaussian_packet(&grid(), 4.0, 0.25, 0.0).unwrap();
    let d = Dispersion::Nonrelativistic { m: 2.0 };
    assert_eq!(w.evolve(&d, 0.0), w);
    let later = w.evolve(&d, 3.0);
    assert!((later.norm() - 1.0).abs() < 1e-12);
    assert!((later.position_mean(6.0) - 6.0).abs() < 1e-8);
    let back = later.evolve(&d, -3.0);
    let err = back.amplitudes().iter().zip(w.amplitudes()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    assert!(err < 1e-12);
}

#[test]
fn position_round_trip() {
    let g = grid();
    let w = gaussian_packet(&g, 5.0, 0.4, 3.0).unwrap();
    let s = w.to_position(2.0);
    let amps = WavePacket::amplitudes_from_position(&g, &s).unwrap();
    let err = amps.iter().zip(w.amplitudes()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    assert!(err < 1e-10, "{err}");
    for j in (0..s.x.len()).step_by(97) {
        assert!((s.psi[j] - w.value_at(s.x[j])).norm() < 1e-10);
    }
}

#[test]
fn gaussian_wigner_matches_closed_form() {
    let g = grid();
    let (p0, dp, x0) = (5.0, 0.25, 1.5);
    let w = gaussian_packet(&g, p0, dp, x0).unwrap();
    let xs = [-1.0, 0.5, 1.5, 2.0, 4.0];
    let ps: Vec<f64> = [480usize, 500, 512, 530].iter().map(|&k| g.p(k)).collect();
    let f = wigner(&w, &xs, &ps).unwrap();
    for (i, &p) in ps.iter().enumerate() {
        let k = ((p - g.p_min()) / g.dp()).round() as usize;
        let rho = w.amplitudes()[k].norm_sqr();
        for (j, &x) in xs.iter().enumerate() {
            let expected = rho * dp * (2.0 / std::f64::consts::PI).sqrt() * (-2.0 * dp * dp * (x - x0) * (x - x0)).exp();
            assert!((f.value(i, j) - expected).abs() < 1e-9 * (1.0 + expected), "({x}, {p})");
        }
    }
}

#[test]
fn superposition_wigner_goes_negative_with_correct_marginals() {
    let g = grid();
    let a = gaussian_packet(&g, 3.0, 0.2, 0.0).unwrap();
    let b = gaussian_packet(&g, 5.0, 0.2, 0.0).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let psi = WavePacket::superpose(&[(one, &a), (one, &b)]).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-12);
    let xs = uniform(-30.0, 30.0, 1201);
    let f = wigner_rows(&psi, &xs).unwrap();
    assert!(f.min() < -0.1, "{}", f.min());
    let dx = xs[1] - xs[0];
    for i in (0..f.p.len()).step_by(23) {
        let k = ((f.p[i] - g.p_min()) / g.dp()).round() as usize;
        let marginal: f64 = f.row(i).iter().sum::<f64>() * dx;
        assert!((marginal - psi.amplitudes()[k].norm_sqr()).abs() < 1e-6);
    }
}

#[test]
fn invalid_inputs() {
    let g = grid();
    assert!(MomentumGrid::new(1.0, 1.0, 10).is_err());
    assert!(gaussian_packet(&g, 5.0, 0.0, 0.0).is_err());
    assert!(gaussian_packet(&g, 0.5, 0.25, 0.0).is_err());
    let other = MomentumGrid::new(0.0, 10.0, 512).unwrap();
    let a = gaussian_packet(&g, 5.0, 0.3, 0.0).unwrap();
    let b = gaussian_packet(&other, 5.0, 0.3, 0.0).unwrap();
    let one = Complex64::new(1.0, 0.0);
    assert!(WavePacket::superpose(&[(one, &a), (one, &b)]).is_err());
    assert!(a.inner(&b).is_err());
    let neg = MomentumGrid::new(-10.0, 10.0, 1024).unwrap();
    let c = gaussian_packet(&neg, -2.0, 0.3, 0.0).unwrap();
    assert!(c.negative_momentum_weight() > 0.99);
    assert!(c.with_positive_support().is_err());
    assert!(MixedState::new(vec![(0.7, a.clone()), (0.2, a)]).is_err());
}

#[test]
fn dispersion_limits() {
    let rel = Dispersion::Relativistic { m: 1.0 };
    let nr = Dispersion::Nonrelativistic { m: 1.0 };
    let p = 1e-3;
    assert!(((rel.energy(p) - 1.0) - nr.energy(p)).abs() < 1e-12);
    assert!((rel.velocity(1e4) - 1.0).abs() < 1e-8);
    assert!(Dispersion::Nonrelativistic { m: 0.0 }.validate().is_err());
    assert!(Dispersion::ThresholdShifted { m: 1.0, e0: 0.5 }.validate().is_ok());
    assert_eq!(Dispersion::ThresholdShifted { m: 1.0, e0: 0.5 }.energy(0.0), 0.5);
}
