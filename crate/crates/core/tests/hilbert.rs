use num_complex::Complex64;
use toa_core::hilbert::models::{random_four_level, two_level, zeno_two_level, DephasingModel};
use toa_core::hilbert::{
    SmearingKernel, SystemOptions, SystemParts, TauWeight, TransitionSystem, DEFAULT_TROTTER_STEPS,
};
use toa_core::linalg::{identity, max_abs, max_abs_diff, CMatrix};
use toa_core::quadrature::simpson_rule;

const STEPS: usize = DEFAULT_TROTTER_STEPS;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(values.len(), values.iter().map(|v| c(*v))))
}

/// Two-level system with an extra outcome whose operator is zero.
fn with_silent_outcome(g: f64) -> TransitionSystem {
    let h = CMatrix::from_row_slice(2, 2, &[c(0.7), c(g), c(g), c(-0.7)]);
    let p = diag(&[0.0, 1.0]);
    TransitionSystem::new(
        SystemParts {
            hamiltonian: h,
            projector_p: p.clone(),
            outcomes: vec![("click".into(), p), ("silent".into(), CMatrix::zeros(2, 2))],
            rho0: diag(&[1.0, 0.0]),
            split: None,
        },
        SystemOptions::default(),
    )
    .unwrap()
}

#[test]
fn zeno_limit_and_cosine_power() {
    let sys = zeno_two_level(1.0).unwrap();
    let q = sys.projector_q().clone();
    for n in [1usize, 4, 64, 1024] {
        let s = sys.restricted_propagator(1.0, n).unwrap();
        let expected = q.map(|z| z * (1.0 / n as f64).cos().powi(n as i32));
        assert!(max_abs_diff(&s.matrix, &expected) < 1e-12, "N = {n}");
    }
    let s = sys.restricted_propagator(1.0, 1 << 14).unwrap();
    assert!(max_abs_diff(&s.matrix, &sys.zeno_limit(1.0)) < 1e-4);
    assert!(max_abs_diff(&sys.zeno_limit(1.0), &q) < 1e-15);
}

#[test]
fn trotter_convergence_estimate_shrinks() {
    let sys = random_four_level(7, 0.3).unwrap();
    let coarse = sys.restricted_propagator(2.0, 64).unwrap().convergence;
    let fine = sys.restricted_propagator(2.0, 4096).unwrap().convergence;
    assert!(fine < coarse / 10.0, "{fine} vs {coarse}");
}

#[test]
fn class_operator_vanishes_without_coupling() {
    let sys = two_level(1.0, 0.0).unwrap();
    for t in [0.0, 0.3, 2.0] {
        let cl = sys.class_operator("click", t, STEPS).unwrap();
        assert!(max_abs(&(cl * sys.projector_q())) < 1e-15);
        assert!(max_abs(&sys.class_operator_perturbative("click", t).unwrap()) == 0.0);
    }
}

#[test]
fn perturbative_at_zero_time_is_sqrt_p_times_coupling() {
    let sys = two_level(0.4, 0.2).unwrap();
    let (_, h_int) = sys.split().unwrap();
    let expected = sys.outcome_operator("click").unwrap() * h_int;
    let got = sys.class_operator_perturbative("click", 0.0).unwrap();
    assert!(max_abs_diff(&got, &expected) < 1e-15);
}

#[test]
fn perturbative_error_is_second_order() {
    let errors: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&g| {
            let sys = two_level(1.0, g).unwrap();
            let exact = sys.class_operator("click", 1.0, STEPS).unwrap();
            let approx = sys.class_operator_perturbative("click", 1.0).unwrap();
            max_abs_diff(&exact, &approx)
        })
        .collect();
    let x = [1e-1f64.ln(), 1e-2f64.ln(), 1e-3f64.ln()];
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / 3.0, y.iter().sum::<f64>() / 3.0);
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    assert!(slope >= 1.9, "slope {slope}, errors {errors:?}");
    assert!(errors[2] <= 1e-5, "{}", errors[2]);
}

#[test]
fn interval_probability_properties() {
    let sys = with_silent_outcome(0.3);
    assert_eq!(sys.detection_probability("silent", 0.0, 1.0, STEPS, 41).unwrap().value, 0.0);
    let p1 = sys.detection_probability("click", 1.0, 1.01, STEPS, 11).unwrap().value;
    let p2 = sys.detection_probability("click", 1.0, 1.02, STEPS, 11).unwrap().value;
    assert!(p1 >= 0.0 && ((p2 / p1) - 4.0).abs() < 0.05, "{p1} {p2}");
    assert!(sys.detection_probability("click", 1.0, 0.5, STEPS, 11).is_err());
    assert!(sys.detection_probability("click", 0.0, 1.0, STEPS, 1).is_err());
    assert!(sys.detection_probability("missing", 0.0, 1.0, STEPS, 11).is_err());
}

#[test]
fn kolmogorov_defect_is_twice_the_cross_term() {
    let sys = random_four_level(11, 0.2).unwrap();
    let (t1, t2, t3) = (0.0, 0.7, 1.5);
    let whole = sys.detection_probability("a", t1, t3, STEPS, 301).unwrap().value;
    let first = sys.detection_probability("a", t1, t2, STEPS, 141).unwrap().value;
    let second = sys.detection_probability("a", t2, t3, STEPS, 161).unwrap().value;
    let cross = sys.consistency_offdiagonal("a", t1, t2, t3, STEPS, 161).unwrap();
    assert!((whole - first - second - cross).abs() < 1e-9 * whole.abs().max(1e-6), "{whole} {first} {second} {cross}");
    let a = sys.additivity("a", t1, t2, t3, STEPS, 161).unwrap();
    assert!((a.defect() - a.offdiagonal).abs() < 1e-9 * a.whole);
}

#[test]
fn offdiagonal_trivial_cases() {
    let sys = random_four_level(3, 0.1).unwrap();
    assert_eq!(sys.consistency_offdiagonal("a", 0.0, 0.5, 0.5, STEPS, 21).unwrap(), 0.0);
    let free = two_level(1.0, 0.0).unwrap();
    assert_eq!(free.consistency_offdiagonal("click", 0.0, 0.5, 1.0, STEPS, 21).unwrap(), 0.0);
}

#[test]
fn offdiagonal_ratio_decreases_with_width() {
    let sys = DephasingModel::new(1.0, 0.1, vec![0.0, 3.0]).build().unwrap();
    let ratios: Vec<f64> = [0.1, 0.5, 2.0, 10.0]
        .iter()
        .map(|&w| {
            let points = ((2.0 * w / 0.02) as usize).max(40) | 1;
            sys.additivity("a", 0.0, w, 2.0 * w, STEPS, points).unwrap().relative_offdiagonal()
        })
        .collect();
    assert!(ratios.windows(2).all(|r| r[1] < r[0]), "{ratios:?}");
}

#[test]
fn povm_elements_without_coupling() {
    let sys = two_level(1.0, 0.0).unwrap();
    let k = SmearingKernel::gaussian(0.1).unwrap();
    let pi = sys.smeared_povm_element("click", 1.0, &k, STEPS, 121).unwrap();
    assert_eq!(max_abs(&pi.matrix), 0.0);
    let none = sys.no_detection_element(2.0, &k, 41, STEPS, 121).unwrap();
    assert_eq!(max_abs_diff(&none.matrix, &identity(2)), 0.0);
    for t in [0.0, 1.0, 3.0] {
        let v = sys.transition_density("click", t, TauWeight::Smeared(k), STEPS, 121).unwrap();
        assert_eq!(v.value, 0.0);
    }
}

#[test]
fn povm_positivity_sweep() {
    let sys = two_level(0.5, 0.3).unwrap();
    let k = SmearingKernel::gaussian(0.2).unwrap();
    for j in 0..20 {
        let t = 1.2 + 0.25 * j as f64;
        let pi = sys.smeared_povm_element("click", t, &k, STEPS, 121).unwrap();
        assert!(pi.min_eigenvalue >= -1e-9, "t = {t}: {}", pi.min_eigenvalue);
    }
    let none = sys.no_detection_element(3.0, &k, 61, STEPS, 121).unwrap();
    assert!(none.min_eigenvalue >= -1e-8);
}

#[test]
fn smeared_probability_is_density_convolved_with_f() {
    let sys = random_four_level(2024, 0.05).unwrap();
    let k = SmearingKernel::gaussian(0.05).unwrap();
    let t = 1.0;
    let direct = sys.smeared_probability("a", t, &k, STEPS, 241).unwrap().value;
    let (nodes, weights) = simpson_rule(t - k.f_window(), t + k.f_window(), 121);
    let convolved: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(s, w)| {
            w * k.f(t - s) * sys.transition_density_unchecked("a", *s, TauWeight::Smeared(k), STEPS, 241).unwrap().value
        })
        .sum();
    assert!(((direct - convolved) / direct).abs() < 1e-6, "{direct} vs {convolved}");
}

#[test]
fn transition_density_is_real_and_needs_a_window() {
    let sys = random_four_level(5, 0.1).unwrap();
    let v = sys
        .transition_density("b", 0.8, TauWeight::Unsmeared { half_width: Some(0.5) }, STEPS, 101)
        .unwrap();
    assert!(v.imag.abs() <= 1e-10);
    assert!(sys.transition_density("b", 0.8, TauWeight::Unsmeared { half_width: None }, STEPS, 101).is_err());
    assert!(sys.transition_density("b", -0.1, TauWeight::Unsmeared { half_width: Some(0.5) }, STEPS, 101).is_err());
}

#[test]
fn transition_density_independent_of_coarse_graining() {
    let sys = DephasingModel::new(1.0, 0.02, vec![0.0, 3.0]).build().unwrap();
    let at = |sigma: f64| {
        let k = SmearingKernel::gaussian(sigma).unwrap();
        let points = ((2.0 * k.g_window() / 0.05) as usize) | 1;
        sys.transition_density("a", 40.0, TauWeight::Smeared(k), STEPS, points).unwrap().value
    };
    let (a, b) = (at(3.0), at(6.0));
    assert!(((a - b) / b).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn rejects_inconsistent_systems() {
    let p = diag(&[0.0, 1.0]);
    let base = || SystemParts {
        hamiltonian: CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        projector_p: p.clone(),
        outcomes: vec![("click".into(), p.clone())],
        rho0: diag(&[1.0, 0.0]),
        split: None,
    };
    let mut bad = base();
    bad.hamiltonian[(0, 1)] = Complex64::new(0.0, 1.0);
    let e = TransitionSystem::new(bad, SystemOptions::default()).unwrap_err();
    assert!(e.to_string().contains("hermitian"));

    let mut bad = base();
    bad.outcomes = vec![("click".into(), p.map(|z| z * 0.5))];
    let e = TransitionSystem::new(bad, SystemOptions::default()).unwrap_err();
    assert!(e.to_string().contains("Σ_λ P_λ = P"));

    let mut bad = base();
    bad.rho0 = diag(&[0.5, 0.4]);
    assert!(TransitionSystem::new(bad, SystemOptions::default()).is_err());

    let mut bad = base();
    bad.hamiltonian[(0, 0)] = Complex64::new(f64::NAN, 0.0);
    assert!(TransitionSystem::new(bad, SystemOptions::default()).is_err());
}
