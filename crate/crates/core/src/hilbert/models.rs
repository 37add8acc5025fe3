//! Reference systems used by tests, scenarios and the acceptance suite.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{c, SystemOptions, SystemParts, TransitionSystem};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

fn projector_onto(dim: usize, levels: impl IntoIterator<Item = usize>) -> CMatrix {
    let mut p = CMatrix::zeros(dim, dim);
    for k in levels {
        p[(k, k)] = c(1.0, 0.0);
    }
    p
}

fn pure(v: &DVector<Complex64>) -> CMatrix {
    v * v.adjoint()
}

/// `H = ε σ_z + g σ_x` on `{|0⟩, |1⟩}` with `P = |1⟩⟨1|` and `ρ0 = |0⟩⟨0|`.
/// The split puts `ε σ_z` in `H0` and `g σ_x` in `H_I`.
pub fn two_level(epsilon: f64, g: f64) -> Result<TransitionSystem> {
    let h0 = CMatrix::from_row_slice(2, 2, &[c(epsilon, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-epsilon, 0.0)]);
    let h_int = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(g, 0.0), c(g, 0.0), c(0.0, 0.0)]);
    let p = projector_onto(2, [1]);
    TransitionSystem::new(
        SystemParts {
            hamiltonian: &h0 + &h_int,
            projector_p: p.clone(),
            outcomes: vec![("click".into(), p)],
            rho0: projector_onto(2, [0]),
            split: Some((h0, h_int)),
        },
        SystemOptions::default(),
    )
}

/// `H = Ω σ_x` with `Q = |0⟩⟨0|`; `QHQ = 0`, so the restricted propagator
/// freezes at `Q`.
pub fn zeno_two_level(omega: f64) -> Result<TransitionSystem> {
    two_level(0.0, omega)
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize, levels: &[usize]) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    for &k in levels {
        v[k] = random_complex(rng);
    }
    let n = v.norm();
    v.unscale(n)
}

/// Four levels with `Q = span{0,1}`, `P = span{2,3}`: block-diagonal random
/// `H0` plus an off-diagonal random coupling of strength `epsilon`. The
/// outcomes `a`, `b` split `P` along a random direction; `ρ0` is a random
/// pure state in `range(Q)`.
pub fn random_four_level(seed: u64, epsilon: f64) -> Result<TransitionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h0 = CMatrix::zeros(4, 4);
    for block in [[0usize, 1], [2, 3]] {
        for &r in &block {
            h0[(r, r)] = c(rng.gen_range(-1.0..1.0), 0.0);
        }
        let z = random_complex(&mut rng);
        h0[(block[0], block[1])] = z;
        h0[(block[1], block[0])] = z.conj();
    }
    let mut h_int = CMatrix::zeros(4, 4);
    for r in [2usize, 3] {
        for col in [0usize, 1] {
            let z = random_complex(&mut rng) * epsilon;
            h_int[(r, col)] = z;
            h_int[(col, r)] = z.conj();
        }
    }
    let p = projector_onto(4, [2, 3]);
    let u = random_unit(&mut rng, 4, &[2, 3]);
    let pa = pure(&u);
    let pb = &p - &pa;
    let psi = random_unit(&mut rng, 4, &[0, 1]);
    TransitionSystem::new(
        SystemParts {
            hamiltonian: &h0 + &h_int,
            projector_p: p,
            outcomes: vec![("a".into(), pa), ("b".into(), pb)],
            rho0: pure(&psi),
            split: Some((h0, h_int)),
        },
        SystemOptions {
            exclusive: true,
            ..SystemOptions::default()
        },
    )
}

/// A ground level coupled to bands of closely spaced levels, one band per
/// outcome. Each band imitates an environment: the ground-to-band
/// correlation `Σ_k |g_k|² e^{iω_k τ}` is a Gaussian of width
/// `tau_dephase` up to the recurrence time `2π/δω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingModel {
    pub tau_dephase: f64,
    /// Correlation amplitude at zero delay is `coupling²`.
    pub coupling: f64,
    /// Band centre energies relative to the ground level, one per outcome.
    pub detunings: Vec<f64>,
    /// Recurrence time of the discrete band, `2π/δω`.
    #[serde(default = "default_recurrence")]
    pub recurrence: f64,
    /// Band half-width in units of `1/tau_dephase`.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

fn default_recurrence() -> f64 {
    80.0
}

fn default_half_width() -> f64 {
    4.5
}

impl DephasingModel {
    pub fn new(tau_dephase: f64, coupling: f64, detunings: Vec<f64>) -> Self {
        DephasingModel {
            tau_dephase,
            coupling,
            detunings,
            recurrence: default_recurrence(),
            half_width: default_half_width(),
        }
    }

    pub fn label(band: usize) -> String {
        char::from(b'a' + band as u8).to_string()
    }

    pub fn levels_per_band(&self) -> usize {
        let spacing = 2.0 * PI / self.recurrence;
        2 * (self.half_width / (self.tau_dephase * spacing)).ceil() as usize + 1
    }

    pub fn build(&self) -> Result<TransitionSystem> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tau_dephase) || !positive(self.recurrence) || !positive(self.half_width) {
            return Err(Error::invariant(
                "dephasing model needs positive tau_dephase, recurrence and half_width",
            ));
        }
        if self.detunings.is_empty() || self.detunings.len() > 26 {
            return Err(Error::invariant("dephasing model needs between 1 and 26 bands"));
        }
        let spacing = 2.0 * PI / self.recurrence;
        let n = self.levels_per_band();
        let dim = 1 + n * self.detunings.len();
        let td = self.tau_dephase;
        let amp2 = self.coupling * self.coupling * td * spacing / (2.0 * PI).sqrt();
        let mut h0 = CMatrix::zeros(dim, dim);
        let mut h_int = CMatrix::zeros(dim, dim);
        let mut outcomes = Vec::new();
        let mut p_all = CMatrix::zeros(dim, dim);
        for (b, &centre) in self.detunings.iter().enumerate() {
            let first = 1 + b * n;
            for k in 0..n {
                let offset = (k as f64 - (n as f64 - 1.0) / 2.0) * spacing;
                let level = first + k;
                h0[(level, level)] = c(centre + offset, 0.0);
                let g = (amp2 * (-offset * offset * td * td / 2.0).exp()).sqrt();
                h_int[(level, 0)] = c(g, 0.0);
                h_int[(0, level)] = c(g, 0.0);
            }
            let pb = projector_onto(dim, first..first + n);
            p_all += &pb;
            outcomes.push((Self::label(b), pb));
        }
        TransitionSystem::new(
            SystemParts {
                hamiltonian: &h0 + &h_int,
                projector_p: p_all,
                outcomes,
                rho0: projector_onto(dim, [0]),
                split: Some((h0, h_int)),
            },
            SystemOptions {
                exclusive: true,
                ..SystemOptions::default()
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_model_is_reproducible() {
        let a = random_four_level(7, 1e-2).unwrap();
        let b = random_four_level(7, 1e-2).unwrap();
        assert_eq!(a.hamiltonian(), b.hamiltonian());
        let c = random_four_level(8, 1e-2).unwrap();
        assert_ne!(a.hamiltonian(), c.hamiltonian());
    }

    #[test]
    fn band_correlation_is_gaussian() {
        let m = DephasingModel::new(1.0, 0.1, vec![0.0]);
        let sys = m.build().unwrap();
        let (_, h_int) = sys.split().unwrap();
        let h0 = sys.split().unwrap().0;
        for tau in [0.0, 0.5, 1.0, 2.0] {
            let corr: Complex64 = (1..sys.dim())
                .map(|k| h_int[(k, 0)].norm_sqr() * Complex64::from_polar(1.0, h0[(k, k)].re * tau))
                .sum();
            let expected = 0.01 * (-tau * tau / 2.0f64).exp();
            assert!((corr - c(expected, 0.0)).norm() < 1e-6, "tau {tau}: {corr}");
        }
    }
}
