//! Flavor-oscillation probabilities at a distant detector, their closed-form
//! wavenumbers, and wavenumber extraction from sampled `P(L)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs_diff, CMatrix};
use crate::quadrature::simpson_rule;

const UNITARITY_TOL: f64 = 1e-10;
const CLIP_TOL: f64 = 1e-6;
/// Quadrature results smaller than this fraction of the absolute sum are noise.
const CANCELLATION_TOL: f64 = 1e-8;

/// Numerical quadrature refuses grids larger than this many integrand samples.
const MAX_SAMPLES: usize = 40_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DecoherenceKernel {
    Delta,
    Constant,
    Gaussian { tau_dec: f64 },
}

impl DecoherenceKernel {
    pub fn validate(&self) -> Result<()> {
        if let DecoherenceKernel::Gaussian { tau_dec } = self {
            if !(tau_dec.is_finite() && *tau_dec > 0.0) {
                return Err(Error::invariant(format!("gaussian kernel needs τ_dec > 0, got {tau_dec}")));
            }
        }
        Ok(())
    }

    /// `f(τ)/f(0)`; the delta kernel has no pointwise value away from 0.
    pub fn shape(&self, tau: f64) -> Option<f64> {
        match self {
            DecoherenceKernel::Delta => None,
            DecoherenceKernel::Constant => Some(1.0),
            DecoherenceKernel::Gaussian { tau_dec } => Some((-tau * tau / (2.0 * tau_dec * tau_dec)).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanVelocity {
    #[default]
    Arithmetic,
    Geometric,
}

/// Real Gaussian envelope `φ0(x) = (πσ²)^{-1/4} exp(-x²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub sigma_x: f64,
}

impl Envelope {
    pub fn new(sigma_x: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0) {
            return Err(Error::invariant(format!("σ_x must be positive, got {sigma_x}")));
        }
        let e = Envelope { sigma_x };
        let norm = e.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::invariant(format!("∫φ0² dx = {norm}, expected 1")));
        }
        Ok(e)
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = self.sigma_x;
        (PI * s * s).powf(-0.25) * (-x * x / (2.0 * s * s)).exp()
    }

    fn log_prefactor(&self) -> f64 {
        -0.25 * (PI * self.sigma_x * self.sigma_x).ln()
    }

    /// `∫φ0² dx` by quadrature.
    pub fn norm(&self) -> f64 {
        let h = 12.0 * self.sigma_x;
        let (x, w) = simpson_rule(-h, h, 2401);
        x.iter().zip(&w).map(|(x, w)| w * self.value(*x).powi(2)).sum()
    }

    /// `φ1(x) = ∫dp/2π |φ̃0(p)|² e^{ipx} = ∫dy φ0(y) φ0(y - x)`, by quadrature.
    pub fn autocorrelation(&self, x: f64) -> f64 {
        let h = 12.0 * self.sigma_x + x.abs();
        let (y, w) = simpson_rule(-h, h, 4801);
        y.iter().zip(&w).map(|(y, w)| w * self.value(*y) * self.value(y - x)).sum()
    }

    /// Fraction of `∫φ0²` lying beyond `x`.
    pub fn tail_mass(&self, x: f64) -> f64 {
        0.5 * libm::erfc(x / self.sigma_x)
    }
}

/// Mass eigenstates with mean momenta, a flavor mixing matrix and a
/// decoherence kernel. Energies are `ε̄_i = √(p̄_i² + m_i²) - E0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct OscillationScenario {
    masses: Vec<f64>,
    mixing: CMatrix,
    momenta: Vec<f64>,
    envelope: Envelope,
    e0: f64,
    kernel: DecoherenceKernel,
    mean_velocity: MeanVelocity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    masses: Vec<f64>,
    mixing: Vec<Vec<[f64; 2]>>,
    momenta: Vec<f64>,
    sigma_x: f64,
    #[serde(rename = "E0", default)]
    e0: f64,
    kernel: DecoherenceKernel,
    #[serde(default)]
    mean_velocity: MeanVelocity,
}

impl TryFrom<RawScenario> for OscillationScenario {
    type Error = Error;
    fn try_from(r: RawScenario) -> Result<Self> {
        let n = r.mixing.len();
        if r.mixing.iter().any(|row| row.len() != n) {
            return Err(Error::invariant("mixing matrix must be square"));
        }
        let u = CMatrix::from_fn(n, n, |a, i| Complex64::new(r.mixing[a][i][0], r.mixing[a][i][1]));
        OscillationScenario::new(r.masses, u, r.momenta, r.sigma_x, r.e0, r.kernel)
            .map(|s| s.with_mean_velocity(r.mean_velocity))
    }
}

impl From<OscillationScenario> for RawScenario {
    fn from(s: OscillationScenario) -> Self {
        let n = s.mixing.nrows();
        RawScenario {
            mixing: (0..n)
                .map(|a| (0..n).map(|i| [s.mixing[(a, i)].re, s.mixing[(a, i)].im]).collect())
                .collect(),
            masses: s.masses,
            momenta: s.momenta,
            sigma_x: s.envelope.sigma_x,
            e0: s.e0,
            kernel: s.kernel,
            mean_velocity: s.mean_velocity,
        }
    }
}

/// Real part of a computed probability and the imaginary residue of the
/// `ij` sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationValue {
    pub value: f64,
    pub imag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Gaussian integrals evaluated analytically in log space.
    #[default]
    ClosedForm,
    /// Simpson quadrature in `(S, τ) = ((s+s')/2, s'-s)`.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeFlags {
    /// `max |p̄_i - p̄_j| / min |p̄_i|`.
    pub momentum_spread_ratio: f64,
    pub momentum_spread_small: bool,
    /// Smallest localization length over mass pairs; `None` when all
    /// velocities coincide.
    pub min_localization_length: Option<f64>,
    pub within_localization: bool,
    /// Largest `|L/v̄_i - L/v̄_j|` at the reference distance.
    pub arrival_splitting: f64,
    /// `τ_dec / arrival_splitting` for gaussian kernels.
    pub decoherence_ratio: Option<f64>,
}

impl OscillationScenario {
    pub fn new(
        masses: Vec<f64>,
        mixing: CMatrix,
        momenta: Vec<f64>,
        sigma_x: f64,
        e0: f64,
        kernel: DecoherenceKernel,
    ) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::invariant("at least one mass eigenstate is required"));
        }
        if momenta.len() != n || mixing.nrows() != n || mixing.ncols() != n {
            return Err(Error::invariant(format!(
                "masses ({n}), momenta ({}) and mixing ({}x{}) disagree in size",
                momenta.len(),
                mixing.nrows(),
                mixing.ncols()
            )));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invariant("masses must be finite and non-negative"));
        }
        if momenta.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::invariant("mean momenta must be positive"));
        }
        if !e0.is_finite() {
            return Err(Error::invariant("E0 must be finite"));
        }
        let defect = max_abs_diff(&(mixing.adjoint() * &mixing), &identity(n));
        if defect > UNITARITY_TOL {
            return Err(Error::invariant(format!("U†U = 1 violated by {defect:e}")));
        }
        kernel.validate()?;
        Ok(OscillationScenario {
            masses,
            mixing,
            momenta,
            envelope: Envelope::new(sigma_x)?,
            e0,
            kernel,
            mean_velocity: MeanVelocity::Arithmetic,
        })
    }

    /// Two flavors mixed by a rotation of angle `theta` at common momentum.
    pub fn two_flavor(
        masses: [f64; 2],
        theta: f64,
        momentum: f64,
        sigma_x: f64,
        e0: f64,
        kernel: DecoherenceKernel,
    ) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(c, 0.0), Complex64::new(s, 0.0), Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
        );
        OscillationScenario::new(masses.to_vec(), u, vec![momentum; 2], sigma_x, e0, kernel)
    }

    pub fn with_mean_velocity(mut self, mean: MeanVelocity) -> Self {
        self.mean_velocity = mean;
        self
    }

    pub fn with_kernel(mut self, kernel: DecoherenceKernel) -> Result<Self> {
        kernel.validate()?;
        self.kernel = kernel;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn momentum(&self, i: usize) -> f64 {
        self.momenta[i]
    }

    pub fn mixing(&self) -> &CMatrix {
        &self.mixing
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn kernel(&self) -> DecoherenceKernel {
        self.kernel
    }

    pub fn threshold(&self) -> f64 {
        self.e0
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.momenta[i].hypot(self.masses[i]) - self.e0
    }

    pub fn velocity(&self, i: usize) -> f64 {
        self.momenta[i] / self.momenta[i].hypot(self.masses[i])
    }

    pub fn mean_velocity(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.velocity(i), self.velocity(j));
        match self.mean_velocity {
            MeanVelocity::Arithmetic => 0.5 * (a + b),
            MeanVelocity::Geometric => (a * b).sqrt(),
        }
    }

    fn check_flavor(&self, a: usize) -> Result<()> {
        if a >= self.len() {
            return Err(Error::invalid(format!("flavor index {a} out of range (have {})", self.len())));
        }
        Ok(())
    }

    pub fn regime_flags(&self, l: f64) -> RegimeFlags {
        let n = self.len();
        let mut spread = 0.0f64;
        let mut lloc: Option<f64> = None;
        let mut split = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                spread = spread.max((self.momenta[i] - self.momenta[j]).abs());
                if i < j {
                    if let Some(x) = localization_length(self, i, j) {
                        lloc = Some(lloc.map_or(x, |y| y.min(x)));
                    }
                    split = split.max((l / self.velocity(i) - l / self.velocity(j)).abs());
                }
            }
        }
        let pmin = self.momenta.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = spread / pmin;
        RegimeFlags {
            momentum_spread_ratio: ratio,
            momentum_spread_small: ratio < 0.1,
            min_localization_length: lloc,
            within_localization: lloc.is_none_or(|x| l < x),
            arrival_splitting: split,
            decoherence_ratio: match self.kernel {
                DecoherenceKernel::Gaussian { tau_dec } if split > 0.0 => Some(tau_dec / split),
                _ => None,
            },
        }
    }
}

/// `k_ji = (p̄_j - p̄_i) - (ε̄_j - ε̄_i)/v̄`.
pub fn standard_wavenumber(s: &OscillationScenario, i: usize, j: usize) -> f64 {
    (s.momentum(j) - s.momentum(i)) - (s.energy(j) - s.energy(i)) / s.mean_velocity(i, j)
}

/// `(m_i² - m_j²) / 2p̄`.
pub fn standard_wavenumber_equal_momentum(mi: f64, mj: f64, p: f64) -> f64 {
    (mi * mi - mj * mj) / (2.0 * p)
}

/// `k_ji = (p̄_j - p̄_i) - (ε̄_j/v̄_j - ε̄_i/v̄_i)`.
pub fn nonstandard_wavenumber(s: &OscillationScenario, i: usize, j: usize) -> f64 {
    (s.momentum(j) - s.momentum(i)) - (s.energy(j) / s.velocity(j) - s.energy(i) / s.velocity(i))
}

/// `(m_i² - m_j²)/p̄ - (E0/p̄)[√(m_i² + p̄²) - √(m_j² + p̄²)]`.
pub fn nonstandard_wavenumber_equal_momentum(mi: f64, mj: f64, p: f64, e0: f64) -> f64 {
    (mi * mi - mj * mj) / p - (e0 / p) * (mi.hypot(p) - mj.hypot(p))
}

/// Nonrelativistic limit `(m_i - m_j)(2m - E0)/p̄` with `m` the mean mass.
pub fn nonstandard_wavenumber_nonrelativistic(mi: f64, mj: f64, p: f64, e0: f64) -> f64 {
    (mi - mj) * (mi + mj - e0) / p
}

/// Ultra-relativistic limit `(m_i² - m_j²)/p̄ · (1 - E0/2p̄)`.
pub fn nonstandard_wavenumber_ultrarelativistic(mi: f64, mj: f64, p: f64, e0: f64) -> f64 {
    (mi * mi - mj * mj) / p * (1.0 - e0 / (2.0 * p))
}

/// `σ_x v̄ / |v̄_i - v̄_j|`; `None` for equal velocities (no suppression).
pub fn localization_length(s: &OscillationScenario, i: usize, j: usize) -> Option<f64> {
    let dv = (s.velocity(i) - s.velocity(j)).abs();
    if dv == 0.0 {
        None
    } else {
        Some(s.envelope().sigma_x * s.mean_velocity(i, j) / dv)
    }
}

/// `log ∬ ds ds' φ0(L - v_j s) φ0(L - v_i s') e^{-i(ε_j s - ε_i s')} f(s' - s)`
/// with `f(0) = 1` and both lower limits at `-∞`.
fn log_pair_integral(s: &OscillationScenario, i: usize, j: usize, l: f64) -> Complex64 {
    let sig2 = s.envelope.sigma_x.powi(2);
    let (vi, vj) = (s.velocity(i), s.velocity(j));
    let (ei, ej) = (s.energy(i), s.energy(j));
    let t = l / vi - l / vj;
    let base = Complex64::new(2.0 * s.envelope.log_prefactor(), -(ej / vj - ei / vi) * l);
    let a = (vi * vi + vj * vj) / sig2;
    let de = ei - ej;
    // absolute time integrated first, then the relative time u + t with
    // weight e^{-k(u+t)²/2}; no terms of order k² are formed
    let relative = |k: f64| {
        let b = vi * vi * vj * vj / (sig2 * sig2 * a);
        let w = ei - vi * vi * de / (sig2 * a);
        let bk = b + k;
        Complex64::new(0.5 * (2.0 * PI / bk).ln() - (b * k * t * t + w * w) / (2.0 * bk), b * t * w / bk - w * t)
    };
    let rest = match s.kernel {
        DecoherenceKernel::Delta => {
            let j1 = Complex64::new(vi * vi * t / sig2, -(ej - ei));
            let c1 = Complex64::new(-vi * vi * t * t / (2.0 * sig2), -ei * t);
            Complex64::new(0.5 * (2.0 * PI / a).ln(), 0.0) + j1 * j1 / (2.0 * a) + c1
        }
        DecoherenceKernel::Constant => Complex64::new(0.5 * (2.0 * PI / a).ln() - de * de / (2.0 * a), 0.0) + relative(0.0),
        DecoherenceKernel::Gaussian { tau_dec } => {
            Complex64::new(0.5 * (2.0 * PI / a).ln() - de * de / (2.0 * a), 0.0) + relative(1.0 / (tau_dec * tau_dec))
        }
    };
    base + rest
}

fn simpson_nodes(a: f64, b: f64, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = ((b - a) / h).ceil() as usize + 1;
    let n = n.max(3) | 1;
    if n > MAX_SAMPLES {
        return Err(Error::numerical(
            "oscillations",
            "oscillation_probability",
            format!("quadrature needs {n} nodes"),
        ));
    }
    Ok(simpson_rule(a, b, n))
}

fn summed() -> (Complex64, f64) {
    (Complex64::new(0.0, 0.0), 0.0)
}

fn accumulate((sum, abs): (Complex64, f64), z: Complex64) -> (Complex64, f64) {
    (sum + z, abs + z.norm())
}

/// The same double integral by quadrature in `(S, τ)`.
fn numerical_pair_integral(s: &OscillationScenario, i: usize, j: usize, l: f64) -> Result<Complex64> {
    let sig = s.envelope.sigma_x;
    let (vi, vj) = (s.velocity(i), s.velocity(j));
    let (ei, ej) = (s.energy(i), s.energy(j));
    let (vmin, vmax) = (vi.min(vj), vi.max(vj));
    let width = 10.0 * sig / vmin;
    let (lo, hi) = ((l / vi).min(l / vj) - width, (l / vi).max(l / vj) + width);
    let env_step = sig / vmax / 16.0;
    let phase_step = |w: f64| if w > 0.0 { 2.0 * PI / w / 32.0 } else { f64::INFINITY };
    let phi = |x: f64| s.envelope.value(x);
    let line = |v: f64, e: f64| -> Result<(Complex64, f64)> {
        let (x, w) = simpson_nodes(lo, hi, env_step.min(phase_step(e.abs())))?;
        Ok(x.iter()
            .zip(&w)
            .map(|(x, w)| Complex64::from_polar(w * phi(l - v * x), -e * x))
            .fold(summed(), accumulate))
    };
    let value = match s.kernel {
        DecoherenceKernel::Delta => {
            let (x, w) = simpson_nodes(lo, hi, env_step.min(phase_step((ej - ei).abs())))?;
            x.iter()
                .zip(&w)
                .map(|(x, w)| Complex64::from_polar(w * phi(l - vj * x) * phi(l - vi * x), -(ej - ei) * x))
                .fold(summed(), accumulate)
        }
        DecoherenceKernel::Constant => {
            let (a, ma) = line(vj, ej)?;
            let (b, mb) = line(vi, -ei)?;
            (a * b, ma * mb)
        }
        DecoherenceKernel::Gaussian { tau_dec } => {
            let span = 8.0 * tau_dec;
            let (tau, wt) = simpson_nodes(-span, span, (tau_dec / 16.0).min(env_step).min(phase_step(0.5 * (ei + ej))))?;
            let (big, ws) = simpson_nodes(lo, hi, env_step.min(phase_step((ej - ei).abs())))?;
            if tau.len() * big.len() > MAX_SAMPLES {
                return Err(Error::numerical(
                    "oscillations",
                    "oscillation_probability",
                    format!("quadrature needs {} samples", tau.len() * big.len()),
                ));
            }
            let f = |x: f64| (-x * x / (2.0 * tau_dec * tau_dec)).exp();
            tau.par_iter()
                .zip(&wt)
                .map(|(tau, wt)| {
                    big.iter()
                        .zip(&ws)
                        .map(|(sc, ws)| {
                            let (a, b) = (sc - tau / 2.0, sc + tau / 2.0);
                            Complex64::from_polar(ws * wt * phi(l - vj * a) * phi(l - vi * b) * f(*tau), -(ej * a - ei * b))
                        })
                        .fold(summed(), accumulate)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(summed(), |(a, m), (b, n)| (a + b, m + n))
        }
    };
    let (value, magnitude) = value;
    if !(value.norm() > 0.0) {
        return Err(Error::numerical(
            "oscillations",
            "oscillation_probability",
            format!("pair integral ({i},{j}) underflows at L = {l}; use the closed form"),
        ));
    }
    if value.norm() < CANCELLATION_TOL * magnitude {
        return Err(Error::numerical(
            "oscillations",
            "oscillation_probability",
            format!(
                "pair integral ({i},{j}) cancels to {:e} of its absolute sum at L = {l}; use the closed form",
                value.norm() / magnitude
            ),
        ));
    }
    Ok(value.ln())
}

/// Detection-conditioned `P_{βα}(L)`: each `ij` term of the double time
/// integral is divided by `√(I_ii I_jj)`, which removes the unknown overall
/// detector constants.
pub fn oscillation_probability(
    s: &OscillationScenario,
    alpha: usize,
    beta: usize,
    l: f64,
    quadrature: Quadrature,
) -> Result<OscillationValue> {
    s.check_flavor(alpha)?;
    s.check_flavor(beta)?;
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::invalid(format!("L must be positive, got {l}")));
    }
    let clipped = s.envelope.tail_mass(l);
    if clipped > CLIP_TOL {
        return Err(Error::invalid(format!(
            "window clipping: {clipped:e} of the envelope mass lies beyond the source at L = {l}"
        )));
    }
    let u = &s.mixing;
    let n = s.len();
    let log_i = |i: usize, j: usize| match quadrature {
        Quadrature::ClosedForm => Ok(log_pair_integral(s, i, j, l)),
        Quadrature::Numerical => numerical_pair_integral(s, i, j, l),
    };
    let diag: Vec<Complex64> = (0..n).map(|i| log_i(i, i)).collect::<Result<_>>()?;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let mix = u[(alpha, i)].conj() * u[(alpha, j)] * u[(beta, i)] * u[(beta, j)].conj();
            if mix == Complex64::new(0.0, 0.0) {
                continue;
            }
            let lij = if i == j { diag[i] } else { log_i(i, j)? };
            let phase = Complex64::new(0.0, (s.momentum(j) - s.momentum(i)) * l);
            total += mix * (phase + lij - 0.5 * (diag[i] + diag[j])).exp();
        }
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::numerical(
            "oscillations",
            "oscillation_probability",
            format!("non-finite probability at L = {l}"),
        ));
    }
    Ok(OscillationValue {
        value: total.re,
        imag: total.im,
    })
}

/// `P_{βα}` over a list of distances.
pub fn oscillation_curve(
    s: &OscillationScenario,
    alpha: usize,
    beta: usize,
    distances: &[f64],
    quadrature: Quadrature,
) -> Result<Vec<OscillationValue>> {
    distances
        .par_iter()
        .map(|&l| oscillation_probability(s, alpha, beta, l, quadrature))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavenumberFit {
    /// Radians per unit length.
    pub k: f64,
    /// Amplitude of the fitted sinusoid.
    pub amplitude: f64,
    /// Periods spanned by the samples.
    pub periods: f64,
    /// Peak power over the median periodogram power.
    pub peak_to_floor: f64,
}

fn linear_fit(x: &[f64], y: &[f64], k: Option<f64>) -> (DVector<f64>, f64) {
    let cols = if k.is_some() { 4 } else { 2 };
    let x0 = x[0];
    let a = DMatrix::from_fn(x.len(), cols, |r, c| match c {
        0 => 1.0,
        1 => x[r] - x0,
        2 => (k.unwrap() * (x[r] - x0)).cos(),
        _ => (k.unwrap() * (x[r] - x0)).sin(),
    });
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let resid = (&a * &coef - b).norm_squared();
    (coef, resid)
}

/// Dominant wavenumber of uniformly sampled `(L, P)` pairs: detrend, Hann
/// window, zero-padded periodogram, quadratic peak interpolation, then a
/// least-squares refinement of `k` around the peak.
pub fn fit_wavenumber(samples: &[(f64, f64)]) -> Result<WavenumberFit> {
    let n = samples.len();
    if n < 64 {
        return Err(Error::invalid(format!("need at least 64 samples, got {n}")));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
    if !(dx > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-6 * dx) {
        return Err(Error::invalid("samples must be uniformly spaced in increasing L"));
    }
    let (trend, _) = linear_fit(&x, &y, None);
    let detrended: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| yi - trend[0] - trend[1] * (xi - x[0]))
        .collect();
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let rms = (detrended.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let no_peak = || Error::numerical("oscillations", "fit_wavenumber", "no peak above noise floor");
    if !(rms > 1e-10 * scale.max(f64::MIN_POSITIVE)) {
        return Err(no_peak());
    }
    let m = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = detrended
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let w = 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos();
            Complex64::new(v * w, 0.0)
        })
        .collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let power: Vec<f64> = buf[..m / 2].iter().map(|z| z.norm_sqr()).collect();
    let first = (2 * m / n).max(1);
    let peak = (first..m / 2 - 1)
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .ok_or_else(no_peak)?;
    let mut sorted = power[first..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    let ratio = power[peak] / floor.max(f64::MIN_POSITIVE);
    if ratio < 100.0 {
        return Err(no_peak());
    }
    let (a, b, c) = (power[peak - 1].ln(), power[peak].ln(), power[peak + 1].ln());
    let denom = a - 2.0 * b + c;
    let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let bin = 2.0 * PI / (m as f64 * dx);
    let k0 = (peak as f64 + offset.clamp(-0.5, 0.5)) * bin;
    let resid = |k: f64| linear_fit(&x, &y, Some(k)).1;
    let (mut lo, mut hi) = (k0 - bin, k0 + bin);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut p, mut q) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fp, mut fq) = (resid(p), resid(q));
    for _ in 0..60 {
        if fp < fq {
            hi = q;
            q = p;
            fq = fp;
            p = hi - g * (hi - lo);
            fp = resid(p);
        } else {
            lo = p;
            p = q;
            fp = fq;
            q = lo + g * (hi - lo);
            fq = resid(q);
        }
    }
    let k = 0.5 * (lo + hi);
    let (coef, _) = linear_fit(&x, &y, Some(k));
    let span = x[n - 1] - x[0];
    let periods = k * span / (2.0 * PI);
    let per_period = 2.0 * PI / (k * dx);
    if periods < 4.0 || per_period < 16.0 {
        return Err(Error::invalid(format!(
            "sampling covers {periods:.2} periods at {per_period:.1} points per period; need ≥ 4 and ≥ 16"
        )));
    }
    Ok(WavenumberFit {
        k,
        amplitude: coef[2].hypot(coef[3]),
        periods,
        peak_to_floor: ratio,
    })
}
