//! Finite-dimensional transition-time machinery: restricted propagators,
//! class operators, interval probabilities, the two-interval decoherence
//! term and the smeared transition-time POVM.
//!
//! `H_+ = range(P)` is the subspace reached once the transition happened,
//! `H_- = range(Q)` with `Q = 1 - P` the one the system starts from.

pub mod io;
pub mod models;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Spectral};
use crate::quadrature::simpson_rule;

pub const DEFAULT_TROTTER_STEPS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Hermiticity, projector and sum-rule checks (max-abs entry).
    pub structure: f64,
    /// Lowest eigenvalue tolerated for positive inputs.
    pub positivity: f64,
    /// Lowest eigenvalue tolerated for computed POVM elements.
    pub povm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structure: 1e-10,
            positivity: 1e-12,
            povm: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances {
            structure: self.structure * factor,
            positivity: self.positivity * factor,
            povm: self.povm * factor,
        }
    }
}

/// Where the initial state is required to live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialSupport {
    /// Project `ρ0` onto `range(Q)` and renormalize.
    #[default]
    PreTransition,
    /// Require `ρ0` to be supported in `range(P)`.
    PostTransition,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystemOptions {
    pub exclusive: bool,
    pub initial_support: InitialSupport,
    pub tolerances: Tolerances,
}

/// Raw ingredients of a [`TransitionSystem`].
#[derive(Debug, Clone)]
pub struct SystemParts {
    pub hamiltonian: CMatrix,
    pub projector_p: CMatrix,
    pub outcomes: Vec<(String, CMatrix)>,
    pub rho0: CMatrix,
    /// Optional `(H0, H_I)` with `H = H0 + H_I` and `[H0, P] = 0`.
    pub split: Option<(CMatrix, CMatrix)>,
}

#[derive(Debug, Clone)]
struct Outcome {
    label: String,
    operator: CMatrix,
    sqrt: CMatrix,
    /// `W† √P_λ H V`, the class-operator factor in the eigenbasis of `H`.
    lifted: CMatrix,
}

#[derive(Debug, Clone)]
struct Split {
    h0: CMatrix,
    h_int: CMatrix,
    spectral0: Spectral,
}

#[derive(Debug, Clone)]
pub struct TransitionSystem {
    hamiltonian: CMatrix,
    spectral: Spectral,
    projector_p: CMatrix,
    projector_q: CMatrix,
    /// Orthonormal columns spanning `range(Q)`.
    q_basis: CMatrix,
    /// `W† V`: the `range(Q)` basis in the eigenbasis of `H`.
    q_lifted: CMatrix,
    /// `V† ρ0 V`.
    rho_q: CMatrix,
    outcomes: Vec<Outcome>,
    rho0: CMatrix,
    support_loss: f64,
    split: Option<Split>,
    options: SystemOptions,
}

/// `S_t` at a finite number of Trotter steps.
#[derive(Debug, Clone)]
pub struct RestrictedPropagator {
    pub matrix: CMatrix,
    /// `max|S_t(N) - S_t(2N)|`.
    pub convergence: f64,
}

/// A real quantity obtained as the trace of a complex expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceValue {
    pub value: f64,
    pub imag: f64,
}

#[derive(Debug, Clone)]
pub struct PovmElement {
    pub matrix: CMatrix,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Additivity {
    pub whole: f64,
    pub first: f64,
    pub second: f64,
    /// `2 Re` of the interference term between the two intervals.
    pub offdiagonal: f64,
}

impl Additivity {
    /// Interference relative to the summed interval probabilities.
    pub fn relative_offdiagonal(&self) -> f64 {
        self.offdiagonal.abs() / (self.first + self.second)
    }

    pub fn defect(&self) -> f64 {
        self.whole - self.first - self.second
    }
}

/// Gaussian time-smearing function `f_σ` together with its companion
/// `g_σ(s) = exp(-s²/8σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearingKernel {
    sigma: f64,
}

/// Truncation of the smearing window in units of the kernel's own spread.
const SMEARING_SPREADS: f64 = 6.0;

impl SmearingKernel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invariant(format!("smearing sigma must be positive, got {sigma}")));
        }
        let kernel = SmearingKernel { sigma };
        let mass = kernel.normalization();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::invariant(format!(
                "smearing kernel integrates to {mass}, not 1 within 1e-8"
            )));
        }
        Ok(kernel)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn f(&self, s: f64) -> f64 {
        let v = self.sigma * self.sigma;
        (-s * s / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
    }

    pub fn sqrt_f(&self, s: f64) -> f64 {
        self.f(s).sqrt()
    }

    pub fn g(&self, s: f64) -> f64 {
        (-s * s / (8.0 * self.sigma * self.sigma)).exp()
    }

    /// Half-width of the window on which `f_σ` is integrated.
    pub fn f_window(&self) -> f64 {
        SMEARING_SPREADS * self.sigma
    }

    /// Half-width of the window on which `√f_σ` is integrated. `√f_σ` has
    /// spread `√2 σ`, so it is cut where its weight matches `f_σ` at `6σ`.
    pub fn amplitude_window(&self) -> f64 {
        1.5 * SMEARING_SPREADS * self.sigma
    }

    /// Half-width of the window on which `g_σ` is integrated; its spread is `2σ`.
    pub fn g_window(&self) -> f64 {
        2.0 * SMEARING_SPREADS * self.sigma
    }

    /// Simpson integral of `f_σ` over its truncation window.
    pub fn normalization(&self) -> f64 {
        let w = self.f_window();
        let (x, wts) = simpson_rule(-w, w, 241);
        x.iter().zip(&wts).map(|(x, w)| w * self.f(*x)).sum()
    }

    /// `|√(f(t-s) f(t-s')) - f(t-(s+s')/2) g(s-s')|`.
    pub fn factorization_defect(&self, t: f64, s: f64, s2: f64) -> f64 {
        let lhs = (self.f(t - s) * self.f(t - s2)).sqrt();
        let rhs = self.f(t - 0.5 * (s + s2)) * self.g(s - s2);
        (lhs - rhs).abs()
    }
}

/// How the relative time `τ` is weighted in the transition density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauWeight {
    Smeared(SmearingKernel),
    /// `g ≡ 1` on `|τ| ≤ half_width`.
    Unsmeared { half_width: Option<f64> },
}

fn check_square(name: &str, m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::invariant(format!(
            "{name} must be {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !linalg::all_finite(m) {
        return Err(Error::invariant(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn check_points(points: usize) -> Result<()> {
    if points < 2 {
        return Err(Error::invalid(format!(
            "quadrature needs at least 2 points, got {points}"
        )));
    }
    Ok(())
}

fn check_steps(steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::invalid("Trotter steps must be at least 1"));
    }
    Ok(())
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite, got {t}")));
    }
    Ok(())
}

impl TransitionSystem {
    pub fn new(parts: SystemParts, options: SystemOptions) -> Result<Self> {
        let tol = options.tolerances;
        let SystemParts {
            hamiltonian,
            projector_p,
            outcomes,
            rho0,
            split,
        } = parts;
        let dim = hamiltonian.nrows();
        if dim == 0 {
            return Err(Error::invariant("hamiltonian must have positive dimension"));
        }
        if dim > linalg::MAX_DIM {
            return Err(Error::invariant(format!(
                "dimension {dim} exceeds the dense limit {}",
                linalg::MAX_DIM
            )));
        }
        check_square("hamiltonian", &hamiltonian, dim)?;
        if !linalg::is_hermitian(&hamiltonian, tol.structure) {
            return Err(Error::invariant("H† = H (hamiltonian is not hermitian)"));
        }
        check_square("projector_P", &projector_p, dim)?;
        if !linalg::is_projector(&projector_p, tol.structure) {
            return Err(Error::invariant("P² = P, P† = P (projector_P is not a projector)"));
        }

        let mut sum = CMatrix::zeros(dim, dim);
        let mut built = Vec::with_capacity(outcomes.len());
        for (label, op) in &outcomes {
            check_square(&format!("outcome '{label}'"), op, dim)?;
            if !linalg::is_hermitian(op, tol.structure) {
                return Err(Error::invariant(format!("P_λ ⪰ 0 (outcome '{label}' is not hermitian)")));
            }
            let sqrt = linalg::sqrt_psd(op, tol.positivity)
                .map_err(|_| Error::invariant(format!("P_λ ⪰ 0 (outcome '{label}' has a negative eigenvalue)")))?;
            sum += op;
            built.push((label.clone(), op.clone(), sqrt));
        }
        if linalg::max_abs_diff(&sum, &projector_p) > tol.structure {
            return Err(Error::invariant(
                "Σ_λ P_λ = P (outcome operators must sum to the subspace projector)",
            ));
        }
        for a in 0..built.len() {
            if built[a + 1..].iter().any(|b| b.0 == built[a].0) {
                return Err(Error::invariant(format!("duplicate outcome label '{}'", built[a].0)));
            }
            if options.exclusive {
                for b in a + 1..built.len() {
                    if linalg::max_abs(&(&built[a].1 * &built[b].1)) > tol.structure {
                        return Err(Error::invariant(format!(
                            "P_λ P_λ' = 0 (outcomes '{}' and '{}' overlap)",
                            built[a].0, built[b].0
                        )));
                    }
                }
            }
        }

        check_square("rho0", &rho0, dim)?;
        if !linalg::is_hermitian(&rho0, tol.structure) {
            return Err(Error::invariant("ρ0† = ρ0 (initial state is not hermitian)"));
        }
        if (linalg::trace(&rho0).re - 1.0).abs() > tol.structure {
            return Err(Error::invariant("Tr ρ0 = 1 (initial state is not normalized)"));
        }
        if linalg::min_eigenvalue(&rho0) < -tol.positivity {
            return Err(Error::invariant("ρ0 ⪰ 0 (initial state has a negative eigenvalue)"));
        }

        let projector_q = linalg::identity(dim) - &projector_p;
        let (rho0, support_loss) = match options.initial_support {
            InitialSupport::PreTransition => {
                let projected = &projector_q * &rho0 * &projector_q;
                let kept = linalg::trace(&projected).re;
                if kept <= tol.structure {
                    return Err(Error::invariant(
                        "supp ρ0 ⊂ range(Q) (initial state has no weight before the transition)",
                    ));
                }
                (projected.unscale(kept), 1.0 - kept)
            }
            InitialSupport::PostTransition => {
                let outside = linalg::trace(&(&projector_q * &rho0)).re;
                if outside > tol.structure {
                    return Err(Error::invariant(
                        "supp ρ0 ⊂ range(P) (initial state has weight outside the projector)",
                    ));
                }
                (rho0, 0.0)
            }
            InitialSupport::Unconstrained => (rho0, 0.0),
        };

        let split = match split {
            None => None,
            Some((h0, h_int)) => {
                check_square("h0", &h0, dim)?;
                check_square("h_int", &h_int, dim)?;
                if !linalg::is_hermitian(&h0, tol.structure)
                    || !linalg::is_hermitian(&h_int, tol.structure)
                {
                    return Err(Error::invariant("H0, H_I hermitian"));
                }
                if linalg::max_abs_diff(&(&h0 + &h_int), &hamiltonian) > tol.structure {
                    return Err(Error::invariant("H = H0 + H_I (split does not add up)"));
                }
                if linalg::max_abs(&linalg::commutator(&h0, &projector_p)) > tol.structure {
                    return Err(Error::invariant("[H0, P] = 0 (free part mixes the subspaces)"));
                }
                let spectral0 = Spectral::new(&h0);
                Some(Split {
                    h0,
                    h_int,
                    spectral0,
                })
            }
        };

        let spectral = Spectral::new(&hamiltonian);
        let q_basis = linalg::range_basis(&projector_q);
        let w_adj = spectral.vectors.adjoint();
        let q_lifted = &w_adj * &q_basis;
        let outcomes = built
            .into_iter()
            .map(|(label, operator, sqrt)| {
                let lifted = &w_adj * (&sqrt * &hamiltonian * &q_basis);
                Outcome {
                    label,
                    operator,
                    sqrt,
                    lifted,
                }
            })
            .collect();

        let rho_q = q_basis.adjoint() * &rho0 * &q_basis;
        Ok(TransitionSystem {
            rho_q,
            hamiltonian,
            spectral,
            projector_p,
            projector_q,
            q_basis,
            q_lifted,
            outcomes,
            rho0,
            support_loss,
            split,
            options,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn projector_p(&self) -> &CMatrix {
        &self.projector_p
    }

    pub fn projector_q(&self) -> &CMatrix {
        &self.projector_q
    }

    pub fn rho0(&self) -> &CMatrix {
        &self.rho0
    }

    /// Weight of the supplied `ρ0` discarded by the support projection.
    pub fn support_loss(&self) -> f64 {
        self.support_loss
    }

    pub fn options(&self) -> &SystemOptions {
        &self.options
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.label.as_str())
    }

    pub fn outcome_operator(&self, label: &str) -> Result<&CMatrix> {
        Ok(&self.outcomes[self.outcome_index(label)?].operator)
    }

    pub fn split(&self) -> Option<(&CMatrix, &CMatrix)> {
        self.split.as_ref().map(|s| (&s.h0, &s.h_int))
    }

    fn outcome_index(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o.label == label)
            .ok_or_else(|| Error::invalid(format!("unknown outcome label '{label}'")))
    }

    /// `(V† e^{-iHt/N} V)^N` on the `range(Q)` block.
    fn restricted_block(&self, t: f64, steps: usize) -> CMatrix {
        let dt = t / steps as f64;
        let mut scaled = self.q_lifted.clone();
        for (k, mut row) in scaled.row_iter_mut().enumerate() {
            row *= Complex64::from_polar(1.0, -self.spectral.values[k] * dt);
        }
        let step = self.q_lifted.adjoint() * scaled;
        linalg::matrix_power(&step, steps)
    }

    pub fn restricted_propagator(&self, t: f64, steps: usize) -> Result<RestrictedPropagator> {
        check_time("t", t)?;
        check_steps(steps)?;
        let v = &self.q_basis;
        let lift = |m: CMatrix| v * m * v.adjoint();
        let matrix = lift(self.restricted_block(t, steps));
        let doubled = lift(self.restricted_block(t, 2 * steps));
        let convergence = linalg::max_abs_diff(&matrix, &doubled);
        Ok(RestrictedPropagator {
            matrix,
            convergence,
        })
    }

    /// `Q e^{-iQHQt} Q`, the limit of the restricted propagator.
    pub fn zeno_limit(&self, t: f64) -> CMatrix {
        let v = &self.q_basis;
        let block = v.adjoint() * &self.hamiltonian * v;
        v * Spectral::new(&block).propagator(t) * v.adjoint()
    }

    /// Left factor `X` of `C(λ,t) = X V†`, where `V` spans `range(Q)`.
    fn class_factor(&self, k: usize, t: f64, steps: usize) -> CMatrix {
        let block = self.restricted_block(t, steps);
        let mut y = &self.outcomes[k].lifted * block;
        for (n, mut row) in y.row_iter_mut().enumerate() {
            row *= Complex64::from_polar(1.0, self.spectral.values[n] * t);
        }
        &self.spectral.vectors * y
    }

    fn class_operator_at(&self, k: usize, t: f64, steps: usize) -> CMatrix {
        self.class_factor(k, t, steps) * self.q_basis.adjoint()
    }

    /// `C(λ,t) = e^{iHt} √P_λ H S_t`.
    pub fn class_operator(&self, label: &str, t: f64, steps: usize) -> Result<CMatrix> {
        check_time("t", t)?;
        check_steps(steps)?;
        Ok(self.class_operator_at(self.outcome_index(label)?, t, steps))
    }

    /// Leading-order class operator `e^{iH0t} √P_λ H_I e^{-iH0t}`.
    pub fn class_operator_perturbative(&self, label: &str, t: f64) -> Result<CMatrix> {
        check_time("t", t)?;
        let k = self.outcome_index(label)?;
        let split = self.split.as_ref().ok_or_else(|| {
            Error::invalid("perturbative class operator needs an H0 + H_I split")
        })?;
        let u = split.spectral0.propagator(t);
        Ok(u.adjoint() * &self.outcomes[k].sqrt * &split.h_int * u)
    }

    /// Factor of `∫ w(t) C(λ,t) dt` by Simpson quadrature, with the weight
    /// applied node-wise.
    fn amplitude(
        &self,
        k: usize,
        a: f64,
        b: f64,
        points: usize,
        steps: usize,
        weight: impl Fn(f64) -> f64 + Sync,
    ) -> CMatrix {
        let (nodes, wts) = simpson_rule(a, b, points);
        let terms: Vec<CMatrix> = nodes
            .par_iter()
            .zip(wts.par_iter())
            .map(|(&t, &w)| self.class_factor(k, t, steps) * Complex64::from(w * weight(t)))
            .collect();
        let zero = CMatrix::zeros(self.dim(), self.q_basis.ncols());
        terms.into_iter().fold(zero, |acc, m| acc + m)
    }

    fn interval_amplitude(&self, k: usize, a: f64, b: f64, points: usize, steps: usize) -> CMatrix {
        if a == b {
            return CMatrix::zeros(self.dim(), self.q_basis.ncols());
        }
        self.amplitude(k, a, b, points, steps, |_| 1.0)
    }

    /// `Tr[A ρ0 B†]` for `A = a V†`, `B = b V†`.
    fn bilinear(&self, a: &CMatrix, b: &CMatrix) -> Complex64 {
        let ab = b.adjoint() * a;
        ab.component_mul(&self.rho_q.transpose()).sum()
    }

    /// `∫∫_{[t1,t2]²} Tr[C(λ,t) ρ0 C†(λ,t')] dt dt'`.
    pub fn detection_probability(
        &self,
        label: &str,
        t1: f64,
        t2: f64,
        steps: usize,
        points: usize,
    ) -> Result<TraceValue> {
        check_time("t1", t1)?;
        check_time("t2", t2)?;
        if t1 >= t2 {
            return Err(Error::invalid(format!("interval needs t1 < t2, got [{t1}, {t2}]")));
        }
        check_steps(steps)?;
        check_points(points)?;
        let k = self.outcome_index(label)?;
        let amp = self.interval_amplitude(k, t1, t2, points, steps);
        let z = self.bilinear(&amp, &amp);
        Ok(TraceValue {
            value: z.re,
            imag: z.im,
        })
    }

    /// Interval probabilities on `[t1,t3]`, `[t1,t2]`, `[t2,t3]` and the
    /// interference term `2 Re ∫_{t1}^{t2}∫_{t2}^{t3} Tr[C ρ0 C†]`.
    pub fn additivity(
        &self,
        label: &str,
        t1: f64,
        t2: f64,
        t3: f64,
        steps: usize,
        points: usize,
    ) -> Result<Additivity> {
        for (name, t) in [("t1", t1), ("t2", t2), ("t3", t3)] {
            check_time(name, t)?;
        }
        if !(t1 < t2 && t2 <= t3) {
            return Err(Error::invalid(format!(
                "need t1 < t2 <= t3, got {t1}, {t2}, {t3}"
            )));
        }
        check_steps(steps)?;
        check_points(points)?;
        let k = self.outcome_index(label)?;
        let a12 = self.interval_amplitude(k, t1, t2, points, steps);
        let a23 = self.interval_amplitude(k, t2, t3, points, steps);
        let a13 = self.interval_amplitude(k, t1, t3, 2 * points - 1, steps);
        Ok(Additivity {
            whole: self.bilinear(&a13, &a13).re,
            first: self.bilinear(&a12, &a12).re,
            second: self.bilinear(&a23, &a23).re,
            offdiagonal: 2.0 * self.bilinear(&a12, &a23).re,
        })
    }

    /// `2 Re ∫_{t1}^{t2}dt ∫_{t2}^{t3}dt' Tr[C(λ,t) ρ0 C†(λ,t')]`.
    pub fn consistency_offdiagonal(
        &self,
        label: &str,
        t1: f64,
        t2: f64,
        t3: f64,
        steps: usize,
        points: usize,
    ) -> Result<f64> {
        for (name, t) in [("t1", t1), ("t2", t2), ("t3", t3)] {
            check_time(name, t)?;
        }
        if !(t1 < t2 && t2 <= t3) {
            return Err(Error::invalid(format!(
                "need t1 < t2 <= t3, got {t1}, {t2}, {t3}"
            )));
        }
        check_steps(steps)?;
        check_points(points)?;
        let k = self.outcome_index(label)?;
        let a12 = self.interval_amplitude(k, t1, t2, points, steps);
        let a23 = self.interval_amplitude(k, t2, t3, points, steps);
        Ok(2.0 * self.bilinear(&a12, &a23).re)
    }

    fn check_smearing(&self, kernel: &SmearingKernel, points: usize) -> Result<()> {
        check_points(points)?;
        let step = 2.0 * kernel.amplitude_window() / (points - 1) as f64;
        if step > kernel.sigma() {
            return Err(Error::invalid(format!(
                "smearing width {} is below the quadrature step {step}",
                kernel.sigma()
            )));
        }
        Ok(())
    }

    /// `B = ∫ ds √f_σ(s-t) C(λ,s)` over `|s-t| <= 9σ`.
    fn smeared_amplitude(
        &self,
        k: usize,
        t: f64,
        kernel: &SmearingKernel,
        steps: usize,
        points: usize,
    ) -> CMatrix {
        let w = kernel.amplitude_window();
        self.amplitude(k, t - w, t + w, points, steps, |s| kernel.sqrt_f(s - t))
    }

    /// `Π(λ,t) = ∫∫ ds ds' √(f_σ(s-t) f_σ(s'-t)) C†(λ,s') C(λ,s) = B†B`.
    pub fn smeared_povm_element(
        &self,
        label: &str,
        t: f64,
        kernel: &SmearingKernel,
        steps: usize,
        points: usize,
    ) -> Result<PovmElement> {
        check_time("t", t)?;
        check_steps(steps)?;
        self.check_smearing(kernel, points)?;
        let k = self.outcome_index(label)?;
        let b = self.smeared_amplitude(k, t, kernel, steps, points) * self.q_basis.adjoint();
        let matrix = linalg::hermitian_part(&(b.adjoint() * b));
        let min_eigenvalue = linalg::min_eigenvalue(&matrix);
        if min_eigenvalue < -self.options.tolerances.povm {
            return Err(Error::numerical(
                "hilbert",
                "smeared_povm_element",
                format!("element at t = {t} has eigenvalue {min_eigenvalue:e}"),
            ));
        }
        Ok(PovmElement {
            matrix,
            min_eigenvalue,
        })
    }

    /// `P_σ(λ,t) = Tr[B ρ0 B†]`.
    pub fn smeared_probability(
        &self,
        label: &str,
        t: f64,
        kernel: &SmearingKernel,
        steps: usize,
        points: usize,
    ) -> Result<TraceValue> {
        check_time("t", t)?;
        check_steps(steps)?;
        self.check_smearing(kernel, points)?;
        let k = self.outcome_index(label)?;
        let b = self.smeared_amplitude(k, t, kernel, steps, points);
        let z = self.bilinear(&b, &b);
        Ok(TraceValue {
            value: z.re,
            imag: z.im,
        })
    }

    /// `Π(N) = 1 - Σ_λ ∫_0^T dt Π(λ,t)`, the no-detection element.
    pub fn no_detection_element(
        &self,
        horizon: f64,
        kernel: &SmearingKernel,
        time_points: usize,
        steps: usize,
        points: usize,
    ) -> Result<PovmElement> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        check_points(time_points)?;
        let (nodes, wts) = simpson_rule(0.0, horizon, time_points);
        let dim = self.dim();
        let mut total = CMatrix::zeros(dim, dim);
        for o in &self.outcomes {
            for (&t, &w) in nodes.iter().zip(&wts) {
                let el = self.smeared_povm_element(&o.label, t, kernel, steps, points)?;
                total += el.matrix * Complex64::from(w);
            }
        }
        let matrix = linalg::hermitian_part(&(linalg::identity(dim) - total));
        let min_eigenvalue = linalg::min_eigenvalue(&matrix);
        if min_eigenvalue < -self.options.tolerances.povm {
            return Err(Error::numerical(
                "hilbert",
                "no_detection_element",
                format!("no-detection element has eigenvalue {min_eigenvalue:e}"),
            ));
        }
        Ok(PovmElement {
            matrix,
            min_eigenvalue,
        })
    }

    /// `P̃(λ,t) = ∫dτ g(τ) Tr[C(λ,t+τ/2) ρ0 C†(λ,t-τ/2)]`.
    pub fn transition_density(
        &self,
        label: &str,
        t: f64,
        weight: TauWeight,
        steps: usize,
        points: usize,
    ) -> Result<TraceValue> {
        check_time("t", t)?;
        if t < 0.0 {
            return Err(Error::invalid(format!("transition density needs t >= 0, got {t}")));
        }
        self.transition_density_unchecked(label, t, weight, steps, points)
    }

    /// [`Self::transition_density`] without the `t >= 0` precondition, for
    /// convolving against a smearing window that reaches negative times.
    pub fn transition_density_unchecked(
        &self,
        label: &str,
        t: f64,
        weight: TauWeight,
        steps: usize,
        points: usize,
    ) -> Result<TraceValue> {
        check_steps(steps)?;
        check_points(points)?;
        let k = self.outcome_index(label)?;
        let (half, g): (f64, Box<dyn Fn(f64) -> f64 + Sync>) = match weight {
            TauWeight::Smeared(kernel) => (kernel.g_window(), Box::new(move |s| kernel.g(s))),
            TauWeight::Unsmeared { half_width: Some(w) } if w.is_finite() && w > 0.0 => {
                (w, Box::new(|_| 1.0))
            }
            TauWeight::Unsmeared { .. } => {
                return Err(Error::invalid(
                    "unsmeared transition density needs a positive tau window",
                ))
            }
        };
        let (nodes, wts) = simpson_rule(-half, half, points);
        let terms: Vec<Complex64> = nodes
            .par_iter()
            .zip(wts.par_iter())
            .map(|(&tau, &w)| {
                let plus = self.class_factor(k, t + 0.5 * tau, steps);
                let minus = self.class_factor(k, t - 0.5 * tau, steps);
                self.bilinear(&plus, &minus) * (w * g(tau))
            })
            .collect();
        let z: Complex64 = terms.into_iter().sum();
        Ok(TraceValue {
            value: z.re,
            imag: z.im,
        })
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
