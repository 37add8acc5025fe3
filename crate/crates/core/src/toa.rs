//! Time-of-arrival densities at a detector placed at distance `L`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{AbsorptionCoefficient, DetectorModel};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, simpson_weights};
use crate::wavepacket::{Dispersion, MixedState, WavePacket, WignerField};

/// Relative amplitude below which momentum nodes are dropped from sums.
const SUPPORT_CUTOFF: f64 = 1e-9;
/// Boundary values must stay below this fraction of the peak for a window
/// to count as covering the whole density.
const WINDOW_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeGrid", into = "RawTimeGrid")]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimeGrid {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl TryFrom<RawTimeGrid> for TimeGrid {
    type Error = Error;
    fn try_from(r: RawTimeGrid) -> Result<Self> {
        TimeGrid::new(r.t_min, r.t_max, r.n_points)
    }
}

impl From<TimeGrid> for RawTimeGrid {
    fn from(g: TimeGrid) -> Self {
        RawTimeGrid {
            t_min: g.t_min,
            t_max: g.t_max,
            n_points: g.n,
        }
    }
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::invariant(format!(
                "time grid needs t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::invariant("time grid needs at least 2 points"));
        }
        Ok(TimeGrid {
            t_min,
            t_max,
            n: n_points,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n - 1) as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.dt()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.t(j)).collect()
    }

    pub fn shifted(&self, t0: f64) -> TimeGrid {
        TimeGrid {
            t_min: self.t_min + t0,
            t_max: self.t_max + t0,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DensityDiagnostics {
    pub min_value: f64,
    /// Largest imaginary part met before taking the real part.
    pub max_imag: f64,
    /// Probability that arrived outside the time window (classical densities).
    pub lost_mass: f64,
    /// `min_value < -1e-8 · peak`.
    pub negative_excursion: bool,
}

/// Arrival density sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToADensity {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    /// `∫ values dt` over the window.
    pub normalization: f64,
    pub conditioned: bool,
    pub diagnostics: DensityDiagnostics,
}

impl ToADensity {
    fn new(grid: TimeGrid, values: Vec<f64>, l: f64, max_imag: f64, lost_mass: f64) -> Self {
        let normalization = integrate(&values, grid.dt());
        let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
        let peak = values.iter().copied().fold(0.0f64, |a, v| a.max(v.abs()));
        ToADensity {
            grid,
            values,
            l,
            normalization,
            conditioned: false,
            diagnostics: DensityDiagnostics {
                min_value,
                max_imag,
                lost_mass,
                negative_excursion: min_value < -1e-8 * peak,
            },
        }
    }

    /// Density divided by its window integral.
    pub fn conditioned(&self) -> Result<ToADensity> {
        if !(self.normalization.abs() > 0.0) {
            return Err(Error::numerical(
                "toa",
                "conditioned",
                "cannot condition a density with zero mass",
            ));
        }
        let values: Vec<f64> = self.values.iter().map(|v| v / self.normalization).collect();
        let mut out = ToADensity::new(self.grid, values, self.l, self.diagnostics.max_imag, self.diagnostics.lost_mass);
        out.conditioned = true;
        Ok(out)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = j;
            }
        }
        best
    }

    pub fn argmax_time(&self) -> f64 {
        self.grid.t(self.argmax())
    }

    pub fn peak(&self) -> f64 {
        self.values[self.argmax()]
    }

    /// CSV with columns `t, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        for (j, v) in self.values.iter().enumerate() {
            w.write_record([self.grid.t(j).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON sidecar: distance, normalization and diagnostics.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "L": self.l,
            "normalization": self.normalization,
            "conditioned": self.conditioned,
            "grid": self.grid,
            "diagnostics": self.diagnostics,
        })
    }
}

fn check_positive_support(state: &WavePacket) -> Result<()> {
    if !state.has_positive_support() {
        return Err(Error::invalid(
            "state must carry the positive-momentum support flag",
        ));
    }
    Ok(())
}

/// `Σ_k c_k e^{-iε_k t}` on every grid time, with `c_k` supplied on `nodes`.
fn coherent_sum(coeffs: &[(f64, Complex64)], grid: &TimeGrid) -> Vec<Complex64> {
    (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let t = grid.t(j);
            coeffs
                .iter()
                .map(|&(e, c)| c * Complex64::from_polar(1.0, -e * t))
                .sum()
        })
        .collect()
}

/// `P(t) = ⟨ψ_t|S(L)|ψ_t⟩` from the detector's momentum-space kernel.
pub fn toa_density_kernel(
    state: &WavePacket,
    model: &DetectorModel,
    d: &Dispersion,
    grid: &TimeGrid,
) -> Result<ToADensity> {
    let g = state.grid();
    let measure = g.measure();
    let support = state.support(SUPPORT_CUTOFF);
    let p: Vec<f64> = support.iter().map(|&k| g.p(k)).collect();
    let n = p.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|r| (0..n).map(|c| model.kernel(p[c], p[r], d)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let amps: Vec<Complex64> = support.iter().map(|&k| state.amplitudes()[k] * measure).collect();
    let energies: Vec<f64> = p.iter().map(|&q| d.energy(q)).collect();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let t = grid.t(j);
            let b: Vec<Complex64> = amps
                .iter()
                .zip(&energies)
                .map(|(a, e)| a * Complex64::from_polar(1.0, -e * t))
                .collect();
            rows.iter()
                .zip(&b)
                .map(|(row, br)| {
                    let kb: Complex64 = row.iter().zip(&b).map(|(k, bc)| k * bc).sum();
                    br.conj() * kb
                })
                .sum()
        })
        .collect();
    let peak = values.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
    let max_imag = values.iter().fold(0.0f64, |a, z| a.max(z.im.abs())) / peak.max(f64::MIN_POSITIVE);
    Ok(ToADensity::new(
        *grid,
        values.iter().map(|z| z.re).collect(),
        model.distance(),
        max_imag,
        0.0,
    ))
}

/// `P(t) = |∫ dp/2π √(α(p)|v_p|) ψ̃(p) e^{ipL - iε_p t}|²`.
pub fn toa_density_absorption(
    state: &WavePacket,
    alpha: &AbsorptionCoefficient,
    d: &Dispersion,
    l: f64,
    grid: &TimeGrid,
) -> Result<ToADensity> {
    check_positive_support(state)?;
    let g = state.grid();
    let measure = g.measure();
    let coeffs = state
        .support(SUPPORT_CUTOFF)
        .into_iter()
        .map(|k| {
            let p = g.p(k);
            let a = alpha.value(p)?;
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::singular("toa", "toa_density_absorption", format!("α({p}) = {a}")));
            }
            let w = (a * d.velocity(p).abs()).sqrt() * measure;
            Ok((d.energy(p), state.amplitudes()[k] * Complex64::from_polar(w, p * l)))
        })
        .collect::<Result<Vec<_>>>()?;
    let values = coherent_sum(&coeffs, grid).iter().map(|z| z.norm_sqr()).collect();
    Ok(ToADensity::new(*grid, values, l, 0.0, 0.0))
}

/// Weighted sum of the component densities of a mixed state.
pub fn toa_density_absorption_mixed(
    state: &MixedState,
    alpha: &AbsorptionCoefficient,
    d: &Dispersion,
    l: f64,
    grid: &TimeGrid,
) -> Result<ToADensity> {
    let mut values = vec![0.0; grid.len()];
    for (w, psi) in state.components() {
        let part = toa_density_absorption(psi, alpha, d, l, grid)?;
        for (v, x) in values.iter_mut().zip(&part.values) {
            *v += w * x;
        }
    }
    Ok(ToADensity::new(*grid, values, l, 0.0, 0.0))
}

/// `P(t) = |∫ dp/2π √|v_p| ψ̃(p) e^{ipL - iε_p t}|²`.
pub fn kijowski_density(state: &WavePacket, d: &Dispersion, l: f64, grid: &TimeGrid) -> Result<ToADensity> {
    check_positive_support(state)?;
    let g = state.grid();
    let measure = g.measure();
    let coeffs: Vec<(f64, Complex64)> = state
        .support(SUPPORT_CUTOFF)
        .into_iter()
        .map(|k| {
            let p = g.p(k);
            let w = d.velocity(p).abs().sqrt() * measure;
            (d.energy(p), state.amplitudes()[k] * Complex64::from_polar(w, p * l))
        })
        .collect();
    let values = coherent_sum(&coeffs, grid).iter().map(|z| z.norm_sqr()).collect();
    Ok(ToADensity::new(*grid, values, l, 0.0, 0.0))
}

/// Schrödinger current `J(L,t) = (1/m) Re[ψ*(L,t) (-i∂_x) ψ(L,t)]`; may be negative.
pub fn probability_current(state: &WavePacket, m: f64, l: f64, grid: &TimeGrid) -> Result<ToADensity> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::invalid(format!("mass must be positive, got {m}")));
    }
    let d = Dispersion::Nonrelativistic { m };
    let g = state.grid();
    let measure = g.measure();
    let support = state.support(SUPPORT_CUTOFF);
    let psi: Vec<(f64, Complex64)> = support
        .iter()
        .map(|&k| {
            let p = g.p(k);
            (d.energy(p), state.amplitudes()[k] * Complex64::from_polar(measure, p * l))
        })
        .collect();
    let grad: Vec<(f64, Complex64)> = support
        .iter()
        .zip(&psi)
        .map(|(&k, &(e, c))| (e, c * g.p(k)))
        .collect();
    let a = coherent_sum(&psi, grid);
    let b = coherent_sum(&grad, grid);
    let values = a.iter().zip(&b).map(|(x, y)| (x.conj() * y).re / m).collect();
    Ok(ToADensity::new(*grid, values, l, 0.0, 0.0))
}

/// How the arrival-time delta is resolved in the classical densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaResolution {
    /// Integrate the delta analytically along each momentum row, sampling the
    /// row by cubic interpolation in `x`.
    #[default]
    Interpolated,
    /// Assign each phase-space cell's mass to the time cell of its arrival.
    Binned,
}

fn row_spacing(w: &WignerField) -> Result<(f64, f64)> {
    let dx = w
        .dx()
        .ok_or_else(|| Error::invalid("Wigner field needs a uniform x grid with at least 2 nodes"))?;
    let dp = if w.p.len() >= 2 {
        let h = w.p[1] - w.p[0];
        if w.p.windows(2).any(|q| ((q[1] - q[0]) - h).abs() > 1e-9 * h.abs()) {
            return Err(Error::invalid("Wigner field needs uniformly spaced momentum rows"));
        }
        h
    } else {
        return Err(Error::invalid("Wigner field needs at least 2 momentum rows"));
    };
    Ok((dx, dp))
}

/// `Σ_rows (Δp/2π) f(p) v_p W(L - v_p t, p)` on the time grid, with the total
/// `Σ_rows (Δp/2π) f(p) ∫dx W` returned alongside.
fn transport(
    w: &WignerField,
    weight: &(dyn Fn(f64) -> Result<f64> + Sync),
    d: &Dispersion,
    l: f64,
    grid: &TimeGrid,
    resolution: DeltaResolution,
) -> Result<(Vec<f64>, f64)> {
    let (dx, dp) = row_spacing(w)?;
    let measure = dp / (2.0 * PI);
    let xw = simpson_weights(w.x.len(), dx);
    let rows: Vec<(Vec<f64>, f64)> = (0..w.p.len())
        .into_par_iter()
        .map(|i| {
            let p = w.p[i];
            let row = w.row(i);
            let row_mass: f64 = match resolution {
                DeltaResolution::Interpolated => row.iter().zip(&xw).map(|(a, b)| a * b).sum(),
                DeltaResolution::Binned => row.iter().sum::<f64>() * dx,
            };
            if row.iter().all(|&x| x == 0.0) {
                return Ok((vec![0.0; grid.len()], 0.0));
            }
            let f = weight(p)?;
            let v = d.velocity(p);
            let total = measure * f * row_mass;
            if !(v > 0.0) {
                return Ok((vec![0.0; grid.len()], total));
            }
            let mut out = vec![0.0; grid.len()];
            match resolution {
                DeltaResolution::Interpolated => {
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = measure * f * v * w.interpolate_row(i, l - v * grid.t(j));
                    }
                }
                DeltaResolution::Binned => {
                    let dt = grid.dt();
                    for (j, &x) in w.x.iter().enumerate() {
                        let t = (l - x) / v;
                        let cell = ((t - grid.t_min()) / dt).round();
                        if cell >= 0.0 && cell < grid.len() as f64 {
                            out[cell as usize] += measure * f * row[j] * dx / dt;
                        }
                    }
                }
            }
            Ok((out, total))
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; grid.len()];
    let mut total = 0.0;
    for (r, m) in rows {
        for (v, x) in values.iter_mut().zip(&r) {
            *v += x;
        }
        total += m;
    }
    Ok((values, total))
}

fn window_integral(values: &[f64], grid: &TimeGrid, resolution: DeltaResolution) -> f64 {
    match resolution {
        DeltaResolution::Interpolated => integrate(values, grid.dt()),
        DeltaResolution::Binned => values.iter().sum::<f64>() * grid.dt(),
    }
}

/// Classical arrival density `∫dx dp α(p) δ(t - (L-x)/v_p) W0(x,p)`.
pub fn classical_toa(
    w: &WignerField,
    alpha: &AbsorptionCoefficient,
    d: &Dispersion,
    l: f64,
    grid: &TimeGrid,
    resolution: DeltaResolution,
) -> Result<ToADensity> {
    let weight = |p: f64| alpha.value(p);
    let (values, total) = transport(w, &weight, d, l, grid, resolution)?;
    let lost = total - window_integral(&values, grid, resolution);
    let mut out = ToADensity::new(*grid, values, l, 0.0, lost);
    if resolution == DeltaResolution::Binned {
        out.normalization = window_integral(&out.values, grid, resolution);
    }
    Ok(out)
}

/// Coefficient of the first quantum correction,
/// `[(αα'' - α'²) v² + α² (v v'' - v'²)] / (8 α v⁴)`.
pub fn correction_coefficient(alpha: &AbsorptionCoefficient, d: &Dispersion, p: f64) -> Result<f64> {
    let (a, a1, a2) = alpha.derivatives(p)?;
    if !(a > 0.0) {
        return Err(Error::singular(
            "toa",
            "semiclassical_correction",
            format!("α({p}) = {a} vanishes on the support"),
        ));
    }
    let v = d.velocity(p);
    let v1 = d.velocity_slope(p);
    let v2 = d.velocity_curvature(p);
    Ok(((a * a2 - a1 * a1) * v * v + a * a * (v * v2 - v1 * v1)) / (8.0 * a * v.powi(4)))
}

fn second_difference(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let h2 = dt * dt;
    (0..n)
        .map(|j| {
            if n < 4 {
                0.0
            } else if j == 0 {
                (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2
            } else if j == n - 1 {
                (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2
            } else {
                (values[j + 1] - 2.0 * values[j] + values[j - 1]) / h2
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiclassicalDensity {
    pub corrected: ToADensity,
    /// The term subtracted from the classical density, `∂²_t G`.
    pub correction: Vec<f64>,
}

/// Classical density plus its first quantum correction `-∂²_t G(t)`, where
/// `G` transports the correction coefficient along classical arrivals.
pub fn semiclassical_correction(
    w: &WignerField,
    alpha: &AbsorptionCoefficient,
    d: &Dispersion,
    l: f64,
    grid: &TimeGrid,
) -> Result<SemiclassicalDensity> {
    let classical = classical_toa(w, alpha, d, l, grid, DeltaResolution::Interpolated)?;
    let weight = |p: f64| correction_coefficient(alpha, d, p);
    let (g, _) = transport(w, &weight, d, l, grid, DeltaResolution::Interpolated)?;
    let correction = second_difference(&g, grid.dt());
    let values = classical
        .values
        .iter()
        .zip(&correction)
        .map(|(c, k)| c - k)
        .collect();
    let corrected = ToADensity::new(*grid, values, l, 0.0, classical.diagnostics.lost_mass);
    Ok(SemiclassicalDensity {
        corrected,
        correction,
    })
}

/// Window integral of a density whose tails have died out at both ends.
pub fn time_integrated(density: &ToADensity) -> Result<f64> {
    let peak = density.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ends = density.values[0].abs().max(density.values[density.values.len() - 1].abs());
    if ends >= WINDOW_TOL * peak {
        return Err(Error::invalid(format!(
            "time window too narrow: boundary value {ends:e} vs peak {peak:e}"
        )));
    }
    Ok(integrate(&density.values, density.grid.dt()))
}

/// `∫ dp/2π ⟨p|S(L)|p⟩ |ψ̃(p)|² / |v_p|`.
pub fn analytic_time_integrated(state: &WavePacket, model: &DetectorModel, d: &Dispersion) -> Result<f64> {
    let g = state.grid();
    let measure = g.measure();
    state
        .support(SUPPORT_CUTOFF)
        .into_iter()
        .map(|k| {
            let p = g.p(k);
            let diag = model.kernel(p, p, d)?.re;
            Ok(measure * diag * state.amplitudes()[k].norm_sqr() / d.velocity(p).abs())
        })
        .sum()
}

/// Total-variation distance between the conditioned forms of two densities.
pub fn total_variation(a: &ToADensity, b: &ToADensity) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::invalid("densities live on different time grids"));
    }
    crate::quadrature::total_variation(&a.values, &b.values, a.grid.dt())
}

/// Uniform `x` nodes covering the position support of `state`, inside the
/// cell on which its Wigner function is resolvable.
pub fn phase_space_window(state: &WavePacket, n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::invalid("phase-space window needs at least 4 nodes"));
    }
    let s = state.to_position(0.0);
    let max = s.psi.iter().fold(0.0f64, |a, z| a.max(z.norm_sqr()));
    let inside: Vec<f64> = s
        .x
        .iter()
        .zip(&s.psi)
        .filter(|(_, z)| z.norm_sqr() >= 1e-16 * max)
        .map(|(x, _)| *x)
        .collect();
    let (lo, hi) = (inside[0], inside[inside.len() - 1]);
    let pad = 0.1 * (hi - lo);
    let limit = 0.999 * PI / (2.0 * state.grid().dp());
    let (lo, hi) = ((lo - pad).max(-limit), (hi + pad).min(limit));
    Ok((0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect())
}
