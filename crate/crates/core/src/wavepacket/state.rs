use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Dispersion, MomentumGrid};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;
const NEGATIVE_MOMENTUM_TOL: f64 = 1e-8;
const CLIP_TOL: f64 = 1e-8;

/// A pure state `ψ̃(p)` on a momentum grid, normalized so that
/// `Σ (Δp/2π) |ψ̃|² = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPacket", into = "RawPacket")]
pub struct WavePacket {
    grid: MomentumGrid,
    amplitudes: Vec<Complex64>,
    positive_support: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    grid: MomentumGrid,
    amplitudes: Vec<Complex64>,
    #[serde(default)]
    positive_support: bool,
}

impl TryFrom<RawPacket> for WavePacket {
    type Error = Error;
    fn try_from(r: RawPacket) -> Result<Self> {
        let w = WavePacket::from_amplitudes(r.grid, r.amplitudes)?;
        if r.positive_support {
            w.with_positive_support()
        } else {
            Ok(w)
        }
    }
}

impl From<WavePacket> for RawPacket {
    fn from(w: WavePacket) -> Self {
        RawPacket {
            grid: w.grid,
            amplitudes: w.amplitudes,
            positive_support: w.positive_support,
        }
    }
}

/// `ψ(x_j)` on the position grid conjugate to the momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSamples {
    pub x: Vec<f64>,
    pub psi: Vec<Complex64>,
}

impl WavePacket {
    /// Normalizes `amplitudes` to unit norm.
    pub fn from_amplitudes(grid: MomentumGrid, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::invariant(format!(
                "{} amplitudes for a grid of {} nodes",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invariant("wave packet has non-finite amplitudes"));
        }
        let norm = grid.measure() * amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invariant("wave packet has zero norm"));
        }
        let scale = norm.sqrt().recip();
        for z in amplitudes.iter_mut() {
            *z *= scale;
        }
        let w = WavePacket {
            grid,
            amplitudes,
            positive_support: false,
        };
        if (w.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::numerical(
                "wavepacket",
                "from_amplitudes",
                format!("normalization failed: norm {}", w.norm()),
            ));
        }
        Ok(w)
    }

    /// Asserts that at most `1e-8` of the norm sits at `p <= 0`.
    pub fn with_positive_support(mut self) -> Result<Self> {
        let negative = self.negative_momentum_weight();
        if negative > NEGATIVE_MOMENTUM_TOL {
            return Err(Error::invariant(format!(
                "positive-momentum support: weight {negative:e} at p <= 0"
            )));
        }
        self.positive_support = true;
        Ok(self)
    }

    pub fn has_positive_support(&self) -> bool {
        self.positive_support
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.grid.measure() * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn negative_momentum_weight(&self) -> f64 {
        let m = self.grid.measure();
        (0..self.grid.len())
            .filter(|&k| self.grid.p(k) <= 0.0)
            .map(|k| m * self.amplitudes[k].norm_sqr())
            .sum()
    }

    fn momentum_moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        let m = self.grid.measure();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| m * z.norm_sqr() * f(self.grid.p(k)))
            .sum()
    }

    pub fn mean_momentum(&self) -> f64 {
        self.momentum_moment(|p| p)
    }

    pub fn momentum_variance(&self) -> f64 {
        let mean = self.mean_momentum();
        self.momentum_moment(|p| (p - mean) * (p - mean))
    }

    /// Nodes carrying amplitude above `rel · max|ψ̃|`.
    pub fn support(&self, rel: f64) -> Vec<usize> {
        let max = self.amplitudes.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        (0..self.grid.len())
            .filter(|&k| self.amplitudes[k].norm() >= rel * max)
            .collect()
    }

    pub fn inner(&self, other: &WavePacket) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::invalid("inner product of packets on different grids"));
        }
        let m = self.grid.measure();
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * m)
    }

    /// Free evolution `ψ̃(p) → e^{-iε_p t} ψ̃(p)`.
    pub fn evolve(&self, d: &Dispersion, t: f64) -> WavePacket {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| z * Complex64::from_polar(1.0, -d.energy(self.grid.p(k)) * t))
            .collect();
        WavePacket {
            grid: self.grid,
            amplitudes,
            positive_support: self.positive_support,
        }
    }

    /// `ψ(x) = Σ (Δp/2π) ψ̃(p) e^{ipx}` at a single point.
    pub fn value_at(&self, x: f64) -> Complex64 {
        let m = self.grid.measure();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| z * Complex64::from_polar(1.0, self.grid.p(k) * x))
            .sum::<Complex64>()
            * m
    }

    /// Position samples `x_j = x_center + (j - n/2) Δx`, `Δx = 2π/(nΔp)`.
    pub fn to_position(&self, x_center: f64) -> PositionSamples {
        let n = self.grid.len();
        let dp = self.grid.dp();
        let dx = self.grid.dx();
        let x: Vec<f64> = (0..n)
            .map(|j| x_center + (j as f64 - (n / 2) as f64) * dx)
            .collect();
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                z * Complex64::from_polar(sign, k as f64 * dp * x_center)
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let m = self.grid.measure();
        let p_min = self.grid.p_min();
        let psi = buf
            .iter()
            .zip(&x)
            .map(|(z, &xj)| z * Complex64::from_polar(m, p_min * xj))
            .collect();
        PositionSamples { x, psi }
    }

    /// Inverse of [`Self::to_position`]; the samples must lie on the
    /// conjugate grid.
    pub fn amplitudes_from_position(grid: &MomentumGrid, s: &PositionSamples) -> Result<Vec<Complex64>> {
        let n = grid.len();
        let dx = grid.dx();
        if s.x.len() != n || s.psi.len() != n {
            return Err(Error::invalid("position samples do not match the grid size"));
        }
        let x_center = s.x[n / 2];
        if s.x.iter().enumerate().any(|(j, &x)| {
            (x - (x_center + (j as f64 - (n / 2) as f64) * dx)).abs() > 1e-9 * dx.max(x.abs())
        }) {
            return Err(Error::invalid("position samples are not on the conjugate grid"));
        }
        let p_min = grid.p_min();
        let mut buf: Vec<Complex64> = s
            .psi
            .iter()
            .zip(&s.x)
            .map(|(z, &x)| z * Complex64::from_polar(1.0, -p_min * x))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let dp = grid.dp();
        Ok(buf
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let sign = if k % 2 == 0 { dx } else { -dx };
                z * Complex64::from_polar(sign, -(k as f64) * dp * x_center)
            })
            .collect())
    }

    /// `⟨x⟩` from position samples centred at `x_center`.
    pub fn position_mean(&self, x_center: f64) -> f64 {
        let s = self.to_position(x_center);
        let dx = self.grid.dx();
        s.x.iter().zip(&s.psi).map(|(x, z)| x * z.norm_sqr() * dx).sum()
    }

    /// Normalized `Σ c_i ψ_i` of packets sharing one grid.
    pub fn superpose(terms: &[(Complex64, &WavePacket)]) -> Result<WavePacket> {
        let first = terms
            .first()
            .ok_or_else(|| Error::invalid("superposition of no packets"))?
            .1;
        let mut amps = vec![Complex64::new(0.0, 0.0); first.grid.len()];
        for (c, w) in terms {
            if w.grid != first.grid {
                return Err(Error::invalid("superposition of packets on different grids"));
            }
            for (a, z) in amps.iter_mut().zip(&w.amplitudes) {
                *a += c * z;
            }
        }
        WavePacket::from_amplitudes(first.grid, amps)
    }

    /// CSV with columns `p, re, im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "re", "im"])?;
        for (k, z) in self.amplitudes.iter().enumerate() {
            w.write_record([
                self.grid.p(k).to_string(),
                z.re.to_string(),
                z.im.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `ψ̃(p) ∝ exp[-(p-p0)²/(4Δp²) - i p x0]`.
pub fn gaussian_packet(grid: &MomentumGrid, p0: f64, width: f64, x0: f64) -> Result<WavePacket> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid(format!("momentum spread must be positive, got {width}")));
    }
    if !(p0.is_finite() && x0.is_finite()) {
        return Err(Error::invalid("packet centre must be finite"));
    }
    if p0 - 5.0 * width < grid.p_min() || p0 + 5.0 * width > grid.p_max() {
        return Err(Error::invalid(format!(
            "p0 ± 5Δp = [{}, {}] leaves the grid [{}, {}]",
            p0 - 5.0 * width,
            p0 + 5.0 * width,
            grid.p_min(),
            grid.p_max()
        )));
    }
    let weight = |p: f64| (-(p - p0) * (p - p0) / (2.0 * width * width)).exp();
    let dp = grid.dp();
    let inside: f64 = (0..grid.len()).map(|k| weight(grid.p(k))).sum();
    let tail = |start: f64, step: f64| {
        let mut sum = 0.0;
        let mut p = start;
        loop {
            let w = weight(p);
            sum += w;
            if w < 1e-40 * inside {
                break sum;
            }
            p += step;
        }
    };
    let outside = tail(grid.p_min() - dp, -dp) + tail(grid.p(grid.len() - 1) + dp, dp);
    let clipped = outside / (inside + outside);
    if clipped > CLIP_TOL {
        return Err(Error::invalid(format!(
            "grid clips {clipped:e} of the packet norm"
        )));
    }
    let amps = (0..grid.len())
        .map(|k| {
            let p = grid.p(k);
            Complex64::from_polar(
                (-(p - p0) * (p - p0) / (4.0 * width * width)).exp(),
                -p * x0,
            )
        })
        .collect();
    WavePacket::from_amplitudes(*grid, amps)
}

/// `ρ = Σ_i f_i |ψ_i⟩⟨ψ_i|` with non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    components: Vec<(f64, WavePacket)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, WavePacket)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invariant("mixed state needs at least one component"));
        }
        if components.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invariant("mixed-state weights must be non-negative"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::invariant(format!("mixed-state weights sum to {total}, not 1")));
        }
        let grid = components[0].1.grid;
        if components.iter().any(|(_, p)| p.grid != grid) {
            return Err(Error::invariant("mixed-state components must share one grid"));
        }
        Ok(MixedState { components })
    }

    pub fn components(&self) -> &[(f64, WavePacket)] {
        &self.components
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> MomentumGrid {
        MomentumGrid::new(0.0, 10.0, 4096).unwrap()
    }

    #[test]
    fn gaussian_moments() {
        let w = gaussian_packet(&grid(), 5.0, 0.25, 0.0).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-9);
        assert!((w.mean_momentum() - 5.0).abs() < 1e-6 * 0.25);
        assert!((w.momentum_variance() / 0.0625 - 1.0).abs() < 0.01);
    }

    #[test]
    fn clipping_rejected() {
        assert!(gaussian_packet(&grid(), 1.0, 0.25, 0.0).is_err());
        assert!(gaussian_packet(&grid(), 1.3, 0.25, 0.0).is_err());
        assert!(gaussian_packet(&grid(), 2.0, 0.25, 0.0).is_ok());
    }

    #[test]
    fn position_round_trip_and_mean() {
        let g = grid();
        let w = gaussian_packet(&g, 5.0, 0.25, 3.0).unwrap();
        let s = w.to_position(0.0);
        let back = WavePacket::amplitudes_from_position(&g, &s).unwrap();
        let err = back
            .iter()
            .zip(w.amplitudes())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(err < 1e-10, "{err}");
        assert!((w.position_mean(0.0) - 3.0).abs() < 4.0 * 1e-4);
        let direct = w.value_at(s.x[2100]);
        assert!((direct - s.psi[2100]).norm() < 1e-10);
    }

    #[test]
    fn evolution_is_unitary() {
        let g = grid();
        let d = Dispersion::Nonrelativistic { m: 1.0 };
        let a = gaussian_packet(&g, 5.0, 0.25, 0.0).unwrap();
        let b = gaussian_packet(&g, 4.5, 0.3, 2.0).unwrap();
        let before = a.inner(&b).unwrap();
        let after = a.evolve(&d, 37.0).inner(&b.evolve(&d, 37.0)).unwrap();
        assert!((before - after).norm() < 1e-10);
        assert!((a.evolve(&d, 100.0).norm() - 1.0).abs() < 1e-12);
        assert_eq!(a.evolve(&d, 0.0), a);
    }

    #[test]
    fn positive_support_flag() {
        let g = MomentumGrid::new(-10.0, 10.0, 1024).unwrap();
        assert!(gaussian_packet(&g, 5.0, 0.25, 0.0).unwrap().with_positive_support().is_ok());
        assert!(gaussian_packet(&g, 0.5, 0.25, 0.0).unwrap().with_positive_support().is_err());
    }

    #[test]
    fn mixed_weights_checked() {
        let w = gaussian_packet(&grid(), 5.0, 0.25, 0.0).unwrap();
        assert!(MixedState::new(vec![(0.5, w.clone()), (0.4, w.clone())]).is_err());
        assert!(MixedState::new(vec![(0.5, w.clone()), (0.5, w)]).is_ok());
    }
}
