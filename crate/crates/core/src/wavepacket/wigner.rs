use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::WavePacket;
use crate::error::{Error, Result};

/// Relative amplitude below which momentum nodes are treated as empty.
const SUPPORT_CUTOFF: f64 = 1e-9;

/// `W0(x,p)` sampled on a rectangular grid, rows indexed by momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major, `values[i * x.len() + j] = W(x_j, p_i)`.
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn row(&self, i: usize) -> &[f64] {
        let nx = self.x.len();
        &self.values[i * nx..(i + 1) * nx]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.x.len() + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Uniform spacing of the position nodes, if any.
    pub fn dx(&self) -> Option<f64> {
        if self.x.len() < 2 {
            return None;
        }
        let h = self.x[1] - self.x[0];
        let uniform = self
            .x
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
        uniform.then_some(h)
    }

    /// Catmull-Rom interpolation along row `i`, zero outside the sampled range.
    pub fn interpolate_row(&self, i: usize, x: f64) -> f64 {
        let row = self.row(i);
        let n = row.len();
        let h = self.x[1] - self.x[0];
        let s = (x - self.x[0]) / h;
        if !(s >= 0.0 && s <= (n - 1) as f64) {
            return 0.0;
        }
        let j = (s.floor() as usize).min(n - 2);
        let u = s - j as f64;
        let at = |k: isize| {
            if k < 0 || k as usize >= n {
                0.0
            } else {
                row[k as usize]
            }
        };
        let j = j as isize;
        let (y0, y1, y2, y3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
        let u2 = u * u;
        let u3 = u2 * u;
        0.5 * (2.0 * y1
            + (y2 - y0) * u
            + (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3) * u2
            + (3.0 * y1 - y0 - 3.0 * y2 + y3) * u3)
    }
}

/// `W0(x,p) = ∫ dξ/2π e^{ixξ} ψ̃(p+ξ/2) ψ̃*(p-ξ/2)` at a grid node (`half = 0`)
/// or half-way between nodes `k` and `k+1` (`half = 1`).
fn wigner_at(amps: &[Complex64], lo: usize, hi: usize, k: usize, half: usize, dp: f64, xs: &[f64]) -> Vec<f64> {
    // pairs (k + half + m, k - m), m >= 0, ξ = (2m + half) Δp
    let upper = k + half;
    let m_max = (k - lo).min(hi - upper);
    let pairs: Vec<Complex64> = (0..=m_max)
        .map(|m| amps[upper + m] * amps[k - m].conj())
        .collect();
    xs.iter()
        .map(|&x| {
            let step = Complex64::from_polar(1.0, 2.0 * x * dp);
            let mut phase = Complex64::from_polar(1.0, half as f64 * x * dp);
            let mut sum = 0.0;
            for (m, c) in pairs.iter().enumerate() {
                let term = (c * phase).re;
                sum += if m == 0 && half == 0 { term } else { 2.0 * term };
                phase *= step;
            }
            sum * dp / PI
        })
        .collect()
}

fn support_hull(state: &WavePacket) -> (usize, usize) {
    let s = state.support(SUPPORT_CUTOFF);
    (s[0], s[s.len() - 1])
}

fn check_x(state: &WavePacket, x_nodes: &[f64]) -> Result<()> {
    let limit = PI / (2.0 * state.grid().dp());
    if let Some(x) = x_nodes.iter().find(|x| !(x.abs() < limit)) {
        return Err(Error::invalid(format!(
            "x = {x} lies outside the resolvable cell |x| < {limit}"
        )));
    }
    Ok(())
}

/// Wigner function on arbitrary nodes. Momentum nodes must sit on grid nodes
/// or half-way between them.
pub fn wigner(state: &WavePacket, x_nodes: &[f64], p_nodes: &[f64]) -> Result<WignerField> {
    check_x(state, x_nodes)?;
    let g = state.grid();
    let dp = g.dp();
    let (lo, hi) = support_hull(state);
    let mut rows = Vec::with_capacity(p_nodes.len());
    for &p in p_nodes {
        let s = 2.0 * (p - g.p_min()) / dp;
        let twice = s.round();
        if (s - twice).abs() > 1e-6 || twice < 0.0 || twice > 2.0 * (g.len() - 1) as f64 {
            return Err(Error::invalid(format!(
                "p = {p} is not a grid node or half-node"
            )));
        }
        let twice = twice as usize;
        rows.push((twice / 2, twice % 2));
    }
    let amps = state.amplitudes();
    let values: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&(k, half)| {
            if k < lo || k + half > hi {
                vec![0.0; x_nodes.len()]
            } else {
                wigner_at(amps, lo, hi, k, half, dp, x_nodes)
            }
        })
        .collect();
    Ok(WignerField {
        x: x_nodes.to_vec(),
        p: p_nodes.to_vec(),
        values: values.concat(),
    })
}

/// Wigner function on every grid node inside the state's momentum support,
/// sampled at `x_nodes`.
pub fn wigner_rows(state: &WavePacket, x_nodes: &[f64]) -> Result<WignerField> {
    let (lo, hi) = support_hull(state);
    let p: Vec<f64> = (lo..=hi).map(|k| state.grid().p(k)).collect();
    wigner(state, x_nodes, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{gaussian_packet, MomentumGrid};

    fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn gaussian_is_nonnegative_with_correct_marginal() {
        let g = MomentumGrid::new(0.0, 10.0, 1024).unwrap();
        let w = gaussian_packet(&g, 5.0, 0.25, 1.5).unwrap();
        let xs = uniform(-25.0, 28.0, 1061);
        let f = wigner_rows(&w, &xs).unwrap();
        assert!(f.min() >= -1e-9);
        let dx = xs[1] - xs[0];
        let lo = g.p(0);
        for i in (0..f.p.len()).step_by(17) {
            let k = ((f.p[i] - lo) / g.dp()).round() as usize;
            let marginal: f64 = crate::quadrature::integrate(f.row(i), dx);
            assert!((marginal - w.amplitudes()[k].norm_sqr()).abs() < 1e-6);
        }
    }

    #[test]
    fn half_nodes_and_out_of_cell() {
        let g = MomentumGrid::new(0.0, 10.0, 256).unwrap();
        let w = gaussian_packet(&g, 5.0, 0.5, 0.0).unwrap();
        let half = g.p(128) + 0.5 * g.dp();
        assert!(wigner(&w, &[0.0], &[half]).is_ok());
        assert!(wigner(&w, &[0.0], &[g.p(128) + 0.3 * g.dp()]).is_err());
        assert!(wigner(&w, &[1e6], &[g.p(128)]).is_err());
    }

    #[test]
    fn peak_sits_at_packet_position() {
        let g = MomentumGrid::new(0.0, 10.0, 1024).unwrap();
        let w = gaussian_packet(&g, 5.0, 0.25, 4.0).unwrap();
        let f = wigner(&w, &[-4.0, 4.0], &[g.p(512)]).unwrap();
        assert!(f.value(0, 1) > 100.0 * f.value(0, 0).abs());
    }
}
