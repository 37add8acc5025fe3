use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform momentum nodes `p_k = p_min + k Δp`, `k = 0..n`, with
/// `Δp = (p_max - p_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct MomentumGrid {
    p_min: f64,
    p_max: f64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    p_min: f64,
    p_max: f64,
    n_points: usize,
}

impl TryFrom<RawGrid> for MomentumGrid {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        MomentumGrid::new(r.p_min, r.p_max, r.n_points)
    }
}

impl From<MomentumGrid> for RawGrid {
    fn from(g: MomentumGrid) -> Self {
        RawGrid {
            p_min: g.p_min,
            p_max: g.p_max,
            n_points: g.n,
        }
    }
}

impl MomentumGrid {
    pub fn new(p_min: f64, p_max: f64, n_points: usize) -> Result<Self> {
        if !(p_min.is_finite() && p_max.is_finite() && p_min < p_max) {
            return Err(Error::invariant(format!(
                "momentum grid needs p_min < p_max, got [{p_min}, {p_max}]"
            )));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::invariant(format!(
                "momentum grid size must be a power of two, got {n_points}"
            )));
        }
        Ok(MomentumGrid {
            p_min,
            p_max,
            n: n_points,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.n as f64
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p_min + k as f64 * self.dp()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }

    /// Period of the conjugate position grid, `2π/Δp`.
    pub fn position_span(&self) -> f64 {
        2.0 * PI / self.dp()
    }

    pub fn dx(&self) -> f64 {
        self.position_span() / self.n as f64
    }

    /// `∫ dp/2π f(p) ≈ Σ_k (Δp/2π) f(p_k)`.
    pub fn measure(&self) -> f64 {
        self.dp() / (2.0 * PI)
    }
}
