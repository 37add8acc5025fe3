use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energy-momentum relation `ε_p` with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Dispersion {
    /// `p²/2m`.
    Nonrelativistic { m: f64 },
    /// `√(p² + m²)`.
    Relativistic { m: f64 },
    /// `√(p² + m²) - E0`.
    ThresholdShifted {
        m: f64,
        #[serde(rename = "E0")]
        e0: f64,
    },
}

impl Dispersion {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Dispersion::Nonrelativistic { m } if !(m.is_finite() && m > 0.0) => Err(
                Error::invariant(format!("nonrelativistic mass must be positive, got {m}")),
            ),
            Dispersion::Relativistic { m } | Dispersion::ThresholdShifted { m, .. }
                if !(m.is_finite() && m >= 0.0) =>
            {
                Err(Error::invariant(format!("mass must be non-negative, got {m}")))
            }
            Dispersion::ThresholdShifted { e0, .. } if !e0.is_finite() => {
                Err(Error::invariant("threshold E0 must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn mass(&self) -> f64 {
        match *self {
            Dispersion::Nonrelativistic { m }
            | Dispersion::Relativistic { m }
            | Dispersion::ThresholdShifted { m, .. } => m,
        }
    }

    pub fn energy(&self, p: f64) -> f64 {
        match *self {
            Dispersion::Nonrelativistic { m } => p * p / (2.0 * m),
            Dispersion::Relativistic { m } => p.hypot(m),
            Dispersion::ThresholdShifted { m, e0 } => p.hypot(m) - e0,
        }
    }

    /// Group velocity `v_p = ∂ε/∂p`.
    pub fn velocity(&self, p: f64) -> f64 {
        match *self {
            Dispersion::Nonrelativistic { m } => p / m,
            Dispersion::Relativistic { m } | Dispersion::ThresholdShifted { m, .. } => {
                p / p.hypot(m)
            }
        }
    }

    /// `v'_p = ∂²ε/∂p²`.
    pub fn velocity_slope(&self, p: f64) -> f64 {
        match *self {
            Dispersion::Nonrelativistic { m } => 1.0 / m,
            Dispersion::Relativistic { m } | Dispersion::ThresholdShifted { m, .. } => {
                let e = p.hypot(m);
                m * m / (e * e * e)
            }
        }
    }

    /// `v''_p = ∂³ε/∂p³`.
    pub fn velocity_curvature(&self, p: f64) -> f64 {
        match *self {
            Dispersion::Nonrelativistic { .. } => 0.0,
            Dispersion::Relativistic { m } | Dispersion::ThresholdShifted { m, .. } => {
                let e = p.hypot(m);
                -3.0 * m * m * p / e.powi(5)
            }
        }
    }
}
