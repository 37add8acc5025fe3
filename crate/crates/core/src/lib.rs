//! Numerical laboratory for time-of-arrival and transition-time probability
//! distributions.
//!
//! Units are natural with `ħ = 1`. Momentum-space wave functions follow
//! `ψ(x) = ∫ dp/2π ψ̃(p) e^{ipx}`.

pub mod detectors;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod oscillations;
pub mod quadrature;
pub mod scenario;
pub mod toa;
pub mod wavepacket;

pub use error::{Error, ErrorClass, Result};
