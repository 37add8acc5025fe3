//! One-dimensional states on a uniform momentum grid, dispersion relations,
//! free evolution and Wigner functions.

mod dispersion;
mod grid;
mod state;
mod wigner;

pub use dispersion::Dispersion;
pub use grid::MomentumGrid;
pub use state::{gaussian_packet, MixedState, PositionSamples, WavePacket};
pub use wigner::{wigner, wigner_rows, WignerField};
