//! Quadrature engines: adaptive Gauss-Kronrod, Gregory rules on uniform
//! grids, chirp-z sums, oscillatory time integrals and stationary phase.

pub mod adaptive;
pub mod chirpz;
pub mod gauss;
pub mod gregory;
pub mod oscillatory;
pub mod saddle;

pub use adaptive::{adaptive_quad, adaptive_quad_budget, adaptive_quad_complex, QuadratureResult, Tolerance};
pub use oscillatory::oscillatory_amplitude;
pub use saddle::{find_saddles, stationary_phase_amplitude_sq, Branch, SaddlePoint};
