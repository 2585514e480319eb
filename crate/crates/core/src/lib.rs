//! Numerical laboratory for the Hirota equation on the half-line
//!
//! `i u_t + α(u_xx + 2|u|²u) + iβ(u_xxx + 6|u|²u_x) = 0`, `x > 0`.
//!
//! The pipeline manufactures consistent initial-boundary data with a
//! whole-line solver ([`pde`]), computes the spectral functions
//! `a, b, A, B` ([`lax`]) and the derived reflection data ([`scattering`]),
//! then evaluates the explicit long-time formula ([`asymptotics`]) along a
//! ray `ξ = x/t` and compares it with the direct solution ([`harness`]).

pub mod asymptotics;
pub mod delta;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod lax;
pub mod linalg;
pub mod model;
pub mod pde;
pub mod quadrature;
pub mod sampled;
pub mod scattering;

pub use error::{Error, Result};
pub use linalg::{Mat2, C64};
pub use sampled::SampledComplexFunction;

use serde::{Deserialize, Serialize};

/// Coefficients `α, β` of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Equation {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }
}

impl Equation {
    /// Temporal dispersion `ω(k) = 4βk³ + 2αk²`.
    pub fn omega(&self, k: C64) -> C64 {
        k * k * (k * (4.0 * self.beta) + 2.0 * self.alpha)
    }

    /// Branch point `k₀ = −α/(3β)` of `Σ`.
    pub fn k0(&self) -> f64 {
        -self.alpha / (3.0 * self.beta)
    }
}
