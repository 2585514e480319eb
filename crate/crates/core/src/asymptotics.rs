//! Leading-order long-time formula along rays `x = ξt`, evaluated two ways.

use crate::delta::DeltaData;
use crate::error::{Error, Result};
use crate::geometry::{stationary_points, RaySpec};
use crate::linalg::{C64, I, ZERO};
use crate::model::{arg_gamma_i, beta_x, beta_y, BetaYSign};
use crate::Equation;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance between the theorem form and the `β`/`δ⁰` route.
pub const ROUTE_TOL: f64 = 1e-10;
/// Earliest time used in comparisons.
pub const T_MIN: f64 = 10.0;

/// Squared length inside the logarithms of the `δ⁰` factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogFactor {
    /// `k₁²` at both stationary points.
    Printed,
    /// `(k₂ − k₁)²`, from expanding `δ` about `k_j` with the other endpoint frozen.
    Derived,
}

/// The two independent choices that the formula leaves open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPolicy {
    pub log_factor: LogFactor,
    pub beta_y: BetaYSign,
}

impl Default for BranchPolicy {
    fn default() -> Self {
        Self { log_factor: LogFactor::Printed, beta_y: BetaYSign::Printed }
    }
}

impl BranchPolicy {
    pub fn all() -> [BranchPolicy; 4] {
        let mut out = [BranchPolicy::default(); 4];
        let mut i = 0;
        for log_factor in [LogFactor::Printed, LogFactor::Derived] {
            for beta_y in [BetaYSign::Printed, BetaYSign::Derived] {
                out[i] = BranchPolicy { log_factor, beta_y };
                i += 1;
            }
        }
        out
    }

    pub fn label(&self) -> String {
        let f = |p: bool| if p { "printed" } else { "derived" };
        format!("log-{}/betaY-{}", f(self.log_factor == LogFactor::Printed), f(self.beta_y == BetaYSign::Printed))
    }

    fn squared_length(&self, d: &DeltaData) -> f64 {
        match self.log_factor {
            LogFactor::Printed => d.pair.k1 * d.pair.k1,
            LogFactor::Derived => (d.pair.k2 - d.pair.k1).powi(2),
        }
    }
}

/// Everything the formula needs along one ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayData {
    pub xi: f64,
    pub equation: Equation,
    pub delta: DeltaData,
}

impl RayData {
    pub fn new(ray: &RaySpec, delta: DeltaData) -> Self {
        Self { xi: ray.xi, equation: ray.equation, delta }
    }

    /// `α + 6βk₁ < 0`.
    pub fn c1(&self) -> f64 {
        self.equation.alpha + 6.0 * self.equation.beta * self.delta.pair.k1
    }

    /// `α + 6βk₂ > 0`.
    pub fn c2(&self) -> f64 {
        self.equation.alpha + 6.0 * self.equation.beta * self.delta.pair.k2
    }

    /// `k_j² t (α + 4βk_j)`.
    fn quadratic_phase(&self, k: f64, t: f64) -> f64 {
        k * k * t * (self.equation.alpha + 4.0 * self.equation.beta * k)
    }

    pub fn amplitude_a(&self) -> f64 {
        (self.delta.nu1 / (-2.0 * self.c1())).sqrt()
    }

    pub fn amplitude_b(&self) -> f64 {
        (self.delta.nu2 / (2.0 * self.c2())).sqrt()
    }

    /// Upper bound on `|u_as|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.amplitude_a() + self.amplitude_b()
    }
}

/// `(φ_a, φ_b)`, reduced to `(−π, π]`.
pub fn phases(ray: &RayData, t: f64, policy: &BranchPolicy) -> Result<(f64, f64)> {
    let (a, b) = raw_phases(ray, t, policy)?;
    Ok((wrap(a), wrap(b)))
}

fn wrap(p: f64) -> f64 {
    C64::from_polar(1.0, p).arg()
}

// ν = 0 only arises with a vanishing amplitude, so the phase there is immaterial
fn arg_gamma(nu: f64) -> Result<f64> {
    if nu == 0.0 {
        Ok(0.0)
    } else {
        arg_gamma_i(nu)
    }
}

fn raw_phases(ray: &RayData, t: f64, policy: &BranchPolicy) -> Result<(f64, f64)> {
    let d = &ray.delta;
    let l = policy.squared_length(d);
    let (k1, k2) = (d.pair.k1, d.pair.k2);
    // −(1/π)∫ ln(...) ds/(s − k_j) = −2iχ_j(k_j)
    let int_a = (-2.0 * I * d.chi1_at_k1).re;
    let int_b = (-2.0 * I * d.chi2_at_k2).re;
    let mut phi_a = -PI / 4.0 - d.r1.arg() + arg_gamma(d.nu1)? - d.nu1 * (-8.0 * t * l * ray.c1()).ln()
        + 4.0 * ray.quadratic_phase(k1, t)
        + int_a;
    if policy.beta_y == BetaYSign::Derived {
        phi_a += PI;
    }
    let phi_b = PI / 4.0 - d.r2.arg() - arg_gamma(d.nu2)? + d.nu2 * (8.0 * t * l * ray.c2()).ln()
        + 4.0 * ray.quadratic_phase(k2, t)
        + int_b;
    Ok((phi_a, phi_b))
}

/// `(δ⁰_{k₁}, δ⁰_{k₂})`.
pub fn delta0_factors(ray: &RayData, t: f64, policy: &BranchPolicy) -> (C64, C64) {
    let d = &ray.delta;
    let l = policy.squared_length(d);
    let (k1, k2) = (d.pair.k1, d.pair.k2);
    let d01 = C64::new(-8.0 * t * l * ray.c1(), 0.0).powc(C64::new(0.0, -d.nu1 / 2.0))
        * d.chi1_at_k1.exp()
        * (2.0 * I * ray.quadratic_phase(k1, t)).exp();
    let d02 = C64::new(8.0 * t * l * ray.c2(), 0.0).powc(C64::new(0.0, d.nu2 / 2.0))
        * d.chi2_at_k2.exp()
        * (2.0 * I * ray.quadratic_phase(k2, t)).exp();
    (d01, d02)
}

/// Leading coefficient at one `(ξ, t)` with both evaluation routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub xi: f64,
    pub t: f64,
    pub u_as: C64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub route2: C64,
    pub consistency: f64,
}

impl AsymptoticValue {
    /// `u_as/√t`.
    pub fn u_leading(&self) -> C64 {
        self.u_as / self.t.sqrt()
    }
}

/// `u_as(x, t)` from the phase formulas, checked against
/// `2i(−iβ^Y (δ⁰₁)²/√(−8tc₁) − iβ^X (δ⁰₂)²/√(8tc₂))·√t`.
pub fn u_as(ray: &RayData, t: f64, policy: &BranchPolicy) -> Result<AsymptoticValue> {
    let d = &ray.delta;
    let (phi_a, phi_b) = raw_phases(ray, t, policy)?;
    let term_a = if d.nu1 > 0.0 { C64::from_polar(ray.amplitude_a(), phi_a) } else { ZERO };
    let term_b = if d.nu2 > 0.0 { C64::from_polar(ray.amplitude_b(), phi_b) } else { ZERO };
    let u = term_a + term_b;

    let (d01, d02) = delta0_factors(ray, t, policy);
    let by = beta_y(d.r1, policy.beta_y)?;
    let bx = beta_x(d.r2)?;
    let route2 = 2.0
        * I
        * (-I * by * d01 * d01 / (-8.0 * t * ray.c1()).sqrt() - I * bx * d02 * d02 / (8.0 * t * ray.c2()).sqrt())
        * t.sqrt();
    let consistency = (u - route2).norm();
    if consistency > ROUTE_TOL * (u.norm() + 1.0) {
        return Err(Error::RouteMismatch { diff: consistency, tol: ROUTE_TOL });
    }
    Ok(AsymptoticValue { xi: ray.xi, t, u_as: u, phi_a: wrap(phi_a), phi_b: wrap(phi_b), route2, consistency })
}

/// Stationary points of a ray paired with precomputed `δ` data, checked for agreement.
pub fn ray_data(eq: Equation, xi: f64, cap: f64, delta: DeltaData) -> Result<RayData> {
    let ray = RaySpec::new(xi, eq, cap)?;
    let pair = stationary_points(&ray);
    if (pair.k1 - delta.pair.k1).abs() > 1e-14 || (pair.k2 - delta.pair.k2).abs() > 1e-14 {
        return Err(Error::Config(format!("delta data computed for another ray than ξ = {xi}")));
    }
    Ok(RayData::new(&ray, delta))
}
