//! Phase function, admissible rays and the contour `Σ = {Im ω(k) = 0}`.

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use crate::Equation;
use serde::{Deserialize, Serialize};

/// Relative margin kept below the caustic `ξ = α²/(3β)`.
pub const CAUSTIC_MARGIN: f64 = 1e-6;

/// A ray `ξ = x/t` with `0 < ξ ≤ N` and `ξ < α²/(3β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaySpec {
    pub xi: f64,
    pub equation: Equation,
    pub cap: f64,
}

impl RaySpec {
    pub fn new(xi: f64, equation: Equation, cap: f64) -> Result<Self> {
        let upper = caustic(&equation).min(cap);
        if !(xi > 0.0) || xi > cap || xi >= caustic(&equation) * (1.0 - CAUSTIC_MARGIN) {
            return Err(Error::OutsideInterval { xi, upper });
        }
        Ok(Self { xi, equation, cap })
    }

    /// Ray with the cap at the caustic.
    pub fn uncapped(xi: f64, equation: Equation) -> Result<Self> {
        Self::new(xi, equation, caustic(&equation))
    }
}

/// `α²/(3β)`, where the two stationary points merge.
pub fn caustic(eq: &Equation) -> f64 {
    eq.alpha * eq.alpha / (3.0 * eq.beta)
}

/// `Φ(k) = 2i(kξ + 4βk³ + 2αk²)`.
pub fn phi(k: C64, ray: &RaySpec) -> C64 {
    I * 2.0 * (k * ray.xi + ray.equation.omega(k))
}

/// `Φ′(k) = 2i(ξ + 12βk² + 4αk)`.
pub fn phi_prime(k: C64, ray: &RaySpec) -> C64 {
    let eq = &ray.equation;
    I * 2.0 * (k * k * (12.0 * eq.beta) + k * (4.0 * eq.alpha) + ray.xi)
}

/// The real stationary points `k₁ < k₂` of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPair {
    pub k1: f64,
    pub k2: f64,
    pub residual1: f64,
    pub residual2: f64,
}

pub fn stationary_points(ray: &RaySpec) -> StationaryPair {
    let (a, b) = (ray.equation.alpha, ray.equation.beta);
    let root = (a * a - 3.0 * b * ray.xi).sqrt();
    let k1 = (-a - root) / (6.0 * b);
    let k2 = (-a + root) / (6.0 * b);
    StationaryPair {
        k1,
        k2,
        residual1: phi_prime(C64::new(k1, 0.0), ray).norm(),
        residual2: phi_prime(C64::new(k2, 0.0), ray).norm(),
    }
}

/// Upper-half-plane branch of `Σ` leaving the real axis at `0` (right) or at `k₀` (left).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// `η(ξ) = √(3ξ² + (α/β)ξ)`.
pub fn branch_height(eq: &Equation, xi: f64) -> f64 {
    (3.0 * xi * xi + eq.alpha / eq.beta * xi).max(0.0).sqrt()
}

/// Real part where the branch on `side` meets `|k| = R`.
pub fn branch_end(eq: &Equation, side: Side, radius: f64) -> f64 {
    let q = eq.alpha / eq.beta;
    let disc = (q * q + 16.0 * radius * radius).sqrt();
    match side {
        Side::Right => (-q + disc) / 8.0,
        Side::Left => (-q - disc) / 8.0,
    }
}

/// `n + 1` points of the upper branch on `side`, from its real foot out to `|k| = R`,
/// spaced uniformly in arc length.
pub fn branch_points(eq: &Equation, side: Side, radius: f64, n: usize) -> Vec<C64> {
    let (foot, end) = match side {
        Side::Right => (0.0, branch_end(eq, side, radius)),
        Side::Left => (eq.k0(), branch_end(eq, side, radius)),
    };
    // near the foot η ~ √|ξ − foot|, so ξ = foot + (end − foot)s² evens out arc length there
    let mut raw: Vec<C64> = (0..=4 * n)
        .map(|j| {
            let s = j as f64 / (4 * n) as f64;
            let xi = foot + (end - foot) * s * s;
            C64::new(xi, branch_height(eq, xi))
        })
        .collect();
    raw[4 * n] = C64::new(end, branch_height(eq, end));
    let mut cum = vec![0.0];
    for w in raw.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = cum[4 * n];
    let mut j = 0;
    let mut out: Vec<C64> = (0..=n)
        .map(|i| {
            let target = total * i as f64 / n as f64;
            while j + 2 < cum.len() && cum[j + 1] < target {
                j += 1;
            }
            let w = ((target - cum[j]) / (cum[j + 1] - cum[j])).clamp(0.0, 1.0);
            let xi = raw[j].re + (raw[j + 1].re - raw[j].re) * w;
            C64::new(xi, branch_height(eq, xi))
        })
        .collect();
    out[0] = raw[0];
    out[n] = raw[4 * n];
    out
}

/// Truncated `Σ` in the closed upper half plane: the real segment and the two branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaContour {
    pub radius: f64,
    pub real: (f64, f64),
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

impl SigmaContour {
    /// Largest `|Im ω|` over the branch samples.
    pub fn max_residual(&self, eq: &Equation) -> f64 {
        self.right.iter().chain(&self.left).map(|&k| eq.omega(k).im.abs()).fold(0.0, f64::max)
    }
}

pub fn sigma_contour(eq: &Equation, radius: f64, n: usize) -> Result<SigmaContour> {
    if radius <= -eq.k0() {
        return Err(Error::Config(format!("R = {radius} must exceed α/(3β) = {}", -eq.k0())));
    }
    Ok(SigmaContour {
        radius,
        real: (-radius, radius),
        right: branch_points(eq, Side::Right, radius, n),
        left: branch_points(eq, Side::Left, radius, n),
    })
}

/// Arc of `|k| = R` from `from` to `to` (arguments, counter-clockwise), `n` intervals.
pub fn arc(radius: f64, from: f64, to: f64, n: usize) -> Vec<C64> {
    (0..=n).map(|j| C64::from_polar(radius, from + (to - from) * j as f64 / n as f64)).collect()
}

fn segment(a: f64, b: f64, n: usize) -> Vec<C64> {
    (0..=n).map(|j| C64::new(a + (b - a) * j as f64 / n as f64, 0.0)).collect()
}

fn join(parts: Vec<Vec<C64>>) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for part in parts {
        let skip = usize::from(!out.is_empty());
        out.extend(part.into_iter().skip(skip));
    }
    out.pop();
    out
}

/// Closed counter-clockwise boundary of the upper half disk `|k| ≤ R`
/// (no repeated end point). `n` sets the density per unit length.
pub fn upper_half_disk(radius: f64, density: usize) -> Vec<C64> {
    let n_line = (2.0 * radius * density as f64).ceil() as usize;
    let n_arc = (std::f64::consts::PI * radius * density as f64).ceil() as usize;
    join(vec![segment(-radius, radius, n_line), arc(radius, 0.0, std::f64::consts::PI, n_arc)])
}

/// Closed counter-clockwise boundary of the middle region above `[k₀, 0]`
/// truncated at `|k| = R`.
pub fn middle_region_boundary(eq: &Equation, radius: f64, density: usize) -> Vec<C64> {
    let per = |len: f64| ((len * density as f64).ceil() as usize).max(4);
    let right = branch_points(eq, Side::Right, radius, per(2.0 * radius));
    let mut left = branch_points(eq, Side::Left, radius, per(2.0 * radius));
    left.reverse();
    let (th_r, th_l) = (right.last().unwrap().arg(), left[0].arg());
    join(vec![
        segment(eq.k0(), 0.0, per(-eq.k0())),
        right,
        arc(radius, th_r, th_l, per(radius * (th_l - th_r))),
        left,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQ: Equation = Equation { alpha: 1.0, beta: 1.0 };

    #[test]
    fn quarter_ray_has_exact_stationary_points() {
        let ray = RaySpec::uncapped(0.25, EQ).unwrap();
        let p = stationary_points(&ray);
        assert!((p.k1 + 0.25).abs() < 1e-15 && (p.k2 + 1.0 / 12.0).abs() < 1e-15);
        assert!(p.residual1 < 1e-12 && p.residual2 < 1e-12);
    }

    #[test]
    fn small_rays_approach_the_branch_points() {
        let p = stationary_points(&RaySpec::uncapped(1e-9, EQ).unwrap());
        assert!((p.k1 - EQ.k0()).abs() < 1e-8 && p.k2.abs() < 1e-8);
    }

    #[test]
    fn rays_outside_the_interval_are_rejected() {
        for xi in [0.0, -0.1, 1.0 / 3.0, 0.5] {
            assert!(matches!(RaySpec::uncapped(xi, EQ), Err(Error::OutsideInterval { .. })));
        }
        assert!(RaySpec::new(0.2, EQ, 0.1).is_err());
    }

    #[test]
    fn phi_is_imaginary_on_the_real_line() {
        let ray = RaySpec::uncapped(0.2, EQ).unwrap();
        assert_eq!(phi(C64::new(0.0, 0.0), &ray), C64::new(0.0, 0.0));
        for k in [-2.0, -0.3, 0.7, 3.0] {
            assert_eq!(phi(C64::new(k, 0.0), &ray).re, 0.0);
        }
    }

    #[test]
    fn unit_branch_point_lies_on_sigma() {
        assert_eq!(branch_height(&EQ, 1.0), 2.0);
        assert!(EQ.omega(C64::new(1.0, 2.0)).im.abs() < 1e-13);
    }

    #[test]
    fn sigma_samples_satisfy_the_defining_relation() {
        let r = 6.0;
        let s = sigma_contour(&EQ, r, 400).unwrap();
        assert!(s.max_residual(&EQ) <= 1e-12 * r * r * r);
        assert_eq!(s.right[0], C64::new(0.0, 0.0));
        assert_eq!(s.left[0], C64::new(EQ.k0(), 0.0));
        assert!((s.right.last().unwrap().norm() - r).abs() < 1e-12);
        assert!((s.left.last().unwrap().norm() - r).abs() < 1e-12);
    }

    #[test]
    fn middle_region_has_negative_imaginary_omega_inside() {
        let k = C64::new(-1.0 / 6.0, 1.0);
        assert!(EQ.omega(k).im < 0.0);
        let outer = C64::new(1.0, 0.5);
        assert!(EQ.omega(outer).im > 0.0);
    }
}
