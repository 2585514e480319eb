//! The scalar function `δ(k)`, the exponents `ν(k_j)` and the Cauchy
//! integrals `χ_j`.

use crate::error::{Error, Result};
use crate::geometry::StationaryPair;
use crate::linalg::{C64, I};
use crate::quadrature::GaussLegendre;
use crate::sampled::ComplexSpline;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this distance from its own endpoint the `χ_j` integrand takes its limit value.
const REMOVABLE_RADIUS: f64 = 1e-9;
/// Evaluation points closer than this to an endpoint use the factorized form.
pub const FACTORIZED_RADIUS: f64 = 0.1;

/// `ν = ln(1 + |r|²)/(2π)`.
pub fn nu(r: C64) -> f64 {
    r.norm_sqr().ln_1p() / (2.0 * PI)
}

/// Reflection coefficient on an interval, with its derivative.
pub trait ReflectionProfile: Sync {
    fn r(&self, s: f64) -> C64;
    fn dr(&self, s: f64) -> C64;

    /// `w(s) = ln(1 + |r(s)|²)`.
    fn w(&self, s: f64) -> f64 {
        self.r(s).norm_sqr().ln_1p()
    }

    fn dw(&self, s: f64) -> f64 {
        let r = self.r(s);
        2.0 * (r.conj() * self.dr(s)).re / (1.0 + r.norm_sqr())
    }
}

impl ReflectionProfile for ComplexSpline {
    fn r(&self, s: f64) -> C64 {
        self.eval(s)
    }

    fn dr(&self, s: f64) -> C64 {
        self.deriv(s)
    }
}

/// A profile given in closed form.
pub struct ClosedForm<F, G> {
    pub r: F,
    pub dr: G,
}

impl<F: Fn(f64) -> C64 + Sync, G: Fn(f64) -> C64 + Sync> ReflectionProfile for ClosedForm<F, G> {
    fn r(&self, s: f64) -> C64 {
        (self.r)(s)
    }

    fn dr(&self, s: f64) -> C64 {
        (self.dr)(s)
    }
}

/// Panel counts and tolerance for the Cauchy integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Initial number of uniform 32-point panels on `[k₁, k₂]`.
    pub panels: usize,
    /// Largest number of panels tried before giving up.
    pub max_panels: usize,
    /// Accepted change between successive doublings.
    pub tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { panels: 8, max_panels: 1024, tol: 1e-8 }
    }
}

/// Breakpoints on `[a, b]` from `n` uniform panels, refined dyadically toward
/// `focus` down to the scale `eps`.
fn breaks_toward(a: f64, b: f64, n: usize, focus: f64, eps: f64) -> Vec<f64> {
    let h = (b - a) / n as f64;
    let mut out: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    out[n] = b;
    let mut d = h;
    while d > eps {
        d *= 0.5;
        for x in [focus - d, focus + d] {
            if x > a && x < b {
                out.push(x);
            }
        }
    }
    if focus > a && focus < b {
        out.push(focus);
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    out
}

/// `∫_{k₁}^{k₂} g(s)/(s − k) ds` for smooth `g` and `k` off the segment.
///
/// The value `g(m)` at the nearest point `m` of the segment is subtracted and
/// integrated in closed form; the remainder is bounded and is resolved by
/// panels graded toward `m`.
pub fn cauchy_integral(
    g: &dyn Fn(f64) -> f64,
    pair: &StationaryPair,
    k: C64,
    gl: &GaussLegendre,
    opts: &QuadratureOptions,
) -> Result<C64> {
    let (a, b) = (pair.k1, pair.k2);
    if k.im == 0.0 && k.re >= a && k.re <= b {
        return Err(Error::OnBranchCut { k, k1: a, k2: b });
    }
    let m = k.re.clamp(a, b);
    let gm = g(m);
    let dist = (k - C64::new(m, 0.0)).norm();
    let closed = gm * ((C64::new(b, 0.0) - k).ln() - (C64::new(a, 0.0) - k).ln());
    let eval = |n: usize| {
        let br = breaks_toward(a, b, n, m, 0.25 * dist);
        gl.composite(&br, |s| {
            let num = g(s) - gm;
            if num == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                num / (C64::new(s, 0.0) - k)
            }
        })
    };
    converge(eval, opts).map(|v| v + closed)
}

fn converge(mut eval: impl FnMut(usize) -> C64, opts: &QuadratureOptions) -> Result<C64> {
    let mut n = opts.panels.max(1);
    let mut prev = eval(n);
    let mut change = f64::INFINITY;
    while n < opts.max_panels {
        n *= 2;
        let next = eval(n);
        change = (next - prev).norm();
        prev = next;
        if change <= opts.tol {
            return Ok(prev);
        }
    }
    Err(Error::QuadratureNotConverged { change, tol: opts.tol })
}

/// Which stationary point a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    K1,
    K2,
}

impl Endpoint {
    pub fn of(self, pair: &StationaryPair) -> f64 {
        match self {
            Endpoint::K1 => pair.k1,
            Endpoint::K2 => pair.k2,
        }
    }
}

/// `χ_j(k_j) = (1/2πi) ∫ ln((1 + |r(s)|²)/(1 + |r(k_j)|²)) ds/(s − k_j)`.
///
/// The integrand is removable at `s = k_j`; there it is replaced by `w′(k_j)`.
pub fn chi(j: Endpoint, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<C64> {
    let kj = j.of(pair);
    let wj = profile.w(kj);
    let slope = profile.dw(kj);
    let gl = GaussLegendre::new(32);
    let scale = (pair.k2 - pair.k1).abs().max(1.0);
    let eval = |n: usize| {
        let br = breaks_toward(pair.k1, pair.k2, n, kj, 1e-6 * (pair.k2 - pair.k1));
        gl.composite(&br, |s| {
            let d = s - kj;
            let v = if d.abs() < REMOVABLE_RADIUS * scale { slope } else { (profile.w(s) - wj) / d };
            C64::new(v, 0.0)
        })
    };
    converge(eval, opts).map(|v| v / (2.0 * PI * I))
}

/// `χ_j(k)` at a general point off the segment.
pub fn chi_at(j: Endpoint, k: C64, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<C64> {
    let wj = profile.w(j.of(pair));
    let gl = GaussLegendre::new(32);
    let g = |s: f64| profile.w(s) - wj;
    cauchy_integral(&g, pair, k, &gl, opts).map(|v| v / (2.0 * PI * I))
}

/// `δ(k)` from the defining integral.
pub fn delta_direct(k: C64, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<C64> {
    let gl = GaussLegendre::new(32);
    let g = |s: f64| profile.w(s);
    cauchy_integral(&g, pair, k, &gl, opts).map(|v| (v / (2.0 * PI * I)).exp())
}

/// `δ(k) = ((k − k₂)/(k − k₁))^{−iν(k_j)} e^{χ_j(k)}`.
pub fn delta_factorized(j: Endpoint, k: C64, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<C64> {
    let nu_j = nu(profile.r(j.of(pair)));
    let ratio = (k - pair.k2) / (k - pair.k1);
    let chi = chi_at(j, k, pair, profile, opts)?;
    Ok((-I * nu_j * ratio.ln() + chi).exp())
}

/// `δ(k)`: factorized about the nearer endpoint within [`FACTORIZED_RADIUS`],
/// direct quadrature elsewhere.
pub fn delta(k: C64, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<C64> {
    let d1 = (k - pair.k1).norm();
    let d2 = (k - pair.k2).norm();
    if d1.min(d2) < FACTORIZED_RADIUS {
        let j = if d1 <= d2 { Endpoint::K1 } else { Endpoint::K2 };
        delta_factorized(j, k, pair, profile, opts)
    } else {
        delta_direct(k, pair, profile, opts)
    }
}

/// Boundary values of `δ` at a real `k` from above and below, from samples at
/// `k ± iε, ±2iε, ±4iε` extrapolated to remove the `O(ε)` and `O(ε²)` terms.
pub fn boundary_values(k: f64, eps: f64, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<(C64, C64)> {
    let side = |sign: f64| -> Result<C64> {
        let f = |h: f64| delta(C64::new(k, sign * h), pair, profile, opts);
        Ok((f(eps)? * 8.0 - f(2.0 * eps)? * 6.0 + f(4.0 * eps)?) / 3.0)
    };
    Ok((side(1.0)?, side(-1.0)?))
}

/// `δ(k − i0)/δ(k + i0)`, equal to `1/(1 + |r(k)|²)` inside `(k₁, k₂)` and to 1 outside.
pub fn jump_ratio(k: f64, eps: f64, pair: &StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<C64> {
    let (above, below) = boundary_values(k, eps, pair, profile, opts)?;
    Ok(below / above)
}

/// Exponents and Cauchy integrals at the two stationary points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaData {
    pub pair: StationaryPair,
    pub r1: C64,
    pub r2: C64,
    pub nu1: f64,
    pub nu2: f64,
    pub chi1_at_k1: C64,
    pub chi2_at_k2: C64,
}

impl DeltaData {
    pub fn new(pair: StationaryPair, profile: &dyn ReflectionProfile, opts: &QuadratureOptions) -> Result<Self> {
        let r1 = profile.r(pair.k1);
        let r2 = profile.r(pair.k2);
        Ok(Self {
            pair,
            r1,
            r2,
            nu1: nu(r1),
            nu2: nu(r2),
            chi1_at_k1: chi(Endpoint::K1, &pair, profile, opts)?,
            chi2_at_k2: chi(Endpoint::K2, &pair, profile, opts)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(k1: f64, k2: f64) -> StationaryPair {
        StationaryPair { k1, k2, residual1: 0.0, residual2: 0.0 }
    }

    fn bump() -> ClosedForm<impl Fn(f64) -> C64 + Sync, impl Fn(f64) -> C64 + Sync> {
        ClosedForm {
            r: |s: f64| C64::new(0.6 * (-(s + 0.15) * (s + 0.15) * 20.0).exp(), 0.3 * s),
            dr: |s: f64| C64::new(-24.0 * (s + 0.15) * (-(s + 0.15) * (s + 0.15) * 20.0).exp(), 0.3),
        }
    }

    #[test]
    fn nu_inverts_its_definition() {
        assert_eq!(nu(C64::new(0.0, 0.0)), 0.0);
        let r = ((2.0 * PI).exp() - 1.0).sqrt();
        assert!((nu(C64::new(0.0, r)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_and_constant_profiles_have_vanishing_chi() {
        let p = pair(-0.3, -0.05);
        let opts = QuadratureOptions::default();
        let zero = ClosedForm { r: |_| C64::new(0.0, 0.0), dr: |_| C64::new(0.0, 0.0) };
        let constant = ClosedForm { r: |_| C64::new(0.4, -0.2), dr: |_| C64::new(0.0, 0.0) };
        for prof in [&zero as &dyn ReflectionProfile, &constant] {
            assert_eq!(chi(Endpoint::K1, &p, prof, &opts).unwrap().norm(), 0.0);
            assert_eq!(chi(Endpoint::K2, &p, prof, &opts).unwrap().norm(), 0.0);
        }
        assert!((delta(C64::new(0.3, 0.2), &p, &zero, &opts).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn chi_matches_brute_force_midpoint_sum() {
        // r(s) = s on [−1, 0], χ₁ at k₁ = −1
        let prof = ClosedForm { r: |s: f64| C64::new(s, 0.0), dr: |_| C64::new(1.0, 0.0) };
        let p = pair(-1.0, 0.0);
        let got = chi(Endpoint::K1, &p, &prof, &QuadratureOptions::default()).unwrap();
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let w1 = 2f64.ln();
        let mut sum = 0.0;
        for i in 0..n {
            let s = -1.0 + (i as f64 + 0.5) * h;
            sum += ((1.0 + s * s).ln() - w1) / (s + 1.0);
        }
        let brute = C64::new(sum * h, 0.0) / (2.0 * PI * I);
        assert!((got - brute).norm() < 1e-9, "{got} vs {brute}");
        assert!(got.re.abs() < 1e-15);
    }

    #[test]
    fn delta_has_the_multiplicative_jump() {
        let p = pair(-0.27, -0.06);
        let prof = bump();
        let opts = QuadratureOptions::default();
        let m = 0.5 * (p.k1 + p.k2);
        let eps = 1e-8;
        let above = delta(C64::new(m, eps), &p, &prof, &opts).unwrap();
        let below = delta(C64::new(m, -eps), &p, &prof, &opts).unwrap();
        let expected = 1.0 / (1.0 + prof.r(m).norm_sqr());
        assert!((below / above - expected).norm() < 1e-6, "{} vs {expected}", below / above);
        let outside = 0.1;
        let a = delta(C64::new(outside, eps), &p, &prof, &opts).unwrap();
        let b = delta(C64::new(outside, -eps), &p, &prof, &opts).unwrap();
        assert!((a / b - 1.0).norm() < 1e-6);
    }

    #[test]
    fn extrapolated_jump_holds_at_a_finite_offset() {
        let p = pair(-0.27, -0.06);
        let prof = bump();
        let opts = QuadratureOptions { tol: 1e-12, ..QuadratureOptions::default() };
        for k in [-0.25, -0.2, -0.15, -0.1, -0.07] {
            let expected = 1.0 / (1.0 + prof.r(k).norm_sqr());
            let ratio = jump_ratio(k, 1e-4, &p, &prof, &opts).unwrap();
            assert!((ratio - expected).norm() < 1e-6, "{k}: {ratio} vs {expected}");
        }
        for k in [-0.4, 0.05] {
            assert!((jump_ratio(k, 1e-4, &p, &prof, &opts).unwrap() - 1.0).norm() < 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn delta_times_reflected_conjugate_is_one(re in -0.6f64..0.2, im in prop_oneof![-0.5f64..-1e-3, 1e-3f64..0.5]) {
            let p = pair(-0.27, -0.06);
            let prof = bump();
            let opts = QuadratureOptions::default();
            let k = C64::new(re, im);
            let v = delta(k, &p, &prof, &opts).unwrap() * delta(k.conj(), &p, &prof, &opts).unwrap().conj();
            prop_assert!((v - 1.0).norm() < 1e-10, "{}: {}", k, v);
        }
    }

    #[test]
    fn delta_is_unimodular_off_the_cut_on_the_real_line() {
        let p = pair(-0.27, -0.06);
        let prof = bump();
        for k in [-1.0, -0.4, 0.0, 0.8] {
            let d = delta(C64::new(k, 0.0), &p, &prof, &QuadratureOptions::default()).unwrap();
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_on_the_cut_is_rejected() {
        let p = pair(-0.27, -0.06);
        let r = delta(C64::new(-0.1, 0.0), &p, &bump(), &QuadratureOptions::default());
        assert!(matches!(r, Err(Error::OnBranchCut { .. })));
    }

    #[test]
    fn factorized_and_direct_forms_agree() {
        let p = pair(-0.27, -0.06);
        let prof = bump();
        let opts = QuadratureOptions::default();
        for k in [C64::new(-0.27, 0.05), C64::new(-0.2, -0.08), C64::new(-0.01, 0.03), C64::new(-0.35, -0.02)] {
            for j in [Endpoint::K1, Endpoint::K2] {
                let f = delta_factorized(j, k, &p, &prof, &opts).unwrap();
                let d = delta_direct(k, &p, &prof, &opts).unwrap();
                assert!((f - d).norm() < 1e-8, "{k}: {f} vs {d}");
            }
        }
    }

    #[test]
    fn delta_decays_to_one_along_the_imaginary_axis() {
        let p = pair(-0.27, -0.06);
        let prof = bump();
        let opts = QuadratureOptions::default();
        let e1 = (delta(C64::new(0.0, 100.0), &p, &prof, &opts).unwrap() - 1.0).norm();
        let e2 = (delta(C64::new(0.0, 200.0), &p, &prof, &opts).unwrap() - 1.0).norm();
        assert!(e1 < 1e-3 && (e1 / e2 - 2.0).abs() < 0.01);
    }
}
