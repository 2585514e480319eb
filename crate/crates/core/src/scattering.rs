//! Derived spectral functions `c, d, r₁, h, r`, the global relation and the
//! zero-freeness certificate for `a` and `d`.

use crate::error::{Error, Result};
use crate::lax::{t_column, x_scattering, Column, HalfLineScattering, SpectralInput, Terminal};
use crate::linalg::C64;
use crate::sampled::ComplexSpline;
use crate::Equation;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest `|a|` or `|d|` accepted as a divisor.
pub const ZERO_GUARD: f64 = 1e-8;
/// Largest admissible `|(r₁ + h) − c̄/d|`.
pub const ROUTE_TOL: f64 = 1e-8;
/// Default bound on the global-relation residual.
pub const GR_TOL: f64 = 1e-5;

/// All spectral functions on a real grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSet {
    pub k: Vec<f64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub big_a: Vec<C64>,
    pub big_b: Vec<C64>,
    pub c: Vec<C64>,
    pub d: Vec<C64>,
    pub r1: Vec<C64>,
    pub h: Vec<C64>,
    pub r: Vec<C64>,
    /// `c̄/d`, the second route to `r`.
    pub r_alt: Vec<C64>,
    /// `|Ba − Ab|`.
    pub gr_residual: Vec<f64>,
}

impl ScatteringSet {
    /// Fills `c`, `d` and the residual; reflections stay empty.
    pub fn derive_cd(s: HalfLineScattering) -> Self {
        let n = s.len();
        let mut c = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut gr = Vec::with_capacity(n);
        for j in 0..n {
            let (a, b, big_a, big_b) = (s.a[j], s.b[j], s.big_a[j], s.big_b[j]);
            c.push(b * big_a - a * big_b);
            d.push(a * big_a.conj() + b * big_b.conj());
            gr.push((big_b * a - big_a * b).norm());
        }
        Self {
            k: s.k,
            a: s.a,
            b: s.b,
            big_a: s.big_a,
            big_b: s.big_b,
            c,
            d,
            r1: Vec::new(),
            h: Vec::new(),
            r: Vec::new(),
            r_alt: Vec::new(),
            gr_residual: gr,
        }
    }

    /// `r₁ = b̄/a`, `h = −B̄/(ad)`, `r = r₁ + h` and `c̄/d`.
    pub fn derive_reflections(mut self) -> Result<Self> {
        let n = self.k.len();
        let (mut r1, mut h, mut r, mut alt) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for j in 0..n {
            let (a, d) = (self.a[j], self.d[j]);
            for (what, v) in [("a", a), ("d", d)] {
                if v.norm() < ZERO_GUARD {
                    return Err(Error::DivisionNearZero { what, value: v.norm(), k: self.k[j] });
                }
            }
            let x = self.b[j].conj() / a;
            let y = -self.big_b[j].conj() / (a * d);
            r1.push(x);
            h.push(y);
            r.push(x + y);
            alt.push(self.c[j].conj() / d);
        }
        self.r1 = r1;
        self.h = h;
        self.r = r;
        self.r_alt = alt;
        Ok(self)
    }

    pub fn from_sweep(s: HalfLineScattering) -> Result<Self> {
        Self::derive_cd(s).derive_reflections()
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// `max |(r₁ + h) − c̄/d|`.
    pub fn route_defect(&self) -> f64 {
        self.r.iter().zip(&self.r_alt).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// `max ||a|²+|b|²−1|` and `max ||A|²+|B|²−1|`.
    pub fn unitarity_defect(&self) -> (f64, f64) {
        let f = |p: &[C64], q: &[C64]| {
            p.iter().zip(q).map(|(x, y)| (x.norm_sqr() + y.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
        };
        (f(&self.a, &self.b), f(&self.big_a, &self.big_b))
    }

    /// `sup |Ba − Ab|` over grid points outside `(k₀, 0)`, where the relation holds.
    pub fn global_relation_residual(&self, eq: &Equation) -> f64 {
        let k0 = eq.k0();
        self.k
            .iter()
            .zip(&self.gr_residual)
            .filter(|(k, _)| !(**k > k0 && **k < 0.0))
            .map(|(_, g)| *g)
            .fold(0.0, f64::max)
    }

    /// Cubic spline of `r` through the uniform run of grid points covering `[lo, hi]`.
    pub fn reflection_spline(&self, lo: f64, hi: f64) -> Result<ComplexSpline> {
        let idx: Vec<usize> = (0..self.len()).filter(|&j| self.k[j] >= lo - 1e-12 && self.k[j] <= hi + 1e-12).collect();
        if idx.len() < 4 {
            return Err(Error::Config(format!("fewer than 4 grid points on [{lo}, {hi}]")));
        }
        let h = self.k[idx[1]] - self.k[idx[0]];
        let uniform = idx.windows(2).all(|w| w[1] == w[0] + 1 && ((self.k[w[1]] - self.k[w[0]]) - h).abs() <= 1e-9 * h.abs());
        if !uniform {
            return Err(Error::Config(format!("grid on [{lo}, {hi}] is not uniform")));
        }
        let values: Vec<C64> = idx.iter().map(|&j| self.r[j]).collect();
        Ok(ComplexSpline::new(self.k[idx[0]], h, &values))
    }
}

/// Smallest `|f|` accepted on a winding contour.
pub const WIND_GUARD: f64 = 1e-6;
/// Largest phase change accepted between consecutive contour samples.
pub const MAX_PHASE_JUMP: f64 = PI / 4.0;

/// Winding number of the closed sampled curve `values` about 0.
pub fn winding_number(values: &[C64], guard: f64) -> Result<i64> {
    let n = values.len();
    if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| v.norm() < guard) {
        return Err(Error::GuardViolation { index, value: v.norm(), guard });
    }
    let mut total = 0.0;
    for j in 0..n {
        let next = (j + 1) % n;
        let jump = (values[next] / values[j]).arg();
        if jump.abs() > MAX_PHASE_JUMP {
            return Err(Error::ContourUnderResolved { index: j, next, jump });
        }
        total += jump;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Winding of `f` along `contour`, evaluated in parallel.
pub fn winding_zero_check(f: impl Fn(C64) -> Result<C64> + Sync, contour: &[C64], guard: f64) -> Result<i64> {
    let values: Vec<C64> = contour.par_iter().map(|&k| f(k)).collect::<Result<_>>()?;
    winding_number(&values, guard)
}

/// Winding numbers at two contour resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindingCertificate {
    pub coarse: i64,
    pub fine: i64,
    pub samples: usize,
}

impl WindingCertificate {
    pub fn zero_free(&self) -> bool {
        self.coarse == 0 && self.fine == 0
    }
}

/// Winding of `f` on `contour(density)` and `contour(2·density)`.
pub fn certify(f: impl Fn(C64) -> Result<C64> + Sync, contour: impl Fn(usize) -> Vec<C64>, density: usize, guard: f64) -> Result<WindingCertificate> {
    let coarse = winding_zero_check(&f, &contour(density), guard)?;
    let fine_contour = contour(2 * density);
    let fine = winding_zero_check(&f, &fine_contour, guard)?;
    Ok(WindingCertificate { coarse, fine, samples: fine_contour.len() })
}

impl SpectralInput<'_> {
    /// `a(k)` for `Im k ≥ 0`.
    pub fn a_at(&self, k: C64) -> Result<C64> {
        Ok(x_scattering(self.u0, k, &self.x_opts)?.0)
    }

    /// `d(k)` on the closed middle region, as the determinant of the first
    /// column of `T` and the second column of `X`. With a tail closure the
    /// first column carries a zero-free scalar factor, which leaves the
    /// winding unchanged.
    pub fn d_at(&self, k: C64) -> Result<C64> {
        let (a, b) = x_scattering(self.u0, k, &self.x_opts)?;
        let terminal = match self.closure {
            Some(c) => Terminal::Value(c.first_column(k, self.x_opts.step)?),
            None => Terminal::Identity,
        };
        let t1 = t_column(self.traces, &self.equation, k, Column::First, terminal, &self.t_opts)?;
        Ok(t1.0[0] * a - t1.0[1] * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use proptest::prelude::*;

    fn set(a: Vec<C64>, b: Vec<C64>, big_a: Vec<C64>, big_b: Vec<C64>) -> ScatteringSet {
        let k = (0..a.len()).map(|j| j as f64 * 0.1 - 1.0).collect();
        ScatteringSet::derive_cd(HalfLineScattering { k, a, b, big_a, big_b })
    }

    fn unit_pair(theta: f64, phi1: f64, phi2: f64) -> (C64, C64) {
        (C64::from_polar(theta.cos(), phi1), C64::from_polar(theta.sin(), phi2))
    }

    #[test]
    fn trivial_boundary_scattering() {
        let a = vec![C64::new(0.8, 0.1), C64::new(0.9, -0.2)];
        let b = vec![C64::new(0.1, 0.3), C64::new(-0.2, 0.05)];
        let s = set(a.clone(), b.clone(), vec![ONE; 2], vec![ZERO; 2]).derive_reflections().unwrap();
        assert_eq!(s.c, b);
        assert_eq!(s.d, a);
        assert!(s.h.iter().all(|h| h.norm() == 0.0));
        assert_eq!(s.r, s.r1);
    }

    #[test]
    fn trivial_initial_scattering() {
        let big_a = vec![C64::new(0.6, 0.3)];
        let big_b = vec![C64::new(0.2, -0.1)];
        let s = set(vec![ONE], vec![ZERO], big_a.clone(), big_b.clone()).derive_reflections().unwrap();
        assert_eq!(s.c[0], -big_b[0]);
        assert_eq!(s.d[0], big_a[0].conj());
        assert_eq!(s.r1[0], ZERO);
        assert!((s.r[0] - (-big_b[0].conj() / s.d[0])).norm() < 1e-16);
    }

    #[test]
    fn small_divisors_are_rejected() {
        let s = set(vec![C64::new(1e-9, 0.0)], vec![ONE], vec![ONE], vec![ZERO]);
        assert!(matches!(s.derive_reflections(), Err(Error::DivisionNearZero { what: "a", .. })));
    }

    proptest! {
        #[test]
        fn unitary_rows_give_unit_determinant_and_agreeing_routes(
            t1 in 0.0f64..1.4, p1 in -3.0f64..3.0, q1 in -3.0f64..3.0,
            t2 in 0.0f64..1.4, p2 in -3.0f64..3.0, q2 in -3.0f64..3.0,
        ) {
            let (a, b) = unit_pair(t1, p1, q1);
            let (big_a, big_b) = unit_pair(t2, p2, q2);
            let s = set(vec![a], vec![b], vec![big_a], vec![big_b]);
            prop_assert!((s.d[0].norm_sqr() + s.c[0].norm_sqr() - 1.0).abs() < 1e-13);
            prop_assume!(a.norm() > 1e-3 && s.d[0].norm() > 1e-3);
            let s = s.derive_reflections().unwrap();
            prop_assert!(s.route_defect() <= 1e-10 / (a.norm() * s.d[0].norm()).powi(2));
        }
    }

    #[test]
    fn residual_ignores_the_middle_interval() {
        let eq = Equation::default();
        let mut s = set(vec![ONE; 3], vec![ZERO; 3], vec![ONE; 3], vec![ZERO; 3]);
        s.k = vec![-0.5, -0.2, 0.3];
        s.gr_residual = vec![1e-9, 0.4, 2e-9];
        assert_eq!(s.global_relation_residual(&eq), 2e-9);
    }

    #[test]
    fn winding_of_constants_and_of_k() {
        let circle: Vec<C64> = (0..64).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0)).collect();
        assert_eq!(winding_zero_check(|_| Ok(ONE), &circle, 1e-6).unwrap(), 0);
        assert_eq!(winding_zero_check(Ok, &circle, 1e-6).unwrap(), 1);
        assert_eq!(winding_zero_check(|k| Ok(k * k * k), &circle, 1e-6).unwrap(), 3);
        let shifted: Vec<C64> = circle.iter().map(|k| k + 3.0).collect();
        assert_eq!(winding_zero_check(Ok, &shifted, 1e-6).unwrap(), 0);
    }

    #[test]
    fn winding_guards() {
        let circle: Vec<C64> = (0..8).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / 8.0)).collect();
        assert!(matches!(winding_zero_check(|k| Ok(k.powi(3)), &circle, 1e-6), Err(Error::ContourUnderResolved { .. })));
        assert!(matches!(winding_zero_check(|k| Ok(k - 1.0), &circle, 1e-6), Err(Error::GuardViolation { .. })));
    }
}
