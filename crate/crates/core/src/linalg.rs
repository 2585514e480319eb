//! Fixed-size complex 2×2 algebra used by the Lax-pair integrators.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn sigma3() -> Self {
        Self::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0))
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.m[0][0] * s, self.m[0][1] * s, self.m[1][0] * s, self.m[1][1] * s)
    }

    /// Inverse of a unit-determinant matrix (adjugate).
    pub fn inv_unimodular(&self) -> Self {
        Self::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])
    }

    pub fn inv(&self) -> Self {
        self.inv_unimodular().scale(self.det().inv())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[0][1].conj(),
            self.m[1][0].conj(),
            self.m[1][1].conj(),
        )
    }

    /// [σ₃, M]: zero diagonal, off-diagonal (2m₁₂, −2m₂₁).
    pub fn sigma3_commutator(&self) -> Self {
        Self::new(ZERO, self.m[0][1] * 2.0, self.m[1][0] * -2.0, ZERO)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    /// Matrix exponential, exact for 2×2: `e^{τ}(cosh s·I + sinh s/s·N)` with
    /// `τ = tr/2`, `N = M − τI`, `s² = −det N`.
    pub fn expm(&self) -> Self {
        let tau = self.trace() * 0.5;
        let n = Self::new(self.m[0][0] - tau, self.m[0][1], self.m[1][0], self.m[1][1] - tau);
        let s2 = n.m[0][0] * n.m[0][0] + n.m[0][1] * n.m[1][0];
        let (ch, shc) = if s2.norm() < 1e-6 {
            // series in s²; truncation below 1e-20
            (ONE + s2 * 0.5 + s2 * s2 / 24.0, ONE + s2 / 6.0 + s2 * s2 / 120.0)
        } else {
            let s = s2.sqrt();
            (s.cosh(), s.sinh() / s)
        };
        let e = tau.exp();
        Self::new(
            e * (ch + shc * n.m[0][0]),
            e * shc * n.m[0][1],
            e * shc * n.m[1][0],
            e * (ch + shc * n.m[1][1]),
        )
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.0[0] + self.m[0][1] * v.0[1],
            self.m[1][0] * v.0[0] + self.m[1][1] * v.0[1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &o.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(C64::new(s, 0.0))
    }
}

/// A column of a 2×2 matrix; the second column carries (b, a) or (B, A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2(pub [C64; 2]);

impl Vec2 {
    pub const fn new(top: C64, bottom: C64) -> Self {
        Self([top, bottom])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.0[0] + o.0[0], self.0[1] + o.0[1])
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.0[0] * s, self.0[1] * s)
    }
}

/// State types the fixed-step RK4 driver can advance.
pub trait OdeState: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}
impl OdeState for Mat2 {}
impl OdeState for Vec2 {}

/// Classical RK4 step of `y' = f(s, y)` from `s` to `s + h` (h may be negative).
#[inline]
pub fn rk4_step<S: OdeState>(s: f64, y: S, h: f64, mut f: impl FnMut(f64, S) -> S) -> S {
    let k1 = f(s, y);
    let k2 = f(s + 0.5 * h, y + k1 * (0.5 * h));
    let k3 = f(s + 0.5 * h, y + k2 * (0.5 * h));
    let k4 = f(s + h, y + k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fourth-order Magnus propagator of `y' = G(s) y` over `[s, s + h]`
/// (two Gauss points, `h` may be negative). Exactly unitary when `G` is
/// anti-Hermitian.
#[inline]
pub fn magnus4(s: f64, h: f64, mut g: impl FnMut(f64) -> Mat2) -> Mat2 {
    const C: f64 = 0.288_675_134_594_812_9; // √3/6
    let g1 = g(s + h * (0.5 - C));
    let g2 = g(s + h * (0.5 + C));
    let omega = (g1 + g2) * (0.5 * h) + (g2 * g1 - g1 * g2) * (0.5 * C * h * h);
    omega.expm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_matches_definition() {
        let m = Mat2::new(C64::new(1.0, 2.0), C64::new(0.5, -1.0), C64::new(-3.0, 0.1), C64::new(0.2, 0.0));
        let s = Mat2::sigma3();
        let direct = s * m - m * s;
        assert!(direct.max_abs_diff(&m.sigma3_commutator()) < 1e-15);
    }

    #[test]
    fn unimodular_inverse() {
        let m = Mat2::new(C64::new(2.0, 0.0), C64::new(1.0, 1.0), C64::new(1.0, -1.0), C64::new(1.5, 0.0));
        let m = m.scale(m.det().sqrt().inv());
        assert!((m * m.inv_unimodular()).max_abs_diff(&Mat2::identity()) < 1e-14);
    }

    #[test]
    fn rk4_integrates_exponential() {
        let mut y = Vec2::new(ONE, ONE);
        let h = 0.01;
        for i in 0..100 {
            y = rk4_step(i as f64 * h, y, h, |_, v| Vec2::new(v.0[0] * I, v.0[1] * -1.0));
        }
        assert!((y.0[0] - I.exp()).norm() < 1e-9);
        assert!((y.0[1] - (-1.0f64).exp()).norm() < 1e-9);
    }

    #[test]
    fn expm_matches_taylor_series() {
        let m = Mat2::new(C64::new(0.3, 0.1), C64::new(-0.7, 0.2), C64::new(0.4, 0.0), C64::new(-0.1, 0.5));
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for n in 1..40 {
            term = (term * m) * (1.0 / n as f64);
            sum = sum + term;
        }
        assert!(m.expm().max_abs_diff(&sum) < 1e-14);
        let tiny = m * 1e-5;
        let expected = tiny + tiny * tiny * 0.5;
        let got = tiny.expm() - Mat2::identity();
        assert!(got.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn magnus_is_fourth_order_and_unitary() {
        // y' = [[0, e^{is}], [−e^{−is}, 0]] y is anti-Hermitian
        let g = |s: f64| {
            let e = C64::from_polar(1.0, s);
            Mat2::new(ZERO, e, -e.conj(), ZERO)
        };
        let solve = |n: usize| {
            let h = 2.0 / n as f64;
            let mut p = Mat2::identity();
            for j in 0..n {
                p = magnus4(j as f64 * h, h, g) * p;
            }
            p
        };
        let (coarse, fine, finest) = (solve(20), solve(40), solve(640));
        let ratio = coarse.max_abs_diff(&finest) / fine.max_abs_diff(&finest);
        assert!(ratio > 12.0, "ratio {ratio}");
        assert!((coarse.det() - ONE).norm() < 1e-14);
        let v = coarse.mul_vec(Vec2::new(ONE, ZERO));
        assert!((v.0[0].norm_sqr() + v.0[1].norm_sqr() - 1.0).abs() < 1e-14);
    }
}
