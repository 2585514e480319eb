//! Uniformly sampled functions and the interpolants built on them.

use crate::linalg::{C64, ZERO};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Number of points in the local Lagrange stencil used by [`SampledComplexFunction::at`].
pub const LAGRANGE_POINTS: usize = 6;

/// Complex samples `values[j] = f(x0 + j·dx)`.
///
/// Point evaluation uses a centred six-point Lagrange stencil; outside the
/// sampled range the function is taken to be zero (all carried functions are
/// decayed there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledComplexFunction {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<C64>,
}

impl SampledComplexFunction {
    pub fn new(x0: f64, dx: f64, values: Vec<C64>) -> Self {
        assert!(dx > 0.0, "grid spacing must be positive");
        Self { x0, dx, values }
    }

    pub fn from_fn(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..n).map(|j| f(x0 + j as f64 * dx)).collect();
        Self::new(x0, dx, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len().saturating_sub(1))
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.x(j))
    }

    pub fn at(&self, x: f64) -> C64 {
        lagrange_uniform(&self.values, self.x0, self.dx, x)
    }

    /// Samples with `x` in `[lo, hi]`, keeping the original grid phase.
    pub fn restrict(&self, lo: f64, hi: f64) -> Self {
        let first = ((lo - self.x0) / self.dx).ceil().max(0.0) as usize;
        let last = (((hi - self.x0) / self.dx).floor() as isize).min(self.len() as isize - 1);
        if last < first as isize {
            return Self::new(lo, self.dx, Vec::new());
        }
        Self::new(self.x(first), self.dx, self.values[first..=last as usize].to_vec())
    }

    /// Band-limited refinement by zero padding in Fourier space. The samples
    /// are treated as one period of a trigonometric polynomial.
    pub fn refine_fourier(&self, factor: usize) -> Self {
        let n = self.len();
        if factor <= 1 || n < 2 {
            return self.clone();
        }
        let m = n * factor;
        let mut planner = FftPlanner::<f64>::new();
        let mut spec = self.values.clone();
        planner.plan_fft_forward(n).process(&mut spec);
        let mut padded = vec![ZERO; m];
        let half = n / 2;
        for (j, v) in spec.iter().enumerate() {
            if n % 2 == 0 && j == half {
                // split the Nyquist coefficient symmetrically
                padded[half] = *v * 0.5;
                padded[m - half] = *v * 0.5;
            } else if j < half || (n % 2 == 1 && j == half) {
                padded[j] = *v;
            } else {
                padded[m - (n - j)] = *v;
            }
        }
        planner.plan_fft_inverse(m).process(&mut padded);
        let scale = 1.0 / n as f64;
        padded.iter_mut().for_each(|v| *v *= scale);
        Self::new(self.x0, self.dx / factor as f64, padded)
    }

    /// Largest |f| over samples with `x ≥ from` (or `x ≤ from` if `above` is false).
    pub fn max_abs_beyond(&self, from: f64, above: bool) -> f64 {
        self.grid()
            .zip(&self.values)
            .filter(|(x, _)| if above { *x >= from } else { *x <= from })
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Trapezoid rule for ∫|f|² (spectrally accurate for periodic, decayed data).
    pub fn l2_mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx
    }
}

/// Centred Lagrange interpolation on a uniform grid, zero outside the samples.
pub fn lagrange_uniform(values: &[C64], x0: f64, dx: f64, x: f64) -> C64 {
    let n = values.len();
    if n == 0 {
        return ZERO;
    }
    let s = (x - x0) / dx;
    if s < -1e-9 || s > (n - 1) as f64 + 1e-9 {
        return ZERO;
    }
    let nearest = s.round();
    if (s - nearest).abs() < 1e-12 {
        return values[nearest as usize];
    }
    let p = LAGRANGE_POINTS.min(n);
    let base = (s.floor() as isize - (p as isize / 2 - 1)).clamp(0, (n - p) as isize) as usize;
    let mut acc = ZERO;
    for i in 0..p {
        let xi = (base + i) as f64;
        let mut w = 1.0;
        for j in 0..p {
            if j != i {
                let xj = (base + j) as f64;
                w *= (s - xj) / (xi - xj);
            }
        }
        acc += values[base + i] * w;
    }
    acc
}

/// Natural cubic spline through uniformly spaced real samples.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 3, "spline needs at least three samples");
        // second derivatives M: M0 = Mn-1 = 0, M[i-1] + 4 M[i] + M[i+1] = 6 Δ²y / h²
        let mut m = vec![0.0; n];
        let inner = n - 2;
        let mut c = vec![0.0; inner];
        let mut d = vec![0.0; inner];
        for i in 0..inner {
            let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
            let denom = if i == 0 { 4.0 } else { 4.0 - c[i - 1] };
            c[i] = 1.0 / denom;
            d[i] = if i == 0 { rhs / denom } else { (rhs - d[i - 1]) / denom };
        }
        for i in (0..inner).rev() {
            m[i + 1] = if i + 1 == inner { d[i] } else { d[i] - c[i] * m[i + 2] };
        }
        Self { x0, h, y, m }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.h * (self.y.len() - 1) as f64)
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let h2 = self.h * self.h;
        let a = 1.0 - t;
        a * self.y[i]
            + t * self.y[i + 1]
            + h2 / 6.0 * ((a * a * a - a) * self.m[i] + (t * t * t - t) * self.m[i + 1])
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let a = 1.0 - t;
        (self.y[i + 1] - self.y[i]) / self.h
            + self.h / 6.0 * (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * t * t - 1.0) * self.m[i + 1])
    }
}

/// Complex-valued spline: independent splines for the real and imaginary parts.
#[derive(Debug, Clone)]
pub struct ComplexSpline {
    re: CubicSpline,
    im: CubicSpline,
}

impl ComplexSpline {
    pub fn new(x0: f64, h: f64, values: &[C64]) -> Self {
        Self {
            re: CubicSpline::new(x0, h, values.iter().map(|v| v.re).collect()),
            im: CubicSpline::new(x0, h, values.iter().map(|v| v.im).collect()),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.re.domain()
    }

    pub fn eval(&self, x: f64) -> C64 {
        C64::new(self.re.eval(x), self.im.eval(x))
    }

    pub fn deriv(&self, x: f64) -> C64 {
        C64::new(self.re.deriv(x), self.im.deriv(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_exact() {
        let f = SampledComplexFunction::from_fn(-1.0, 0.1, 21, |x| C64::new(x.sin(), x * x));
        for j in 0..21 {
            assert_eq!(f.at(f.x(j)), f.values[j]);
        }
    }

    #[test]
    fn lagrange_is_high_order() {
        let f = SampledComplexFunction::from_fn(0.0, 0.05, 200, |x| C64::new(x.cos(), (2.0 * x).sin()));
        let x = 3.0123;
        let err = (f.at(x) - C64::new(x.cos(), (2.0 * x).sin())).norm();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn fourier_refinement_reproduces_band_limited_data() {
        let n = 64;
        let l = 2.0 * std::f64::consts::PI;
        let f = |x: f64| C64::new((3.0 * x).cos(), (5.0 * x).sin()) + C64::new(0.5, 0.0);
        let s = SampledComplexFunction::from_fn(0.0, l / n as f64, n, f);
        let r = s.refine_fourier(4);
        assert_eq!(r.len(), 4 * n);
        for j in 0..r.len() {
            assert!((r.values[j] - f(r.x(j))).norm() < 1e-12);
        }
    }

    #[test]
    fn spline_matches_smooth_function() {
        let h = 0.01;
        let y: Vec<f64> = (0..301).map(|j| (j as f64 * h).exp()).collect();
        let s = CubicSpline::new(0.0, h, y);
        let x = 1.2345;
        assert!((s.eval(x) - x.exp()).abs() < 1e-8);
        assert!((s.deriv(x) - x.exp()).abs() < 1e-5);
    }

    #[test]
    fn restrict_keeps_grid_phase() {
        let f = SampledComplexFunction::from_fn(-2.0, 0.5, 9, |x| C64::new(x, 0.0));
        let r = f.restrict(-0.2, 1.1);
        assert_eq!(r.x0, 0.0);
        assert_eq!(r.len(), 3);
    }
}
