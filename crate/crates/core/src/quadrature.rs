//! Gauss–Legendre rules and composite panel quadrature.

use crate::linalg::{C64, ZERO};
use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f on one panel.
    pub fn panel(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> C64) -> C64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = ZERO;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    /// ∫ over consecutive panels with the given breakpoints.
    pub fn composite(&self, breaks: &[f64], mut f: impl FnMut(f64) -> C64) -> C64 {
        breaks.windows(2).map(|w| self.panel(w[0], w[1], &mut f)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Breakpoints on [a, b]: `uniform` equal panels, with the end panels split
/// dyadically `levels` times toward the flagged ends.
pub fn graded_breaks(a: f64, b: f64, uniform: usize, levels: usize, grade_left: bool, grade_right: bool) -> Vec<f64> {
    let n = uniform.max(1);
    let h = (b - a) / n as f64;
    let mut out: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    out[n] = b;
    for l in 1..=levels {
        let d = h * 0.5f64.powi(l as i32);
        if grade_left {
            out.push(a + d);
        }
        if grade_right {
            out.push(b - d);
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        let v = gl.panel(-1.0, 2.0, |x| C64::new(x.powi(15), 0.0));
        let exact = (2.0f64.powi(16) - 1.0) / 16.0;
        assert!((v.re - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 32] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn graded_breaks_are_monotone_and_cover() {
        for (l, r) in [(true, false), (false, true), (true, true)] {
            let b = graded_breaks(0.0, 1.0, 4, 5, l, r);
            assert_eq!(b[0], 0.0);
            assert_eq!(*b.last().unwrap(), 1.0);
            assert!(b.windows(2).all(|w| w[1] > w[0]), "{b:?}");
        }
    }
}
