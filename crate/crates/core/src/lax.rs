//! Lax-pair matrices and the Volterra problems for `a, b` (in `x`) and
//! `A, B` (in `t`).
//!
//! Both problems are integrated as final-value ODEs for one column of the
//! normalized eigenfunction. With `y = X e₂` the `x`-problem reads
//! `y' = (U + diag(−2ik, 0)) y`, and with `y = X e₁` it reads
//! `y' = (U + diag(0, 2ik)) y`; the `t`-problem is the same with `V` and
//! `ω = 4βk³ + 2αk²`. Steps use the fourth-order Magnus propagator.

use crate::error::{Error, Result};
use crate::linalg::{magnus4, Mat2, Vec2, C64, I, ONE, ZERO};
use crate::pde::BoundaryTraces;
use crate::sampled::SampledComplexFunction;
use crate::Equation;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `U = [[0, u], [−ū, 0]]`.
pub fn u_matrix(u: C64) -> Mat2 {
    Mat2::new(ZERO, u, -u.conj(), ZERO)
}

/// `U` at every sample of `u0`.
#[allow(non_snake_case)]
pub fn build_U(u0: &SampledComplexFunction) -> Vec<Mat2> {
    u0.values.iter().map(|&u| u_matrix(u)).collect()
}

/// The `k`-independent pieces of `V = 4βk²U + kV₁ + V₂` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxMatrices {
    pub u: Mat2,
    pub v1: Mat2,
    pub v2: Mat2,
}

impl LaxMatrices {
    pub fn from_jet(eq: &Equation, [u, ux, uxx]: [C64; 3]) -> Self {
        let (a, b) = (eq.alpha, eq.beta);
        let m2 = u.norm_sqr();
        let v1 = Mat2::new(
            I * (2.0 * b * m2),
            I * ux * (2.0 * b) + u * (2.0 * a),
            I * ux.conj() * (2.0 * b) - u.conj() * (2.0 * a),
            -I * (2.0 * b * m2),
        );
        let mixed = (u * ux.conj() - u.conj() * ux) * b;
        let v2 = Mat2::new(
            I * (a * m2) + mixed,
            I * ux * a - (uxx + u * (2.0 * m2)) * b,
            I * ux.conj() * a + (uxx.conj() + u.conj() * (2.0 * m2)) * b,
            -I * (a * m2) - mixed,
        );
        Self { u: u_matrix(u), v1, v2 }
    }

    pub fn v(&self, eq: &Equation, k: C64) -> Mat2 {
        self.u.scale(k * k * (4.0 * eq.beta)) + self.v1.scale(k) + self.v2
    }
}

/// `V(0, t; k)` from the boundary values `g0, g1, g2`.
#[allow(non_snake_case)]
pub fn build_V(eq: &Equation, g0: C64, g1: C64, g2: C64, k: C64) -> Mat2 {
    LaxMatrices::from_jet(eq, [g0, g1, g2]).v(eq, k)
}

/// Which column of the normalized eigenfunction is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    First,
    Second,
}

impl Column {
    fn unit(self) -> Vec2 {
        match self {
            Column::First => Vec2::new(ONE, ZERO),
            Column::Second => Vec2::new(ZERO, ONE),
        }
    }

    /// Diagonal shift `diag(0, 2iλ)` or `diag(−2iλ, 0)` for phase rate `λ`.
    fn shift(self, lambda: C64) -> Mat2 {
        match self {
            Column::First => Mat2::diag(ZERO, I * lambda * 2.0),
            Column::Second => Mat2::diag(-I * lambda * 2.0, ZERO),
        }
    }
}

/// Step-size rule `h = min(base, c/(|λ| + 1))` for phase rate `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    pub base: f64,
    pub c: f64,
    /// Largest admissible `|λ|·h`.
    pub max_phase: f64,
}

impl StepRule {
    pub const X_DEFAULT: StepRule = StepRule { base: 0.0125, c: 0.05, max_phase: 0.5 };
    pub const T_DEFAULT: StepRule = StepRule { base: 0.0025, c: 0.025, max_phase: 0.5 };

    pub fn step(&self, rate: f64) -> Result<f64> {
        let h = self.base.min(self.c / (rate + 1.0));
        if rate * h > self.max_phase {
            return Err(Error::StepTooCoarse { step: h, rate, bound: self.max_phase });
        }
        Ok(h)
    }

    /// Same rule with every step halved.
    pub fn halved(&self) -> Self {
        Self { base: 0.5 * self.base, c: 0.5 * self.c, max_phase: self.max_phase }
    }
}

/// Integrates one column of `y' = (U(x) + shift) y` across the samples of
/// `u`, starting from `start` at one end.
fn x_column_between(u: &SampledComplexFunction, k: C64, col: Column, start: Vec2, downward: bool, rule: &StepRule) -> Result<Vec2> {
    if u.len() < 2 {
        return Ok(start);
    }
    let span = u.x_end() - u.x0;
    let h0 = rule.step(k.norm())?;
    let n = (span / h0).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let shift = col.shift(k);
    let g = |x: f64| u_matrix(u.at(x)) + shift;
    let mut y = start;
    for j in 0..n {
        y = if downward {
            let s = u.x_end() - j as f64 * h;
            magnus4(s, -h, g).mul_vec(y)
        } else {
            let s = u.x0 + j as f64 * h;
            magnus4(s, h, g).mul_vec(y)
        };
    }
    Ok(y)
}

/// Options of the `x`-problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XOptions {
    pub step: StepRule,
    /// Largest admissible `|u|` at the cut-off end.
    pub decay_tol: f64,
}

impl Default for XOptions {
    fn default() -> Self {
        Self { step: StepRule::X_DEFAULT, decay_tol: 1e-14 }
    }
}

fn check_cutoff(u: &SampledComplexFunction, at_end: bool, tol: f64) -> Result<()> {
    let edge = if at_end { u.values.last() } else { u.values.first() };
    let value = edge.map(|v| v.norm()).unwrap_or(0.0);
    if value > tol {
        return Err(Error::DecayCutoffViolation { value, tol });
    }
    Ok(())
}

/// One column of `X(x₀, k)` for data on `[x₀, L_cut]`, normalized at `L_cut`.
/// The second column is stable for `Im k ≥ 0`, the first for `Im k ≤ 0`.
pub fn x_column(u0: &SampledComplexFunction, k: C64, col: Column, opts: &XOptions) -> Result<Vec2> {
    check_cutoff(u0, true, opts.decay_tol)?;
    x_column_between(u0, k, col, col.unit(), true, &opts.step)
}

/// One column of the eigenfunction normalized at the left end of `u`,
/// evaluated at its right end. The first column is stable for `Im k ≥ 0`.
pub fn x_column_left(u: &SampledComplexFunction, k: C64, col: Column, opts: &XOptions) -> Result<Vec2> {
    check_cutoff(u, false, opts.decay_tol)?;
    x_column_between(u, k, col, col.unit(), false, &opts.step)
}

/// `(a, b) = (X₂₂(0,k), X₁₂(0,k))` for `Im k ≥ 0`; `u0` starts at `x = 0`.
pub fn x_scattering(u0: &SampledComplexFunction, k: C64, opts: &XOptions) -> Result<(C64, C64)> {
    let y = x_column(u0, k, Column::Second, opts)?;
    Ok((y.0[1], y.0[0]))
}

/// Full `X(0, k)` for real `k`.
pub fn x_matrix(u0: &SampledComplexFunction, k: f64, opts: &XOptions) -> Result<Mat2> {
    let k = C64::new(k, 0.0);
    let c1 = x_column(u0, k, Column::First, opts)?;
    let c2 = x_column(u0, k, Column::Second, opts)?;
    Ok(Mat2::new(c1.0[0], c2.0[0], c1.0[1], c2.0[1]))
}

/// Value imposed on the integrated column at the end of the trace window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    /// The column of the identity (the traces are assumed to have vanished).
    Identity,
    /// A prescribed value, e.g. the eigenfunction of the final snapshot at `x = 0`.
    Value(Vec2),
}

/// Options of the `t`-problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TOptions {
    pub step: StepRule,
    /// With [`Terminal::Identity`], the largest trace magnitude tolerated over
    /// the final unit of time; `None` skips the check.
    pub tail_tol: Option<f64>,
}

impl Default for TOptions {
    fn default() -> Self {
        Self { step: StepRule::T_DEFAULT, tail_tol: Some(1e-12) }
    }
}

/// One column of `T(0, k)`, integrated from the end of the trace window.
/// The second column is stable for `Im ω ≥ 0`, the first for `Im ω ≤ 0`.
pub fn t_column(traces: &BoundaryTraces, eq: &Equation, k: C64, col: Column, terminal: Terminal, opts: &TOptions) -> Result<Vec2> {
    let start = match terminal {
        Terminal::Identity => {
            if let Some(tol) = opts.tail_tol {
                let value = traces.tail_magnitude(1.0);
                if value > tol {
                    return Err(Error::TailTruncation { value, tol });
                }
            }
            col.unit()
        }
        Terminal::Value(v) => v,
    };
    if traces.len() < 2 {
        return Ok(start);
    }
    let omega = eq.omega(k);
    let span = traces.t_end() - traces.t0;
    let h0 = opts.step.step(omega.norm())?;
    let n = (span / h0).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let shift = col.shift(omega);
    let g = |t: f64| LaxMatrices::from_jet(eq, traces.at(t)).v(eq, k) + shift;
    let mut y = start;
    for j in 0..n {
        let s = traces.t_end() - j as f64 * h;
        y = magnus4(s, -h, g).mul_vec(y);
    }
    Ok(y)
}

/// `(A, B) = (T₂₂(0,k), T₁₂(0,k))` for `Im ω(k) ≥ 0`.
pub fn t_scattering(traces: &BoundaryTraces, eq: &Equation, k: C64, terminal: Terminal, opts: &TOptions) -> Result<(C64, C64)> {
    let y = t_column(traces, eq, k, Column::Second, terminal, opts)?;
    Ok((y.0[1], y.0[0]))
}

/// Full `T(0, k)` for real `k` from identity terminal data.
pub fn t_matrix(traces: &BoundaryTraces, eq: &Equation, k: f64, opts: &TOptions) -> Result<Mat2> {
    let k = C64::new(k, 0.0);
    let c1 = t_column(traces, eq, k, Column::First, Terminal::Identity, opts)?;
    let c2 = t_column(traces, eq, k, Column::Second, Terminal::Identity, opts)?;
    Ok(Mat2::new(c1.0[0], c2.0[0], c1.0[1], c2.0[1]))
}

/// The field at the end of the trace window, split at `x = 0`, from which
/// exact terminal values for the `t`-problem are built.
///
/// The `x`-eigenfunctions of a genuine solution, evaluated at `x = 0`, solve
/// the `t`-problem. The right-normalized one differs from `T` by a constant
/// right factor whose off-diagonal part is the global-relation defect; the
/// left-normalized one differs from `T` by a diagonal factor for real
/// `k ∈ (k₀, 0)` and on the boundary of the middle region. Diagonal factors
/// cancel in every reflection coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailClosure {
    pub t: f64,
    /// Samples on `[0, L/2]`.
    pub right: SampledComplexFunction,
    /// Samples on `[−L/2, 0]`.
    pub left: SampledComplexFunction,
}

impl TailClosure {
    /// Splits a periodic snapshot after band-limited refinement by `refine`.
    pub fn from_snapshot(snapshot: &SampledComplexFunction, t: f64, refine: usize) -> Self {
        let fine = snapshot.refine_fourier(refine);
        Self { t, right: fine.restrict(0.0, f64::INFINITY), left: fine.restrict(f64::NEG_INFINITY, 0.0) }
    }

    fn opts(step: StepRule) -> XOptions {
        // the halves are cut at the periodic boundary, not at a decay point
        XOptions { step, decay_tol: f64::INFINITY }
    }

    /// Terminal value for the second column at real `k`, or at `Im k > 0`
    /// in the outer regions where `Im ω ≥ 0`.
    pub fn second_column(&self, eq: &Equation, k: C64, step: StepRule) -> Result<Vec2> {
        let opts = Self::opts(step);
        if k.im == 0.0 && k.re > eq.k0() && k.re < 0.0 {
            x_column_left(&self.left, k, Column::Second, &opts)
        } else {
            x_column(&self.right, k, Column::Second, &opts)
        }
    }

    /// Terminal value for the first column in the closed middle region.
    pub fn first_column(&self, k: C64, step: StepRule) -> Result<Vec2> {
        x_column_left(&self.left, k, Column::First, &Self::opts(step))
    }
}

/// `a, b, A, B` on a real grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineScattering {
    pub k: Vec<f64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    #[serde(rename = "A")]
    pub big_a: Vec<C64>,
    #[serde(rename = "B")]
    pub big_b: Vec<C64>,
}

impl HalfLineScattering {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn max_unitarity_defect(&self) -> (f64, f64) {
        let f = |p: &[C64], q: &[C64]| {
            p.iter().zip(q).map(|(x, y)| (x.norm_sqr() + y.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
        };
        (f(&self.a, &self.b), f(&self.big_a, &self.big_b))
    }
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn k_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// Everything a real-axis sweep needs.
pub struct SpectralInput<'a> {
    pub equation: Equation,
    /// Initial datum on `[0, L_cut]`.
    pub u0: &'a SampledComplexFunction,
    pub traces: &'a BoundaryTraces,
    /// Exact terminal data; without it the identity terminal is used.
    pub closure: Option<&'a TailClosure>,
    pub x_opts: XOptions,
    pub t_opts: TOptions,
}

impl SpectralInput<'_> {
    pub fn at(&self, k: C64) -> Result<[C64; 4]> {
        let (a, b) = x_scattering(self.u0, k, &self.x_opts)?;
        let terminal = match self.closure {
            Some(c) => Terminal::Value(c.second_column(&self.equation, k, self.x_opts.step)?),
            None => Terminal::Identity,
        };
        let (big_a, big_b) = t_scattering(self.traces, &self.equation, k, terminal, &self.t_opts)?;
        Ok([a, b, big_a, big_b])
    }

    /// Parallel sweep over a real grid.
    pub fn sweep(&self, ks: &[f64]) -> Result<HalfLineScattering> {
        let rows: Vec<[C64; 4]> = ks.par_iter().map(|&k| self.at(C64::new(k, 0.0))).collect::<Result<_>>()?;
        Ok(HalfLineScattering {
            k: ks.to_vec(),
            a: rows.iter().map(|r| r[0]).collect(),
            b: rows.iter().map(|r| r[1]).collect(),
            big_a: rows.iter().map(|r| r[2]).collect(),
            big_b: rows.iter().map(|r| r[3]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_half(l_cut: f64, dx: f64) -> SampledComplexFunction {
        let n = (l_cut / dx).round() as usize + 1;
        SampledComplexFunction::from_fn(0.0, dx, n, |x| C64::new(0.3 * (-x * x).exp(), 0.0))
    }

    #[test]
    fn build_u_has_the_conjugate_symmetry() {
        let u = SampledComplexFunction::new(0.0, 1.0, vec![I, C64::new(0.3, -0.7)]);
        let m = build_U(&u);
        assert_eq!(m[0].m[0][1], I);
        assert_eq!(m[0].m[1][0], I);
        for mat in &m {
            assert_eq!(mat.m[1][0], -mat.m[0][1].conj());
            assert_eq!(mat.m[0][0], ZERO);
        }
    }

    #[test]
    fn v_at_unit_amplitude_and_zero_k() {
        let eq = Equation { alpha: 1.0, beta: 1.0 };
        let v = build_V(&eq, ONE, ZERO, ZERO, ZERO);
        let expected = Mat2::new(I, C64::new(-2.0, 0.0), C64::new(2.0, 0.0), -I);
        assert!(v.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn v_is_trace_free_and_polynomial_in_k() {
        let eq = Equation { alpha: 0.7, beta: 1.3 };
        let jet = [C64::new(0.2, 0.1), C64::new(-0.3, 0.4), C64::new(0.5, -0.2)];
        let lax = LaxMatrices::from_jet(&eq, jet);
        for k in [C64::new(0.0, 0.0), C64::new(1.5, -0.3), C64::new(-2.0, 0.7)] {
            assert!(lax.v(&eq, k).trace().norm() < 1e-14);
        }
        assert!(lax.v1.trace().norm() < 1e-15 && lax.v2.trace().norm() < 1e-15);
        assert_eq!(lax.v(&eq, ZERO), lax.v2);
    }

    #[test]
    fn zero_data_give_trivial_scattering() {
        let u = SampledComplexFunction::new(0.0, 0.1, vec![ZERO; 60]);
        let (a, b) = x_scattering(&u, C64::new(0.7, 0.2), &XOptions::default()).unwrap();
        assert!((a - ONE).norm() < 1e-14 && b == ZERO);
        let traces = BoundaryTraces::zeros(0.01, 100);
        let (big_a, big_b) = t_scattering(&traces, &Equation::default(), C64::new(0.4, 0.0), Terminal::Identity, &TOptions::default()).unwrap();
        assert!((big_a - ONE).norm() < 1e-13 && big_b.norm() < 1e-15);
    }

    #[test]
    fn x_problem_is_unitary_and_unimodular_on_the_real_axis() {
        let u = gaussian_half(7.0, 0.01);
        for k in [-3.0, -0.4, 0.0, 0.5, 2.5] {
            let x = x_matrix(&u, k, &XOptions::default()).unwrap();
            assert!((x.det() - ONE).norm() < 1e-12, "det at {k}");
            let (a, b) = (x.m[1][1], x.m[0][1]);
            assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn x_problem_converges_under_refinement() {
        let coarse = gaussian_half(7.0, 0.01);
        let fine = gaussian_half(14.0, 0.005);
        let k = C64::new(0.5, 0.0);
        let (a1, b1) = x_scattering(&coarse, k, &XOptions::default()).unwrap();
        let opts = XOptions { step: StepRule::X_DEFAULT.halved(), ..XOptions::default() };
        let (a2, b2) = x_scattering(&fine, k, &opts).unwrap();
        assert!((a1 - a2).norm() < 1e-8 && (b1 - b2).norm() < 1e-8);
    }

    #[test]
    fn cutoff_violation_is_reported() {
        let u = SampledComplexFunction::new(0.0, 0.1, vec![ONE; 10]);
        assert!(matches!(
            x_scattering(&u, ONE, &XOptions::default()),
            Err(Error::DecayCutoffViolation { .. })
        ));
    }

    #[test]
    fn coarse_step_rule_is_rejected() {
        let rule = StepRule { base: 1.0, c: 10.0, max_phase: 0.5 };
        assert!(matches!(rule.step(5.0), Err(Error::StepTooCoarse { .. })));
    }
}
