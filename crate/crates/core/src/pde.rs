//! Whole-line pseudospectral solver for
//! `i u_t + α(u_xx + 2|u|²u) + iβ(u_xxx + 6|u|²u_x) = 0`.
//!
//! The linear part is integrated exactly in Fourier space and the cubic terms
//! are advanced with integrating-factor RK4 (Lawson). Runs record the
//! boundary traces `u, u_x, u_xx` at `x = 0` after every step and store
//! windowed snapshots for later interpolation.

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ZERO};
use crate::sampled::{lagrange_uniform, SampledComplexFunction};
use crate::Equation;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Initial data on the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Datum {
    /// `A exp(−((x − x₀)/w)²)`
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `A sech(A (x − x₀))`, the stationary NLS soliton profile.
    Sech { amplitude: f64, center: f64 },
    Zero,
}

impl Datum {
    pub fn gaussian(amplitude: f64) -> Self {
        Datum::Gaussian { amplitude, center: 0.0, width: 1.0 }
    }

    pub fn eval(&self, x: f64) -> C64 {
        match *self {
            Datum::Gaussian { amplitude, center, width } => {
                let y = (x - center) / width;
                C64::new(amplitude * (-y * y).exp(), 0.0)
            }
            Datum::Sech { amplitude, center } => {
                C64::new(amplitude / (amplitude * (x - center)).cosh(), 0.0)
            }
            Datum::Zero => ZERO,
        }
    }

    /// (u, u', u'') at `x`, in closed form.
    pub fn jet(&self, x: f64) -> [C64; 3] {
        match *self {
            Datum::Gaussian { amplitude, center, width } => {
                let y = (x - center) / width;
                let g = amplitude * (-y * y).exp();
                let d1 = -2.0 * y / width * g;
                let d2 = (4.0 * y * y - 2.0) / (width * width) * g;
                [C64::new(g, 0.0), C64::new(d1, 0.0), C64::new(d2, 0.0)]
            }
            Datum::Sech { amplitude: a, center } => {
                let z = a * (x - center);
                let s = 1.0 / z.cosh();
                let t = z.tanh();
                [
                    C64::new(a * s, 0.0),
                    C64::new(-a * a * s * t, 0.0),
                    C64::new(a * a * a * (s - 2.0 * s * s * s), 0.0),
                ]
            }
            Datum::Zero => [ZERO; 3],
        }
    }

    pub fn sample(&self, x0: f64, dx: f64, n: usize) -> SampledComplexFunction {
        SampledComplexFunction::from_fn(x0, dx, n, |x| self.eval(x))
    }
}

/// Periodic grid `x_j = −L/2 + j L/n`, `n` a power of two; `x = 0` is node `n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub l_dom: f64,
}

impl Grid {
    pub fn new(n: usize, l_dom: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::Config(format!("n_x = {n} must be a power of two ≥ 8")));
        }
        if l_dom <= 0.0 {
            return Err(Error::Config(format!("L_dom = {l_dom} must be positive")));
        }
        Ok(Self { n, l_dom })
    }

    pub fn dx(&self) -> f64 {
        self.l_dom / self.n as f64
    }

    pub fn x_min(&self) -> f64 {
        -0.5 * self.l_dom
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min() + j as f64 * self.dx()
    }

    /// Signed angular wavenumber of FFT bin `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.n as isize;
        let m = m as isize;
        let signed = if m <= n / 2 { m } else { m - n };
        2.0 * PI * signed as f64 / self.l_dom
    }
}

/// One snapshot of the whole-line field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid,
    pub values: Vec<C64>,
    pub t: f64,
    /// ∫|u|²dx of the initial datum.
    pub mass0: f64,
}

impl FieldState {
    pub fn from_datum(grid: Grid, datum: &Datum) -> Self {
        let values: Vec<C64> = (0..grid.n).map(|j| datum.eval(grid.x(j))).collect();
        let mass0 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
        Self { grid, values, t: 0.0, mass0 }
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn as_sampled(&self) -> SampledComplexFunction {
        SampledComplexFunction::new(self.grid.x_min(), self.grid.dx(), self.values.clone())
    }

    /// Largest |u| over the outer `fraction` of the domain on either side.
    pub fn edge_magnitude(&self, fraction: f64) -> f64 {
        let w = ((self.grid.n as f64 * fraction).ceil() as usize).max(1);
        let n = self.grid.n;
        self.values[..w]
            .iter()
            .chain(&self.values[n - w..])
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Guards applied after every accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepGuards {
    /// Relative mass tolerance; `None` disables the check.
    pub mass_tol: Option<f64>,
    /// Edge-decay tolerance; `None` disables the check.
    pub decay_tol: Option<f64>,
    /// Fraction of the domain on each side treated as "edge".
    pub edge_fraction: f64,
}

impl Default for StepGuards {
    fn default() -> Self {
        Self { mass_tol: Some(1e-10), decay_tol: Some(1e-8), edge_fraction: 0.01 }
    }
}

/// Integrating-factor RK4 stepper with 2/3-rule dealiasing.
/// Absorbing layers at both ends of the periodic box: `−σ(x)u` is added to the
/// right-hand side, with `σ` rising smoothly from 0 to `strength` over `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sponge {
    pub strength: f64,
    pub width: f64,
}

impl Sponge {
    pub fn profile(&self, grid: &Grid) -> Vec<f64> {
        let half = 0.5 * grid.l_dom;
        (0..grid.n)
            .map(|j| {
                let depth = (grid.x(j).abs() - (half - self.width)) / self.width;
                if depth <= 0.0 {
                    0.0
                } else {
                    let s = depth.min(1.0);
                    self.strength * s * s * (3.0 - 2.0 * s)
                }
            })
            .collect()
    }
}

pub struct HirotaSolver {
    pub equation: Equation,
    pub grid: Grid,
    pub guards: StepGuards,
    damping: Vec<f64>,
    kappa: Vec<f64>,
    linear: Vec<f64>,
    keep: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    cached_dt: f64,
    half: Vec<C64>,
    full: Vec<C64>,
    scratch: Vec<C64>,
    phys: Vec<C64>,
    deriv: Vec<C64>,
}

impl HirotaSolver {
    pub fn new(equation: Equation, grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let kappa: Vec<f64> = (0..grid.n).map(|m| grid.wavenumber(m)).collect();
        // û_t = i(βκ³ − ακ²) û
        let linear = kappa
            .iter()
            .map(|&k| equation.beta * k * k * k - equation.alpha * k * k)
            .collect();
        let cutoff = grid.n as isize / 3;
        let keep = (0..grid.n)
            .map(|m| {
                let n = grid.n as isize;
                let s = if m as isize <= n / 2 { m as isize } else { m as isize - n };
                s.abs() <= cutoff
            })
            .collect();
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            equation,
            grid,
            guards: StepGuards::default(),
            damping: Vec::new(),
            kappa,
            linear,
            keep,
            fwd,
            inv,
            cached_dt: f64::NAN,
            half: vec![ZERO; grid.n],
            full: vec![ZERO; grid.n],
            scratch: vec![ZERO; scratch_len],
            phys: vec![ZERO; grid.n],
            deriv: vec![ZERO; grid.n],
        }
    }

    pub fn with_guards(mut self, guards: StepGuards) -> Self {
        self.guards = guards;
        self
    }

    pub fn with_sponge(mut self, sponge: Option<Sponge>) -> Self {
        self.damping = sponge.map(|s| s.profile(&self.grid)).unwrap_or_default();
        self
    }

    pub fn forward(&mut self, data: &mut [C64]) {
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [C64]) {
        self.inv.process_with_scratch(data, &mut self.scratch);
        let s = 1.0 / self.grid.n as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// Spectral coefficients of a physical field, projected onto the dealiased band.
    pub fn to_spectral(&mut self, values: &[C64]) -> Vec<C64> {
        let mut spec = values.to_vec();
        self.forward(&mut spec);
        for (v, keep) in spec.iter_mut().zip(&self.keep) {
            if !keep {
                *v = ZERO;
            }
        }
        spec
    }

    pub fn to_physical(&mut self, spec: &[C64]) -> Vec<C64> {
        let mut out = spec.to_vec();
        self.inverse(&mut out);
        out
    }

    fn prepare(&mut self, dt: f64) {
        if self.cached_dt == dt {
            return;
        }
        for (m, &l) in self.linear.iter().enumerate() {
            self.half[m] = (I * (0.5 * dt * l)).exp();
            self.full[m] = (I * (dt * l)).exp();
        }
        self.cached_dt = dt;
    }

    /// Fourier transform of the dealiased nonlinearity `2iα|u|²u − 6β|u|²u_x`.
    fn nonlinear(&mut self, spec: &[C64], out: &mut [C64]) {
        let n = self.grid.n;
        let mut phys = std::mem::take(&mut self.phys);
        let mut deriv = std::mem::take(&mut self.deriv);
        phys.copy_from_slice(spec);
        for m in 0..n {
            deriv[m] = spec[m] * (I * self.kappa[m]);
        }
        self.inverse(&mut phys);
        self.inverse(&mut deriv);
        let (a, b) = (self.equation.alpha, self.equation.beta);
        for j in 0..n {
            let u = phys[j];
            let m2 = u.norm_sqr();
            out[j] = I * (2.0 * a * m2) * u - deriv[j] * (6.0 * b * m2);
        }
        for (o, (u, s)) in out.iter_mut().zip(phys.iter().zip(&self.damping)) {
            *o -= u * *s;
        }
        self.forward(out);
        for (v, keep) in out.iter_mut().zip(&self.keep) {
            if !keep {
                *v = ZERO;
            }
        }
        self.phys = phys;
        self.deriv = deriv;
    }

    /// One Lawson-RK4 step on spectral coefficients.
    pub fn step_spectral(&mut self, spec: &mut [C64], dt: f64) {
        self.prepare(dt);
        let n = self.grid.n;
        let mut k1 = vec![ZERO; n];
        let mut k2 = vec![ZERO; n];
        let mut k3 = vec![ZERO; n];
        let mut k4 = vec![ZERO; n];
        let mut stage = vec![ZERO; n];
        let h = dt;
        self.nonlinear(spec, &mut k1);
        for m in 0..n {
            stage[m] = self.half[m] * (spec[m] + k1[m] * (0.5 * h));
        }
        self.nonlinear(&stage, &mut k2);
        for m in 0..n {
            stage[m] = self.half[m] * spec[m] + k2[m] * (0.5 * h);
        }
        self.nonlinear(&stage, &mut k3);
        for m in 0..n {
            stage[m] = self.full[m] * spec[m] + self.half[m] * k3[m] * h;
        }
        self.nonlinear(&stage, &mut k4);
        for m in 0..n {
            spec[m] = self.full[m] * spec[m]
                + (self.full[m] * k1[m] + self.half[m] * (k2[m] + k3[m]) * 2.0 + k4[m]) * (h / 6.0);
        }
    }

    /// Mass from spectral coefficients (Parseval).
    pub fn spectral_mass(&self, spec: &[C64]) -> f64 {
        spec.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx() / self.grid.n as f64
    }

    /// (u, u_x, u_xx) at `x = 0` by spectral differentiation.
    pub fn trace_at_origin(&self, spec: &[C64]) -> [C64; 3] {
        // x = 0 sits L/2 from the left end: phase e^{iκL/2} = (−1)^m.
        let mut g = [ZERO; 3];
        for (m, v) in spec.iter().enumerate() {
            let v = if m % 2 == 0 { *v } else { -*v };
            let k = if 2 * m == self.grid.n { 0.0 } else { self.kappa[m] };
            g[0] += v;
            g[1] += v * (I * k);
            g[2] -= v * (k * k);
        }
        let s = 1.0 / self.grid.n as f64;
        [g[0] * s, g[1] * s, g[2] * s]
    }

    fn check_guards(&self, state: &FieldState) -> Result<()> {
        if let Some(tol) = self.guards.mass_tol {
            if state.mass0 > 0.0 {
                let drift = (state.mass() - state.mass0).abs() / state.mass0;
                if drift > tol {
                    return Err(Error::MassDrift { t: state.t, drift, tol });
                }
            }
        }
        if let Some(tol) = self.guards.decay_tol {
            let value = state.edge_magnitude(self.guards.edge_fraction);
            if value > tol {
                return Err(Error::EdgeContamination { t: state.t, value, tol });
            }
        }
        Ok(())
    }

    /// Advances `state` by `dt`.
    pub fn step(&mut self, state: &FieldState, dt: f64) -> Result<FieldState> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt = {dt} must be positive")));
        }
        if let Some(tol) = self.guards.decay_tol {
            let value = state.edge_magnitude(self.guards.edge_fraction);
            if value > tol {
                return Err(Error::EdgeContamination { t: state.t, value, tol });
            }
        }
        let mut spec = self.to_spectral(&state.values);
        self.step_spectral(&mut spec, dt);
        let next = FieldState {
            grid: self.grid,
            values: self.to_physical(&spec),
            t: state.t + dt,
            mass0: state.mass0,
        };
        self.check_guards(&next)?;
        Ok(next)
    }
}

/// Boundary values `g0 = u(0,t)`, `g1 = u_x(0,t)`, `g2 = u_xx(0,t)` on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraces {
    pub t0: f64,
    pub dt: f64,
    pub g0: Vec<C64>,
    pub g1: Vec<C64>,
    pub g2: Vec<C64>,
}

impl BoundaryTraces {
    pub fn zeros(dt: f64, n: usize) -> Self {
        Self { t0: 0.0, dt, g0: vec![ZERO; n], g1: vec![ZERO; n], g2: vec![ZERO; n] }
    }

    pub fn len(&self) -> usize {
        self.g0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g0.is_empty()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len().saturating_sub(1))
    }

    /// Interpolated (g0, g1, g2) at time `t`.
    pub fn at(&self, t: f64) -> [C64; 3] {
        [
            lagrange_uniform(&self.g0, self.t0, self.dt, t),
            lagrange_uniform(&self.g1, self.t0, self.dt, t),
            lagrange_uniform(&self.g2, self.t0, self.dt, t),
        ]
    }

    /// Largest trace magnitude over the final `span` of the window.
    pub fn tail_magnitude(&self, span: f64) -> f64 {
        let from = self.t_end() - span;
        (0..self.len())
            .filter(|&j| self.t(j) >= from)
            .map(|j| self.g0[j].norm().max(self.g1[j].norm()).max(self.g2[j].norm()))
            .fold(0.0, f64::max)
    }

    /// The same traces truncated to `t ≤ t_end`.
    pub fn truncated(&self, t_end: f64) -> Self {
        let n = (((t_end - self.t0) / self.dt).round() as usize + 1).min(self.len());
        Self {
            t0: self.t0,
            dt: self.dt,
            g0: self.g0[..n].to_vec(),
            g1: self.g1[..n].to_vec(),
            g2: self.g2[..n].to_vec(),
        }
    }

    /// Largest mismatch between the traces at `t0` and the datum jet at `x = 0`.
    pub fn compatibility_defect(&self, datum: &Datum) -> f64 {
        let jet = datum.jet(0.0);
        let g = [self.g0[0], self.g1[0], self.g2[0]];
        g.iter().zip(jet.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Traces from full-domain snapshots taken at the times of `t_grid`.
pub fn extract_traces(run: &[FieldState], t_grid: &[f64]) -> Result<BoundaryTraces> {
    let Some(first) = run.first() else {
        return Err(Error::TraceGridMismatch { t: t_grid.first().copied().unwrap_or(0.0) });
    };
    if t_grid.len() < 2 {
        return Err(Error::Config("trace grid needs at least two times".into()));
    }
    let mut solver = HirotaSolver::new(Equation { alpha: 1.0, beta: 0.0 }, first.grid);
    let dt = t_grid[1] - t_grid[0];
    let mut out = BoundaryTraces { t0: t_grid[0], dt, g0: vec![], g1: vec![], g2: vec![] };
    let tol = 1e-9 * dt.abs().max(1.0);
    for &t in t_grid {
        let snap = run
            .iter()
            .find(|s| (s.t - t).abs() <= tol)
            .ok_or(Error::TraceGridMismatch { t })?;
        let spec = solver.to_spectral(&snap.values);
        let [g0, g1, g2] = solver.trace_at_origin(&spec);
        out.g0.push(g0);
        out.g1.push(g1);
        out.g2.push(g2);
    }
    Ok(out)
}

/// What a run keeps besides the final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub dt: f64,
    pub t_max: f64,
    /// Cadence of windowed snapshots (a multiple of `dt`).
    pub snap_dt: f64,
    /// Spatial window kept in snapshots; `None` keeps nothing.
    pub window: Option<(f64, f64)>,
    /// Record traces at every step up to this time.
    pub traces_until: Option<f64>,
    /// Times at which the whole field is kept.
    pub full_at: Vec<f64>,
    #[serde(default)]
    pub sponge: Option<Sponge>,
}

/// Accepted error of [`Run::evaluate`] against a run at doubled resolution.
pub const INTERP_TOL: f64 = 1e-5;

/// Stored output of a direct simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Run {
    pub equation: Equation,
    pub grid: Grid,
    pub snap_dt: f64,
    /// Windowed snapshots at `t = j·snap_dt`.
    pub snapshots: Vec<SampledComplexFunction>,
    pub traces: Option<BoundaryTraces>,
    pub full: Vec<FieldState>,
    pub final_state: FieldState,
    pub max_mass_drift: f64,
}

impl Run {
    pub fn snapshot_time(&self, j: usize) -> f64 {
        j as f64 * self.snap_dt
    }

    pub fn t_end(&self) -> f64 {
        self.snapshot_time(self.snapshots.len().saturating_sub(1))
    }

    /// Interpolated `u(x, t)` from the windowed snapshots: six-point Lagrange
    /// in `x`, cubic Lagrange in `t`.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<C64> {
        let n = self.snapshots.len();
        let first = self.snapshots.first().ok_or(Error::OutOfWindow { x, t })?;
        let eps = 1e-9 * self.snap_dt;
        if t < -eps || t > self.t_end() + eps || x < first.x0 - eps || x > first.x_end() + eps {
            return Err(Error::OutOfWindow { x, t });
        }
        let s = t / self.snap_dt;
        let nearest = s.round();
        if (s - nearest).abs() < 1e-9 {
            return Ok(self.snapshots[nearest as usize].at(x));
        }
        let p = 4.min(n);
        let base = (s.floor() as isize - 1).clamp(0, (n - p) as isize) as usize;
        let mut acc = ZERO;
        for i in 0..p {
            let ti = (base + i) as f64;
            let mut w = 1.0;
            for j in 0..p {
                if j != i {
                    let tj = (base + j) as f64;
                    w *= (s - tj) / (ti - tj);
                }
            }
            acc += self.snapshots[base + i].at(x) * w;
        }
        Ok(acc)
    }

    pub fn full_at(&self, t: f64) -> Option<&FieldState> {
        self.full.iter().find(|s| (s.t - t).abs() < 1e-9 * t.abs().max(1.0))
    }
}

/// Integrates from `t = 0` to `plan.t_max`, storing what `plan` asks for.
pub fn simulate(equation: Equation, grid: Grid, datum: &Datum, guards: StepGuards, plan: &RunPlan) -> Result<Run> {
    if !(plan.dt > 0.0) || !(plan.t_max > 0.0) {
        return Err(Error::Config("dt and t_max must be positive".into()));
    }
    let steps = (plan.t_max / plan.dt).round() as usize;
    if ((steps as f64) * plan.dt - plan.t_max).abs() > 1e-9 * plan.t_max {
        return Err(Error::Config(format!("t_max = {} is not a multiple of dt = {}", plan.t_max, plan.dt)));
    }
    let snap_every = (plan.snap_dt / plan.dt).round() as usize;
    if snap_every == 0 || ((snap_every as f64) * plan.dt - plan.snap_dt).abs() > 1e-9 * plan.snap_dt {
        return Err(Error::Config(format!("snap_dt = {} is not a multiple of dt = {}", plan.snap_dt, plan.dt)));
    }
    let mut solver = HirotaSolver::new(equation, grid).with_guards(guards).with_sponge(plan.sponge);
    let initial = FieldState::from_datum(grid, datum);
    let mass0 = initial.mass0;
    let mut spec = solver.to_spectral(&initial.values);

    let window_range = plan.window.map(|(lo, hi)| {
        let first = ((lo - grid.x_min()) / grid.dx()).ceil().max(0.0) as usize;
        let last = (((hi - grid.x_min()) / grid.dx()).floor() as usize).min(grid.n - 1);
        (first, last)
    });
    let trace_steps = plan.traces_until.map(|t| ((t / plan.dt).round() as usize).min(steps));
    let full_steps: Vec<usize> = plan.full_at.iter().map(|t| (t / plan.dt).round() as usize).collect();

    let mut snapshots = Vec::new();
    let mut traces = trace_steps.map(|n| BoundaryTraces {
        t0: 0.0,
        dt: plan.dt,
        g0: Vec::with_capacity(n + 1),
        g1: Vec::with_capacity(n + 1),
        g2: Vec::with_capacity(n + 1),
    });
    let mut full = Vec::new();
    let mut max_drift = 0.0f64;
    let edge_width = ((grid.n as f64 * guards.edge_fraction).ceil() as usize).max(1);

    for step in 0..=steps {
        let t = step as f64 * plan.dt;
        let need_phys = step % snap_every == 0 || full_steps.contains(&step) || guards.decay_tol.is_some();
        let phys = if need_phys { Some(solver.to_physical(&spec)) } else { None };
        if let Some(phys) = &phys {
            if let Some(tol) = guards.decay_tol {
                let value = phys[..edge_width]
                    .iter()
                    .chain(&phys[grid.n - edge_width..])
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                if value > tol {
                    return Err(Error::EdgeContamination { t, value, tol });
                }
            }
            if step % snap_every == 0 {
                if let Some((first, last)) = window_range {
                    snapshots.push(SampledComplexFunction::new(
                        grid.x(first),
                        grid.dx(),
                        phys[first..=last].to_vec(),
                    ));
                }
            }
            if full_steps.contains(&step) {
                full.push(FieldState { grid, values: phys.clone(), t, mass0 });
            }
        }
        if let (Some(tr), Some(limit)) = (traces.as_mut(), trace_steps) {
            if step <= limit {
                let [g0, g1, g2] = solver.trace_at_origin(&spec);
                tr.g0.push(g0);
                tr.g1.push(g1);
                tr.g2.push(g2);
            }
        }
        if mass0 > 0.0 {
            let drift = (solver.spectral_mass(&spec) - mass0).abs() / mass0;
            max_drift = max_drift.max(drift);
            if let Some(tol) = guards.mass_tol {
                if drift > tol {
                    return Err(Error::MassDrift { t, drift, tol });
                }
            }
        }
        if step < steps {
            solver.step_spectral(&mut spec, plan.dt);
        }
    }
    let final_state = FieldState { grid, values: solver.to_physical(&spec), t: steps as f64 * plan.dt, mass0 };
    Ok(Run {
        equation,
        grid,
        snap_dt: plan.snap_dt,
        snapshots,
        traces,
        full,
        final_state,
        max_mass_drift: max_drift,
    })
}
