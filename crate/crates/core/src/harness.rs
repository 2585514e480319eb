//! Experiment orchestration: trace run, spectral sweep, derived scattering
//! data, zero certificates, asymptotics and the comparison against a direct
//! solution, with every check collected into a [`Summary`].

use crate::asymptotics::{u_as, AsymptoticValue, BranchPolicy, RayData, T_MIN};
use crate::delta::{DeltaData, QuadratureOptions};
use crate::error::{Error, Result};
use crate::geometry::{middle_region_boundary, stationary_points, upper_half_disk, RaySpec};
use crate::lax::{k_grid, HalfLineScattering, SpectralInput, TOptions, TailClosure, XOptions};
use crate::linalg::C64;
use crate::pde::{simulate, BoundaryTraces, Datum, Grid, Run, RunPlan, Sponge, StepGuards};
use crate::sampled::SampledComplexFunction;
use crate::scattering::{certify, ScatteringSet, WindingCertificate};
use crate::Equation;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Whole-line run that manufactures the boundary traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRunConfig {
    pub n_x: usize,
    pub l_dom: f64,
    pub dt: f64,
    /// End of the trace window; the field at this time closes the `t`-problem.
    pub t_s: f64,
    /// Band-limited refinement of the closing snapshot.
    pub closure_refine: usize,
}

/// Run used as ground truth along the rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub n_x: usize,
    pub l_dom: f64,
    pub dt: f64,
    pub t_max: f64,
    pub snap_dt: f64,
    pub window: (f64, f64),
    pub sponge: Option<Sponge>,
    /// Ray of the decay fits.
    pub fit_xi: f64,
    pub fit_t: (f64, f64),
    /// Spacing of the dense samples along the fit ray.
    pub dense_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
    /// Uniform points on `[k₀, 0]` carrying the reflection spline.
    pub n_inner: usize,
    /// `u₀` is sampled on `[0, x_cut]` with spacing `x_dx`.
    pub x_cut: f64,
    pub x_dx: f64,
}

/// Repeat of the trace run at a coarser step, compared on every `stride`-th
/// outer grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub dt: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCheckConfig {
    pub radius: f64,
    /// Contour samples per unit length at the coarse resolution.
    pub density: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub mass: f64,
    pub trace: f64,
    pub unitarity: f64,
    pub route: f64,
    pub global_relation: f64,
    /// Required reduction of the global-relation residual when `dt` halves.
    pub ladder_ratio: f64,
    pub wind_guard: f64,
    pub theorem_route: f64,
    pub leading_slope: f64,
    pub leading_slope_tol: f64,
    pub residual_slope: f64,
    pub chi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-10,
            trace: 1e-10,
            unitarity: 1e-8,
            route: crate::scattering::ROUTE_TOL,
            global_relation: crate::scattering::GR_TOL,
            ladder_ratio: 2.0,
            wind_guard: crate::scattering::WIND_GUARD,
            theorem_route: crate::asymptotics::ROUTE_TOL,
            leading_slope: -0.5,
            leading_slope_tol: 0.05,
            residual_slope: -0.85,
            chi: 1e-8,
        }
    }
}

/// One file drives the whole experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub equation: Equation,
    pub datum: Datum,
    pub trace_run: TraceRunConfig,
    pub spectral: SpectralConfig,
    pub rays: Vec<f64>,
    pub times: Vec<f64>,
    pub policy: BranchPolicy,
    pub tolerances: Tolerances,
    pub ladder: Option<LadderConfig>,
    pub zero_check: Option<ZeroCheckConfig>,
    pub comparison: Option<ComparisonConfig>,
    /// Factor applied to `g1` before the spectral stage (negative control).
    #[serde(default)]
    pub corrupt_g1: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            equation: Equation::default(),
            datum: Datum::gaussian(0.3),
            trace_run: TraceRunConfig { n_x: 16384, l_dom: 3276.8, dt: 0.002, t_s: 5.0, closure_refine: 4 },
            spectral: SpectralConfig { k_min: -6.0, k_max: 6.0, n_k: 2001, n_inner: 201, x_cut: 8.0, x_dx: 0.01 },
            rays: vec![0.05, 0.1, 0.2, 0.3],
            times: vec![25.0, 50.0, 100.0, 200.0],
            policy: BranchPolicy::default(),
            tolerances: Tolerances::default(),
            ladder: Some(LadderConfig { dt: 0.004, stride: 10 }),
            zero_check: Some(ZeroCheckConfig { radius: 6.0, density: 4 }),
            comparison: Some(ComparisonConfig {
                n_x: 4096,
                l_dom: 819.2,
                dt: 0.005,
                t_max: 200.0,
                snap_dt: 0.05,
                window: (0.0, 70.0),
                sponge: Some(Sponge { strength: 2.0, width: 150.0 }),
                fit_xi: 0.2,
                fit_t: (25.0, 200.0),
                dense_dt: 0.1,
            }),
            corrupt_g1: None,
        }
    }
}

impl ExperimentConfig {
    /// Rays and times must lie where the formula applies.
    pub fn validate(&self) -> Result<()> {
        for &xi in self.rays.iter().chain(self.comparison.as_ref().map(|c| &c.fit_xi)) {
            RaySpec::uncapped(xi, self.equation)?;
        }
        if let Some(t) = self.times.iter().find(|&&t| t < T_MIN) {
            return Err(Error::Config(format!("time {t} is below T_min = {T_MIN}")));
        }
        if self.spectral.n_k < 2 || self.spectral.n_inner < 4 {
            return Err(Error::Config("k-grids need at least 2 (outer) and 4 (inner) points".into()));
        }
        if let Some(c) = &self.comparison {
            let reach = self.rays.iter().chain([&c.fit_xi]).fold(0.0f64, |m, &xi| m.max(xi)) * c.t_max;
            if c.window.0 > 0.0 || c.window.1 < reach {
                return Err(Error::Config(format!("comparison window {:?} does not cover x up to {reach}", c.window)));
            }
            if self.times.iter().any(|&t| t > c.t_max) || c.fit_t.1 > c.t_max {
                return Err(Error::Config("requested times exceed the comparison run".into()));
            }
        }
        Ok(())
    }
}

/// Output of the trace run.
#[derive(Debug, Clone)]
pub struct TraceStage {
    pub traces: BoundaryTraces,
    /// Whole field at `t_s`.
    pub closing: SampledComplexFunction,
    pub t_s: f64,
    pub max_mass_drift: f64,
    pub compatibility_defect: f64,
}

impl TraceStage {
    pub fn closure(&self, refine: usize) -> TailClosure {
        TailClosure::from_snapshot(&self.closing, self.t_s, refine)
    }
}

pub fn trace_stage(eq: Equation, datum: &Datum, cfg: &TraceRunConfig, dt: f64, mass_tol: f64) -> Result<TraceStage> {
    let grid = Grid::new(cfg.n_x, cfg.l_dom)?;
    let plan = RunPlan {
        dt,
        t_max: cfg.t_s,
        snap_dt: cfg.t_s,
        window: None,
        traces_until: Some(cfg.t_s),
        full_at: vec![cfg.t_s],
        sponge: None,
    };
    // the far field wraps around the periodic box well below the trace accuracy
    let guards = StepGuards { mass_tol: Some(mass_tol), decay_tol: None, edge_fraction: 0.01 };
    let run = simulate(eq, grid, datum, guards, &plan)?;
    let traces = run.traces.clone().ok_or(Error::TraceGridMismatch { t: 0.0 })?;
    let closing = run
        .full_at(cfg.t_s)
        .ok_or(Error::TraceGridMismatch { t: cfg.t_s })?
        .as_sampled();
    Ok(TraceStage {
        compatibility_defect: traces.compatibility_defect(datum),
        traces,
        closing,
        t_s: cfg.t_s,
        max_mass_drift: run.max_mass_drift,
    })
}

/// `u₀` on `[0, x_cut]`.
pub fn initial_samples(datum: &Datum, spectral: &SpectralConfig) -> SampledComplexFunction {
    let n = (spectral.x_cut / spectral.x_dx).round() as usize + 1;
    datum.sample(0.0, spectral.x_dx, n)
}

pub fn spectral_input<'a>(
    eq: Equation,
    u0: &'a SampledComplexFunction,
    traces: &'a BoundaryTraces,
    closure: &'a TailClosure,
) -> SpectralInput<'a> {
    SpectralInput {
        equation: eq,
        u0,
        traces,
        closure: Some(closure),
        x_opts: XOptions::default(),
        t_opts: TOptions { tail_tol: None, ..TOptions::default() },
    }
}

/// `a, b, A, B` on the outer grid and on the dense grid over `[k₀, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTables {
    pub outer: HalfLineScattering,
    pub inner: HalfLineScattering,
}

pub fn spectral_stage(input: &SpectralInput, cfg: &SpectralConfig) -> Result<SpectralTables> {
    let outer = input.sweep(&k_grid(cfg.k_min, cfg.k_max, cfg.n_k))?;
    let inner = input.sweep(&k_grid(input.equation.k0(), 0.0, cfg.n_inner))?;
    Ok(SpectralTables { outer, inner })
}

/// Derived scattering data on both grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringStage {
    pub outer: ScatteringSet,
    pub inner: ScatteringSet,
}

impl ScatteringStage {
    pub fn from_tables(t: SpectralTables) -> Result<Self> {
        Ok(Self { outer: ScatteringSet::from_sweep(t.outer)?, inner: ScatteringSet::from_sweep(t.inner)? })
    }

    pub fn unitarity_defect(&self) -> (f64, f64) {
        let (p, q) = self.outer.unitarity_defect();
        let (r, s) = self.inner.unitarity_defect();
        (p.max(r), q.max(s))
    }

    pub fn route_defect(&self) -> f64 {
        self.outer.route_defect().max(self.inner.route_defect())
    }

    pub fn global_relation_residual(&self, eq: &Equation) -> f64 {
        self.outer.global_relation_residual(eq)
    }

    /// `δ` data for one ray from the spline of `r` on `[k₀, 0]`.
    pub fn ray(&self, eq: Equation, xi: f64, opts: &QuadratureOptions) -> Result<RayData> {
        let ray = RaySpec::uncapped(xi, eq)?;
        let spline = self.inner.reflection_spline(eq.k0(), 0.0)?;
        let delta = DeltaData::new(stationary_points(&ray), &spline, opts)?;
        Ok(RayData::new(&ray, delta))
    }
}

/// Winding certificates for `a` on the upper half disk and for `d` on the
/// boundary of the middle region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCertificates {
    pub a: WindingCertificate,
    pub d: WindingCertificate,
}

pub fn zero_certificates(input: &SpectralInput, cfg: &ZeroCheckConfig, guard: f64) -> Result<ZeroCertificates> {
    let eq = input.equation;
    let a = certify(|k| input.a_at(k), |n| upper_half_disk(cfg.radius, n), cfg.density, guard)?;
    let d = certify(|k| input.d_at(k), |n| middle_region_boundary(&eq, cfg.radius, n), cfg.density, guard)?;
    Ok(ZeroCertificates { a, d })
}

/// Asymptotic values on the `rays × times` table.
pub fn asymptotic_table(rays: &[RayData], times: &[f64], policy: &BranchPolicy) -> Vec<Result<AsymptoticValue>> {
    let pairs: Vec<(usize, f64)> = (0..rays.len()).flat_map(|i| times.iter().map(move |&t| (i, t))).collect();
    pairs.par_iter().map(|&(i, t)| u_as(&rays[i], t, policy)).collect()
}

/// One `(ξ, t)` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub xi: f64,
    pub t: f64,
    pub u_direct: C64,
    pub u_asym: C64,
    pub abs_err: f64,
    pub normalized: f64,
}

impl ComparisonRecord {
    pub fn new(xi: f64, t: f64, u_direct: C64, u_asym: C64) -> Self {
        let abs_err = (u_direct - u_asym).norm();
        Self { xi, t, u_direct, u_asym, abs_err, normalized: abs_err * t / t.ln() }
    }
}

pub fn comparison_run(eq: Equation, datum: &Datum, cfg: &ComparisonConfig) -> Result<Run> {
    let grid = Grid::new(cfg.n_x, cfg.l_dom)?;
    let plan = RunPlan {
        dt: cfg.dt,
        t_max: cfg.t_max,
        snap_dt: cfg.snap_dt,
        window: Some(cfg.window),
        traces_until: None,
        full_at: vec![],
        sponge: cfg.sponge,
    };
    // the sponge removes mass on purpose
    let guards = StepGuards { mass_tol: None, decay_tol: None, edge_fraction: 0.01 };
    simulate(eq, grid, datum, guards, &plan)
}

pub fn compare(run: &Run, ray: &RayData, times: &[f64], policy: &BranchPolicy) -> Result<Vec<ComparisonRecord>> {
    times
        .par_iter()
        .map(|&t| {
            let direct = run.evaluate(ray.xi * t, t)?;
            let asym = u_as(ray, t, policy)?.u_leading();
            Ok(ComparisonRecord::new(ray.xi, t, direct, asym))
        })
        .collect()
}

/// Least-squares line through `(ln t, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_power_law(t: &[f64], y: &[f64]) -> Result<DecayFit> {
    if t.len() != y.len() || t.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 samples, got {}", t.len().min(y.len()))));
    }
    if y.iter().all(|&v| v < 1e-13) {
        return Err(Error::DegenerateFit("all values below 1e-13".into()));
    }
    if let Some(v) = y.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateFit(format!("non-positive value {v}")));
    }
    let xs: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all times coincide".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit { slope, intercept: my - slope * mx, r2 })
}

/// Log-log fit of `abs_err` against `t`.
pub fn fit_decay(records: &[ComparisonRecord]) -> Result<DecayFit> {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.abs_err).collect();
    fit_power_law(&t, &e)
}

/// Log-log fit of the RMS of `y` over `bins` log-spaced windows of `[t_lo, t_hi]`,
/// which averages out the fast oscillation of the residual.
pub fn fit_envelope(t: &[f64], y: &[f64], t_lo: f64, t_hi: f64, bins: usize) -> Result<DecayFit> {
    let ratio = (t_hi / t_lo).powf(1.0 / bins as f64);
    let mut centres = Vec::with_capacity(bins);
    let mut rms = Vec::with_capacity(bins);
    for b in 0..bins {
        let lo = t_lo * ratio.powi(b as i32);
        let hi = lo * ratio;
        let inside: Vec<f64> = t.iter().zip(y).filter(|(s, _)| **s >= lo && **s < hi).map(|(_, v)| v * v).collect();
        if inside.is_empty() {
            return Err(Error::DegenerateFit(format!("no samples in [{lo}, {hi})")));
        }
        centres.push((lo * hi).sqrt());
        rms.push((inside.iter().sum::<f64>() / inside.len() as f64).sqrt());
    }
    fit_power_law(&centres, &rms)
}

/// Best exponent `s` of `u(t) ≈ t^s (A e^{iφ_a(t)} + B e^{iφ_b(t)})` with free
/// complex `A, B` and the phases of the formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingFit {
    pub exponent: f64,
    pub amplitude_a: C64,
    pub amplitude_b: C64,
    pub rms: f64,
}

fn amplitudes_for(s: f64, t: &[f64], u: &[C64], phi: &[(f64, f64)]) -> (C64, C64, f64) {
    let (mut gaa, mut gab, mut gbb, mut ra, mut rb) = (0.0, C64::new(0.0, 0.0), 0.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let cols: Vec<(C64, C64)> = t
        .iter()
        .zip(phi)
        .map(|(&ti, &(pa, pb))| (C64::from_polar(ti.powf(s), pa), C64::from_polar(ti.powf(s), pb)))
        .collect();
    for ((ca, cb), ui) in cols.iter().zip(u) {
        gaa += ca.norm_sqr();
        gbb += cb.norm_sqr();
        gab += ca.conj() * cb;
        ra += ca.conj() * ui;
        rb += cb.conj() * ui;
    }
    let det = gaa * gbb - gab.norm_sqr();
    let a = (ra * gbb - gab * rb) / det;
    let b = (rb * gaa - gab.conj() * ra) / det;
    let ss: f64 = cols.iter().zip(u).map(|((ca, cb), ui)| (ca * a + cb * b - ui).norm_sqr()).sum();
    (a, b, (ss / t.len() as f64).sqrt())
}

pub fn fit_leading_order(t: &[f64], u: &[C64], phi: &[(f64, f64)]) -> Result<LeadingFit> {
    if t.len() < 4 || t.len() != u.len() || t.len() != phi.len() {
        return Err(Error::DegenerateFit("need at least 4 matching samples".into()));
    }
    if u.iter().all(|v| v.norm() < 1e-13) {
        return Err(Error::DegenerateFit("field vanishes along the ray".into()));
    }
    let cost = |s: f64| amplitudes_for(s, t, u, phi).2;
    let (mut lo, mut hi) = (-2.0, 1.0);
    let scan = 60;
    let best = (0..=scan)
        .map(|j| lo + (hi - lo) * j as f64 / scan as f64)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap_or(-0.5);
    let step = (hi - lo) / scan as f64;
    lo = best - step;
    hi = best + step;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    for _ in 0..80 {
        if cost(c) < cost(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - g * (hi - lo);
        d = lo + g * (hi - lo);
    }
    let s = 0.5 * (lo + hi);
    let (a, b, rms) = amplitudes_for(s, t, u, phi);
    Ok(LeadingFit { exponent: s, amplitude_a: a, amplitude_b: b, rms })
}

/// A named pass/fail outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, passed: value <= threshold, detail: String::new() }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, passed: value >= threshold, detail: String::new() }
    }

    pub fn failed(name: &str, detail: String) -> Self {
        Self { name: name.into(), value: f64::NAN, threshold: f64::NAN, passed: false, detail }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Fits along the comparison ray under one branch policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFits {
    pub policy: String,
    pub residual: Option<DecayFit>,
    pub envelope: Option<DecayFit>,
    pub max_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub status: String,
    pub failed: Vec<String>,
    pub checks: Vec<Check>,
    pub winding: Option<ZeroCertificates>,
    pub leading_fit: Option<LeadingFit>,
    pub policies: Vec<PolicyFits>,
}

impl Summary {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        Self {
            status: if failed.is_empty() { "PASSED" } else { "FAILED" }.into(),
            failed,
            checks,
            winding: None,
            leading_fit: None,
            policies: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Direct values along the comparison ray at dense times.
#[derive(Debug, Clone)]
pub struct DenseSeries {
    pub xi: f64,
    pub t: Vec<f64>,
    pub u: Vec<C64>,
}

pub fn dense_series(run: &Run, xi: f64, (t_lo, t_hi): (f64, f64), dt: f64) -> Result<DenseSeries> {
    let n = ((t_hi - t_lo) / dt).round() as usize;
    let t: Vec<f64> = (0..=n).map(|j| t_lo + j as f64 * dt).collect();
    let u = t.par_iter().map(|&s| run.evaluate(xi * s, s)).collect::<Result<Vec<_>>>()?;
    Ok(DenseSeries { xi, t, u })
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub traces: TraceStage,
    pub tables: SpectralTables,
    pub scattering: ScatteringStage,
    pub rays: Vec<RayData>,
    pub asymptotics: Vec<AsymptoticValue>,
    pub comparison: Option<ComparisonStage>,
    pub summary: Summary,
}

fn fits_for(
    policy: &BranchPolicy,
    ray: &RayData,
    run: &Run,
    times: &[f64],
    dense: &DenseSeries,
    range: (f64, f64),
) -> Result<(PolicyFits, Vec<ComparisonRecord>)> {
    let records = compare(run, ray, times, policy)?;
    let residual = fit_decay(&records).ok();
    let err: Vec<f64> = dense
        .t
        .iter()
        .zip(&dense.u)
        .map(|(&t, &u)| u_as(ray, t, policy).map(|v| (u - v.u_leading()).norm()))
        .collect::<Result<_>>()?;
    let envelope = fit_envelope(&dense.t, &err, range.0, range.1, 8).ok();
    let max_normalized = records.iter().map(|r| r.normalized).fold(0.0, f64::max);
    Ok((PolicyFits { policy: policy.label(), residual, envelope, max_normalized }, records))
}

/// All stages in order. Module errors abort; check failures are collected.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let eq = cfg.equation;
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();

    let mut traces = trace_stage(eq, &cfg.datum, &cfg.trace_run, cfg.trace_run.dt, tol.mass)?;
    checks.push(Check::at_most("trace_mass_drift", traces.max_mass_drift, tol.mass));
    checks.push(Check::at_most("trace_compatibility", traces.compatibility_defect, tol.trace));
    if let Some(f) = cfg.corrupt_g1 {
        traces.traces.g1.iter_mut().for_each(|g| *g *= f);
    }
    let closure = traces.closure(cfg.trace_run.closure_refine);
    let u0 = initial_samples(&cfg.datum, &cfg.spectral);
    let input = spectral_input(eq, &u0, &traces.traces, &closure);
    let tables = spectral_stage(&input, &cfg.spectral)?;
    let scattering = ScatteringStage::from_tables(tables.clone())?;

    let (ux, ut) = scattering.unitarity_defect();
    checks.push(Check::at_most("unitarity_x", ux, tol.unitarity));
    checks.push(Check::at_most("unitarity_t", ut, tol.unitarity));
    checks.push(Check::at_most("reflection_routes", scattering.route_defect(), tol.route));
    let gr = scattering.global_relation_residual(&eq);
    checks.push(Check::at_most("global_relation", gr, tol.global_relation));

    if let Some(l) = &cfg.ladder {
        // the mass tolerance is pinned at the reference step only
        let coarse = trace_stage(eq, &cfg.datum, &cfg.trace_run, l.dt, f64::INFINITY)?;
        let mut coarse_traces = coarse.traces.clone();
        if let Some(f) = cfg.corrupt_g1 {
            coarse_traces.g1.iter_mut().for_each(|g| *g *= f);
        }
        let coarse_closure = coarse.closure(cfg.trace_run.closure_refine);
        let coarse_input = spectral_input(eq, &u0, &coarse_traces, &coarse_closure);
        let idx: Vec<usize> = (0..scattering.outer.len()).step_by(l.stride.max(1)).collect();
        let ks: Vec<f64> = idx.iter().map(|&j| scattering.outer.k[j]).collect();
        let coarse_gr = ScatteringSet::derive_cd(coarse_input.sweep(&ks)?).global_relation_residual(&eq);
        let fine = ScatteringSet::derive_cd(HalfLineScattering {
            k: ks,
            a: idx.iter().map(|&j| scattering.outer.a[j]).collect(),
            b: idx.iter().map(|&j| scattering.outer.b[j]).collect(),
            big_a: idx.iter().map(|&j| scattering.outer.big_a[j]).collect(),
            big_b: idx.iter().map(|&j| scattering.outer.big_b[j]).collect(),
        });
        let fine_gr = fine.global_relation_residual(&eq);
        let ratio = coarse_gr / fine_gr.max(f64::MIN_POSITIVE);
        checks.push(
            Check::at_least("global_relation_ladder", ratio, tol.ladder_ratio)
                .with_detail(format!(
                    "dt {}: {coarse_gr:.3e} (mass drift {:.1e}), dt {}: {fine_gr:.3e}",
                    l.dt, coarse.max_mass_drift, cfg.trace_run.dt
                )),
        );
    }

    let mut winding = None;
    if let Some(z) = &cfg.zero_check {
        match zero_certificates(&input, z, tol.wind_guard) {
            Ok(w) => {
                let detail = format!("a: {}/{}, d: {}/{}", w.a.coarse, w.a.fine, w.d.coarse, w.d.fine);
                checks.push(Check::at_most("winding_a", (w.a.coarse.abs() + w.a.fine.abs()) as f64, 0.0).with_detail(detail.clone()));
                checks.push(Check::at_most("winding_d", (w.d.coarse.abs() + w.d.fine.abs()) as f64, 0.0).with_detail(detail));
                winding = Some(w);
            }
            Err(e) => checks.push(Check::failed("winding", e.to_string())),
        }
    }

    let qopts = QuadratureOptions { tol: tol.chi, ..QuadratureOptions::default() };
    let rays: Vec<RayData> = cfg.rays.iter().map(|&xi| scattering.ray(eq, xi, &qopts)).collect::<Result<_>>()?;
    let mut asymptotics = Vec::new();
    let mut worst_route = 0.0f64;
    let mut route_error = None;
    for v in asymptotic_table(&rays, &cfg.times, &cfg.policy) {
        match v {
            Ok(v) => {
                worst_route = worst_route.max(v.consistency / (v.u_as.norm() + 1.0));
                asymptotics.push(v);
            }
            Err(e) => route_error = Some(e.to_string()),
        }
    }
    checks.push(match route_error {
        None => Check::at_most("theorem_routes", worst_route, tol.theorem_route),
        Some(e) => Check::failed("theorem_routes", e),
    });

    let comparison = match &cfg.comparison {
        Some(c) => Some(comparison_stage(cfg, c, &scattering, &rays)?),
        None => None,
    };
    if let Some(stage) = &comparison {
        checks.extend(stage.checks.iter().cloned());
    }
    let mut summary = Summary::from_checks(checks);
    summary.winding = winding;
    if let Some(stage) = &comparison {
        summary.leading_fit = stage.leading_fit;
        summary.policies = stage.policies.clone();
    }
    Ok(PipelineOutput { traces, tables, scattering, rays, asymptotics, comparison, summary })
}

/// Direct run, grid records, dense series and decay fits.
#[derive(Debug, Clone)]
pub struct ComparisonStage {
    pub records: Vec<(String, ComparisonRecord)>,
    pub dense: DenseSeries,
    /// The dense series compared under the configured policy.
    pub dense_records: Vec<(String, ComparisonRecord)>,
    pub leading_fit: Option<LeadingFit>,
    pub policies: Vec<PolicyFits>,
    pub checks: Vec<Check>,
}

pub fn comparison_stage(
    cfg: &ExperimentConfig,
    c: &ComparisonConfig,
    scattering: &ScatteringStage,
    rays: &[RayData],
) -> Result<ComparisonStage> {
    let eq = cfg.equation;
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    let run = comparison_run(eq, &cfg.datum, c)?;
    let mut records = Vec::new();
    for ray in rays {
        for r in compare(&run, ray, &cfg.times, &cfg.policy)? {
            records.push((cfg.policy.label(), r));
        }
    }
    let qopts = QuadratureOptions { tol: tol.chi, ..QuadratureOptions::default() };
    let fit_ray = match rays.iter().find(|r| r.xi == c.fit_xi) {
        Some(r) => *r,
        None => scattering.ray(eq, c.fit_xi, &qopts)?,
    };
    let dense = dense_series(&run, c.fit_xi, c.fit_t, c.dense_dt)?;
    let fit_times: Vec<f64> = cfg.times.iter().copied().filter(|&t| t >= c.fit_t.0 && t <= c.fit_t.1).collect();

    let along: Vec<AsymptoticValue> = dense.t.iter().map(|&t| u_as(&fit_ray, t, &cfg.policy)).collect::<Result<_>>()?;
    let phi: Vec<(f64, f64)> = along.iter().map(|v| (v.phi_a, v.phi_b)).collect();
    let dense_records = dense
        .u
        .iter()
        .zip(&along)
        .map(|(u, v)| (cfg.policy.label(), ComparisonRecord::new(c.fit_xi, v.t, *u, v.u_leading())))
        .collect();
    let leading_fit = match fit_leading_order(&dense.t, &dense.u, &phi) {
        Ok(f) => {
            checks.push(
                Check::at_most("leading_order_slope", (f.exponent - tol.leading_slope).abs(), tol.leading_slope_tol)
                    .with_detail(format!("fitted exponent {:.4}", f.exponent)),
            );
            Some(f)
        }
        Err(e) => {
            checks.push(Check::failed("leading_order_slope", e.to_string()));
            None
        }
    };

    let mut policies = Vec::new();
    for policy in BranchPolicy::all() {
        let (fits, recs) = fits_for(&policy, &fit_ray, &run, &fit_times, &dense, c.fit_t)?;
        if policy == cfg.policy {
            checks.push(match fits.residual {
                Some(f) => Check::at_most("residual_slope", f.slope, tol.residual_slope)
                    .with_detail(format!("xi {}, t {:?}", c.fit_xi, fit_times)),
                None => Check::failed("residual_slope", "degenerate fit".into()),
            });
            if !cfg.rays.contains(&c.fit_xi) {
                records.extend(recs.into_iter().map(|r| (policy.label(), r)));
            }
        }
        policies.push(fits);
    }
    Ok(ComparisonStage { records, dense, dense_records, leading_fit, policies, checks })
}
