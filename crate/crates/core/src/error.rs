use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the laboratory. Every numerical guard reports the
/// offending quantity so a failed run can be diagnosed from the message.
#[derive(Debug, Error)]
pub enum Error {
    #[error("conserved mass drifted: relative deviation {drift:.3e} exceeds {tol:.1e} at t = {t}")]
    MassDrift { t: f64, drift: f64, tol: f64 },

    #[error("field at the domain edge is {value:.3e} (> {tol:.1e}) at t = {t}; enlarge the domain")]
    EdgeContamination { t: f64, value: f64, tol: f64 },

    #[error("snapshot times do not cover the trace grid: missing t = {t}")]
    TraceGridMismatch { t: f64 },

    #[error("query ({x}, {t}) lies outside the stored window")]
    OutOfWindow { x: f64, t: f64 },

    #[error("step {step:.3e} too coarse for phase rate {rate:.3e} (bound {bound})")]
    StepTooCoarse { step: f64, rate: f64, bound: f64 },

    #[error("potential not decayed at the cutoff: |u| = {value:.3e} > {tol:.1e}")]
    DecayCutoffViolation { value: f64, tol: f64 },

    #[error("boundary traces not decayed at the end of the window: {value:.3e} > {tol:.1e}")]
    TailTruncation { value: f64, tol: f64 },

    #[error("division by near-zero {what} = {value:.3e} at k = {k}")]
    DivisionNearZero { what: &'static str, value: f64, k: f64 },

    #[error("|f| = {value:.3e} dips below the winding guard {guard:.1e} at contour sample {index}")]
    GuardViolation { index: usize, value: f64, guard: f64 },

    #[error("contour under-resolved: phase jump {jump:.3} rad between samples {index} and {next}")]
    ContourUnderResolved { index: usize, next: usize, jump: f64 },

    #[error("ray xi = {xi} is outside the admissible interval (0, {upper}]")]
    OutsideInterval { xi: f64, upper: f64 },

    #[error("quadrature did not converge: panel doubling changed the value by {change:.3e} (tol {tol:.1e})")]
    QuadratureNotConverged { change: f64, tol: f64 },

    #[error("point {k} lies on the branch cut [{k1}, {k2}]")]
    OnBranchCut { k: num_complex::Complex64, k1: f64, k2: f64 },

    #[error("log-gamma evaluated at a pole z = {0}")]
    PoleInput(num_complex::Complex64),

    #[error("z = {z} is not on ray X{ray}")]
    RayMismatch { z: num_complex::Complex64, ray: u8 },

    #[error("asymptotic routes disagree: |u_as - route2| = {diff:.3e} (tol {tol:.1e})")]
    RouteMismatch { diff: f64, tol: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
