//! CSV and JSON artifacts of an experiment.

use crate::asymptotics::AsymptoticValue;
use crate::error::{Error, Result};
use crate::harness::{ComparisonRecord, ExperimentConfig, PipelineOutput, ScatteringStage, SpectralTables, Summary};
use crate::lax::HalfLineScattering;
use crate::linalg::C64;
use crate::pde::{BoundaryTraces, Datum};
use crate::sampled::SampledComplexFunction;
use crate::scattering::ScatteringSet;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.json";
pub const TRACES: &str = "traces.csv";
pub const CLOSING: &str = "closing.csv";
pub const SPECTRAL: &str = "spectral.csv";
pub const SCATTERING: &str = "scattering.csv";
pub const ASYM: &str = "asym.csv";
pub const COMPARE: &str = "compare.csv";
pub const SUMMARY: &str = "summary.json";

/// Run description written next to the trace artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub alpha: f64,
    pub beta: f64,
    pub amplitude: f64,
    pub n_x: usize,
    #[serde(rename = "L_dom")]
    pub l_dom: f64,
    pub dt: f64,
    pub t_max: f64,
    pub snap_dt: f64,
    pub seed_datum: Datum,
    pub max_mass_drift: f64,
    pub compatibility_defect: f64,
    pub traces: String,
    pub closing: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, max_mass_drift: f64, compatibility_defect: f64) -> Self {
        let amplitude = match cfg.datum {
            Datum::Gaussian { amplitude, .. } | Datum::Sech { amplitude, .. } => amplitude,
            Datum::Zero => 0.0,
        };
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            alpha: cfg.equation.alpha,
            beta: cfg.equation.beta,
            amplitude,
            n_x: cfg.trace_run.n_x,
            l_dom: cfg.trace_run.l_dom,
            dt: cfg.trace_run.dt,
            t_max: cfg.trace_run.t_s,
            snap_dt: cfg.trace_run.t_s,
            seed_datum: cfg.datum,
            max_mass_drift,
            compatibility_defect,
            traces: TRACES.into(),
            closing: CLOSING.into(),
            config: cfg.clone(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(fs::File::open(path)?))?)
}

/// Resolves a path stored in a manifest relative to the manifest itself.
pub fn beside(manifest: &Path, name: &str) -> PathBuf {
    manifest.parent().map(|d| d.join(name)).unwrap_or_else(|| PathBuf::from(name))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    t: f64,
    g0_re: f64,
    g0_im: f64,
    g1_re: f64,
    g1_im: f64,
    g2_re: f64,
    g2_im: f64,
}

pub fn write_traces(path: &Path, tr: &BoundaryTraces) -> Result<()> {
    write_rows(
        path,
        (0..tr.len()).map(|j| TraceRow {
            t: tr.t(j),
            g0_re: tr.g0[j].re,
            g0_im: tr.g0[j].im,
            g1_re: tr.g1[j].re,
            g1_im: tr.g1[j].im,
            g2_re: tr.g2[j].re,
            g2_im: tr.g2[j].im,
        }),
    )
}

/// Step of a uniform grid read back from text, checked for uniformity.
fn uniform_step(xs: &[f64], what: &str) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::Parse(format!("{what}: fewer than two rows")));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if xs.iter().enumerate().any(|(j, x)| (x - (xs[0] + j as f64 * h)).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::Parse(format!("{what}: grid is not uniform")));
    }
    Ok(h)
}

pub fn read_traces(path: &Path) -> Result<BoundaryTraces> {
    let rows: Vec<TraceRow> = read_rows(path)?;
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let dt = uniform_step(&t, "traces")?;
    Ok(BoundaryTraces {
        t0: t[0],
        dt,
        g0: rows.iter().map(|r| C64::new(r.g0_re, r.g0_im)).collect(),
        g1: rows.iter().map(|r| C64::new(r.g1_re, r.g1_im)).collect(),
        g2: rows.iter().map(|r| C64::new(r.g2_re, r.g2_im)).collect(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    x: f64,
    re_u: f64,
    im_u: f64,
}

/// Snapshot as `x, Re u, Im u` under a `# t = …` line.
pub fn write_snapshot(path: &Path, t: f64, s: &SampledComplexFunction) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "# t = {t}")?;
    let mut w = csv::Writer::from_writer(f);
    for (j, v) in s.values.iter().enumerate() {
        w.serialize(FieldRow { x: s.x(j), re_u: v.re, im_u: v.im })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(f64, SampledComplexFunction)> {
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let t = first
        .trim()
        .strip_prefix("# t =")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Parse(format!("{}: missing '# t = …' header", path.display())))?;
    let mut r = csv::Reader::from_reader(reader);
    let rows: Vec<FieldRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let dx = uniform_step(&x, "snapshot")?;
    Ok((t, SampledComplexFunction::new(x[0], dx, rows.iter().map(|r| C64::new(r.re_u, r.im_u)).collect())))
}

#[derive(Debug, Serialize, Deserialize)]
struct SpectralRow {
    grid: String,
    k: f64,
    re_a: f64,
    im_a: f64,
    re_b: f64,
    im_b: f64,
    #[serde(rename = "re_A")]
    re_big_a: f64,
    #[serde(rename = "im_A")]
    im_big_a: f64,
    #[serde(rename = "re_B")]
    re_big_b: f64,
    #[serde(rename = "im_B")]
    im_big_b: f64,
}

fn spectral_rows<'a>(grid: &'a str, s: &'a HalfLineScattering) -> impl Iterator<Item = SpectralRow> + 'a {
    (0..s.len()).map(move |j| SpectralRow {
        grid: grid.into(),
        k: s.k[j],
        re_a: s.a[j].re,
        im_a: s.a[j].im,
        re_b: s.b[j].re,
        im_b: s.b[j].im,
        re_big_a: s.big_a[j].re,
        im_big_a: s.big_a[j].im,
        re_big_b: s.big_b[j].re,
        im_big_b: s.big_b[j].im,
    })
}

pub fn write_spectral(path: &Path, t: &SpectralTables) -> Result<()> {
    write_rows(path, spectral_rows("outer", &t.outer).chain(spectral_rows("inner", &t.inner)))
}

fn tables_from(rows: Vec<SpectralRow>) -> Result<SpectralTables> {
    let pick = |name: &str| {
        let sel: Vec<&SpectralRow> = rows.iter().filter(|r| r.grid == name).collect();
        HalfLineScattering {
            k: sel.iter().map(|r| r.k).collect(),
            a: sel.iter().map(|r| C64::new(r.re_a, r.im_a)).collect(),
            b: sel.iter().map(|r| C64::new(r.re_b, r.im_b)).collect(),
            big_a: sel.iter().map(|r| C64::new(r.re_big_a, r.im_big_a)).collect(),
            big_b: sel.iter().map(|r| C64::new(r.re_big_b, r.im_big_b)).collect(),
        }
    };
    let (outer, inner) = (pick("outer"), pick("inner"));
    if inner.is_empty() {
        return Err(Error::Parse("no rows on the inner grid".into()));
    }
    Ok(SpectralTables { outer, inner })
}

pub fn read_spectral(path: &Path) -> Result<SpectralTables> {
    tables_from(read_rows(path)?)
}

struct ScatteringRow {
    spectral: SpectralRow,
    re_c: f64,
    im_c: f64,
    re_d: f64,
    im_d: f64,
    re_r1: f64,
    im_r1: f64,
    re_h: f64,
    im_h: f64,
    re_r: f64,
    im_r: f64,
    gr_residual: f64,
}

fn scattering_rows<'a>(grid: &'a str, s: &'a ScatteringSet) -> impl Iterator<Item = ScatteringRow> + 'a {
    (0..s.len()).map(move |j| ScatteringRow {
        spectral: SpectralRow {
            grid: grid.into(),
            k: s.k[j],
            re_a: s.a[j].re,
            im_a: s.a[j].im,
            re_b: s.b[j].re,
            im_b: s.b[j].im,
            re_big_a: s.big_a[j].re,
            im_big_a: s.big_a[j].im,
            re_big_b: s.big_b[j].re,
            im_big_b: s.big_b[j].im,
        },
        re_c: s.c[j].re,
        im_c: s.c[j].im,
        re_d: s.d[j].re,
        im_d: s.d[j].im,
        re_r1: s.r1[j].re,
        im_r1: s.r1[j].im,
        re_h: s.h[j].re,
        im_h: s.h[j].im,
        re_r: s.r[j].re,
        im_r: s.r[j].im,
        gr_residual: s.gr_residual[j],
    })
}

/// Writes the extended table; `csv` cannot serialize flattened records, so the
/// header is spelled out.
pub fn write_scattering(path: &Path, s: &ScatteringStage) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "grid", "k", "re_a", "im_a", "re_b", "im_b", "re_A", "im_A", "re_B", "im_B", "re_c", "im_c", "re_d", "im_d",
        "re_r1", "im_r1", "re_h", "im_h", "re_r", "im_r", "gr_residual",
    ])?;
    for row in scattering_rows("outer", &s.outer).chain(scattering_rows("inner", &s.inner)) {
        let p = &row.spectral;
        let nums = [
            p.k, p.re_a, p.im_a, p.re_b, p.im_b, p.re_big_a, p.im_big_a, p.re_big_b, p.im_big_b, row.re_c, row.im_c,
            row.re_d, row.im_d, row.re_r1, row.im_r1, row.re_h, row.im_h, row.re_r, row.im_r, row.gr_residual,
        ];
        let mut rec = vec![p.grid.clone()];
        rec.extend(nums.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds the scattering stage from the `a, b, A, B` columns of either table.
pub fn read_scattering(path: &Path) -> Result<ScatteringStage> {
    ScatteringStage::from_tables(read_spectral(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct AsymRow {
    policy: String,
    xi: f64,
    t: f64,
    re_u_as: f64,
    im_u_as: f64,
    phi_a: f64,
    phi_b: f64,
    route_consistency: f64,
}

pub fn write_asym(path: &Path, policy: &str, values: &[AsymptoticValue]) -> Result<()> {
    write_rows(
        path,
        values.iter().map(|v| AsymRow {
            policy: policy.into(),
            xi: v.xi,
            t: v.t,
            re_u_as: v.u_as.re,
            im_u_as: v.u_as.im,
            phi_a: v.phi_a,
            phi_b: v.phi_b,
            route_consistency: v.consistency,
        }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct CompareRow {
    policy: String,
    sample: String,
    xi: f64,
    t: f64,
    re_u_direct: f64,
    im_u_direct: f64,
    re_u_asym: f64,
    im_u_asym: f64,
    abs_err: f64,
    normalized: f64,
}

fn compare_row(policy: &str, sample: &str, r: &ComparisonRecord) -> CompareRow {
    CompareRow {
        policy: policy.into(),
        sample: sample.into(),
        xi: r.xi,
        t: r.t,
        re_u_direct: r.u_direct.re,
        im_u_direct: r.u_direct.im,
        re_u_asym: r.u_asym.re,
        im_u_asym: r.u_asym.im,
        abs_err: r.abs_err,
        normalized: r.normalized,
    }
}

/// Grid records followed by the dense series along the fit ray.
pub fn write_compare(path: &Path, grid: &[(String, ComparisonRecord)], dense: &[(String, ComparisonRecord)]) -> Result<()> {
    write_rows(
        path,
        grid.iter()
            .map(|(p, r)| compare_row(p, "grid", r))
            .chain(dense.iter().map(|(p, r)| compare_row(p, "dense", r))),
    )
}

pub fn read_compare(path: &Path) -> Result<Vec<(String, String, ComparisonRecord)>> {
    let rows: Vec<CompareRow> = read_rows(path)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let rec = ComparisonRecord {
                xi: r.xi,
                t: r.t,
                u_direct: C64::new(r.re_u_direct, r.im_u_direct),
                u_asym: C64::new(r.re_u_asym, r.im_u_asym),
                abs_err: r.abs_err,
                normalized: r.normalized,
            };
            (r.policy, r.sample, rec)
        })
        .collect())
}

/// Writes every artifact of a pipeline run into `dir`.
pub fn write_all(dir: &Path, cfg: &ExperimentConfig, out: &PipelineOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest = Manifest::new(cfg, out.traces.max_mass_drift, out.traces.compatibility_defect);
    write_json(&dir.join(MANIFEST), &manifest)?;
    write_traces(&dir.join(TRACES), &out.traces.traces)?;
    write_snapshot(&dir.join(CLOSING), out.traces.t_s, &out.traces.closing)?;
    write_spectral(&dir.join(SPECTRAL), &out.tables)?;
    write_scattering(&dir.join(SCATTERING), &out.scattering)?;
    write_asym(&dir.join(ASYM), &cfg.policy.label(), &out.asymptotics)?;
    if let Some(c) = &out.comparison {
        write_compare(&dir.join(COMPARE), &c.records, &c.dense_records)?;
    }
    write_json(&dir.join(SUMMARY), &out.summary)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    read_json(path)
}
