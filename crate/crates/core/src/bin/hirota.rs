use clap::{Args, Parser, Subcommand};
use hirota_halfline::asymptotics::{BranchPolicy, LogFactor};
use hirota_halfline::delta::{delta, QuadratureOptions};
use hirota_halfline::geometry::{caustic, stationary_points, RaySpec};
use hirota_halfline::harness::{self, Check, ExperimentConfig, Summary};
use hirota_halfline::io;
use hirota_halfline::model::BetaYSign;
use hirota_halfline::{Result, C64};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hirota", version, about = "Half-line Hirota spectral data and long-time asymptotics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct PolicyArgs {
    /// Squared length in the logarithm: printed (k1^2) or derived ((k2-k1)^2)
    #[arg(long, default_value = "printed")]
    log_factor: String,
    /// Sign of beta^Y relative to conj(beta^X): printed or derived
    #[arg(long, default_value = "printed")]
    beta_y: String,
}

impl PolicyArgs {
    fn policy(&self) -> std::result::Result<BranchPolicy, String> {
        let log_factor = match self.log_factor.as_str() {
            "printed" => LogFactor::Printed,
            "derived" => LogFactor::Derived,
            other => return Err(format!("unknown log factor '{other}'")),
        };
        let beta_y = match self.beta_y.as_str() {
            "printed" => BetaYSign::Printed,
            "derived" => BetaYSign::Derived,
            other => return Err(format!("unknown beta^Y sign '{other}'")),
        };
        Ok(BranchPolicy { log_factor, beta_y })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the default experiment configuration
    Config {
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace run: writes manifest.json, traces.csv and closing.csv
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// a, b, A, B on the outer grid and on [k0, 0]
    Spectral {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        kmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        kmax: Option<f64>,
        #[arg(long)]
        nk: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// c, d, r1, h, r and the global relation; optionally the winding certificates
    Scattering {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        check_zeros: bool,
        /// Needed by --check-zeros
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Leading-order coefficient on a ray
    Asymptote {
        #[arg(long)]
        scattering: PathBuf,
        #[arg(long)]
        xi: f64,
        #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
        t: Vec<f64>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Direct run along the rays of the configuration and decay fits
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scattering: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Every stage; exit code 0 iff all checks pass
    All {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stationary points and interval bounds of a ray
    Geometry {
        #[arg(long)]
        xi: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// delta(k) on a ray
    Delta {
        #[arg(long)]
        xi: f64,
        /// re,im
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        k: Vec<f64>,
        #[arg(long)]
        scattering: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => io::read_json(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn report(checks: &[Check]) -> bool {
    for c in checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<24} value {:>11.4e}  limit {:>10.3e}  {}", c.name, c.value, c.threshold, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn finish(ok: bool) -> ExitCode {
    println!("{}", if ok { "PASSED" } else { "FAILED" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn load_trace_artifacts(manifest: &Path) -> Result<(io::Manifest, hirota_halfline::pde::BoundaryTraces, hirota_halfline::lax::TailClosure)> {
    let m: io::Manifest = io::read_json(manifest)?;
    let traces = io::read_traces(&io::beside(manifest, &m.traces))?;
    let (t, closing) = io::read_snapshot(&io::beside(manifest, &m.closing))?;
    let closure = hirota_halfline::lax::TailClosure::from_snapshot(&closing, t, m.config.trace_run.closure_refine);
    Ok((m, traces, closure))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Config { out } => {
            io::write_json(&out, &ExperimentConfig::default())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate { config, out } => {
            let cfg = load_config(&config)?;
            std::fs::create_dir_all(&out)?;
            let stage = harness::trace_stage(cfg.equation, &cfg.datum, &cfg.trace_run, cfg.trace_run.dt, cfg.tolerances.mass)?;
            io::write_traces(&out.join(io::TRACES), &stage.traces)?;
            io::write_snapshot(&out.join(io::CLOSING), stage.t_s, &stage.closing)?;
            io::write_json(&out.join(io::MANIFEST), &io::Manifest::new(&cfg, stage.max_mass_drift, stage.compatibility_defect))?;
            let checks = [
                Check::at_most("trace_mass_drift", stage.max_mass_drift, cfg.tolerances.mass),
                Check::at_most("trace_compatibility", stage.compatibility_defect, cfg.tolerances.trace),
            ];
            Ok(finish(report(&checks)))
        }
        Cmd::Spectral { manifest, kmin, kmax, nk, out } => {
            let (m, traces, closure) = load_trace_artifacts(&manifest)?;
            let mut spectral = m.config.spectral.clone();
            spectral.k_min = kmin.unwrap_or(spectral.k_min);
            spectral.k_max = kmax.unwrap_or(spectral.k_max);
            spectral.n_k = nk.unwrap_or(spectral.n_k);
            let u0 = harness::initial_samples(&m.config.datum, &spectral);
            let input = harness::spectral_input(m.config.equation, &u0, &traces, &closure);
            let tables = harness::spectral_stage(&input, &spectral)?;
            io::write_spectral(&out, &tables)?;
            let (ux, ut) = tables.outer.max_unitarity_defect();
            let tol = m.config.tolerances.unitarity;
            Ok(finish(report(&[Check::at_most("unitarity_x", ux, tol), Check::at_most("unitarity_t", ut, tol)])))
        }
        Cmd::Scattering { input, out, check_zeros, manifest } => {
            let stage = harness::ScatteringStage::from_tables(io::read_spectral(&input)?)?;
            io::write_scattering(&out, &stage)?;
            let cfg = match &manifest {
                Some(p) => io::read_json::<io::Manifest>(p)?.config,
                None => ExperimentConfig::default(),
            };
            let tol = &cfg.tolerances;
            let mut checks = vec![
                Check::at_most("reflection_routes", stage.route_defect(), tol.route),
                Check::at_most("global_relation", stage.global_relation_residual(&cfg.equation), tol.global_relation),
            ];
            if check_zeros {
                let Some(p) = &manifest else {
                    return Err(hirota_halfline::Error::Config("--check-zeros needs --manifest".into()));
                };
                let (m, traces, closure) = load_trace_artifacts(p)?;
                let u0 = harness::initial_samples(&m.config.datum, &m.config.spectral);
                let input = harness::spectral_input(m.config.equation, &u0, &traces, &closure);
                let z = m.config.zero_check.unwrap_or(harness::ZeroCheckConfig { radius: 6.0, density: 4 });
                let w = harness::zero_certificates(&input, &z, tol.wind_guard)?;
                checks.push(Check::at_most("winding_a", (w.a.coarse.abs() + w.a.fine.abs()) as f64, 0.0));
                checks.push(Check::at_most("winding_d", (w.d.coarse.abs() + w.d.fine.abs()) as f64, 0.0));
            }
            Ok(finish(report(&checks)))
        }
        Cmd::Asymptote { scattering, xi, t, policy, config, out } => {
            let policy = policy.policy().map_err(hirota_halfline::Error::Config)?;
            let cfg = load_config(&config)?;
            let stage = io::read_scattering(&scattering)?;
            let qopts = QuadratureOptions { tol: cfg.tolerances.chi, ..QuadratureOptions::default() };
            let ray = stage.ray(cfg.equation, xi, &qopts)?;
            let values = harness::asymptotic_table(&[ray], &t, &policy).into_iter().collect::<Result<Vec<_>>>()?;
            io::write_asym(&out, &policy.label(), &values)?;
            for v in &values {
                println!("xi {} t {:>6} u_as {:+.6e}{:+.6e}i  phi_a {:+.6} phi_b {:+.6}  routes {:.1e}", v.xi, v.t, v.u_as.re, v.u_as.im, v.phi_a, v.phi_b, v.consistency);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Compare { config, scattering, out } => {
            let cfg = load_config(&config)?;
            let Some(c) = &cfg.comparison else {
                return Err(hirota_halfline::Error::Config("configuration has no comparison section".into()));
            };
            std::fs::create_dir_all(&out)?;
            let stage = io::read_scattering(&scattering)?;
            let qopts = QuadratureOptions { tol: cfg.tolerances.chi, ..QuadratureOptions::default() };
            let rays = cfg.rays.iter().map(|&xi| stage.ray(cfg.equation, xi, &qopts)).collect::<Result<Vec<_>>>()?;
            let cmp = harness::comparison_stage(&cfg, c, &stage, &rays)?;
            io::write_compare(&out.join(io::COMPARE), &cmp.records, &cmp.dense_records)?;
            let mut summary = Summary::from_checks(cmp.checks.clone());
            summary.leading_fit = cmp.leading_fit;
            summary.policies = cmp.policies.clone();
            io::write_json(&out.join(io::SUMMARY), &summary)?;
            print_policies(&summary);
            Ok(finish(report(&summary.checks)))
        }
        Cmd::All { config, out } => {
            let cfg = load_config(&config)?;
            let result = harness::run_pipeline(&cfg)?;
            io::write_all(&out, &cfg, &result)?;
            print_policies(&result.summary);
            Ok(finish(report(&result.summary.checks)))
        }
        Cmd::Geometry { xi, alpha, beta } => {
            let eq = hirota_halfline::Equation { alpha, beta };
            println!("interval (0, {:.12})", caustic(&eq));
            let ray = RaySpec::uncapped(xi, eq)?;
            let p = stationary_points(&ray);
            println!("k0 {:.12}", eq.k0());
            println!("k1 {:.12}  |phi'(k1)| {:.1e}", p.k1, p.residual1);
            println!("k2 {:.12}  |phi'(k2)| {:.1e}", p.k2, p.residual2);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Delta { xi, k, scattering, config } => {
            let [re, im] = k[..] else {
                return Err(hirota_halfline::Error::Config("--k takes re,im".into()));
            };
            let cfg = load_config(&config)?;
            let stage = io::read_scattering(&scattering)?;
            let qopts = QuadratureOptions { tol: cfg.tolerances.chi, ..QuadratureOptions::default() };
            let ray = stage.ray(cfg.equation, xi, &qopts)?;
            let spline = stage.inner.reflection_spline(cfg.equation.k0(), 0.0)?;
            let k = C64::new(re, im);
            let d = delta(k, &ray.delta.pair, &spline, &qopts)?;
            println!("delta({k}) = {:+.12e}{:+.12e}i  |delta| = {:.12}", d.re, d.im, d.norm());
            println!("nu1 {:.12} nu2 {:.12}", ray.delta.nu1, ray.delta.nu2);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_policies(summary: &Summary) {
    if let Some(f) = &summary.leading_fit {
        println!("leading-order exponent {:.4}", f.exponent);
    }
    for p in &summary.policies {
        let slope = |f: &Option<harness::DecayFit>| f.map(|f| format!("{:+.3}", f.slope)).unwrap_or_else(|| "-".into());
        println!(
            "{:<30} residual slope {}  envelope slope {}  max err*t/ln t {:.4}",
            p.policy,
            slope(&p.residual),
            slope(&p.envelope),
            p.max_normalized
        );
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
