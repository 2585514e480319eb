//! Spectral functions of both Lax problems and the derived reflection data.

use hirota_halfline::harness::{initial_samples, spectral_input, trace_stage, ExperimentConfig, ScatteringStage, SpectralConfig};

fn main() -> hirota_halfline::Result<()> {
    let cfg = ExperimentConfig::default();
    let run = &cfg.trace_run;
    let traces = trace_stage(cfg.equation, &cfg.datum, &run, run.dt, 1e-10)?;
    let closure = traces.closure(run.closure_refine);
    let spectral = SpectralConfig { k_min: -2.0, k_max: 2.0, n_k: 9, n_inner: 9, ..cfg.spectral };
    let u0 = initial_samples(&cfg.datum, &spectral);
    let input = spectral_input(cfg.equation, &u0, &traces.traces, &closure);
    let stage = ScatteringStage::from_tables(hirota_halfline::harness::spectral_stage(&input, &spectral)?)?;

    let s = &stage.outer;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "k", "|a|", "|b|", "|A|", "|B|", "|r|", "|Ba-Ab|");
    for j in 0..s.len() {
        println!(
            "{:6.2} {:10.6} {:10.3e} {:10.6} {:10.3e} {:10.3e} {:10.1e}",
            s.k[j],
            s.a[j].norm(),
            s.b[j].norm(),
            s.big_a[j].norm(),
            s.big_b[j].norm(),
            s.r[j].norm(),
            s.gr_residual[j]
        );
    }
    let (ux, ut) = stage.unitarity_defect();
    println!("unitarity defects {ux:.1e} {ut:.1e}, route defect {:.1e}", stage.route_defect());
    println!("global relation residual {:.2e}", stage.global_relation_residual(&cfg.equation));
    Ok(())
}
