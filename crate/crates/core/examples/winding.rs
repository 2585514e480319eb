//! Argument-principle certificates that `a` and `d` have no zeros.

use hirota_halfline::harness::{initial_samples, spectral_input, trace_stage, zero_certificates, ExperimentConfig, ZeroCheckConfig};
use hirota_halfline::scattering::WIND_GUARD;

fn main() -> hirota_halfline::Result<()> {
    let cfg = ExperimentConfig::default();
    let run = &cfg.trace_run;
    let traces = trace_stage(cfg.equation, &cfg.datum, &run, run.dt, 1e-10)?;
    let closure = traces.closure(run.closure_refine);
    let u0 = initial_samples(&cfg.datum, &cfg.spectral);
    let input = spectral_input(cfg.equation, &u0, &traces.traces, &closure);
    let w = zero_certificates(&input, &ZeroCheckConfig { radius: 6.0, density: 2 }, WIND_GUARD)?;
    println!("a on the upper half disk:        {} / {} ({} samples)", w.a.coarse, w.a.fine, w.a.samples);
    println!("d on the middle region boundary: {} / {} ({} samples)", w.d.coarse, w.d.fine, w.d.samples);
    println!("zero-free: {}", w.a.zero_free() && w.d.zero_free());
    Ok(())
}
