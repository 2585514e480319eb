//! A reduced end-to-end experiment written to a directory.
//!
//! `cargo run --release --example pipeline -- out/`

use hirota_halfline::harness::{run_pipeline, ExperimentConfig, SpectralConfig};
use hirota_halfline::io;

fn main() -> hirota_halfline::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "pipeline-out".into());
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        spectral: SpectralConfig { n_k: 121, n_inner: 65, ..defaults.spectral },
        ladder: None,
        zero_check: None,
        comparison: None,
        ..defaults
    };
    let result = run_pipeline(&cfg)?;
    io::write_all(std::path::Path::new(&out), &cfg, &result)?;
    for c in &result.summary.checks {
        println!("{:<5} {:<22} {:.3e}", if c.passed { "ok" } else { "FAIL" }, c.name, c.value);
    }
    println!("{} (written to {out})", result.summary.status);
    Ok(())
}
