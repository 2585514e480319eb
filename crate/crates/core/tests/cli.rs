use std::path::Path;
use std::process::{Command, Output};

use hirota_halfline::harness::{ExperimentConfig, SpectralConfig, Summary};
use hirota_halfline::io;

fn hirota(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hirota")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        spectral: SpectralConfig { n_k: 61, n_inner: 33, ..ExperimentConfig::default().spectral },
        rays: vec![0.2],
        times: vec![25.0, 50.0],
        ladder: None,
        zero_check: None,
        comparison: None,
        ..ExperimentConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    io::write_json(&path, cfg).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn geometry_prints_exact_stationary_points() {
    let o = hirota(&["geometry", "--xi", "0.25"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("k1 -0.250000000000"), "{text}");
    assert!(text.contains("k2 -0.083333333333"), "{text}");
    assert!(text.contains("interval (0, 0.333333333333)"), "{text}");
}

#[test]
fn rays_beyond_the_caustic_are_rejected() {
    let o = hirota(&["geometry", "--xi", "0.4"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn default_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    assert!(hirota(&["config", "--out", path.to_str().unwrap()]).status.success());
    let cfg: ExperimentConfig = io::read_json(&path).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
}

#[test]
fn staged_commands_reproduce_each_other() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, &small_config());
    let sim = d.join("sim");
    let o = hirota(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let manifest = sim.join(io::MANIFEST);
    let m: io::Manifest = io::read_json(&manifest).unwrap();
    assert_eq!(m.n_x, 16384);
    assert!(m.max_mass_drift < 1e-10);

    let spectral = d.join(io::SPECTRAL);
    let o = hirota(&["spectral", "--manifest", manifest.to_str().unwrap(), "--out", spectral.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));

    let scattering = d.join(io::SCATTERING);
    let o = hirota(&[
        "scattering",
        "--in",
        spectral.to_str().unwrap(),
        "--out",
        scattering.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("global_relation"));

    let asym = d.join(io::ASYM);
    let o = hirota(&[
        "asymptote",
        "--scattering",
        scattering.to_str().unwrap(),
        "--xi",
        "0.2",
        "--t",
        "25,50",
        "--config",
        &cfg,
        "--out",
        asym.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(&asym).unwrap();
    assert_eq!(rows.lines().count(), 3);

    let o = hirota(&["delta", "--xi", "0.2", "--k", "-0.2,0.05", "--scattering", scattering.to_str().unwrap(), "--config", &cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("delta("));

    // the one-shot pipeline writes the same asymptotic values
    let all = d.join("all");
    let o = hirota(&["all", "--config", &cfg, "--out", all.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("PASSED"));
    let staged: Vec<String> = rows.lines().skip(1).map(str::to_owned).collect();
    let one_shot = std::fs::read_to_string(all.join(io::ASYM)).unwrap();
    let one_shot: Vec<String> = one_shot.lines().skip(1).map(str::to_owned).collect();
    assert_eq!(staged, one_shot);
    let summary: Summary = io::read_json(&all.join(io::SUMMARY)).unwrap();
    assert!(summary.passed());
    assert!(!all.join(io::COMPARE).exists());
}

#[test]
fn corrupted_traces_fail_with_a_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { corrupt_g1: Some(1.1), ..small_config() };
    let cfg = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = hirota(&["all", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL global_relation") && text.trim_end().ends_with("FAILED"), "{text}");
    let summary: Summary = io::read_json(&out.join(io::SUMMARY)).unwrap();
    assert_eq!(summary.status, "FAILED");
}
