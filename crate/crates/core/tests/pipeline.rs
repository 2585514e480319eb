use hirota_halfline::harness::{run_pipeline, ExperimentConfig, SpectralConfig};
use hirota_halfline::pde::Datum;

fn small(datum: Datum) -> ExperimentConfig {
    ExperimentConfig {
        datum,
        spectral: SpectralConfig { n_k: 41, n_inner: 17, ..ExperimentConfig::default().spectral },
        rays: vec![0.1, 0.3],
        ladder: None,
        zero_check: None,
        comparison: None,
        ..ExperimentConfig::default()
    }
}

#[test]
fn vanishing_datum_gives_trivial_data_and_no_wave() {
    let out = run_pipeline(&small(Datum::gaussian(0.0))).unwrap();
    assert!(out.summary.passed(), "{:?}", out.summary.failed);
    for set in [&out.scattering.outer, &out.scattering.inner] {
        for j in 0..set.len() {
            assert!((set.a[j] - 1.0).norm() < 1e-10 && (set.big_a[j] - 1.0).norm() < 1e-10);
            assert!(set.b[j].norm() < 1e-10 && set.big_b[j].norm() < 1e-10 && set.r[j].norm() < 1e-10);
        }
    }
    assert!(out.asymptotics.iter().all(|v| v.u_as.norm() < 1e-10));
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = small(Datum::gaussian(0.3));
    let first = run_pipeline(&cfg).unwrap();
    let second = run_pipeline(&cfg).unwrap();
    assert_eq!(first.scattering, second.scattering);
    assert_eq!(first.summary, second.summary);
    let u = |o: &hirota_halfline::harness::PipelineOutput| o.asymptotics.iter().map(|v| v.u_as).collect::<Vec<_>>();
    assert_eq!(u(&first), u(&second));
}

#[test]
fn invalid_configurations_are_rejected_before_running() {
    let past_caustic = ExperimentConfig { rays: vec![0.34], ..small(Datum::gaussian(0.3)) };
    assert!(run_pipeline(&past_caustic).is_err());
    let early = ExperimentConfig { times: vec![1.0], ..small(Datum::gaussian(0.3)) };
    assert!(run_pipeline(&early).is_err());
    let mut narrow = ExperimentConfig::default();
    narrow.comparison.as_mut().unwrap().window = (0.0, 20.0);
    assert!(narrow.validate().is_err());
}
