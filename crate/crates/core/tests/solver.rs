use hirota_halfline::geometry::{phi_prime, stationary_points, RaySpec};
use hirota_halfline::pde::{simulate, Datum, Grid, RunPlan, Sponge, StepGuards};
use hirota_halfline::{Equation, C64};
use proptest::prelude::*;

fn quiet() -> StepGuards {
    StepGuards { mass_tol: None, decay_tol: None, edge_fraction: 0.01 }
}

fn windowed(dt: f64, t_max: f64, sponge: Option<Sponge>) -> RunPlan {
    RunPlan { dt, t_max, snap_dt: 1.0, window: Some((0.0, 30.0)), traces_until: None, full_at: vec![], sponge }
}

// The sponge only removes radiation that would re-enter the window after
// wrapping around the box, so doubling the box must not change the window.
#[test]
fn sponge_matches_a_doubled_domain_inside_the_window() {
    let eq = Equation::default();
    let datum = Datum::gaussian(0.3);
    let sponge = Some(Sponge { strength: 2.0, width: 150.0 });
    let t_max = 30.0;
    let small = simulate(eq, Grid::new(2048, 409.6).unwrap(), &datum, quiet(), &windowed(0.005, t_max, sponge)).unwrap();
    let large = simulate(eq, Grid::new(4096, 819.2).unwrap(), &datum, quiet(), &windowed(0.005, t_max, sponge)).unwrap();
    let mut worst: f64 = 0.0;
    for t in [10.0, 20.0, 30.0] {
        for x in [0.0, 2.5, 7.0, 15.0, 29.0] {
            worst = worst.max((small.evaluate(x, t).unwrap() - large.evaluate(x, t).unwrap()).norm());
        }
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn unabsorbed_radiation_wraps_into_a_short_box() {
    let eq = Equation::default();
    let datum = Datum::gaussian(0.3);
    let t_max = 30.0;
    let short = simulate(eq, Grid::new(512, 102.4).unwrap(), &datum, quiet(), &windowed(0.005, t_max, None)).unwrap();
    let reference = simulate(
        eq,
        Grid::new(4096, 819.2).unwrap(),
        &datum,
        quiet(),
        &windowed(0.005, t_max, Some(Sponge { strength: 2.0, width: 150.0 })),
    )
    .unwrap();
    let d = (short.evaluate(15.0, 30.0).unwrap() - reference.evaluate(15.0, 30.0).unwrap()).norm();
    assert!(d > 1e-5, "{d:e}");
}

#[test]
fn comparison_grid_spacing_is_resolved() {
    // dx = 0.2 as in the comparison run, against dx = 0.1
    let eq = Equation::default();
    let datum = Datum::gaussian(0.3);
    let plan = windowed(0.005, 5.0, None);
    let coarse = simulate(eq, Grid::new(1024, 204.8).unwrap(), &datum, quiet(), &plan).unwrap();
    let fine = simulate(eq, Grid::new(2048, 204.8).unwrap(), &datum, quiet(), &plan).unwrap();
    let c = coarse.snapshots.last().unwrap();
    let f = fine.snapshots.last().unwrap();
    let worst = (0..c.len()).map(|j| (c.values[j] - f.at(c.x(j))).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-7, "{worst:e}");
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn stationary_points_match_bisection(alpha in 0.3f64..2.0, beta in 0.3f64..2.0, s in 0.01f64..0.99) {
        let eq = Equation { alpha, beta };
        let xi = s * alpha * alpha / (3.0 * beta);
        let ray = RaySpec::uncapped(xi, eq).unwrap();
        let p = stationary_points(&ray);
        // Φ′/2i is real on ℝ and has its vertex at −α/(6β)
        let g = |k: f64| (phi_prime(C64::new(k, 0.0), &ray) / C64::new(0.0, 2.0)).re;
        let vertex = -alpha / (6.0 * beta);
        let far = 10.0 * (1.0 + alpha / beta);
        let k1 = bisect(g, -far, vertex);
        let k2 = bisect(g, vertex, far);
        prop_assert!((p.k1 - k1).abs() < 1e-10 && (p.k2 - k2).abs() < 1e-10, "{:?} vs {} {}", p, k1, k2);
    }
}
