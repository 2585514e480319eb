//! Direct simulation of the Gaussian datum and its boundary traces at `x = 0`.

use hirota_halfline::pde::{simulate, Datum, Grid, RunPlan, StepGuards};
use hirota_halfline::Equation;

fn main() -> hirota_halfline::Result<()> {
    let grid = Grid::new(16384, 3276.8)?;
    let plan = RunPlan {
        dt: 0.002,
        t_max: 5.0,
        snap_dt: 0.5,
        window: Some((-5.0, 5.0)),
        traces_until: Some(5.0),
        full_at: vec![],
        sponge: None,
    };
    let guards = StepGuards { decay_tol: None, ..StepGuards::default() };
    let datum = Datum::gaussian(0.3);
    let run = simulate(Equation::default(), grid, &datum, guards, &plan)?;
    let traces = run.traces.as_ref().unwrap();

    println!("{:>5} {:>24} {:>24} {:>10}", "t", "g0", "g1", "|u(1,t)|");
    for j in (0..traces.len()).step_by(200) {
        let t = traces.t(j);
        let (g0, g1) = (traces.g0[j], traces.g1[j]);
        println!("{t:5.2} {:+.4e}{:+.4e}i {:+.4e}{:+.4e}i {:10.3e}", g0.re, g0.im, g1.re, g1.im, run.evaluate(1.0, t)?.norm());
    }
    println!("max relative mass drift {:.2e}", run.max_mass_drift);
    println!("compatibility defect at t = 0: {:.2e}", traces.compatibility_defect(&datum));
    Ok(())
}
