//! Leading-order asymptotics on a ray under every branch policy.

use hirota_halfline::asymptotics::{u_as, BranchPolicy, RayData};
use hirota_halfline::delta::{ClosedForm, DeltaData, QuadratureOptions};
use hirota_halfline::geometry::{stationary_points, RaySpec};
use hirota_halfline::{Equation, C64};

fn main() -> hirota_halfline::Result<()> {
    let profile = ClosedForm {
        r: |k: f64| C64::new(0.5 * (-4.0 * (k + 0.3) * (k + 0.3)).exp(), 0.1 * k),
        dr: |k: f64| C64::new(-4.0 * (k + 0.3) * (-4.0 * (k + 0.3) * (k + 0.3)).exp(), 0.1),
    };
    let ray = RaySpec::uncapped(0.2, Equation::default())?;
    let data = RayData::new(&ray, DeltaData::new(stationary_points(&ray), &profile, &QuadratureOptions::default())?);
    println!("xi {}  amplitudes {:.6} {:.6}", data.xi, data.amplitude_a(), data.amplitude_b());
    for policy in BranchPolicy::all() {
        println!("{}", policy.label());
        for t in [25.0, 50.0, 100.0, 200.0] {
            let v = u_as(&data, t, &policy)?;
            let u = v.u_leading();
            println!("  t {t:>5}  u ~ {:+.6e}{:+.6e}i  phases {:+.4} {:+.4}  routes {:.1e}", u.re, u.im, v.phi_a, v.phi_b, v.consistency);
        }
    }
    Ok(())
}
