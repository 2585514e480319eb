//! The scalar function `δ` for a closed-form reflection coefficient.

use hirota_halfline::delta::{delta, delta_direct, delta_factorized, jump_ratio, ClosedForm, DeltaData, Endpoint, QuadratureOptions, ReflectionProfile};
use hirota_halfline::geometry::{stationary_points, RaySpec};
use hirota_halfline::{Equation, C64};

fn main() -> hirota_halfline::Result<()> {
    let profile = ClosedForm {
        r: |k: f64| C64::new(0.5 * (-4.0 * (k + 0.3) * (k + 0.3)).exp(), 0.1 * k),
        dr: |k: f64| C64::new(-4.0 * (k + 0.3) * (-4.0 * (k + 0.3) * (k + 0.3)).exp(), 0.1),
    };
    let pair = stationary_points(&RaySpec::uncapped(0.2, Equation::default())?);
    let opts = QuadratureOptions::default();
    let data = DeltaData::new(pair, &profile, &opts)?;
    println!("k1 {:.6} k2 {:.6}  nu1 {:.6} nu2 {:.6}", pair.k1, pair.k2, data.nu1, data.nu2);
    println!("chi1(k1) {:.6e}  chi2(k2) {:.6e}", data.chi1_at_k1, data.chi2_at_k2);

    for k in [C64::new(-0.3, 0.2), C64::new(0.5, -0.1), C64::new(0.0, 3.0)] {
        let d = delta(k, &pair, &profile, &opts)?;
        println!("delta({k:.2}) = {d:.8}  |delta| {:.8}", d.norm());
    }

    let mid = 0.5 * (pair.k1 + pair.k2);
    let ratio = jump_ratio(mid, 1e-4, &pair, &profile, &opts)?;
    println!("jump at {mid:.4}: {ratio:.10} vs {:.10}", 1.0 / (1.0 + profile.r(mid).norm_sqr()));

    let near = C64::new(pair.k2 + 0.02, 0.03);
    let f = delta_factorized(Endpoint::K2, near, &pair, &profile, &opts)?;
    println!("factorized vs direct near k2: {:.1e}", (f - delta_direct(near, &pair, &profile, &opts)?).norm());
    Ok(())
}
