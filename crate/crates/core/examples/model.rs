//! Gamma-function coefficients of the parabolic-cylinder model problems.

use std::f64::consts::PI;

use hirota_halfline::delta::nu;
use hirota_halfline::model::{beta_x, beta_y, jump_jx, jump_jy, log_gamma, mirrored_ray, ray_angle, ArgBranch, BetaYSign};
use hirota_halfline::{Mat2, C64};

fn main() -> hirota_halfline::Result<()> {
    for v in [0.01, 0.1, 1.0] {
        let g2 = (2.0 * log_gamma(C64::new(0.0, v))?.re).exp();
        println!("nu {v:<5} |Gamma(i nu)|^2 {g2:.15e}  exact {:.15e}", PI / (v * (PI * v).sinh()));
    }
    let q = C64::new(0.3, -0.4);
    let (bx, by) = (beta_x(q)?, beta_y(q.conj(), BetaYSign::Printed)?);
    println!("q {q}: nu {:.12}  beta^X {bx:.12}  |beta^X|^2 {:.12}", nu(q), bx.norm_sqr());
    println!("beta^Y(conj q) {by:.12}  (printed sign)");

    // J^Y(p, z) = σ₃ conj(J^X(p̄, −z̄)) σ₃ on each ray, on the principal branch only
    let s3 = Mat2::sigma3();
    for branch in [ArgBranch::Principal, ArgBranch::ZeroToTwoPi] {
        let mut worst: f64 = 0.0;
        for ray in 1..=4u8 {
            let z = C64::from_polar(1.3, ray_angle(ray));
            let jx = jump_jx(q.conj(), -z.conj(), mirrored_ray(ray), branch)?;
            let jy = jump_jy(q, z, ray, branch)?;
            worst = worst.max(jy.max_abs_diff(&(s3 * jx.conj() * s3)));
        }
        println!("{branch:?} branch: mirror defect {worst:.1e}");
    }
    Ok(())
}
