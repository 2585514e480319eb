//! Coefficients and jump matrices of the parabolic-cylinder model problems.

use crate::delta::nu;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, I, ONE, ZERO};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn lanczos(z: C64) -> C64 {
    let tmp = z + 5.242_187_5;
    let mut ser = C64::new(0.999_999_999_999_997_092, 0.0);
    for (j, c) in LANCZOS.iter().enumerate() {
        ser += c / (z + (j + 1) as f64);
    }
    (z + 0.5) * tmp.ln() - tmp + (2.506_628_274_631_000_5f64).ln() + ser.ln() - z.ln()
}

/// Principal branch of `log Γ(z)`, continuous off the negative real axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::PoleInput(z));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    // log Γ(z) = log Γ(z + n) − Σ log(z + j), summed so the branch stays principal
    let n = (0.5 - z.re).ceil() as usize;
    let mut acc = lanczos(z + n as f64);
    for j in 0..n {
        acc -= (z + j as f64).ln();
    }
    Ok(acc)
}

/// `arg Γ(iν)` on the principal branch, in `(−π, π]`.
pub fn arg_gamma_i(nu: f64) -> Result<f64> {
    let im = log_gamma(C64::new(0.0, nu))?.im;
    Ok(C64::from_polar(1.0, im).arg())
}

/// `β^X(q) = √ν e^{i(π/4 − arg q − arg Γ(iν))}`, with `β^X(0) = 0`.
pub fn beta_x(q: C64) -> Result<C64> {
    if q == ZERO {
        return Ok(ZERO);
    }
    let v = nu(q);
    Ok(C64::from_polar(v.sqrt(), PI / 4.0 - q.arg() - arg_gamma_i(v)?))
}

/// Sign convention relating `β^Y(p)` to `conj(β^X(p̄))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaYSign {
    /// `β^Y(p) = √ν e^{−i(π/4 + arg p + arg Γ(−iν))} = conj(β^X(p̄))`.
    Printed,
    /// `β^Y(p) = −conj(β^X(p̄))`, from the `1/z` term of `σ₃ conj(M^X(p̄, −z̄)) σ₃`.
    Derived,
}

pub fn beta_y(p: C64, sign: BetaYSign) -> Result<C64> {
    if p == ZERO {
        return Ok(ZERO);
    }
    let v = nu(p);
    // arg Γ(−iν) = −arg Γ(iν)
    let printed = C64::from_polar(v.sqrt(), -(PI / 4.0 + p.arg() - arg_gamma_i(v)?));
    Ok(match sign {
        BetaYSign::Printed => printed,
        BetaYSign::Derived => -printed,
    })
}

/// `β` together with the reflection value it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficient {
    pub q: C64,
    pub nu_q: f64,
    pub beta: C64,
}

impl ModelCoefficient {
    pub fn x(q: C64) -> Result<Self> {
        Ok(Self { q, nu_q: nu(q), beta: beta_x(q)? })
    }

    pub fn y(p: C64, sign: BetaYSign) -> Result<Self> {
        Ok(Self { q: p, nu_q: nu(p), beta: beta_y(p, sign)? })
    }
}

/// Branch of `arg z` used for `z^{±2iν}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ArgBranch {
    /// `arg z ∈ (−π, π]`.
    #[default]
    Principal,
    /// `arg z ∈ [0, 2π)`.
    ZeroToTwoPi,
}

impl ArgBranch {
    pub fn arg(self, z: C64) -> f64 {
        let a = z.arg();
        match self {
            ArgBranch::Principal => a,
            ArgBranch::ZeroToTwoPi if a < 0.0 => a + 2.0 * PI,
            ArgBranch::ZeroToTwoPi => a,
        }
    }

    /// `z^e` with `log z = ln|z| + i arg z` on this branch.
    pub fn pow(self, z: C64, e: C64) -> C64 {
        (e * C64::new(z.norm().ln(), self.arg(z))).exp()
    }
}

/// Angle of the ray `X_i`.
pub fn ray_angle(ray: u8) -> f64 {
    match ray {
        1 => PI / 4.0,
        2 => 3.0 * PI / 4.0,
        3 => -3.0 * PI / 4.0,
        _ => -PI / 4.0,
    }
}

fn check_ray(z: C64, ray: u8) -> Result<()> {
    let ok = (1..=4).contains(&ray) && z != ZERO && {
        let d = (z.arg() - ray_angle(ray)).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) <= 1e-9
    };
    if ok {
        Ok(())
    } else {
        Err(Error::RayMismatch { z, ray })
    }
}

/// The `z`-independent triangular factor of `J^X` on `X_i`.
pub fn jump_constant_x(q: C64, ray: u8) -> Mat2 {
    let p = 1.0 + q.norm_sqr();
    match ray {
        1 => Mat2::new(ONE, ZERO, -q, ONE),
        2 => Mat2::new(ONE, q.conj() / p, ZERO, ONE),
        3 => Mat2::new(ONE, ZERO, q / p, ONE),
        _ => Mat2::new(ONE, -q.conj(), ZERO, ONE),
    }
}

/// `d(z) = e^{−iz²/4} z^{−iν}`, so that `J^X = d^{σ₃} J₀ d^{−σ₃}`.
pub fn conjugating_factor(q: C64, z: C64, branch: ArgBranch) -> C64 {
    (-I * z * z / 4.0).exp() * branch.pow(z, C64::new(0.0, -nu(q)))
}

/// `J^X(q, z)` for `z` on `X_i`.
pub fn jump_jx(q: C64, z: C64, ray: u8, branch: ArgBranch) -> Result<Mat2> {
    check_ray(z, ray)?;
    let v = nu(q);
    let p = 1.0 + q.norm_sqr();
    let e = (I * z * z / 2.0).exp() * branch.pow(z, C64::new(0.0, 2.0 * v));
    Ok(match ray {
        1 => Mat2::new(ONE, ZERO, -q * e, ONE),
        2 => Mat2::new(ONE, q.conj() / p / e, ZERO, ONE),
        3 => Mat2::new(ONE, ZERO, q / p * e, ONE),
        _ => Mat2::new(ONE, -q.conj() / e, ZERO, ONE),
    })
}

/// `J^Y(p, z)` for `z` on `X_i`, written with powers of `−z`.
pub fn jump_jy(p: C64, z: C64, ray: u8, branch: ArgBranch) -> Result<Mat2> {
    check_ray(z, ray)?;
    let v = nu(p);
    let s = 1.0 + p.norm_sqr();
    let e = (I * z * z / 2.0).exp() * branch.pow(-z, C64::new(0.0, 2.0 * v));
    Ok(match ray {
        1 => Mat2::new(ONE, -p.conj() / s * e, ZERO, ONE),
        2 => Mat2::new(ONE, ZERO, p / e, ONE),
        3 => Mat2::new(ONE, p.conj() * e, ZERO, ONE),
        _ => Mat2::new(ONE, ZERO, -p / s / e, ONE),
    })
}

/// Ray of `X` containing `−z̄` when `z` lies on `X_i`.
pub fn mirrored_ray(ray: u8) -> u8 {
    match ray {
        1 => 2,
        2 => 1,
        3 => 4,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_gamma_classical_values() {
        assert!(log_gamma(C64::new(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(C64::new(2.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma(C64::new(0.5, 0.0)).unwrap();
        assert!((half.re - 0.5 * PI.ln()).abs() < 1e-14 && half.im.abs() < 1e-15);
        assert!((log_gamma(C64::new(11.0, 0.0)).unwrap().re - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_modulus_on_imaginary_axis() {
        for v in [1e-4, 0.01, 0.1, 1.0, 3.0, 10.0] {
            let lg = log_gamma(C64::new(0.0, v)).unwrap();
            let exact = (PI / (v * (PI * v).sinh())).ln();
            assert!((2.0 * lg.re - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{v}");
        }
    }

    #[test]
    fn log_gamma_rejects_poles() {
        for z in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(C64::new(z, 0.0)), Err(Error::PoleInput(_))));
        }
    }

    #[test]
    fn arg_gamma_matches_digamma_slope_near_zero() {
        // arg Γ(iν) = −π/2 − γν + O(ν³)
        let euler = 0.577_215_664_901_532_9;
        let v = 1e-4;
        assert!((arg_gamma_i(v).unwrap() - (-PI / 2.0 - euler * v)).abs() < 1e-11);
    }

    #[test]
    fn beta_x_at_unit_reflection() {
        let v = 2f64.ln() / (2.0 * PI);
        let b = beta_x(ONE).unwrap();
        let expected = C64::from_polar(v.sqrt(), PI / 4.0 - arg_gamma_i(v).unwrap());
        assert!((b - expected).norm() < 1e-15);
        assert_eq!(beta_x(ZERO).unwrap(), ZERO);
        assert!(beta_x(C64::new(1e-9, 0.0)).unwrap().norm() < 1e-9);
    }

    #[test]
    fn jumps_vanish_with_q() {
        for ray in 1..=4u8 {
            let z = C64::from_polar(0.7, ray_angle(ray));
            let j = jump_jx(ZERO, z, ray, ArgBranch::Principal).unwrap();
            assert_eq!(j.max_abs_diff(&Mat2::identity()), 0.0);
            let q = C64::new(1e-6, -2e-6);
            let j = jump_jx(q, z, ray, ArgBranch::Principal).unwrap();
            assert!(j.max_abs_diff(&Mat2::identity()) <= 10.0 * q.norm());
        }
    }

    #[test]
    fn ray_membership_is_enforced() {
        let z = C64::from_polar(1.0, PI / 4.0);
        assert!(jump_jx(ONE, z, 2, ArgBranch::Principal).is_err());
        assert!(jump_jx(ONE, ZERO, 1, ArgBranch::Principal).is_err());
        assert!(jump_jx(ONE, z, 5, ArgBranch::Principal).is_err());
    }

    #[test]
    fn jumps_factor_through_the_conjugating_power() {
        let q = C64::new(0.5, 0.2);
        for ray in 1..=4u8 {
            for r in [1e-3, 0.5, 2.0] {
                let z = C64::from_polar(r, ray_angle(ray));
                let d = conjugating_factor(q, z, ArgBranch::Principal);
                let dd = Mat2::diag(d, 1.0 / d);
                let rebuilt = dd * jump_constant_x(q, ray) * dd.inv_unimodular();
                let j = jump_jx(q, z, ray, ArgBranch::Principal).unwrap();
                assert!(j.max_abs_diff(&rebuilt) < 1e-13);
            }
        }
    }

    #[test]
    fn cyclic_product_closes_with_the_branch_cut_jump() {
        // circling the origin through X₁, X₄, X₃ and X₂; the cut of z^{iν} on the
        // negative axis contributes (d₊/d₋)^{σ₃}
        let q = C64::new(0.5, 0.0);
        let x = C64::new(-0.8, 0.0);
        let above = conjugating_factor(q, C64::new(x.re, 0.0), ArgBranch::Principal);
        let below = conjugating_factor(q, C64::new(x.re, -0.0), ArgBranch::Principal);
        let cut = Mat2::diag(above / below, below / above);
        let p = 1.0 + q.norm_sqr();
        assert!((above / below - p).norm() < 1e-13);
        let product = jump_constant_x(q, 1) * jump_constant_x(q, 4) * jump_constant_x(q, 3) * cut * jump_constant_x(q, 2);
        assert!(product.max_abs_diff(&Mat2::identity()) < 1e-14);
    }

    #[test]
    fn y_jumps_mirror_x_jumps_on_the_principal_branch() {
        let p = C64::new(0.4, -0.3);
        let s3 = Mat2::sigma3();
        for ray in 1..=4u8 {
            for r in [0.1, 1.0, 1.7] {
                let z = C64::from_polar(r, ray_angle(ray));
                let mz = -z.conj();
                let jx = jump_jx(p.conj(), mz, mirrored_ray(ray), ArgBranch::Principal).unwrap();
                let jy = jump_jy(p, z, ray, ArgBranch::Principal).unwrap();
                assert!(jy.max_abs_diff(&(s3 * jx.conj() * s3)) < 1e-13);
            }
        }
    }

    #[test]
    fn zero_to_two_pi_branch_breaks_the_mirror_symmetry() {
        let p = C64::new(0.4, -0.3);
        let s3 = Mat2::sigma3();
        let z = C64::from_polar(1.0, ray_angle(1));
        let jx = jump_jx(p.conj(), -z.conj(), 2, ArgBranch::ZeroToTwoPi).unwrap();
        let jy = jump_jy(p, z, 1, ArgBranch::ZeroToTwoPi).unwrap();
        assert!(jy.max_abs_diff(&(s3 * jx.conj() * s3)) > 1e-2);
    }

    proptest! {
        #[test]
        fn log_gamma_recurrence(re in -9.5f64..9.5, im in -9.5f64..9.5) {
            let z = C64::new(re, im);
            prop_assume!(z.norm() <= 10.0 && im.abs() > 1e-3);
            let lhs = log_gamma(z + 1.0).unwrap();
            let rhs = log_gamma(z).unwrap() + z.ln();
            let d = lhs - rhs;
            // equal up to a multiple of 2πi
            let wrapped = C64::new(d.re, (d.im / (2.0 * PI)).round() * -2.0 * PI + d.im);
            prop_assert!(wrapped.norm() <= 1e-12 * lhs.norm().max(1.0));
        }

        #[test]
        fn betas_have_modulus_root_nu(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let q = C64::new(re, im);
            prop_assume!(q.norm() > 1e-6);
            let v = nu(q);
            prop_assert!((beta_x(q).unwrap().norm_sqr() - v).abs() <= 1e-12);
            for s in [BetaYSign::Printed, BetaYSign::Derived] {
                prop_assert!((beta_y(q, s).unwrap().norm_sqr() - v).abs() <= 1e-12);
            }
        }

        #[test]
        fn beta_x_is_arg_equivariant(theta in -3.0f64..3.0) {
            let q = C64::new(0.6, 0.25);
            let rot = C64::from_polar(1.0, theta);
            let lhs = beta_x(q * rot).unwrap();
            let rhs = beta_x(q).unwrap() / rot;
            prop_assert!((lhs - rhs).norm() < 1e-13);
        }

        #[test]
        fn beta_y_sign_variants(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let p = C64::new(re, im);
            prop_assume!(p.norm() > 1e-6);
            let bx = beta_x(p.conj()).unwrap().conj();
            prop_assert!((beta_y(p, BetaYSign::Printed).unwrap() - bx).norm() < 1e-14);
            prop_assert!((beta_y(p, BetaYSign::Derived).unwrap() + bx).norm() < 1e-14);
        }

        #[test]
        fn jumps_are_unipotent(re in -2.0f64..2.0, im in -2.0f64..2.0, r in 0.01f64..3.0, ray in 1u8..5) {
            let q = C64::new(re, im);
            let z = C64::from_polar(r, ray_angle(ray));
            for j in [jump_jx(q, z, ray, ArgBranch::Principal).unwrap(), jump_jy(q, z, ray, ArgBranch::Principal).unwrap()] {
                prop_assert!((j.det() - 1.0).norm() < 1e-15);
                prop_assert!(j.m[0][0] == ONE && j.m[1][1] == ONE);
                prop_assert!(j.m[0][1] == ZERO || j.m[1][0] == ZERO);
            }
        }
    }
}
