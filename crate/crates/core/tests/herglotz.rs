use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use weyl_core::herglotz::{ac_density, point_mass, stieltjes_inversion, EpsSchedule};
use weyl_core::mfun::{matrix_m, rotate_m};
use weyl_core::models::Oracle;

fn bessel_mass(gamma: f64, l1: f64, l2: f64) -> f64 {
    let s2 = if gamma.fract() == 0.0 { 1.0 } else { (PI * gamma).sin().powi(2) };
    let p = |l: f64| l.max(0.0).powf(gamma + 1.0) / (gamma + 1.0);
    2.0 / (PI * PI) * s2 * (p(l2) - p(l1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn inversion_reproduces_closed_form_measure(gamma in prop::sample::select(vec![1.5, 2.0, 2.5, 1.25]), l1 in 0.2f64..3.0, len in 0.1f64..3.0) {
        let o = Oracle::Bessel { gamma, c: 1.0 };
        let m = move |z: C| o.m(z);
        let est = stieltjes_inversion(&m, l1, l1 + len, &EpsSchedule::default()).unwrap();
        let exact = bessel_mass(gamma, l1, l1 + len);
        prop_assert!((est.value - exact).abs() <= 10.0 * est.err + 1e-9 * exact, "{} vs {} (err {})", est.value, exact, est.err);
    }

    #[test]
    fn inversion_is_additive(l1 in 0.1f64..2.0, a in 0.1f64..2.0, b in 0.1f64..2.0) {
        let o = Oracle::FreeHalfLine;
        let m = move |z: C| o.m(z);
        let s = EpsSchedule::default();
        let x = stieltjes_inversion(&m, l1, l1 + a, &s).unwrap();
        let y = stieltjes_inversion(&m, l1 + a, l1 + a + b, &s).unwrap();
        let xy = stieltjes_inversion(&m, l1, l1 + a + b, &s).unwrap();
        prop_assert!((x.value + y.value - xy.value).abs() <= 10.0 * (x.err + y.err + xy.err) + 1e-12);
    }

    #[test]
    fn masses_and_densities_are_nonnegative(lambda in -3.0f64..6.0) {
        let s = EpsSchedule::default();
        for o in [Oracle::FreeHalfLine, Oracle::Bessel { gamma: 2.5, c: 1.0 }] {
            let m = move |z: C| o.m(z);
            prop_assert!(point_mass(&m, lambda, &s).unwrap().mass >= -1e-10);
            if lambda.abs() > 0.05 {
                prop_assert!(ac_density(&m, lambda, &s).unwrap().value >= -1e-10);
            }
        }
    }
}

#[test]
fn matrix_increments_are_positive_semidefinite() {
    let s = EpsSchedule::default();
    let o = Oracle::Bessel { gamma: 1.5, c: 1.0 };
    let x0 = 1.0;
    let entry = move |i: usize, j: usize| {
        move |z: C| -> weyl_core::Result<C> {
            let (mm, mp) = o.m_pm(z, x0)?;
            Ok(matrix_m(mm, mp, z, x0)?.entries[i][j])
        }
    };
    let (e00, e01, e11) = (entry(0, 0), entry(0, 1), entry(1, 1));
    let mut l = 0.25;
    while l < 6.0 {
        let w00 = stieltjes_inversion(&e00, l, l + 0.5, &s).unwrap().value;
        let w01 = stieltjes_inversion(&e01, l, l + 0.5, &s).unwrap().value;
        let w11 = stieltjes_inversion(&e11, l, l + 0.5, &s).unwrap().value;
        assert!(w00 >= -1e-10 && w11 >= -1e-10);
        assert!(w00 * w11 - w01 * w01 >= -1e-10 * (w00 + w11).powi(2), "({l}): {w00} {w01} {w11}");
        l += 0.5;
    }
}

#[test]
fn rotated_free_m_has_a_unit_weighted_atom() {
    // m_{pi/4} = (m - 1)/(m + 1) with m = i sqrt z: pole at -1 of weight 4
    let m = |z: C| rotate_m(Oracle::FreeHalfLine.m(z)?, PI / 4.0, 0.0);
    let pm = point_mass(&m, -1.0, &EpsSchedule::default()).unwrap();
    assert!((pm.mass - 4.0).abs() < 1e-8);
    let slice = stieltjes_inversion(&m, -2.0, -0.5, &EpsSchedule::default()).unwrap();
    assert!((slice.value - 4.0).abs() < 1e-6, "{slice:?}");
}
