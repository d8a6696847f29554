use std::sync::Arc;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use weyl_core::ivp::IntegratorConfig;
use weyl_core::models::{catalog, CatalogParams, ScalarFn};
use weyl_core::quad::{refine_breaks, PanelGrid};
use weyl_core::singular::{phi_tilde_frames, singular_frames, volterra_phi_tilde, Companion, PhiNormalization};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn volterra_terms_obey_envelope(gamma in 1.0f64..3.5, re in -20.0f64..20.0, im in -5.0f64..5.0, x in 0.05f64..2.0) {
        let vt: ScalarFn = Arc::new(|t: f64| (-t).exp() * (1.0 + t).cos());
        let (_, info) = volterra_phi_tilde(gamma, Some(&vt), C::new(re, im), &[x]).unwrap();
        for (k, (t, e)) in info.term_norms.iter().zip(&info.envelopes).enumerate() {
            prop_assert!(*t <= e * (1.0 + 1e-10) + 1e-300, "term {}: {} > {}", k, t, e);
        }
    }

    #[test]
    fn phi_and_theta_tilde_conjugate_symmetry(re in -10.0f64..10.0, im in 0.01f64..3.0) {
        let model = catalog("perturbed_bessel", &CatalogParams::default().gamma(1.5).vtilde(|x: f64| (-x).exp())).unwrap();
        let cfg = IntegratorConfig::default();
        let xs = [0.3, 1.0, 2.5];
        let comp = Companion::ReferencePoint { x0: 1.0 };
        let z = C::new(re, im);
        let (p1, t1) = singular_frames(&model, z, &xs, PhiNormalization::Volterra, comp, &cfg).unwrap();
        let (p2, t2) = singular_frames(&model, z.conj(), &xs, PhiNormalization::Volterra, comp, &cfg).unwrap();
        for i in 0..xs.len() {
            prop_assert!((p1[i].0.conj() - p2[i].0).norm() <= 1e-12 * p1[i].0.norm());
            prop_assert!((t1[i].0.conj() - t2[i].0).norm() <= 1e-12 * t1[i].0.norm().max(1.0));
        }
    }
}

/// int_0^b |phi~|^2 on a graded Gauss grid.
fn l2_near_zero(z: C, b: f64, levels: i32) -> f64 {
    let model = catalog("perturbed_bessel", &CatalogParams::default().gamma(1.0).vtilde(|x: f64| 1.0 / (1.0 + x))).unwrap();
    let mut pts: Vec<f64> = (1..=levels).map(|j| b * 0.5f64.powi(j)).collect();
    pts.push(b);
    pts.reverse();
    pts.insert(0, 0.0);
    let grid = PanelGrid::new(refine_breaks(&pts, 0.25));
    let fr = phi_tilde_frames(&model, z, &grid.nodes, PhiNormalization::Volterra, &IntegratorConfig::default()).unwrap();
    grid.integrate(&fr.iter().map(|f| f.0.norm_sqr()).collect::<Vec<_>>())
}

#[test]
fn phi_tilde_is_square_integrable_at_zero() {
    let z = C::new(2.0, 0.5);
    let a = l2_near_zero(z, 1.0, 10);
    let b = l2_near_zero(z, 1.0, 20);
    assert!(a.is_finite() && a > 0.0);
    assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
}

#[test]
fn theta_tilde_is_real_for_real_z() {
    let model = catalog("perturbed_bessel", &CatalogParams::default().gamma(2.5).vtilde(|x: f64| x.sin() / (1.0 + x * x))).unwrap();
    let (p, t) = singular_frames(
        &model,
        C::new(3.0, 0.0),
        &[0.4, 1.3, 5.0],
        PhiNormalization::Volterra,
        Companion::ReferencePoint { x0: 1.0 },
        &IntegratorConfig::default(),
    )
    .unwrap();
    for (a, b) in p.iter().zip(&t) {
        assert!(a.0.im.abs() <= 1e-14 * a.0.norm() && b.0.im.abs() <= 1e-14 * b.0.norm().max(1.0));
    }
}
