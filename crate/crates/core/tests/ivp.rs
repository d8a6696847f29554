use num_complex::Complex64 as C;
use proptest::prelude::*;
use weyl_core::ivp::{fundamental_system_interior, fundamental_system_regular, IntegratorConfig};
use weyl_core::models::{catalog, CatalogParams, PotentialModel};

fn models() -> Vec<PotentialModel> {
    vec![
        catalog("free_halfline", &CatalogParams::default()).unwrap(),
        catalog("tabulated", &CatalogParams::default().table(vec![(0.0, 1.0), (1.0, 0.2), (2.0, -0.5), (4.0, 0.0)])).unwrap(),
        catalog("bessel", &CatalogParams::default().gamma(1.5)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_conserved(re in -10.0f64..30.0, im in -3.0f64..3.0, alpha in 0.0f64..3.0) {
        let cfg = IntegratorConfig::default();
        let xs: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
        for model in models() {
            let z = C::new(re, im);
            let fs = if model.is_singular() {
                fundamental_system_interior(&model, 1.0, z, &xs, &cfg).unwrap()
            } else {
                fundamental_system_regular(&model, alpha, z, &xs, &cfg).unwrap()
            };
            for f in &fs.frames {
                let w = f.wronskian();
                let scale = (f.theta.norm() * f.dphi.norm()).max(f.dtheta.norm() * f.phi.norm()).max(1.0);
                prop_assert!((w - 1.0).norm() <= 10.0 * cfg.rel_tol * scale, "{}: W = {}", model.name, w);
            }
        }
    }

    #[test]
    fn conjugate_parameter_gives_conjugate_frames(re in -10.0f64..20.0, im in 0.01f64..3.0, alpha in 0.0f64..3.0) {
        let cfg = IntegratorConfig::default();
        let model = &models()[1];
        let xs = [0.5, 1.7, 3.0];
        let a = fundamental_system_regular(model, alpha, C::new(re, im), &xs, &cfg).unwrap();
        let b = fundamental_system_regular(model, alpha, C::new(re, -im), &xs, &cfg).unwrap();
        for (u, v) in a.frames.iter().zip(&b.frames) {
            prop_assert!((u.phi.conj() - v.phi).norm() <= 1e-12 * u.phi.norm().max(1.0));
            prop_assert!((u.theta.conj() - v.theta).norm() <= 1e-12 * u.theta.norm().max(1.0));
        }
    }
}

#[test]
fn halving_tolerances_moves_frames_at_tolerance_level() {
    let model = &models()[1];
    let xs = [1.0, 3.0, 6.0];
    let z = C::new(4.0, 0.3);
    let coarse_cfg = IntegratorConfig::new(1e-8, 1e-10).unwrap();
    let fine_cfg = IntegratorConfig::new(0.5e-8, 0.5e-10).unwrap();
    let coarse = fundamental_system_regular(model, 0.3, z, &xs, &coarse_cfg).unwrap();
    let fine = fundamental_system_regular(model, 0.3, z, &xs, &fine_cfg).unwrap();
    for (a, b) in coarse.frames.iter().zip(&fine.frames) {
        let est = 1e-8 * 100.0 * a.phi.norm().max(1.0);
        assert!((a.phi - b.phi).norm() <= est, "{} vs {}", a.phi, b.phi);
    }
}

#[test]
fn free_regular_solution_is_sine() {
    let model = &models()[0];
    let z = C::new(2.0, 1.0);
    let k = z.sqrt();
    let fs = fundamental_system_regular(model, 0.0, z, &[0.7, 2.2], &IntegratorConfig::default()).unwrap();
    for (x, f) in [0.7, 2.2].iter().zip(&fs.frames) {
        let exact = (k * *x).sin() / k;
        assert!((f.phi - exact).norm() < 1e-9 * exact.norm());
    }
}
