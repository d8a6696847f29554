use std::f64::consts::PI;

use num_complex::Complex64 as C;
use weyl_core::herglotz::{stieltjes_inversion, EpsSchedule};
use weyl_core::mfun::{halfline_m, singular_m_tilde, SolverConfig, TildeOptions};
use weyl_core::models::{catalog, load_model_file, CatalogParams, Domain, LeftEndpoint, Oracle};
use weyl_core::quad::PanelGrid;
use weyl_core::Error;

fn oracles() -> Vec<Oracle> {
    vec![
        Oracle::FreeHalfLine,
        Oracle::Bessel { gamma: 1.5, c: 1.0 },
        Oracle::Bessel { gamma: 2.0, c: 1.0 },
        Oracle::Bessel { gamma: 2.5, c: 0.7 },
    ]
}

#[test]
fn boundary_value_matches_density() {
    for o in oracles() {
        for k in 0..=45 {
            let l = 0.5 + 0.1 * k as f64;
            let from_m = o.m_rim(C::new(l, 0.0)).unwrap().im / PI;
            let d = o.density(l).unwrap();
            assert!((from_m - d).abs() <= 1e-10 * d.max(1.0), "{o:?} at {l}: {from_m} vs {d}");
        }
        assert_eq!(o.density(-1.0).unwrap(), 0.0);
    }
}

#[test]
fn oracle_inverts_to_its_own_measure() {
    let sched = EpsSchedule::default();
    for o in oracles() {
        let m = |z: C| o.m(z);
        for (l1, l2) in [(0.5, 1.5), (1.0, 3.0)] {
            let est = stieltjes_inversion(&m, l1, l2, &sched).unwrap();
            let g = PanelGrid::new(vec![l1, (l1 + l2) / 2.0, l2]);
            let exact: f64 = g.nodes.iter().zip(&g.weights).map(|(&x, w)| w * o.density(x).unwrap()).sum();
            assert!((est.value - exact).abs() <= 1e-5 * exact, "{o:?} on ({l1}, {l2}]: {} vs {exact}", est.value);
        }
    }
}

// m~ grows like z^gamma, so only the boundary values carry a sign
#[test]
fn oracle_m_boundary_sign_and_conjugation() {
    for o in oracles() {
        for (re, im) in [(-3.0, 0.1), (0.0, 1.0), (2.0, 0.01), (5.0, 4.0)] {
            let z = C::new(re, im);
            let mc = o.m(z.conj()).unwrap();
            assert!((mc - o.m(z).unwrap().conj()).norm() <= 1e-13 * mc.norm());
        }
        for l in [0.1, 1.0, 7.0] {
            assert!(o.m_rim(C::new(l, 0.0)).unwrap().im > 0.0);
        }
        assert!(matches!(o.m(C::new(1.0, 0.0)), Err(Error::OnBranchCut(_))));
    }
    let free = Oracle::FreeHalfLine;
    assert!(free.m(C::new(-3.0, 0.1)).unwrap().im > 0.0);
}

#[test]
fn normalization_constant_scales_by_its_square() {
    let cfg = SolverConfig::default();
    let z = C::new(1.0, 0.5);
    let one = catalog("bessel", &CatalogParams::default().gamma(1.5)).unwrap();
    let two = catalog("bessel", &CatalogParams::default().gamma(1.5).c(2.0)).unwrap();
    let m1 = singular_m_tilde(&one, z, &TildeOptions::for_model(&one), &cfg).unwrap().sample.value;
    let m2 = singular_m_tilde(&two, z, &TildeOptions::for_model(&two), &cfg).unwrap().sample.value;
    assert!((m2 - 4.0 * m1).norm() <= 1e-6 * m2.norm(), "{m2} vs 4 x {m1}");
    let o2 = two.oracle.unwrap().m(z).unwrap();
    assert!((m2 - o2).norm() <= 1e-6 * o2.norm());
}

#[test]
fn model_files() {
    let m = load_model_file("family = \"bessel\"\ngamma = 2.5\nC = 0.5\n").unwrap();
    assert_eq!(m.left_endpoint, LeftEndpoint::StronglySingularLimitPoint);
    assert_eq!(m.oracle, Some(Oracle::Bessel { gamma: 2.5, c: 0.5 }));
    assert!((m.v(2.0) - 6.0 / 4.0).abs() < 1e-15);

    let p = load_model_file("family = \"perturbed_bessel\"\ngamma = 1.5\nvtilde = \"exp(-x)\"\n").unwrap();
    assert!((p.v(1.0) - (2.0 + (-1.0f64).exp())).abs() < 1e-14);

    let t = load_model_file("family = \"tabulated\"\ntable = [[0, 1], [1, 0.5], [3, 0]]\n").unwrap();
    assert_eq!(t.domain, Domain::HalfLine { a: 0.0 });
    assert_eq!(t.v(1.0), 0.5);
    let cfg = SolverConfig::default();
    assert!(halfline_m(&t, 0.0, C::new(1.0, 1.0), &cfg).unwrap().value.im > 0.0);

    let f = load_model_file("family = \"factorized\"\nf = \"x^0.75\"\nvtilde = \"3/(16*x^2)\"\n").unwrap();
    assert!((f.v(2.0) - 0.125).abs() < 1e-12);

    for bad in [
        "family = \"nope\"\n",
        "family = \"bessel\"\n",
        "family = \"bessel\"\ngamma = 0.5\n",
        "family = \"bessel\"\ngamma = 1.5\nextra = 1\n",
        "family = \"perturbed_bessel\"\ngamma = 1.5\nvtilde = \"exp(\"\n",
        "family = \"tabulated\"\ntable = [[1, 0], [0, 1]]\n",
    ] {
        assert!(matches!(load_model_file(bad), Err(Error::Model(_) | Error::Parse { .. })), "{bad:?} accepted");
    }
}
