use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};
use std::process::{Command, Output};

fn weyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl")).args(args).output().expect("run weyl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV output, parsed as numbers.
fn rows(o: &Output) -> Vec<Vec<f64>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn free_halfline_at_i() {
    let o = weyl(&["mfun", "--model", "free_halfline", "--alpha", "0", "--z", "0+1i"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "re_z,im_z,re_m,im_m,err");
    let r = &rows(&o)[0];
    assert!((r[2] + FRAC_1_SQRT_2).abs() < 1e-8 && (r[3] - FRAC_1_SQRT_2).abs() < 1e-8, "{r:?}");
}

#[test]
fn bessel_tilde_on_the_negative_axis() {
    let o = weyl(&["mfun", "--model", "bessel", "--gamma", "1.5", "--kind", "tilde", "--z", "-1+0i"]);
    assert!(o.status.success());
    let r = &rows(&o)[0];
    assert!((r[2] - FRAC_2_PI).abs() < 1e-8 && r[3].abs() < 1e-10, "{r:?}");
}

#[test]
fn empty_grid_is_header_only() {
    let o = weyl(&["mfun", "--model", "free_halfline", "--z-grid", "0:1:0,1:2:3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "re_z,im_z,re_m,im_m,err\n");
}

#[test]
fn z_grid_rows_follow_input_order() {
    let o = weyl(&["mfun", "--model", "free_halfline", "--z-grid", "-1:1:3,0.5:1:2"]);
    assert!(o.status.success());
    let zs: Vec<(f64, f64)> = rows(&o).iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(zs, vec![(-1.0, 0.5), (0.0, 0.5), (1.0, 0.5), (-1.0, 1.0), (0.0, 1.0), (1.0, 1.0)]);
}

#[test]
fn densities() {
    let o = weyl(&["density", "--model", "bessel", "--gamma", "1.5", "--lmin", "1", "--lmax", "1", "--n", "1"]);
    assert!(o.status.success());
    assert!((rows(&o)[0][1] - 0.20264).abs() < 1e-5);

    let o = weyl(&["density", "--model", "bessel", "--gamma", "1.5", "--lmin", "-3", "--lmax", "-1", "--n", "5"]);
    assert!(o.status.success());
    assert!(rows(&o).iter().all(|r| r[1] == 0.0));

    let o = weyl(&["density", "--model", "bessel", "--gamma", "1.5", "--lmin", "0.5", "--lmax", "4", "--n", "4", "--matrix", "--numeric"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "lambda,w00,w01,w11,det");
    for r in rows(&o) {
        assert!(r[4].abs() < 1e-8 * (r[1] * r[3]).max(1e-12), "{r:?}");
    }
}

#[test]
fn numeric_density_agrees_with_closed_form() {
    let args = ["density", "--model", "bessel", "--gamma", "2.5", "--lmin", "0.5", "--lmax", "3", "--n", "3"];
    let closed = rows(&weyl(&args));
    let numeric = rows(&weyl(&[&args[..], &["--numeric"]].concat()));
    for (a, b) in closed.iter().zip(&numeric) {
        assert!((a[1] - b[1]).abs() < 1e-6 * a[1], "{a:?} {b:?}");
    }
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let o = weyl(&["mfun", "--model", "free_halfline", "--z", "1+1i", "--z", "-2+0.5i", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[1]["re_z"], -2.0);
    assert!(arr[0]["im_m"].as_f64().unwrap() > 0.0);
}

#[test]
fn model_file_matches_inline_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.toml");
    std::fs::write(&path, "family = \"bessel\"\ngamma = 1.5\nC = 2.0\n").unwrap();
    let a = weyl(&["mfun", "--model-file", path.to_str().unwrap(), "--z", "1+1i"]);
    let b = weyl(&["mfun", "--model", "bessel", "--gamma", "1.5", "--C", "2", "--z", "1+1i"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_is_deterministic() {
    let args = ["mfun", "--model", "perturbed_bessel", "--gamma", "1.5", "--vtilde", "exp(-x)", "--z-grid", "-1:2:4,0.5:0.5:1"];
    let a = weyl(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, weyl(&args).stdout);
}

#[test]
fn transform_green_and_resolvent() {
    // int_0^inf sin(kx)/k x e^-x dx = 2/(1 + k^2)^2
    let o = weyl(&["transform", "--model", "free_halfline", "--h", "x*exp(-x)", "--support", "0:40", "--lmin", "0.5", "--lmax", "2", "--n", "2"]);
    assert!(o.status.success());
    for r in rows(&o) {
        assert!((r[1] - 2.0 / (1.0 + r[0]).powi(2)).abs() < 1e-8, "{r:?}");
    }

    // free half-line, Dirichlet: G(z, x, x) = sin(kx) e^{ikx} / k with k = sqrt(z)
    let o = weyl(&["green", "--model", "free_halfline", "--z", "0+1i", "--x", "1", "--xp", "1"]);
    assert!(o.status.success());
    let k = num_complex::Complex64::new(0.0, 1.0).sqrt();
    let g = (k.sin() * (num_complex::Complex64::i() * k).exp()) / k;
    let r = &rows(&o)[0];
    assert!((r[2] - g.re).abs() < 1e-7 && (r[3] - g.im).abs() < 1e-7, "{r:?} vs {g}");

    let o = weyl(&["resolvent", "--model", "free_halfline", "--h", "exp(-(x-2)^2)", "--support", "0:8", "--z", "0+1i", "--x-grid", "0.5:3:3"]);
    assert!(o.status.success());
    assert_eq!(rows(&o).len(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(weyl(&["mfun", "--model", "nope", "--z", "1i"]).status.code(), Some(2));
    assert_eq!(weyl(&["mfun", "--model", "bessel", "--z", "1i"]).status.code(), Some(2));
    assert_eq!(weyl(&["mfun", "--model", "free_halfline", "--z", "1+2"]).status.code(), Some(2));
    assert_eq!(weyl(&["mfun", "--z", "1i"]).status.code(), Some(2));
    assert_eq!(weyl(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    let o = weyl(&["mfun", "--model", "factorized", "--f", "x^0.75", "--vtilde", "3/(16*x^2)", "--z", "1e-11+0i"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_herglotz_suite() {
    let o = weyl(&["verify", "--suite", "herglotz"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("group,check,measured,expected,tolerance,status,note\n"));
    assert!(out.contains("criterion 13"));
    assert!(!out.contains("FAIL"));
}
