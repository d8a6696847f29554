//! Generalized eigenfunction transforms: forward and inverse, Parseval
//! checks, Stone's formula against the transform side, and the passage from
//! the 2x2 (theta, phi) expansion at x0 to the scalar phi~ expansion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::herglotz::{extrapolate, EpsSchedule, SpectralMeasure};
use crate::ivp::{fundamental_system_interior, fundamental_system_regular};
use crate::mfun::{resolvent_pairing, SolverConfig};
use crate::models::PotentialModel;
use crate::quad::{self, PanelGrid, QuadTol};
use crate::singular::{phi_tilde_frames, PhiNormalization};

type C = Complex64;
const ZERO: C = C { re: 0.0, im: 0.0 };

/// Which generalized eigenfunctions the transform uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Basis {
    /// phi_alpha(lambda, x) from a regular left endpoint.
    PhiAlpha(f64),
    /// phi~(lambda, x) at a singular left endpoint, in the given normalization.
    PhiTilde(#[serde(skip)] PhiNormalization),
    /// The pair (theta(lambda, x, x0), phi(lambda, x, x0)).
    ThetaPhiAtX0(f64),
}

impl Basis {
    pub fn components(&self) -> usize {
        match self {
            Basis::ThetaPhiAtX0(_) => 2,
            _ => 1,
        }
    }
}

/// A function given on its (compact) support.
#[derive(Clone, Copy)]
pub struct CompactFn<'a> {
    pub f: &'a (dyn Fn(f64) -> C + Sync),
    pub support: (f64, f64),
}

impl<'a> CompactFn<'a> {
    pub fn new(f: &'a (dyn Fn(f64) -> C + Sync), support: (f64, f64)) -> Result<Self> {
        if !(support.0 < support.1) || !support.0.is_finite() || !support.1.is_finite() {
            return Err(Error::InvalidParameter(format!("bad support {support:?}")));
        }
        Ok(CompactFn { f, support })
    }

    /// int |f|^2 dx
    pub fn norm_sq(&self) -> Result<f64> {
        let (a, b) = self.support;
        let breaks = quad::refine_breaks(&[a, b], (b - a) / 32.0);
        Ok(quad::adaptive(|x: f64| Ok((self.f)(x).norm_sqr()), &breaks, QuadTol::default())?.0)
    }
}

/// hat h on a lambda grid: one or two component sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformVector {
    pub grid: Vec<f64>,
    pub components: Vec<Vec<C>>,
    pub basis: Basis,
}

/// Basis functions at xs for the spectral parameter lambda (+ i0).
fn basis_values(model: &PotentialModel, basis: Basis, lambda: f64, xs: &[f64], cfg: &SolverConfig) -> Result<Vec<[C; 2]>> {
    let z = C::new(lambda, 0.0);
    Ok(match basis {
        Basis::PhiAlpha(alpha) => fundamental_system_regular(model, alpha, z, xs, &cfg.ivp)?
            .frames
            .iter()
            .map(|f| [f.phi, ZERO])
            .collect(),
        Basis::PhiTilde(norm) => phi_tilde_frames(model, z, xs, norm, &cfg.ivp)?.iter().map(|f| [f.0, ZERO]).collect(),
        Basis::ThetaPhiAtX0(x0) => fundamental_system_interior(model, x0, z, xs, &cfg.ivp)?
            .frames
            .iter()
            .map(|f| [f.theta, f.phi])
            .collect(),
    })
}

/// x-panels over the support: at most a quarter wavelength long, graded
/// geometrically towards a singular left end.
fn x_grid(model: &PotentialModel, support: (f64, f64), lambda: f64) -> PanelGrid {
    let (a, b) = support;
    let quarter = PI / (2.0 * lambda.abs().sqrt().max(1e-3));
    let max_len = quarter.min(0.5 * model.length_scale).min((b - a) / 4.0);
    let mut pts = vec![a, b];
    if model.is_singular() && a <= 1e-12 {
        let first = max_len.min(b);
        for j in 1..=12 {
            pts.push(first * 0.5f64.powi(j));
        }
    }
    PanelGrid::new(quad::refine_breaks(&quad::merge_breaks(pts), max_len))
}

fn transform_at(model: &PotentialModel, h: &CompactFn, lambda: f64, basis: Basis, cfg: &SolverConfig) -> Result<[C; 2]> {
    let grid = x_grid(model, h.support, lambda);
    let vals = basis_values(model, basis, lambda, &grid.nodes, cfg)?;
    let mut acc = [ZERO; 2];
    for ((&x, &w), b) in grid.nodes.iter().zip(&grid.weights).zip(&vals) {
        let hv = (h.f)(x) * w;
        acc[0] += b[0] * hv;
        acc[1] += b[1] * hv;
    }
    if !(acc[0].re.is_finite() && acc[1].re.is_finite() && acc[0].im.is_finite() && acc[1].im.is_finite()) {
        return Err(Error::Quadrature(format!("transform at lambda = {lambda} is not finite")));
    }
    Ok(acc)
}

/// hat h(lambda) = int basis(lambda, x) h(x) dx on every grid point.
pub fn forward_transform(
    model: &PotentialModel,
    h: &CompactFn,
    grid: &[f64],
    basis: Basis,
    cfg: &SolverConfig,
) -> Result<TransformVector> {
    let vals: Vec<[C; 2]> = grid.par_iter().map(|&l| transform_at(model, h, l, basis, cfg)).collect::<Result<_>>()?;
    let n = basis.components();
    let components = (0..n).map(|k| vals.iter().map(|v| v[k]).collect()).collect();
    Ok(TransformVector { grid: grid.to_vec(), components, basis })
}

/// The lambda points a transform must be sampled on to pair with `measure`:
/// the density grid followed by the atom locations.
pub fn measure_points(measure: &SpectralMeasure) -> Vec<f64> {
    measure.grid.iter().cloned().chain(measure.atoms.iter().map(|a| a.0)).collect()
}

/// Weight of point k of `measure_points` (scalar case).
fn scalar_weights(measure: &SpectralMeasure) -> Vec<f64> {
    measure
        .density
        .iter()
        .zip(&measure.weights)
        .map(|(d, w)| d * w)
        .chain(measure.atoms.iter().map(|a| a.1))
        .collect()
}

/// 2x2 weight of point k of `measure_points` (matrix case).
fn matrix_weights(measure: &SpectralMeasure) -> Result<Vec<[[f64; 2]; 2]>> {
    let md = measure
        .matrix
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("a two-component transform needs a matrix measure".into()))?;
    let scale = |m: &[[f64; 2]; 2], w: f64| [[m[0][0] * w, m[0][1] * w], [m[1][0] * w, m[1][1] * w]];
    Ok(md
        .density
        .iter()
        .zip(&measure.weights)
        .map(|(m, &w)| scale(m, w))
        .chain(md.atoms.iter().map(|a| a.1))
        .collect())
}

fn check_pairing(hat: &TransformVector, measure: &SpectralMeasure) -> Result<()> {
    let pts = measure_points(measure);
    if hat.grid.len() != pts.len() || hat.grid.iter().zip(&pts).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
        return Err(Error::InvalidParameter("transform grid does not match the measure's points".into()));
    }
    Ok(())
}

/// h(x) = int d(rho)(lambda) basis(lambda, x) hat h(lambda), or with the
/// matrix measure sum_jk basis_j dOmega_jk hat h_k.
pub fn inverse_transform(
    model: &PotentialModel,
    hat: &TransformVector,
    measure: &SpectralMeasure,
    xs: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<C>> {
    check_pairing(hat, measure)?;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let two = hat.components.len() == 2;
    let sw = if two { vec![] } else { scalar_weights(measure) };
    let mw = if two { matrix_weights(measure)? } else { vec![] };
    let parts: Vec<Vec<C>> = (0..hat.grid.len())
        .into_par_iter()
        .map(|k| {
            let l = hat.grid[k];
            let b = basis_values(model, hat.basis, l, &sorted, cfg)?;
            Ok(if two {
                let w = mw[k];
                let (h0, h1) = (hat.components[0][k], hat.components[1][k]);
                let c0 = h0 * w[0][0] + h1 * w[0][1];
                let c1 = h0 * w[1][0] + h1 * w[1][1];
                b.iter().map(|v| v[0] * c0 + v[1] * c1).collect()
            } else {
                let c = hat.components[0][k] * sw[k];
                b.iter().map(|v| v[0] * c).collect()
            })
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![ZERO; xs.len()];
    for p in parts {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut out = vec![ZERO; xs.len()];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = sum[pos];
    }
    Ok(out)
}

/// int |hat h|^2 d(rho), or hat h^* dOmega hat h for two components.
pub fn transform_energy(hat: &TransformVector, measure: &SpectralMeasure) -> Result<f64> {
    check_pairing(hat, measure)?;
    Ok(energy_terms(hat, measure)?.iter().sum())
}

fn energy_terms(hat: &TransformVector, measure: &SpectralMeasure) -> Result<Vec<f64>> {
    if hat.components.len() == 2 {
        let mw = matrix_weights(measure)?;
        Ok((0..hat.grid.len())
            .map(|k| {
                let h = [hat.components[0][k], hat.components[1][k]];
                let w = mw[k];
                let mut e = ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        e += h[i].conj() * w[i][j] * h[j];
                    }
                }
                e.re
            })
            .collect())
    } else {
        let sw = scalar_weights(measure);
        Ok(hat.components[0].iter().zip(sw).map(|(h, w)| h.norm_sqr() * w).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub norm_h_sq: f64,
    pub norm_hat_sq: f64,
    /// |norm_h_sq - norm_hat_sq| / norm_h_sq (0 for h = 0)
    pub defect: f64,
    /// Share of the transform energy in the top tenth of the lambda window;
    /// small values certify the truncation of the measure.
    pub tail_fraction: f64,
}

/// Compare ||h||^2 with the energy of its transform against `measure`.
pub fn parseval_check(
    model: &PotentialModel,
    h: &CompactFn,
    basis: Basis,
    measure: &SpectralMeasure,
    cfg: &SolverConfig,
) -> Result<ParsevalReport> {
    let hat = forward_transform(model, h, &measure_points(measure), basis, cfg)?;
    parseval_from_transform(h, &hat, measure)
}

/// As [`parseval_check`], for a transform already computed at the points of
/// `measure`.
pub fn parseval_from_transform(h: &CompactFn, hat: &TransformVector, measure: &SpectralMeasure) -> Result<ParsevalReport> {
    check_pairing(hat, measure)?;
    let terms = energy_terms(hat, measure)?;
    let norm_hat_sq: f64 = terms.iter().sum();
    let norm_h_sq = h.norm_sq()?;
    let hi = measure.grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = measure.grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let cut = hi - 0.1 * (hi - lo);
    let tail: f64 = hat.grid.iter().zip(&terms).filter(|(l, _)| **l >= cut).map(|(_, t)| t).sum();
    let defect = if norm_h_sq == 0.0 && norm_hat_sq == 0.0 { 0.0 } else { (norm_h_sq - norm_hat_sq).abs() / norm_h_sq };
    Ok(ParsevalReport { norm_h_sq, norm_hat_sq, defect, tail_fraction: if norm_hat_sq > 0.0 { tail / norm_hat_sq } else { 0.0 } })
}

/// Turn a Parseval defect above `limit` into an error (normalization mismatch
/// between basis and measure).
pub fn require_parseval(report: &ParsevalReport, limit: f64) -> Result<()> {
    if report.defect > limit {
        return Err(Error::ParsevalViolation { defect: report.defect, limit });
    }
    Ok(())
}

/// (f, F(H) E((lambda1, lambda2]) g) with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSlice {
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(with = "crate::mfun::complex_serde")]
    pub value: C,
    pub err: f64,
}

/// Spectral data for the transform side of Stone's formula.
#[derive(Clone, Copy)]
pub enum TransformSide<'a> {
    Scalar { basis: Basis, density: &'a (dyn Fn(f64) -> Result<f64> + Sync) },
    Matrix { x0: f64, density: &'a (dyn Fn(f64) -> Result<[[f64; 2]; 2]> + Sync) },
}

/// Lambda panels on [l1, l2], graded towards the threshold 0 when it is
/// inside (the smeared integrand has eps-scale structure there).
fn lambda_breaks(l1: f64, l2: f64) -> Vec<f64> {
    let mut pts = vec![l1, l2];
    if l1 <= 0.0 && l2 >= 0.0 {
        let s = l2.min(1.0);
        for j in 1..=14 {
            pts.push(s * 0.5f64.powi(j));
        }
    }
    quad::refine_breaks(&quad::merge_breaks(pts), 0.25)
}

/// Stone's formula: the slice from boundary values of the resolvent,
/// (2 pi i)^-1 int F(l) [(f, R(l + i eps) g) - (f, R(l - i eps) g)] dl with eps
/// extrapolated to 0, and the same slice from the transforms,
/// int F conj(hat f) hat g d(rho). One (resolvent route, transform route)
/// pair per weight F; the resolvent and transform samples are shared.
#[allow(clippy::too_many_arguments)]
pub fn stone_crosscheck(
    model: &PotentialModel,
    f: &CompactFn,
    g: &CompactFn,
    weights: &[&(dyn Fn(f64) -> f64 + Sync)],
    lambda1: f64,
    lambda2: f64,
    side: TransformSide,
    sched: &EpsSchedule,
    cfg: &SolverConfig,
) -> Result<Vec<(SpectralSlice, SpectralSlice)>> {
    if lambda2 < lambda1 {
        return Err(Error::InvalidParameter(format!("bad interval ({lambda1}, {lambda2}]")));
    }
    let empty = SpectralSlice { lambda1, lambda2, value: ZERO, err: 0.0 };
    if lambda1 == lambda2 {
        return Ok(vec![(empty, empty); weights.len()]);
    }
    let grid = PanelGrid::new(lambda_breaks(lambda1, lambda2));

    // resolvent route: (f, R(z) g) at every node and eps
    let probe = PanelGrid::new(quad::refine_breaks(&[f.support.0.min(g.support.0), f.support.1.max(g.support.1)], 0.25));
    // for real f and g the lower half-plane value is the conjugate
    let real = probe.nodes.iter().all(|&x| (f.f)(x).im == 0.0 && (g.f)(x).im == 0.0);
    let pairing = |z: C| resolvent_pairing(model, z, |x| (f.f)(x), f.support, |x| (g.f)(x), g.support, cfg);
    let eps = sched.values();
    let jobs: Vec<(usize, usize)> = (0..eps.len()).flat_map(|e| (0..grid.nodes.len()).map(move |k| (e, k))).collect();
    let vals: Vec<C> = jobs
        .par_iter()
        .map(|&(e, k)| {
            let l = grid.nodes[k];
            let up = pairing(C::new(l, eps[e]))?;
            let down = if real { up.conj() } else { pairing(C::new(l, -eps[e]))? };
            Ok((up - down) / C::new(0.0, 2.0 * PI) * grid.weights[k])
        })
        .collect::<Result<_>>()?;
    let n = grid.nodes.len();

    // transform route on the same panels and on halved panels
    let transform_terms = |grid: &PanelGrid| -> Result<Vec<C>> {
        grid.nodes
            .par_iter()
            .zip(grid.weights.par_iter())
            .map(|(&l, &w)| {
                let v = match side {
                    TransformSide::Scalar { basis, density } => {
                        let a = transform_at(model, f, l, basis, cfg)?[0];
                        let b = transform_at(model, g, l, basis, cfg)?[0];
                        a.conj() * b * density(l)?
                    }
                    TransformSide::Matrix { x0, density } => {
                        let a = transform_at(model, f, l, Basis::ThetaPhiAtX0(x0), cfg)?;
                        let b = transform_at(model, g, l, Basis::ThetaPhiAtX0(x0), cfg)?;
                        let om = density(l)?;
                        let mut s = ZERO;
                        for i in 0..2 {
                            for j in 0..2 {
                                s += a[i].conj() * om[i][j] * b[j];
                            }
                        }
                        s
                    }
                };
                Ok(v * w)
            })
            .collect()
    };
    let coarse = transform_terms(&grid)?;
    let fine_grid = PanelGrid::new(quad::refine_breaks(&grid.breaks, 0.125));
    let fine = transform_terms(&fine_grid)?;

    Ok(weights
        .iter()
        .map(|wf| {
            let per_eps: Vec<C> = (0..eps.len())
                .map(|e| vals[e * n..(e + 1) * n].iter().zip(&grid.nodes).map(|(v, &l)| v * wf(l)).sum())
                .collect();
            let re = extrapolate(eps, &per_eps.iter().map(|v| v.re).collect::<Vec<_>>());
            let im = extrapolate(eps, &per_eps.iter().map(|v| v.im).collect::<Vec<_>>());
            let resolvent = SpectralSlice { lambda1, lambda2, value: C::new(re.value, im.value), err: re.err + im.err };
            let c: C = coarse.iter().zip(&grid.nodes).map(|(v, &l)| v * wf(l)).sum();
            let fv: C = fine.iter().zip(&fine_grid.nodes).map(|(v, &l)| v * wf(l)).sum();
            (resolvent, SpectralSlice { lambda1, lambda2, value: fv, err: (fv - c).norm() })
        })
        .collect())
}

/// Scalar density from the matrix density at x0 and phi~(lambda, x0):
/// the combination
/// (phi~'/phi~) Omega_01 / (phi~^2 + phi~'^2) + Omega_00 / (phi~^2 + phi~'^2),
/// and, when a companion theta~ is given, theta~/phi~ Omega_01 - theta~'/phi~ Omega_00.
pub fn bridge_densities(omega: [[f64; 2]; 2], phi: (f64, f64), theta: Option<(f64, f64)>) -> (f64, Option<f64>) {
    let (p, dp) = phi;
    let d = p * p + dp * dp;
    let r52 = (dp / p) * omega[0][1] / d + omega[0][0] / d;
    let r51 = theta.map(|(t, dt)| t / p * omega[0][1] - dt / p * omega[0][0]);
    (r52, r51)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeResult {
    pub transform: TransformVector,
    pub measure: SpectralMeasure,
    /// Largest relative difference between the two density formulas
    /// (when a companion was supplied).
    pub max_route_difference: Option<f64>,
    /// Grid points where phi~(lambda, x0) is too small for the quotient
    /// formulas; the trace formula (Omega_00 + Omega_11)/(phi~^2 + phi~'^2)
    /// is used there instead.
    pub excluded: Vec<f64>,
}

/// hat h_+ = phi~(x0) hat h_0 + phi~'(x0) hat h_1, with the scalar measure
/// recovered from the matrix one. `phi` (and `theta`) give the real frames
/// at x0 for every point of the transform grid.
pub fn scalar_from_matrix(
    hat_vec: &TransformVector,
    phi: &[(f64, f64)],
    theta: Option<&[(f64, f64)]>,
    omega: &SpectralMeasure,
) -> Result<BridgeResult> {
    if hat_vec.components.len() != 2 {
        return Err(Error::InvalidParameter("scalar_from_matrix needs a (theta, phi) transform".into()));
    }
    check_pairing(hat_vec, omega)?;
    if phi.len() != hat_vec.grid.len() || theta.map_or(false, |t| t.len() != phi.len()) {
        return Err(Error::InvalidParameter("one phi~ frame per grid point is required".into()));
    }
    let md = omega
        .matrix
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("scalar_from_matrix needs a matrix measure".into()))?;
    let scalar: Vec<C> = (0..phi.len())
        .map(|k| hat_vec.components[0][k] * phi[k].0 + hat_vec.components[1][k] * phi[k].1)
        .collect();
    let n_ac = omega.grid.len();
    let mut density = Vec::with_capacity(n_ac);
    let mut excluded = vec![];
    let mut worst: Option<f64> = None;
    for k in 0..n_ac {
        let (p, dp) = phi[k];
        let d = p * p + dp * dp;
        if d == 0.0 {
            return Err(Error::ReferenceDegeneracy { x0: f64::NAN, denom: 0.0 });
        }
        let w = md.density[k];
        if p * p < 1e-12 * d {
            excluded.push(omega.grid[k]);
            density.push((w[0][0] + w[1][1]) / d);
            continue;
        }
        let (r52, r51) = bridge_densities(w, phi[k], theta.map(|t| t[k]));
        if let Some(r51) = r51 {
            let rel = (r51 - r52).abs() / r52.abs().max(1e-300);
            worst = Some(worst.map_or(rel, |w: f64| w.max(rel)));
        }
        density.push(r52);
    }
    let atoms = md
        .atoms
        .iter()
        .zip(&phi[n_ac..])
        .map(|((l, w), (p, dp))| (*l, (w[0][0] + w[1][1]) / (p * p + dp * dp)))
        .collect();
    let measure = SpectralMeasure {
        grid: omega.grid.clone(),
        density,
        weights: omega.weights.clone(),
        atoms,
        matrix: None,
    };
    measure.validate()?;
    Ok(BridgeResult {
        transform: TransformVector {
            grid: hat_vec.grid.clone(),
            components: vec![scalar],
            basis: Basis::PhiTilde(PhiNormalization::Volterra),
        },
        measure,
        max_route_difference: worst,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herglotz::graded_window;
    use crate::models::{catalog, CatalogParams};
    use crate::specialfn::gamma_real;

    #[test]
    fn free_sine_transform_of_exponential() {
        let model = catalog("free_halfline", &CatalogParams::default()).unwrap();
        let cfg = SolverConfig::default();
        let f = |x: f64| C::new((-x).exp(), 0.0);
        let h = CompactFn::new(&f, (0.0, 40.0)).unwrap();
        let grid = [0.5, 1.0, 4.0, 9.0];
        let t = forward_transform(&model, &h, &grid, Basis::PhiAlpha(0.0), &cfg).unwrap();
        for (l, v) in grid.iter().zip(&t.components[0]) {
            assert!((v - C::new(1.0 / (1.0 + l), 0.0)).norm() < 1e-9, "{l}: {v}");
        }
    }

    #[test]
    fn weber_pair_forward_and_parseval() {
        let gamma = 1.5;
        let model = catalog("bessel", &CatalogParams::default().gamma(gamma)).unwrap();
        let cfg = SolverConfig::default();
        let f = move |x: f64| C::new(x.powf(gamma + 0.5) * (-x * x / 2.0).exp(), 0.0);
        let h = CompactFn::new(&f, (0.0, 12.0)).unwrap();
        let basis = Basis::PhiTilde(PhiNormalization::Hankel);
        let t = forward_transform(&model, &h, &[0.3, 2.0, 7.0], basis, &cfg).unwrap();
        for (l, v) in t.grid.iter().zip(&t.components[0]) {
            assert!((v.re - (-l / 2.0).exp()).abs() < 1e-8, "{l}: {v}");
        }
        let measure = SpectralMeasure::from_density(graded_window(0.0, 40.0, 0.5), |l| Ok(l.powf(gamma) / 2.0)).unwrap();
        let rep = parseval_check(&model, &h, basis, &measure, &cfg).unwrap();
        let expect = gamma_real(gamma + 1.0).unwrap() / 2.0;
        assert!((rep.norm_h_sq - expect).abs() < 1e-10 * expect);
        assert!(rep.defect < 1e-6, "{rep:?}");
        assert!(rep.tail_fraction < 1e-8);
    }

    #[test]
    fn zero_function_transforms_to_zero() {
        let model = catalog("free_halfline", &CatalogParams::default()).unwrap();
        let cfg = SolverConfig::default();
        let f = |_x: f64| ZERO;
        let h = CompactFn::new(&f, (0.0, 3.0)).unwrap();
        let t = forward_transform(&model, &h, &[1.0, 2.0], Basis::PhiAlpha(0.0), &cfg).unwrap();
        assert!(t.components[0].iter().all(|v| v.norm() == 0.0));
        let measure = SpectralMeasure::from_density(vec![0.0, 1.0], |l| Ok(l.sqrt() / PI)).unwrap();
        assert_eq!(parseval_check(&model, &h, Basis::PhiAlpha(0.0), &measure, &cfg).unwrap().defect, 0.0);
    }

    #[test]
    fn stone_slice_on_empty_interval() {
        let model = catalog("free_halfline", &CatalogParams::default()).unwrap();
        let f = |x: f64| C::new((-x).exp(), 0.0);
        let h = CompactFn::new(&f, (0.0, 3.0)).unwrap();
        let dens = |l: f64| Ok(l.max(0.0).sqrt() / PI);
        let one = |_l: f64| 1.0;
        let out = stone_crosscheck(
            &model,
            &h,
            &h,
            &[&one],
            1.0,
            1.0,
            TransformSide::Scalar { basis: Basis::PhiAlpha(0.0), density: &dens },
            &EpsSchedule::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!((out[0].0.value, out[0].1.value), (ZERO, ZERO));
    }

    #[test]
    fn bridge_formulas_agree_for_rank_one_data() {
        let (p, dp) = (0.7, -1.3);
        let rho = 2.5;
        let om = [[rho * p * p, rho * p * dp], [rho * p * dp, rho * dp * dp]];
        // any theta with W(theta, phi) = 1
        let t = 0.4;
        let dt = (t * dp - 1.0) / p;
        let (a, b) = bridge_densities(om, (p, dp), Some((t, dt)));
        assert!((a - rho).abs() < 1e-14 && (b.unwrap() - rho).abs() < 1e-14);
    }
}
