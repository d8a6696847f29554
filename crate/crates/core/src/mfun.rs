//! Weyl-Titchmarsh coefficients: the regular half-line m_{+,alpha}, the
//! interior pair m_-(z, x0), m_+(z, x0), the singular m~_+, the 2x2 matrix M,
//! Green's functions and the resolvent applied to compactly supported data.
//!
//! Real z is accepted everywhere and read as the boundary value from the
//! upper half-plane (lambda + i0); on the spectrum the Riccati start is then
//! the outgoing wave.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{
    fundamental_system_regular, riccati_log_derivative, solve_linear, IntegratorConfig, Side, TailConfig,
};
use crate::models::{Domain, PotentialModel};
use crate::quad::{self, PanelGrid};
use crate::singular::{phi_tilde_frames, singular_frames, Companion, PhiNormalization};
use crate::specialfn::cut_sqrt;

type C = Complex64;
const ONE: C = C { re: 1.0, im: 0.0 };

/// Numerical settings shared by the m-function routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub ivp: IntegratorConfig,
    pub tail: TailConfig,
    /// Boundary angle at a regular left endpoint (Green's function, resolvent,
    /// interior m_-).
    pub alpha: f64,
    /// Allowed relative spread of m~_+ across probe points.
    pub probe_tol: f64,
    /// Acceptance of |m_b - m_2b|: max(abs, rel * |m_b|).
    pub truncation_abs: f64,
    pub truncation_rel: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ivp: IntegratorConfig::default(),
            tail: TailConfig::default(),
            alpha: 0.0,
            probe_tol: 1e-6,
            truncation_abs: 1e-8,
            truncation_rel: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SampleKind {
    HalfLineAlpha(f64),
    InteriorPlus(f64),
    InteriorMinus(f64),
    SingularTilde,
    MatrixEntry(usize, usize),
}

/// One value of a boundary function with its error estimate and the
/// truncation point that produced it (0 when no truncation was involved).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFunctionSample {
    #[serde(with = "crate::mfun::complex_serde")]
    pub z: C,
    #[serde(with = "crate::mfun::complex_serde")]
    pub value: C,
    pub kind: SampleKind,
    pub err_estimate: f64,
    pub truncation: f64,
}

pub(crate) mod complex_serde {
    use num_complex::Complex64;
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Complex", 2)?;
        st.serialize_field("re", &z.re)?;
        st.serialize_field("im", &z.im)?;
        st.end()
    }
}

/// Global integration error attributed to a value of size |v|: observed to
/// stay below about 75 rel_tol |v| on the catalog models.
fn integration_error(v: C, cfg: &SolverConfig) -> f64 {
    100.0 * cfg.ivp.rel_tol * v.norm().max(1.0)
}

fn check_z(z: C) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite spectral parameter {z}")));
    }
    Ok(())
}

/// Log-derivative of the Weyl solution at x from truncation points b and 2b:
/// (value at 2b, |m_b - m_2b|, b).
fn weyl_log_derivative(model: &PotentialModel, z: C, x: f64, side: Side, cfg: &SolverConfig) -> Result<(C, f64, f64)> {
    let first = riccati_log_derivative(model, z, x, side, &cfg.tail, &cfg.ivp)?;
    let tail2 = TailConfig { b: Some(x + 2.0 * (first.b - x)), ..cfg.tail };
    let second = riccati_log_derivative(model, z, x, side, &tail2, &cfg.ivp)?;
    let diff = (first.m - second.m).norm();
    if diff > cfg.truncation_abs.max(cfg.truncation_rel * first.m.norm()) {
        return Err(Error::Convergence {
            what: format!("Weyl solution truncation at z = {z} (b = {}, 2b = {})", first.b, tail2.b.unwrap()),
            achieved: diff,
        });
    }
    Ok((second.m, diff, first.b))
}

fn matching_point(model: &PotentialModel) -> Result<f64> {
    match model.domain {
        Domain::HalfLine { a } if !model.is_singular() => Ok(a + model.length_scale),
        _ => Err(Error::InvalidParameter(format!(
            "model '{}' has no regular left endpoint; use the interior or singular m-functions",
            model.name
        ))),
    }
}

/// m_{+,alpha}(z) for a regular left endpoint: theta_alpha + m phi_alpha is
/// the Weyl solution. The fundamental system is carried to a matching point
/// and compared with the Riccati log-derivative L of the Weyl solution.
pub fn halfline_m(model: &PotentialModel, alpha: f64, z: C, cfg: &SolverConfig) -> Result<BoundaryFunctionSample> {
    check_z(z)?;
    let xm = matching_point(model)?;
    let fs = fundamental_system_regular(model, alpha, z, &[xm], &cfg.ivp)?;
    let f = fs.frames[0];
    let (l, dl, b) = weyl_log_derivative(model, z, xm, Side::Right, cfg)?;
    let den = f.dphi - l * f.phi;
    if den.norm() < 1e-300 {
        return Err(Error::RotatedPole);
    }
    let m = (l * f.theta - f.dtheta) / den;
    // dm/dL = W(theta, phi) / den^2
    let err = dl / den.norm_sqr() + fs.wronskian_drift * m.norm() + integration_error(m, cfg);
    Ok(BoundaryFunctionSample { z, value: m, kind: SampleKind::HalfLineAlpha(alpha), err_estimate: err, truncation: b })
}

/// m_{alpha1} from m_{alpha2}:
/// (-sin D + cos D m) / (cos D + sin D m) with D = alpha1 - alpha2.
pub fn rotate_m(m: C, alpha1: f64, alpha2: f64) -> Result<C> {
    let (s, c) = (alpha1 - alpha2).sin_cos();
    let den = c + s * m;
    if den.norm() <= 1e-14 * (1.0 + m.norm()) {
        return Err(Error::RotatedPole);
    }
    Ok((-s + c * m) / den)
}

/// Log-derivative m_-(z, x0) of the solution that satisfies the left
/// boundary condition (or is L^2 at the left end), with an error estimate.
fn left_log_derivative(model: &PotentialModel, z: C, x0: f64, cfg: &SolverConfig) -> Result<(C, f64, f64)> {
    let (val, der, err, b) = match model.domain {
        Domain::Line => {
            let (m, e, b) = weyl_log_derivative(model, z, x0, Side::Left, cfg)?;
            (m, ONE, e, b)
        }
        Domain::HalfLine { .. } if model.is_singular() => {
            let fr = phi_tilde_frames(model, z, &[x0], PhiNormalization::Volterra, &cfg.ivp)?[0];
            (fr.0, fr.1, 0.0, 0.0)
        }
        Domain::HalfLine { .. } => {
            let fs = fundamental_system_regular(model, cfg.alpha, z, &[x0], &cfg.ivp)?;
            let f = fs.frames[0];
            (f.phi, f.dphi, fs.wronskian_drift, 0.0)
        }
    };
    if model.domain == Domain::Line {
        return Ok((val, err, b));
    }
    if val.norm() <= 1e-14 * der.norm() {
        return Err(Error::MMinusPole { z });
    }
    let m = der / val;
    Ok((m, err * m.norm().max(1.0), b))
}

/// (m_-(z, x0), m_+(z, x0)). For a singular left end m_- = phi~'/phi~.
pub fn interior_m_pm(
    model: &PotentialModel,
    x0: f64,
    z: C,
    cfg: &SolverConfig,
) -> Result<(BoundaryFunctionSample, BoundaryFunctionSample)> {
    check_z(z)?;
    let (mm, em, bm) = left_log_derivative(model, z, x0, cfg)?;
    let (mp, ep, bp) = weyl_log_derivative(model, z, x0, Side::Right, cfg)?;
    Ok((
        BoundaryFunctionSample {
            z,
            value: mm,
            kind: SampleKind::InteriorMinus(x0),
            err_estimate: em + integration_error(mm, cfg),
            truncation: bm,
        },
        BoundaryFunctionSample {
            z,
            value: mp,
            kind: SampleKind::InteriorPlus(x0),
            err_estimate: ep + integration_error(mp, cfg),
            truncation: bp,
        },
    ))
}

/// Where m~_+ is evaluated and how phi~, theta~ are normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeOptions {
    pub probes: Vec<f64>,
    pub normalization: PhiNormalization,
    pub companion: Companion,
}

impl TildeOptions {
    /// Probes {0.5, 1, 2} in units of the model's length scale, model
    /// normalization for Bessel-type endpoints, automatic companion.
    pub fn for_model(model: &PotentialModel) -> TildeOptions {
        let s = model.length_scale;
        let normalization = match model.bessel_gamma() {
            Some(_) => PhiNormalization::Model,
            None => PhiNormalization::Volterra,
        };
        let companion = match model.bessel_gamma() {
            Some(_) => Companion::Auto,
            None => Companion::ReferencePoint { x0: model.x0 },
        };
        TildeOptions { probes: vec![0.5 * s, s, 2.0 * s], normalization, companion }
    }
}

/// m~_+ with its per-probe values.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeSample {
    pub sample: BoundaryFunctionSample,
    pub per_probe: Vec<C>,
    /// max relative deviation between probes
    pub spread: f64,
}

/// m~_+(z) = W(theta~, psi_+) / W(psi_+, phi~), evaluated at every probe
/// point; the values must agree.
pub fn singular_m_tilde(model: &PotentialModel, z: C, opts: &TildeOptions, cfg: &SolverConfig) -> Result<TildeSample> {
    check_z(z)?;
    if !model.is_singular() {
        return Err(Error::InvalidParameter(format!("model '{}' has a regular left endpoint", model.name)));
    }
    if opts.probes.is_empty() {
        return Err(Error::InvalidParameter("at least one probe point is needed".into()));
    }
    let (phi, theta) = singular_frames(model, z, &opts.probes, opts.normalization, opts.companion, &cfg.ivp)?;
    let evals: Vec<(C, f64, f64, f64)> = opts
        .probes
        .par_iter()
        .zip(phi.par_iter().zip(theta.par_iter()))
        .map(|(&x, (p, t))| {
            let (mp, dmp, b) = weyl_log_derivative(model, z, x, Side::Right, cfg)?;
            let den = p.1 - p.0 * mp;
            if den.norm() < 1e-300 {
                return Err(Error::MMinusPole { z });
            }
            let val = (t.0 * mp - t.1) / den;
            Ok((val, dmp / den.norm_sqr(), den.norm() / (p.0.norm() + p.1.norm()), b))
        })
        .collect::<Result<_>>()?;
    // report the best conditioned probe
    let best = (0..evals.len()).max_by(|&i, &j| evals[i].2.partial_cmp(&evals[j].2).unwrap()).unwrap();
    let value = evals[best].0;
    let spread = evals.iter().map(|e| (e.0 - value).norm()).fold(0.0, f64::max) / value.norm().max(1e-300);
    if spread > cfg.probe_tol {
        return Err(Error::ProbeInconsistency { spread });
    }
    Ok(TildeSample {
        sample: BoundaryFunctionSample {
            z,
            value,
            kind: SampleKind::SingularTilde,
            err_estimate: evals[best].1 + spread * value.norm() + integration_error(value, cfg),
            truncation: evals[best].3,
        },
        per_probe: evals.iter().map(|e| e.0).collect(),
        spread,
    })
}

/// m~_+ from the interior pair when theta~ is normalized at x0 as in the
/// reference-point companion:
/// (1 + m_- m_+) / (phi~(x0)^2 (1 + m_-^2) (m_- - m_+)).
pub fn m_tilde_quotient_form(m_minus: C, m_plus: C, phi_x0: C) -> Result<C> {
    let den = phi_x0 * phi_x0 * (1.0 + m_minus * m_minus) * (m_minus - m_plus);
    if den.norm() < 1e-300 {
        return Err(Error::WronskianDegeneracy { z: m_minus });
    }
    Ok((1.0 + m_minus * m_plus) / den)
}

/// The 2x2 Weyl-Titchmarsh matrix at (z, x0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixM {
    pub entries: [[C; 2]; 2],
    pub z: C,
    pub x0: f64,
}

impl MatrixM {
    /// Im M (entrywise imaginary part; M is symmetric).
    pub fn imag(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        [[e[0][0].im, e[0][1].im], [e[1][0].im, e[1][1].im]]
    }
}

/// M = 1/(m_- - m_+) [[1, (m_- + m_+)/2], [(m_- + m_+)/2, m_- m_+]].
pub fn matrix_m(m_minus: C, m_plus: C, z: C, x0: f64) -> Result<MatrixM> {
    let den = m_minus - m_plus;
    if den.norm() <= 1e-14 * (m_minus.norm() + m_plus.norm()) || den.norm() == 0.0 {
        return Err(Error::WronskianDegeneracy { z });
    }
    let off = 0.5 * (m_minus + m_plus) / den;
    Ok(MatrixM { entries: [[1.0 / den, off], [off, m_minus * m_plus / den]], z, x0 })
}

/// M(z, x0) of a model, from its interior m-functions.
pub fn model_matrix_m(model: &PotentialModel, x0: f64, z: C, cfg: &SolverConfig) -> Result<(MatrixM, f64)> {
    let (mm, mp) = interior_m_pm(model, x0, z, cfg)?;
    let mat = matrix_m(mm.value, mp.value, z, x0)?;
    let den = (mm.value - mp.value).norm_sqr();
    let scale = 1.0 + mm.value.norm().max(mp.value.norm()).powi(2);
    Ok((mat, (mm.err_estimate + mp.err_estimate) * scale / den))
}

/// G(z, x, x') = psi_-(x<) psi_+(x>) / W(psi_+, psi_-), computed as
/// [psi_+(x>) / psi_+(x<)] / (m_-(x<) - m_+(x<)); psi_+ is integrated inward
/// from x>, the stable direction.
pub fn greens_function(model: &PotentialModel, z: C, x: f64, xp: f64, cfg: &SolverConfig) -> Result<C> {
    check_z(z)?;
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    let (mp_hi, _, _) = weyl_log_derivative(model, z, hi, Side::Right, cfg)?;
    let (ratio, mp_lo) = if lo == hi {
        (ONE, mp_hi)
    } else {
        let v = solve_linear(model, z, hi, (ONE, mp_hi), &[lo], &cfg.ivp)?[0];
        (v.0, v.1 / v.0)
    };
    let (mm_lo, _, _) = left_log_derivative(model, z, lo, cfg)?;
    let den = ratio * (mm_lo - mp_lo);
    if den.norm() < 1e-300 {
        return Err(Error::WronskianDegeneracy { z });
    }
    Ok(1.0 / den)
}

/// (H - z)^-1 f at the points xs, with its x-derivative.
#[derive(Debug, Clone)]
pub struct ResolventResult {
    pub xs: Vec<f64>,
    pub values: Vec<C>,
    pub derivatives: Vec<C>,
    /// Relative variation of W(psi_+, psi_-) across the grid.
    pub wronskian_drift: f64,
}

/// ((H - z)^-1 f)(x) = int G(z, x, x') f(x') dx' for f supported in
/// `support`, evaluated at `xs`, as
/// [psi_+(x) int_{<x} psi_- f + psi_-(x) int_{>x} psi_+ f] / W(psi_+, psi_-).
pub fn resolvent_apply<F>(
    model: &PotentialModel,
    z: C,
    f: F,
    support: (f64, f64),
    xs: &[f64],
    cfg: &SolverConfig,
) -> Result<ResolventResult>
where
    F: Fn(f64) -> C,
{
    check_z(z)?;
    let (c0, d0) = support;
    if !(c0 < d0) {
        return Err(Error::InvalidParameter(format!("empty support ({c0}, {d0})")));
    }
    if xs.is_empty() {
        return Ok(ResolventResult { xs: vec![], values: vec![], derivatives: vec![], wronskian_drift: 0.0 });
    }
    let lo = xs.iter().cloned().fold(c0, f64::min);
    let hi = xs.iter().cloned().fold(d0, f64::max);
    let k = cut_sqrt(z - model.v(0.5 * (c0 + d0))).norm().max(1.0);
    let mut pts = vec![lo, hi, c0, d0];
    pts.extend_from_slice(xs);
    let breaks = quad::refine_breaks(&quad::merge_breaks(pts), (2.0 / k).min(0.5 * model.length_scale));
    let grid = PanelGrid::new(breaks);
    // all nodes and breaks in increasing order
    let mut outputs: Vec<f64> = grid.nodes.iter().chain(grid.breaks.iter()).cloned().collect();
    outputs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    outputs.dedup();
    if model.is_singular() {
        // nothing is needed at the singular endpoint itself
        outputs.retain(|&x| x > model.left_end());
    }
    let position = |x: f64| outputs.binary_search_by(|p| p.partial_cmp(&x).unwrap()).unwrap();

    let (psi_minus, psi_plus, w_mean, drift) = weyl_pair(model, z, &outputs, cfg)?;

    let inside = |x: f64| x >= c0 && x <= d0;
    let fm: Vec<C> = grid
        .nodes
        .iter()
        .map(|&x| if inside(x) { psi_minus[position(x)].0 * f(x) } else { C::new(0.0, 0.0) })
        .collect();
    let fp: Vec<C> = grid
        .nodes
        .iter()
        .map(|&x| if inside(x) { psi_plus[position(x)].0 * f(x) } else { C::new(0.0, 0.0) })
        .collect();
    let (_, a_breaks) = grid.cumulative(&fm);
    let (_, b_breaks) = grid.cumulative_from_right(&fp);
    let mut values = Vec::with_capacity(xs.len());
    let mut derivatives = Vec::with_capacity(xs.len());
    for &x in xs {
        let bi = grid.breaks.iter().position(|&b| b == x).unwrap();
        let j = position(x);
        let (a, b) = (a_breaks[bi], b_breaks[bi]);
        values.push((psi_plus[j].0 * a + psi_minus[j].0 * b) / w_mean);
        derivatives.push((psi_plus[j].1 * a + psi_minus[j].1 * b) / w_mean);
    }
    Ok(ResolventResult { xs: xs.to_vec(), values, derivatives, wronskian_drift: drift })
}

/// psi_- and psi_+ (value, derivative) at the increasing points `outputs`,
/// with the mean of W(psi_+, psi_-) and its relative drift.
#[allow(clippy::type_complexity)]
fn weyl_pair(model: &PotentialModel, z: C, outputs: &[f64], cfg: &SolverConfig) -> Result<(Vec<(C, C)>, Vec<(C, C)>, C, f64)> {
    let lo = outputs[0];
    let hi = *outputs.last().unwrap();
    let psi_minus: Vec<(C, C)> = match model.domain {
        Domain::Line => {
            let (m, _, _) = weyl_log_derivative(model, z, lo, Side::Left, cfg)?;
            solve_linear(model, z, lo, (ONE, m), outputs, &cfg.ivp)?
        }
        Domain::HalfLine { .. } if model.is_singular() => {
            phi_tilde_frames(model, z, outputs, PhiNormalization::Volterra, &cfg.ivp)?
        }
        Domain::HalfLine { .. } => {
            let fs = fundamental_system_regular(model, cfg.alpha, z, outputs, &cfg.ivp)?;
            fs.frames.iter().map(|f| (f.phi, f.dphi)).collect()
        }
    };
    let (mp, _, _) = weyl_log_derivative(model, z, hi, Side::Right, cfg)?;
    let rev: Vec<f64> = outputs.iter().rev().cloned().collect();
    let mut psi_plus = solve_linear(model, z, hi, (ONE, mp), &rev, &cfg.ivp)?;
    psi_plus.reverse();

    let w: Vec<C> = psi_plus.iter().zip(&psi_minus).map(|(p, m)| p.0 * m.1 - p.1 * m.0).collect();
    let w_mean = w.iter().sum::<C>() / w.len() as f64;
    if w_mean.norm() == 0.0 || !w_mean.re.is_finite() {
        return Err(Error::WronskianDegeneracy { z });
    }
    let drift = w.iter().map(|v| (v - w_mean).norm()).fold(0.0, f64::max) / w_mean.norm();
    Ok((psi_minus, psi_plus, w_mean, drift))
}

/// (f, (H - z)^-1 g) = int conj(f) (H - z)^-1 g for f, g given on their
/// supports, computed on one Gauss grid covering both.
pub fn resolvent_pairing<F, G>(
    model: &PotentialModel,
    z: C,
    f: F,
    f_support: (f64, f64),
    g: G,
    g_support: (f64, f64),
    cfg: &SolverConfig,
) -> Result<C>
where
    F: Fn(f64) -> C,
    G: Fn(f64) -> C,
{
    check_z(z)?;
    for (a, b) in [f_support, g_support] {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("empty support ({a}, {b})")));
        }
    }
    let lo = f_support.0.min(g_support.0);
    let hi = f_support.1.max(g_support.1);
    let k = cut_sqrt(z - model.v(0.5 * (lo + hi))).norm().max(1.0);
    let max_len = (2.0 / k).min(0.5 * model.length_scale);
    let mut pts = vec![lo, hi, f_support.0, f_support.1, g_support.0, g_support.1];
    if model.is_singular() && lo <= model.left_end() {
        for j in 1..=12 {
            pts.push(lo + max_len * 0.5f64.powi(j));
        }
    }
    let grid = PanelGrid::new(quad::refine_breaks(&quad::merge_breaks(pts), max_len));
    let (psi_minus, psi_plus, w, _) = weyl_pair(model, z, &grid.nodes, cfg)?;
    let zero = C::new(0.0, 0.0);
    let gv: Vec<C> = grid
        .nodes
        .iter()
        .map(|&x| if x >= g_support.0 && x <= g_support.1 { g(x) } else { zero })
        .collect();
    let fm: Vec<C> = psi_minus.iter().zip(&gv).map(|(p, v)| p.0 * v).collect();
    let fp: Vec<C> = psi_plus.iter().zip(&gv).map(|(p, v)| p.0 * v).collect();
    let (a, _) = grid.cumulative(&fm);
    let (b, _) = grid.cumulative_from_right(&fp);
    let mut acc = zero;
    for (i, &x) in grid.nodes.iter().enumerate() {
        if x >= f_support.0 && x <= f_support.1 {
            let rg = (psi_plus[i].0 * a[i] + psi_minus[i].0 * b[i]) / w;
            acc += f(x).conj() * rg * grid.weights[i];
        }
    }
    Ok(acc)
}

/// Which boundary function to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum MKind {
    HalfLine { alpha: f64 },
    InteriorPlus { x0: f64 },
    InteriorMinus { x0: f64 },
    Tilde(TildeOptions),
    MatrixEntry { x0: f64, i: usize, j: usize },
}

/// Evaluate the chosen boundary function at z.
pub fn evaluate(model: &PotentialModel, kind: &MKind, z: C, cfg: &SolverConfig) -> Result<BoundaryFunctionSample> {
    match kind {
        MKind::HalfLine { alpha } => halfline_m(model, *alpha, z, cfg),
        MKind::InteriorPlus { x0 } => Ok(interior_m_pm(model, *x0, z, cfg)?.1),
        MKind::InteriorMinus { x0 } => Ok(interior_m_pm(model, *x0, z, cfg)?.0),
        MKind::Tilde(opts) => Ok(singular_m_tilde(model, z, opts, cfg)?.sample),
        MKind::MatrixEntry { x0, i, j } => {
            if *i > 1 || *j > 1 {
                return Err(Error::InvalidParameter(format!("matrix index ({i}, {j}) out of range")));
            }
            let (m, err) = model_matrix_m(model, *x0, z, cfg)?;
            Ok(BoundaryFunctionSample {
                z,
                value: m.entries[*i][*j],
                kind: SampleKind::MatrixEntry(*i, *j),
                err_estimate: err,
                truncation: 0.0,
            })
        }
    }
}

/// Evaluate over many z in parallel; the output order follows the input.
pub fn evaluate_many(model: &PotentialModel, kind: &MKind, zs: &[C], cfg: &SolverConfig) -> Vec<Result<BoundaryFunctionSample>> {
    zs.par_iter().map(|&z| evaluate(model, kind, z, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{catalog, CatalogParams};
    use crate::specialfn::{bessel_j, hankel1};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn free_halfline_reference_values() {
        let model = catalog("free_halfline", &CatalogParams::default()).unwrap();
        let cfg = SolverConfig::default();
        let m = halfline_m(&model, 0.0, c(0.0, 1.0), &cfg).unwrap();
        let expect = c(-0.5f64.sqrt(), 0.5f64.sqrt());
        assert!((m.value - expect).norm() < 1e-8, "{}", m.value);
        let z = c(4.0, 0.5);
        let m = halfline_m(&model, 0.0, z, &cfg).unwrap();
        assert!((m.value - c(0.0, 1.0) * z.sqrt()).norm() < 1e-8 * m.value.norm());
        assert!(m.err_estimate < 1e-8);
        // conjugate point
        let mc = halfline_m(&model, 0.0, z.conj(), &cfg).unwrap();
        assert!((mc.value - m.value.conj()).norm() < 1e-12);
    }

    #[test]
    fn rotation_round_trip_and_poles() {
        assert_eq!(rotate_m(c(0.3, 0.8), 0.7, 0.7).unwrap(), c(0.3, 0.8));
        let r = rotate_m(c(0.0, 1.0), PI / 2.0, 0.0).unwrap();
        assert!((r - c(0.0, 1.0)).norm() < 1e-15);
        let m = c(-0.4, 1.3);
        let back = rotate_m(rotate_m(m, 1.1, 0.2).unwrap(), 0.2, 1.1).unwrap();
        assert!((back - m).norm() < 1e-14);
        // i sqrt(-1) = -1: alpha = pi/4 is singular, 3 pi/4 is not
        let m0 = c(-1.0, 0.0);
        assert!(matches!(rotate_m(m0, PI / 4.0, 0.0), Err(Error::RotatedPole)));
        assert!(rotate_m(m0, 3.0 * PI / 4.0, 0.0).is_ok());
    }

    #[test]
    fn rotated_numeric_m_matches_mobius() {
        let model = catalog("free_halfline", &CatalogParams::default()).unwrap();
        let cfg = SolverConfig::default();
        let z = c(1.0, 1.0);
        let m0 = halfline_m(&model, 0.0, z, &cfg).unwrap().value;
        for alpha in [PI / 6.0, PI / 3.0, 3.0 * PI / 4.0] {
            let ma = halfline_m(&model, alpha, z, &cfg).unwrap().value;
            assert!((ma - rotate_m(m0, alpha, 0.0).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn interior_pair_free_line_and_bessel() {
        let cfg = SolverConfig::default();
        let line = catalog("free_line", &CatalogParams::default()).unwrap();
        let z = c(1.0, 1.0);
        let (mm, mp) = interior_m_pm(&line, 0.0, z, &cfg).unwrap();
        let k = z.sqrt();
        assert!((mm.value + c(0.0, 1.0) * k).norm() < 1e-8);
        assert!((mp.value - c(0.0, 1.0) * k).norm() < 1e-8);
        assert!(mp.value.im > 0.0 && mm.value.im < 0.0);

        let bessel = catalog("bessel", &CatalogParams::default().gamma(1.5)).unwrap();
        let (mm, mp) = interior_m_pm(&bessel, 1.0, z, &cfg).unwrap();
        let (em, ep) = bessel.oracle.unwrap().m_pm(z, 1.0).unwrap();
        assert!((mm.value - em).norm() < 1e-10 * em.norm(), "{} vs {em}", mm.value);
        assert!((mp.value - ep).norm() < 1e-8 * ep.norm());
        let (mmc, _) = interior_m_pm(&bessel, 1.0, z.conj(), &cfg).unwrap();
        assert!((mmc.value - mm.value.conj()).norm() < 1e-12);
    }

    #[test]
    fn singular_m_tilde_matches_closed_form() {
        let cfg = SolverConfig::default();
        for gamma in [1.5, 2.0] {
            let model = catalog("bessel", &CatalogParams::default().gamma(gamma)).unwrap();
            let opts = TildeOptions::for_model(&model);
            for z in [c(-1.0, 0.0), c(2.0, 0.3), c(0.5, -0.1)] {
                if gamma == 2.0 && z == c(-1.0, 0.0) {
                    continue;
                }
                let t = singular_m_tilde(&model, z, &opts, &cfg).unwrap();
                let exact = model.oracle.unwrap().m(z).unwrap();
                assert!((t.sample.value - exact).norm() < 1e-7 * exact.norm(), "gamma={gamma} z={z}: {} vs {exact}", t.sample.value);
                assert!(t.spread < 1e-8);
            }
        }
    }

    #[test]
    fn reference_point_companion_and_quotient_form() {
        let cfg = SolverConfig::default();
        let model = catalog("bessel", &CatalogParams::default().gamma(1.5)).unwrap();
        let z = c(1.5, 0.4);
        let opts = TildeOptions {
            probes: vec![1.0],
            normalization: PhiNormalization::Volterra,
            companion: Companion::ReferencePoint { x0: 1.0 },
        };
        let wr = singular_m_tilde(&model, z, &opts, &cfg).unwrap().sample.value;
        let (mm, mp) = interior_m_pm(&model, 1.0, z, &cfg).unwrap();
        let phi = phi_tilde_frames(&model, z, &[1.0], PhiNormalization::Volterra, &cfg.ivp).unwrap()[0].0;
        let q = m_tilde_quotient_form(mm.value, mp.value, phi).unwrap();
        assert!((wr - q).norm() < 1e-8 * q.norm(), "{wr} vs {q}");
    }

    #[test]
    fn matrix_free_line_reference() {
        let z = c(0.0, 1.0);
        let k = z.sqrt();
        let m = matrix_m(-c(0.0, 1.0) * k, c(0.0, 1.0) * k, z, 0.0).unwrap();
        assert!((m.entries[0][0] - c(0.35355339059327373, 0.35355339059327373)).norm() < 1e-14);
        assert_eq!(m.entries[0][1], m.entries[1][0]);
        assert!(m.entries[0][1].norm() < 1e-16);
        assert!(matches!(matrix_m(c(1.0, 1.0), c(1.0, 1.0), z, 0.0), Err(Error::WronskianDegeneracy { .. })));
    }

    #[test]
    fn bessel_matrix_corner() {
        let cfg = SolverConfig::default();
        let model = catalog("bessel", &CatalogParams::default().gamma(1.5)).unwrap();
        let z = c(2.0, 0.5);
        let (mat, _) = model_matrix_m(&model, 1.0, z, &cfg).unwrap();
        let w = z.sqrt();
        let expect = c(0.0, PI / 2.0) * bessel_j(1.5, w).unwrap() * hankel1(1.5, w).unwrap();
        assert!((mat.entries[0][0] - expect).norm() < 1e-8 * expect.norm());
        // Im M is positive semidefinite
        let im = mat.imag();
        assert!(im[0][0] > 0.0 && im[1][1] > 0.0 && im[0][0] * im[1][1] - im[0][1] * im[1][0] > -1e-10);
    }

    #[test]
    fn green_functions_match_closed_forms() {
        let cfg = SolverConfig::default();
        let z = c(1.0, 0.7);
        for name in ["free_halfline", "free_line", "bessel"] {
            let model = catalog(name, &CatalogParams::default().gamma(2.5)).unwrap();
            let o = model.oracle.unwrap();
            for (x, xp) in [(0.7, 1.9), (2.5, 1.2), (1.0, 1.0)] {
                let g = greens_function(&model, z, x, xp, &cfg).unwrap();
                let e = o.green(z, x, xp).unwrap();
                assert!((g - e).norm() < 1e-8 * e.norm(), "{name} ({x},{xp}): {g} vs {e}");
            }
            let g12 = greens_function(&model, z, 1.0, 2.0, &cfg).unwrap();
            let g21 = greens_function(&model, z, 2.0, 1.0, &cfg).unwrap();
            assert!((g12 - g21).norm() < 1e-10 * g12.norm());
        }
    }

    #[test]
    fn resolvent_of_indicator_on_free_halfline() {
        let cfg = SolverConfig::default();
        let model = catalog("free_halfline", &CatalogParams::default()).unwrap();
        let z = c(0.0, 1.0);
        let k = z.sqrt();
        let i = c(0.0, 1.0);
        let xs = [0.5, 1.0, 1.3, 1.7, 2.0, 3.0];
        let r = resolvent_apply(&model, z, |_| ONE, (1.0, 2.0), &xs, &cfg).unwrap();
        for (x, g) in xs.iter().zip(&r.values) {
            let x = *x;
            // closed-form integrals of sin(k x<) e^{i k x>} / k against the indicator of [1, 2]
            let left = |u: f64, v: f64| ((k * u).cos() - (k * v).cos()) / (k * k); // int_u^v sin(k t)/k
            let right = |u: f64, v: f64| ((i * k * v).exp() - (i * k * u).exp()) / (i * k * k); // int_u^v e^{ikt}/k
            let expect = if x <= 1.0 {
                (k * x).sin() * right(1.0, 2.0)
            } else if x >= 2.0 {
                (i * k * x).exp() * left(1.0, 2.0)
            } else {
                (i * k * x).exp() * left(1.0, x) + (k * x).sin() * right(x, 2.0)
            };
            assert!((g - expect).norm() < 1e-9, "x={x}: {g} vs {expect}");
        }
        let zero = resolvent_apply(&model, z, |_| C::new(0.0, 0.0), (1.0, 2.0), &xs, &cfg).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));
    }
}
