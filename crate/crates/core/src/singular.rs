//! Solutions at a strongly singular left endpoint (x = 0): the regular
//! solution phi~ from its Volterra equation, the factorized construction for
//! potentials V = f''/f + f^-4 + vtilde, and the companion theta~.
//!
//! Both Volterra equations are solved for g = phi~ / (leading behaviour), so
//! the singular power or exponential weights never enter a quadrature rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ivp::{fundamental_system_interior, solve_linear, IntegratorConfig};
use crate::models::{Expr, Oracle, PotentialModel, ScalarFn, SingularStructure};
use crate::quad::{self, PanelGrid, PANEL_NODES};
use crate::specialfn::gamma_real;

type C = Complex64;

/// Iteration cap of the successive approximations.
pub const MAX_VOLTERRA_TERMS: usize = 40;
const ENVELOPE_STOP: f64 = 1e-14;
const TERM_STOP: f64 = 1e-16;

/// How the Bessel-type phi~ is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiNormalization {
    /// phi~ = x^{1/2 + gamma} (1 + o(1)) as x -> 0.
    Volterra,
    /// phi~ = z^{-gamma/2} x^{1/2} J_gamma(z^{1/2} x) for the pure Bessel potential.
    Hankel,
    /// The normalization that carries the constant C, matching the closed
    /// Bessel m-function.
    Model,
}

/// Factor converting the Volterra normalization into `norm`.
pub fn bessel_phi_scale(gamma: f64, c: f64, norm: PhiNormalization) -> Result<f64> {
    let hankel = 2f64.powf(-gamma) / gamma_real(1.0 + gamma)?;
    Ok(match norm {
        PhiNormalization::Volterra => 1.0,
        PhiNormalization::Hankel => hankel,
        PhiNormalization::Model => {
            if gamma.fract() == 0.0 {
                PI / 2.0 / c * hankel
            } else {
                PI / (2.0 * (PI * gamma).sin()) / c * hankel
            }
        }
    })
}

/// Diagnostics of the successive approximations.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSeries {
    pub z: C,
    /// Point at which the diagnostics refer (largest requested x).
    pub x: f64,
    pub terms_used: usize,
    /// |phi~_k(x)| for every computed term.
    pub term_norms: Vec<f64>,
    /// The a-priori bound on |phi~_k(x)|.
    pub envelopes: Vec<f64>,
    /// Bound on the omitted remainder relative to |phi~(x)|.
    pub remainder_bound: f64,
    pub converged_by_envelope: bool,
}

fn check_points(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("no evaluation points".into()));
    }
    for &x in xs {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::SingularEndpoint(x));
        }
    }
    Ok(())
}

/// Breakpoints: 0, a geometric ladder below the smallest requested point,
/// every requested point, refined to `max_len`.
fn graded_breaks(xs: &[f64], levels: usize, max_len: f64) -> Vec<f64> {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut pts = vec![0.0];
    for j in (1..=levels).rev() {
        pts.push(lo * 0.5f64.powi(j as i32));
    }
    pts.extend_from_slice(xs);
    let pts = quad::merge_breaks(pts);
    quad::refine_breaks(&pts, max_len)
}

fn break_index(breaks: &[f64], x: f64) -> usize {
    breaks
        .iter()
        .position(|&b| (b - x).abs() <= 1e-14 * x.abs())
        .expect("evaluation point is a breakpoint")
}

/// phi~(z, x) and phi~'(z, x) for V = (gamma^2 - 1/4)/x^2 + vtilde in the
/// Volterra normalization, at every point of `xs`.
///
/// Writing phi~ = x^{1/2+gamma} g, the Volterra equation becomes
/// g(x) = 1 + (2 gamma)^-1 int_0^x t [1 - (t/x)^{2 gamma}] (vtilde - z) g dt,
/// whose kernel is bounded. The terms of the successive approximations obey
/// |phi~_k| <= x^{1/2+gamma} (gamma^-1 int_0^x t |vtilde - z| dt)^k / k!.
pub fn volterra_phi_tilde(
    gamma: f64,
    vtilde: Option<&ScalarFn>,
    z: C,
    xs: &[f64],
) -> Result<(Vec<(C, C)>, VolterraSeries)> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    check_points(xs)?;
    let levels = ((600.0 / (2.0 * gamma * 2f64.ln())) as usize).min(40);
    let x_hi = xs.iter().cloned().fold(0.0, f64::max);
    let max_len = (0.25 / z.norm().sqrt().max(1e-300)).min(0.25 * x_hi.max(1.0)).max(1e-3);
    let grid = PanelGrid::new(graded_breaks(xs, levels, max_len));
    let u: Vec<C> = grid
        .nodes
        .iter()
        .map(|&t| C::new(vtilde.map_or(0.0, |v| v(t)), 0.0) - z)
        .collect();
    let two_g = 2.0 * gamma;
    let w_a: Vec<C> = grid.nodes.iter().zip(&u).map(|(&t, &u)| u * t).collect();
    let w_b: Vec<C> = grid.nodes.iter().zip(&u).map(|(&t, &u)| u * t.powf(1.0 + two_g)).collect();
    let abs_u: Vec<f64> = grid.nodes.iter().zip(&u).map(|(&t, u)| t * u.norm()).collect();
    let (_, i_abs) = grid.cumulative(&abs_u);

    let targets: Vec<usize> = xs.iter().map(|&x| break_index(&grid.breaks, x)).collect();
    let mut g_nodes = vec![C::new(1.0, 0.0); grid.nodes.len()];
    let mut sum_g: Vec<C> = vec![C::new(1.0, 0.0); xs.len()];
    let mut sum_dg: Vec<C> = vec![C::new(0.0, 0.0); xs.len()];

    let hi_idx = xs.iter().enumerate().fold(0, |acc, (i, &x)| if x > xs[acc] { i } else { acc });
    let lead_hi = x_hi.powf(0.5 + gamma);
    let bound_hi = i_abs[targets[hi_idx]] / gamma;
    let mut term_norms = vec![lead_hi];
    let mut envelopes = vec![lead_hi];
    let mut small_streak = vec![0usize; xs.len()];
    let mut env_ok = false;
    let mut converged = false;
    let mut kfact = 1.0;
    let mut k = 0;
    while k < MAX_VOLTERRA_TERMS {
        k += 1;
        kfact *= k as f64;
        let fa: Vec<C> = w_a.iter().zip(&g_nodes).map(|(w, g)| w * g).collect();
        let fb: Vec<C> = w_b.iter().zip(&g_nodes).map(|(w, g)| w * g).collect();
        let (a_nodes, a_breaks) = grid.cumulative(&fa);
        let (b_nodes, b_breaks) = grid.cumulative(&fb);
        for (i, &t) in grid.nodes.iter().enumerate() {
            g_nodes[i] = (a_nodes[i] - b_nodes[i] * t.powf(-two_g)) / two_g;
        }
        let mut all_small = true;
        let mut all_env = true;
        for (j, &bi) in targets.iter().enumerate() {
            let x = grid.breaks[bi];
            let gk = (a_breaks[bi] - b_breaks[bi] * x.powf(-two_g)) / two_g;
            let dgk = b_breaks[bi] * x.powf(-two_g - 1.0);
            sum_g[j] += gk;
            sum_dg[j] += dgk;
            let env = (i_abs[bi] / gamma).powi(k as i32) / kfact;
            if env > ENVELOPE_STOP * sum_g[j].norm() {
                all_env = false;
            }
            if gk.norm() <= TERM_STOP * sum_g[j].norm() {
                small_streak[j] += 1;
            } else {
                small_streak[j] = 0;
            }
            if small_streak[j] < 3 {
                all_small = false;
            }
            if j == hi_idx {
                term_norms.push(lead_hi * gk.norm());
                envelopes.push(lead_hi * bound_hi.powi(k as i32) / kfact);
            }
        }
        if all_env {
            env_ok = true;
            converged = true;
            break;
        }
        if all_small {
            converged = true;
            break;
        }
    }
    // tail of the exponential series beyond the last term
    let remainder = {
        let mut r = 0.0;
        let mut t = bound_hi.powi(k as i32) / kfact;
        for j in (k + 1)..(k + 200) {
            t *= bound_hi / j as f64;
            r += t;
            if t < 1e-18 * r {
                break;
            }
        }
        r / sum_g[hi_idx].norm().max(1e-300)
    };
    if !converged {
        return Err(Error::Convergence {
            what: format!("volterra series for phi~ at x = {x_hi}, z = {z}"),
            achieved: remainder,
        });
    }
    let frames = xs
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let lead = x.powf(0.5 + gamma);
            let val = sum_g[j] * lead;
            let der = sum_g[j] * ((0.5 + gamma) * x.powf(gamma - 0.5)) + sum_dg[j] * lead;
            (val, der)
        })
        .collect();
    Ok((
        frames,
        VolterraSeries {
            z,
            x: x_hi,
            terms_used: k,
            term_norms,
            envelopes,
            remainder_bound: if env_ok { remainder } else { remainder.min(1e-13) },
            converged_by_envelope: env_ok,
        },
    ))
}

/// V = f''/f + f^-4 + vtilde on (0, inf), with x0 the reference point of
/// the exponential factors.
#[derive(Clone)]
pub struct FactorizedPotential {
    pub f: ScalarFn,
    pub df: ScalarFn,
    pub d2f: ScalarFn,
    pub vtilde: ScalarFn,
    pub x0: f64,
}

impl fmt::Debug for FactorizedPotential {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("FactorizedPotential").field("x0", &self.x0).finish()
    }
}

impl FactorizedPotential {
    pub fn new(f: ScalarFn, df: ScalarFn, d2f: ScalarFn, vtilde: ScalarFn, x0: f64) -> Result<Self> {
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::Model(format!("reference point must be positive, got {x0}")));
        }
        let fp = FactorizedPotential { f, df, d2f, vtilde, x0 };
        for x in [1e-6 * x0, 0.5 * x0, x0, 2.0 * x0] {
            let v = (fp.f)(x);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Model(format!("f must be positive on (0, inf); f({x}) = {v}")));
            }
        }
        // f in L^2 and f^2 vtilde in L^1 near 0
        let (l2, _) = quad::tanh_sinh(|t: f64| Ok((fp.f)(t).powi(2)), 0.0, x0, 1e-8)?;
        let (l1, _) = quad::tanh_sinh(|t: f64| Ok(((fp.f)(t).powi(2) * (fp.vtilde)(t)).abs()), 0.0, x0, 1e-8)?;
        if !(l2.is_finite() && l1.is_finite()) {
            return Err(Error::Model("f must be square integrable and f^2 vtilde integrable near 0".into()));
        }
        Ok(fp)
    }

    /// f and vtilde as expressions; derivatives of f are taken symbolically.
    pub fn from_expressions(f: &str, vtilde: &str, x0: f64) -> Result<Self> {
        let fe = Expr::parse(f)?;
        let d1 = fe.derivative();
        let d2 = d1.derivative();
        let ve = Expr::parse(vtilde)?;
        FactorizedPotential::new(
            Arc::new(move |x| fe.eval(x)),
            Arc::new(move |x| d1.eval(x)),
            Arc::new(move |x| d2.eval(x)),
            Arc::new(move |x| ve.eval(x)),
            x0,
        )
    }

    pub fn potential(&self) -> ScalarFn {
        let fp = self.clone();
        Arc::new(move |x| {
            let f = (fp.f)(x);
            (fp.d2f)(x) / f + f.powi(-4) + (fp.vtilde)(x)
        })
    }

    /// int_x^{x0} f^-2 (negative for x > x0).
    fn exponent(&self, x: f64) -> Result<f64> {
        let (lo, hi, sign) = if x <= self.x0 { (x, self.x0, 1.0) } else { (self.x0, x, -1.0) };
        if lo == hi {
            return Ok(0.0);
        }
        let f = &self.f;
        let brk = quad::merge_breaks([lo, (lo * hi).sqrt().max(lo), hi]);
        let (v, _) = quad::adaptive(|t: f64| Ok(f(t).powi(-2)), &brk, quad::QuadTol::default())?;
        Ok(sign * v)
    }

    /// (eta_+, eta_+', eta_-, eta_-') at x, with
    /// eta_+- = 2^{-1/2} f exp(+- int_x^{x0} f^-2), so W(eta_+, eta_-) = 1.
    pub fn eta_pair(&self, x: f64) -> Result<[f64; 4]> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::SingularEndpoint(x));
        }
        let s = self.exponent(x)?;
        if s.abs() > 700.0 {
            return Err(Error::UnsupportedRegime(format!(
                "int_x^x0 f^-2 = {s:.1} at x = {x}: exp(+-) overflows; evaluate ratios instead"
            )));
        }
        let f = (self.f)(x);
        let df = (self.df)(x);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (ep, em) = (s.exp(), (-s).exp());
        Ok([r * f * ep, r * (df - 1.0 / f) * ep, r * f * em, r * (df + 1.0 / f) * em])
    }
}

/// Regular solution phi~ for a factorized potential, normalized as
/// eta_-(x) (1 + o(1)) near 0, at every point of `xs`, with diagnostics.
///
/// With phi~ = eta_- g the Volterra equation reads
/// g(x) = 1 + int_0^x (f^2/2) [1 - R(t, x)^2] (vtilde - z) g dt,
/// R(t, x) = exp(-int_t^x f^-2) <= 1.
pub fn factorized_phi_tilde(fp: &FactorizedPotential, z: C, xs: &[f64]) -> Result<(Vec<(C, C)>, VolterraSeries)> {
    check_points(xs)?;
    let x_hi = xs.iter().cloned().fold(0.0, f64::max);
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let finv2 = |t: f64| (fp.f)(t).powi(-2);
    // geometric ladder, each rung split until the exponent changes by <= 1
    // across a panel, or left whole when it changes so fast that the
    // boundary-layer approximation applies
    let mut pts = vec![];
    let mut hi = x_lo;
    for _ in 0..45 {
        let lo = hi * 0.5;
        let (d, _) = quad::adaptive(|t: f64| Ok(finv2(t)), &[lo, hi], quad::QuadTol::default())?;
        let pieces = d.ceil().max(1.0);
        if pieces <= 64.0 {
            for k in 0..pieces as usize {
                pts.push(lo + (hi - lo) * k as f64 / pieces);
            }
        } else {
            pts.push(lo);
        }
        hi = lo;
    }
    pts.extend_from_slice(xs);
    let x_first = pts.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_len = (0.25 / z.norm().sqrt().max(1e-300)).min(0.25 * x_hi.max(1.0)).max(1e-3);
    let mut breaks = quad::refine_breaks(&quad::merge_breaks(pts), max_len);
    // refine panels in [x_lo, x_hi] where the exponent varies by more than 1
    let mut refined = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (d, _) = quad::adaptive(|t: f64| Ok(finv2(t)), &[w[0], w[1]], quad::QuadTol::default())?;
        let pieces = if d > 1.0 && d <= 64.0 { d.ceil() as usize } else { 1 };
        for k in 1..=pieces {
            refined.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
        }
    }
    breaks = refined;
    let grid = PanelGrid::new(breaks);
    let nodes = &grid.nodes;
    let f2: Vec<f64> = nodes.iter().map(|&t| (fp.f)(t).powi(2)).collect();
    let u: Vec<C> = nodes.iter().map(|&t| C::new((fp.vtilde)(t), 0.0) - z).collect();
    // F(t) = -int_t^{x_hi} f^-2 at nodes and breaks
    let fi: Vec<f64> = nodes.iter().map(|&t| finv2(t)).collect();
    let (fn_r, fb_r) = grid.cumulative_from_right(&fi);
    let big_f: Vec<f64> = fn_r.iter().map(|v| -v).collect();
    let big_fb: Vec<f64> = fb_r.iter().map(|v| -v).collect();
    // head: int_0^{x_first} (f^2/2) (vtilde - z) dt with g ~ 1
    let (head_v, _) = quad::tanh_sinh(|t: f64| Ok((fp.f)(t).powi(2) / 2.0 * (fp.vtilde)(t)), 0.0, x_first, 1e-10)?;
    let (head_f2, _) = quad::tanh_sinh(|t: f64| Ok((fp.f)(t).powi(2) / 2.0), 0.0, x_first, 1e-10)?;
    let head = C::new(head_v, 0.0) - z * head_f2;
    let (head_abs, _) = quad::tanh_sinh(
        |t: f64| Ok((fp.f)(t).powi(2) / 2.0 * (C::new((fp.vtilde)(t), 0.0) - z).norm()),
        0.0,
        x_first,
        1e-10,
    )?;
    let abs_w: Vec<f64> = f2.iter().zip(&u).map(|(f2, u)| f2 / 2.0 * u.norm()).collect();
    let (_, i_abs_b) = grid.cumulative(&abs_w);
    let targets: Vec<usize> = xs.iter().map(|&x| break_index(&grid.breaks, x)).collect();
    let s = crate::quad::gauss16();
    let smat = integration_matrix_rows();

    let n_panels = grid.panel_count();
    let mut g_nodes = vec![C::new(1.0, 0.0); nodes.len()];
    let mut sum_g = vec![C::new(1.0, 0.0); xs.len()];
    let mut sum_dg = vec![C::new(0.0, 0.0); xs.len()];
    let hi_idx = xs.iter().enumerate().fold(0, |acc, (i, &x)| if x > xs[acc] { i } else { acc });
    let bound_hi = head_abs + i_abs_b[targets[hi_idx]];
    let mut term_norms = vec![1.0];
    let mut envelopes = vec![1.0];
    let mut small_streak = vec![0usize; xs.len()];
    let mut env_ok = false;
    let mut converged = false;
    let mut kfact = 1.0;
    let mut k = 0;
    let mut g_first = C::new(1.0, 0.0);
    while k < MAX_VOLTERRA_TERMS {
        k += 1;
        kfact *= k as f64;
        let h: Vec<C> = (0..nodes.len()).map(|i| u[i] * (f2[i] / 2.0) * g_nodes[i]).collect();
        let (a_nodes, a_breaks) = grid.cumulative(&h);
        let head_k = head * g_first;
        // scaled second integral  Bt(x) = int_0^x h(t) exp(2(F(t) - F(x))) dt
        let mut bt_nodes = vec![C::new(0.0, 0.0); nodes.len()];
        let mut bt_breaks = vec![C::new(0.0, 0.0); grid.breaks.len()];
        let layer0 = f2[0] * f2[0] / 4.0 * u[0] * g_first;
        bt_breaks[0] = if head_k.norm() < layer0.norm() { head_k } else { layer0 };
        for p in 0..n_panels {
            let (x_a, x_b) = (grid.breaks[p], grid.breaks[p + 1]);
            let half = (x_b - x_a) / 2.0;
            let fa = big_fb[p];
            let fb = big_fb[p + 1];
            let start = bt_breaks[p];
            let idx = p * PANEL_NODES..(p + 1) * PANEL_NODES;
            if fb - fa <= 64.0 {
                for (r, i) in idx.clone().enumerate() {
                    let mut acc = C::new(0.0, 0.0);
                    for (cidx, j) in idx.clone().enumerate() {
                        acc += h[j] * (smat[r][cidx] * (2.0 * (big_f[j] - big_f[i])).exp());
                    }
                    bt_nodes[i] = start * (-2.0 * (big_f[i] - fa)).exp() + acc * half;
                }
                let mut acc = C::new(0.0, 0.0);
                for (cidx, j) in idx.clone().enumerate() {
                    acc += h[j] * (s.weights[cidx] * (2.0 * (big_f[j] - fb)).exp());
                }
                bt_breaks[p + 1] = start * (-2.0 * (fb - fa)).exp() + acc * half;
            } else {
                // boundary layer: Bt(x) ~ h(x) f(x)^2 / 2
                for i in idx.clone() {
                    bt_nodes[i] = h[i] * (f2[i] / 2.0) + start * (-2.0 * (big_f[i] - fa)).exp();
                }
                let last = idx.end - 1;
                bt_breaks[p + 1] = h[last] * (f2[last] / 2.0) + start * (-2.0 * (fb - fa)).exp();
            }
        }
        for i in 0..nodes.len() {
            g_nodes[i] = head_k + a_nodes[i] - bt_nodes[i];
        }
        g_first = g_nodes[0];
        let mut all_small = true;
        let mut all_env = true;
        for (j, &bi) in targets.iter().enumerate() {
            let x = grid.breaks[bi];
            let gk = head_k + a_breaks[bi] - bt_breaks[bi];
            let dgk = bt_breaks[bi] * (2.0 * finv2(x));
            sum_g[j] += gk;
            sum_dg[j] += dgk;
            let env = (head_abs + i_abs_b[bi]).powi(k as i32) / kfact;
            if env > ENVELOPE_STOP * sum_g[j].norm() {
                all_env = false;
            }
            if gk.norm() <= TERM_STOP * sum_g[j].norm() {
                small_streak[j] += 1;
            } else {
                small_streak[j] = 0;
            }
            if small_streak[j] < 3 {
                all_small = false;
            }
            if j == hi_idx {
                term_norms.push(gk.norm());
                envelopes.push(bound_hi.powi(k as i32) / kfact);
            }
        }
        if all_env || all_small {
            env_ok = all_env;
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence { what: format!("factorized volterra series at z = {z}"), achieved: *envelopes.last().unwrap() });
    }
    let mut frames = Vec::with_capacity(xs.len());
    for (j, &x) in xs.iter().enumerate() {
        let e = fp.eta_pair(x)?;
        let (em, dem) = (e[2], e[3]);
        frames.push((sum_g[j] * em, sum_g[j] * dem + sum_dg[j] * em));
    }
    let rem = bound_hi.powi(k as i32 + 1) / (kfact * (k + 1) as f64);
    Ok((
        frames,
        VolterraSeries {
            z,
            x: x_hi,
            terms_used: k,
            term_norms,
            envelopes,
            remainder_bound: rem / sum_g[hi_idx].norm().max(1e-300),
            converged_by_envelope: env_ok,
        },
    ))
}

fn integration_matrix_rows() -> Vec<Vec<f64>> {
    // rows of the cumulative integration matrix on [-1, 1], recovered from the
    // panel grid machinery by integrating the Lagrange basis
    let grid = PanelGrid::new(vec![-1.0, 1.0]);
    let mut rows = vec![vec![0.0; PANEL_NODES]; PANEL_NODES];
    for j in 0..PANEL_NODES {
        let mut e = vec![0.0; PANEL_NODES];
        e[j] = 1.0;
        let (cum, _) = grid.cumulative(&e);
        for i in 0..PANEL_NODES {
            rows[i][j] = cum[i];
        }
    }
    rows
}

/// Largest x at which phi~ is taken from the Volterra series directly; the
/// rest of the way is integrated as an initial value problem.
fn volterra_reach(z: C, x0: f64) -> f64 {
    (2.0 / z.norm().sqrt().max(1e-300)).min(x0.max(0.5))
}

/// phi~ frames (value, x-derivative) of a singular model at the points
/// `xs`, scaled to `norm` for Bessel-type endpoints.
pub fn phi_tilde_frames(
    model: &PotentialModel,
    z: C,
    xs: &[f64],
    norm: PhiNormalization,
    cfg: &IntegratorConfig,
) -> Result<Vec<(C, C)>> {
    check_points(xs)?;
    let structure = model
        .singular
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("model '{}' has no singular endpoint", model.name)))?;
    let reach = volterra_reach(z, model.x0);
    let mut near: Vec<f64> = xs.iter().cloned().filter(|&x| x <= reach).collect();
    let far: Vec<(usize, f64)> = xs.iter().cloned().enumerate().filter(|&(_, x)| x > reach).collect();
    if !far.is_empty() {
        near.push(reach);
    }
    let near = quad::merge_breaks(near);
    let (near_frames, scale) = match structure {
        SingularStructure::Bessel { gamma, vtilde } => {
            let (fr, _) = volterra_phi_tilde(*gamma, vtilde.as_ref(), z, &near)?;
            (fr, bessel_phi_scale(*gamma, model.normalization_c, norm)?)
        }
        SingularStructure::Factorized(fp) => {
            if norm != PhiNormalization::Volterra {
                return Err(Error::InvalidParameter("factorized endpoints only have the eta_- normalization".into()));
            }
            (factorized_phi_tilde(fp, z, &near)?.0, 1.0)
        }
    };
    let mut out = vec![(C::new(0.0, 0.0), C::new(0.0, 0.0)); xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        if x <= reach {
            let k = near.iter().position(|&p| p == x).unwrap();
            out[i] = near_frames[k];
        }
    }
    if !far.is_empty() {
        let start = near_frames[near.len() - 1];
        let mut order: Vec<(usize, f64)> = far;
        order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let pts: Vec<f64> = order.iter().map(|p| p.1).collect();
        let vals = solve_linear(model, z, reach, start, &pts, cfg)?;
        for ((i, _), v) in order.iter().zip(vals) {
            out[*i] = v;
        }
    }
    Ok(out.into_iter().map(|(a, b)| (a * scale, b * scale)).collect())
}

/// theta~ built from phi~ at the reference point x0:
/// theta~ = [phi~'(x0) theta(., x0) - phi~(x0) phi(., x0)] / (phi~(x0)^2 + phi~'(x0)^2).
pub fn theta_tilde(
    model: &PotentialModel,
    z: C,
    x0: f64,
    phi_x0: (C, C),
    xs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<(C, C)>> {
    let denom = phi_x0.0 * phi_x0.0 + phi_x0.1 * phi_x0.1;
    let scale = phi_x0.0.norm_sqr() + phi_x0.1.norm_sqr();
    if denom.norm() < 1e-12 * scale.max(1e-300) || denom.norm() < 1e-300 {
        return Err(Error::ReferenceDegeneracy { x0, denom: denom.norm() });
    }
    let fs = fundamental_system_interior(model, x0, z, xs, cfg)?;
    Ok(fs
        .frames
        .iter()
        .map(|f| {
            (
                (phi_x0.1 * f.theta - phi_x0.0 * f.phi) / denom,
                (phi_x0.1 * f.dtheta - phi_x0.0 * f.dphi) / denom,
            )
        })
        .collect())
}

/// Choice of the companion solution theta~ with W(theta~, phi~) = 1.
/// Different choices shift the singular m-function by a real entire
/// function and leave its measure unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Companion {
    /// theta~ normalized at the reference point x0.
    ReferencePoint { x0: f64 },
    /// The closed-form companion of the catalog family (Bessel only).
    Model,
    /// `Model` when the family has one, otherwise the model's reference point.
    Auto,
}

impl Companion {
    pub fn resolve(self, model: &PotentialModel) -> Result<Companion> {
        match self {
            Companion::Auto => Ok(match model.oracle {
                Some(Oracle::Bessel { .. }) => Companion::Model,
                _ => Companion::ReferencePoint { x0: model.x0 },
            }),
            Companion::Model => match model.oracle {
                Some(Oracle::Bessel { .. }) => Ok(Companion::Model),
                _ => Err(Error::InvalidParameter(format!("model '{}' has no closed-form companion", model.name))),
            },
            other => Ok(other),
        }
    }
}

/// The frames of phi~ (in `norm`) and of the chosen companion at `xs`.
pub fn singular_frames(
    model: &PotentialModel,
    z: C,
    xs: &[f64],
    norm: PhiNormalization,
    companion: Companion,
    cfg: &IntegratorConfig,
) -> Result<(Vec<(C, C)>, Vec<(C, C)>)> {
    let companion = companion.resolve(model)?;
    match companion {
        Companion::Model => {
            if norm != PhiNormalization::Model {
                return Err(Error::InvalidParameter("the closed-form companion pairs with the model normalization".into()));
            }
            let oracle = model.oracle.unwrap();
            let phi = phi_tilde_frames(model, z, xs, norm, cfg)?;
            let theta = xs.iter().map(|&x| oracle.theta(z, x)).collect::<Result<Vec<_>>>()?;
            Ok((phi, theta))
        }
        Companion::ReferencePoint { x0 } => {
            let mut pts = xs.to_vec();
            pts.push(x0);
            let all = phi_tilde_frames(model, z, &pts, norm, cfg)?;
            let phi_x0 = all[xs.len()];
            let theta = theta_tilde(model, z, x0, phi_x0, xs, cfg)?;
            Ok((all[..xs.len()].to_vec(), theta))
        }
        Companion::Auto => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{catalog, CatalogParams};
    use crate::specialfn::{entire_bessel_frame, BesselOrder, Sign};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn volterra_matches_bessel_series() {
        for gamma in [1.0, 1.5, 2.5, 3.0] {
            let order = BesselOrder::new(gamma).unwrap();
            let scale = 2f64.powf(gamma) * gamma_real(1.0 + gamma).unwrap();
            for z in [c(1.0, 1.0), c(-3.0, 0.5), c(10.0, 0.0)] {
                let xs = [0.1, 0.5, 1.0];
                let (fr, info) = volterra_phi_tilde(gamma, None, z, &xs).unwrap();
                for (x, (v, d)) in xs.iter().zip(fr) {
                    let (ev, ed) = entire_bessel_frame(Sign::Plus, order, z, *x).unwrap();
                    assert!((v - ev * scale).norm() < 1e-12 * (ev * scale).norm(), "gamma={gamma} z={z} x={x}");
                    assert!((d - ed * scale).norm() < 1e-11 * (ed * scale).norm());
                }
                for (t, e) in info.term_norms.iter().zip(&info.envelopes) {
                    assert!(*t <= e * (1.0 + 1e-12) + 1e-300);
                }
            }
        }
    }

    #[test]
    fn volterra_at_zero_energy_is_the_power() {
        let (fr, _) = volterra_phi_tilde(1.5, None, c(0.0, 0.0), &[0.7]).unwrap();
        assert!((fr[0].0 - c(0.7f64.powf(2.0), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn factorized_construction_reduces_to_bessel() {
        let gamma = 1.5;
        let fp = FactorizedPotential::new(
            Arc::new(move |x| (x / gamma).sqrt()),
            Arc::new(move |x| 0.5 / (x * gamma).sqrt()),
            Arc::new(move |x| -0.25 / (gamma.sqrt() * x.powf(1.5))),
            Arc::new(|_| 0.0),
            1.0,
        )
        .unwrap();
        // f''/f + f^-4 = (gamma^2 - 1/4)/x^2
        let v = fp.potential();
        assert!((v(0.7) - (gamma * gamma - 0.25) / 0.49).abs() < 1e-12);
        let z = c(2.0, 0.5);
        let xs = [0.25, 0.5, 1.0];
        let (a, _) = factorized_phi_tilde(&fp, z, &xs).unwrap();
        let (b, _) = volterra_phi_tilde(gamma, None, z, &xs).unwrap();
        let ratio = a[0].0 / b[0].0;
        assert!(ratio.im.abs() < 1e-10 * ratio.norm());
        for (p, q) in a.iter().zip(&b) {
            assert!((p.0 / q.0 - ratio).norm() < 1e-9 * ratio.norm());
            assert!((p.1 / q.1 - ratio).norm() < 1e-9 * ratio.norm());
        }
    }

    #[test]
    fn eta_pair_wronskian() {
        let fp = FactorizedPotential::from_expressions("x^0.75", "3/(16*x^2)", 1.0).unwrap();
        for x in [0.05, 0.3, 1.0, 4.0] {
            let e = fp.eta_pair(x).unwrap();
            let w = e[0] * e[3] - e[1] * e[2];
            assert!((w - 1.0).abs() < 1e-12, "x={x}: {w}");
        }
        // f = x^{3/4} with vtilde = -f''/f gives V = x^-3
        let v = fp.potential();
        assert!((v(0.4) - 0.4f64.powi(-3)).abs() < 1e-10 * 0.4f64.powi(-3));
        assert!(fp.eta_pair(1e-6).is_err());
    }

    #[test]
    fn theta_tilde_has_unit_wronskian() {
        let model = catalog("perturbed_bessel", &CatalogParams::default().gamma(1.5).vtilde(|x| (-x).exp())).unwrap();
        let z = c(1.0, 0.4);
        let cfg = IntegratorConfig::default();
        let xs = [0.5, 1.0, 2.0];
        let (phi, theta) = singular_frames(&model, z, &xs, PhiNormalization::Model, Companion::Auto, &cfg).unwrap();
        for (p, t) in phi.iter().zip(&theta) {
            let w = t.0 * p.1 - t.1 * p.0;
            assert!((w - 1.0).norm() < 1e-8, "{w}");
        }
    }

    #[test]
    fn phi_tilde_ode_continuation_matches_closed_form() {
        let model = catalog("bessel", &CatalogParams::default().gamma(2.5)).unwrap();
        let oracle = model.oracle.unwrap();
        let z = c(16.0, 0.3);
        let xs = [0.2, 0.9, 3.0, 6.0];
        let fr = phi_tilde_frames(&model, z, &xs, PhiNormalization::Model, &IntegratorConfig::default()).unwrap();
        for (x, (v, d)) in xs.iter().zip(fr) {
            let (ev, ed) = oracle.phi(z, *x).unwrap();
            assert!((v - ev).norm() < 1e-8 * ev.norm(), "x={x}: {v} vs {ev}");
            assert!((d - ed).norm() < 1e-8 * ed.norm());
        }
    }
}
