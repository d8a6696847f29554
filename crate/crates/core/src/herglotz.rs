//! Boundary values of Herglotz (and Herglotz-like) functions: Stieltjes
//! inversion, densities, point masses, the integral representation and a
//! diagnostic report of the boundary-limit properties.
//!
//! Limits eps -> 0 of m(lambda + i eps) are taken by polynomial (Neville)
//! extrapolation over a geometric schedule of eps values; for functions that
//! continue analytically across the real axis the error is a power series in
//! eps, so this is Richardson extrapolation to all available orders.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, PanelGrid, QuadTol};

type C = Complex64;

/// A boundary function z -> m(z), callable from several threads.
pub type Sampler<'a> = &'a (dyn Fn(C) -> Result<C> + Sync);

/// Decreasing list of eps > 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSchedule(Vec<f64>);

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule(vec![1e-2, 5e-3, 2.5e-3, 1.25e-3])
    }
}

impl EpsSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.len() < 2 {
            return Err(Error::InvalidParameter("an eps schedule needs at least two values".into()));
        }
        if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("eps schedule must be positive and strictly decreasing".into()));
        }
        Ok(EpsSchedule(eps))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn finest(&self) -> f64 {
        *self.0.last().unwrap()
    }
}

/// A limit value with its error estimate and the raw sequence behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub err: f64,
    pub raw: Vec<f64>,
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (-xs[i + k] * p[i] + xs[i] * p[i + 1]) / (xs[i] - xs[i + k]);
        }
    }
    p[0]
}

/// Polynomial extrapolation of ys(eps) to eps = 0. The error estimate is the
/// change when the coarsest point is dropped.
pub fn extrapolate(eps: &[f64], ys: &[f64]) -> Extrapolated {
    assert_eq!(eps.len(), ys.len());
    let full = neville_at_zero(eps, ys);
    let err = if eps.len() > 1 { (full - neville_at_zero(&eps[1..], &ys[1..])).abs() } else { f64::INFINITY };
    Extrapolated { value: full, err, raw: ys.to_vec() }
}

fn samples_along(m: Sampler, lambda: f64, sched: &EpsSchedule) -> Result<Vec<C>> {
    sched.values().par_iter().map(|&e| m(C::new(lambda, e))).collect()
}

/// Does eps Im m(lambda + i eps) fail to vanish as eps -> 0? Returns the
/// estimated mass if so.
fn atom_suspected(m: Sampler, lambda: f64, sched: &EpsSchedule) -> Result<Option<f64>> {
    let v = sched.values();
    let n = v.len();
    let (e1, e2) = (v[n - 2], v[n - 1]);
    let (a, b) = (m(C::new(lambda, e1))?, m(C::new(lambda, e2))?);
    let (y1, y2) = (e1 * a.im, e2 * b.im);
    let r = y1 / y2;
    if y2 > 1e-9 && (0.8..=1.25).contains(&r) {
        Ok(Some(y2))
    } else {
        Ok(None)
    }
}

/// Density pi^-1 Im m(lambda + i0) from the eps schedule.
pub fn ac_density(m: Sampler, lambda: f64, sched: &EpsSchedule) -> Result<Extrapolated> {
    if let Some(mass) = atom_suspected(m, lambda, sched)? {
        return Err(Error::PointMassPresent { lambda, mass });
    }
    let ys: Vec<f64> = samples_along(m, lambda, sched)?.iter().map(|v| v.im / PI).collect();
    let mut ex = extrapolate(sched.values(), &ys);
    if ex.value < -1e-10 - 3.0 * ex.err {
        return Err(Error::Convergence {
            what: format!("density at {lambda} extrapolates to a negative value {:.3e}", ex.value),
            achieved: ex.err,
        });
    }
    ex.value = ex.value.max(0.0);
    Ok(ex)
}

/// Density pi^-1 Im m(lambda + i0) from a sampler that accepts real lambda as
/// the boundary value from above.
pub fn boundary_density(m: Sampler, lambda: f64) -> Result<f64> {
    Ok(m(C::new(lambda, 0.0))?.im / PI)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointMassEstimate {
    pub lambda: f64,
    pub mass: f64,
    pub err: f64,
    /// Extrapolated eps Re m(lambda + i eps); vanishes for a Herglotz function.
    pub eps_re_limit: f64,
}

/// omega({lambda}) = lim eps Im m(lambda + i eps); zero at continuity points.
pub fn point_mass(m: Sampler, lambda: f64, sched: &EpsSchedule) -> Result<PointMassEstimate> {
    let vals = samples_along(m, lambda, sched)?;
    let eps = sched.values();
    let im: Vec<f64> = vals.iter().zip(eps).map(|(v, e)| e * v.im).collect();
    let re: Vec<f64> = vals.iter().zip(eps).map(|(v, e)| e * v.re).collect();
    let ex = extrapolate(eps, &im);
    let re_lim = extrapolate(eps, &re).value;
    let mass = if ex.value.abs() <= 10.0 * ex.err + 1e-12 { 0.0 } else { ex.value };
    Ok(PointMassEstimate { lambda, mass: mass.max(0.0), err: ex.err, eps_re_limit: re_lim })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub lambda1: f64,
    pub lambda2: f64,
    pub value: f64,
    pub err: f64,
    /// pi^-1 int Im m(lambda + i eps) for each eps in the schedule.
    pub per_eps: Vec<f64>,
    /// An atom at an endpoint was split off.
    pub atom_split: bool,
}

fn smeared_measure(m: Sampler, l1: f64, l2: f64, eps: f64, pieces: usize) -> Result<f64> {
    let breaks: Vec<f64> = (0..=pieces).map(|k| l1 + (l2 - l1) * k as f64 / pieces as f64).collect();
    let tol = QuadTol { abs: 1e-13, rel: 1e-10, max_segments: 4000 };
    let (v, _) = quad::adaptive(|l: f64| Ok(m(C::new(l, eps))?.im / PI), &breaks, tol)?;
    Ok(v)
}

fn eps_limit_of_measure(m: Sampler, l1: f64, l2: f64, sched: &EpsSchedule, pieces: usize) -> Result<Extrapolated> {
    let per: Vec<f64> = sched.values().par_iter().map(|&e| smeared_measure(m, l1, l2, e, pieces)).collect::<Result<_>>()?;
    let d: Vec<f64> = per.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    if d.len() >= 2 {
        let (prev, last) = (d[d.len() - 2], d[d.len() - 1]);
        if last > 2.0 * prev + 1e-9 * per.last().unwrap().abs().max(1.0) {
            return Err(Error::Convergence {
                what: format!("measure of ({l1}, {l2}]: eps sequence does not settle"),
                achieved: last,
            });
        }
    }
    Ok(extrapolate(sched.values(), &per))
}

/// The measure of (lambda1, lambda2] by Stieltjes inversion. An atom w at an
/// endpoint lambda_a is split off first: the pole term w/(lambda_a - z) is
/// subtracted from m, the remainder is inverted, and w is added back when the
/// atom lies at the (included) right end.
pub fn stieltjes_inversion(m: Sampler, lambda1: f64, lambda2: f64, sched: &EpsSchedule) -> Result<MeasureEstimate> {
    if !(lambda1.is_finite() && lambda2.is_finite()) || lambda2 < lambda1 {
        return Err(Error::InvalidParameter(format!("bad interval ({lambda1}, {lambda2}]")));
    }
    if lambda1 == lambda2 {
        return Ok(MeasureEstimate {
            lambda1,
            lambda2,
            value: 0.0,
            err: 0.0,
            per_eps: vec![0.0; sched.values().len()],
            atom_split: false,
        });
    }
    let pieces = (((lambda2 - lambda1) / 0.25).ceil() as usize).clamp(4, 64);
    let mut atoms = vec![];
    for l in [lambda1, lambda2] {
        if atom_suspected(m, l, sched)?.is_some() {
            let pm = point_mass(m, l, sched)?;
            atoms.push((l, pm.mass, pm.err));
        }
    }
    if atoms.is_empty() {
        let ex = eps_limit_of_measure(m, lambda1, lambda2, sched, pieces)?;
        return Ok(MeasureEstimate { lambda1, lambda2, value: ex.value, err: ex.err, per_eps: ex.raw, atom_split: false });
    }
    let reduced = |z: C| -> Result<C> {
        let mut v = m(z)?;
        for &(l, w, _) in &atoms {
            v -= w / (l - z);
        }
        Ok(v)
    };
    let ex = eps_limit_of_measure(&reduced, lambda1, lambda2, sched, pieces)?;
    let included: f64 = atoms.iter().filter(|a| a.0 == lambda2).map(|a| a.1).sum();
    let err = ex.err + atoms.iter().map(|a| a.2).sum::<f64>();
    Ok(MeasureEstimate { lambda1, lambda2, value: ex.value + included, err, per_eps: ex.raw, atom_split: true })
}

/// A measure on the real line: a density sampled at quadrature nodes (with
/// the matching weights), atoms, and optionally the 2x2 matrix version.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Quadrature weights belonging to `grid`.
    pub weights: Vec<f64>,
    pub atoms: Vec<(f64, f64)>,
    pub matrix: Option<MatrixDensity>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixDensity {
    pub density: Vec<[[f64; 2]; 2]>,
    pub atoms: Vec<(f64, [[f64; 2]; 2])>,
}

/// Breakpoints on [lo, hi] graded geometrically towards `lo` (useful when
/// the density behaves like a power there), refined to panels of `max_len`.
pub fn graded_window(lo: f64, hi: f64, max_len: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let span = hi - lo;
    for j in 1..=30 {
        pts.push(lo + span.min(1.0) * 0.5f64.powi(j));
    }
    quad::refine_breaks(&quad::merge_breaks(pts), max_len)
}

impl SpectralMeasure {
    /// Density sampled on the Gauss nodes of the given panels.
    pub fn from_density<F>(breaks: Vec<f64>, density: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let grid = PanelGrid::new(breaks);
        let density: Vec<f64> = grid.nodes.par_iter().map(|&l| density(l)).collect::<Result<_>>()?;
        let m = SpectralMeasure { grid: grid.nodes, density, weights: grid.weights, atoms: vec![], matrix: None };
        m.validate()?;
        Ok(m)
    }

    /// 2x2 density on Gauss panels; the scalar density is left at zero.
    pub fn from_matrix_density<F>(breaks: Vec<f64>, density: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<[[f64; 2]; 2]> + Sync,
    {
        let grid = PanelGrid::new(breaks);
        let mats: Vec<[[f64; 2]; 2]> = grid.nodes.par_iter().map(|&l| density(l)).collect::<Result<_>>()?;
        let m = SpectralMeasure {
            density: vec![0.0; grid.nodes.len()],
            grid: grid.nodes,
            weights: grid.weights,
            atoms: vec![],
            matrix: Some(MatrixDensity { density: mats, atoms: vec![] }),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_atom(mut self, lambda: f64, mass: f64) -> Result<Self> {
        if !(mass >= 0.0) {
            return Err(Error::InvalidParameter(format!("atom mass must be nonnegative, got {mass}")));
        }
        self.atoms.push((lambda, mass));
        Ok(self)
    }

    pub fn empty() -> Self {
        SpectralMeasure { grid: vec![], density: vec![], weights: vec![], atoms: vec![], matrix: None }
    }

    /// Nonnegativity (with -1e-10 slack) and, for the matrix part,
    /// nonnegative diagonals and symmetry.
    pub fn validate(&self) -> Result<()> {
        let slack = -1e-10;
        if self.density.iter().any(|&d| !(d >= slack)) || self.atoms.iter().any(|a| !(a.1 >= 0.0)) {
            return Err(Error::InvalidParameter("a spectral measure must be nonnegative".into()));
        }
        if let Some(md) = &self.matrix {
            for w in &md.density {
                if !(w[0][0] >= slack && w[1][1] >= slack) || (w[0][1] - w[1][0]).abs() > 1e-12 * (w[0][1].abs() + 1.0) {
                    return Err(Error::InvalidParameter("matrix density must be symmetric with nonnegative diagonal".into()));
                }
            }
        }
        Ok(())
    }

    /// int g d(omega) over the grid and atoms.
    pub fn integrate<F: Fn(f64) -> C>(&self, g: F) -> C {
        let ac: C = self.grid.iter().zip(&self.density).zip(&self.weights).map(|((&l, &d), &w)| g(l) * (d * w)).sum();
        ac + self.atoms.iter().map(|&(l, m)| g(l) * m).sum::<C>()
    }

    pub fn total(&self) -> f64 {
        self.integrate(|_| C::new(1.0, 0.0)).re
    }
}

/// Density ~ coef * lambda^power beyond `from`, integrated analytically in
/// the representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTail {
    pub coef: f64,
    pub power: f64,
    pub from: f64,
}

impl PowerTail {
    /// int_from^inf coef l^p [1/(l - z) - l/(1 + l^2)] dl by expansion in 1/l;
    /// needs p < 1 and |z|, 1 < from.
    pub fn contribution(&self, z: C) -> Result<C> {
        let lam = self.from;
        if !(self.power < 1.0) || z.norm() >= 0.9 * lam || lam <= 1.1 {
            return Err(Error::UnsupportedRegime(format!(
                "power tail from {lam} with power {} cannot be expanded at z = {z}",
                self.power
            )));
        }
        // (1 + l z) / ((l - z)(1 + l^2)) = (z + u) u^2 sum_n s_n u^n, u = 1/l,
        // s_n = sum_{2i <= n} (-1)^i z^{n - 2i}
        let mut total = C::new(0.0, 0.0);
        let mut zp = vec![C::new(1.0, 0.0)];
        for n in 0..400usize {
            if n > 0 {
                let last = zp[n - 1];
                zp.push(last * z);
            }
            let mut s = C::new(0.0, 0.0);
            let mut i = 0;
            while 2 * i <= n {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                s += zp[n - 2 * i] * sign;
                i += 1;
            }
            let mom = |k: usize| lam.powf(self.power - k as f64 + 1.0) / (k as f64 - self.power - 1.0);
            let term = s * (z * mom(n + 2) + mom(n + 3));
            total += term;
            if n > 4 && term.norm() < 1e-17 * total.norm().max(1e-300) {
                break;
            }
        }
        Ok(total * self.coef)
    }
}

/// m(z) = c + d z + int d(omega)(l) [1/(l - z) - l/(1 + l^2)].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerglotzRepresentation {
    pub c: f64,
    pub d: f64,
    pub measure: SpectralMeasure,
    pub tail: Option<PowerTail>,
}

impl HerglotzRepresentation {
    pub fn new(c: f64, d: f64, measure: SpectralMeasure, tail: Option<PowerTail>) -> Result<Self> {
        if !(d >= 0.0) {
            return Err(Error::InvalidParameter(format!("d must be nonnegative, got {d}")));
        }
        measure.validate()?;
        Ok(HerglotzRepresentation { c, d, measure, tail })
    }

    pub fn eval(&self, z: C) -> Result<C> {
        let kernel = |l: f64| 1.0 / (l - z) - l / (1.0 + l * l);
        let mut v = C::new(self.c, 0.0) + z * self.d + self.measure.integrate(kernel);
        if let Some(t) = &self.tail {
            v += t.contribution(z)?;
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub per_z: Vec<f64>,
    /// Rough size of the part of the measure beyond the represented window,
    /// when no tail is supplied (0 otherwise).
    pub tail_bound: f64,
    pub tail_dominated: bool,
}

pub fn representation_residual(m: Sampler, rep: &HerglotzRepresentation, test_z: &[C]) -> Result<ResidualReport> {
    let per_z: Vec<f64> = test_z.iter().map(|&z| Ok((m(z)? - rep.eval(z)?).norm())).collect::<Result<_>>()?;
    let max_residual = per_z.iter().cloned().fold(0.0, f64::max);
    let tail_bound = match (&rep.tail, rep.measure.grid.last()) {
        (None, Some(&hi)) => {
            let last = *rep.measure.density.last().unwrap();
            let zmax = test_z.iter().map(|z| z.norm()).fold(0.0, f64::max);
            last * (1.0 + zmax) / hi.max(1.0) * hi.max(1.0).ln().max(1.0)
        }
        _ => 0.0,
    };
    Ok(ResidualReport { max_residual, per_z, tail_bound, tail_dominated: tail_bound > max_residual.max(1e-12) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignProfile {
    /// Im m > 0 throughout the sampled upper half-plane.
    Herglotz,
    /// Im m < 0 throughout.
    AntiHerglotz,
    Neither,
}

/// Boundary-limit diagnostics of m on a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub window: (f64, f64),
    /// max |m(conj z) - conj m(z)| / max(1, |m(z)|)
    pub conj_symmetry_max: f64,
    /// max eps |m(lambda + i eps)| on the lattice
    pub max_eps_abs_m: f64,
    /// max over lambda of |lim eps Re m(lambda + i eps)|
    pub eps_re_limit_max: f64,
    /// median observed order p in eps Re m ~ eps^p
    pub eps_re_order: f64,
    /// min over lambda of lim eps Im m(lambda + i eps)
    pub eps_im_limit_min: f64,
    pub increments: Vec<f64>,
    pub increment_errors: Vec<f64>,
    pub measure_nondecreasing: bool,
    pub sign: SignProfile,
    pub positive_samples: usize,
    pub negative_samples: usize,
}

/// Evaluate the boundary-limit properties of m on [lambda1, lambda2]:
/// conjugate symmetry, boundedness of eps|m|, eps Re m -> 0 and its rate,
/// lim eps Im m >= 0, monotonicity of the accumulated measure over
/// `subintervals` pieces, and the sign of Im m on sample points of the
/// upper half-plane.
pub fn property_report(m: Sampler, window: (f64, f64), sched: &EpsSchedule, subintervals: usize) -> Result<PropertyReport> {
    let (l1, l2) = window;
    if !(l1 < l2) || subintervals == 0 {
        return Err(Error::InvalidParameter("property report needs a nonempty window".into()));
    }
    let h = (l2 - l1) / subintervals as f64;
    let lambdas: Vec<f64> = (0..subintervals).map(|k| l1 + (k as f64 + 0.5) * h).collect();
    let eps = sched.values();
    struct Row {
        conj: f64,
        eps_abs: f64,
        re_lim: f64,
        order: Option<f64>,
        im_lim: f64,
    }
    let rows: Vec<Row> = lambdas
        .par_iter()
        .map(|&l| {
            let mut conj: f64 = 0.0;
            let mut eps_abs: f64 = 0.0;
            let mut re = vec![];
            let mut im = vec![];
            for &e in eps {
                let z = C::new(l, e);
                let a = m(z)?;
                let b = m(z.conj())?;
                conj = conj.max((b - a.conj()).norm() / a.norm().max(1.0));
                eps_abs = eps_abs.max(e * a.norm());
                re.push(e * a.re);
                im.push(e * a.im);
            }
            let n = eps.len();
            let order = if re[n - 1].abs() > 1e-14 && re[0].abs() > 1e-14 {
                Some((re[0] / re[n - 1]).abs().ln() / (eps[0] / eps[n - 1]).ln())
            } else {
                None
            };
            Ok(Row {
                conj,
                eps_abs,
                re_lim: extrapolate(eps, &re).value.abs(),
                order,
                im_lim: extrapolate(eps, &im).value,
            })
        })
        .collect::<Result<_>>()?;
    let incs: Vec<MeasureEstimate> = (0..subintervals)
        .into_par_iter()
        .map(|k| stieltjes_inversion(m, l1 + k as f64 * h, l1 + (k + 1) as f64 * h, sched))
        .collect::<Result<_>>()?;
    let mut orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eps_re_order = if orders.is_empty() { f64::NAN } else { orders[orders.len() / 2] };

    // sign of Im m on rays in the upper half-plane
    let scale = l2.abs().max(l1.abs()).max(1.0);
    let mut pts = vec![];
    for r in [0.25, 0.5, 1.0, 2.0] {
        for k in 1..12 {
            pts.push(C::from_polar(r * scale, PI * k as f64 / 12.0));
        }
    }
    let signs: Vec<f64> = pts.par_iter().map(|&z| Ok(m(z)?.im)).collect::<Result<_>>()?;
    let pos = signs.iter().filter(|&&s| s > 0.0).count();
    let neg = signs.iter().filter(|&&s| s < 0.0).count();
    let sign = if neg == 0 && pos > 0 {
        SignProfile::Herglotz
    } else if pos == 0 && neg > 0 {
        SignProfile::AntiHerglotz
    } else {
        SignProfile::Neither
    };
    Ok(PropertyReport {
        window,
        conj_symmetry_max: rows.iter().map(|r| r.conj).fold(0.0, f64::max),
        max_eps_abs_m: rows.iter().map(|r| r.eps_abs).fold(0.0, f64::max),
        eps_re_limit_max: rows.iter().map(|r| r.re_lim).fold(0.0, f64::max),
        eps_re_order,
        eps_im_limit_min: rows.iter().map(|r| r.im_lim).fold(f64::INFINITY, f64::min),
        measure_nondecreasing: incs.iter().all(|i| i.value >= -1e-10 - 3.0 * i.err),
        increments: incs.iter().map(|i| i.value).collect(),
        increment_errors: incs.iter().map(|i| i.err).collect(),
        sign,
        positive_samples: pos,
        negative_samples: neg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::cut_sqrt;

    fn isqrt(z: C) -> Result<C> {
        Ok(C::new(0.0, 1.0) * cut_sqrt(z))
    }

    fn pole(z: C) -> Result<C> {
        Ok(1.0 / (2.0 - z))
    }

    #[test]
    fn extrapolation_is_exact_for_polynomials() {
        let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let ys: Vec<f64> = eps.iter().map(|e| 3.0 - 2.0 * e + 5.0 * e * e).collect();
        let ex = extrapolate(&eps, &ys);
        assert!((ex.value - 3.0).abs() < 1e-13);
    }

    #[test]
    fn free_measure_and_density() {
        let s = EpsSchedule::default();
        let mu = stieltjes_inversion(&isqrt, 0.0, 1.0, &s).unwrap();
        assert!((mu.value - 2.0 / (3.0 * PI)).abs() < 1e-4, "{mu:?}");
        let d = ac_density(&isqrt, 4.0, &s).unwrap();
        assert!((d.value - 2.0 / PI).abs() < 1e-10);
        assert_eq!(ac_density(&isqrt, -1.0, &s).unwrap().value, 0.0);
        assert_eq!(point_mass(&isqrt, 1.0, &s).unwrap().mass, 0.0);
    }

    #[test]
    fn atoms_are_found_and_dodged() {
        let s = EpsSchedule::default();
        let mu = stieltjes_inversion(&pole, 1.0, 3.0, &s).unwrap();
        assert!((mu.value - 1.0).abs() < 1e-8, "{mu:?}");
        let pm = point_mass(&pole, 2.0, &s).unwrap();
        assert!((pm.mass - 1.0).abs() < 1e-10 && pm.eps_re_limit.abs() < 1e-10);
        assert!(matches!(ac_density(&pole, 2.0, &s), Err(Error::PointMassPresent { .. })));
        // atom at the right end is included, at the left end excluded
        let right = stieltjes_inversion(&pole, 1.0, 2.0, &s).unwrap();
        assert!(right.atom_split && (right.value - 1.0).abs() < 1e-8, "{right:?}");
        let left = stieltjes_inversion(&pole, 2.0, 3.0, &s).unwrap();
        assert!(left.value.abs() < 1e-8, "{left:?}");
        assert_eq!(stieltjes_inversion(&pole, 1.5, 1.5, &s).unwrap().value, 0.0);
    }

    #[test]
    fn representation_of_free_m() {
        let lam = 50.0;
        let measure = SpectralMeasure::from_density(graded_window(0.0, lam, 0.25), |l| Ok(l.sqrt() / PI)).unwrap();
        let c = isqrt(C::new(0.0, 1.0)).unwrap().re;
        assert!((c + 0.5f64.sqrt()).abs() < 1e-15);
        let rep = HerglotzRepresentation::new(c, 0.0, measure, Some(PowerTail { coef: 1.0 / PI, power: 0.5, from: lam })).unwrap();
        let zs = [C::new(0.0, 1.0), C::new(1.0, 1.0), C::new(-2.0, 0.5)];
        let r = representation_residual(&isqrt, &rep, &zs).unwrap();
        assert!(r.max_residual < 1e-4, "{r:?}");

        let atom = SpectralMeasure::empty().with_atom(0.7, 1.0).unwrap();
        let rep = HerglotzRepresentation::new(0.7 / (1.0 + 0.49), 0.0, atom, None).unwrap();
        let r = representation_residual(&|z: C| Ok(1.0 / (0.7 - z)), &rep, &zs).unwrap();
        assert!(r.max_residual < 1e-12);
        let rep = HerglotzRepresentation::new(2.5, 0.0, SpectralMeasure::empty(), None).unwrap();
        assert_eq!(representation_residual(&|_| Ok(C::new(2.5, 0.0)), &rep, &zs).unwrap().max_residual, 0.0);
    }

    #[test]
    fn report_on_herglotz_and_anti_herglotz() {
        let s = EpsSchedule::default();
        let r = property_report(&isqrt, (1.0, 4.0), &s, 6).unwrap();
        assert_eq!(r.sign, SignProfile::Herglotz);
        assert!(r.measure_nondecreasing && r.conj_symmetry_max < 1e-14);
        assert!(r.eps_re_limit_max < 1e-10);
        let anti = |z: C| Ok(-C::new(0.0, 1.0) * cut_sqrt(z));
        let r = property_report(&anti, (1.0, 4.0), &s, 3).unwrap();
        assert_eq!(r.sign, SignProfile::AntiHerglotz);
    }
}
