//! Quadrature: Gauss-Legendre panels with spectral cumulative integration,
//! adaptive Gauss-Kronrod (7/15) and tanh-sinh for endpoint singularities.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that quadrature rules can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nodes per Gauss-Legendre panel used throughout the crate.
pub const PANEL_NODES: usize = 16;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Legendre polynomials P_0..=P_n at x.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }
}

/// The shared 16-point rule.
pub fn gauss16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(PANEL_NODES))
}

/// S[i][j] = integral from -1 to x_i of the j-th Lagrange basis polynomial
/// of the 16-point rule. Exact for polynomials of degree < 16.
fn integration_matrix() -> &'static Vec<Vec<f64>> {
    static MAT: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    MAT.get_or_init(|| {
        let rule = gauss16();
        let n = PANEL_NODES;
        let p_nodes: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let mut s = vec![vec![0.0; n]; n];
        for i in 0..n {
            let pi = &p_nodes[i];
            for j in 0..n {
                let pj = &p_nodes[j];
                let mut acc = (rule.nodes[i] + 1.0) / 2.0;
                for k in 1..n {
                    acc += pj[k] * (pi[k + 1] - pi[k - 1]) / 2.0;
                }
                s[i][j] = rule.weights[j] * acc;
            }
        }
        s
    })
}

/// Composite 16-point Gauss-Legendre grid over a list of breakpoints.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    pub breaks: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelGrid {
    pub fn new(breaks: Vec<f64>) -> Self {
        assert!(breaks.len() >= 2, "a panel grid needs at least two breakpoints");
        let rule = gauss16();
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * PANEL_NODES);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        PanelGrid { breaks, nodes, weights }
    }

    pub fn panel_count(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn integrate<T: QuadValue>(&self, vals: &[T]) -> T {
        vals.iter().zip(&self.weights).fold(T::zero(), |acc, (v, w)| acc + *v * *w)
    }

    /// Running integral from the first breakpoint, evaluated at every node
    /// and at every breakpoint.
    pub fn cumulative<T: QuadValue>(&self, vals: &[T]) -> (Vec<T>, Vec<T>) {
        let s = integration_matrix();
        let rule = gauss16();
        let mut at_nodes = Vec::with_capacity(vals.len());
        let mut at_breaks = Vec::with_capacity(self.breaks.len());
        let mut base = T::zero();
        at_breaks.push(base);
        for (p, w) in self.breaks.windows(2).enumerate() {
            let half = (w[1] - w[0]) / 2.0;
            let v = &vals[p * PANEL_NODES..(p + 1) * PANEL_NODES];
            for row in s.iter() {
                let mut acc = T::zero();
                for (sij, vj) in row.iter().zip(v) {
                    acc = acc + *vj * *sij;
                }
                at_nodes.push(base + acc * half);
            }
            let mut total = T::zero();
            for (wj, vj) in rule.weights.iter().zip(v) {
                total = total + *vj * *wj;
            }
            base = base + total * half;
            at_breaks.push(base);
        }
        (at_nodes, at_breaks)
    }

    /// Running integral towards the last breakpoint: integral from x to the
    /// end, at every node and every breakpoint.
    pub fn cumulative_from_right<T: QuadValue>(&self, vals: &[T]) -> (Vec<T>, Vec<T>) {
        let (nodes, breaks) = self.cumulative(vals);
        let total = *breaks.last().unwrap();
        (
            nodes.into_iter().map(|v| total - v).collect(),
            breaks.into_iter().map(|v| total - v).collect(),
        )
    }
}

/// Split every interval of `breaks` longer than `max_len` into equal parts.
pub fn refine_breaks(breaks: &[f64], max_len: f64) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let pieces = (len / max_len).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            out.push(w[0] + len * k as f64 / pieces as f64);
        }
        *out.last_mut().unwrap() = w[1];
    }
    out
}

/// Sorted, deduplicated breakpoints from arbitrary points.
pub fn merge_breaks(points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = points.into_iter().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1e-300));
    v
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: QuadValue, F: FnMut(f64) -> Result<T>>(f: &mut F, a: f64, b: f64) -> Result<(T, f64)> {
    let c = (a + b) / 2.0;
    let h = (b - a) / 2.0;
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        kron = kron + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let err = ((kron - gauss) * h).magnitude();
    Ok((kron * h, err))
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol { abs: 1e-12, rel: 1e-10, max_segments: 2000 }
    }
}

/// Globally adaptive Gauss-Kronrod 7/15 on [a, b], with optional interior
/// breakpoints. Returns (value, error estimate).
pub fn adaptive<T, F>(mut f: F, breaks: &[f64], tol: QuadTol) -> Result<(T, f64)>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1])?;
        total = total + v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, err: e });
    }
    let mut segments = heap.len();
    while total_err > tol.abs.max(tol.rel * total.magnitude()) {
        if segments >= tol.max_segments {
            return Err(Error::Quadrature(format!(
                "adaptive rule hit {segments} segments with error {total_err:e}"
            )));
        }
        let seg = heap.pop().unwrap();
        let m = (seg.a + seg.b) / 2.0;
        if m <= seg.a || m >= seg.b {
            return Err(Error::Quadrature(format!("interval collapsed near x = {m}")));
        }
        let (v1, e1) = gk15(&mut f, seg.a, m)?;
        let (v2, e2) = gk15(&mut f, m, seg.b)?;
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, err: e2 });
        segments += 1;
    }
    // recompute the sum to shed accumulated rounding from the updates
    let sum = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    let err = heap.iter().map(|s| s.err).sum();
    Ok((sum, err))
}

/// Tanh-sinh rule on [a, b]; tolerates integrable endpoint singularities.
/// The integrand is never evaluated at the endpoints themselves.
pub fn tanh_sinh<T, F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<(T, f64)>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    use std::f64::consts::FRAC_PI_2;
    let len = b - a;
    let mut sample = |t: f64| -> Result<Option<T>> {
        let u = FRAC_PI_2 * t.sinh();
        // distance from a (t < 0) or from b (t > 0) as a fraction of len
        let frac = 1.0 / (1.0 + (2.0 * u.abs()).exp());
        if frac == 0.0 {
            return Ok(None);
        }
        let x = if t <= 0.0 { a + len * frac } else { b - len * frac };
        if x <= a || x >= b {
            return Ok(None);
        }
        let w = len * 2.0 * FRAC_PI_2 * t.cosh() * frac * (1.0 - frac);
        let v = f(x)? * w;
        // 0 * inf at the extreme abscissae, where the weight is negligible anyway
        if !v.magnitude().is_finite() && frac < 1e-100 {
            return Ok(None);
        }
        Ok(Some(v))
    };
    let mut h = 0.5;
    let mut sum = sample(0.0)?.unwrap_or(T::zero());
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let l = sample(-t)?;
        let r = sample(t)?;
        if l.is_none() && r.is_none() {
            break;
        }
        sum = sum + l.unwrap_or(T::zero()) + r.unwrap_or(T::zero());
        k += 1;
        if k > 10_000 {
            break;
        }
    }
    let mut estimate = sum * h;
    let tmax = k as f64 * h;
    for _level in 0..12 {
        h /= 2.0;
        let mut add = T::zero();
        let mut t = h;
        while t < tmax {
            if let Some(v) = sample(-t)? {
                add = add + v;
            }
            if let Some(v) = sample(t)? {
                add = add + v;
            }
            t += 2.0 * h;
        }
        let next = estimate * 0.5 + add * h;
        let diff = (next - estimate).magnitude();
        estimate = next;
        if diff <= rel_tol * estimate.magnitude() || diff < 1e-300 {
            return Ok((estimate, diff));
        }
    }
    let diff = estimate.magnitude() * rel_tol;
    Err(Error::Quadrature(format!("tanh-sinh did not settle (last change about {diff:e})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let rule = gauss16();
        for deg in 0..32 {
            let s: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "degree {deg}: {s} vs {exact}");
        }
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let grid = PanelGrid::new(refine_breaks(&[0.0, 3.0], 0.5));
        let vals: Vec<f64> = grid.nodes.iter().map(|x| x.cos()).collect();
        let (nodes, breaks) = grid.cumulative(&vals);
        for (x, v) in grid.nodes.iter().zip(&nodes) {
            assert!((v - x.sin()).abs() < 1e-14);
        }
        assert!((breaks.last().unwrap() - 3f64.sin()).abs() < 1e-14);
        let (right, _) = grid.cumulative_from_right(&vals);
        assert!((right[0] - (3f64.sin() - grid.nodes[0].sin())).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let eps = 1e-4;
        let (v, _) = adaptive(|x: f64| Ok(eps / (x * x + eps * eps)), &[-1.0, 2.0], QuadTol::default())
            .unwrap();
        let exact = (1.0 / eps).atan() + (2.0 / eps).atan();
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn tanh_sinh_inverse_sqrt() {
        let (v, _) = tanh_sinh(|x: f64| Ok(x.powf(-0.5)), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-11, "{v}");
        let (v, _) = tanh_sinh(|x: f64| Ok((1.0 - x).ln()), 0.0, 1.0, 1e-13).unwrap();
        assert!((v + 1.0).abs() < 1e-11, "{v}");
    }
}
