//! Potential models: the catalog of exactly solvable families, model files,
//! and the closed-form oracles attached to the solvable ones.

pub mod expr;
mod table;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::singular::FactorizedPotential;
use crate::specialfn::{
    bessel_j, bessel_j_prime, cut_ln, cut_power, cut_sqrt, entire_bessel_frame, entire_bessel_y_frame,
    hankel1, hankel1_prime, BesselOrder, Sign,
};

pub use expr::Expr;
pub use table::MonotoneCubic;

/// A real function of one real variable, shareable across threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// (a, infinity)
    HalfLine { a: f64 },
    /// the whole real line
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftEndpoint {
    Regular,
    StronglySingularLimitPoint,
}

/// Extra structure of a strongly singular left endpoint at x = 0.
#[derive(Clone)]
pub enum SingularStructure {
    /// V = (gamma^2 - 1/4)/x^2 + vtilde, with x * vtilde integrable near 0.
    Bessel { gamma: f64, vtilde: Option<ScalarFn> },
    /// V = f''/f + f^-4 + vtilde.
    Factorized(FactorizedPotential),
}

impl fmt::Debug for SingularStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularStructure::Bessel { gamma, vtilde } => f
                .debug_struct("Bessel")
                .field("gamma", gamma)
                .field("perturbed", &vtilde.is_some())
                .finish(),
            SingularStructure::Factorized(fp) => f.debug_tuple("Factorized").field(&fp.x0).finish(),
        }
    }
}

/// Closed forms available for a catalog family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    /// V = 0 on (0, inf), Dirichlet data for alpha = 0.
    FreeHalfLine,
    /// V = 0 on the line.
    FreeLine,
    /// V = (gamma^2 - 1/4)/x^2 on (0, inf) with normalization constant c.
    Bessel { gamma: f64, c: f64 },
}

#[derive(Clone)]
pub struct PotentialModel {
    pub name: String,
    pub domain: Domain,
    pub potential: ScalarFn,
    pub left_endpoint: LeftEndpoint,
    pub oracle: Option<Oracle>,
    /// The constant C of the Bessel normalization (1 for other families).
    pub normalization_c: f64,
    pub singular: Option<SingularStructure>,
    /// Natural length scale, used to place matching points.
    pub length_scale: f64,
    /// Default reference point for interior quantities.
    pub x0: f64,
}

impl fmt::Debug for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialModel")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("left_endpoint", &self.left_endpoint)
            .field("oracle", &self.oracle)
            .field("normalization_c", &self.normalization_c)
            .field("singular", &self.singular)
            .field("x0", &self.x0)
            .finish()
    }
}

impl PotentialModel {
    pub fn v(&self, x: f64) -> f64 {
        (self.potential)(x)
    }

    /// V, V', V'' at x by central differences.
    pub fn v_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let h = 1e-3 * x.abs().max(1.0);
        let (vm, v0, vp) = (self.v(x - h), self.v(x), self.v(x + h));
        (v0, (vp - vm) / (2.0 * h), (vp - 2.0 * v0 + vm) / (h * h))
    }

    /// Left end of the domain (negative infinity for the line).
    pub fn left_end(&self) -> f64 {
        match self.domain {
            Domain::HalfLine { a } => a,
            Domain::Line => f64::NEG_INFINITY,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.left_endpoint == LeftEndpoint::StronglySingularLimitPoint
    }

    /// Bessel order of a Bessel-type singular endpoint.
    pub fn bessel_gamma(&self) -> Option<f64> {
        match &self.singular {
            Some(SingularStructure::Bessel { gamma, .. }) => Some(*gamma),
            _ => None,
        }
    }

    /// Check the endpoint classification numerically: V integrable next to a
    /// regular endpoint, not integrable next to a strongly singular one.
    pub fn validate(&self) -> Result<()> {
        if !(self.normalization_c.is_finite() && self.normalization_c > 0.0) {
            return Err(Error::Model(format!("normalization constant must be positive, got {}", self.normalization_c)));
        }
        match (self.domain, self.left_endpoint) {
            (Domain::Line, LeftEndpoint::StronglySingularLimitPoint) => {
                Err(Error::Model("a whole-line model has no singular endpoint".into()))
            }
            (Domain::Line, LeftEndpoint::Regular) => Ok(()),
            (Domain::HalfLine { a }, LeftEndpoint::Regular) => {
                let v = &self.potential;
                let (val, _) = quad::tanh_sinh(|x: f64| Ok(v(x).abs()), a, a + self.length_scale, 1e-8)
                    .map_err(|_| Error::Model("potential is not integrable next to the regular endpoint".into()))?;
                if !val.is_finite() {
                    return Err(Error::Model("potential is not integrable next to the regular endpoint".into()));
                }
                Ok(())
            }
            (Domain::HalfLine { a }, LeftEndpoint::StronglySingularLimitPoint) => {
                if a != 0.0 {
                    return Err(Error::Model("singular endpoints are placed at x = 0".into()));
                }
                if self.singular.is_none() {
                    return Err(Error::Model("singular endpoint without Bessel or factorized structure".into()));
                }
                let v = &self.potential;
                let tail = |d: f64| -> Result<f64> {
                    Ok(quad::adaptive(|x: f64| Ok(v(x).abs()), &quad::merge_breaks([d, d * 10.0, d * 1e2, d * 1e3, 1.0]), quad::QuadTol { abs: 0.0, rel: 1e-6, max_segments: 4000 })?.0)
                };
                let (i3, i6) = (tail(1e-3)?, tail(1e-6)?);
                if !(i6 > 10.0 * i3) {
                    return Err(Error::Model(format!(
                        "potential looks integrable at 0 (int_1e-6^1 |V| = {i6:.3e}, int_1e-3^1 |V| = {i3:.3e}); not a strongly singular endpoint"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Parameters for [`catalog`].
#[derive(Clone, Default)]
pub struct CatalogParams {
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub x0: Option<f64>,
    pub vtilde: Option<ScalarFn>,
    pub factorized: Option<FactorizedPotential>,
    pub table: Option<Vec<(f64, f64)>>,
    pub a: Option<f64>,
}

impl CatalogParams {
    pub fn gamma(mut self, g: f64) -> Self {
        self.gamma = Some(g);
        self
    }
    pub fn c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }
    pub fn x0(mut self, x0: f64) -> Self {
        self.x0 = Some(x0);
        self
    }
    pub fn vtilde(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.vtilde = Some(Arc::new(f));
        self
    }
    pub fn factorized(mut self, fp: FactorizedPotential) -> Self {
        self.factorized = Some(fp);
        self
    }
    pub fn table(mut self, t: Vec<(f64, f64)>) -> Self {
        self.table = Some(t);
        self
    }
}

/// Names accepted by [`catalog`].
pub const CATALOG: &[&str] = &["free_halfline", "free_line", "bessel", "perturbed_bessel", "factorized", "tabulated"];

fn bessel_gamma_param(p: &CatalogParams) -> Result<f64> {
    let g = p.gamma.ok_or_else(|| Error::Model("bessel families need gamma".into()))?;
    if !(g.is_finite() && g >= 1.0) {
        return Err(Error::Model(format!("gamma must be >= 1 for a limit-point endpoint, got {g}")));
    }
    Ok(g)
}

/// Build a catalog model.
pub fn catalog(name: &str, p: &CatalogParams) -> Result<PotentialModel> {
    let c = p.c.unwrap_or(1.0);
    let x0 = p.x0.unwrap_or(1.0);
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::Model(format!("reference point must be positive, got {x0}")));
    }
    let model = match name {
        "free_halfline" => PotentialModel {
            name: name.into(),
            domain: Domain::HalfLine { a: 0.0 },
            potential: Arc::new(|_| 0.0),
            left_endpoint: LeftEndpoint::Regular,
            oracle: Some(Oracle::FreeHalfLine),
            normalization_c: 1.0,
            singular: None,
            length_scale: 1.0,
            x0,
        },
        "free_line" => PotentialModel {
            name: name.into(),
            domain: Domain::Line,
            potential: Arc::new(|_| 0.0),
            left_endpoint: LeftEndpoint::Regular,
            oracle: Some(Oracle::FreeLine),
            normalization_c: 1.0,
            singular: None,
            length_scale: 1.0,
            x0: p.x0.unwrap_or(0.0),
        },
        "bessel" => {
            let gamma = bessel_gamma_param(p)?;
            let k = gamma * gamma - 0.25;
            PotentialModel {
                name: name.into(),
                domain: Domain::HalfLine { a: 0.0 },
                potential: Arc::new(move |x| k / (x * x)),
                left_endpoint: LeftEndpoint::StronglySingularLimitPoint,
                oracle: Some(Oracle::Bessel { gamma, c }),
                normalization_c: c,
                singular: Some(SingularStructure::Bessel { gamma, vtilde: None }),
                length_scale: 1.0,
                x0,
            }
        }
        "perturbed_bessel" => {
            let gamma = bessel_gamma_param(p)?;
            let vt = p
                .vtilde
                .clone()
                .ok_or_else(|| Error::Model("perturbed_bessel needs vtilde".into()))?;
            let k = gamma * gamma - 0.25;
            let vt2 = vt.clone();
            PotentialModel {
                name: name.into(),
                domain: Domain::HalfLine { a: 0.0 },
                potential: Arc::new(move |x| k / (x * x) + vt2(x)),
                left_endpoint: LeftEndpoint::StronglySingularLimitPoint,
                oracle: None,
                normalization_c: c,
                singular: Some(SingularStructure::Bessel { gamma, vtilde: Some(vt) }),
                length_scale: 1.0,
                x0,
            }
        }
        "factorized" => {
            let fp = p
                .factorized
                .clone()
                .ok_or_else(|| Error::Model("factorized family needs f and vtilde".into()))?;
            let pot = fp.potential();
            PotentialModel {
                name: name.into(),
                domain: Domain::HalfLine { a: 0.0 },
                potential: pot,
                left_endpoint: LeftEndpoint::StronglySingularLimitPoint,
                oracle: None,
                normalization_c: 1.0,
                x0: fp.x0,
                singular: Some(SingularStructure::Factorized(fp)),
                length_scale: 1.0,
            }
        }
        "tabulated" => {
            let t = p.table.clone().ok_or_else(|| Error::Model("tabulated family needs a table".into()))?;
            let interp = MonotoneCubic::new(&t)?;
            let a = p.a.unwrap_or(t[0].0);
            if a < t[0].0 {
                return Err(Error::Model("table must cover the left endpoint".into()));
            }
            PotentialModel {
                name: name.into(),
                domain: Domain::HalfLine { a },
                potential: Arc::new(move |x| interp.eval(x)),
                left_endpoint: LeftEndpoint::Regular,
                oracle: None,
                normalization_c: 1.0,
                singular: None,
                length_scale: 1.0,
                x0: p.x0.unwrap_or(a + 1.0),
            }
        }
        other => {
            return Err(Error::Model(format!(
                "unknown model family '{other}' (known: {})",
                CATALOG.join(", ")
            )))
        }
    };
    model.validate()?;
    Ok(model)
}

/// Contents of a model file (TOML).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub family: String,
    pub gamma: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub x0: Option<f64>,
    pub vtilde: Option<String>,
    pub f: Option<String>,
    pub table: Option<Vec<[f64; 2]>>,
    pub a: Option<f64>,
}

fn expr_fn(src: &str) -> Result<ScalarFn> {
    let e = Expr::parse(src)?;
    Ok(Arc::new(move |x| e.eval(x)))
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<ModelFile> {
        toml::from_str(text).map_err(|e| Error::Model(format!("model file: {e}")))
    }

    pub fn build(&self) -> Result<PotentialModel> {
        let mut p = CatalogParams { gamma: self.gamma, c: self.c, x0: self.x0, a: self.a, ..Default::default() };
        if let Some(v) = &self.vtilde {
            p.vtilde = Some(expr_fn(v)?);
        }
        if self.family == "factorized" {
            let f = self.f.as_deref().ok_or_else(|| Error::Model("factorized family needs f".into()))?;
            let vt = self.vtilde.as_deref().unwrap_or("0");
            p.factorized = Some(FactorizedPotential::from_expressions(f, vt, self.x0.unwrap_or(1.0))?);
        }
        if let Some(t) = &self.table {
            p.table = Some(t.iter().map(|r| (r[0], r[1])).collect());
        }
        catalog(&self.family, &p)
    }
}

/// Load a model from TOML text.
pub fn load_model_file(text: &str) -> Result<PotentialModel> {
    ModelFile::parse(text)?.build()
}

fn is_int(g: f64) -> bool {
    g.fract() == 0.0
}

impl Oracle {
    /// Closed-form m-function: i sqrt(z) for the free half-line (alpha = 0),
    /// the singular m-function for the Bessel family. Not defined for the line.
    /// z on the cut [0, inf) is rejected; see [`Oracle::m_rim`].
    pub fn m(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && z.re >= 0.0 {
            return Err(Error::OnBranchCut(z));
        }
        self.m_rim(z)
    }

    /// Like [`Oracle::m`], but real z >= 0 is read as the boundary value from
    /// the upper half-plane.
    pub fn m_rim(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            Oracle::FreeHalfLine => Ok(I * cut_sqrt(z)),
            Oracle::FreeLine => Err(Error::InvalidParameter("the whole line has a matrix m-function".into())),
            Oracle::Bessel { gamma, c } => {
                if is_int(gamma) {
                    let n = gamma as i32;
                    let lnz = cut_ln(z)?.value;
                    Ok(c * c * (2.0 / PI) * z.powi(n) * (I - lnz / PI))
                } else {
                    let zg = cut_power(z, gamma)?.value;
                    Ok(-c * c * (2.0 / PI) * (PI * gamma).sin() * Complex64::from_polar(1.0, -PI * gamma) * zg)
                }
            }
        }
    }

    /// Density of the scalar spectral measure at lambda.
    pub fn density(&self, lambda: f64) -> Result<f64> {
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        match *self {
            Oracle::FreeHalfLine => Ok(lambda.sqrt() / PI),
            Oracle::FreeLine => Err(Error::InvalidParameter("the whole line has a matrix measure".into())),
            Oracle::Bessel { gamma, c } => {
                let s2 = if is_int(gamma) { 1.0 } else { (PI * gamma).sin().powi(2) };
                Ok(c * c * lambda.powf(gamma) * 2.0 / (PI * PI) * s2)
            }
        }
    }

    /// Regular solution (value, x-derivative): sin(kx)/k for the free
    /// half-line, the entire Bessel phi for the Bessel family.
    pub fn phi(&self, z: Complex64, x: f64) -> Result<(Complex64, Complex64)> {
        match *self {
            Oracle::FreeHalfLine | Oracle::FreeLine => {
                let k = cut_sqrt(z);
                if k.norm() == 0.0 {
                    return Ok((Complex64::new(x, 0.0), Complex64::new(1.0, 0.0)));
                }
                Ok(((k * x).sin() / k, (k * x).cos()))
            }
            Oracle::Bessel { gamma, c } => {
                let order = BesselOrder::new(gamma)?;
                let (v, d) = entire_bessel_frame(Sign::Plus, order, z, x)?;
                let s = if is_int(gamma) { PI / 2.0 / c } else { PI / (2.0 * (PI * gamma).sin()) / c };
                Ok((v * s, d * s))
            }
        }
    }

    /// Companion solution with W(theta, phi) = 1.
    pub fn theta(&self, z: Complex64, x: f64) -> Result<(Complex64, Complex64)> {
        match *self {
            Oracle::FreeHalfLine | Oracle::FreeLine => {
                let k = cut_sqrt(z);
                Ok(((k * x).cos(), -k * (k * x).sin()))
            }
            Oracle::Bessel { gamma, c } => {
                let (v, d) = if is_int(gamma) {
                    entire_bessel_y_frame(gamma as u32, z, x)?
                } else {
                    entire_bessel_frame(Sign::Minus, BesselOrder::new(gamma)?, z, x)?
                };
                Ok((v * c, d * c))
            }
        }
    }

    /// Green's function G(z, x, x').
    pub fn green(&self, z: Complex64, x: f64, xp: f64) -> Result<Complex64> {
        let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
        let k = cut_sqrt(z);
        match *self {
            Oracle::FreeHalfLine => Ok((k * lo).sin() / k * (I * k * hi).exp()),
            Oracle::FreeLine => Ok(I * (I * k * (hi - lo)).exp() / (2.0 * k)),
            Oracle::Bessel { gamma, .. } => {
                let j = bessel_j(gamma, k * lo)?;
                let h = hankel1(gamma, k * hi)?;
                Ok(I * PI / 2.0 * lo.sqrt() * j * hi.sqrt() * h)
            }
        }
    }

    /// Interior pair (m_-, m_+) at the reference point x0.
    pub fn m_pm(&self, z: Complex64, x0: f64) -> Result<(Complex64, Complex64)> {
        let k = cut_sqrt(z);
        match *self {
            Oracle::FreeLine => Ok((-I * k, I * k)),
            Oracle::FreeHalfLine => {
                let (p, dp) = self.phi(z, x0)?;
                Ok((dp / p, I * k))
            }
            Oracle::Bessel { gamma, .. } => {
                let w = k * x0;
                let j = bessel_j(gamma, w)?;
                let jp = bessel_j_prime(gamma, w)?;
                let h = hankel1(gamma, w)?;
                let hp = hankel1_prime(gamma, w)?;
                let base = 1.0 / (2.0 * x0);
                Ok((base + k * jp / j, base + k * hp / h))
            }
        }
    }

    /// Density of the 2x2 matrix measure at lambda with reference point x0,
    /// entries [[w00, w01], [w01, w11]].
    pub fn omega_density(&self, lambda: f64, x0: f64) -> Result<[[f64; 2]; 2]> {
        if lambda <= 0.0 {
            return Ok([[0.0; 2]; 2]);
        }
        let s = lambda.sqrt();
        match *self {
            Oracle::FreeLine => Ok([[1.0 / (2.0 * PI * s), 0.0], [0.0, s / (2.0 * PI)]]),
            Oracle::Bessel { gamma, .. } => {
                let w = Complex64::new(s * x0, 0.0);
                let j = bessel_j(gamma, w)?.re;
                let jp = bessel_j_prime(gamma, w)?.re;
                let w00 = x0 / 2.0 * j * j;
                let w01 = 0.25 * (j * j + 2.0 * x0 * s * j * jp);
                let w11 = (j + 2.0 * x0 * s * jp).powi(2) / (8.0 * x0);
                Ok([[w00, w01], [w01, w11]])
            }
            Oracle::FreeHalfLine => Err(Error::InvalidParameter("matrix measure requested for a half-line oracle".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bessel_m_reference_value() {
        let o = Oracle::Bessel { gamma: 1.5, c: 1.0 };
        let m = o.m(c(-1.0, 0.0)).unwrap();
        assert!((m - c(2.0 / PI, 0.0)).norm() < 1e-14, "{m}");
        let o2 = Oracle::Bessel { gamma: 1.5, c: 2.0 };
        assert_eq!(o2.m(c(0.3, 0.7)).unwrap(), o.m(c(0.3, 0.7)).unwrap() * 4.0);
    }

    #[test]
    fn bessel_frames_have_unit_wronskian_and_weyl_combination_decays() {
        for gamma in [1.5, 2.0, 2.5, 3.0] {
            let o = Oracle::Bessel { gamma, c: 1.3 };
            for z in [c(-1.0, 0.5), c(2.0, 1.0), c(0.5, -0.3)] {
                let x = 0.8;
                let (p, dp) = o.phi(z, x).unwrap();
                let (t, dt) = o.theta(z, x).unwrap();
                let w = t * dp - dt * p;
                assert!((w - 1.0).norm() < 1e-11, "gamma={gamma} z={z}: W = {w}");
                // theta + m phi is proportional to the Hankel combination
                let m = o.m(z).unwrap();
                let psi = t + m * p;
                let dpsi = dt + m * dp;
                let order = BesselOrder::new(gamma).unwrap();
                let (h, dh) = crate::specialfn::hankel_combination_frame(order, z, x).unwrap();
                let ratio = (psi / h, dpsi / dh);
                assert!((ratio.0 - ratio.1).norm() < 1e-10 * ratio.0.norm(), "gamma={gamma} z={z}");
            }
        }
    }

    #[test]
    fn model_file_round_trip() {
        let m = load_model_file(
            "family = \"perturbed_bessel\"\ngamma = 1.5\nC = 1.0\nx0 = 1.0\nvtilde = \"exp(-x)\"\n",
        )
        .unwrap();
        assert!((m.v(2.0) - (2.0 / 4.0 + (-2f64).exp())).abs() < 1e-15);
        assert!(load_model_file("family = \"bessel\"\ngamma = 0.3\n").is_err());
        assert!(load_model_file("family = \"bessel\"\ngamma = 1.5\nbogus = 1\n").is_err());
        assert!(load_model_file("family = \"nope\"\n").is_err());
        assert!(load_model_file("family = \"perturbed_bessel\"\ngamma = 1.5\nvtilde = \"exp(-y)\"\n").is_err());
    }

    #[test]
    fn endpoint_classification_is_checked() {
        let mut m = catalog("free_halfline", &CatalogParams::default()).unwrap();
        m.left_endpoint = LeftEndpoint::StronglySingularLimitPoint;
        m.singular = Some(SingularStructure::Bessel { gamma: 1.5, vtilde: None });
        assert!(m.validate().is_err());
        let mut b = catalog("bessel", &CatalogParams::default().gamma(1.5)).unwrap();
        b.left_endpoint = LeftEndpoint::Regular;
        assert!(b.validate().is_err());
    }
}
