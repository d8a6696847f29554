use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde::Serialize;
use weyl_core::herglotz::{ac_density, EpsSchedule};
use weyl_core::ivp::IntegratorConfig;
use weyl_core::mfun::{evaluate_many, model_matrix_m, greens_function, resolvent_apply, MKind, SolverConfig, TildeOptions};
use weyl_core::models::{catalog, load_model_file, CatalogParams, Domain, Expr, Oracle, PotentialModel};
use weyl_core::singular::FactorizedPotential;
use weyl_core::transform::{forward_transform, Basis, CompactFn};
use weyl_core::verify::{run_suite, SUITES};
use weyl_core::Error;

#[derive(Parser)]
#[command(name = "weyl", version, about = "Weyl-Titchmarsh m-functions, spectral measures and transforms for 1D Schroedinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an m-function on a set of spectral parameters
    Mfun(MfunArgs),
    /// Spectral density (scalar, or the 2x2 matrix density with --matrix)
    Density(DensityArgs),
    /// Forward eigenfunction transform of a compactly supported function
    Transform(TransformArgs),
    /// Green's function G(z, x, x')
    Green(GreenArgs),
    /// Apply the resolvent (H - z)^-1 to a compactly supported function
    Resolvent(ResolventArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Catalog family: free_halfline, free_line, bessel, perturbed_bessel, factorized, tabulated
    #[arg(long, conflicts_with = "model_file", required_unless_present = "model_file")]
    model: Option<String>,
    /// TOML model file (family, gamma, C, x0, vtilde, f, table, a)
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Bessel parameter gamma >= 1
    #[arg(long)]
    gamma: Option<f64>,
    /// Normalization constant of the Bessel families
    #[arg(long = "C")]
    c: Option<f64>,
    /// Reference point
    #[arg(long)]
    x0: Option<f64>,
    /// Expression for the perturbation vtilde(x)
    #[arg(long)]
    vtilde: Option<String>,
    /// Expression for f(x) of the factorized family
    #[arg(long)]
    f: Option<String>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    model: ModelArgs,
    /// Boundary angle at a regular left endpoint
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    /// ODE relative tolerance
    #[arg(long, default_value_t = 1e-11)]
    rel_tol: f64,
    /// ODE absolute tolerance
    #[arg(long, default_value_t = 1e-13)]
    abs_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// m_{+,alpha} at a regular left endpoint
    Halfline,
    /// m~_+ at a singular left endpoint
    Tilde,
    /// interior m_+(z, x0)
    Plus,
    /// interior m_-(z, x0)
    Minus,
}

#[derive(Args)]
struct MfunArgs {
    #[command(flatten)]
    common: Common,
    /// Which m-function; the default depends on the left endpoint
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Spectral parameter a+bi (repeatable)
    #[arg(long, allow_hyphen_values = true)]
    z: Vec<String>,
    /// Rectangular grid re_min:re_max:n_re,im_min:im_max:n_im
    #[arg(long, allow_hyphen_values = true)]
    z_grid: Option<String>,
}

#[derive(Args)]
struct LambdaRange {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lmin: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    lmax: f64,
    /// Number of equally spaced points, endpoints included
    #[arg(long, default_value_t = 11)]
    n: usize,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    range: LambdaRange,
    /// 2x2 density of the matrix measure at x0 (columns lambda,w00,w01,w11,det)
    #[arg(long)]
    matrix: bool,
    /// Compute numerically even when a closed form exists
    #[arg(long)]
    numeric: bool,
    /// Decreasing eps values; the density is extrapolated from Im m(lambda + i eps)
    /// instead of taken as the boundary value
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
}

#[derive(Args)]
struct FunctionArgs {
    /// Expression for h(x)
    #[arg(long)]
    h: String,
    /// Support a:b of h
    #[arg(long, allow_hyphen_values = true)]
    support: String,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    range: LambdaRange,
    #[command(flatten)]
    function: FunctionArgs,
}

#[derive(Args)]
struct GreenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Comma list of x values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Comma list of x' values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    xp: Vec<f64>,
}

#[derive(Args)]
struct ResolventArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Output points min:max:n
    #[arg(long, allow_hyphen_values = true)]
    x_grid: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// regular, singular, transforms, herglotz or all
    #[arg(long)]
    suite: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(io::Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn parse_complex(s: &str) -> Res<C> {
    let bad = || Failure::Usage(format!("cannot parse complex number '{s}' (expected a+bi)"));
    let t = s.trim();
    if t.is_empty() || t.contains(' ') {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| C::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        v => v,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(C::new(re, im))
}

fn parse_range(s: &str) -> Res<Vec<f64>> {
    let bad = || Failure::Usage(format!("cannot parse range '{s}' (expected min:max:n)"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    linspace(lo, hi, n)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Res<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Failure::Usage(format!("invalid range {lo}..{hi}")));
    }
    Ok(match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    })
}

fn parse_support(s: &str) -> Res<(f64, f64)> {
    let bad = || Failure::Usage(format!("cannot parse support '{s}' (expected a:b)"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn expr_fn(src: &str) -> Res<impl Fn(f64) -> f64 + Send + Sync + Clone + 'static> {
    let e = Expr::parse(src)?;
    Ok(move |x| e.eval(x))
}

fn build_model(a: &ModelArgs) -> Res<PotentialModel> {
    if let Some(path) = &a.model_file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(load_model_file(&text)?);
    }
    let name = a.model.as_deref().unwrap_or_default();
    let mut p = CatalogParams { gamma: a.gamma, c: a.c, x0: a.x0, ..Default::default() };
    if let Some(v) = &a.vtilde {
        p = p.vtilde(expr_fn(v)?);
    }
    if name == "factorized" {
        let f = a.f.as_deref().ok_or_else(|| Failure::Usage("the factorized family needs --f".into()))?;
        let vt = a.vtilde.as_deref().unwrap_or("0");
        p = p.factorized(FactorizedPotential::from_expressions(f, vt, a.x0.unwrap_or(1.0))?);
    }
    Ok(catalog(name, &p)?)
}

fn solver_config(c: &Common) -> Res<SolverConfig> {
    let ivp = IntegratorConfig::new(c.rel_tol, c.abs_tol)?;
    Ok(SolverConfig { ivp, alpha: c.alpha, ..Default::default() })
}

/// Rows of finite numbers under fixed column names.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: vec![] }
    }

    fn push(&mut self, row: Vec<f64>) -> Res<()> {
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Failure::Lib(Error::PrecisionLoss(format!("non-finite output value {v}"))));
        }
        self.rows.push(row);
        Ok(())
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> Res<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header).map_err(csv_err)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let objs: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| self.header.iter().zip(r).map(|(h, v)| (h.to_string(), serde_json::json!(v))).collect())
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &objs).map_err(|e| Failure::Io(e.into()))?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Io(io::Error::other(e))
}

fn emit(table: &Table, c: &Common) -> Res<()> {
    match &c.out {
        Some(p) => {
            let mut f = File::create(p)?;
            table.write(c.format, &mut f)
        }
        None => table.write(c.format, &mut io::stdout().lock()),
    }
}

fn default_kind(model: &PotentialModel) -> Kind {
    if model.is_singular() {
        Kind::Tilde
    } else if model.domain == Domain::Line {
        Kind::Plus
    } else {
        Kind::Halfline
    }
}

fn cmd_mfun(a: &MfunArgs) -> Res<()> {
    let model = build_model(&a.common.model)?;
    let cfg = solver_config(&a.common)?;
    let x0 = a.common.model.x0.unwrap_or(model.x0);
    let kind = match a.kind.unwrap_or_else(|| default_kind(&model)) {
        Kind::Halfline => MKind::HalfLine { alpha: a.common.alpha },
        Kind::Tilde => MKind::Tilde(TildeOptions::for_model(&model)),
        Kind::Plus => MKind::InteriorPlus { x0 },
        Kind::Minus => MKind::InteriorMinus { x0 },
    };
    let mut zs: Vec<C> = a.z.iter().map(|s| parse_complex(s)).collect::<Res<_>>()?;
    if let Some(g) = &a.z_grid {
        let (re, im) = g.split_once(',').ok_or_else(|| Failure::Usage(format!("z-grid '{g}' needs a real and an imaginary range")))?;
        let (re, im) = (parse_range(re)?, parse_range(im)?);
        for &y in &im {
            zs.extend(re.iter().map(|&x| C::new(x, y)));
        }
    }
    let mut t = Table::new(vec!["re_z", "im_z", "re_m", "im_m", "err"]);
    for s in evaluate_many(&model, &kind, &zs, &cfg) {
        let s = s?;
        t.push(vec![s.z.re, s.z.im, s.value.re, s.value.im, s.err_estimate])?;
    }
    emit(&t, &a.common)
}

fn numeric_sampler<'a>(model: &'a PotentialModel, cfg: &'a SolverConfig) -> Box<dyn Fn(C) -> weyl_core::Result<C> + Sync + 'a> {
    if model.is_singular() {
        let opts = TildeOptions::for_model(model);
        Box::new(move |z| Ok(weyl_core::mfun::singular_m_tilde(model, z, &opts, cfg)?.sample.value))
    } else {
        Box::new(move |z| Ok(weyl_core::mfun::halfline_m(model, cfg.alpha, z, cfg)?.value))
    }
}

fn density_value(sampler: &(dyn Fn(C) -> weyl_core::Result<C> + Sync), l: f64, sched: Option<&EpsSchedule>) -> weyl_core::Result<f64> {
    match sched {
        Some(s) => Ok(ac_density(sampler, l, s)?.value),
        None => Ok(sampler(C::new(l, 0.0))?.im / std::f64::consts::PI),
    }
}

fn cmd_density(a: &DensityArgs) -> Res<()> {
    let model = build_model(&a.common.model)?;
    let cfg = solver_config(&a.common)?;
    let grid = linspace(a.range.lmin, a.range.lmax, a.range.n)?;
    let sched = a.eps_schedule.clone().map(EpsSchedule::new).transpose()?;
    let closed = model.oracle.filter(|_| !a.numeric && a.common.alpha == 0.0 && a.eps_schedule.is_none());
    let mut t;
    if a.matrix {
        let x0 = a.common.model.x0.unwrap_or(model.x0);
        t = Table::new(vec!["lambda", "w00", "w01", "w11", "det"]);
        let entry = |z: C, i: usize, j: usize| -> weyl_core::Result<C> { Ok(model_matrix_m(&model, x0, z, &cfg)?.0.entries[i][j]) };
        for &l in &grid {
            let w = match closed {
                Some(o) if o != Oracle::FreeHalfLine || l <= 0.0 => o.omega_density(l, x0)?,
                _ => {
                    let mut w = [[0.0; 2]; 2];
                    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                        w[i][j] = density_value(&|z| entry(z, i, j), l, sched.as_ref())?;
                    }
                    w[1][0] = w[0][1];
                    w
                }
            };
            t.push(vec![l, w[0][0], w[0][1], w[1][1], w[0][0] * w[1][1] - w[0][1] * w[1][0]])?;
        }
    } else {
        if model.domain == Domain::Line {
            return Err(Failure::Usage("the whole line has a matrix measure; use --matrix".into()));
        }
        t = Table::new(vec!["lambda", "rho"]);
        let sampler = numeric_sampler(&model, &cfg);
        for &l in &grid {
            let rho = match closed {
                Some(o) => o.density(l)?,
                None => density_value(&*sampler, l, sched.as_ref())?,
            };
            t.push(vec![l, rho])?;
        }
    }
    emit(&t, &a.common)
}

fn basis_for(model: &PotentialModel, c: &Common) -> Basis {
    if model.domain == Domain::Line {
        Basis::ThetaPhiAtX0(c.model.x0.unwrap_or(model.x0))
    } else if model.is_singular() {
        Basis::PhiTilde(TildeOptions::for_model(model).normalization)
    } else {
        Basis::PhiAlpha(c.alpha)
    }
}

fn cmd_transform(a: &TransformArgs) -> Res<()> {
    let model = build_model(&a.common.model)?;
    let cfg = solver_config(&a.common)?;
    let grid = linspace(a.range.lmin, a.range.lmax, a.range.n)?;
    let hf = expr_fn(&a.function.h)?;
    let h = move |x: f64| C::new(hf(x), 0.0);
    let support = parse_support(&a.function.support)?;
    let basis = basis_for(&model, &a.common);
    let hc = CompactFn::new(&h, support)?;
    let tv = if grid.is_empty() {
        None
    } else {
        Some(forward_transform(&model, &hc, &grid, basis, &cfg)?)
    };
    let mut t = if basis.components() == 2 {
        Table::new(vec!["lambda", "re_h0", "im_h0", "re_h1", "im_h1"])
    } else {
        Table::new(vec!["lambda", "re_h", "im_h"])
    };
    if let Some(tv) = tv {
        for (k, &l) in grid.iter().enumerate() {
            let mut row = vec![l];
            for comp in &tv.components {
                row.extend([comp[k].re, comp[k].im]);
            }
            t.push(row)?;
        }
    }
    emit(&t, &a.common)
}

fn cmd_green(a: &GreenArgs) -> Res<()> {
    let model = build_model(&a.common.model)?;
    let cfg = solver_config(&a.common)?;
    let z = parse_complex(&a.z)?;
    let mut t = Table::new(vec!["x", "xp", "re_g", "im_g"]);
    for &x in &a.x {
        for &xp in &a.xp {
            let g = greens_function(&model, z, x, xp, &cfg)?;
            t.push(vec![x, xp, g.re, g.im])?;
        }
    }
    emit(&t, &a.common)
}

fn cmd_resolvent(a: &ResolventArgs) -> Res<()> {
    let model = build_model(&a.common.model)?;
    let cfg = solver_config(&a.common)?;
    let z = parse_complex(&a.z)?;
    let xs = parse_range(&a.x_grid)?;
    let hf = expr_fn(&a.function.h)?;
    let support = parse_support(&a.function.support)?;
    let mut t = Table::new(vec!["x", "re_u", "im_u"]);
    if !xs.is_empty() {
        let r = resolvent_apply(&model, z, |x| C::new(hf(x), 0.0), support, &xs, &cfg)?;
        for (x, u) in r.xs.iter().zip(&r.values) {
            t.push(vec![*x, u.re, u.im])?;
        }
    }
    emit(&t, &a.common)
}

#[derive(Serialize)]
struct VerifyLine<'a> {
    group: &'a str,
    check: &'a str,
    measured: f64,
    expected: f64,
    tolerance: f64,
    status: &'static str,
    note: &'a str,
}

fn cmd_verify(a: &VerifyArgs) -> Res<()> {
    if !SUITES.contains(&a.suite.as_str()) {
        return Err(Failure::Usage(format!("unknown suite '{}' (expected one of {})", a.suite, SUITES.join(", "))));
    }
    let reports = run_suite(&a.suite)?;
    let mut out = io::stdout().lock();
    let mut lines = vec![];
    let mut ok = true;
    for r in &reports {
        ok &= r.passed();
        if let Some(e) = &r.error {
            lines.push(VerifyLine { group: &r.name, check: "run", measured: 0.0, expected: 0.0, tolerance: 0.0, status: "FAIL", note: e });
        }
        if !r.within_time() {
            lines.push(VerifyLine {
                group: &r.name,
                check: "time limit",
                measured: r.elapsed_s,
                expected: r.limit_s,
                tolerance: 0.0,
                status: "FAIL",
                note: "",
            });
        }
        for c in &r.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            lines.push(VerifyLine {
                group: &r.name,
                check: &c.name,
                measured: c.measured,
                expected: c.expected,
                tolerance: c.tolerance,
                status,
                note: &c.note,
            });
        }
    }
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &lines).map_err(|e| Failure::Io(e.into()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
            w.write_record(["group", "check", "measured", "expected", "tolerance", "status", "note"]).map_err(csv_err)?;
            for l in &lines {
                w.serialize(l).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Mfun(a) => cmd_mfun(a),
        Command::Density(a) => cmd_density(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Green(a) => cmd_green(a),
        Command::Resolvent(a) => cmd_resolvent(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_nonconvergence() { 3 } else { 2 })
        }
    }
}
