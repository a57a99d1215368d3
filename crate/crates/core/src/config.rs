//! TOML problem files.
//!
//! ```toml
//! t_end = 1.0
//! [phi]
//! kind = "power"        # power | identity | custom
//! r = 3.0
//! [coefficient]
//! a = "t^(1/3) + x^2"
//! h = "t^(1/3)"
//! p = 2.0
//! [rhs]
//! f = "0"
//! [boundary]
//! kind = "dirichlet"
//! nu1 = 0.0
//! nu2 = 1.0
//! [mesh]
//! n = 1024
//! singular = [0.0]
//! ```
//!
//! Parse errors carry the line, column and byte offset in the file; errors
//! inside an expression string are mapped back to their position in the file.

use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::dirichlet::SolverConfig;
use crate::error::{Error, ExprError, Result};
use crate::expr::Expression;
use crate::general::ShootOptions;
use crate::mesh::DEFAULT_GRADING;
use crate::phi::Homeomorphism;
use crate::problem::{BoundarySpec, BvpProblem, Coefficient, NagumoData, PowerGrowth, DEFAULT_AUDIT_SAMPLES};

type Text = Spanned<String>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "one")]
    t_end: f64,
    phi: RawPhi,
    coefficient: RawCoefficient,
    rhs: RawRhs,
    nagumo: Option<RawNagumo>,
    boundary: RawBoundary,
    pair: Option<RawPair>,
    #[serde(default)]
    mesh: MeshConfig,
    #[serde(default)]
    solver: RawSolver,
    growth: Option<PowerGrowth>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhi {
    kind: String,
    r: Option<f64>,
    expr: Option<Text>,
    inverse: Option<Text>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficient {
    a: Text,
    h: Text,
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRhs {
    f: Text,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNagumo {
    #[serde(rename = "H")]
    big_h: f64,
    psi: Text,
    l: Text,
    mu: Text,
    q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    kind: String,
    nu1: Option<f64>,
    nu2: Option<f64>,
    l1: Option<f64>,
    m1: Option<f64>,
    l2: Option<f64>,
    m2: Option<f64>,
    g: Option<Text>,
    rho: Option<Text>,
    p: Option<Text>,
    q: Option<Text>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    lower: Text,
    upper: Text,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub n: usize,
    pub grading: f64,
    pub singular: Vec<f64>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n: 1024, grading: DEFAULT_GRADING, singular: Vec::new() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSolver {
    tol: f64,
    max_iter: usize,
    damping: f64,
    anderson: bool,
    xi_tol: f64,
    truncate: bool,
    bc_tol: f64,
    nu_grid: usize,
    strict: bool,
    audit_samples: usize,
}

impl Default for RawSolver {
    fn default() -> Self {
        let s = SolverConfig::default();
        let o = ShootOptions::default();
        Self {
            tol: s.tol,
            max_iter: s.max_iter,
            damping: s.damping,
            anderson: s.anderson,
            xi_tol: s.xi_tol,
            truncate: false,
            bc_tol: o.bc_tol,
            nu_grid: o.nu_grid,
            strict: o.strict,
            audit_samples: DEFAULT_AUDIT_SAMPLES,
        }
    }
}

/// A fully parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub problem: BvpProblem,
    pub mesh: MeshConfig,
    pub shoot: ShootOptions,
    /// Solve the truncated problem built from the pair and a-priori bounds.
    pub truncate: bool,
    pub audit_samples: usize,
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |p| offset - p - 1) + 1;
    (line, col)
}

fn located(src: &str, offset: usize, what: &str, msg: impl std::fmt::Display) -> Error {
    let (line, col) = line_col(src, offset);
    Error::Config(format!("line {line}, column {col} (byte {offset}): {what}: {msg}"))
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn expr(&self, text: &Text, vars: &[&str], what: &str) -> Result<Expression> {
        Expression::parse(text.get_ref(), vars).map_err(|e| self.expr_error(text, &e, what))
    }

    fn expr_error(&self, text: &Text, e: &ExprError, what: &str) -> Error {
        // +1 skips the opening quote of the TOML string.
        let base = text.span().start + 1;
        let offset = base + e.offset().unwrap_or(0);
        located(self.src, offset, what, e)
    }

    fn missing(&self, what: &str) -> Error {
        Error::Config(format!("missing key {what}"))
    }
}

pub fn parse_config(src: &str) -> Result<ProblemConfig> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        located(src, offset, "parse error", e.message())
    })?;
    let cx = Ctx { src };

    let mut phi = match raw.phi.kind.as_str() {
        "identity" => Homeomorphism::identity(),
        "power" => Homeomorphism::power(raw.phi.r.ok_or_else(|| cx.missing("[phi].r"))?)?,
        "custom" => {
            let expr = raw.phi.expr.as_ref().ok_or_else(|| cx.missing("[phi].expr"))?;
            let forward = cx.expr(expr, &["y"], "[phi].expr")?;
            let inverse = raw.phi.inverse.as_ref().map(|t| cx.expr(t, &["v"], "[phi].inverse")).transpose()?;
            Homeomorphism::from_expressions(forward, inverse)
        }
        other => return Err(Error::Config(format!("[phi].kind: unknown kind `{other}`"))),
    };
    if let Some(tol) = raw.phi.tolerance {
        phi = phi.with_tolerance(tol);
    }

    let coeff = Coefficient {
        a: cx.expr(&raw.coefficient.a, &["t", "x"], "[coefficient].a")?,
        h: cx.expr(&raw.coefficient.h, &["t"], "[coefficient].h")?,
        p: raw.coefficient.p,
        singular_points: raw.mesh.singular.clone(),
    };
    let f = cx.expr(&raw.rhs.f, &["t", "x", "y"], "[rhs].f")?;

    let b = &raw.boundary;
    let num = |v: Option<f64>, key: &str| v.ok_or_else(|| cx.missing(&format!("[boundary].{key}")));
    let boundary = match b.kind.as_str() {
        "dirichlet" => BoundarySpec::Dirichlet { nu1: num(b.nu1, "nu1")?, nu2: num(b.nu2, "nu2")? },
        "neumann" => BoundarySpec::Neumann { nu1: num(b.nu1, "nu1")?, nu2: num(b.nu2, "nu2")? },
        "periodic" => BoundarySpec::Periodic,
        "sturm_liouville" => BoundarySpec::SturmLiouville {
            l1: num(b.l1, "l1")?,
            m1: num(b.m1, "m1")?,
            nu1: num(b.nu1, "nu1")?,
            l2: num(b.l2, "l2")?,
            m2: num(b.m2, "m2")?,
            nu2: num(b.nu2, "nu2")?,
        },
        "functional" => BoundarySpec::Functional {
            g: cx.expr(b.g.as_ref().ok_or_else(|| cx.missing("[boundary].g"))?, &["u", "v", "w", "z"], "[boundary].g")?,
            rho: cx.expr(b.rho.as_ref().ok_or_else(|| cx.missing("[boundary].rho"))?, &["r"], "[boundary].rho")?,
        },
        "separated" => BoundarySpec::Separated {
            p: cx.expr(b.p.as_ref().ok_or_else(|| cx.missing("[boundary].p"))?, &["s", "w"], "[boundary].p")?,
            q: cx.expr(b.q.as_ref().ok_or_else(|| cx.missing("[boundary].q"))?, &["s", "w"], "[boundary].q")?,
        },
        other => return Err(Error::Config(format!("[boundary].kind: unknown kind `{other}`"))),
    };

    let nagumo = raw
        .nagumo
        .as_ref()
        .map(|n| -> Result<NagumoData> {
            Ok(NagumoData {
                big_h: n.big_h,
                psi: cx.expr(&n.psi, &["s"], "[nagumo].psi")?,
                l: cx.expr(&n.l, &["t"], "[nagumo].l")?,
                mu: cx.expr(&n.mu, &["t"], "[nagumo].mu")?,
                q: n.q,
            })
        })
        .transpose()?;
    let (lower, upper) = match &raw.pair {
        Some(p) => (
            Some(cx.expr(&p.lower, &["t"], "[pair].lower")?),
            Some(cx.expr(&p.upper, &["t"], "[pair].upper")?),
        ),
        None => (None, None),
    };

    let problem = BvpProblem {
        t_end: raw.t_end,
        phi,
        coeff,
        f,
        nagumo,
        boundary,
        lower,
        upper,
        growth: raw.growth,
        truncation: None,
    };
    let s = &raw.solver;
    let shoot = ShootOptions {
        solver: SolverConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            damping: s.damping,
            anderson: s.anderson,
            xi_tol: s.xi_tol,
        },
        bc_tol: s.bc_tol,
        nu_grid: s.nu_grid,
        strict: s.strict,
        ..ShootOptions::default()
    };
    Ok(ProblemConfig {
        problem,
        mesh: raw.mesh,
        shoot,
        truncate: s.truncate,
        audit_samples: s.audit_samples,
    })
}

pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let src = std::fs::read_to_string(path)?;
    parse_config(&src).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        e => e,
    })
}
