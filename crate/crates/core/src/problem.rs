//! Problem declarations: coefficient, right-hand side, Nagumo growth data,
//! boundary conditions, and a sampling audit of the standing hypotheses.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::mesh::{CellFunction, Mesh};
use crate::phi::Homeomorphism;
use crate::truncation::Truncation;

pub const DEFAULT_AUDIT_SAMPLES: usize = 64;
const AUDIT_SEED: u64 = 0x5eed;

/// `a(t, x)` with its lower envelope `h(t)` and the integrability exponent
/// `p` of `1/h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub a: Expression,
    pub h: Expression,
    pub p: f64,
    pub singular_points: Vec<f64>,
}

impl Coefficient {
    pub fn parse(a: &str, h: &str, p: f64, singular_points: Vec<f64>) -> Result<Self> {
        Ok(Self {
            a: Expression::parse(a, &["t", "x"])?,
            h: Expression::parse(h, &["t"])?,
            p,
            singular_points,
        })
    }

    /// `a ≡ h ≡ 1`.
    pub fn unit() -> Self {
        Self::parse("1", "1", 2.0, Vec::new()).expect("constant expressions")
    }

    pub fn a(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.a.eval(&[t, x])?)
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        Ok(self.h.eval(&[t])?)
    }

    /// Harmonic mean of `a(t, x(t))` over cell `i`, with `x` linear from `x0`
    /// to `x1`: `Δ_i / ∫ 1/a`. Cells ending at a singular point are integrated
    /// in `u` with `t - t_s ∝ u³`, which removes power singularities of
    /// order up to `t^(-2/3)`. A nonpositive or non-finite value of `a` is
    /// returned as is so callers can report it.
    pub fn cell_mean(&self, mesh: &Mesh, i: usize, x0: f64, x1: f64) -> Result<f64> {
        const NODES: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        const WEIGHTS: [f64; 4] = [0.347_854_845_137_453_8, 0.652_145_154_862_546_2, 0.652_145_154_862_546_2, 0.347_854_845_137_453_8];
        let (t0, t1) = (mesh.nodes()[i], mesh.nodes()[i + 1]);
        let width = t1 - t0;
        let sing = |t: f64| mesh.singular_points().contains(&t);
        let (left, right) = (sing(t0), sing(t1));
        let mut integral = 0.0;
        for (u, w) in NODES.iter().zip(WEIGHTS) {
            let u = 0.5 * (u + 1.0);
            let (s, jac) = if left {
                (u * u * u, 3.0 * u * u)
            } else if right {
                (1.0 - u * u * u, 3.0 * u * u)
            } else {
                (u, 1.0)
            };
            let a = self.a(t0 + width * s, x0 + (x1 - x0) * s)?;
            if !(a > 0.0 && a.is_finite()) {
                return Ok(a);
            }
            integral += 0.5 * w * jac / a;
        }
        Ok(1.0 / integral)
    }
}

/// Growth data for `|f(t,x,y)| <= ψ(|Φ(a y)|)(l(t) + μ(t)|y|^((q-1)/q))`
/// when `|x| <= M` and `|y| >= H`.
#[derive(Debug, Clone, PartialEq)]
pub struct NagumoData {
    pub big_h: f64,
    pub psi: Expression,
    pub l: Expression,
    pub mu: Expression,
    /// `f64::INFINITY` allowed.
    pub q: f64,
}

impl NagumoData {
    pub fn parse(big_h: f64, psi: &str, l: &str, mu: &str, q: f64) -> Result<Self> {
        Ok(Self {
            big_h,
            psi: Expression::parse(psi, &["s"])?,
            l: Expression::parse(l, &["t"])?,
            mu: Expression::parse(mu, &["t"])?,
            q,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Dirichlet { nu1: f64, nu2: f64 },
    /// `x(T) = ρ(x(0))`, `g(x(0), x(T), 𝓐(0), 𝓐(T)) = 0`; `g` over
    /// `(u, v, w, z)`, `ρ` over `r`.
    Functional { g: Expression, rho: Expression },
    Periodic,
    SturmLiouville { l1: f64, m1: f64, nu1: f64, l2: f64, m2: f64, nu2: f64 },
    Neumann { nu1: f64, nu2: f64 },
    /// `p(x(0), 𝓐(0)) = 0`, `q(x(T), 𝓐(T)) = 0`; both over `(s, w)`.
    Separated { p: Expression, q: Expression },
}

impl BoundarySpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BoundarySpec::Dirichlet { .. } => "dirichlet",
            BoundarySpec::Functional { .. } => "functional",
            BoundarySpec::Periodic => "periodic",
            BoundarySpec::SturmLiouville { .. } => "sturm_liouville",
            BoundarySpec::Neumann { .. } => "neumann",
            BoundarySpec::Separated { .. } => "separated",
        }
    }

    pub fn functional(g: &str, rho: &str) -> Result<Self> {
        Ok(BoundarySpec::Functional {
            g: Expression::parse(g, &["u", "v", "w", "z"])?,
            rho: Expression::parse(rho, &["r"])?,
        })
    }

    pub fn separated(p: &str, q: &str) -> Result<Self> {
        Ok(BoundarySpec::Separated {
            p: Expression::parse(p, &["s", "w"])?,
            q: Expression::parse(q, &["s", "w"])?,
        })
    }
}

/// Integrability exponents of a power-type forcing `σ g(x) |y|^δ` with
/// `σ ∈ L^τ` under the r-Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerGrowth {
    pub r: f64,
    pub p: f64,
    pub tau: f64,
    pub delta: f64,
}

impl PowerGrowth {
    /// `1/τ + (r-1)/p`, must be `< 1`.
    pub fn integrability_sum(&self) -> f64 {
        1.0 / self.tau + (self.r - 1.0) / self.p
    }

    /// Largest admissible `δ`.
    pub fn delta_max(&self) -> f64 {
        1.0 - 1.0 / self.tau + (self.r - 1.0) * (1.0 - 1.0 / self.p)
    }

    /// Exponent of `μ = σ / h^(r-1)`: `τp / (p + τ(r-1))`.
    pub fn q(&self) -> f64 {
        self.tau * self.p / (self.p + self.tau * (self.r - 1.0))
    }

    pub fn admissible(&self) -> bool {
        self.integrability_sum() < 1.0 && self.delta > 0.0 && self.delta <= self.delta_max() && self.q() > 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpProblem {
    pub t_end: f64,
    pub phi: Homeomorphism,
    pub coeff: Coefficient,
    /// Right-hand side over `(t, x, y)`.
    pub f: Expression,
    pub nagumo: Option<NagumoData>,
    pub boundary: BoundarySpec,
    /// Lower / upper solutions as expressions in `t`.
    pub lower: Option<Expression>,
    pub upper: Option<Expression>,
    pub growth: Option<PowerGrowth>,
    pub truncation: Option<Arc<Truncation>>,
}

impl BvpProblem {
    pub fn new(t_end: f64, phi: Homeomorphism, coeff: Coefficient, f: &str, boundary: BoundarySpec) -> Result<Self> {
        Ok(Self {
            t_end,
            phi,
            coeff,
            f: Expression::parse(f, &["t", "x", "y"])?,
            nagumo: None,
            boundary,
            lower: None,
            upper: None,
            growth: None,
            truncation: None,
        })
    }

    pub fn with_pair(mut self, lower: &str, upper: &str) -> Result<Self> {
        self.lower = Some(Expression::parse(lower, &["t"])?);
        self.upper = Some(Expression::parse(upper, &["t"])?);
        Ok(self)
    }

    pub fn with_nagumo(mut self, nagumo: NagumoData) -> Self {
        self.nagumo = Some(nagumo);
        self
    }

    pub fn with_boundary(mut self, boundary: BoundarySpec) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn f(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        Ok(self.f.eval(&[t, x, y])?)
    }

    pub fn dirichlet_values(&self) -> Result<(f64, f64)> {
        match self.boundary {
            BoundarySpec::Dirichlet { nu1, nu2 } => Ok((nu1, nu2)),
            _ => Err(Error::WrongBoundaryKind { expected: "dirichlet" }),
        }
    }

    /// Copy with Dirichlet data `x(0) = nu1`, `x(T) = nu2`.
    pub fn as_dirichlet(&self, nu1: f64, nu2: f64) -> Self {
        let mut p = self.clone();
        p.boundary = BoundarySpec::Dirichlet { nu1, nu2 };
        p
    }

    /// Default mesh for this problem's singular points.
    pub fn mesh(&self, n: usize, grading: f64) -> Result<Arc<Mesh>> {
        Ok(Arc::new(Mesh::build(self.t_end, &self.coeff.singular_points, n, grading)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditItem {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub items: Vec<AuditItem>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&AuditItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditItem> {
        self.items.iter().filter(|i| !i.passed)
    }

    fn pass(&mut self, name: &str, detail: impl Into<String>) {
        self.items.push(AuditItem {
            name: name.to_string(),
            passed: true,
            witness: None,
            detail: detail.into(),
        });
    }

    fn fail(&mut self, name: &str, witness: &[(&str, f64)], detail: impl Into<String>) {
        let witness = (!witness.is_empty())
            .then(|| witness.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        self.items.push(AuditItem {
            name: name.to_string(),
            passed: false,
            witness,
            detail: detail.into(),
        });
    }

    fn record(&mut self, name: &str, outcome: std::result::Result<String, (Vec<(&'static str, f64)>, String)>) {
        match outcome {
            Ok(detail) => self.pass(name, detail),
            Err((w, detail)) => self.fail(name, &w, detail),
        }
    }
}

type Audit = std::result::Result<String, (Vec<(&'static str, f64)>, String)>;

fn t_samples(t_end: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| t_end * (j as f64 + 0.5) / n as f64)
}

fn x_samples(radius: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| -radius + 2.0 * radius * j as f64 / (n.max(2) - 1) as f64)
}

/// Sup-norm of the declared lower/upper pair on the mesh nodes (1 if absent).
fn pair_radius(prob: &BvpProblem, mesh: &Mesh) -> f64 {
    let mut m: f64 = 0.0;
    for e in [&prob.lower, &prob.upper].into_iter().flatten() {
        for &t in mesh.nodes() {
            if let Ok(v) = e.eval(&[t]) {
                m = m.max(v.abs());
            }
        }
    }
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Samples every checkable hypothesis. Failures become report entries with a
/// witness point; nothing here returns an error.
pub fn validate_problem(prob: &BvpProblem, mesh: &Mesh, samples: usize) -> ValidationReport {
    let mut report = ValidationReport::default();
    let samples = samples.max(2);
    let radius = 10.0 * pair_radius(prob, mesh);

    report.record("h_nonnegative", audit_h_nonnegative(prob, samples));
    report.record("a_ge_h", audit_a_ge_h(prob, samples, radius));
    report.record("inv_h_in_lp", audit_inv_h_lp(prob, mesh));
    match prob.phi.audit_monotone(1000, AUDIT_SEED) {
        Ok(()) => report.pass("phi_monotone", ""),
        Err(Error::NotMonotone { y1, y2, v1, v2 }) => report.fail(
            "phi_monotone",
            &[("y1", y1), ("y2", y2)],
            format!("Phi(y1) = {v1} >= Phi(y2) = {v2}"),
        ),
        Err(e) => report.fail("phi_monotone", &[], e.to_string()),
    }
    if let Some(nag) = &prob.nagumo {
        report.record("nagumo_data", audit_nagumo(nag, prob.t_end, samples));
    }
    if prob.lower.is_some() || prob.upper.is_some() {
        report.record("alpha_le_beta", audit_pair_order(prob, mesh));
    }
    if let Some(g) = &prob.growth {
        let detail = format!(
            "1/tau + (r-1)/p = {}, delta = {} <= {}, q = {}",
            g.integrability_sum(),
            g.delta,
            g.delta_max(),
            g.q()
        );
        if g.admissible() {
            report.pass("growth_exponents", detail);
        } else {
            report.fail("growth_exponents", &[("tau", g.tau), ("delta", g.delta)], detail);
        }
    }
    audit_boundary(prob, samples, radius, &mut report);
    report
}

fn audit_h_nonnegative(prob: &BvpProblem, n: usize) -> Audit {
    for t in t_samples(prob.t_end, n) {
        match prob.coeff.h(t) {
            Ok(h) if h >= 0.0 => {}
            Ok(h) => return Err((vec![("t", t)], format!("h = {h}"))),
            Err(e) => return Err((vec![("t", t)], e.to_string())),
        }
    }
    Ok(String::new())
}

fn audit_a_ge_h(prob: &BvpProblem, n: usize, radius: f64) -> Audit {
    for t in t_samples(prob.t_end, n) {
        let h = prob.coeff.h(t).map_err(|e| (vec![("t", t)], e.to_string()))?;
        for x in x_samples(radius, n) {
            match prob.coeff.a(t, x) {
                Ok(a) if a >= h => {}
                Ok(a) => return Err((vec![("t", t), ("x", x)], format!("a = {a} < h = {h}"))),
                Err(e) => return Err((vec![("t", t), ("x", x)], e.to_string())),
            }
        }
    }
    Ok(format!("{n} x {n} samples, |x| <= {radius}"))
}

fn inv_h_power_integral(prob: &BvpProblem, mesh: &Mesh) -> Result<f64> {
    let p = prob.coeff.p;
    let w = mesh.sample_cells(|t| prob.coeff.h(t).map(|h| h.recip().powf(p)))?;
    mesh.integrate(&w)
}

fn audit_inv_h_lp(prob: &BvpProblem, mesh: &Mesh) -> Audit {
    let p = prob.coeff.p;
    if !(p > 1.0) {
        return Err((vec![("p", p)], "p must exceed 1".into()));
    }
    let coarse = inv_h_power_integral(prob, mesh).map_err(|e| (vec![], e.to_string()))?;
    let finer = Mesh::build(mesh.t_end(), mesh.singular_points(), 2 * mesh.n_cells(), mesh.grading())
        .map_err(|e| (vec![], e.to_string()))?;
    let fine = inv_h_power_integral(prob, &finer).map_err(|e| (vec![], e.to_string()))?;
    let rel = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel <= 0.1 {
        Ok(format!("integral {fine:.6e}, relative change {rel:.3e} under doubling"))
    } else {
        Err((
            vec![("n", mesh.n_cells() as f64)],
            format!("integral grows from {coarse:.6e} to {fine:.6e} under doubling"),
        ))
    }
}

fn audit_nagumo(nag: &NagumoData, t_end: f64, n: usize) -> Audit {
    if !(nag.big_h > 0.0) {
        return Err((vec![("H", nag.big_h)], "H must be positive".into()));
    }
    if !(nag.q > 1.0) {
        return Err((vec![("q", nag.q)], "q must exceed 1".into()));
    }
    for k in 0..4 * n {
        let s = 10f64.powf(-6.0 + 12.0 * k as f64 / (4 * n - 1) as f64);
        match nag.psi.eval(&[s]) {
            Ok(v) if v > 0.0 && v.is_finite() => {}
            Ok(v) => return Err((vec![("s", s)], format!("psi = {v}"))),
            Err(e) => return Err((vec![("s", s)], e.to_string())),
        }
    }
    for t in t_samples(t_end, n) {
        for (name, e) in [("l", &nag.l), ("mu", &nag.mu)] {
            match e.eval(&[t]) {
                Ok(v) if v >= 0.0 => {}
                Ok(v) => return Err((vec![("t", t)], format!("{name} = {v} < 0"))),
                Err(err) => return Err((vec![("t", t)], err.to_string())),
            }
        }
    }
    Ok(String::new())
}

fn audit_pair_order(prob: &BvpProblem, mesh: &Mesh) -> Audit {
    let (Some(lo), Some(up)) = (&prob.lower, &prob.upper) else {
        return Err((vec![], "only one of lower/upper given".into()));
    };
    for &t in mesh.nodes() {
        let a = lo.eval(&[t]).map_err(|e| (vec![("t", t)], e.to_string()))?;
        let b = up.eval(&[t]).map_err(|e| (vec![("t", t)], e.to_string()))?;
        if a > b {
            return Err((vec![("t", t)], format!("alpha = {a} > beta = {b}")));
        }
    }
    Ok(String::new())
}

/// Checks `e` is nondecreasing (sign = 1) or nonincreasing (sign = -1) in
/// argument `slot` on random samples.
fn audit_monotone_slot(e: &Expression, slot: usize, sign: f64, radius: f64, n: usize, rng: &mut ChaCha8Rng) -> Audit {
    let arity = e.vars().len();
    let mut args = vec![0.0; arity];
    for _ in 0..n * n {
        for a in args.iter_mut() {
            *a = rng.gen_range(-radius..=radius);
        }
        let (mut y1, mut y2): (f64, f64) = (rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius));
        if y1 > y2 {
            std::mem::swap(&mut y1, &mut y2);
        }
        args[slot] = y1;
        let v1 = e.eval(&args).map_err(|err| (vec![("arg", y1)], err.to_string()))?;
        args[slot] = y2;
        let v2 = e.eval(&args).map_err(|err| (vec![("arg", y2)], err.to_string()))?;
        if sign * (v2 - v1) < 0.0 {
            return Err((
                vec![("lo", y1), ("hi", y2)],
                format!("`{}`: {v1} -> {v2} with other arguments {:?}", e.vars()[slot], args),
            ));
        }
    }
    Ok(String::new())
}

fn audit_boundary(prob: &BvpProblem, n: usize, radius: f64, report: &mut ValidationReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    match &prob.boundary {
        BoundarySpec::Dirichlet { .. } => return,
        BoundarySpec::Functional { g, rho } => {
            report.record("rho_increasing", audit_monotone_slot(rho, 0, 1.0, radius, n, &mut rng));
            report.record("g_increasing_in_w", audit_monotone_slot(g, 2, 1.0, radius, n, &mut rng));
            report.record("g_decreasing_in_z", audit_monotone_slot(g, 3, -1.0, radius, n, &mut rng));
        }
        BoundarySpec::Periodic => {}
        BoundarySpec::SturmLiouville { m1, m2, .. } => {
            if *m1 >= 0.0 && *m2 >= 0.0 {
                report.pass("sturm_liouville_m_nonnegative", "");
            } else {
                report.fail("sturm_liouville_m_nonnegative", &[("m1", *m1), ("m2", *m2)], "m1, m2 must be >= 0");
            }
        }
        BoundarySpec::Neumann { .. } => {}
        BoundarySpec::Separated { p, q } => {
            report.record("p_increasing_in_w", audit_monotone_slot(p, 1, 1.0, radius, n, &mut rng));
            report.record("q_decreasing_in_w", audit_monotone_slot(q, 1, -1.0, radius, n, &mut rng));
        }
    }
    report.record("a_nonzero_at_endpoints", audit_endpoint_a(prob, n, radius));
}

fn audit_endpoint_a(prob: &BvpProblem, n: usize, radius: f64) -> Audit {
    for t in [0.0, prob.t_end] {
        for x in x_samples(radius, n) {
            match prob.coeff.a(t, x) {
                Ok(a) if a != 0.0 && a.is_finite() => {}
                Ok(a) => return Err((vec![("t", t), ("x", x)], format!("a = {a}"))),
                Err(e) => return Err((vec![("t", t), ("x", x)], e.to_string())),
            }
        }
    }
    Ok(String::new())
}

/// Samples `1/h` on the mesh cells (used for `γ₀` and the boundedness
/// constant of the fixed-point operator).
pub fn inverse_h_cells(coeff: &Coefficient, mesh: &Mesh) -> Result<CellFunction> {
    mesh.sample_cells(|t| coeff.h(t).map(f64::recip))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet(a: &str, h: &str, p: f64, singular: Vec<f64>) -> BvpProblem {
        BvpProblem::new(
            1.0,
            Homeomorphism::identity(),
            Coefficient::parse(a, h, p, singular).unwrap(),
            "0",
            BoundarySpec::Dirichlet { nu1: 0.0, nu2: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn product_coefficient_passes() {
        let prob = dirichlet("t^(1/3)*(2+sin(x))", "t^(1/3)", 2.0, vec![0.0]);
        let mesh = prob.mesh(256, 3.0).unwrap();
        let rep = validate_problem(&prob, &mesh, DEFAULT_AUDIT_SAMPLES);
        assert!(rep.passed(), "{rep:#?}");
    }

    #[test]
    fn a_below_h_has_witness() {
        let prob = dirichlet("t-0.5", "0.1", 2.0, vec![]);
        let mesh = prob.mesh(64, 3.0).unwrap();
        let rep = validate_problem(&prob, &mesh, DEFAULT_AUDIT_SAMPLES);
        let item = rep.item("a_ge_h").unwrap();
        assert!(!item.passed);
        let t = item.witness.as_ref().unwrap()["t"];
        assert!(t < 0.6, "{t}");
    }

    #[test]
    fn non_integrable_inverse_envelope_fails() {
        let prob = dirichlet("t", "t", 2.0, vec![0.0]);
        let mesh = prob.mesh(256, 3.0).unwrap();
        let rep = validate_problem(&prob, &mesh, 16);
        assert!(!rep.item("inv_h_in_lp").unwrap().passed);
    }

    #[test]
    fn growth_exponents_at_the_boundary_case() {
        let g = PowerGrowth { r: 3.0, p: 8.0, tau: 4.0, delta: 2.5 };
        assert_eq!(g.integrability_sum(), 0.5);
        assert_eq!(g.delta_max(), 2.5);
        assert_eq!(g.q(), 2.0);
        assert!(g.admissible());
        let too_big = PowerGrowth { delta: 2.6, ..g };
        assert!(!too_big.admissible());
    }

    #[test]
    fn separated_p_must_increase_in_flux() {
        let prob = dirichlet("1", "1", 2.0, vec![])
            .with_boundary(BoundarySpec::separated("s - w", "s - w").unwrap());
        let mesh = prob.mesh(32, 3.0).unwrap();
        let rep = validate_problem(&prob, &mesh, 16);
        assert!(!rep.item("p_increasing_in_w").unwrap().passed);
        assert!(rep.item("q_decreasing_in_w").unwrap().passed);
    }

    #[test]
    fn functional_monotonicity_and_endpoint_coefficient() {
        let prob = dirichlet("t", "t", 2.0, vec![0.0])
            .with_boundary(BoundarySpec::functional("w - z", "r").unwrap());
        let mesh = prob.mesh(64, 3.0).unwrap();
        let rep = validate_problem(&prob, &mesh, 16);
        assert!(rep.item("g_increasing_in_w").unwrap().passed);
        assert!(rep.item("g_decreasing_in_z").unwrap().passed);
        assert!(rep.item("rho_increasing").unwrap().passed);
        let end = rep.item("a_nonzero_at_endpoints").unwrap();
        assert!(!end.passed);
        assert_eq!(end.witness.as_ref().unwrap()["t"], 0.0);
    }

    #[test]
    fn pair_order_and_nagumo() {
        let prob = dirichlet("1", "1", 2.0, vec![])
            .with_pair("1", "-1")
            .unwrap()
            .with_nagumo(NagumoData::parse(1.0, "s - 1", "1", "1", f64::INFINITY).unwrap());
        let mesh = prob.mesh(16, 3.0).unwrap();
        let rep = validate_problem(&prob, &mesh, 16);
        assert!(!rep.item("alpha_le_beta").unwrap().passed);
        assert!(!rep.item("nagumo_data").unwrap().passed);
    }
}
