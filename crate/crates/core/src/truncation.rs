//! A-priori constants (M, a₀, N, L_M, γ₀), the truncated problem built from
//! a lower/upper pair, and the post-solve property checks.
//!
//! The truncated problem replaces `a(t, x)` by `a(t, 𝓣x)` and `f` by
//! `f*(t, x, 𝓓((𝓣x)'))`, where 𝓣 clamps the state into `[α, β]`, 𝓓 clamps the
//! derivative into `[-γ̂, γ̂]`, and `f*` adds an arctan penalty outside the
//! band.

use std::sync::Arc;

use serde::Serialize;

use crate::dirichlet::{cell_data, compute_ax, local_residuals, CellData, InvariantCheck};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::mesh::{CellFunction, Mesh};
use crate::path::DiscretePath;
use crate::phi::Homeomorphism;
use crate::problem::{inverse_h_cells, BvpProblem};

/// Grid resolution for `a₀` in each direction.
pub const A0_GRID: usize = 128;
/// Cells of the log-spaced `s`-grid used for `∫ ds/ψ`.
pub const PSI_CELLS: usize = 1024;
/// Multiplicative step of the `N` and `L_M` searches.
pub const SEARCH_STEP: f64 = 1e-4;
pub const L_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriBounds {
    #[serde(rename = "M")]
    pub m: f64,
    pub a0: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "L_M")]
    pub l_m: f64,
    /// `‖l‖₁ + ‖μ‖_q (2M)^((q-1)/q)`.
    pub rhs: f64,
    pub gamma0: CellFunction,
    pub gamma_hat: CellFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerUpperPair {
    pub alpha: DiscretePath,
    pub beta: DiscretePath,
    pub alpha_residual: f64,
    pub beta_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    pub side: Side,
    pub passed: bool,
    /// Min (lower) or max (upper) of `(Φ(𝓐))' - f` over interior nodes.
    pub worst: f64,
    pub worst_t: f64,
    pub tol: f64,
}

/// Checks the lower (`(Φ(𝓐))' >= f`) or upper (`<= f`) inequality at the
/// interior nodes of `candidate`.
pub fn verify_lower_upper(candidate: &DiscretePath, prob: &BvpProblem, side: Side, tol: f64) -> Result<SideReport> {
    let plain = untruncated(prob);
    let r = local_residuals(candidate, &plain)?;
    let nodes = candidate.mesh().nodes();
    let interior = 1..nodes.len() - 1;
    let pick = |cmp: fn(f64, f64) -> bool| {
        interior
            .clone()
            .fold((r[1], nodes[1]), |(w, wt), k| if cmp(r[k], w) { (r[k], nodes[k]) } else { (w, wt) })
    };
    let (worst, worst_t, passed) = match side {
        Side::Lower => {
            let (w, t) = pick(|a, b| a < b);
            (w, t, w >= -tol)
        }
        Side::Upper => {
            let (w, t) = pick(|a, b| a > b);
            (w, t, w <= tol)
        }
    };
    Ok(SideReport { side, passed, worst, worst_t, tol })
}

fn untruncated(prob: &BvpProblem) -> BvpProblem {
    let mut p = prob.clone();
    p.truncation = None;
    p
}

impl LowerUpperPair {
    pub fn new(prob: &BvpProblem, alpha: DiscretePath, beta: DiscretePath) -> Result<Self> {
        if alpha.nodes().len() != beta.nodes().len() {
            return Err(Error::LengthMismatch { expected: alpha.nodes().len(), found: beta.nodes().len() });
        }
        if let Some((k, (a, b))) = alpha.nodes().iter().zip(beta.nodes()).enumerate().find(|(_, (a, b))| a > b) {
            return Err(Error::Precondition {
                hypothesis: "alpha <= beta",
                detail: format!("alpha = {a} > beta = {b} at node {k}"),
            });
        }
        let lo = verify_lower_upper(&alpha, prob, Side::Lower, 0.0)?;
        let up = verify_lower_upper(&beta, prob, Side::Upper, 0.0)?;
        Ok(Self { alpha, beta, alpha_residual: lo.worst, beta_residual: up.worst })
    }

    /// Samples the problem's declared lower/upper expressions on `mesh`.
    pub fn from_problem(prob: &BvpProblem, mesh: &Arc<Mesh>) -> Result<Self> {
        let (Some(lo), Some(up)) = (&prob.lower, &prob.upper) else {
            return Err(Error::Missing("lower/upper pair"));
        };
        let sample = |e: &Expression| -> Result<DiscretePath> {
            let nodes = mesh.nodes().iter().map(|&t| e.eval(&[t])).collect::<Result<Vec<_>, _>>()?;
            DiscretePath::from_nodes(mesh.clone(), nodes)
        };
        Self::new(prob, sample(lo)?, sample(up)?)
    }

    pub fn sup_norm(&self) -> f64 {
        self.alpha.sup_norm().max(self.beta.sup_norm())
    }
}

/// Tries constant pairs `(-c, c)` in order and returns the first whose sides
/// both verify within `tol`.
pub fn propose_constant_pair(prob: &BvpProblem, mesh: &Arc<Mesh>, candidates: &[f64], tol: f64) -> Result<Option<LowerUpperPair>> {
    for &c in candidates {
        let alpha = DiscretePath::constant(mesh.clone(), -c.abs());
        let beta = DiscretePath::constant(mesh.clone(), c.abs());
        let lo = verify_lower_upper(&alpha, prob, Side::Lower, tol)?;
        let up = verify_lower_upper(&beta, prob, Side::Upper, tol)?;
        if lo.passed && up.passed {
            return Ok(Some(LowerUpperPair { alpha, beta, alpha_residual: lo.worst, beta_residual: up.worst }));
        }
    }
    Ok(None)
}

/// `∫_{lo}^{hi} ds/ψ(s)` by the midpoint rule in `u = ln s` on a uniform
/// `u`-grid (log-spaced in `s`). Requires `0 < lo`.
pub fn psi_integral(psi: &Expression, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let (u0, u1) = (lo.ln(), hi.ln());
    let du = (u1 - u0) / PSI_CELLS as f64;
    let mut sum = 0.0;
    for j in 0..PSI_CELLS {
        let s = (u0 + (j as f64 + 0.5) * du).exp();
        let v = psi.eval(&[s])?;
        if !(v > 0.0) {
            return Err(Error::Precondition { hypothesis: "psi > 0", detail: format!("psi({s}) = {v}") });
        }
        sum += s / v;
    }
    Ok(sum * du)
}

/// `min` of the two one-sided gauge integrals between `N` and `L`.
pub fn flux_integral(phi: &Homeomorphism, psi: &Expression, n: f64, l: f64) -> Result<f64> {
    let up = psi_integral(psi, phi.eval(n)?, phi.eval(l)?)?;
    let down = psi_integral(psi, -phi.eval(-n)?, -phi.eval(-l)?)?;
    Ok(up.min(down))
}

/// Smallest `L = (1 + SEARCH_STEP)^k > N` whose gauge integral strictly
/// exceeds `rhs`: doubling from `N` to bracket, then integer bisection on `k`.
pub fn flux_bound(phi: &Homeomorphism, psi: &Expression, n: f64, rhs: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Precondition { hypothesis: "N > 0", detail: format!("N = {n}") });
    }
    let holds = |l: f64| -> Result<bool> { Ok(l > n && flux_integral(phi, psi, n, l)? > rhs) };
    let mut top = 2.0 * n;
    while !holds(top)? {
        if top > L_LIMIT {
            let best = flux_integral(phi, psi, n, L_LIMIT)?;
            return Err(Error::DivergenceTooSlow { limit: L_LIMIT, rhs, best });
        }
        top *= 2.0;
    }
    let step = SEARCH_STEP.ln_1p();
    let grid = |k: i64| (k as f64 * step).exp();
    let mut k_lo = (n.ln() / step).floor() as i64;
    while grid(k_lo) > n {
        k_lo -= 1;
    }
    let mut k_hi = (top.ln() / step).ceil() as i64;
    while !holds(grid(k_hi))? {
        k_hi += 1;
    }
    while k_hi - k_lo > 1 {
        let mid = k_lo + (k_hi - k_lo) / 2;
        if holds(grid(mid))? {
            k_hi = mid;
        } else {
            k_lo = mid;
        }
    }
    Ok(grid(k_hi))
}

/// Smallest `bound·(1+SEARCH_STEP)^k`, `k >= 1`, with `Φ(N) > 0 > Φ(-N)`.
pub fn choose_n(phi: &Homeomorphism, bound: f64) -> Result<f64> {
    let mut n = bound.max(f64::MIN_POSITIVE) * (1.0 + SEARCH_STEP);
    for _ in 0..1_000_000 {
        if phi.eval(n)? > 0.0 && phi.eval(-n)? < 0.0 {
            return Ok(n);
        }
        n *= 1.0 + SEARCH_STEP;
    }
    Err(Error::Precondition {
        hypothesis: "Phi(N) > 0 > Phi(-N)",
        detail: format!("no admissible N above {bound}"),
    })
}

/// `max a(t, x)` over a uniform grid of `[0,T] x [-M, M]`.
pub fn a0_grid_max(prob: &BvpProblem, m: f64) -> Result<f64> {
    let k = A0_GRID - 1;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=k {
        let t = prob.t_end * i as f64 / k as f64;
        for j in 0..=k {
            let x = -m + 2.0 * m * j as f64 / k as f64;
            best = best.max(prob.coeff.a(t, x)?);
        }
    }
    Ok(best)
}

pub fn compute_apriori_bounds(prob: &BvpProblem, pair: &LowerUpperPair, mesh: &Mesh) -> Result<AprioriBounds> {
    let nag = prob.nagumo.as_ref().ok_or(Error::Missing("nagumo data"))?;
    if pair.alpha.nodes().len() != mesh.nodes().len() {
        return Err(Error::LengthMismatch { expected: mesh.nodes().len(), found: pair.alpha.nodes().len() });
    }
    let m = pair.sup_norm();
    let a0 = a0_grid_max(prob, m)?;
    let n = choose_n(&prob.phi, nag.big_h.max(2.0 * m / prob.t_end) * a0)?;

    let l_cells = mesh.sample_cells(|t| nag.l.eval(&[t]))?;
    let mu_cells = mesh.sample_cells(|t| nag.mu.eval(&[t]))?;
    let l1 = mesh.lp_norm(&l_cells, 1.0)?;
    let mu_q = mesh.lp_norm(&mu_cells, nag.q)?;
    let weight = if nag.q.is_infinite() { 2.0 * m } else { (2.0 * m).powf((nag.q - 1.0) / nag.q) };
    let rhs = l1 + mu_q * weight;

    let l_m = flux_bound(&prob.phi, &nag.psi, n, rhs)?;
    let gamma0: CellFunction = inverse_h_cells(&prob.coeff, mesh)?.iter().map(|ih| l_m * ih).collect();
    let gamma_hat = gamma0
        .iter()
        .zip(pair.alpha.derivs().iter().zip(pair.beta.derivs().iter()))
        .map(|(g, (da, db))| g + da.abs() + db.abs())
        .collect();
    Ok(AprioriBounds { m, a0, n, l_m, rhs, gamma0, gamma_hat })
}

/// `𝓣x`: nodewise median of `(α, x, β)`.
pub fn clamp_t(x: &DiscretePath, pair: &LowerUpperPair) -> Result<DiscretePath> {
    let nodes = x
        .nodes()
        .iter()
        .zip(pair.alpha.nodes().iter().zip(pair.beta.nodes()))
        .map(|(&v, (&a, &b))| median(a, v, b))
        .collect();
    DiscretePath::from_nodes(x.mesh().clone(), nodes)
}

/// `𝓓z`: cellwise median of `(-γ̂, z, γ̂)`.
pub fn clamp_d(z: &CellFunction, gamma_hat: &CellFunction) -> CellFunction {
    z.iter().zip(gamma_hat.iter()).map(|(&v, &g)| median(-g, v, g)).collect()
}

/// Median of `(lo, v, hi)` for `lo <= hi`.
fn median(lo: f64, v: f64, hi: f64) -> f64 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Band data at one point: `(α, α', β, β')`.
#[derive(Debug, Clone, Copy)]
struct Band {
    alpha: f64,
    dalpha: f64,
    beta: f64,
    dbeta: f64,
}

fn f_star(f: &Expression, t: f64, x: f64, y: f64, band: Band) -> Result<f64> {
    if x < band.alpha {
        Ok(f.eval(&[t, band.alpha, band.dalpha])? + (x - band.alpha).atan())
    } else if x > band.beta {
        Ok(f.eval(&[t, band.beta, band.dbeta])? + (x - band.beta).atan())
    } else {
        Ok(f.eval(&[t, x, y])?)
    }
}

/// Penalised right-hand side; `α(t)`, `α'(t)` (and likewise β) come from the
/// cell of the pair containing `t`.
pub fn f_star_eval(t: f64, x: f64, y: f64, pair: &LowerUpperPair, f: &Expression) -> Result<f64> {
    let band = Band {
        alpha: pair.alpha.value_at(t),
        dalpha: pair.alpha.deriv_at(t),
        beta: pair.beta.value_at(t),
        dbeta: pair.beta.deriv_at(t),
    };
    f_star(f, t, x, y, band)
}

/// Data carried by a truncated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub pair: LowerUpperPair,
    pub gamma_hat: CellFunction,
    pub a0: f64,
}

impl Truncation {
    pub(crate) fn cell_data(&self, prob: &BvpProblem, path: &DiscretePath) -> Result<CellData> {
        let mesh = path.mesh();
        let n = mesh.n_cells();
        if self.gamma_hat.len() != n {
            return Err(Error::LengthMismatch { expected: self.gamma_hat.len(), found: n });
        }
        let z = clamp_t(path, &self.pair)?;
        let dz = clamp_d(z.derivs(), &self.gamma_hat);
        let (alpha, beta) = (&self.pair.alpha, &self.pair.beta);
        let mut a = Vec::with_capacity(n);
        let mut f = Vec::with_capacity(n);
        for i in 0..n {
            let m = mesh.midpoint(i);
            a.push(prob.coeff.cell_mean(mesh, i, z.nodes()[i], z.nodes()[i + 1])?);
            let band = Band {
                alpha: alpha.mid_value(i),
                dalpha: alpha.derivs()[i],
                beta: beta.mid_value(i),
                dbeta: beta.derivs()[i],
            };
            f.push(f_star(&prob.f, m, path.mid_value(i), dz[i], band)?);
        }
        Ok(CellData { a: CellFunction(a), f: CellFunction(f) })
    }
}

/// The truncated problem for `pair` and `bounds`.
pub fn build_truncated(prob: &BvpProblem, pair: &LowerUpperPair, bounds: &AprioriBounds) -> Result<BvpProblem> {
    if bounds.gamma_hat.len() + 1 != pair.alpha.nodes().len() {
        return Err(Error::LengthMismatch {
            expected: pair.alpha.nodes().len() - 1,
            found: bounds.gamma_hat.len(),
        });
    }
    let mut out = untruncated(prob);
    out.truncation = Some(Arc::new(Truncation {
        pair: pair.clone(),
        gamma_hat: bounds.gamma_hat.clone(),
        a0: bounds.a0,
    }));
    Ok(out)
}

/// Post-solve statements: `α <= x <= β`, `sup|x| <= M`, `max|𝓐| <= L_M` and
/// `|x'| <= γ₀` per cell, each with relative tolerance `1e-9`.
pub fn check_solution_properties(
    x: &DiscretePath,
    prob: &BvpProblem,
    pair: &LowerUpperPair,
    bounds: &AprioriBounds,
) -> Result<Vec<InvariantCheck>> {
    const REL: f64 = 1e-9;
    let band_tol = REL * bounds.m.max(1.0);
    let band = x
        .nodes()
        .iter()
        .zip(pair.alpha.nodes().iter().zip(pair.beta.nodes()))
        .map(|(&v, (&a, &b))| (a - v).max(v - b))
        .fold(f64::NEG_INFINITY, f64::max);
    let sup = x.sup_norm();
    let flux = compute_ax(x, &prob.coeff)?;
    let flux_max = flux.cells.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let deriv_excess = x
        .derivs()
        .iter()
        .zip(bounds.gamma0.iter())
        .map(|(d, g)| d.abs() - g * (1.0 + REL))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        InvariantCheck::new("within_pair", band <= band_tol, band),
        InvariantCheck::new("sup_le_m", sup <= bounds.m + band_tol, sup),
        InvariantCheck::new("flux_le_l_m", flux_max <= bounds.l_m * (1.0 + REL), flux_max),
        InvariantCheck::new("derivative_le_gamma0", deriv_excess <= 0.0, deriv_excess),
    ])
}

/// Largest `|F|` of the truncated right-hand side along `path` (audit aid).
pub fn truncated_forcing_sup(prob: &BvpProblem, path: &DiscretePath) -> Result<CellFunction> {
    Ok(cell_data(prob, path)?.f.iter().map(|v| v.abs()).collect())
}
