//! Functional, periodic, Sturm–Liouville, Neumann and separated boundary
//! conditions, reduced to families of Dirichlet solves and a shooting sweep.
//!
//! A sweep evaluates the boundary score `s(ν)` on a uniform ν-grid, picks the
//! rightmost grid point with `|s| <= bc_tol` or the rightmost sign change
//! (whichever lies further right), and refines a sign change with Illinois
//! false position.

use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::{compute_ax, fixed_point_solve, BoundaryOutcome, InvariantCheck, SolveReport, SolverConfig};
use crate::error::{Error, Result, SweepLevel};
use crate::mesh::Mesh;
use crate::path::DiscretePath;
use crate::problem::{BoundarySpec, BvpProblem};
use crate::roots::illinois;
use crate::truncation::{check_solution_properties, compute_apriori_bounds, LowerUpperPair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub solver: SolverConfig,
    pub bc_tol: f64,
    pub nu_grid: usize,
    /// Reject (rather than only report) violated sign conditions on the pair.
    pub strict: bool,
    pub max_refine: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            bc_tol: 1e-6,
            nu_grid: 33,
            strict: false,
            max_refine: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub nu: f64,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    pub path: DiscretePath,
    pub report: SolveReport,
    pub nu: f64,
    pub score: f64,
    /// Grid profile of the (outer) sweep.
    pub profile: Vec<SweepPoint>,
}

struct Sweep<T> {
    nu: f64,
    score: f64,
    value: T,
    profile: Vec<SweepPoint>,
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi || n < 2 {
        return vec![lo];
    }
    let mut g: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    g[n - 1] = hi;
    g
}

/// Grid scan plus refinement of `eval` over `[lo, hi]`.
fn sweep<T, F>(lo: f64, hi: f64, level: SweepLevel, opts: &ShootOptions, eval: F) -> Result<Sweep<T>>
where
    T: Send + Clone,
    F: Fn(f64) -> Result<(f64, T)> + Sync,
{
    let nus = grid(lo, hi, opts.nu_grid);
    let wrap = |nu: f64, e: Error| match e {
        e @ Error::InnerSolve { .. } => e,
        e => Error::InnerSolve { nu, source: Box::new(e) },
    };
    let mut points: Vec<(f64, f64, T)> = Vec::with_capacity(nus.len());
    let results: Vec<Result<(f64, T)>> = nus.par_iter().map(|&nu| eval(nu)).collect();
    for (&nu, r) in nus.iter().zip(results) {
        let (s, v) = r.map_err(|e| wrap(nu, e))?;
        points.push((nu, s, v));
    }
    let profile: Vec<SweepPoint> = points.iter().map(|(nu, s, _)| SweepPoint { nu: *nu, score: *s }).collect();

    let hit = |s: f64| s.abs() <= opts.bc_tol;
    for k in (0..points.len()).rev() {
        if hit(points[k].1) {
            let (nu, score, value) = points.swap_remove(k);
            return Ok(Sweep { nu, score, value, profile });
        }
        if k == 0 {
            break;
        }
        let (a, b) = (&points[k - 1], &points[k]);
        if a.1.signum() != b.1.signum() && !hit(a.1) {
            let last = Mutex::new(None::<(f64, f64, T)>);
            let root = illinois(
                |nu| {
                    let (s, v) = eval(nu).map_err(|e| wrap(nu, e))?;
                    *last.lock().unwrap() = Some((nu, s, v));
                    Ok(s)
                },
                a.0,
                b.0,
                a.1,
                b.1,
                opts.bc_tol,
                opts.max_refine,
            )?;
            if !root.converged {
                return Err(Error::ShootingStalled { nu: root.x, score: root.fx });
            }
            let (nu, score, value) = last.into_inner().unwrap().filter(|(nu, _, _)| *nu == root.x).ok_or(
                Error::ShootingStalled { nu: root.x, score: root.fx },
            )?;
            return Ok(Sweep { nu, score, value, profile });
        }
    }
    Err(Error::NoSignChange {
        level,
        profile: profile.iter().map(|p| (p.nu, p.score)).collect(),
    })
}

type Solved = (DiscretePath, SolveReport);

fn dirichlet_solve(prob: &BvpProblem, mesh: &Arc<Mesh>, x0: f64, x1: f64, cfg: &SolverConfig) -> Result<Solved> {
    fixed_point_solve(&prob.as_dirichlet(x0, x1), mesh, None, cfg)
}

fn endpoint_flux(prob: &BvpProblem, path: &DiscretePath) -> Result<(f64, f64)> {
    let fl = compute_ax(path, &prob.coeff)?;
    Ok((fl.start, fl.end))
}

/// Records a hypothesis on the pair; in strict mode a violation is an error.
fn hypothesis(checks: &mut Vec<InvariantCheck>, name: &'static str, passed: bool, worst: f64, strict: bool) -> Result<()> {
    if strict && !passed {
        return Err(Error::Precondition { hypothesis: name, detail: format!("value {worst}") });
    }
    checks.push(InvariantCheck::new(format!("hypothesis:{name}"), passed, worst));
    Ok(())
}

/// Appends a-priori bounds and the post-solve property checks when the
/// problem carries Nagumo data.
pub fn attach_bounds(prob: &BvpProblem, pair: &LowerUpperPair, mesh: &Mesh, path: &DiscretePath, report: &mut SolveReport) -> Result<()> {
    if prob.nagumo.is_none() {
        return Ok(());
    }
    let bounds = compute_apriori_bounds(prob, pair, mesh)?;
    report.invariant_checks.extend(check_solution_properties(path, prob, pair, &bounds)?);
    report.apriori = Some(bounds);
    Ok(())
}

fn ensure_endpoint_coefficient(prob: &BvpProblem, pair: &LowerUpperPair) -> Result<()> {
    for (t, x) in [(0.0, pair.alpha.first()), (0.0, pair.beta.first()), (prob.t_end, pair.alpha.last()), (prob.t_end, pair.beta.last())] {
        let a = prob.coeff.a(t, x)?;
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Precondition {
                hypothesis: "a(0, x) != 0 and a(T, x) != 0",
                detail: format!("a({t}, {x}) = {a}"),
            });
        }
    }
    Ok(())
}

/// `x(T) = ρ(x(0))`, `g(x(0), x(T), 𝓐(0), 𝓐(T)) = 0`, shooting on `ν = x(0)`.
pub fn shoot_functional(prob: &BvpProblem, mesh: &Arc<Mesh>, pair: &LowerUpperPair, opts: &ShootOptions) -> Result<ShootResult> {
    let BoundarySpec::Functional { g, rho } = &prob.boundary else {
        return Err(Error::WrongBoundaryKind { expected: "functional" });
    };
    ensure_endpoint_coefficient(prob, pair)?;
    let rho_of = |r: f64| -> Result<f64> { Ok(rho.eval(&[r])?) };
    let g_of = |u: f64, v: f64, w: f64, z: f64| -> Result<f64> { Ok(g.eval(&[u, v, w, z])?) };

    let mut checks = Vec::new();
    let (aa0, aat) = endpoint_flux(prob, &pair.alpha)?;
    let (ba0, bat) = endpoint_flux(prob, &pair.beta)?;
    let ga = g_of(pair.alpha.first(), pair.alpha.last(), aa0, aat)?;
    let gb = g_of(pair.beta.first(), pair.beta.last(), ba0, bat)?;
    hypothesis(&mut checks, "g >= 0 at alpha", ga >= -opts.bc_tol, ga, opts.strict)?;
    hypothesis(&mut checks, "g <= 0 at beta", gb <= opts.bc_tol, gb, opts.strict)?;
    let ra = (pair.alpha.last() - rho_of(pair.alpha.first())?).abs();
    let rb = (pair.beta.last() - rho_of(pair.beta.first())?).abs();
    hypothesis(&mut checks, "alpha(T) = rho(alpha(0))", ra <= opts.bc_tol, ra, opts.strict)?;
    hypothesis(&mut checks, "beta(T) = rho(beta(0))", rb <= opts.bc_tol, rb, opts.strict)?;

    run_functional(prob, mesh, pair, opts, checks, &rho_of, &g_of)
}

fn run_functional(
    prob: &BvpProblem,
    mesh: &Arc<Mesh>,
    pair: &LowerUpperPair,
    opts: &ShootOptions,
    checks: Vec<InvariantCheck>,
    rho_of: &(dyn Fn(f64) -> Result<f64> + Sync),
    g_of: &(dyn Fn(f64, f64, f64, f64) -> Result<f64> + Sync),
) -> Result<ShootResult> {
    let eval = |nu: f64| -> Result<(f64, Solved)> {
        let solved = dirichlet_solve(prob, mesh, nu, rho_of(nu)?, &opts.solver)?;
        let (w, z) = endpoint_flux(prob, &solved.0)?;
        Ok((g_of(solved.0.first(), solved.0.last(), w, z)?, solved))
    };
    let sw = sweep(pair.alpha.first(), pair.beta.first(), SweepLevel::Single, opts, eval)?;
    let (path, mut report) = sw.value;
    let (w, z) = endpoint_flux(prob, &path)?;
    let rho_gap = path.last() - rho_of(path.first())?;
    report.invariant_checks.extend(checks);
    report.boundary = Some(BoundaryOutcome {
        kind: prob.boundary.kind_name().to_string(),
        nu: sw.nu,
        inner_nu: None,
        x0: path.first(),
        x_end: path.last(),
        ax0: w,
        ax_end: z,
        mismatches: vec![rho_gap, sw.score],
    });
    attach_bounds(prob, pair, mesh, &path, &mut report)?;
    Ok(ShootResult { path, report, nu: sw.nu, score: sw.score, profile: sw.profile })
}

/// Periodic conditions: `ρ(r) = r`, `g = 𝓐(0) - 𝓐(T)`. The pair must satisfy
/// `α(0) = α(T)`, `𝓐_α(0) >= 𝓐_α(T)` and the mirrored conditions for β.
pub fn solve_periodic(prob: &BvpProblem, mesh: &Arc<Mesh>, pair: &LowerUpperPair, opts: &ShootOptions) -> Result<ShootResult> {
    if !matches!(prob.boundary, BoundarySpec::Periodic) {
        return Err(Error::WrongBoundaryKind { expected: "periodic" });
    }
    ensure_endpoint_coefficient(prob, pair)?;
    let scale = 1.0 + pair.sup_norm();
    let tol = 1e-12 * scale;
    let (aa0, aat) = endpoint_flux(prob, &pair.alpha)?;
    let (ba0, bat) = endpoint_flux(prob, &pair.beta)?;
    let mut checks = Vec::new();
    let da = (pair.alpha.first() - pair.alpha.last()).abs();
    let db = (pair.beta.first() - pair.beta.last()).abs();
    hypothesis(&mut checks, "periodic: alpha(0) = alpha(T)", da <= tol, da, true)?;
    hypothesis(&mut checks, "periodic: beta(0) = beta(T)", db <= tol, db, true)?;
    let flux_tol = opts.bc_tol;
    hypothesis(&mut checks, "periodic: A_alpha(0) >= A_alpha(T)", aa0 >= aat - flux_tol, aa0 - aat, true)?;
    hypothesis(&mut checks, "periodic: A_beta(0) <= A_beta(T)", ba0 <= bat + flux_tol, ba0 - bat, true)?;

    let rho_of = |r: f64| -> Result<f64> { Ok(r) };
    let g_of = |_: f64, _: f64, w: f64, z: f64| -> Result<f64> { Ok(w - z) };
    run_functional(prob, mesh, pair, opts, checks, &rho_of, &g_of)
}

type ScoreFn<'a> = Box<dyn Fn(f64, f64) -> Result<f64> + Sync + 'a>;

fn separated_scores(boundary: &BoundarySpec) -> Result<(ScoreFn<'_>, ScoreFn<'_>)> {
    Ok(match boundary {
        BoundarySpec::Separated { p, q } => (
            Box::new(move |s, w| Ok(p.eval(&[s, w])?)),
            Box::new(move |s, w| Ok(q.eval(&[s, w])?)),
        ),
        &BoundarySpec::SturmLiouville { l1, m1, nu1, l2, m2, nu2 } => {
            if m1 < 0.0 || m2 < 0.0 {
                return Err(Error::Precondition {
                    hypothesis: "sturm-liouville: m1, m2 >= 0",
                    detail: format!("m1 = {m1}, m2 = {m2}"),
                });
            }
            (
                Box::new(move |s, w| Ok(l1 * s + m1 * w - nu1)),
                Box::new(move |s, w| Ok(l2 * s - m2 * w - nu2)),
            )
        }
        &BoundarySpec::Neumann { nu1, nu2 } => (Box::new(move |_, w| Ok(w - nu1)), Box::new(move |_, w| Ok(nu2 - w))),
        _ => return Err(Error::WrongBoundaryKind { expected: "separated, sturm_liouville or neumann" }),
    })
}

/// `p(x(0), 𝓐(0)) = 0`, `q(x(T), 𝓐(T)) = 0` (Sturm–Liouville and Neumann
/// conditions are special cases). Outer sweep on `ν = x(T)` scored by `q`;
/// for each ν an inner sweep on `μ = x(0)` zeroes `p`.
pub fn solve_separated(prob: &BvpProblem, mesh: &Arc<Mesh>, pair: &LowerUpperPair, opts: &ShootOptions) -> Result<ShootResult> {
    let (p, q) = separated_scores(&prob.boundary)?;
    ensure_endpoint_coefficient(prob, pair)?;

    let mut checks = Vec::new();
    let (aa0, aat) = endpoint_flux(prob, &pair.alpha)?;
    let (ba0, bat) = endpoint_flux(prob, &pair.beta)?;
    let tol = opts.bc_tol;
    let v = p(pair.alpha.first(), aa0)?;
    hypothesis(&mut checks, "p >= 0 at alpha(0)", v >= -tol, v, opts.strict)?;
    let v = q(pair.alpha.last(), aat)?;
    hypothesis(&mut checks, "q >= 0 at alpha(T)", v >= -tol, v, opts.strict)?;
    let v = p(pair.beta.first(), ba0)?;
    hypothesis(&mut checks, "p <= 0 at beta(0)", v <= tol, v, opts.strict)?;
    let v = q(pair.beta.last(), bat)?;
    hypothesis(&mut checks, "q <= 0 at beta(T)", v <= tol, v, opts.strict)?;

    let inner = |nu: f64| -> Result<(f64, Solved)> {
        let eval = |mu: f64| -> Result<(f64, Solved)> {
            let solved = dirichlet_solve(prob, mesh, mu, nu, &opts.solver)?;
            let (w, _) = endpoint_flux(prob, &solved.0)?;
            Ok((p(mu, w)?, solved))
        };
        let sw = sweep(pair.alpha.first(), pair.beta.first(), SweepLevel::Inner, opts, eval)?;
        let (path, report) = sw.value;
        Ok((sw.nu, (path, report)))
    };
    let outer = |nu: f64| -> Result<(f64, (f64, Solved))> {
        let (mu, solved) = inner(nu)?;
        let (_, z) = endpoint_flux(prob, &solved.0)?;
        Ok((q(solved.0.last(), z)?, (mu, solved)))
    };
    let sw = sweep(pair.alpha.last(), pair.beta.last(), SweepLevel::Outer, opts, outer)?;
    let (mu, (path, mut report)) = sw.value;
    let (w, z) = endpoint_flux(prob, &path)?;
    report.invariant_checks.extend(checks);
    report.boundary = Some(BoundaryOutcome {
        kind: prob.boundary.kind_name().to_string(),
        nu: sw.nu,
        inner_nu: Some(mu),
        x0: path.first(),
        x_end: path.last(),
        ax0: w,
        ax_end: z,
        mismatches: vec![p(path.first(), w)?, q(path.last(), z)?],
    });
    attach_bounds(prob, pair, mesh, &path, &mut report)?;
    Ok(ShootResult { path, report, nu: sw.nu, score: sw.score, profile: sw.profile })
}

/// Dispatches on the boundary kind. Dirichlet problems are solved directly.
pub fn solve(prob: &BvpProblem, mesh: &Arc<Mesh>, pair: Option<&LowerUpperPair>, opts: &ShootOptions) -> Result<ShootResult> {
    if let BoundarySpec::Dirichlet { nu2, .. } = prob.boundary {
        let (path, mut report) = fixed_point_solve(prob, mesh, None, &opts.solver)?;
        if let Some(pair) = pair {
            attach_bounds(prob, pair, mesh, &path, &mut report)?;
        }
        let score = path.last() - nu2;
        return Ok(ShootResult { path, report, nu: nu2, score, profile: Vec::new() });
    }
    let pair = pair.ok_or(Error::Missing("lower/upper pair (required for shooting)"))?;
    match prob.boundary {
        BoundarySpec::Functional { .. } => shoot_functional(prob, mesh, pair, opts),
        BoundarySpec::Periodic => solve_periodic(prob, mesh, pair, opts),
        _ => solve_separated(prob, mesh, pair, opts),
    }
}
