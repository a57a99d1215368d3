mod common;

use common::{fixture, sup_error};
use phi_bvp::*;

#[test]
fn r_laplacian_error_shrinks_with_the_mesh() {
    let cfg = fixture("r_laplacian.cfg");
    let errs: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let mesh = cfg.problem.mesh(n, cfg.mesh.grading).unwrap();
            let (x, rep) = fixed_point_solve(&cfg.problem, &mesh, None, &cfg.shoot.solver).unwrap();
            assert!(rep.converged && rep.all_checks_pass(), "{:?}", rep.invariant_checks);
            sup_error(&x, |t| t * (1.0 - t))
        })
        .collect();
    assert!(errs[0] <= 5e-3, "{errs:?}");
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn r_laplacian_flux_matches_the_manufactured_flux() {
    let cfg = fixture("r_laplacian.cfg");
    let mesh = cfg.problem.mesh(2048, cfg.mesh.grading).unwrap();
    let (x, _) = fixed_point_solve(&cfg.problem, &mesh, None, &cfg.shoot.solver).unwrap();
    let flux = compute_ax(&x, &cfg.problem.coeff).unwrap();
    let worst = mesh
        .midpoints()
        .zip(flux.cells.iter())
        .map(|(t, v)| {
            let xs = t * (1.0 - t);
            (v - (t.cbrt() + xs * xs) * (1.0 - 2.0 * t)).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
}

fn truncated_solve(name: &str) -> (config::ProblemConfig, DiscretePath, BvpProblem, LowerUpperPair, AprioriBounds) {
    let cfg = fixture(name);
    let mesh = cfg.problem.mesh(cfg.mesh.n, cfg.mesh.grading).unwrap();
    let pair = LowerUpperPair::from_problem(&cfg.problem, &mesh).unwrap();
    let bounds = compute_apriori_bounds(&cfg.problem, &pair, &mesh).unwrap();
    let tp = build_truncated(&cfg.problem, &pair, &bounds).unwrap();
    let (x, rep) = fixed_point_solve(&tp, &mesh, None, &cfg.shoot.solver).unwrap();
    assert!(rep.converged);
    (cfg, x, tp, pair, bounds)
}

#[test]
fn examples_stay_inside_their_pairs() {
    for name in ["example1.cfg", "example2.cfg"] {
        let (_, x, tp, pair, bounds) = truncated_solve(name);
        let checks = check_solution_properties(&x, &tp, &pair, &bounds).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{name}: {checks:?}");
        assert!(x.nodes().iter().all(|v| (-1.0..=1.0).contains(v)), "{name}");
    }
}

#[test]
fn truncated_solutions_solve_the_original_problem() {
    for name in ["example1.cfg", "example2.cfg"] {
        let (cfg, x, tp, ..) = truncated_solve(name);
        let truncated = residual_l1(&x, &tp).unwrap();
        let original = residual_l1(&x, &cfg.problem).unwrap();
        assert!(original <= truncated + 1e-9, "{name}: {original} > {truncated}");
    }
}

#[test]
fn example2_growth_exponents_are_admissible() {
    let cfg = fixture("example2.cfg");
    let g = cfg.problem.growth.unwrap();
    assert!(g.integrability_sum() < 1.0);
    assert_eq!(g.q(), 2.0);
    let mesh = cfg.problem.mesh(256, 3.0).unwrap();
    let rep = validate_problem(&cfg.problem, &mesh, 64);
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
}

#[test]
fn example1_bounds_are_stable_under_refinement() {
    let cfg = fixture("example1.cfg");
    let l_m: Vec<f64> = [256, 1024]
        .iter()
        .map(|&n| {
            let mesh = cfg.problem.mesh(n, cfg.mesh.grading).unwrap();
            let pair = LowerUpperPair::from_problem(&cfg.problem, &mesh).unwrap();
            compute_apriori_bounds(&cfg.problem, &pair, &mesh).unwrap().l_m
        })
        .collect();
    assert!((l_m[0] - l_m[1]).abs() <= 1e-3 * l_m[1], "{l_m:?}");
}
