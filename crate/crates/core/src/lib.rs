//! Numerical solver for possibly singular Φ-Laplacian boundary value problems
//!
//! ```text
//! (Φ(a(t, x) x'))' = f(t, x, x')   on [0, T]
//! ```
//!
//! with Dirichlet, functional, periodic, Sturm–Liouville, Neumann or general
//! separated boundary conditions. The coefficient `a` may vanish where its
//! lower envelope `h` does, as long as `1/h ∈ L^p`.
//!
//! Dirichlet problems are solved by iterating the integral operator
//! `𝓟x(t) = ν₁ + ∫₀ᵗ Φ⁻¹(ξ_x + 𝓕_x) / a(s, x)` on a graded mesh. Given a
//! lower/upper pair and growth data, [`truncation`] computes the a-priori
//! bounds and builds the truncated problem; [`general`] reduces the other
//! boundary conditions to shooting over Dirichlet solves.

pub mod cli;
pub mod config;
pub mod dirichlet;
pub mod error;
pub mod expr;
pub mod general;
pub mod mesh;
pub mod output;
pub mod path;
pub mod phi;
pub mod problem;
pub mod roots;
pub mod truncation;

pub use dirichlet::{
    apply_p, compute_ax, cumulative_forcing, fixed_point_solve, residual_l1, solve_xi, SolveReport, SolverConfig,
};
pub use error::{Error, ExprError, Result};
pub use expr::Expression;
pub use general::{shoot_functional, solve_periodic, solve_separated, ShootOptions, ShootResult};
pub use mesh::{CellFunction, Mesh};
pub use path::DiscretePath;
pub use phi::Homeomorphism;
pub use problem::{validate_problem, BoundarySpec, BvpProblem, Coefficient, NagumoData, ValidationReport};
pub use truncation::{
    build_truncated, check_solution_properties, clamp_d, clamp_t, compute_apriori_bounds, f_star_eval,
    verify_lower_upper, AprioriBounds, LowerUpperPair,
};
