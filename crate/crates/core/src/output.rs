//! CSV and JSON emission. Reals are written with 17 significant digits so
//! that every value round-trips exactly.

use std::io::Write;

use serde::Serialize;

use crate::dirichlet::{compute_ax, local_residuals, SolveReport};
use crate::error::Result;
use crate::general::SweepPoint;
use crate::path::DiscretePath;
use crate::problem::{BvpProblem, ValidationReport};
use crate::truncation::{AprioriBounds, SideReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Node table `t, x, dx, Ax, local_residual`. Interior `dx` and `Ax` are the
/// means of the two adjacent cells; endpoint `Ax` is extrapolated and
/// endpoint `dx` is taken from the adjacent cell.
pub fn write_solution_csv<W: Write>(mut w: W, path: &DiscretePath, prob: &BvpProblem) -> Result<()> {
    let mesh = path.mesh();
    let n = mesh.n_cells();
    let flux = compute_ax(path, &prob.coeff)?;
    let res = local_residuals(path, prob)?;
    let d = path.derivs();
    writeln!(w, "t,x,dx,Ax,local_residual")?;
    for (k, (&t, &x)) in mesh.nodes().iter().zip(path.nodes()).enumerate() {
        let (dx, ax) = match k {
            0 => (d[0], flux.start),
            k if k == n => (d[n - 1], flux.end),
            k => (0.5 * (d[k - 1] + d[k]), 0.5 * (flux.cells[k - 1] + flux.cells[k])),
        };
        writeln!(w, "{t:.16e},{x:.16e},{dx:.16e},{ax:.16e},{:.16e}", res[k])?;
    }
    Ok(())
}

pub fn write_profile_csv<W: Write>(mut w: W, profile: &[SweepPoint]) -> Result<()> {
    writeln!(w, "nu,score")?;
    for p in profile {
        writeln!(w, "{:.16e},{:.16e}", p.nu, p.score)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ValidationFailed,
    NonConvergence,
    NoSignChange,
    Failed,
}

/// Top-level JSON document written by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub status: Status,
    pub boundary_kind: String,
    pub mesh_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<AprioriBounds>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sides: Vec<SideReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub profile: Vec<SweepPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(command: &str, prob: &BvpProblem, mesh_cells: usize) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            status: Status::Ok,
            boundary_kind: prob.boundary.kind_name().to_string(),
            mesh_cells,
            validation: None,
            solve: None,
            bounds: None,
            sides: Vec::new(),
            profile: Vec::new(),
            error: None,
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::Homeomorphism;
    use crate::problem::{BoundarySpec, Coefficient};

    #[test]
    fn csv_round_trips_doubles() {
        let prob = BvpProblem::new(1.0, Homeomorphism::identity(), Coefficient::unit(), "0", BoundarySpec::Dirichlet { nu1: 0.0, nu2: 1.0 }).unwrap();
        let mesh = prob.mesh(7, 3.0).unwrap();
        let x = DiscretePath::from_fn(mesh, |t| (t * 3.0).sin() / 7.0);
        let mut buf = Vec::new();
        write_solution_csv(&mut buf, &x, &prob).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,dx,Ax,local_residual"));
        for (line, want) in lines.zip(x.nodes()) {
            let got: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(got, *want);
        }
    }

    #[test]
    fn report_is_versioned() {
        let prob = BvpProblem::new(1.0, Homeomorphism::identity(), Coefficient::unit(), "0", BoundarySpec::Periodic).unwrap();
        let mut buf = Vec::new();
        write_json(&mut buf, &RunReport::new("solve", &prob, 8)).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["status"], "ok");
        assert_eq!(v["boundary_kind"], "periodic");
    }
}
