//! Piecewise-linear paths on a mesh: node values plus cell derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{CellFunction, Mesh};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    mesh: Arc<Mesh>,
    nodes: Vec<f64>,
    derivs: CellFunction,
}

impl DiscretePath {
    pub fn from_nodes(mesh: Arc<Mesh>, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() != mesh.nodes().len() {
            return Err(Error::LengthMismatch {
                expected: mesh.nodes().len(),
                found: nodes.len(),
            });
        }
        let derivs = divided_differences(&mesh, &nodes);
        Ok(Self { mesh, nodes, derivs })
    }

    pub fn from_fn(mesh: Arc<Mesh>, mut f: impl FnMut(f64) -> f64) -> Self {
        let nodes: Vec<f64> = mesh.nodes().iter().map(|&t| f(t)).collect();
        let derivs = divided_differences(&mesh, &nodes);
        Self { mesh, nodes, derivs }
    }

    /// Straight line from `(0, x0)` to `(T, x1)`.
    pub fn linear(mesh: Arc<Mesh>, x0: f64, x1: f64) -> Self {
        let t_end = mesh.t_end();
        Self::from_fn(mesh, |t| x0 + (x1 - x0) * t / t_end)
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        Self::from_fn(mesh, |_| c)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn derivs(&self) -> &CellFunction {
        &self.derivs
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Linear interpolant at the midpoint of cell `i`.
    pub fn mid_value(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.mesh.cell_of(t);
        self.nodes[i] + self.derivs[i] * (t - self.mesh.nodes()[i])
    }

    pub fn deriv_at(&self, t: f64) -> f64 {
        self.derivs[self.mesh.cell_of(t)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_k |x_k - y_k| + ∫ |x' - y'|`, the discrete W^{1,1} distance.
    pub fn distance(&self, other: &DiscretePath) -> f64 {
        let sup = self
            .nodes
            .iter()
            .zip(&other.nodes)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let l1: f64 = self
            .derivs
            .iter()
            .zip(other.derivs.iter())
            .zip(self.mesh.widths())
            .map(|((a, b), dt)| (a - b).abs() * dt)
            .sum();
        sup + l1
    }

    /// `(1 - lambda) self + lambda other`.
    pub fn blend(&self, other: &DiscretePath, lambda: f64) -> DiscretePath {
        let nodes = self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
            .collect();
        DiscretePath::from_nodes(self.mesh.clone(), nodes).expect("same mesh")
    }

    /// Discrete `‖x‖_∞ + ‖x'‖_p`.
    pub fn w1p_norm(&self, p: f64) -> Result<f64> {
        Ok(self.sup_norm() + self.mesh.lp_norm(&self.derivs, p)?)
    }
}

fn divided_differences(mesh: &Mesh, nodes: &[f64]) -> CellFunction {
    nodes
        .windows(2)
        .zip(mesh.widths())
        .map(|(w, dt)| (w[1] - w[0]) / dt)
        .collect()
}
