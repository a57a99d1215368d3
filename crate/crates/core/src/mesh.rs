//! Graded meshes on `[0, T]` and midpoint quadrature.
//!
//! Cells are refined toward declared singular points with the power law
//! `s + L (i/m)^g`, so widths near `s` scale like `dist^(1 - 1/g)`.
//! Integrands are only ever sampled at cell midpoints, never at nodes, so a
//! lower envelope `h` that vanishes at a singular node is never divided by.

use std::ops::{Deref, DerefMut};

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 4;
pub const DEFAULT_GRADING: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    t_end: f64,
    nodes: Vec<f64>,
    singular_points: Vec<f64>,
    grading: f64,
}

/// One value per cell, sampled at the cell midpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct CellFunction(pub Vec<f64>);

impl Deref for CellFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for CellFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for CellFunction {
    fn from(v: Vec<f64>) -> Self {
        CellFunction(v)
    }
}

impl FromIterator<f64> for CellFunction {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        CellFunction(iter.into_iter().collect())
    }
}

/// Half-open piece of the interval with its grading direction.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    end: f64,
    /// grade toward `start` (true) or `end` (false); `None` for uniform.
    toward_start: Option<bool>,
}

impl Mesh {
    /// Builds an `n`-cell mesh on `[0, t_end]` graded toward each singular
    /// point. Without singular points the mesh is uniform.
    pub fn build(t_end: f64, singular_points: &[f64], n: usize, grading: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidMesh(format!("interval length {t_end}")));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::InvalidMesh(format!("grading exponent {grading} < 1")));
        }
        if n < MIN_CELLS {
            return Err(Error::MeshTooSmall { n, min: MIN_CELLS });
        }
        let mut singular: Vec<f64> = Vec::with_capacity(singular_points.len());
        for &s in singular_points {
            if !(0.0..=t_end).contains(&s) {
                return Err(Error::SingularPointOutside { point: s, t_end });
            }
            singular.push(s);
        }
        singular.sort_by(f64::total_cmp);
        singular.dedup();

        let pieces = split_pieces(t_end, &singular);
        if pieces.len() > n {
            return Err(Error::MeshTooSmall {
                n,
                min: pieces.len(),
            });
        }
        let counts = allocate_cells(&pieces, n);

        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        for (piece, &m) in pieces.iter().zip(&counts) {
            let len = piece.end - piece.start;
            for i in 1..=m {
                let u = i as f64 / m as f64;
                let t = match piece.toward_start {
                    None => piece.start + len * u,
                    Some(true) => piece.start + len * u.powf(grading),
                    Some(false) => piece.end - len * (1.0 - u).powf(grading),
                };
                nodes.push(t);
            }
            // pin piece ends exactly
            *nodes.last_mut().unwrap() = piece.end;
        }
        Ok(Self {
            t_end,
            nodes,
            singular_points: singular,
            grading,
        })
    }

    /// Uniform mesh, no singular points.
    pub fn uniform(t_end: f64, n: usize) -> Result<Self> {
        Self::build(t_end, &[], n, DEFAULT_GRADING)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// Index of the cell containing `t` (clamped to the interval).
    pub fn cell_of(&self, t: f64) -> usize {
        let n = self.n_cells();
        match self.nodes.binary_search_by(|node| node.total_cmp(&t)) {
            Ok(k) => k.min(n - 1),
            Err(k) => k.saturating_sub(1).min(n - 1),
        }
    }

    /// Samples `f` at every cell midpoint.
    pub fn sample_cells<E>(&self, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<CellFunction, E> {
        self.midpoints().map(&mut f).collect::<Result<Vec<_>, E>>().map(CellFunction)
    }

    fn check_len(&self, w: &CellFunction) -> Result<()> {
        if w.len() != self.n_cells() {
            return Err(Error::LengthMismatch {
                expected: self.n_cells(),
                found: w.len(),
            });
        }
        Ok(())
    }

    /// Composite midpoint rule `Σ w_i Δt_i`.
    pub fn integrate(&self, w: &CellFunction) -> Result<f64> {
        self.check_len(w)?;
        let mut sum = 0.0;
        for (i, (&v, dt)) in w.iter().zip(self.widths()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { cell: i, value: v });
            }
            sum += v * dt;
        }
        Ok(sum)
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives the max over cells.
    pub fn lp_norm(&self, w: &CellFunction, p: f64) -> Result<f64> {
        self.check_len(w)?;
        if let Some((cell, &value)) = w.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { cell, value });
        }
        if p.is_infinite() {
            return Ok(w.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidMesh(format!("L^p norm needs p >= 1, got {p}")));
        }
        let powered: CellFunction = w.iter().map(|v| v.abs().powf(p)).collect();
        Ok(self.integrate(&powered)?.powf(1.0 / p))
    }
}

fn split_pieces(t_end: f64, singular: &[f64]) -> Vec<Piece> {
    if singular.is_empty() {
        return vec![Piece {
            start: 0.0,
            end: t_end,
            toward_start: None,
        }];
    }
    let mut breaks = vec![0.0];
    breaks.extend(singular.iter().copied().filter(|&s| s > 0.0 && s < t_end));
    breaks.push(t_end);
    let is_singular = |t: f64| singular.contains(&t);

    let mut pieces = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        match (is_singular(a), is_singular(b)) {
            (true, true) => {
                let mid = 0.5 * (a + b);
                pieces.push(Piece { start: a, end: mid, toward_start: Some(true) });
                pieces.push(Piece { start: mid, end: b, toward_start: Some(false) });
            }
            (true, false) => pieces.push(Piece { start: a, end: b, toward_start: Some(true) }),
            (false, true) => pieces.push(Piece { start: a, end: b, toward_start: Some(false) }),
            (false, false) => pieces.push(Piece { start: a, end: b, toward_start: None }),
        }
    }
    pieces
}

/// Distributes `n` cells proportionally to piece length (largest remainder,
/// at least one cell per piece).
fn allocate_cells(pieces: &[Piece], n: usize) -> Vec<usize> {
    let total: f64 = pieces.iter().map(|p| p.end - p.start).sum();
    let spare = n - pieces.len();
    let shares: Vec<f64> = pieces
        .iter()
        .map(|p| spare as f64 * (p.end - p.start) / total)
        .collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| 1 + s.floor() as usize).collect();
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = shares[i] - shares[i].floor();
        let rj = shares[j] - shares[j].floor();
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_fallback() {
        let m = Mesh::build(1.0, &[], 4, 3.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn cubic_grading_at_zero() {
        let m = Mesh::build(1.0, &[0.0], 4, 3.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.015625, 0.125, 0.421875, 1.0]);
    }

    #[test]
    fn two_sided_grading_is_mirror_symmetric() {
        let m = Mesh::build(2.0, &[0.0, 2.0], 8, 3.0).unwrap();
        let t = m.nodes();
        assert_eq!(t.len(), 9);
        for i in 0..=8 {
            assert!((t[i] + t[8 - i] - 2.0).abs() < 1e-15, "{t:?}");
        }
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn interior_singular_point_is_a_node() {
        let m = Mesh::build(1.0, &[0.3], 64, 3.0).unwrap();
        assert!(m.nodes().contains(&0.3));
        assert_eq!(m.n_cells(), 64);
        let k = m.nodes().iter().position(|&t| t == 0.3).unwrap();
        // graded: neighbouring cells are the smallest
        let w_near = m.width(k);
        assert!(m.widths().all(|w| w >= w_near * (1.0 - 1e-12)));
    }

    #[test]
    fn width_scaling_near_singular_point() {
        let m = Mesh::build(1.0, &[0.0], 1000, 3.0).unwrap();
        // width ~ C dist^(2/3): ratio of width/dist^(2/3) roughly constant
        let r = |i: usize| m.width(i) / m.nodes()[i].powf(2.0 / 3.0);
        let (a, b) = (r(50), r(200));
        assert!((a / b - 1.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(Mesh::build(1.0, &[], 2, 3.0), Err(Error::MeshTooSmall { .. })));
        assert!(matches!(
            Mesh::build(1.0, &[1.5], 16, 3.0),
            Err(Error::SingularPointOutside { .. })
        ));
    }

    #[test]
    fn integrate_examples() {
        let m = Mesh::uniform(1.0, 16).unwrap();
        let one = CellFunction(vec![1.0; 16]);
        assert!((m.integrate(&one).unwrap() - 1.0).abs() < 1e-15);

        let g = Mesh::build(1.0, &[0.0], 2048, 3.0).unwrap();
        let w = g.sample_cells::<Error>(|t| Ok(t.powf(-1.0 / 3.0))).unwrap();
        assert!((g.integrate(&w).unwrap() - 1.5).abs() < 1e-3);
        let w = g.sample_cells::<Error>(|t| Ok(1.0 / t.powf(0.2))).unwrap();
        assert!((g.integrate(&w).unwrap() - 1.25).abs() < 1e-3);
    }

    #[test]
    fn non_finite_cell_is_named() {
        let m = Mesh::uniform(1.0, 8).unwrap();
        let mut w = CellFunction(vec![1.0; 8]);
        w[5] = f64::NAN;
        match m.integrate(&w) {
            Err(Error::NonFiniteIntegrand { cell, .. }) => assert_eq!(cell, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn norms() {
        let m = Mesh::uniform(1.0, 64).unwrap();
        let two = CellFunction(vec![2.0; 64]);
        assert!((m.lp_norm(&two, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let minus3 = CellFunction(vec![-3.0; 64]);
        assert_eq!(m.lp_norm(&minus3, f64::INFINITY).unwrap(), 3.0);
        let fine = Mesh::uniform(1.0, 1024).unwrap();
        let t = fine.sample_cells::<Error>(Ok).unwrap();
        assert!((fine.lp_norm(&t, 2.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn quadrature_error_decreases_under_doubling() {
        let mut prev = f64::INFINITY;
        let mut n = 128;
        while n <= 4096 {
            let g = Mesh::build(1.0, &[0.0], n, 3.0).unwrap();
            let w = g.sample_cells::<Error>(|t| Ok(t.powf(-1.0 / 3.0))).unwrap();
            let err = (g.integrate(&w).unwrap() - 1.5).abs();
            assert!(err < prev, "n={n}: {err} >= {prev}");
            prev = err;
            n *= 2;
        }
    }

    #[test]
    fn integrate_is_linear() {
        let g = Mesh::build(1.0, &[0.0, 0.5], 300, 2.0).unwrap();
        let w1 = g.sample_cells::<Error>(|t| Ok(t.sin())).unwrap();
        let w2 = g.sample_cells::<Error>(|t| Ok(1.0 / (1.0 + t))).unwrap();
        let (a, b) = (2.5, -0.75);
        let combo: CellFunction = w1.iter().zip(w2.iter()).map(|(x, y)| a * x + b * y).collect();
        let lhs = g.integrate(&combo).unwrap();
        let rhs = a * g.integrate(&w1).unwrap() + b * g.integrate(&w2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
