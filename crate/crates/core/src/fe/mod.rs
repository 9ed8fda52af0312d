//! 1D P1 finite elements and the full-order Q1 reference solver.

mod field;
mod solver2d;

pub use field::{h1_seminorm_diff, relative_l2_error, Field2D};
pub use solver2d::{fe2d_assemble_dense, fe2d_solve, fe2d_solve_with, FeSolution};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::quadrature::{gauss_legendre, QuadratureRule};

/// Uniform partition of `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_elems: usize,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn uniform(a: f64, b: f64, n_elems: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("grid needs a < b, got [{a}, {b}]")));
        }
        if n_elems == 0 {
            return Err(Error::InvalidArgument("grid needs at least one element".into()));
        }
        let h = (b - a) / n_elems as f64;
        let mut nodes: Vec<f64> = (0..=n_elems).map(|i| a + i as f64 * h).collect();
        nodes[n_elems] = b;
        Ok(Self { a, b, n_elems, nodes })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elems + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_elems as f64
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Element index and local coordinate `t ∈ [0, 1]` containing `x`.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * self.length();
        if x < self.a - tol || x > self.b + tol || !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point {x} outside [{}, {}]",
                self.a, self.b
            )));
        }
        let s = ((x - self.a) / self.h()).clamp(0.0, self.n_elems as f64);
        let e = (s.floor() as usize).min(self.n_elems - 1);
        Ok((e, (s - e as f64).clamp(0.0, 1.0)))
    }

    /// P1 interpolation of nodal `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        debug_assert_eq!(values.len(), self.n_nodes());
        let (e, t) = self.locate(x)?;
        Ok(if t == 0.0 { values[e] } else { (1.0 - t) * values[e] + t * values[e + 1] })
    }

    /// P1 interpolation weights at `x`: `[(node, weight); 2]`.
    pub fn shape_at(&self, x: f64) -> Result<[(usize, f64); 2]> {
        let (e, t) = self.locate(x)?;
        Ok([(e, 1.0 - t), (e + 1, t)])
    }

    /// Per-element Gauss rule of `points` points, as (element, rule) pairs.
    fn element_rules(&self, points: usize) -> impl Iterator<Item = (usize, QuadratureRule)> + '_ {
        let base = gauss_legendre(points).expect("points >= 1");
        (0..self.n_elems).map(move |e| (e, base.mapped(self.nodes[e], self.nodes[e + 1])))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn uniform(x0: f64, x1: f64, nx: usize, y0: f64, y1: f64, ny: usize) -> Result<Self> {
        Ok(Self { x: Grid1D::uniform(x0, x1, nx)?, y: Grid1D::uniform(y0, y1, ny)? })
    }

    pub fn over(domain: &crate::problem::Rect, nx: usize, ny: usize) -> Result<Self> {
        Self::uniform(domain.x0, domain.x1, nx, domain.y0, domain.y1, ny)
    }

    pub fn n_nodes(&self) -> usize {
        self.x.n_nodes() * self.y.n_nodes()
    }
}

/// Assembles `Σ_e local(h)` into a dense tridiagonal matrix.
fn assemble_1d(grid: &Grid1D, local: impl Fn(f64) -> [[f64; 2]; 2]) -> DenseMatrix {
    let n = grid.n_nodes();
    let mut m = DenseMatrix::zeros(n, n);
    for e in 0..grid.n_elems() {
        let h = grid.nodes[e + 1] - grid.nodes[e];
        let loc = local(h);
        for (a, row) in loc.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                m[(e + a, e + b)] += v;
            }
        }
    }
    m
}

/// `M_il = ∫ θ_i θ_l`
pub fn assemble_mass_1d(grid: &Grid1D) -> DenseMatrix {
    assemble_1d(grid, |h| [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]])
}

/// `K_il = ∫ θ'_i θ'_l`
pub fn assemble_stiffness_1d(grid: &Grid1D) -> DenseMatrix {
    assemble_1d(grid, |h| [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]])
}

/// `C_il = ∫ θ'_l θ_i` (row = test function, column = differentiated trial function).
pub fn assemble_convection_1d(grid: &Grid1D) -> DenseMatrix {
    assemble_1d(grid, |_| [[-0.5, 0.5], [-0.5, 0.5]])
}

/// `M_il = ∫ w θ_i θ_l` for a weight `w`, integrated with `points`-point Gauss per element.
pub fn assemble_weighted_mass_1d(grid: &Grid1D, weight: impl Fn(f64) -> f64, points: usize) -> DenseMatrix {
    let n = grid.n_nodes();
    let mut m = DenseMatrix::zeros(n, n);
    for (e, rule) in grid.element_rules(points) {
        let (xa, h) = (grid.nodes[e], grid.nodes[e + 1] - grid.nodes[e]);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = (x - xa) / h;
            let phi = [1.0 - t, t];
            let wx = w * weight(*x);
            for a in 0..2 {
                for b in 0..2 {
                    m[(e + a, e + b)] += wx * phi[a] * phi[b];
                }
            }
        }
    }
    m
}

/// `[f]_i = ∫ f θ_i` with `points`-point Gauss per element.
pub fn load_vector_1d(grid: &Grid1D, f: impl Fn(f64) -> f64, points: usize) -> DenseVector {
    let mut out = vec![0.0; grid.n_nodes()];
    for (e, rule) in grid.element_rules(points) {
        let (xa, h) = (grid.nodes[e], grid.nodes[e + 1] - grid.nodes[e]);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = (x - xa) / h;
            let fw = w * f(*x);
            out[e] += fw * (1.0 - t);
            out[e + 1] += fw * t;
        }
    }
    out
}

/// Quadrature points per element for load vectors of smooth but sharp data.
pub const LOAD_POINTS: usize = 5;
