use std::io::Write;

use super::Grid2D;
use crate::error::{Error, Result};

/// Nodal values on a structured grid, x-major: value `(i, j)` lives at
/// `i * ny_nodes + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "field needs {} values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite field value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let n = grid.n_nodes();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for x in grid.x.nodes() {
            for y in grid.y.nodes() {
                values.push(f(*x, *y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.y.n_nodes() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at an arbitrary point of the grid's rectangle.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        let sx = self.grid.x.shape_at(x)?;
        let sy = self.grid.y.shape_at(y)?;
        let mut v = 0.0;
        for (i, wx) in sx {
            for (j, wy) in sy {
                if wx != 0.0 && wy != 0.0 {
                    v += wx * wy * self.at(i, j);
                }
            }
        }
        Ok(v)
    }

    /// Legacy VTK `STRUCTURED_POINTS` (ASCII), x varying fastest.
    pub fn write_vtk(&self, mut w: impl Write, title: &str) -> Result<()> {
        let (gx, gy) = (&self.grid.x, &self.grid.y);
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{title}")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET STRUCTURED_POINTS")?;
        writeln!(w, "DIMENSIONS {} {} 1", gx.n_nodes(), gy.n_nodes())?;
        writeln!(w, "ORIGIN {:.14e} {:.14e} 0", gx.a(), gy.a())?;
        writeln!(w, "SPACING {:.14e} {:.14e} 1", gx.h(), gy.h())?;
        writeln!(w, "POINT_DATA {}", self.grid.n_nodes())?;
        writeln!(w, "SCALARS u double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for j in 0..gy.n_nodes() {
            for i in 0..gx.n_nodes() {
                writeln!(w, "{:.14e}", self.at(i, j))?;
            }
        }
        Ok(())
    }

    /// `x,y,value` rows, x-major.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,y,value")?;
        for (i, x) in self.grid.x.nodes().iter().enumerate() {
            for (j, y) in self.grid.y.nodes().iter().enumerate() {
                writeln!(w, "{x:.14e},{y:.14e},{:.14e}", self.at(i, j))?;
            }
        }
        Ok(())
    }
}

fn same_grid(a: &Grid2D, b: &Grid2D) -> bool {
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * (1.0 + p.abs().max(q.abs()));
    a.x.n_elems() == b.x.n_elems()
        && a.y.n_elems() == b.y.n_elems()
        && close(a.x.a(), b.x.a())
        && close(a.x.b(), b.x.b())
        && close(a.y.a(), b.y.a())
        && close(a.y.b(), b.y.b())
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// `∫ (u - ref)²` and `∫ ref²` over all cells with 2×2 Gauss per cell.
fn l2_sums(u: &Field2D, reference: &Field2D) -> (f64, f64) {
    let g = &u.grid;
    let (hx, hy) = (g.x.h(), g.y.h());
    let w = 0.25 * hx * hy;
    let (mut diff, mut norm) = (0.0, 0.0);
    for i in 0..g.x.n_elems() {
        for j in 0..g.y.n_elems() {
            let corners = |f: &Field2D| [f.at(i, j), f.at(i + 1, j), f.at(i, j + 1), f.at(i + 1, j + 1)];
            let cu = corners(u);
            let cr = corners(reference);
            for s in GAUSS2 {
                for t in GAUSS2 {
                    let phi = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
                    let vu: f64 = phi.iter().zip(&cu).map(|(p, c)| p * c).sum();
                    let vr: f64 = phi.iter().zip(&cr).map(|(p, c)| p * c).sum();
                    diff += w * (vu - vr) * (vu - vr);
                    norm += w * vr * vr;
                }
            }
        }
    }
    (diff, norm)
}

/// `‖u - ref‖_{L²(Ω)} / ‖ref‖_{L²(Ω)}` of the bilinear interpolants.
pub fn relative_l2_error(u: &Field2D, reference: &Field2D) -> Result<f64> {
    if !same_grid(&u.grid, &reference.grid) {
        return Err(Error::InvalidArgument("fields live on different grids; resample first".into()));
    }
    let (diff, norm) = l2_sums(u, reference);
    if norm == 0.0 {
        return Err(Error::DivisionByZero("reference field has zero L2 norm".into()));
    }
    Ok((diff / norm).sqrt())
}

/// `|u - ref|_{H¹(Ω)}` of the bilinear interpolants.
pub fn h1_seminorm_diff(u: &Field2D, reference: &Field2D) -> Result<f64> {
    if !same_grid(&u.grid, &reference.grid) {
        return Err(Error::InvalidArgument("fields live on different grids; resample first".into()));
    }
    let g = &u.grid;
    let (hx, hy) = (g.x.h(), g.y.h());
    let w = 0.25 * hx * hy;
    let mut total = 0.0;
    for i in 0..g.x.n_elems() {
        for j in 0..g.y.n_elems() {
            let d = |a: usize, b: usize| u.at(a, b) - reference.at(a, b);
            let (d00, d10, d01, d11) = (d(i, j), d(i + 1, j), d(i, j + 1), d(i + 1, j + 1));
            for s in GAUSS2 {
                for t in GAUSS2 {
                    let dx = ((d10 - d00) * (1.0 - t) + (d11 - d01) * t) / hx;
                    let dy = ((d01 - d00) * (1.0 - s) + (d11 - d10) * s) / hy;
                    total += w * (dx * dx + dy * dy);
                }
            }
        }
    }
    Ok(total.sqrt())
}
