//! Full-order Q1 Galerkin solver on a structured grid.
//!
//! On a tensor grid with constant coefficients the Q1 operator is a sum of
//! Kronecker products of 1D matrices,
//! `A = μ (Kx⊗My + Mx⊗Ky) + bx Cx⊗My + by Mx⊗Cy`. With `by = 0` the free
//! block is solved by fast diagonalization: the generalized eigenvectors of
//! `(μ Ky, My)` decouple it into independent tridiagonal x-systems. Otherwise a
//! banded LU of the full free system is used.

use super::{
    assemble_convection_1d, assemble_mass_1d, assemble_stiffness_1d, load_vector_1d, Field2D, Grid1D, Grid2D,
    LOAD_POINTS,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{
    cholesky, solve_lower, solve_lower_transposed, sym_eigen_descending, BandedMatrix, DenseMatrix, DenseVector,
};
use crate::problem::{ensure_valid, BoundaryCondition, ProblemSpec, SolverTarget};

#[derive(Debug, Clone)]
pub struct FeSolution {
    pub field: Field2D,
    pub warnings: Vec<String>,
}

struct AxisMatrices {
    mass: DenseMatrix,
    stiff: DenseMatrix,
    conv: DenseMatrix,
}

impl AxisMatrices {
    fn new(g: &Grid1D) -> Self {
        Self { mass: assemble_mass_1d(g), stiff: assemble_stiffness_1d(g), conv: assemble_convection_1d(g) }
    }
}

/// Constrained-node mask and Dirichlet lift (values on constrained nodes, 0 elsewhere).
fn dirichlet_lift(p: &ProblemSpec, grid: &Grid2D) -> (Vec<bool>, Vec<bool>, DenseMatrix) {
    let (nx, ny) = (grid.x.n_nodes(), grid.y.n_nodes());
    let fixed_x: Vec<bool> = (0..nx)
        .map(|i| (i == 0 && p.bc.left.is_dirichlet()) || (i == nx - 1 && p.bc.right.is_dirichlet()))
        .collect();
    let fixed_y: Vec<bool> = (0..ny)
        .map(|j| (j == 0 && p.bc.bottom.is_dirichlet()) || (j == ny - 1 && p.bc.top.is_dirichlet()))
        .collect();
    let mut lift = DenseMatrix::zeros(nx, ny);
    // bottom/top first so left/right data win at shared corners
    for (j, bc) in [(0, &p.bc.bottom), (ny - 1, &p.bc.top)] {
        if let BoundaryCondition::Dirichlet(g) = bc {
            for (i, x) in grid.x.nodes().iter().enumerate() {
                lift[(i, j)] = g.eval(*x);
            }
        }
    }
    for (i, bc) in [(0, &p.bc.left), (nx - 1, &p.bc.right)] {
        if let BoundaryCondition::Dirichlet(g) = bc {
            for (j, y) in grid.y.nodes().iter().enumerate() {
                lift[(i, j)] = g.eval(*y);
            }
        }
    }
    (fixed_x, fixed_y, lift)
}

/// Galerkin load `F_ij = ∫ f θ_i(x) θ_j(y)` as an `nx × ny` matrix.
fn load_matrix(p: &ProblemSpec, grid: &Grid2D, mu: f64) -> DenseMatrix {
    let (nx, ny) = (grid.x.n_nodes(), grid.y.n_nodes());
    let mut f = DenseMatrix::zeros(nx, ny);
    for t in &p.f.terms {
        let scale = t.fmu.as_ref().map_or(1.0, |g| g.eval(mu));
        let fx = load_vector_1d(&grid.x, |x| t.fx.eval(x), LOAD_POINTS);
        let fy = load_vector_1d(&grid.y, |y| t.fy.eval(y), LOAD_POINTS);
        for i in 0..nx {
            for j in 0..ny {
                f[(i, j)] += scale * fx[i] * fy[j];
            }
        }
    }
    f
}

/// `U ↦ μ Kx U My + μ Mx U Ky + bx Cx U My + by Mx U Cyᵀ`
fn apply_operator(p: &ProblemSpec, mu: f64, ax: &AxisMatrices, ay: &AxisMatrices, u: &DenseMatrix) -> DenseMatrix {
    // sparse (tridiagonal) factors always multiply from the left
    let ut = u.transpose();
    let u_my = ay.mass.matmul(&ut).transpose();
    let u_ky = ay.stiff.matmul(&ut).transpose();
    let mut out = ax.stiff.matmul(&u_my).scaled(mu);
    out.add_scaled(mu, &ax.mass.matmul(&u_ky));
    if p.bx != 0.0 {
        out.add_scaled(p.bx, &ax.conv.matmul(&u_my));
    }
    if p.by != 0.0 {
        let u_cyt = ay.conv.matmul(&ut).transpose();
        out.add_scaled(p.by, &ax.mass.matmul(&u_cyt));
    }
    out
}

fn restrict(m: &DenseMatrix, idx: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

fn free_indices(fixed: &[bool]) -> Vec<usize> {
    fixed.iter().enumerate().filter(|(_, f)| !**f).map(|(i, _)| i).collect()
}

fn tridiagonal(m: &DenseMatrix) -> BandedMatrix {
    let n = m.rows();
    let mut b = BandedMatrix::zeros(n, 1, 1);
    for i in 0..n {
        for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
            b.add(i, j, m[(i, j)]);
        }
    }
    b
}

/// Solves `Ax W + Dx W Λ = R` column by column after diagonalizing the y-operator.
fn solve_fast_diagonalization(
    x_op: &DenseMatrix,
    x_mass: &DenseMatrix,
    y_op: &DenseMatrix,
    y_mass: &DenseMatrix,
    rhs: &DenseMatrix,
    exec: Exec,
) -> Result<DenseMatrix> {
    let ny = y_mass.rows();
    let l = cholesky(y_mass)?;
    // S = L⁻¹ Ky L⁻ᵀ
    let mut linv_k = DenseMatrix::zeros(ny, ny);
    for c in 0..ny {
        linv_k.set_column(c, &solve_lower(&l, &y_op.column(c)));
    }
    let kt = linv_k.transpose();
    let mut s = DenseMatrix::zeros(ny, ny);
    for c in 0..ny {
        s.set_column(c, &solve_lower(&l, &kt.column(c)));
    }
    for i in 0..ny {
        for j in i + 1..ny {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let eig = sym_eigen_descending(&s)?;
    let mut q = DenseMatrix::zeros(ny, ny);
    for c in 0..ny {
        q.set_column(c, &solve_lower_transposed(&l, &eig.vectors.column(c)));
    }

    let rq = rhs.matmul(&q);
    let columns: Vec<Result<DenseVector>> = exec.map_indexed(ny, |k| {
        let mut op = x_op.clone();
        op.add_scaled(eig.values[k], x_mass);
        Ok(tridiagonal(&op).factor()?.solve(&rq.column(k)))
    });
    let mut w = DenseMatrix::zeros(rhs.rows(), ny);
    for (k, col) in columns.into_iter().enumerate() {
        w.set_column(k, &col?);
    }
    Ok(w.matmul(&q.transpose()))
}

/// Banded LU of the free system, y index fastest.
fn solve_banded(terms: &[(f64, DenseMatrix, DenseMatrix)], rhs: &DenseMatrix) -> Result<DenseMatrix> {
    let (nx, ny) = (rhs.rows(), rhs.cols());
    let n = nx * ny;
    let bw = ny + 1;
    let mut a = BandedMatrix::zeros(n, bw, bw);
    for i in 0..nx {
        for l in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
            for j in 0..ny {
                for s in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                    let v: f64 = terms.iter().map(|(c, x, y)| c * x[(i, l)] * y[(j, s)]).sum();
                    if v != 0.0 {
                        a.add(i * ny + j, l * ny + s, v);
                    }
                }
            }
        }
    }
    let x = a.factor()?.solve(rhs.as_slice());
    DenseMatrix::new(nx, ny, x)
}

pub fn fe2d_solve(problem: &ProblemSpec, grid: &Grid2D) -> Result<FeSolution> {
    fe2d_solve_with(problem, grid, Exec::default())
}

pub fn fe2d_solve_with(problem: &ProblemSpec, grid: &Grid2D, exec: Exec) -> Result<FeSolution> {
    ensure_valid(problem, SolverTarget::FiniteElement)?;
    let mu = problem.constant_mu()?;
    check_domain(problem, grid)?;

    let mut warnings = Vec::new();
    let peclet = (problem.bx.abs() * grid.x.h()).max(problem.by.abs() * grid.y.h()) / (2.0 * mu);
    if peclet > 1.0 {
        warnings.push(format!("mesh Péclet number {peclet:.3} exceeds 1; Galerkin solution may oscillate"));
    }

    let ax = AxisMatrices::new(&grid.x);
    let ay = AxisMatrices::new(&grid.y);
    let (fixed_x, fixed_y, lift) = dirichlet_lift(problem, grid);
    let mut rhs_full = load_matrix(problem, grid, mu);
    rhs_full.add_scaled(-1.0, &apply_operator(problem, mu, &ax, &ay, &lift));

    let ix = free_indices(&fixed_x);
    let jy = free_indices(&fixed_y);
    let mut u = lift;
    if !ix.is_empty() && !jy.is_empty() {
        let rhs = DenseMatrix::from_fn(ix.len(), jy.len(), |a, b| rhs_full[(ix[a], jy[b])]);
        let kx = restrict(&ax.stiff, &ix);
        let mx = restrict(&ax.mass, &ix);
        let cx = restrict(&ax.conv, &ix);
        let ky = restrict(&ay.stiff, &jy);
        let my = restrict(&ay.mass, &jy);
        let free = if problem.by == 0.0 {
            let mut x_op = kx.scaled(mu);
            x_op.add_scaled(problem.bx, &cx);
            solve_fast_diagonalization(&x_op, &mx, &ky.scaled(mu), &my, &rhs, exec)?
        } else {
            let cy = restrict(&ay.conv, &jy);
            let terms = vec![(mu, kx, my.clone()), (mu, mx.clone(), ky), (problem.bx, cx, my), (problem.by, mx, cy)];
            solve_banded(&terms, &rhs)?
        };
        for (a, &i) in ix.iter().enumerate() {
            for (b, &j) in jy.iter().enumerate() {
                u[(i, j)] = free[(a, b)];
            }
        }
    }
    let field = Field2D::new(grid.clone(), u.as_slice().to_vec())?;
    Ok(FeSolution { field, warnings })
}

fn check_domain(problem: &ProblemSpec, grid: &Grid2D) -> Result<()> {
    let d = &problem.domain;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    if close(grid.x.a(), d.x0) && close(grid.x.b(), d.x1) && close(grid.y.a(), d.y0) && close(grid.y.b(), d.y1) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("grid does not match the problem domain".into()))
    }
}

/// Dense assembly of the full Q1 system with Dirichlet rows and columns
/// eliminated (identity rows, lifted right-hand side). Unknowns are ordered
/// x-major like [`Field2D`]. Intended for small grids.
pub fn fe2d_assemble_dense(problem: &ProblemSpec, grid: &Grid2D) -> Result<(DenseMatrix, DenseVector)> {
    let mu = problem.constant_mu()?;
    check_domain(problem, grid)?;
    let ax = AxisMatrices::new(&grid.x);
    let ay = AxisMatrices::new(&grid.y);
    let (nx, ny) = (grid.x.n_nodes(), grid.y.n_nodes());
    let n = nx * ny;
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..nx {
        for l in 0..nx {
            for j in 0..ny {
                for s in 0..ny {
                    a[(i * ny + j, l * ny + s)] = mu * ax.stiff[(i, l)] * ay.mass[(j, s)]
                        + mu * ax.mass[(i, l)] * ay.stiff[(j, s)]
                        + problem.bx * ax.conv[(i, l)] * ay.mass[(j, s)]
                        + problem.by * ax.mass[(i, l)] * ay.conv[(j, s)];
                }
            }
        }
    }
    let mut b = load_matrix(problem, grid, mu).as_slice().to_vec();
    let (fixed_x, fixed_y, lift) = dirichlet_lift(problem, grid);
    let fixed: Vec<usize> = (0..n).filter(|&k| fixed_x[k / ny] || fixed_y[k % ny]).collect();
    for &c in &fixed {
        let g = lift.as_slice()[c];
        for r in 0..n {
            b[r] -= a[(r, c)] * g;
        }
    }
    for &c in &fixed {
        for k in 0..n {
            a[(c, k)] = 0.0;
            a[(k, c)] = 0.0;
        }
        a[(c, c)] = 1.0;
        b[c] = lift.as_slice()[c];
    }
    Ok((a, b))
}
