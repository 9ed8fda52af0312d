//! Proper Generalized Decomposition in `x ⊗ y` with P1 factors.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fe::{
    assemble_convection_1d, assemble_mass_1d, assemble_stiffness_1d, load_vector_1d, Field2D, Grid1D, Grid2D,
    LOAD_POINTS,
};
use crate::linalg::DenseVector;
use crate::problem::{ensure_valid, BoundaryCondition, ProblemSpec, SolverTarget};
use crate::separated::{greedy, Axis, EnrichmentStep, FixedPointSettings, ModeCount, SeparatedProblem, Tridiagonal};

#[derive(Debug, Clone, PartialEq)]
pub struct ModePair {
    pub ux: DenseVector,
    pub uy: DenseVector,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ADSReport {
    pub tol_e: Option<f64>,
    pub tol_fp: f64,
    pub steps: Vec<EnrichmentStep>,
}

impl ADSReport {
    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).sum()
    }

    /// `tol_e,tol_fp,mode_index,fp_iterations,final_increment`; `tol_e` is empty in fixed-count runs.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "tol_e,tol_fp,mode_index,fp_iterations,final_increment")?;
        let tol_e = self.tol_e.map_or(String::new(), |t| format!("{t:.14e}"));
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(w, "{tol_e},{:.14e},{},{},{:.14e}", self.tol_fp, i + 1, s.iterations, s.increment)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PGDSolution {
    pub x_grid: Grid1D,
    pub y_grid: Grid1D,
    pub modes: Vec<ModePair>,
    /// Separable Dirichlet lift, one term per nonhomogeneous x-end.
    pub lift: Vec<ModePair>,
    pub report: ADSReport,
}

impl PGDSolution {
    pub fn m(&self) -> usize {
        self.modes.len()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "m,n_x,n_y")?;
        writeln!(w, "{},{},{}", self.m(), self.x_grid.n_nodes(), self.y_grid.n_nodes())?;
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:.14e}")).collect::<Vec<_>>().join(",");
        for (k, mode) in self.modes.iter().enumerate() {
            writeln!(w, "ux{},{}", k + 1, row(&mode.ux))?;
            writeln!(w, "uy{},{}", k + 1, row(&mode.uy))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdSettings {
    pub modes: ModeCount,
    pub tol_fp: f64,
    pub max_fp: usize,
    pub initial_scale: f64,
}

impl PgdSettings {
    pub fn adaptive(tol_e: f64, tol_fp: f64) -> Self {
        Self { modes: ModeCount::Adaptive { tol_e, max: 30 }, tol_fp, max_fp: 50, initial_scale: 1.0 }
    }

    pub fn fixed(m: usize, tol_fp: f64) -> Self {
        Self { modes: ModeCount::Fixed(m), tol_fp, max_fp: 50, initial_scale: 1.0 }
    }

    fn fixed_point(&self) -> FixedPointSettings {
        FixedPointSettings { tol: self.tol_fp, max_iterations: self.max_fp, initial_scale: self.initial_scale }
    }

    fn tol_e(&self) -> Option<f64> {
        match self.modes {
            ModeCount::Adaptive { tol_e, .. } => Some(tol_e),
            ModeCount::Fixed(_) => None,
        }
    }
}

pub(crate) struct AxisOps {
    pub mass: Tridiagonal,
    pub stiff: Tridiagonal,
    pub conv: Tridiagonal,
}

impl AxisOps {
    pub fn new(g: &Grid1D) -> Result<Self> {
        Ok(Self {
            mass: Tridiagonal::from_dense(&assemble_mass_1d(g))?,
            stiff: Tridiagonal::from_dense(&assemble_stiffness_1d(g))?,
            conv: Tridiagonal::from_dense(&assemble_convection_1d(g))?,
        })
    }
}

pub(crate) fn end_mask(n: usize, first: bool, last: bool) -> Vec<bool> {
    (0..n).map(|i| (i == 0 && first) || (i == n - 1 && last)).collect()
}

pub(crate) fn check_axis(grid: &Grid1D, a: f64, b: f64, name: &str) -> Result<()> {
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * (1.0 + p.abs().max(q.abs()));
    if close(grid.a(), a) && close(grid.b(), b) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} grid does not span the domain")))
    }
}

/// Separable lift terms `e_node ⊗ g(y)` for nonhomogeneous Dirichlet x-ends.
pub(crate) fn x_end_lifts(problem: &ProblemSpec, x: &Grid1D, y: &Grid1D) -> Vec<ModePair> {
    let nx = x.n_nodes();
    let mut out = Vec::new();
    for (node, bc) in [(0, &problem.bc.left), (nx - 1, &problem.bc.right)] {
        if let BoundaryCondition::Dirichlet(g) = bc {
            if !g.is_identically_zero() {
                let mut ux = vec![0.0; nx];
                ux[node] = 1.0;
                let uy = y.nodes().iter().map(|t| g.eval(*t)).collect();
                out.push(ModePair { ux, uy });
            }
        }
    }
    out
}

pub(crate) fn separated_2d(problem: &ProblemSpec, x: &Grid1D, y: &Grid1D) -> Result<(SeparatedProblem, Vec<ModePair>)> {
    ensure_valid(problem, SolverTarget::Pgd)?;
    let mu = problem.constant_mu()?;
    check_axis(x, problem.domain.x0, problem.domain.x1, "x")?;
    check_axis(y, problem.domain.y0, problem.domain.y1, "y")?;
    let ox = AxisOps::new(x)?;
    let oy = AxisOps::new(y)?;

    let mut operator = vec![vec![ox.stiff.scaled(mu), oy.mass.clone()], vec![ox.mass.scaled(mu), oy.stiff.clone()]];
    if problem.bx != 0.0 {
        operator.push(vec![ox.conv.scaled(problem.bx), oy.mass.clone()]);
    }
    if problem.by != 0.0 {
        operator.push(vec![ox.mass.scaled(problem.by), oy.conv.clone()]);
    }

    let mut load = Vec::new();
    for t in &problem.f.terms {
        let s = t.fmu.as_ref().map_or(1.0, |g| g.eval(mu));
        let fx: DenseVector = load_vector_1d(x, |q| t.fx.eval(q), LOAD_POINTS).into_iter().map(|v| s * v).collect();
        load.push(vec![fx, load_vector_1d(y, |q| t.fy.eval(q), LOAD_POINTS)]);
    }
    let lift = x_end_lifts(problem, x, y);
    for l in &lift {
        for term in &operator {
            let ax: DenseVector = term[0].matvec(&l.ux).into_iter().map(|v| -v).collect();
            load.push(vec![ax, term[1].matvec(&l.uy)]);
        }
    }

    let bc = &problem.bc;
    let axes = vec![
        Axis { gram: ox.mass, constrained: end_mask(x.n_nodes(), bc.left.is_dirichlet(), bc.right.is_dirichlet()) },
        Axis { gram: oy.mass, constrained: end_mask(y.n_nodes(), bc.bottom.is_dirichlet(), bc.top.is_dirichlet()) },
    ];
    Ok((SeparatedProblem { axes, operator, load }, lift))
}

pub fn pgd_solve(problem: &ProblemSpec, x_grid: &Grid1D, y_grid: &Grid1D, settings: &PgdSettings) -> Result<PGDSolution> {
    let (sep, lift) = separated_2d(problem, x_grid, y_grid)?;
    let (modes, steps) = greedy(&sep, settings.modes, &settings.fixed_point())?;
    Ok(PGDSolution {
        x_grid: x_grid.clone(),
        y_grid: y_grid.clone(),
        modes: modes.into_iter().map(|mut m| ModePair { uy: m.pop().unwrap(), ux: m.pop().unwrap() }).collect(),
        lift,
        report: ADSReport { tol_e: settings.tol_e(), tol_fp: settings.tol_fp, steps },
    })
}

/// One fixed-point enrichment on top of `previous` modes.
pub fn pgd_enrich(
    problem: &ProblemSpec,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    previous: &[ModePair],
    settings: &PgdSettings,
) -> Result<(ModePair, EnrichmentStep)> {
    let (sep, _) = separated_2d(problem, x_grid, y_grid)?;
    let prev: Vec<Vec<DenseVector>> = previous.iter().map(|m| vec![m.ux.clone(), m.uy.clone()]).collect();
    let e = sep.enrich(&prev, &settings.fixed_point())?;
    let norm = sep.rank_one_norm(&e.mode);
    let first = prev.first().map_or(norm, |p| sep.rank_one_norm(p));
    let step = EnrichmentStep {
        iterations: e.iterations,
        increment: e.increment,
        enrichment: if first > 0.0 { norm / first } else { 0.0 },
    };
    let mut m = e.mode;
    Ok((ModePair { uy: m.pop().unwrap(), ux: m.pop().unwrap() }, step))
}

/// Half-step along x (`along_x = true`) or y with `current` frozen.
pub fn ads_halfstep(
    problem: &ProblemSpec,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    current: &ModePair,
    previous: &[ModePair],
    along_x: bool,
) -> Result<DenseVector> {
    let (sep, _) = separated_2d(problem, x_grid, y_grid)?;
    let prev: Vec<Vec<DenseVector>> = previous.iter().map(|m| vec![m.ux.clone(), m.uy.clone()]).collect();
    sep.halfstep(if along_x { 0 } else { 1 }, &vec![current.ux.clone(), current.uy.clone()], &prev)
}

pub fn ads_halfstep_x(
    problem: &ProblemSpec,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    uy: &[f64],
    previous: &[ModePair],
) -> Result<DenseVector> {
    let current = ModePair { ux: vec![0.0; x_grid.n_nodes()], uy: uy.to_vec() };
    ads_halfstep(problem, x_grid, y_grid, &current, previous, true)
}

pub fn ads_halfstep_y(
    problem: &ProblemSpec,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    ux: &[f64],
    previous: &[ModePair],
) -> Result<DenseVector> {
    let current = ModePair { ux: ux.to_vec(), uy: vec![0.0; y_grid.n_nodes()] };
    ads_halfstep(problem, x_grid, y_grid, &current, previous, false)
}

/// Nodal values of `Σ ux(x)·uy(y)` over `terms` on `grid2d`, P1-interpolated per axis.
pub(crate) fn evaluate_pairs<'a>(
    terms: impl Iterator<Item = (&'a [f64], &'a [f64], f64)>,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    grid2d: &Grid2D,
) -> Result<Field2D> {
    let xs: Vec<[(usize, f64); 2]> = grid2d.x.nodes().iter().map(|&x| x_grid.shape_at(x)).collect::<Result<_>>()?;
    let ys: Vec<[(usize, f64); 2]> = grid2d.y.nodes().iter().map(|&y| y_grid.shape_at(y)).collect::<Result<_>>()?;
    let ny = ys.len();
    let mut values = vec![0.0; xs.len() * ny];
    let interp = |v: &[f64], s: &[(usize, f64); 2]| s.iter().map(|(i, w)| if *w == 0.0 { 0.0 } else { w * v[*i] }).sum::<f64>();
    for (ux, uy, scale) in terms {
        let fx: Vec<f64> = xs.iter().map(|s| scale * interp(ux, s)).collect();
        let fy: Vec<f64> = ys.iter().map(|s| interp(uy, s)).collect();
        for (i, a) in fx.iter().enumerate() {
            if *a != 0.0 {
                for (j, b) in fy.iter().enumerate() {
                    values[i * ny + j] += a * b;
                }
            }
        }
    }
    Field2D::new(grid2d.clone(), values)
}

pub fn pgd_evaluate(sol: &PGDSolution, grid2d: &Grid2D) -> Result<Field2D> {
    let terms = sol.lift.iter().chain(&sol.modes).map(|m| (m.ux.as_slice(), m.uy.as_slice(), 1.0));
    evaluate_pairs(terms, &sol.x_grid, &sol.y_grid, grid2d)
}
