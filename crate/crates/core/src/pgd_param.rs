//! Parametric PGD: the diffusivity becomes a third coordinate `μ ∈ [μ_min, μ_max]`
//! discretized with P1 elements, and modes are triples `ux ⊗ uy ⊗ uμ`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fe::{assemble_mass_1d, assemble_weighted_mass_1d, load_vector_1d, Field2D, Grid1D, Grid2D, LOAD_POINTS};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::pgd::{check_axis, end_mask, evaluate_pairs, x_end_lifts, ADSReport, AxisOps, PgdSettings};
use crate::problem::{ensure_valid, ProblemSpec, SolverTarget};
use crate::separated::{greedy, Axis, FixedPointSettings, SeparatedProblem, Tridiagonal};

#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    grid: Grid1D,
}

impl ParamGrid {
    pub fn uniform(mu_min: f64, mu_max: f64, n_elems: usize) -> Result<Self> {
        if !(mu_min > 0.0) {
            return Err(Error::InvalidArgument("parameter interval must be positive".into()));
        }
        Ok(Self { grid: Grid1D::uniform(mu_min, mu_max, n_elems)? })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn min(&self) -> f64 {
        self.grid.a()
    }

    pub fn max(&self) -> f64 {
        self.grid.b()
    }
}

/// Parameter-axis matrices: `M^μ_ij = ∫ μ θ_i θ_j`, `N^μ_ij = ∫ θ_i θ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamOperators {
    pub weighted_mass: DenseMatrix,
    pub mass: DenseMatrix,
}

pub fn assemble_param_masses(pgrid: &ParamGrid) -> ParamOperators {
    ParamOperators {
        weighted_mass: assemble_weighted_mass_1d(&pgrid.grid, |mu| mu, 3),
        mass: assemble_mass_1d(&pgrid.grid),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTriple {
    pub ux: DenseVector,
    pub uy: DenseVector,
    pub umu: DenseVector,
}

#[derive(Debug, Clone)]
pub struct PGDParamSolution {
    pub x_grid: Grid1D,
    pub y_grid: Grid1D,
    pub param: ParamGrid,
    pub modes: Vec<ModeTriple>,
    /// μ-independent lift terms `ux ⊗ uy ⊗ 1`.
    pub lift: Vec<(DenseVector, DenseVector)>,
    pub report: ADSReport,
}

impl PGDParamSolution {
    pub fn m(&self) -> usize {
        self.modes.len()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "m,n_x,n_y,n_mu,mu_min,mu_max")?;
        writeln!(
            w,
            "{},{},{},{},{:.14e},{:.14e}",
            self.m(),
            self.x_grid.n_nodes(),
            self.y_grid.n_nodes(),
            self.param.grid.n_nodes(),
            self.param.min(),
            self.param.max()
        )?;
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:.14e}")).collect::<Vec<_>>().join(",");
        for (k, mode) in self.modes.iter().enumerate() {
            writeln!(w, "ux{},{}", k + 1, row(&mode.ux))?;
            writeln!(w, "uy{},{}", k + 1, row(&mode.uy))?;
            writeln!(w, "umu{},{}", k + 1, row(&mode.umu))?;
        }
        Ok(())
    }
}

fn separated_3d(
    problem: &ProblemSpec,
    x: &Grid1D,
    y: &Grid1D,
    pgrid: &ParamGrid,
) -> Result<(SeparatedProblem, Vec<(DenseVector, DenseVector)>)> {
    ensure_valid(problem, SolverTarget::Pgd)?;
    let (lo, hi) = problem.mu_interval()?;
    check_axis(pgrid.grid(), lo, hi, "parameter")?;
    check_axis(x, problem.domain.x0, problem.domain.x1, "x")?;
    check_axis(y, problem.domain.y0, problem.domain.y1, "y")?;
    let ox = AxisOps::new(x)?;
    let oy = AxisOps::new(y)?;
    let pm = assemble_param_masses(pgrid);
    let m_mu = Tridiagonal::from_dense(&pm.weighted_mass)?;
    let n_mu = Tridiagonal::from_dense(&pm.mass)?;

    let mut operator = vec![
        vec![ox.stiff.clone(), oy.mass.clone(), m_mu.clone()],
        vec![ox.mass.clone(), oy.stiff.clone(), m_mu],
    ];
    if problem.bx != 0.0 {
        operator.push(vec![ox.conv.scaled(problem.bx), oy.mass.clone(), n_mu.clone()]);
    }
    if problem.by != 0.0 {
        operator.push(vec![ox.mass.scaled(problem.by), oy.conv.clone(), n_mu.clone()]);
    }

    let ones = vec![1.0; pgrid.grid.n_nodes()];
    let mut load = Vec::new();
    for t in &problem.f.terms {
        let fmu = match &t.fmu {
            Some(g) => load_vector_1d(pgrid.grid(), |q| g.eval(q), LOAD_POINTS),
            None => n_mu.matvec(&ones),
        };
        load.push(vec![
            load_vector_1d(x, |q| t.fx.eval(q), LOAD_POINTS),
            load_vector_1d(y, |q| t.fy.eval(q), LOAD_POINTS),
            fmu,
        ]);
    }
    let lift: Vec<(DenseVector, DenseVector)> =
        x_end_lifts(problem, x, y).into_iter().map(|p| (p.ux, p.uy)).collect();
    for (lx, ly) in &lift {
        for term in &operator {
            let ax: DenseVector = term[0].matvec(lx).into_iter().map(|v| -v).collect();
            load.push(vec![ax, term[1].matvec(ly), term[2].matvec(&ones)]);
        }
    }

    let bc = &problem.bc;
    let axes = vec![
        Axis { gram: ox.mass, constrained: end_mask(x.n_nodes(), bc.left.is_dirichlet(), bc.right.is_dirichlet()) },
        Axis { gram: oy.mass, constrained: end_mask(y.n_nodes(), bc.bottom.is_dirichlet(), bc.top.is_dirichlet()) },
        Axis { gram: n_mu, constrained: vec![false; pgrid.grid.n_nodes()] },
    ];
    Ok((SeparatedProblem { axes, operator, load }, lift))
}

fn split(mut m: Vec<DenseVector>) -> ModeTriple {
    let umu = m.pop().unwrap();
    let uy = m.pop().unwrap();
    ModeTriple { ux: m.pop().unwrap(), uy, umu }
}

pub fn pgd_param_solve(
    problem: &ProblemSpec,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    pgrid: &ParamGrid,
    settings: &PgdSettings,
) -> Result<PGDParamSolution> {
    let (sep, lift) = separated_3d(problem, x_grid, y_grid, pgrid)?;
    let fp = FixedPointSettings { tol: settings.tol_fp, max_iterations: settings.max_fp, initial_scale: settings.initial_scale };
    let (modes, steps) = greedy(&sep, settings.modes, &fp)?;
    let tol_e = match settings.modes {
        crate::separated::ModeCount::Adaptive { tol_e, .. } => Some(tol_e),
        crate::separated::ModeCount::Fixed(_) => None,
    };
    Ok(PGDParamSolution {
        x_grid: x_grid.clone(),
        y_grid: y_grid.clone(),
        param: pgrid.clone(),
        modes: modes.into_iter().map(split).collect(),
        lift,
        report: ADSReport { tol_e, tol_fp: settings.tol_fp, steps },
    })
}

/// One sweep `x → y → μ` starting from `current`, against fixed `previous` triples.
pub fn ads_tristep(
    problem: &ProblemSpec,
    x_grid: &Grid1D,
    y_grid: &Grid1D,
    pgrid: &ParamGrid,
    current: &ModeTriple,
    previous: &[ModeTriple],
) -> Result<ModeTriple> {
    let (sep, _) = separated_3d(problem, x_grid, y_grid, pgrid)?;
    let prev: Vec<Vec<DenseVector>> = previous.iter().map(|t| vec![t.ux.clone(), t.uy.clone(), t.umu.clone()]).collect();
    let mut u = vec![current.ux.clone(), current.uy.clone(), current.umu.clone()];
    for axis in 0..3 {
        u[axis] = sep.halfstep(axis, &u, &prev)?;
    }
    Ok(split(u))
}

pub fn pgd_param_evaluate(sol: &PGDParamSolution, grid2d: &Grid2D, mu: f64) -> Result<Field2D> {
    let (lo, hi) = (sol.param.min(), sol.param.max());
    if !(lo..=hi).contains(&mu) {
        return Err(Error::OutOfRange { value: mu, min: lo, max: hi });
    }
    let weights: Vec<f64> =
        sol.modes.iter().map(|t| sol.param.grid.interpolate(&t.umu, mu)).collect::<Result<_>>()?;
    let terms = sol
        .lift
        .iter()
        .map(|(a, b)| (a.as_slice(), b.as_slice(), 1.0))
        .chain(sol.modes.iter().zip(&weights).map(|(t, w)| (t.ux.as_slice(), t.uy.as_slice(), *w)));
    evaluate_pairs(terms, &sol.x_grid, &sol.y_grid, grid2d)
}
