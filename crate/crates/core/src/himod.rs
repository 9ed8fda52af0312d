//! Hierarchical model reduction with a sinusoidal transverse basis.
//!
//! The unknown is expanded as `u(x, y) = Σ_k Σ_l ũ_{k,l} θ_l(x) φ_k(ŷ)` with Q1
//! hats `θ_l` along the supporting fiber and `φ_k(ŷ) = √2 sin(kπŷ)`,
//! `ŷ = (y - y0)/L_y`. Unknowns are stored mode by mode: index `k·N_h + l`.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fe::{
    assemble_convection_1d, assemble_mass_1d, assemble_stiffness_1d, load_vector_1d, Field2D, Grid1D, Grid2D,
    LOAD_POINTS,
};
use crate::linalg::{solve_dense_with, DenseMatrix, DenseVector};
use crate::problem::{ensure_valid, BoundaryCondition, ProblemSpec, Rect, ScalarFunction1D, SolverTarget};
use crate::quadrature::{gauss_legendre, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModalBasis {
    m: usize,
}

impl ModalBasis {
    pub fn sine(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("modal basis needs at least one mode".into()));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Transverse rule on `(0, 1)`: 8-point Gauss on at least two panels per
    /// period of the highest product frequency.
    pub fn transverse_rule(&self) -> QuadratureRule {
        let panels = (2 * self.m).max(32);
        gauss_legendre(8).expect("fixed order").composite(0.0, 1.0, panels)
    }

    /// `(φ_k(ŷ), φ_k'(ŷ))` for a 1-based mode index `k`.
    pub fn eval(&self, k: usize, yhat: f64) -> Result<(f64, f64)> {
        if k == 0 || k > self.m {
            return Err(Error::InvalidArgument(format!("mode {k} outside 1..={}", self.m)));
        }
        Ok(sine_mode(k, yhat))
    }
}

fn sine_mode(k: usize, yhat: f64) -> (f64, f64) {
    let w = k as f64 * PI;
    (SQRT_2 * (w * yhat).sin(), SQRT_2 * w * (w * yhat).cos())
}

pub fn modal_eval(basis: &ModalBasis, k: usize, yhat: f64) -> Result<(f64, f64)> {
    basis.eval(k, yhat)
}

/// Transverse coefficient matrices, `r[j][k]` pairs trial mode `k` with test mode `j`.
/// Superscripts follow the x-derivative orders: `r10` multiplies `∫θ_l' θ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RHatCoefficients {
    pub r11: DenseMatrix,
    pub r10: DenseMatrix,
    pub r01: DenseMatrix,
    pub r00: DenseMatrix,
}

/// `∫₀¹ φ_j φ_k dŷ` with the basis' transverse rule.
pub fn modal_gram(basis: &ModalBasis) -> DenseMatrix {
    let rule = basis.transverse_rule();
    let m = basis.m;
    DenseMatrix::from_fn(m, m, |j, k| rule.integrate(|t| sine_mode(j + 1, t).0 * sine_mode(k + 1, t).0))
}

fn rhat_with(basis: &ModalBasis, mu: f64, bx: f64, by: f64, ly: f64) -> RHatCoefficients {
    let rule = basis.transverse_rule();
    let m = basis.m;
    let values: Vec<Vec<(f64, f64)>> =
        rule.nodes.iter().map(|&t| (1..=m).map(|k| sine_mode(k, t)).collect()).collect();
    let mut r11 = DenseMatrix::zeros(m, m);
    let mut r10 = DenseMatrix::zeros(m, m);
    let mut r00 = DenseMatrix::zeros(m, m);
    // D2 = 1/L_y, |J| = L_y
    for (q, w) in rule.weights.iter().enumerate() {
        let v = &values[q];
        for j in 0..m {
            for k in 0..m {
                let (pj, dj) = v[j];
                let (pk, dk) = v[k];
                r11[(j, k)] += w * mu * pk * pj * ly;
                r10[(j, k)] += w * bx * pk * pj * ly;
                r00[(j, k)] += w * (mu * dk * dj / ly + by * dk * pj);
            }
        }
    }
    RHatCoefficients { r11, r10, r01: DenseMatrix::zeros(m, m), r00 }
}

pub fn compute_rhat(problem: &ProblemSpec, basis: &ModalBasis) -> Result<RHatCoefficients> {
    let mu = problem.constant_mu()?;
    Ok(rhat_with(basis, mu, problem.bx, problem.by, problem.domain.ly()))
}

/// `∫₀¹ g(y0 + L_y ŷ) φ_k(ŷ) dŷ` for every mode.
pub fn himod_inlet_projection(g: &ScalarFunction1D, basis: &ModalBasis, domain: &Rect) -> DenseVector {
    let rule = basis.transverse_rule();
    (1..=basis.m)
        .map(|k| rule.integrate(|t| g.eval(domain.y0 + domain.ly() * t) * sine_mode(k, t).0))
        .collect()
}

/// HiMod operator split as `A(μ) = μ·diffusion + advection` before boundary
/// conditions, with the load kept per forcing term so that μ-dependent factors
/// can be applied later.
#[derive(Debug, Clone)]
pub struct HiModParts {
    pub diffusion: DenseMatrix,
    pub advection: DenseMatrix,
    pub loads: Vec<(Option<ScalarFunction1D>, DenseVector)>,
    /// Constrained unknowns and their prescribed values.
    pub constraints: Vec<(usize, f64)>,
}

impl HiModParts {
    pub fn dim(&self) -> usize {
        self.diffusion.rows()
    }

    pub fn operator(&self, mu: f64) -> DenseMatrix {
        let mut a = self.diffusion.scaled(mu);
        a.add_scaled(1.0, &self.advection);
        a
    }

    pub fn load(&self, mu: f64) -> DenseVector {
        let mut f = vec![0.0; self.dim()];
        for (fmu, v) in &self.loads {
            let s = fmu.as_ref().map_or(1.0, |g| g.eval(mu));
            for (a, b) in f.iter_mut().zip(v) {
                *a += s * b;
            }
        }
        f
    }

    /// Prescribed values on constrained unknowns, zero elsewhere.
    pub fn lift(&self) -> DenseVector {
        let mut g = vec![0.0; self.dim()];
        for &(i, v) in &self.constraints {
            g[i] = v;
        }
        g
    }

    /// Assembled, constrained system at a given diffusivity.
    pub fn system(&self, mu: f64) -> (DenseMatrix, DenseVector) {
        let mut a = self.operator(mu);
        let mut f = self.load(mu);
        apply_constraints(&mut a, &mut f, &self.constraints);
        (a, f)
    }
}

/// Row and column elimination: the lifted right-hand side keeps the free
/// block untouched and constrained rows become identity rows.
pub fn apply_constraints(a: &mut DenseMatrix, f: &mut [f64], constraints: &[(usize, f64)]) {
    let n = a.rows();
    for &(c, g) in constraints {
        if g != 0.0 {
            for r in 0..n {
                f[r] -= a[(r, c)] * g;
            }
        }
    }
    for &(c, g) in constraints {
        for k in 0..n {
            a[(c, k)] = 0.0;
            a[(k, c)] = 0.0;
        }
        a[(c, c)] = 1.0;
        f[c] = g;
    }
}

fn kron_into(out: &mut DenseMatrix, modal: &DenseMatrix, fiber: &DenseMatrix) {
    let nh = fiber.rows();
    for j in 0..modal.rows() {
        for k in 0..modal.cols() {
            let r = modal[(j, k)];
            if r == 0.0 {
                continue;
            }
            for i in 0..nh {
                for l in i.saturating_sub(1)..=(i + 1).min(nh - 1) {
                    out[(j * nh + i, k * nh + l)] += r * fiber[(i, l)];
                }
            }
        }
    }
}

fn check_fiber(problem: &ProblemSpec, grid: &Grid1D) -> Result<()> {
    let d = &problem.domain;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    if close(grid.a(), d.x0) && close(grid.b(), d.x1) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("supporting fiber grid does not span the domain".into()))
    }
}

/// μ-separated HiMod operator; `problem.mu` may be an interval.
pub fn himod_parts(problem: &ProblemSpec, basis: &ModalBasis, grid: &Grid1D) -> Result<HiModParts> {
    ensure_valid(problem, SolverTarget::HiMod)?;
    check_fiber(problem, grid)?;
    let (m, nh) = (basis.m, grid.n_nodes());
    let ly = problem.domain.ly();
    let k = assemble_stiffness_1d(grid);
    let c = assemble_convection_1d(grid);
    let mass = assemble_mass_1d(grid);

    let unit = rhat_with(basis, 1.0, 0.0, 0.0, ly);
    let adv = rhat_with(basis, 0.0, problem.bx, problem.by, ly);
    let mut diffusion = DenseMatrix::zeros(m * nh, m * nh);
    kron_into(&mut diffusion, &unit.r11, &k);
    kron_into(&mut diffusion, &unit.r00, &mass);
    let mut advection = DenseMatrix::zeros(m * nh, m * nh);
    kron_into(&mut advection, &adv.r10, &c);
    kron_into(&mut advection, &adv.r01, &c.transpose());
    kron_into(&mut advection, &adv.r00, &mass);

    let rule = basis.transverse_rule();
    let mut loads = Vec::with_capacity(problem.f.terms.len());
    for term in &problem.f.terms {
        let fx = load_vector_1d(grid, |x| term.fx.eval(x), LOAD_POINTS);
        let mut v = vec![0.0; m * nh];
        for j in 0..m {
            let fy = ly * rule.integrate(|t| term.fy.eval(problem.domain.y0 + ly * t) * sine_mode(j + 1, t).0);
            for i in 0..nh {
                v[j * nh + i] = fy * fx[i];
            }
        }
        loads.push((term.fmu.clone(), v));
    }

    let mut constraints = Vec::new();
    for (node, bc) in [(0, &problem.bc.left), (nh - 1, &problem.bc.right)] {
        if let BoundaryCondition::Dirichlet(g) = bc {
            let coeffs = himod_inlet_projection(g, basis, &problem.domain);
            for (j, v) in coeffs.into_iter().enumerate() {
                constraints.push((j * nh + node, v));
            }
        }
    }
    Ok(HiModParts { diffusion, advection, loads, constraints })
}

pub fn himod_assemble(problem: &ProblemSpec, basis: &ModalBasis, grid: &Grid1D) -> Result<(DenseMatrix, DenseVector)> {
    let mu = problem.constant_mu()?;
    Ok(himod_parts(problem, basis, grid)?.system(mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiModSolution {
    pub grid: Grid1D,
    pub basis: ModalBasis,
    pub domain: Rect,
    /// `m × N_h`, row `k` holds the nodal values of modal coefficient `ũ_{k+1}`.
    pub coeffs: DenseMatrix,
}

impl HiModSolution {
    pub fn from_vector(grid: Grid1D, basis: ModalBasis, domain: Rect, v: DenseVector) -> Result<Self> {
        let coeffs = DenseMatrix::new(basis.m, grid.n_nodes(), v)?;
        Ok(Self { grid, basis, domain, coeffs })
    }

    /// Unknowns in mode-major order.
    pub fn vector(&self) -> &[f64] {
        self.coeffs.as_slice()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let d = &self.domain;
        writeln!(w, "m,n_h,x0,x1,y0,y1")?;
        writeln!(
            w,
            "{},{},{:.14e},{:.14e},{:.14e},{:.14e}",
            self.basis.m,
            self.grid.n_nodes(),
            d.x0,
            d.x1,
            d.y0,
            d.y1
        )?;
        writeln!(w, "k,l,value")?;
        for k in 0..self.coeffs.rows() {
            for l in 0..self.coeffs.cols() {
                writeln!(w, "{},{},{:.14e}", k + 1, l + 1, self.coeffs[(k, l)])?;
            }
        }
        Ok(())
    }
}

pub fn himod_solve(problem: &ProblemSpec, basis: &ModalBasis, grid: &Grid1D) -> Result<HiModSolution> {
    himod_solve_with(problem, basis, grid, Exec::default())
}

pub fn himod_solve_with(problem: &ProblemSpec, basis: &ModalBasis, grid: &Grid1D, exec: Exec) -> Result<HiModSolution> {
    let (a, f) = himod_assemble(problem, basis, grid)?;
    let u = solve_dense_with(&a, &f, exec)?;
    HiModSolution::from_vector(grid.clone(), *basis, problem.domain, u)
}

/// Samples the modal representation at the nodes of `grid2d`.
pub fn himod_evaluate(sol: &HiModSolution, grid2d: &Grid2D) -> Result<Field2D> {
    let d = &sol.domain;
    let tol = 1e-12 * (1.0 + d.lx().max(d.ly()));
    let (gx, gy) = (&grid2d.x, &grid2d.y);
    if gx.a() < d.x0 - tol || gx.b() > d.x1 + tol || gy.a() < d.y0 - tol || gy.b() > d.y1 + tol {
        return Err(Error::InvalidArgument("evaluation grid leaves the HiMod domain".into()));
    }
    let m = sol.basis.m;
    let mut along_x = DenseMatrix::zeros(gx.n_nodes(), m);
    for (p, &x) in gx.nodes().iter().enumerate() {
        let x = x.clamp(d.x0, d.x1);
        for k in 0..m {
            along_x[(p, k)] = sol.grid.interpolate(sol.coeffs.row(k), x)?;
        }
    }
    let mut modes = DenseMatrix::zeros(m, gy.n_nodes());
    for (q, &y) in gy.nodes().iter().enumerate() {
        let t = ((y - d.y0) / d.ly()).clamp(0.0, 1.0);
        for k in 0..m {
            modes[(k, q)] = sine_mode(k + 1, t).0;
        }
    }
    Field2D::new(grid2d.clone(), along_x.matmul(&modes).as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{presets, BoundarySpec, Diffusivity, SeparableSum, SeparableTerm};
    use approx::assert_abs_diff_eq;

    #[test]
    fn mode_values() {
        let b = ModalBasis::sine(3).unwrap();
        assert_abs_diff_eq!(modal_eval(&b, 1, 0.5).unwrap().0, SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(modal_eval(&b, 2, 0.25).unwrap().0, SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(modal_eval(&b, 3, 0.0).unwrap().0, 0.0);
        assert_abs_diff_eq!(modal_eval(&b, 1, 0.0).unwrap().1, SQRT_2 * PI, epsilon = 1e-14);
        assert!(modal_eval(&b, 0, 0.5).is_err());
        assert!(modal_eval(&b, 4, 0.5).is_err());
        assert!(ModalBasis::sine(0).is_err());
    }

    #[test]
    fn gram_is_identity() {
        for m in [1, 5, 20, 30] {
            let g = modal_gram(&ModalBasis::sine(m).unwrap());
            let mut err = g.clone();
            err.add_scaled(-1.0, &DenseMatrix::identity(m));
            assert!(err.max_abs() < 1e-10, "m={m}: {}", err.max_abs());
        }
    }

    fn unit_square(mu: f64, bx: f64, by: f64) -> ProblemSpec {
        ProblemSpec {
            domain: Rect::new(0.0, 1.0, 0.0, 1.0),
            mu: Diffusivity::Constant(mu),
            bx,
            by,
            f: SeparableSum::default(),
            bc: BoundarySpec::all_zero_dirichlet(),
        }
    }

    #[test]
    fn rhat_matches_closed_forms() {
        let m = 20;
        let basis = ModalBasis::sine(m).unwrap();
        let mut p = presets::two_gaussian_source();
        p.by = 0.8;
        p.domain = Rect::new(0.0, 5.0, -0.5, 1.5);
        let r = compute_rhat(&p, &basis).unwrap();
        let (mu, ly) = (0.24, 2.0);
        for j in 0..m {
            for k in 0..m {
                let d = if j == k { 1.0 } else { 0.0 };
                let (kk, jj) = ((k + 1) as f64, (j + 1) as f64);
                // ∫ 2 kπ cos(kπt) sin(jπt) dt
                let cross = if (j + k) % 2 == 1 { 4.0 * kk * jj / (jj * jj - kk * kk) } else { 0.0 };
                let r00 = mu * (kk * PI).powi(2) / ly * d + p.by * cross;
                assert_abs_diff_eq!(r.r11[(j, k)], mu * ly * d, epsilon = 1e-10);
                assert_abs_diff_eq!(r.r10[(j, k)], -5.0 * ly * d, epsilon = 1e-10);
                assert_abs_diff_eq!(r.r01[(j, k)], 0.0);
                assert_abs_diff_eq!(r.r00[(j, k)], r00, epsilon = 1e-10 * (1.0 + r00.abs()));
            }
        }
    }

    #[test]
    fn rhat_unit_examples() {
        let b = ModalBasis::sine(4).unwrap();
        let r = compute_rhat(&unit_square(1.0, 0.0, 0.0), &b).unwrap();
        assert_abs_diff_eq!(r.r00[(0, 0)], PI * PI, epsilon = 1e-10);
        let mut d = r.r11.clone();
        d.add_scaled(-1.0, &DenseMatrix::identity(4));
        assert!(d.max_abs() < 1e-10);
        let r = compute_rhat(&presets::two_gaussian_source(), &b).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(r.r10[(k, k)], -5.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn inlet_projection_examples() {
        let b = ModalBasis::sine(7).unwrap();
        let d = Rect::new(0.0, 3.0, 0.0, 1.0);
        let phi1 = ScalarFunction1D::Sine { amplitude: SQRT_2, frequency: PI, phase: 0.0 };
        let c = himod_inlet_projection(&phi1, &b, &d);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));

        let c = himod_inlet_projection(&ScalarFunction1D::Bubble { scale: 1.0 }, &b, &d);
        for (i, v) in c.iter().enumerate() {
            let k = (i + 1) as f64;
            let expect = if (i + 1) % 2 == 1 { 4.0 * SQRT_2 / (k * PI).powi(3) } else { 0.0 };
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-13);
        }
        let c = himod_inlet_projection(&ScalarFunction1D::Constant(0.0), &b, &d);
        assert!(c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn symmetric_without_advection() {
        let mut p = presets::two_gaussian_source();
        p.bx = 0.0;
        p.mu = Diffusivity::Constant(1.0);
        let g = Grid1D::uniform(0.0, 5.0, 20).unwrap();
        let (a, _) = himod_assemble(&p, &ModalBasis::sine(4).unwrap(), &g).unwrap();
        assert!(a.is_symmetric(1e-12));
    }

    #[test]
    fn zero_data_zero_solution() {
        let p = unit_square(1.0, 1.0, 0.0);
        let g = Grid1D::uniform(0.0, 1.0, 8).unwrap();
        let s = himod_solve(&p, &ModalBasis::sine(3).unwrap(), &g).unwrap();
        assert!(s.vector().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_reaction_diffusion() {
        // f = √2 sin(πy)·1 projects onto mode 1 only: -ũ'' + π²ũ = 1, ũ(0)=ũ(1)=0
        let mut p = unit_square(1.0, 0.0, 0.0);
        p.f = SeparableSum::new(vec![SeparableTerm::new(
            ScalarFunction1D::Constant(1.0),
            ScalarFunction1D::Sine { amplitude: SQRT_2, frequency: PI, phase: 0.0 },
        )]);
        let exact = |x: f64| (1.0 - (PI * (x - 0.5)).cosh() / (PI / 2.0).cosh()) / (PI * PI);
        let mut errs = Vec::new();
        for n in [16, 32] {
            let g = Grid1D::uniform(0.0, 1.0, n).unwrap();
            let s = himod_solve(&p, &ModalBasis::sine(1).unwrap(), &g).unwrap();
            let e = g.nodes().iter().enumerate().map(|(i, x)| (s.coeffs[(0, i)] - exact(*x)).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] < 1e-3 && errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn manufactured_rank_one() {
        let mut p = unit_square(1.0, 0.0, 0.0);
        p.f = SeparableSum::new(vec![SeparableTerm::new(
            ScalarFunction1D::Sine { amplitude: 1.0, frequency: PI, phase: 0.0 },
            ScalarFunction1D::Sine { amplitude: SQRT_2, frequency: PI, phase: 0.0 },
        )]);
        let g = Grid1D::uniform(0.0, 1.0, 40).unwrap();
        let s = himod_solve(&p, &ModalBasis::sine(1).unwrap(), &g).unwrap();
        let g2 = Grid2D::over(&p.domain, 40, 10).unwrap();
        let u = himod_evaluate(&s, &g2).unwrap();
        let exact = Field2D::from_fn(g2, |x, y| (PI * x).sin() * SQRT_2 * (PI * y).sin() / (2.0 * PI * PI));
        let e = crate::fe::relative_l2_error(&u, &exact).unwrap();
        assert!(e < 2e-3, "{e}");
    }

    #[test]
    fn inlet_values_are_exact() {
        let p = presets::inlet_channel().with_mu(2.0);
        let g = Grid1D::uniform(0.0, 3.0, 10).unwrap();
        let b = ModalBasis::sine(5).unwrap();
        let s = himod_solve(&p, &b, &g).unwrap();
        let proj = himod_inlet_projection(&ScalarFunction1D::Bubble { scale: 1.0 }, &b, &p.domain);
        for k in 0..5 {
            assert_eq!(s.coeffs[(k, 0)], proj[k]);
        }
    }

    #[test]
    fn evaluate_examples() {
        let grid = Grid1D::uniform(0.0, 1.0, 4).unwrap();
        let basis = ModalBasis::sine(2).unwrap();
        let d = Rect::new(0.0, 1.0, 0.0, 1.0);
        let g2 = Grid2D::over(&d, 4, 8).unwrap();
        let zero = HiModSolution::from_vector(grid.clone(), basis, d, vec![0.0; 10]).unwrap();
        assert_eq!(himod_evaluate(&zero, &g2).unwrap().max_abs(), 0.0);

        let mut v = vec![0.0; 10];
        v[2] = 1.0;
        let s = HiModSolution::from_vector(grid, basis, d, v).unwrap();
        let f = himod_evaluate(&s, &g2).unwrap();
        for (i, x) in g2.x.nodes().iter().enumerate() {
            for (j, y) in g2.y.nodes().iter().enumerate() {
                let hat = if (x - 0.5).abs() < 1e-12 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(f.at(i, j), hat * SQRT_2 * (PI * y).sin(), epsilon = 1e-14);
            }
        }
        let outside = Grid2D::uniform(0.0, 1.0, 4, 0.0, 2.0, 4).unwrap();
        assert!(himod_evaluate(&s, &outside).is_err());
    }

    #[test]
    fn csv_layout() {
        let grid = Grid1D::uniform(0.0, 1.0, 1).unwrap();
        let s = HiModSolution::from_vector(grid, ModalBasis::sine(1).unwrap(), Rect::new(0.0, 1.0, 0.0, 1.0), vec![0.5, 0.25])
            .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m,n_h,x0,x1,y0,y1");
        assert!(lines[1].starts_with("1,2,"));
        assert_eq!(lines[2], "k,l,value");
        assert_eq!(lines[4], "1,2,2.50000000000000e-1");
    }

    #[test]
    fn lateral_neumann_rejected() {
        let mut p = presets::two_gaussian_source();
        p.bc.top = BoundaryCondition::NeumannZero;
        let g = Grid1D::uniform(0.0, 5.0, 10).unwrap();
        assert!(himod_assemble(&p, &ModalBasis::sine(2).unwrap(), &g).is_err());
    }
}
