//! Declarative description of the advection–diffusion boundary-value problem
//!
//! `-∇·(μ ∇u) + b·∇u = f` on a rectangle, with constant `b`, `μ` either a
//! constant or a parameter interval, and `f` given as a finite sum of
//! separable products.

mod config;
mod function;
pub mod presets;

pub use config::{Ini, IniSection};
pub use function::{parse_number, parse_number_list, ScalarFunction1D};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn lx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn ly(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let tol = 1e-12 * (self.lx().abs() + self.ly().abs());
        x >= self.x0 - tol && x <= self.x1 + tol && y >= self.y0 - tol && y <= self.y1 + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusivity {
    Constant(f64),
    Interval { min: f64, max: f64 },
}

impl Diffusivity {
    pub fn constant(&self) -> Option<f64> {
        match self {
            Self::Constant(m) => Some(*m),
            Self::Interval { .. } => None,
        }
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        match self {
            Self::Constant(_) => None,
            Self::Interval { min, max } => Some((*min, *max)),
        }
    }
}

/// One separable forcing term `fx(x) · fy(y) · [fmu(μ)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub fx: ScalarFunction1D,
    pub fy: ScalarFunction1D,
    pub fmu: Option<ScalarFunction1D>,
}

impl SeparableTerm {
    pub fn new(fx: ScalarFunction1D, fy: ScalarFunction1D) -> Self {
        Self { fx, fy, fmu: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeparableSum {
    pub terms: Vec<SeparableTerm>,
}

impl SeparableSum {
    pub fn new(terms: Vec<SeparableTerm>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![SeparableTerm::new(
            ScalarFunction1D::Constant(c),
            ScalarFunction1D::Constant(1.0),
        )])
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.fx.is_identically_zero() || t.fy.is_identically_zero() || t.fmu.as_ref().is_some_and(|m| m.is_identically_zero()))
    }

    pub fn needs_parameter(&self) -> bool {
        self.terms.iter().any(|t| t.fmu.is_some())
    }

    /// Concatenation of two term lists.
    pub fn concat(&self, other: &SeparableSum) -> SeparableSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        SeparableSum { terms }
    }
}

/// `Σ_r fx_r(x) · fy_r(y) · [fmu_r(μ)]`.
pub fn evaluate_separable(f: &SeparableSum, x: f64, y: f64, mu: Option<f64>) -> Result<f64> {
    let mut total = 0.0;
    for t in &f.terms {
        let mut v = t.fx.eval(x) * t.fy.eval(y);
        if let Some(fmu) = &t.fmu {
            let mu = mu.ok_or_else(|| Error::InvalidArgument("forcing term depends on μ but none was given".into()))?;
            v *= fmu.eval(mu);
        }
        total += v;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(ScalarFunction1D),
    NeumannZero,
}

impl BoundaryCondition {
    pub fn zero_dirichlet() -> Self {
        Self::Dirichlet(ScalarFunction1D::Constant(0.0))
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Self::Dirichlet(_))
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            Self::Dirichlet(g) => g.is_identically_zero(),
            Self::NeumannZero => true,
        }
    }

    pub fn dirichlet_data(&self) -> Option<&ScalarFunction1D> {
        match self {
            Self::Dirichlet(g) => Some(g),
            Self::NeumannZero => None,
        }
    }
}

/// Side data. Left/right data are functions of `y`, top/bottom of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub bottom: BoundaryCondition,
    pub top: BoundaryCondition,
}

impl BoundarySpec {
    pub fn all_zero_dirichlet() -> Self {
        Self {
            left: BoundaryCondition::zero_dirichlet(),
            right: BoundaryCondition::zero_dirichlet(),
            bottom: BoundaryCondition::zero_dirichlet(),
            top: BoundaryCondition::zero_dirichlet(),
        }
    }

    pub fn sides(&self) -> [(&'static str, &BoundaryCondition); 4] {
        [("left", &self.left), ("right", &self.right), ("bottom", &self.bottom), ("top", &self.top)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: Rect,
    pub mu: Diffusivity,
    pub bx: f64,
    pub by: f64,
    pub f: SeparableSum,
    pub bc: BoundarySpec,
}

impl ProblemSpec {
    /// Same problem with the diffusivity frozen to `mu`.
    pub fn with_mu(&self, mu: f64) -> ProblemSpec {
        ProblemSpec { mu: Diffusivity::Constant(mu), ..self.clone() }
    }

    pub fn constant_mu(&self) -> Result<f64> {
        self.mu
            .constant()
            .ok_or_else(|| Error::InvalidArgument("problem has a parametric diffusivity; fix μ first".into()))
    }

    pub fn mu_interval(&self) -> Result<(f64, f64)> {
        self.mu
            .interval()
            .ok_or_else(|| Error::InvalidArgument("problem has a constant diffusivity".into()))
    }
}

/// Which solver the problem is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTarget {
    Any,
    FiniteElement,
    HiMod,
    Pgd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic(pub String);

/// Checks type invariants and solver/boundary compatibility; empty means valid.
pub fn validate_problem(p: &ProblemSpec, target: SolverTarget) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |s: String| out.push(Diagnostic(s));
    let d = &p.domain;
    if !(d.x0 < d.x1) || !(d.y0 < d.y1) || ![d.x0, d.x1, d.y0, d.y1].iter().all(|v| v.is_finite()) {
        push("degenerate domain".into());
    }
    match p.mu {
        Diffusivity::Constant(m) if !(m > 0.0) || !m.is_finite() => push("nonpositive diffusivity".into()),
        Diffusivity::Interval { min, max } if !(min > 0.0 && min < max && max.is_finite()) => {
            push("invalid diffusivity interval".into())
        }
        _ => {}
    }
    if !p.bx.is_finite() || !p.by.is_finite() {
        push("non-finite advection".into());
    }
    for t in &p.f.terms {
        for g in [Some(&t.fx), Some(&t.fy), t.fmu.as_ref()].into_iter().flatten() {
            if let Err(e) = g.check() {
                push(format!("forcing: {e}"));
            }
        }
    }
    if p.f.needs_parameter() && p.mu.interval().is_none() {
        push("μ-dependent forcing requires a parametric diffusivity".into());
    }
    if !p.bc.sides().iter().any(|(_, c)| c.is_dirichlet()) {
        push("at least one Dirichlet side is required".into());
    }
    for (name, c) in p.bc.sides() {
        if let Some(g) = c.dirichlet_data() {
            if let Err(e) = g.check() {
                push(format!("{name}: {e}"));
            }
        }
    }
    match target {
        SolverTarget::HiMod => {
            for (name, c) in [("bottom", &p.bc.bottom), ("top", &p.bc.top)] {
                if !(c.is_dirichlet() && c.is_homogeneous()) {
                    push(format!("{name}: basis incompatible with lateral data"));
                }
            }
        }
        SolverTarget::Pgd => {
            for (name, c) in [("bottom", &p.bc.bottom), ("top", &p.bc.top)] {
                if !c.is_homogeneous() {
                    push(format!("{name}: separable lift needs homogeneous lateral data"));
                }
            }
        }
        SolverTarget::Any | SolverTarget::FiniteElement => {}
    }
    out
}

/// Errors with the first diagnostic if any.
pub fn ensure_valid(p: &ProblemSpec, target: SolverTarget) -> Result<()> {
    match validate_problem(p, target).into_iter().next() {
        None => Ok(()),
        Some(Diagnostic(msg)) => Err(Error::InvalidArgument(msg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(evaluate_separable(&SeparableSum::default(), 0.3, 0.1, None).unwrap(), 0.0);
    }

    #[test]
    fn two_gaussian_forcing() {
        let p = presets::two_gaussian_source();
        let v = evaluate_separable(&p.f, 2.85, 0.5, None).unwrap();
        let expected = 50.0 * (1.0 + (-144.0f64).exp());
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn unit_forcing() {
        let p = presets::inlet_channel();
        assert_eq!(evaluate_separable(&p.f, 1.3, 0.2, None).unwrap(), 1.0);
    }

    #[test]
    fn missing_parameter() {
        let mut f = SeparableSum::constant(1.0);
        f.terms[0].fmu = Some(ScalarFunction1D::Constant(2.0));
        assert!(evaluate_separable(&f, 0.0, 0.0, None).is_err());
        assert_eq!(evaluate_separable(&f, 0.0, 0.0, Some(3.0)).unwrap(), 2.0);
    }

    #[test]
    fn validation() {
        assert!(validate_problem(&presets::two_gaussian_source(), SolverTarget::Any).is_empty());
        assert!(validate_problem(&presets::two_gaussian_source(), SolverTarget::HiMod).is_empty());
        assert!(validate_problem(&presets::inlet_channel(), SolverTarget::Pgd).is_empty());

        let mut p = presets::two_gaussian_source();
        p.mu = Diffusivity::Constant(-1.0);
        let d = validate_problem(&p, SolverTarget::Any);
        assert_eq!(d, vec![Diagnostic("nonpositive diffusivity".into())]);

        let mut p = presets::two_gaussian_source();
        p.bc.top = BoundaryCondition::Dirichlet(ScalarFunction1D::Constant(1.0));
        let d = validate_problem(&p, SolverTarget::HiMod);
        assert!(d.iter().any(|d| d.0.contains("basis incompatible with lateral data")));
        assert!(validate_problem(&p, SolverTarget::FiniteElement).is_empty());

        let mut p = presets::two_gaussian_source();
        p.bc = BoundarySpec {
            left: BoundaryCondition::NeumannZero,
            right: BoundaryCondition::NeumannZero,
            bottom: BoundaryCondition::NeumannZero,
            top: BoundaryCondition::NeumannZero,
        };
        assert!(!validate_problem(&p, SolverTarget::Any).is_empty());
    }

    fn arb_fn() -> impl Strategy<Value = ScalarFunction1D> {
        prop_oneof![
            (-5.0..5.0f64).prop_map(ScalarFunction1D::Constant),
            (-2.0..2.0f64, 0.0..10.0f64, -1.0..1.0f64)
                .prop_map(|(a, f, p)| ScalarFunction1D::Sine { amplitude: a, frequency: f, phase: p }),
            (-2.0..2.0f64, -1.0..4.0f64, 0.01..1.0f64)
                .prop_map(|(s, c, w)| ScalarFunction1D::Gaussian { scale: s, center: c, width: w }),
            prop::collection::vec(-3.0..3.0f64, 1..4).prop_map(ScalarFunction1D::Polynomial),
        ]
    }

    fn arb_sum() -> impl Strategy<Value = SeparableSum> {
        prop::collection::vec((arb_fn(), arb_fn()), 0..4)
            .prop_map(|v| SeparableSum::new(v.into_iter().map(|(a, b)| SeparableTerm::new(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn evaluation_is_linear_in_terms(a in arb_sum(), b in arb_sum(), x in 0.0..3.0f64, y in 0.0..1.0f64) {
            let lhs = evaluate_separable(&a.concat(&b), x, y, None).unwrap();
            let rhs = evaluate_separable(&a, x, y, None).unwrap() + evaluate_separable(&b, x, y, None).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + lhs.abs()));
        }

        #[test]
        fn config_round_trip(f in arb_sum(), bx in -5.0..5.0f64, mu in 0.01..3.0f64, param in any::<bool>()) {
            let mut p = presets::two_gaussian_source();
            p.f = f;
            p.bx = bx;
            p.mu = if param { Diffusivity::Interval { min: mu, max: mu + 1.0 } } else { Diffusivity::Constant(mu) };
            p.bc.right = BoundaryCondition::NeumannZero;
            p.bc.left = BoundaryCondition::Dirichlet(ScalarFunction1D::Bubble { scale: 1.0 });
            let text = p.render();
            prop_assert_eq!(ProblemSpec::parse(&text).unwrap(), p);
        }
    }
}
