//! The two benchmark problems used by the experiment runners.

use super::*;

/// `(0,5)×(0,1)`, `μ = 0.24`, `b = (-5, 0)`, two Gaussian sources of height
/// 50 centred at `(2.85, 0.5)` and `(3.75, 0.5)`, homogeneous Dirichlet data.
pub fn two_gaussian_source() -> ProblemSpec {
    let gauss = |c: f64| ScalarFunction1D::Gaussian { scale: 1.0, center: c, width: 0.075 };
    let scaled = |c: f64| ScalarFunction1D::Gaussian { scale: 50.0, center: c, width: 0.075 };
    ProblemSpec {
        domain: Rect::new(0.0, 5.0, 0.0, 1.0),
        mu: Diffusivity::Constant(0.24),
        bx: -5.0,
        by: 0.0,
        f: SeparableSum::new(vec![
            SeparableTerm::new(scaled(2.85), gauss(0.5)),
            SeparableTerm::new(scaled(3.75), gauss(0.5)),
        ]),
        bc: BoundarySpec::all_zero_dirichlet(),
    }
}

/// `(0,3)×(0,1)`, `μ ∈ [1, 5]`, `b = (2.5, 0)`, `f = 1`, inlet profile
/// `y(1-y)` on the left, homogeneous Dirichlet top/bottom, homogeneous
/// Neumann outflow on the right.
pub fn inlet_channel() -> ProblemSpec {
    ProblemSpec {
        domain: Rect::new(0.0, 3.0, 0.0, 1.0),
        mu: Diffusivity::Interval { min: 1.0, max: 5.0 },
        bx: 2.5,
        by: 0.0,
        f: SeparableSum::constant(1.0),
        bc: BoundarySpec {
            left: BoundaryCondition::Dirichlet(ScalarFunction1D::Bubble { scale: 1.0 }),
            right: BoundaryCondition::NeumannZero,
            bottom: BoundaryCondition::zero_dirichlet(),
            top: BoundaryCondition::zero_dirichlet(),
        },
    }
}
