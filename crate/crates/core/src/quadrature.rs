//! Gauss–Legendre rules on `[-1, 1]` and their affine/composite images.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const NEWTON_TOL: f64 = 1e-14;

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre rule needs n >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Image of a `[-1, 1]` rule on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }

    /// `panels` copies of this `[-1, 1]` rule tiling `[a, b]` uniformly.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> QuadratureRule {
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * self.len());
        let mut weights = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let r = self.mapped(a + p as f64 * h, a + (p + 1) as f64 * h);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        QuadratureRule { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}
