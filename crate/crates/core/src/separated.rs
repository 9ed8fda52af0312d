//! Greedy rank-one enrichment with alternating directions for operators and
//! loads given as sums of Kronecker products of 1D factors.
//!
//! The discrete bilinear form is `a(u, w) = Σ_t Π_d u_dᵀ A_{t,d} w_d` for
//! rank-one `u = ⊗ u_d`, `w = ⊗ w_d`, and the load is `ℓ(u) = Σ_s Π_d u_dᵀ f_{s,d}`.
//! One sweep solves, axis after axis, for the factor that makes the new
//! rank-one correction Galerkin-orthogonal while the other factors are frozen.

use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, DenseMatrix, DenseVector};

/// Tridiagonal matrix, the only shape 1D P1 operators take.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || n == 0 {
            return Err(Error::InvalidArgument("tridiagonal source must be square and nonempty".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && a[(i, j)] != 0.0 {
                    return Err(Error::InvalidArgument(format!("entry ({i},{j}) outside the tridiagonal band")));
                }
            }
        }
        Ok(Self {
            lower: (1..n).map(|i| a[(i, i - 1)]).collect(),
            diag: (0..n).map(|i| a[(i, i)]).collect(),
            upper: (1..n).map(|i| a[(i - 1, i)]).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| s * x).collect();
        Self { lower: f(&self.lower), diag: f(&self.diag), upper: f(&self.upper) }
    }

    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `uᵀ A w`
    pub fn bilinear(&self, u: &[f64], w: &[f64]) -> f64 {
        self.matvec(w).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            if i > 0 {
                a[(i, i - 1)] = self.lower[i - 1];
                a[(i - 1, i)] = self.upper[i - 1];
            }
        }
        a
    }
}

/// Discretized coordinate: Gram matrix for norms and the constrained-node mask.
#[derive(Debug, Clone)]
pub struct Axis {
    pub gram: Tridiagonal,
    pub constrained: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct SeparatedProblem {
    pub axes: Vec<Axis>,
    /// `[term][axis]`
    pub operator: Vec<Vec<Tridiagonal>>,
    /// `[term][axis]`
    pub load: Vec<Vec<DenseVector>>,
}

/// One rank-one term, one factor per axis.
pub type RankOne = Vec<DenseVector>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    pub tol: f64,
    pub max_iterations: usize,
    /// Multiplies the initial guess of every axis but the first.
    pub initial_scale: f64,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self { tol: 1e-2, max_iterations: 50, initial_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enrichment {
    pub mode: RankOne,
    pub iterations: usize,
    pub increment: f64,
}

impl Enrichment {
    pub fn is_zero(&self) -> bool {
        self.mode.iter().any(|f| f.iter().all(|v| *v == 0.0))
    }
}

impl SeparatedProblem {
    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        if d < 2 {
            return Err(Error::InvalidArgument("separated problems need at least two axes".into()));
        }
        for (t, term) in self.operator.iter().enumerate() {
            if term.len() != d || term.iter().zip(&self.axes).any(|(a, ax)| a.dim() != ax.gram.dim()) {
                return Err(Error::InvalidArgument(format!("operator term {t} does not match the axes")));
            }
        }
        for (s, term) in self.load.iter().enumerate() {
            if term.len() != d || term.iter().zip(&self.axes).any(|(v, ax)| v.len() != ax.gram.dim()) {
                return Err(Error::InvalidArgument(format!("load term {s} does not match the axes")));
            }
        }
        if self.axes.iter().any(|a| a.constrained.len() != a.gram.dim()) {
            return Err(Error::InvalidArgument("constraint mask length differs from the axis size".into()));
        }
        Ok(())
    }

    pub fn load_is_zero(&self) -> bool {
        self.load.iter().all(|t| t.iter().any(|v| v.iter().all(|x| *x == 0.0)))
    }

    /// Deterministic start: 1 on free nodes, 0 on constrained ones.
    pub fn initial_guess(&self, scale: f64) -> RankOne {
        self.axes
            .iter()
            .enumerate()
            .map(|(d, ax)| {
                let s = if d == 0 { 1.0 } else { scale };
                ax.constrained.iter().map(|c| if *c { 0.0 } else { s }).collect()
            })
            .collect()
    }

    /// Solves for the factor along `axis` with the other factors of `current` frozen.
    pub fn halfstep(&self, axis: usize, current: &RankOne, previous: &[RankOne]) -> Result<DenseVector> {
        let n = self.axes[axis].gram.dim();
        let others = |f: &dyn Fn(usize) -> f64| (0..self.dims()).filter(|&b| b != axis).map(f).product::<f64>();

        let mut op = BandedMatrix::zeros(n, 1, 1);
        for term in &self.operator {
            let w = others(&|b| term[b].bilinear(&current[b], &current[b]));
            if w == 0.0 {
                continue;
            }
            let a = &term[axis];
            for i in 0..n {
                op.add(i, i, w * a.diag[i]);
                if i > 0 {
                    op.add(i, i - 1, w * a.lower[i - 1]);
                    op.add(i - 1, i, w * a.upper[i - 1]);
                }
            }
        }

        let mut rhs = vec![0.0; n];
        for term in &self.load {
            let w = others(&|b| term[b].iter().zip(&current[b]).map(|(p, q)| p * q).sum());
            if w != 0.0 {
                for (r, v) in rhs.iter_mut().zip(&term[axis]) {
                    *r += w * v;
                }
            }
        }
        for mode in previous {
            for term in &self.operator {
                let w = others(&|b| term[b].bilinear(&current[b], &mode[b]));
                if w != 0.0 {
                    for (r, v) in rhs.iter_mut().zip(term[axis].matvec(&mode[axis])) {
                        *r -= w * v;
                    }
                }
            }
        }

        let constrained = &self.axes[axis].constrained;
        for (r, c) in rhs.iter_mut().zip(constrained) {
            if *c {
                *r = 0.0;
            }
        }
        if rhs.iter().all(|v| *v == 0.0) {
            return Ok(rhs);
        }
        let scale = (0..n).map(|i| op.get(i, i).abs()).fold(0.0, f64::max).max(1.0);
        for (i, c) in constrained.iter().enumerate() {
            if *c {
                for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                    let v = op.get(i, j);
                    op.add(i, j, -v);
                }
                op.add(i, i, scale);
            }
        }
        let lu = op.factor().map_err(|e| match e {
            Error::SingularMatrix { .. } => {
                Error::DegenerateMode(format!("frozen factors make the axis-{axis} operator singular"))
            }
            other => other,
        })?;
        Ok(lu.solve(&rhs))
    }

    /// `Σ_i Σ_j Π_d ⟨t_i[d], t_j[d]⟩` for a sum of rank-one terms.
    pub fn norm_squared(&self, terms: &[RankOne]) -> f64 {
        let mut s = 0.0;
        for a in terms {
            for b in terms {
                s += self.axes.iter().enumerate().map(|(d, ax)| ax.gram.bilinear(&a[d], &b[d])).product::<f64>();
            }
        }
        s.max(0.0)
    }

    pub fn rank_one_norm(&self, u: &RankOne) -> f64 {
        self.norm_squared(std::slice::from_ref(u)).sqrt()
    }

    /// `‖⊗a − ⊗b‖`, written as a telescoping sum of rank-one differences so
    /// that no large terms cancel.
    pub fn difference_norm(&self, a: &RankOne, b: &RankOne) -> f64 {
        let d = self.dims();
        let terms: Vec<RankOne> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|j| match j.cmp(&k) {
                        std::cmp::Ordering::Less => b[j].clone(),
                        std::cmp::Ordering::Equal => a[j].iter().zip(&b[j]).map(|(p, q)| p - q).collect(),
                        std::cmp::Ordering::Greater => a[j].clone(),
                    })
                    .collect()
            })
            .collect();
        self.norm_squared(&terms).sqrt()
    }

    /// Unit Gram norm on every axis but the first, which carries the magnitude.
    /// Returns `false` if a factor vanished.
    pub fn normalize(&self, u: &mut RankOne) -> bool {
        let mut carried = 1.0;
        for d in 1..self.dims() {
            let n = self.axes[d].gram.bilinear(&u[d], &u[d]).max(0.0).sqrt();
            if n == 0.0 {
                return false;
            }
            u[d].iter_mut().for_each(|v| *v /= n);
            carried *= n;
        }
        u[0].iter_mut().for_each(|v| *v *= carried);
        true
    }

    /// One alternating-direction fixed point for the next rank-one term.
    pub fn enrich(&self, previous: &[RankOne], settings: &FixedPointSettings) -> Result<Enrichment> {
        if !(settings.tol > 0.0) || settings.max_iterations == 0 {
            return Err(Error::InvalidArgument("fixed-point tolerance and iteration cap must be positive".into()));
        }
        let d = self.dims();
        let mut current = self.initial_guess(settings.initial_scale);
        let mut increment = f64::INFINITY;
        for p in 1..=settings.max_iterations {
            let old = current.clone();
            for axis in 0..d {
                current[axis] = self.halfstep(axis, &current, previous)?;
                if current[axis].iter().all(|v| *v == 0.0) {
                    let mode = (0..d).map(|b| vec![0.0; self.axes[b].gram.dim()]).collect();
                    return Ok(Enrichment { mode, iterations: p, increment: 0.0 });
                }
                if axis + 1 < d {
                    let n = self.axes[axis].gram.bilinear(&current[axis], &current[axis]).max(0.0).sqrt();
                    current[axis].iter_mut().for_each(|v| *v /= n);
                }
            }
            if !self.normalize(&mut current) {
                return Err(Error::DegenerateMode("a factor vanished during normalization".into()));
            }
            let norm = self.rank_one_norm(&current);
            increment = self.difference_norm(&current, &old) / norm;
            // A round-off sized mode has no well-defined direction to converge to.
            let negligible = previous.first().is_some_and(|m| norm <= ROUNDOFF_MODE * self.rank_one_norm(m));
            if increment <= settings.tol || negligible {
                return Ok(Enrichment { mode: current, iterations: p, increment });
            }
        }
        Err(Error::NonConvergence { iterations: settings.max_iterations, last_increment: increment })
    }
}

/// Relative size, against the first mode, below which an enrichment is round-off.
pub const ROUNDOFF_MODE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeCount {
    /// Stop once `‖mode_m‖ / ‖mode_1‖ ≤ tol_e` (checked from the second mode on) or at `max`.
    Adaptive { tol_e: f64, max: usize },
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichmentStep {
    pub iterations: usize,
    pub increment: f64,
    /// `‖mode_m‖ / ‖mode_1‖`
    pub enrichment: f64,
}

/// Greedy enrichment loop. Zero modes end the loop and are not stored.
pub fn greedy(
    problem: &SeparatedProblem,
    count: ModeCount,
    settings: &FixedPointSettings,
) -> Result<(Vec<RankOne>, Vec<EnrichmentStep>)> {
    problem.validate()?;
    let (max, tol_e) = match count {
        ModeCount::Adaptive { tol_e, max } => {
            if !(tol_e > 0.0) || max == 0 {
                return Err(Error::InvalidArgument("enrichment tolerance and mode cap must be positive".into()));
            }
            (max, Some(tol_e))
        }
        ModeCount::Fixed(m) => {
            if m == 0 {
                return Err(Error::InvalidArgument("fixed mode count must be at least 1".into()));
            }
            (m, None)
        }
    };
    let mut modes: Vec<RankOne> = Vec::new();
    let mut steps = Vec::new();
    let mut first_norm = 0.0;
    while modes.len() < max {
        let e = problem.enrich(&modes, settings)?;
        if e.is_zero() {
            if modes.is_empty() && !problem.load_is_zero() {
                return Err(Error::DegenerateMode("first mode vanished although the load does not".into()));
            }
            steps.push(EnrichmentStep { iterations: e.iterations, increment: e.increment, enrichment: 0.0 });
            break;
        }
        let norm = problem.rank_one_norm(&e.mode);
        if modes.is_empty() {
            first_norm = norm;
        }
        let ratio = norm / first_norm;
        steps.push(EnrichmentStep { iterations: e.iterations, increment: e.increment, enrichment: ratio });
        modes.push(e.mode);
        if let Some(tol) = tol_e {
            if modes.len() >= 2 && ratio <= tol {
                break;
            }
        }
    }
    Ok((modes, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::{assemble_mass_1d, assemble_stiffness_1d, Grid1D};

    fn axis(n: usize, fixed_ends: bool) -> (Axis, Tridiagonal, Tridiagonal) {
        let g = Grid1D::uniform(0.0, 1.0, n).unwrap();
        let m = Tridiagonal::from_dense(&assemble_mass_1d(&g)).unwrap();
        let k = Tridiagonal::from_dense(&assemble_stiffness_1d(&g)).unwrap();
        let constrained = (0..=n).map(|i| fixed_ends && (i == 0 || i == n)).collect();
        (Axis { gram: m.clone(), constrained }, m, k)
    }

    fn laplace(n: usize, load: Vec<Vec<DenseVector>>) -> SeparatedProblem {
        let (ax, mx, kx) = axis(n, true);
        let (ay, my, ky) = axis(n, true);
        SeparatedProblem { axes: vec![ax, ay], operator: vec![vec![kx, my], vec![mx, ky]], load }
    }

    #[test]
    fn tridiagonal_roundtrip() {
        let a = DenseMatrix::from_rows(&[&[2.0, -1.0, 0.0], &[-0.5, 2.0, -1.0], &[0.0, -0.5, 2.0]]).unwrap();
        let t = Tridiagonal::from_dense(&a).unwrap();
        assert_eq!(t.to_dense(), a);
        assert_eq!(t.matvec(&[1.0, 2.0, 3.0]), a.matvec(&[1.0, 2.0, 3.0]));
        let full = DenseMatrix::from_rows(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert!(Tridiagonal::from_dense(&full).is_err());
    }

    #[test]
    fn zero_load_gives_zero_mode() {
        let p = laplace(6, vec![vec![vec![0.0; 7], vec![1.0; 7]]]);
        let e = p.enrich(&[], &FixedPointSettings::default()).unwrap();
        assert!(e.is_zero());
        assert_eq!(e.iterations, 1);
        let (modes, steps) = greedy(&p, ModeCount::Fixed(3), &FixedPointSettings::default()).unwrap();
        assert!(modes.is_empty());
        assert_eq!(steps.len(), 1);
    }

    #[test]
    fn difference_norm_matches_expansion() {
        let p = laplace(5, vec![]);
        let a: RankOne = vec![vec![0.0, 1.0, 2.0, 1.5, 0.5, 0.0], vec![0.0, 0.3, 0.9, 1.0, 0.2, 0.0]];
        let b: RankOne = vec![vec![0.0, 1.1, 1.9, 1.4, 0.6, 0.0], vec![0.0, 0.2, 1.0, 0.8, 0.3, 0.0]];
        let direct = {
            let na = p.norm_squared(std::slice::from_ref(&a));
            let nb = p.norm_squared(std::slice::from_ref(&b));
            let cross = p.axes[0].gram.bilinear(&a[0], &b[0]) * p.axes[1].gram.bilinear(&a[1], &b[1]);
            (na + nb - 2.0 * cross).sqrt()
        };
        assert!((p.difference_norm(&a, &b) - direct).abs() < 1e-12);
        assert_eq!(p.difference_norm(&a, &a), 0.0);
    }

    #[test]
    fn normalization_keeps_product() {
        let p = laplace(4, vec![]);
        let mut u: RankOne = vec![vec![0.0, 1.0, 2.0, 1.0, 0.0], vec![0.0, 3.0, 3.0, 3.0, 0.0]];
        let before = u.clone();
        assert!(p.normalize(&mut u));
        assert!((p.axes[1].gram.bilinear(&u[1], &u[1]) - 1.0).abs() < 1e-14);
        assert!(p.difference_norm(&u, &before) < 1e-13 * p.rank_one_norm(&before));
    }
}
