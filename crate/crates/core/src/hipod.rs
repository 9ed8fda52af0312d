//! POD over HiMod snapshots (HiPOD): offline basis extraction by the method of
//! snapshots and online Galerkin projection onto the leading POD vectors.
//!
//! Online solutions live in the affine space `ū + span Φ` by default, with `ū`
//! the snapshot mean. Dirichlet data is identical for every snapshot, so the
//! centered snapshots vanish on constrained unknowns and `ū` carries the
//! prescribed values.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fe::{assemble_mass_1d, Grid1D};
use crate::himod::{himod_assemble, himod_parts, himod_solve_with, HiModParts, HiModSolution, ModalBasis};
use crate::linalg::{dot, solve_dense, sym_eigen_descending, DenseMatrix, DenseVector};
use crate::problem::{ProblemSpec, ScalarFunction1D};

/// Snapshot matrix, column `i` is the HiMod vector at `samples[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub samples: Vec<f64>,
    pub matrix: DenseMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationRule {
    /// `l = #{i : σ_i² ≥ ε}`, at least 1.
    #[default]
    KeepAboveTolerance,
    /// `l` is the first index with `σ_l² < ε` (that vector included).
    FirstBelowTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PODBasis {
    pub mean: DenseVector,
    /// Orthonormal left singular vectors above the drop tolerance, by column.
    pub vectors: DenseMatrix,
    /// All singular values of the centered snapshots, descending.
    pub sigma: Vec<f64>,
    pub l: usize,
    pub epsilon: f64,
    pub rule: TruncationRule,
}

impl PODBasis {
    /// Leading `l` basis vectors.
    pub fn phi(&self) -> DenseMatrix {
        self.leading(self.l)
    }

    pub fn leading(&self, l: usize) -> DenseMatrix {
        let l = l.min(self.vectors.cols());
        DenseMatrix::from_fn(self.vectors.rows(), l, |i, j| self.vectors[(i, j)])
    }

    pub fn with_l(&self, l: usize) -> Result<PODBasis> {
        if l == 0 || l > self.vectors.cols() {
            return Err(Error::InvalidArgument(format!("basis size {l} outside 1..={}", self.vectors.cols())));
        }
        Ok(PODBasis { l, ..self.clone() })
    }

    /// Header, `sigma` and `mean` rows, then one row per basis vector above the drop tolerance.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let row = |v: &mut dyn Iterator<Item = f64>| v.map(|x| format!("{x:.14e}")).collect::<Vec<_>>().join(",");
        let rule = match self.rule {
            TruncationRule::KeepAboveTolerance => "keep",
            TruncationRule::FirstBelowTolerance => "first-below",
        };
        writeln!(w, "l,epsilon,rule\n{},{:.14e},{rule}", self.l, self.epsilon)?;
        writeln!(w, "sigma,{}", row(&mut self.sigma.iter().copied()))?;
        writeln!(w, "mean,{}", row(&mut self.mean.iter().copied()))?;
        for j in 0..self.vectors.cols() {
            writeln!(w, "phi{},{}", j + 1, row(&mut (0..self.vectors.rows()).map(|i| self.vectors[(i, j)])))?;
        }
        Ok(())
    }

    /// Inverse of [`PODBasis::write_csv`].
    pub fn read_csv(text: &str) -> Result<PODBasis> {
        let bad = |line: usize, message: &str| Error::Config { line, message: message.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        if lines.next().map(|(_, l)| l) != Some("l,epsilon,rule") {
            return Err(bad(1, "expected 'l,epsilon,rule' header"));
        }
        let (ln, meta) = lines.next().ok_or_else(|| bad(2, "missing metadata row"))?;
        let meta: Vec<&str> = meta.split(',').collect();
        if meta.len() != 3 {
            return Err(bad(ln, "metadata row needs three fields"));
        }
        let l: usize = meta[0].parse().map_err(|_| bad(ln, "bad l"))?;
        let epsilon: f64 = meta[1].parse().map_err(|_| bad(ln, "bad epsilon"))?;
        let rule = match meta[2] {
            "keep" => TruncationRule::KeepAboveTolerance,
            "first-below" => TruncationRule::FirstBelowTolerance,
            _ => return Err(bad(ln, "rule must be 'keep' or 'first-below'")),
        };
        let mut numbers = |tag: &str| -> Result<Vec<f64>> {
            let (ln, row) = lines.next().ok_or_else(|| bad(0, &format!("missing {tag} row")))?;
            let mut it = row.split(',');
            if !it.next().is_some_and(|t| t.starts_with(tag)) {
                return Err(bad(ln, &format!("expected a {tag} row")));
            }
            it.map(|v| v.trim().parse::<f64>().map_err(|_| bad(ln, &format!("bad number '{v}'")))).collect()
        };
        let sigma = numbers("sigma")?;
        let mean = numbers("mean")?;
        let mut cols = Vec::new();
        while let Ok(c) = numbers("phi") {
            if c.len() != mean.len() {
                return Err(bad(0, "basis vector length differs from the mean"));
            }
            cols.push(c);
        }
        if cols.is_empty() || l == 0 || l > cols.len() {
            return Err(bad(0, "basis file holds no usable vectors"));
        }
        let mut vectors = DenseMatrix::zeros(mean.len(), cols.len());
        for (j, c) in cols.iter().enumerate() {
            vectors.set_column(j, c);
        }
        Ok(PODBasis { mean, vectors, sigma, l, epsilon, rule })
    }
}

pub fn pod_truncate(sigma: &[f64], epsilon: f64, rule: TruncationRule) -> usize {
    let keep = sigma.iter().take_while(|s| *s * *s >= epsilon).count();
    let l = match rule {
        TruncationRule::KeepAboveTolerance => keep,
        TruncationRule::FirstBelowTolerance => (keep + 1).min(sigma.len()),
    };
    l.max(1)
}

const DROP_TOLERANCE: f64 = 1e-14;

/// Mean-centered POD of the columns of `snapshots` via the eigenpairs of the
/// `P × P` Gram matrix. Rows flagged in `pinned` are excluded from the basis.
pub fn pod_from_snapshots(
    snapshots: &DenseMatrix,
    pinned: &[bool],
    epsilon: f64,
    rule: TruncationRule,
) -> Result<(PODBasis, Vec<String>)> {
    let (n, p) = (snapshots.rows(), snapshots.cols());
    if p < 2 {
        return Err(Error::InvalidArgument("POD needs at least two snapshots".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("truncation tolerance must be positive".into()));
    }
    let mean: DenseVector = (0..n).map(|i| snapshots.row(i).iter().sum::<f64>() / p as f64).collect();
    let centered = DenseMatrix::from_fn(n, p, |i, j| if pinned.get(i).copied().unwrap_or(false) { 0.0 } else { snapshots[(i, j)] - mean[i] });

    let ct = centered.transpose();
    let gram = DenseMatrix::from_fn(p, p, |a, b| dot(ct.row(a), ct.row(b)));
    let eig = sym_eigen_descending(&gram)?;
    // σ_k = ‖𝒱ψ_k‖ rather than √λ_k: the square root cannot resolve σ below √ε·σ₁
    let mut images: Vec<(f64, DenseVector)> = (0..n.min(p))
        .map(|k| {
            let col = centered.matvec(&eig.vectors.column(k));
            (dot(&col, &col).sqrt(), col)
        })
        .collect();
    images.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sigma: Vec<f64> = images.iter().map(|(s, _)| if s.is_finite() { *s } else { 0.0 }).collect();

    let mut notes = Vec::new();
    let s1 = sigma[0];
    let rank = if s1 == 0.0 { 0 } else { sigma.iter().take_while(|s| **s >= DROP_TOLERANCE * s1).count() };
    let vectors = if rank == 0 {
        notes.push("centered snapshots vanish; falling back to the normalized mean direction".to_string());
        let free: DenseVector = mean.iter().zip(pinned.iter().chain(std::iter::repeat(&false))).map(|(v, pin)| if *pin { 0.0 } else { *v }).collect();
        let norm = dot(&free, &free).sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateMode("snapshots carry no free component".into()));
        }
        DenseMatrix::new(n, 1, free.iter().map(|v| v / norm).collect())?
    } else {
        let mut phi = DenseMatrix::zeros(n, rank);
        for (k, (s, col)) in images.iter().take(rank).enumerate() {
            phi.set_column(k, &col.iter().map(|v| v / s).collect::<Vec<_>>());
        }
        // directions near the round-off level lose orthogonality
        orthonormalize_columns(&phi)
    };
    let l = pod_truncate(&sigma, epsilon, rule).min(vectors.cols());
    Ok((PODBasis { mean, vectors, sigma, l, epsilon, rule }, notes))
}

/// Two passes of modified Gram–Schmidt; leading spans are preserved.
fn orthonormalize_columns(a: &DenseMatrix) -> DenseMatrix {
    let cols: Vec<DenseVector> = (0..a.cols()).map(|j| a.column(j)).collect();
    let mut q: Vec<DenseVector> = Vec::with_capacity(cols.len());
    for mut v in cols {
        for _ in 0..2 {
            for prev in &q {
                let c = dot(prev, &v);
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    let mut out = DenseMatrix::zeros(a.rows(), q.len());
    for (j, v) in q.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Solves HiMod at every sample (concurrently under `exec`) and extracts the POD basis.
pub fn hipod_offline(
    problem: &ProblemSpec,
    basis: &ModalBasis,
    grid: &Grid1D,
    samples: &[f64],
    epsilon: f64,
    rule: TruncationRule,
    exec: Exec,
) -> Result<(SnapshotSet, PODBasis, Vec<String>)> {
    let (lo, hi) = problem.mu_interval()?;
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("HiPOD needs at least two samples".into()));
    }
    if let Some(&mu) = samples.iter().find(|mu| !(lo..=hi).contains(*mu)) {
        return Err(Error::OutOfRange { value: mu, min: lo, max: hi });
    }
    let solutions: Vec<Result<HiModSolution>> =
        exec.map_indexed(samples.len(), |i| himod_solve_with(&problem.with_mu(samples[i]), basis, grid, Exec::Sequential));
    let n = basis.m() * grid.n_nodes();
    let mut matrix = DenseMatrix::zeros(n, samples.len());
    for (i, s) in solutions.into_iter().enumerate() {
        matrix.set_column(i, s?.vector());
    }
    let parts = himod_parts(problem, basis, grid)?;
    let mut pinned = vec![false; n];
    for &(c, _) in &parts.constraints {
        pinned[c] = true;
    }
    let (pod, notes) = pod_from_snapshots(&matrix, &pinned, epsilon, rule)?;
    Ok((SnapshotSet { samples: samples.to_vec(), matrix }, pod, notes))
}

/// `P` equispaced samples on `[lo, hi]`, both ends included.
pub fn uniform_samples(lo: f64, hi: f64, p: usize) -> Vec<f64> {
    if p == 1 {
        return vec![lo];
    }
    (0..p).map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64).collect()
}

pub fn random_samples(lo: f64, hi: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Where the reduced space is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanHandling {
    /// `ū + Φ u_POD`.
    #[default]
    Offset,
    /// `u_D + Φ u_POD` with only the Dirichlet values as anchor.
    Lift,
    /// `u_D + [Φ, ū_free] u_POD`, the free part of the mean appended as an extra vector.
    Append,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnlineMode {
    /// Reassemble the HiMod system at `μ*` and project it.
    Literal,
    /// Combine projected blocks precomputed from the affine split.
    Affine,
}

/// Reduced model with projected affine blocks, ready for online queries.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    phi: DenseMatrix,
    base: DenseVector,
    diffusion: DenseMatrix,
    advection: DenseMatrix,
    loads: Vec<(Option<ScalarFunction1D>, DenseVector)>,
    diffusion_base: DenseVector,
    advection_base: DenseVector,
    grid: Grid1D,
    basis: ModalBasis,
    problem: ProblemSpec,
}

fn project(phi: &DenseMatrix, a: &DenseMatrix) -> DenseMatrix {
    phi.transpose().matmul(&a.matmul(phi))
}

/// Appends the free part of `v`, orthogonalized against the columns of `phi`.
fn append_direction(phi: &DenseMatrix, v: &[f64]) -> DenseMatrix {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for j in 0..phi.cols() {
            let c = phi.column(j);
            let proj = dot(&c, &w);
            w.iter_mut().zip(&c).for_each(|(a, b)| *a -= proj * b);
        }
    }
    let norm = dot(&w, &w).sqrt();
    if norm <= 1e-12 * dot(v, v).sqrt() {
        return phi.clone();
    }
    let mut out = DenseMatrix::zeros(phi.rows(), phi.cols() + 1);
    for i in 0..phi.rows() {
        out.row_mut(i)[..phi.cols()].copy_from_slice(phi.row(i));
        out[(i, phi.cols())] = w[i] / norm;
    }
    out
}

impl ReducedModel {
    pub fn new(problem: &ProblemSpec, basis: &ModalBasis, grid: &Grid1D, pod: &PODBasis, mean: MeanHandling) -> Result<Self> {
        let parts: HiModParts = himod_parts(problem, basis, grid)?;
        let mut phi = pod.phi();
        if phi.rows() != parts.dim() {
            return Err(Error::InvalidArgument("POD basis does not match the HiMod discretization".into()));
        }
        let base = match mean {
            MeanHandling::Offset => {
                let mut b = pod.mean.clone();
                for &(c, g) in &parts.constraints {
                    b[c] = g;
                }
                b
            }
            MeanHandling::Lift => parts.lift(),
            MeanHandling::Append => {
                let mut free = pod.mean.clone();
                for &(c, _) in &parts.constraints {
                    free[c] = 0.0;
                }
                phi = append_direction(&phi, &free);
                parts.lift()
            }
        };
        let phit = phi.transpose();
        Ok(Self {
            diffusion: project(&phi, &parts.diffusion),
            advection: project(&phi, &parts.advection),
            loads: parts.loads.iter().map(|(g, v)| (g.clone(), phit.matvec(v))).collect(),
            diffusion_base: phit.matvec(&parts.diffusion.matvec(&base)),
            advection_base: phit.matvec(&parts.advection.matvec(&base)),
            phi,
            base,
            grid: grid.clone(),
            basis: *basis,
            problem: problem.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.cols()
    }

    pub fn phi(&self) -> &DenseMatrix {
        &self.phi
    }

    /// Reduced coefficients at `μ*` from the precomputed blocks.
    pub fn solve_reduced(&self, mu: f64) -> Result<DenseVector> {
        let mut a = self.diffusion.scaled(mu);
        a.add_scaled(1.0, &self.advection);
        let mut f = vec![0.0; self.dim()];
        for (g, v) in &self.loads {
            let s = g.as_ref().map_or(1.0, |g| g.eval(mu));
            f.iter_mut().zip(v).for_each(|(a, b)| *a += s * b);
        }
        for i in 0..f.len() {
            f[i] -= mu * self.diffusion_base[i] + self.advection_base[i];
        }
        solve_dense(&a, &f)
    }

    /// Reduced coefficients at `μ*` after full HiMod reassembly.
    pub fn solve_reduced_literal(&self, mu: f64) -> Result<DenseVector> {
        let (a, mut f) = himod_assemble(&self.problem.with_mu(mu), &self.basis, &self.grid)?;
        for (r, v) in f.iter_mut().zip(a.matvec(&self.base)) {
            *r -= v;
        }
        let phit = self.phi.transpose();
        solve_dense(&project(&self.phi, &a), &phit.matvec(&f))
    }

    pub fn reconstruct(&self, reduced: &[f64]) -> DenseVector {
        let mut u = self.phi.matvec(reduced);
        u.iter_mut().zip(&self.base).for_each(|(a, b)| *a += b);
        u
    }

    pub fn online(&self, mu: f64, mode: OnlineMode) -> Result<HiModSolution> {
        let (lo, hi) = self.problem.mu_interval()?;
        if !(lo..=hi).contains(&mu) {
            return Err(Error::OutOfRange { value: mu, min: lo, max: hi });
        }
        let r = match mode {
            OnlineMode::Affine => self.solve_reduced(mu)?,
            OnlineMode::Literal => self.solve_reduced_literal(mu)?,
        };
        HiModSolution::from_vector(self.grid.clone(), self.basis, self.problem.domain, self.reconstruct(&r))
    }
}

pub fn hipod_online(
    problem: &ProblemSpec,
    basis: &ModalBasis,
    grid: &Grid1D,
    pod: &PODBasis,
    mu: f64,
    mode: OnlineMode,
) -> Result<HiModSolution> {
    ReducedModel::new(problem, basis, grid, pod, MeanHandling::default())?.online(mu, mode)
}

/// `‖a − b‖_{L²(Ω)} / ‖b‖_{L²(Ω)}` for HiMod fields on the same discretization,
/// using orthonormality of the modes: `‖u‖² = L_y Σ_k ũ_kᵀ M ũ_k`.
pub fn himod_relative_error(a: &HiModSolution, b: &HiModSolution) -> Result<f64> {
    if a.coeffs.rows() != b.coeffs.rows() || a.coeffs.cols() != b.coeffs.cols() {
        return Err(Error::InvalidArgument("HiMod solutions differ in size".into()));
    }
    let mass = assemble_mass_1d(&b.grid);
    let (mut diff, mut norm) = (0.0, 0.0);
    for k in 0..b.coeffs.rows() {
        let d: Vec<f64> = a.coeffs.row(k).iter().zip(b.coeffs.row(k)).map(|(p, q)| p - q).collect();
        diff += mass.bilinear(&d, &d);
        norm += mass.bilinear(b.coeffs.row(k), b.coeffs.row(k));
    }
    if norm == 0.0 {
        return Err(Error::DivisionByZero("reference HiMod solution vanishes".into()));
    }
    Ok((diff / norm).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupReport {
    pub trials: Vec<f64>,
    /// Median wall time per trial, seconds.
    pub himod: Vec<f64>,
    pub affine: Vec<f64>,
    pub literal: Vec<f64>,
    pub speedup: f64,
    pub literal_speedup: f64,
}

impl SpeedupReport {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "mu_star,himod_s,hipod_affine_s,hipod_literal_s")?;
        for i in 0..self.trials.len() {
            writeln!(w, "{:.14e},{:.14e},{:.14e},{:.14e}", self.trials[i], self.himod[i], self.affine[i], self.literal[i])?;
        }
        writeln!(w, "speedup_affine,{:.14e}", self.speedup)?;
        writeln!(w, "speedup_literal,{:.14e}", self.literal_speedup)?;
        Ok(())
    }
}

/// Ratio of mean full-order to mean reduced time.
pub fn speedup_from_timings(full: &[f64], reduced: &[f64]) -> Result<f64> {
    if full.is_empty() || full.len() != reduced.len() {
        return Err(Error::InvalidArgument("timings need one nonempty, equal-length list per method".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let r = mean(reduced);
    if r <= 0.0 {
        return Err(Error::DivisionByZero("reduced timings are zero".into()));
    }
    Ok(mean(full) / r)
}

fn median_time(reps: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut t = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        t.push(start.elapsed().as_secs_f64());
    }
    t.sort_by(f64::total_cmp);
    Ok(t[t.len() / 2])
}

/// Times `himod_solve` against online HiPOD queries (median of `reps ≥ 5` runs per trial).
pub fn hipod_speedup_report(model: &ReducedModel, trials: &[f64], reps: usize) -> Result<SpeedupReport> {
    if trials.is_empty() {
        return Err(Error::InvalidArgument("speedup needs at least one trial parameter".into()));
    }
    let reps = reps.max(5);
    let (mut himod, mut affine, mut literal) = (Vec::new(), Vec::new(), Vec::new());
    for &mu in trials {
        let p = model.problem.with_mu(mu);
        himod.push(median_time(reps, || himod_solve_with(&p, &model.basis, &model.grid, Exec::Sequential).map(|_| ()))?);
        affine.push(median_time(reps, || model.online(mu, OnlineMode::Affine).map(|_| ()))?);
        literal.push(median_time(reps, || model.online(mu, OnlineMode::Literal).map(|_| ()))?);
    }
    Ok(SpeedupReport {
        trials: trials.to_vec(),
        speedup: speedup_from_timings(&himod, &affine)?,
        literal_speedup: speedup_from_timings(&himod, &literal)?,
        himod,
        affine,
        literal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::presets;

    #[test]
    fn truncation_examples() {
        let s: Vec<f64> = [1.0, 1e-3, 1e-20_f64].iter().map(|v| v.sqrt()).collect();
        assert_eq!(pod_truncate(&s, 1e-10, TruncationRule::KeepAboveTolerance), 2);
        assert_eq!(pod_truncate(&s, 1e-10, TruncationRule::FirstBelowTolerance), 3);
        assert_eq!(pod_truncate(&s, 10.0, TruncationRule::KeepAboveTolerance), 1);
        assert_eq!(pod_truncate(&s, 1e-30, TruncationRule::KeepAboveTolerance), 3);
        assert_eq!(pod_truncate(&s, 1e-30, TruncationRule::FirstBelowTolerance), 3);
    }

    #[test]
    fn rank_one_snapshots() {
        let base = [1.0, 2.0, -1.0, 0.5];
        let dir = [0.3, -0.1, 0.2, 0.7];
        let s = DenseMatrix::from_fn(4, 6, |i, j| base[i] + (j as f64 - 2.0) * dir[i]);
        let (pod, _) = pod_from_snapshots(&s, &[false; 4], 1e-3, TruncationRule::KeepAboveTolerance).unwrap();
        assert!(pod.sigma[1] <= 1e-10 * pod.sigma[0]);
        assert_eq!(pod.l, 1);
        let phi = pod.phi();
        let norm = dot(&dir, &dir).sqrt();
        let c: f64 = (0..4).map(|i| phi[(i, 0)] * dir[i] / norm).sum();
        assert!((c.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_snapshots_fall_back_to_mean() {
        let s = DenseMatrix::from_fn(3, 4, |i, _| [0.0, 3.0, 4.0][i]);
        let (pod, notes) = pod_from_snapshots(&s, &[true, false, false], 1e-8, TruncationRule::KeepAboveTolerance).unwrap();
        assert_eq!(pod.l, 1);
        assert_eq!(notes.len(), 1);
        assert_eq!(pod.phi().column(0), vec![0.0, 0.6, 0.8]);
    }

    #[test]
    fn csv_round_trip() {
        let s = DenseMatrix::from_fn(5, 4, |i, j| ((i * 3 + j * j) as f64).sin());
        let (pod, _) = pod_from_snapshots(&s, &[false; 5], 1e-3, TruncationRule::FirstBelowTolerance).unwrap();
        let mut buf = Vec::new();
        pod.write_csv(&mut buf).unwrap();
        let back = PODBasis::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!((back.l, back.rule), (pod.l, pod.rule));
        for (a, b) in back.vectors.as_slice().iter().zip(pod.vectors.as_slice()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(PODBasis::read_csv("l,epsilon,rule\n1,1e-3,keep\nsigma,1\n").is_err());
    }

    #[test]
    fn speedup_arithmetic() {
        assert_eq!(speedup_from_timings(&[0.5], &[0.5]).unwrap(), 1.0);
        assert!(speedup_from_timings(&[], &[]).is_err());
    }

    #[test]
    fn seeded_samples_are_reproducible() {
        let a = random_samples(1.0, 5.0, 30, 7);
        assert_eq!(a, random_samples(1.0, 5.0, 30, 7));
        assert!(a.iter().all(|m| (1.0..=5.0).contains(m)));
        assert_eq!(uniform_samples(1.0, 5.0, 5), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn small_offline_online_roundtrip() {
        let p = presets::inlet_channel();
        let basis = ModalBasis::sine(3).unwrap();
        let grid = Grid1D::uniform(0.0, 3.0, 10).unwrap();
        let samples = uniform_samples(1.0, 5.0, 12);
        let (snaps, pod, _) =
            hipod_offline(&p, &basis, &grid, &samples, 1e-20, TruncationRule::KeepAboveTolerance, Exec::default()).unwrap();
        assert_eq!(snaps.matrix.cols(), 12);
        let phi = pod.phi();
        let mut g = phi.transpose().matmul(&phi);
        g.add_scaled(-1.0, &DenseMatrix::identity(phi.cols()));
        assert!(g.max_abs() < 1e-10);

        let model = ReducedModel::new(&p, &basis, &grid, &pod, MeanHandling::Offset).unwrap();
        let a = model.online(2.2, OnlineMode::Affine).unwrap();
        let b = model.online(2.2, OnlineMode::Literal).unwrap();
        assert!(himod_relative_error(&a, &b).unwrap() < 1e-12);
        assert!(model.online(6.0, OnlineMode::Affine).is_err());
        assert!(hipod_offline(&p, &basis, &grid, &[1.0, 7.0], 1e-10, TruncationRule::KeepAboveTolerance, Exec::Sequential).is_err());
    }
}
