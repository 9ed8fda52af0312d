//! Dense matrices, LU solves with row pivoting and a cyclic Jacobi symmetric
//! eigensolver.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::exec::Exec;

pub type DenseVector = Vec<f64>;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`
    pub fn tr_matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                axpy(*xi, self.row(i), &mut y);
            }
        }
        y
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != 0.0 {
                    axpy(a, other.row(k), orow);
                }
            }
        }
        out
    }

    /// `uᵀ A v` with `u` on the row (test) side.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.rows);
        assert_eq!(v.len(), self.cols);
        u.iter()
            .enumerate()
            .filter(|(_, ui)| **ui != 0.0)
            .map(|(i, ui)| ui * dot(self.row(i), v))
            .sum()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        axpy(alpha, &other.data, &mut self.data);
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= alpha);
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs();
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

// Below this size the pivot-row updates are not worth dispatching to the pool.
const PAR_LU_MIN: usize = 192;

/// LU factorization with partial (row) pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        Self::with_exec(a, Exec::default())
    }

    pub fn with_exec(a: &DenseMatrix, exec: Exec) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let threshold = 1e-14 * a.max_abs();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let exec = if n >= PAR_LU_MIN { exec } else { Exec::Sequential };

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix { step: k, pivot: pmax, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            let pivot = pivot_row[k];
            exec.for_each_chunk_mut(tail, n, |_, row| {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        row[j] -= factor * pivot_row[j];
                    }
                }
            });
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> DenseVector {
        let n = self.n;
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] -= dot(row, &x[..i]);
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

/// Solves `A x = b` by LU with row pivoting.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    solve_dense_with(a, b, Exec::default())
}

pub fn solve_dense_with(a: &DenseMatrix, b: &[f64], exec: Exec) -> Result<DenseVector> {
    if b.len() != a.rows() {
        return Err(Error::InvalidArgument(format!(
            "rhs length {} does not match {} rows",
            b.len(),
            a.rows()
        )));
    }
    Ok(LuFactors::with_exec(a, exec)?.solve(b))
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("Cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::InvalidArgument("matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &DenseMatrix, b: &[f64]) -> DenseVector {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &x[..i]);
        x[i] = (x[i] - s) / l[(i, i)];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub fn solve_lower_transposed(l: &DenseMatrix, b: &[f64]) -> DenseVector {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        x[i] /= l[(i, i)];
        let xi = x[i];
        for k in 0..i {
            x[k] -= l[(i, k)] * xi;
        }
    }
    x
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, factorized in
/// place by LU with partial pivoting. Rows keep `kl` extra slots for the
/// fill-in that row interchanges create.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, band: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.band[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i},{j}) outside the band");
        let s = self.slot(i, j);
        self.band[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.band[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let threshold = 1e-14 * self.band.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut pmax = -1.0;
            for i in k..=last_row {
                let v = self.band[self.slot(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix { step: k, pivot: pmax, threshold });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.band.swap(a, b);
                }
            }
            let pivot = self.band[self.slot(k, k)];
            for i in k + 1..=last_row {
                let sik = self.slot(i, k);
                let factor = self.band[sik] / pivot;
                self.band[sik] = factor;
                if factor != 0.0 {
                    for j in k + 1..=last_col {
                        let (a, b) = (self.slot(i, j), self.slot(k, j));
                        self.band[a] -= factor * self.band[b];
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> DenseVector {
        let m = &self.m;
        let n = m.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + m.kl).min(n.saturating_sub(1)) {
                    x[i] -= m.band[m.slot(i, k)] * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let hi = (i + m.kl + m.ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= m.band[m.slot(i, j)] * x[j];
            }
            x[i] = s / m.band[m.slot(i, i)];
        }
        x
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending and the
/// matching eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DenseVector,
    pub vectors: DenseMatrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigen-decomposition.
///
/// Sweeps continue past the `1e-12 ‖G‖_F` off-diagonal target until every
/// remaining off-diagonal entry is negligible relative to its two diagonal
/// entries, which keeps small eigenvalues of Gram matrices accurate.
pub fn sym_eigen_descending(g: &DenseMatrix) -> Result<SymEigen> {
    if !g.is_square() {
        return Err(Error::InvalidArgument("eigen-decomposition needs a square matrix".into()));
    }
    if !g.is_symmetric(1e-12) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let n = g.rows();
    let mut a = g.clone();
    // symmetrize exactly so rotations see identical (p,q)/(q,p) entries
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return Ok(SymEigen { values: vec![0.0; n], vectors: v });
    }
    let abs_floor = 1e-300_f64.max(1e-22 * fro);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let rel = f64::EPSILON * (app.abs() * aqq.abs()).sqrt();
                if apq.abs() <= rel.max(abs_floor) {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let off: f64 = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)] * a[(i, j)])
        .sum::<f64>()
        .sqrt();
    if off > 1e-12 * fro {
        return Err(Error::NonConvergence { iterations: JACOBI_MAX_SWEEPS, last_increment: off / fro });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}
